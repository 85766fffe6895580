"""
Instance files
--------------
Instances are stored as YAML documents (schema version 1):

    version: 1
    name: two_user_example
    d: 2
    states:                      # one entry per state
      - probability: 0.5
        vertices: [[0, 0], [1, 0]]
      - probability: 0.5
        box: {lower: [0, 0], upper: [0, 1]}
      - probability: 0.0
        simplex: {dimension: 2, scale: 1.0}
    objective:
      id: quadratic              # linear, quadratic or sigmoidal
      params: {center: [0.3, 0.3], weight: 1.0}
    constraints:                 # optional
      A: [[1, 0]]
      b: [0.4]
    certificates:                # optional, re-verified at load
      slater_margin: 0.4
      gamma_star: [0.3, 0.3]
    graph:                       # optional, used by the distributed variant
      edges: [[0, 1], [1, 2]]
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import yaml

from pdfw.common import logger, ContractViolation, GenerationError
from pdfw.core.types import (
    BOX,
    FINITE_VERTICES,
    SIMPLEX,
    DecisionSet,
    LinearConstraints,
    ProblemInstance,
    StateModel,
)
from pdfw.problems.objectives import make_objective, objective_id

VERSION = 1
SLATER_TOLERANCE = 1e-6
GAMMA_STAR_TOLERANCE = 1e-4


@dataclass
class InstanceSpec:
    """Plain-data form of an instance file (see the module docstring)"""

    name: str
    d: int
    probabilities: List[float]
    decision_sets: List[dict]
    objective_id: str
    objective_params: dict
    A: Optional[list] = None
    b: Optional[list] = None
    slater_margin: Optional[float] = None
    gamma_star: Optional[list] = None
    edges: Optional[list] = None
    extra: dict = field(default_factory=dict)

    #######################
    # Conversion
    #######################

    @staticmethod
    def _decision_set(entry: dict) -> DecisionSet:
        if "vertices" in entry:
            return DecisionSet.finite(entry["vertices"])
        elif "box" in entry:
            return DecisionSet.box(entry["box"]["lower"], entry["box"]["upper"])
        elif "simplex" in entry:
            return DecisionSet.simplex(entry["simplex"]["dimension"], entry["simplex"].get("scale", 1.0))
        raise NotImplementedError(f"Decision set entry {sorted(entry)} not implemented")

    def to_instance(self, verify: bool = True) -> ProblemInstance:
        """
        Builds the ProblemInstance and re-verifies declared certificates.

        Raises:
            GenerationError: if a declared certificate does not hold
        """
        from pdfw.diagnostics.bounds import compute_bounds
        from pdfw.diagnostics.certificates import SlaterCertificate, certify_slater
        from pdfw.diagnostics.polytope import MixturePolytope, solve_gamma_star

        objective = make_objective(self.objective_id, **self.objective_params)
        if self.A is None:
            constraints = LinearConstraints.none(self.d)
        else:
            constraints = LinearConstraints(np.array(self.A, dtype=float).reshape(-1, self.d), self.b)
        inst = ProblemInstance(
            StateModel(self.probabilities),
            [self._decision_set(entry) for entry in self.decision_sets],
            objective,
            constraints,
            name=self.name,
        )
        if not verify:
            return inst.with_bounds(compute_bounds(inst))

        if self.slater_margin is not None:
            certificate = certify_slater(inst)
            margin = certificate.margin
            if (
                not isinstance(certificate, SlaterCertificate)
                or abs(margin - self.slater_margin) > SLATER_TOLERANCE
            ):
                raise GenerationError(
                    f"Instance `{self.name}` declares Slater margin {self.slater_margin}, "
                    f"but the LP gives {margin}"
                )
            inst.certificates["slater"] = certificate
            logger.info(f"Instance `{self.name}`: Slater margin {margin:.6g} re-verified")
        if self.gamma_star is not None:
            gamma_star, value = solve_gamma_star(inst, MixturePolytope.from_instance(inst))
            if np.linalg.norm(gamma_star - np.asarray(self.gamma_star)) > GAMMA_STAR_TOLERANCE:
                raise GenerationError(
                    f"Instance `{self.name}` declares gamma* = {self.gamma_star}, "
                    f"but the solver gives {gamma_star}"
                )
            inst.certificates["gamma_star"] = (gamma_star, value)
            logger.info(f"Instance `{self.name}`: gamma* re-verified")
        return inst.with_bounds(compute_bounds(inst))

    @classmethod
    def from_instance(cls, inst: ProblemInstance, edges=None) -> "InstanceSpec":
        decision_sets = []
        for decision_set in inst.decision_sets:
            if decision_set.kind == FINITE_VERTICES:
                decision_sets.append({"vertices": decision_set.vertices.tolist()})
            elif decision_set.kind == BOX:
                decision_sets.append(
                    {"box": {"lower": decision_set.lower.tolist(), "upper": decision_set.upper.tolist()}}
                )
            elif decision_set.kind == SIMPLEX:
                decision_sets.append(
                    {"simplex": {"dimension": decision_set.dimension, "scale": decision_set.scale}}
                )
            else:
                raise NotImplementedError(f"Cannot serialize decision sets of kind {decision_set.kind}")
        slater = inst.certificates.get("slater")
        gamma_star = inst.certificates.get("gamma_star")
        return cls(
            name=inst.name,
            d=inst.dimension,
            probabilities=inst.state_model.probabilities.tolist(),
            decision_sets=decision_sets,
            objective_id=objective_id(inst.objective),
            objective_params=inst.objective.params(),
            A=inst.constraints.A.tolist() if inst.constraints.N > 0 else None,
            b=inst.constraints.b.tolist() if inst.constraints.N > 0 else None,
            slater_margin=None if slater is None else float(slater.margin),
            gamma_star=None if gamma_star is None else np.asarray(gamma_star[0]).tolist(),
            edges=edges,
        )

    #######################
    # YAML
    #######################

    def to_dict(self) -> dict:
        states = [
            dict(probability=float(p), **entry)
            for p, entry in zip(self.probabilities, self.decision_sets)
        ]
        document = {
            "version": VERSION,
            "name": self.name,
            "d": int(self.d),
            "states": states,
            "objective": {"id": self.objective_id, "params": self.objective_params},
        }
        if self.A is not None:
            document["constraints"] = {"A": self.A, "b": list(self.b)}
        certificates = {}
        if self.slater_margin is not None:
            certificates["slater_margin"] = self.slater_margin
        if self.gamma_star is not None:
            certificates["gamma_star"] = list(self.gamma_star)
        if certificates:
            document["certificates"] = certificates
        if self.edges is not None:
            document["graph"] = {"edges": [list(edge) for edge in self.edges]}
        return document

    @classmethod
    def from_dict(cls, document: dict) -> "InstanceSpec":
        version = document.get("version")
        if version != VERSION:
            raise ContractViolation(f"Unsupported instance file version {version}, expected {VERSION}")
        try:
            states = document["states"]
            objective = document["objective"]
            constraints = document.get("constraints") or {}
            certificates = document.get("certificates") or {}
            return cls(
                name=document.get("name", "instance"),
                d=int(document["d"]),
                probabilities=[float(state["probability"]) for state in states],
                decision_sets=[
                    {k: v for k, v in state.items() if k != "probability"} for state in states
                ],
                objective_id=objective["id"],
                objective_params=objective.get("params") or {},
                A=constraints.get("A"),
                b=constraints.get("b"),
                slater_margin=certificates.get("slater_margin"),
                gamma_star=certificates.get("gamma_star"),
                edges=(document.get("graph") or {}).get("edges"),
            )
        except KeyError as err:
            raise ContractViolation(f"Instance file lacks the required key {err}") from err


def load_spec(path) -> InstanceSpec:
    try:
        with open(path, "r", encoding="utf8") as instancefile:
            document = yaml.safe_load(instancefile)
    except OSError as err:
        raise OSError(f"Could not read instance file {path}: {err}") from err
    return InstanceSpec.from_dict(document)


def load_instance(path, verify: bool = True) -> ProblemInstance:
    return load_spec(path).to_instance(verify)


def save_instance(instance_or_spec, path) -> None:
    spec = (
        instance_or_spec
        if isinstance(instance_or_spec, InstanceSpec)
        else InstanceSpec.from_instance(instance_or_spec)
    )
    try:
        with open(path, "w", encoding="utf8") as instancefile:
            yaml.safe_dump(spec.to_dict(), instancefile, sort_keys=False)
    except OSError as err:
        raise OSError(f"Could not write instance file {path}: {err}") from err
