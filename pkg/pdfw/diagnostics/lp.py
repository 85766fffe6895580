"""
Dense linear programming
------------------------
Two-phase primal simplex on a full tableau with Bland's anti-cycling rule.
It backs every polytope query of the diagnostics layer; problem sizes are
small (a few hundred variables at most), so no sparse linear algebra is used.

Problems are stated as

    min (or max)  c^T x
    s.t.          A_k x  (<=, >=, =)  rhs_k   for each row k
                  lo_j <= x_j <= hi_j         (None for an infinite bound)
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from pdfw.common import logger, ConditioningError, ContractViolation

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"

SENSES = ("<=", ">=", "=")
MAX_ITERATIONS = 50_000


@dataclass
class LPResult:
    """
    Outcome of `lp_solve`.

    Attributes:
        status (str): Optimal, Infeasible or Unbounded
        x (ndarray): optimal basic solution (Optimal only)
        value (float): optimal objective value, in the sense of the input
        marginals (ndarray): sensitivity of `value` to each constraint
            right-hand side, in input row order. For a minimization, rows
            with sense <= have nonpositive marginals.
        dual_value (float): objective value of the dual solution built from
            the final basis; equals `value` up to rounding at optimality
        iterations (int): number of pivots over both phases
    """

    status: str
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    marginals: Optional[np.ndarray] = None
    dual_value: Optional[float] = None
    iterations: int = 0

    @property
    def success(self) -> bool:
        return self.status == OPTIMAL


def lp_solve(
    c,
    A=None,
    rhs=None,
    senses: Optional[Sequence[str]] = None,
    bounds=None,
    maximize: bool = False,
    tol: float = 1e-9,
    pivot_tol: float = 1e-11,
) -> LPResult:
    """
    Solves a dense LP with the two-phase simplex method.

    Args:
        c: objective coefficients (n)
        A: constraint rows (m x n), optional
        rhs: right-hand sides (m)
        senses: one of "<=", ">=", "=" per row. Defaults to "<=".
        bounds: (lo, hi) for every variable, or a single pair used for all.
            Defaults to (0, None), i.e. x >= 0.
        maximize (bool): maximize instead of minimize
        tol (float): optimality tolerance on reduced costs
        pivot_tol (float): smallest admissible pivot element

    Raises:
        ConditioningError: when only pivots below `pivot_tol` remain
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    n = len(c)
    A = np.zeros((0, n)) if A is None else np.asarray(A, dtype=float).reshape(-1, n)
    m = A.shape[0]
    rhs = np.zeros(0) if rhs is None else np.asarray(rhs, dtype=float).reshape(-1)
    senses = ["<="] * m if senses is None else list(senses)
    if len(rhs) != m or len(senses) != m:
        raise ContractViolation(
            f"LP with {m} rows needs {m} right-hand sides and senses, "
            f"got {len(rhs)} and {len(senses)}"
        )
    for sense in senses:
        if sense not in SENSES:
            raise ContractViolation(f"Unknown constraint sense `{sense}`")
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(rhs))):
        raise ContractViolation("LP data must be finite")

    if bounds is None:
        bounds = [(0.0, None)] * n
    elif len(bounds) == 2 and not isinstance(bounds[0], (tuple, list)):
        bounds = [tuple(bounds)] * n
    if len(bounds) != n:
        raise ContractViolation(f"Need {n} variable bounds, got {len(bounds)}")

    c_min = -c if maximize else c

    ## Substitute x = shift + transform @ z with z >= 0
    shift = np.zeros(n)
    columns = []
    upper_rows = []
    for j, (lo, hi) in enumerate(bounds):
        lo = -np.inf if lo is None else float(lo)
        hi = np.inf if hi is None else float(hi)
        if lo > hi:
            return LPResult(INFEASIBLE)
        if np.isfinite(lo):
            shift[j] = lo
            columns.append((j, 1.0))
            if np.isfinite(hi):
                upper_rows.append((len(columns) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[j] = hi
            columns.append((j, -1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))
    nz = len(columns)
    transform = np.zeros((n, nz))
    for k, (j, sign) in enumerate(columns):
        transform[j, k] = sign

    rows = [A @ transform]
    row_rhs = [rhs - A @ shift]
    row_senses = list(senses)
    if upper_rows:
        extra = np.zeros((len(upper_rows), nz))
        for r, (k, width) in enumerate(upper_rows):
            extra[r, k] = 1.0
        rows.append(extra)
        row_rhs.append(np.array([width for _, width in upper_rows]))
        row_senses += ["<="] * len(upper_rows)
    A_std = np.vstack(rows)
    r_std = np.concatenate(row_rhs)
    n_rows = A_std.shape[0]

    ## Nonnegative right-hand sides
    flip = np.where(r_std < 0, -1.0, 1.0)
    A_std = A_std * flip[:, None]
    r_std = r_std * flip
    flipped = {"<=": ">=", ">=": "<=", "=": "="}
    row_senses = [
        flipped[sense] if sign < 0 else sense for sense, sign in zip(row_senses, flip)
    ]

    ## Slack, surplus and artificial columns
    slack_cols = [k for k, sense in enumerate(row_senses) if sense != "="]
    art_rows = [k for k, sense in enumerate(row_senses) if sense != "<="]
    n_cols = nz + len(slack_cols) + len(art_rows)
    matrix = np.zeros((n_rows, n_cols))
    matrix[:, :nz] = A_std
    basis = np.full(n_rows, -1)
    for offset, k in enumerate(slack_cols):
        matrix[k, nz + offset] = 1.0 if row_senses[k] == "<=" else -1.0
        if row_senses[k] == "<=":
            basis[k] = nz + offset
    first_art = nz + len(slack_cols)
    for offset, k in enumerate(art_rows):
        matrix[k, first_art + offset] = 1.0
        basis[k] = first_art + offset

    tableau = np.hstack([matrix, r_std[:, None]])
    is_art = np.zeros(n_cols, dtype=bool)
    is_art[first_art:] = True
    iterations = 0

    ## Phase I
    if art_rows:
        cost = is_art.astype(float)
        _, iterations = _simplex(
            tableau, basis, cost, np.ones(n_cols, dtype=bool), tol, pivot_tol, iterations
        )
        infeasibility = cost[basis] @ tableau[:, -1]
        if infeasibility > tol * max(1.0, np.max(r_std, initial=0.0)):
            return LPResult(INFEASIBLE, iterations=iterations)

        # Drive the remaining (zero-level) artificials out of the basis
        keep = np.ones(n_rows, dtype=bool)
        for i in range(n_rows):
            if not is_art[basis[i]]:
                continue
            candidates = np.flatnonzero(
                ~is_art & (np.abs(tableau[i, :-1]) > pivot_tol)
            )
            if len(candidates) > 0:
                _pivot(tableau, basis, i, candidates[0])
                iterations += 1
            else:
                keep[i] = False
        tableau = tableau[keep]
        basis = basis[keep]
        kept_rows = np.flatnonzero(keep)
    else:
        kept_rows = np.arange(n_rows)

    ## Phase II
    cost = np.zeros(n_cols)
    cost[:nz] = c_min @ transform
    status, iterations = _simplex(
        tableau, basis, cost, ~is_art, tol, pivot_tol, iterations
    )
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, iterations=iterations)

    z = np.zeros(n_cols)
    z[basis] = tableau[:, -1]
    x = shift + transform @ z[:nz]
    value = float(c_min @ x)

    # Duals from B^T y = c_B on the (flipped) standard form
    B = matrix[kept_rows][:, basis]
    try:
        y = np.linalg.solve(B.T, cost[basis])
    except np.linalg.LinAlgError:
        logger.warning("Singular final basis, dual values computed by least squares")
        y = np.linalg.lstsq(B.T, cost[basis], rcond=None)[0]
    y_full = np.zeros(n_rows)
    y_full[kept_rows] = y
    marginals = (flip * y_full)[:m]
    dual_value = float(y @ r_std[kept_rows] + c_min @ shift)

    if maximize:
        value, dual_value, marginals = -value, -dual_value, -marginals
    return LPResult(OPTIMAL, x, value, marginals, dual_value, iterations)


def _pivot(tableau, basis, row, col):
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0
    basis[row] = col


def _simplex(tableau, basis, cost, allowed, tol, pivot_tol, iterations):
    """Bland's rule: lowest entering index, then lowest leaving basic index"""
    while True:
        reduced = cost - cost[basis] @ tableau[:, :-1]
        entering = np.flatnonzero(allowed & (reduced < -tol))
        if len(entering) == 0:
            return OPTIMAL, iterations
        col = entering[0]
        column = tableau[:, col]
        eligible = column > pivot_tol
        if not np.any(eligible):
            if np.any(column > 0):
                raise ConditioningError(
                    f"Only pivots below {pivot_tol} left in column {col}"
                )
            return UNBOUNDED, iterations
        ratios = np.full(len(column), np.inf)
        ratios[eligible] = np.maximum(tableau[eligible, -1], 0.0) / column[eligible]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, best))
        row = ties[np.argmin(basis[ties])]
        _pivot(tableau, basis, row, col)
        iterations += 1
        if iterations > MAX_ITERATIONS:
            raise ConditioningError(
                f"Simplex did not terminate within {MAX_ITERATIONS} pivots"
            )
