"""
Typed parsers for the leaves of `config_default.yaml`.

Every leaf of the schema is a dict with at least a `type`. The PARSER_FACTORY
maps that type to one of the classes below:

- Parser (*)
    - TextParser            "str"
    - InstancePathParser    "filepath"
    - BoolParser            "bool"
    - NumberParser (*)
        - IntParser         "int"
        - FloatParser       "float"
    - EnumParser            "enum"
    - ListParser            "list"

(*): Abstract class

A parser knows the key path of its leaf, so every error names the parameter
it was raised for.
"""

from abc import ABC, abstractmethod
import os
import numpy as np

from pdfw.common.utils import inputdata_path

TRUE_VALUES = (True, "true", "True", "yes")
FALSE_VALUES = (False, "false", "False", "no")


class ParserFactory:
    def __init__(self):
        self._parsers = {}

    def register(self, parser_class):
        self._parsers[parser_class.typename] = parser_class
        return parser_class

    def create_parser(self, node: dict, keys: tuple = ()) -> "Parser":
        typename = node.get("type") if isinstance(node, dict) else None
        try:
            parser_class = self._parsers[typename]
        except KeyError:
            raise KeyError(
                f"No parser for config type `{typename}` (parameter `{' > '.join(keys)}`)"
            ) from None
        return parser_class(node, keys)


PARSER_FACTORY = ParserFactory()


class Parser(ABC):
    typename = None

    def __init__(self, node: dict, keys: tuple = ()):
        self.type = node["type"]
        self.keys = tuple(keys)
        self.descr = node.get("descr", "")
        self.default = node.get("default", None)
        self.can_be_false = node.get("can_be_false", False)

    @property
    def name(self):
        return " > ".join(self.keys) if self.keys else self.type

    def error(self, message):
        raise ValueError(
            f"Invalid value for parameter `{self.name}`: {message}\n"
            f"    Description: {self.descr}\n"
            f"    Type: {self.type}. Default: {self.default}"
        )

    def get(self, user_params: dict):
        """Parses the user value at this parser's key path, or the default"""
        value = user_params
        for key in self.keys:
            if not isinstance(value, dict) or key not in value:
                return self.parse(self.default)
            value = value[key]
        return self.parse(value)

    def parse(self, value):
        if self.can_be_false and value in FALSE_VALUES:
            return False
        return self.convert(value)

    @abstractmethod
    def convert(self, value):
        pass

    def details(self):
        return ""

    def to_string(self):
        text = f"{self.descr}. Type: {self.type}. Default: {self.default}."
        if self.details():
            text += " " + self.details()
        if self.can_be_false:
            text += " Can also be false."
        return text

    def __repr__(self):
        return f"{self.__class__.__name__}({self.name}, default={self.default!r})"


@PARSER_FACTORY.register
class TextParser(Parser):
    typename = "str"

    def convert(self, value):
        if value is None:
            self.error("a value is required")
        return str(value)


@PARSER_FACTORY.register
class InstancePathParser(Parser):
    """Path of an instance file.

    A name that is not an existing path but matches a bundled instance
    (`two_user_convex` or `two_user_convex.yaml`) resolves to the file in
    `pdfw/inputdata/instances`.
    """

    typename = "filepath"

    def convert(self, value):
        if value is None:
            return False
        path = str(value)
        if os.path.exists(path):
            return path
        filename = path if path.endswith((".yaml", ".yml")) else path + ".yaml"
        bundled = inputdata_path("instances", filename)
        if os.path.dirname(path) == "" and os.path.exists(bundled):
            return bundled
        self.error(f"no file `{path}` and no bundled instance of that name")


@PARSER_FACTORY.register
class BoolParser(Parser):
    typename = "bool"

    def convert(self, value):
        if value in TRUE_VALUES:
            return True
        if value in FALSE_VALUES:
            return False
        self.error(f"{value!r} is not a boolean")


class NumberParser(Parser):
    """Numbers within [min, max], or within (min, max) when `exclusive: true`"""

    convert_fct = None

    def __init__(self, node, keys=()):
        super().__init__(node, keys)
        self.min = node.get("min", -np.inf)
        self.max = node.get("max", np.inf)
        self.exclusive = node.get("exclusive", False)

    def interval(self):
        left, right = ("(", ")") if self.exclusive else ("[", "]")
        return f"{left}{self.min}, {self.max}{right}"

    def convert(self, value):
        if isinstance(value, bool) or value is None:
            self.error(f"{value!r} is not a number")
        try:
            number = self.convert_fct(value)
        except (TypeError, ValueError):
            self.error(f"{value!r} can not be parsed to a {self.convert_fct.__name__}")
        if isinstance(value, float) and number != value:
            self.error(f"{value!r} is not an integer")
        if self.exclusive:
            inside = self.min < number < self.max
        else:
            inside = self.min <= number <= self.max
        if not inside:
            self.error(f"{number} not within {self.interval()}")
        return number

    def details(self):
        return f"Range: {self.interval()}."


@PARSER_FACTORY.register
class IntParser(NumberParser):
    typename = "int"
    convert_fct = int


@PARSER_FACTORY.register
class FloatParser(NumberParser):
    typename = "float"
    convert_fct = float


@PARSER_FACTORY.register
class EnumParser(Parser):
    typename = "enum"

    def __init__(self, node, keys=()):
        super().__init__(node, keys)
        self.allowed_values = list(node["values"])

    def convert(self, value):
        if value not in self.allowed_values:
            self.error(f"{value!r} not in allowed values {self.allowed_values}")
        return value

    def details(self):
        return f"Allowed values: {self.allowed_values}."


@PARSER_FACTORY.register
class ListParser(Parser):
    """Lists whose elements are parsed by the `values` node.

    Optional constraints: `min length`, and `increasing: true` for strictly
    increasing lists (the horizons of a plan).
    """

    typename = "list"

    def __init__(self, node, keys=()):
        super().__init__(node, keys)
        self.values_parser = (
            PARSER_FACTORY.create_parser(node["values"], keys) if "values" in node else None
        )
        self.min_length = node.get("min length", 0)
        self.increasing = node.get("increasing", False)

    def convert(self, value):
        if value is None:
            value = []
        if not isinstance(value, (list, tuple)):
            self.error(f"{value!r} is not a list")
        parsed = [
            self.values_parser.parse(element) if self.values_parser else element
            for element in value
        ]
        if len(parsed) < self.min_length:
            self.error(f"needs at least {self.min_length} element(s), got {parsed}")
        if self.increasing and any(a >= b for a, b in zip(parsed, parsed[1:])):
            self.error(f"{parsed} is not strictly increasing")
        return parsed

    def details(self):
        parts = []
        if self.values_parser is not None:
            parts.append(f"Elements: {self.values_parser.type}.")
        if self.increasing:
            parts.append("Strictly increasing.")
        return " ".join(parts)
