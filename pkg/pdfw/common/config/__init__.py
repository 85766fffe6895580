from .parseconfig import load_params, check_params, parse_params, set_nested
from .parsers import PARSER_FACTORY
