"""
Parses user parameters against the typed schema in `config_default.yaml`.

The schema is a nested dict of groups. A node with a `type` key is a leaf,
parsed by the matching parser of the PARSER_FACTORY. User values override
the defaults; keys the schema does not declare are reported as obsolete.
"""

from pdfw.common import logger
from pdfw.common.utils import load_yaml

from .parsers import PARSER_FACTORY

SCHEMA_FILE = "config_default.yaml"


def set_nested(dictionary, keys, value):
    for key in keys[:-1]:
        dictionary = dictionary.setdefault(key, {})
    dictionary[keys[-1]] = value


def build_parser_tree(schema, keys=()):
    """Same group structure as `schema`, with a parser at every leaf"""
    tree = {}
    for key, node in schema.items():
        path = keys + (key,)
        if isinstance(node, dict) and "type" not in node:
            tree[key] = build_parser_tree(node, path)
        else:
            tree[key] = PARSER_FACTORY.create_parser(node, path)
    return tree


def parse_params(parser_tree, user_params):
    return {
        key: parse_params(node, user_params) if isinstance(node, dict) else node.get(user_params)
        for key, node in parser_tree.items()
    }


def obsolete_keys(user_params, parser_tree, keys=()):
    """Key paths of `user_params` that the schema does not declare"""
    obsolete = []
    for key, value in user_params.items():
        path = keys + (str(key),)
        node = parser_tree.get(key)
        if node is None:
            obsolete.append(path)
        elif isinstance(node, dict):
            # A group given as a plain value
            if not isinstance(value, dict):
                obsolete.append(path)
            else:
                obsolete.extend(obsolete_keys(value, node, path))
    return obsolete


def check_params(input_params, return_parser_tree=False):
    parser_tree = build_parser_tree(load_yaml(SCHEMA_FILE))
    input_params = input_params or {}

    obsolete = obsolete_keys(input_params, parser_tree)
    for path in obsolete:
        logger.warning(f"Obsolete key: {' - '.join(path)}")
    if obsolete:
        raise RuntimeWarning(f"{len(obsolete)} config parameter(s) are obsolete.")

    parsed_params = parse_params(parser_tree, input_params)
    if return_parser_tree:
        return parsed_params, parser_tree
    return parsed_params


def load_params(user_yaml_filename="config.yaml"):
    return check_params(load_yaml(user_yaml_filename))
