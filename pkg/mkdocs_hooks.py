"""
mkdocs hook: replaces `{params::reference}` in a page by the generated
parameter reference of `config_default.yaml`.
"""

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from pdfw.common.config.parseconfig import check_params

PLACEHOLDER = "{params::reference}"

_, PARSER_TREE = check_params({}, return_parser_tree=True)


def on_page_markdown(markdown, **kwargs):
    if PLACEHOLDER not in markdown:
        return markdown
    return markdown.replace(PLACEHOLDER, group_reference(PARSER_TREE))


def group_reference(tree, level=0, path=()):
    text = ""
    for key, node in tree.items():
        if isinstance(node, dict):
            # One header per group, nested groups get a deeper header
            text += f"\n{'#' * (level + 2)} {' > '.join(path + (key,))}\n\n"
            text += group_reference(node, level + 1, path + (key,))
        else:
            text += parameter_reference(node)
    return text


def parameter_reference(parser):
    default = f'"{parser.default}"' if isinstance(parser.default, str) else parser.default
    index = "".join(f'["{key}"]' for key in parser.keys)
    return f"""??? parameter "{parser.keys[-1]}"
    <span id="{'.'.join(parser.keys)}"></span>
    {parser.to_string()}

    Example usage:

    ```python hl_lines="2"
    params = load_params()
    params{index} = {default}
    experiment = Experiment(params)
    ```

"""
