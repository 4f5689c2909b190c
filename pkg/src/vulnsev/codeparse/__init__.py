"""Code views consumed by the similarity math.

Three views of a source snippet:

* CamelCase-split token stream (input to the semantic encoder),
* deduplicated token set (lexical view),
* serialized syntax-tree node-kind sequence (syntactic view).
"""

from .tokens import split_camel_case, tokenize_code
from .astseq import AstSequence, parse_to_ast_sequence, available_backends
from .cparser import Node, parse_source

__all__ = [
    "split_camel_case",
    "tokenize_code",
    "AstSequence",
    "parse_to_ast_sequence",
    "available_backends",
    "Node",
    "parse_source",
]
