"""Lexical code views: CamelCase splitting and token-set extraction.

Both functions are total: any UTF-8 text yields a result, no parsing
involved.
"""

from __future__ import annotations

import re
from typing import FrozenSet, List

# Segments inside an alphanumeric run: acronym (uppercase run not followed
# by lowercase), capitalized word, lowercase word, digit run.
_CAMEL_SEGMENT = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+|[0-9]+")

_ALNUM_RUN = re.compile(r"[A-Za-z0-9]+")

# Multi-character operators first so the alternation prefers them.
_OPERATORS = [
    "<<=", ">>=", "...", "->", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "::", "##",
]

_CODE_TOKEN = re.compile(
    r"""
    "(?:\\.|[^"\\\n])*"?        # string literal (tolerates unterminated)
    |'(?:\\.|[^'\\\n])*'?       # char literal
    |[A-Za-z_][A-Za-z0-9_]*     # identifier / keyword
    |0[xX][0-9a-fA-F]+[uUlL]*   # hex literal
    |(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[fFuUlL]*   # numeric literal
    |""" + "|".join(re.escape(op) for op in _OPERATORS) + r"""
    |[^\sA-Za-z0-9_]            # any other symbol, one char at a time
    """,
    re.VERBOSE,
)


def split_camel_case(code: str) -> List[str]:
    """Split text into identifier segments at CamelCase boundaries.

    Non-alphanumeric characters separate runs; within a run, boundaries are
    lower-to-upper transitions, acronym-to-word transitions (``HTTPServer``
    gives ``HTTP``, ``Server``) and letter/digit transitions. Order is
    preserved and no empty segments are produced.
    """
    tokens: List[str] = []
    for run in _ALNUM_RUN.findall(code):
        tokens.extend(_CAMEL_SEGMENT.findall(run))
    return tokens


def tokenize_code(code: str) -> FrozenSet[str]:
    """Extract the deduplicated token set of a snippet.

    Splits on whitespace; identifiers, keywords, literals and operator
    symbols each become one token. Multi-character operators stay joined
    (``==`` is a single token).
    """
    return frozenset(_CODE_TOKEN.findall(code))
