"""Serialized syntax-tree sequences for syntactic similarity.

A snippet's syntactic view is the pre-order sequence of named node kinds,
with punctuation and other concrete-syntax trivia already absent from the
tree. Sequences are capped so pairwise edit distance stays tractable; the
pre-cap length is kept for diagnostics.

Parser backends are pluggable: a backend maps (code, language) to a typed
tree. The built-in backend is the recursive-descent parser in
:mod:`.cparser`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Tuple

from ..errors import ParseFailure, UsageError
from .cparser import Node, parse_source

DEFAULT_SEQUENCE_CAP = 2000

ParserBackend = Callable[[str, str], Node]

_BACKENDS: Dict[str, ParserBackend] = {
    "builtin": parse_source,
}


def available_backends() -> Tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def register_backend(name: str, backend: ParserBackend) -> None:
    _BACKENDS[name] = backend


@dataclass(frozen=True, slots=True)
class AstSequence:
    """Capped pre-order node-kind sequence; never empty for parsed input."""

    items: Tuple[str, ...]
    source_len: int

    def __len__(self) -> int:
        return len(self.items)


def parse_to_ast_sequence(
    code: str,
    cap: int = DEFAULT_SEQUENCE_CAP,
    language: str = "auto",
    backend: str = "builtin",
) -> AstSequence:
    """Parse ``code`` and serialize its tree into an :class:`AstSequence`.

    ``language`` may be ``"c"``, ``"cpp"`` or ``"auto"`` (try C first, then
    C++). Unparseable input raises :class:`ParseFailure`; the record is
    expected to be excluded upstream rather than partially represented.
    """
    if cap < 1:
        raise UsageError(f"sequence cap must be >= 1, got {cap}")
    try:
        parse = _BACKENDS[backend]
    except KeyError:
        raise UsageError(
            f"unknown parser backend {backend!r}; available: {available_backends()}"
        ) from None
    if language == "auto":
        try:
            tree = parse(code, "c")
        except ParseFailure:
            try:
                tree = parse(code, "cpp")
            except ParseFailure as exc:
                raise ParseFailure(f"not parseable as C or C++: {exc}") from None
    else:
        tree = parse(code, language)
    items = tuple(tree.preorder_kinds())
    return AstSequence(items=items[:cap], source_len=len(items))
