"""Prompt assembly: demonstration ordering, template rendering, truncation.

The rendered prompt is instruction, then one block per demonstration,
then the test block, concatenated in that order. Each demonstration block
is marked ``Demo i:`` and shows the labelled input/output pair; the test
block repeats the structure under a ``Test i:`` marker and leaves the
output empty for the model to fill in.

When the estimate exceeds the token budget, content is trimmed in a fixed
priority order: longest demonstration code first, then demonstration
descriptions, then the test code. The instruction, every severity label,
the output markers and the test description are never touched.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .corpus import VulnerabilityRecord
from .errors import BudgetError, UsageError
from .similarity import SimilarityBreakdown

DEFAULT_BUDGET = 32000

TRUNCATION_MARKER = "..."

DEFAULT_INSTRUCTION = (
    "You are an expert in software security. Assess the base severity of the "
    "target vulnerability according to the CVSS v3 standard, based on the "
    "provided source code and vulnerability description. The base severity "
    "must be one of: Critical, High, Medium, Low. Output only the base "
    "severity of the target vulnerability, without any explanation."
)

ORDERING_KINDS = ("similarity", "reverse", "random")


@dataclass(frozen=True, slots=True)
class OrderingStrategy:
    """How demonstrations are arranged in the prompt.

    ``similarity`` puts the most similar demonstration last, adjacent to the
    test block; ``reverse`` puts it first; ``random`` applies a seeded
    permutation.
    """

    kind: str
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ORDERING_KINDS:
            raise UsageError(
                f"unknown ordering {self.kind!r}; expected one of {ORDERING_KINDS}"
            )
        if self.kind == "random" and self.seed is None:
            raise UsageError("random ordering requires a seed")

    @classmethod
    def similarity(cls) -> "OrderingStrategy":
        return cls("similarity")

    @classmethod
    def reverse(cls) -> "OrderingStrategy":
        return cls("reverse")

    @classmethod
    def random(cls, seed: int) -> "OrderingStrategy":
        return cls("random", seed)

    def describe(self) -> str:
        if self.kind == "random":
            return f"random(seed={self.seed})"
        return self.kind


ScoredDemo = Tuple[VulnerabilityRecord, SimilarityBreakdown]


def order_demos(
    demos: Sequence[ScoredDemo], strategy: OrderingStrategy
) -> List[ScoredDemo]:
    """Arrange scored demonstrations for the prompt.

    The permutation depends only on the demo set and the strategy, not on
    the input order: demos are first normalized to fused-descending order
    (ties by semantic distance then id), then arranged.
    """
    descending = sorted(
        demos, key=lambda item: (-item[1].fused, item[1].sem_dist, item[0].id)
    )
    if strategy.kind == "reverse":
        return descending
    if strategy.kind == "similarity":
        return descending[::-1]
    shuffled = list(descending)
    random.Random(strategy.seed).shuffle(shuffled)
    return shuffled


@dataclass(frozen=True, slots=True)
class PromptBundle:
    """A rendered prompt plus its parts and size estimate."""

    system_instruction: str
    demo_blocks: Tuple[str, ...]
    test_block: str
    full_text: str
    token_estimate: int


def estimate_tokens(text: str) -> int:
    """Rough, monotone token count: one token per four UTF-8 bytes."""
    return (len(text.encode("utf-8")) + 3) // 4


@dataclass
class _Fields:
    demo_codes: List[str]
    demo_descriptions: List[str]
    test_code: str


def _render(
    instruction: str,
    demos: Sequence[VulnerabilityRecord],
    target: VulnerabilityRecord,
    fields: _Fields,
) -> PromptBundle:
    instruction_part = instruction + "\n\n"
    demo_blocks = tuple(
        f"Demo {i}:\n"
        f"[Input]:\n"
        f"Code: {fields.demo_codes[i - 1]}\n"
        f"Description: {fields.demo_descriptions[i - 1]}\n"
        f"[Output]: {demo.severity.value}\n\n"
        for i, demo in enumerate(demos, start=1)
    )
    test_block = (
        f"Test 1:\n"
        f"[Input]:\n"
        f"Code: {fields.test_code}\n"
        f"Description: {target.description}\n"
        f"[Output]:"
    )
    full_text = "".join((instruction_part,) + demo_blocks + (test_block,))
    return PromptBundle(
        system_instruction=instruction_part,
        demo_blocks=demo_blocks,
        test_block=test_block,
        full_text=full_text,
        token_estimate=estimate_tokens(full_text),
    )


def _trim(value: str, excess_chars: int) -> str:
    """Tail-truncate, leaving at most the marker when fully consumed."""
    keep = len(value) - excess_chars - len(TRUNCATION_MARKER)
    if keep <= 0:
        return TRUNCATION_MARKER
    return value[:keep] + TRUNCATION_MARKER


def _trimmable(value: str) -> bool:
    return value != TRUNCATION_MARKER and len(value) > len(TRUNCATION_MARKER)


def build_prompt(
    demos: Sequence[VulnerabilityRecord],
    target: VulnerabilityRecord,
    budget: int = DEFAULT_BUDGET,
    instruction: str = DEFAULT_INSTRUCTION,
) -> PromptBundle:
    """Render the prompt for ``target`` with ``demos`` in the given order.

    Raises :class:`BudgetError` when the budget cannot hold the minimal
    skeleton (instruction, markers, labels and the untouchable test
    description) even after all trimmable fields are reduced to markers.
    """
    if budget < 1:
        raise UsageError(f"token budget must be positive, got {budget}")
    fields = _Fields(
        demo_codes=[demo.code for demo in demos],
        demo_descriptions=[demo.description for demo in demos],
        test_code=target.code,
    )
    bundle = _render(instruction, demos, target, fields)
    while bundle.token_estimate > budget:
        excess_chars = (bundle.token_estimate - budget) * 4
        candidates = [
            (len(code), i) for i, code in enumerate(fields.demo_codes) if _trimmable(code)
        ]
        if candidates:
            _, index = max(candidates)
            fields.demo_codes[index] = _trim(fields.demo_codes[index], excess_chars)
        else:
            candidates = [
                (len(desc), i)
                for i, desc in enumerate(fields.demo_descriptions)
                if _trimmable(desc)
            ]
            if candidates:
                _, index = max(candidates)
                fields.demo_descriptions[index] = _trim(
                    fields.demo_descriptions[index], excess_chars
                )
            elif _trimmable(fields.test_code):
                fields.test_code = _trim(fields.test_code, excess_chars)
            else:
                raise BudgetError(
                    f"budget {budget} cannot hold the prompt skeleton "
                    f"({bundle.token_estimate} tokens after full truncation)"
                )
        bundle = _render(instruction, demos, target, fields)
    return bundle
