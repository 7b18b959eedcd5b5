"""Prompt rendering: fine-tuning prompt/target pairs and few-shot templates.

Template: premises appear as "Given $...$" then "and $...$" clauses,
evaluation results as ", then derive $...$" clauses in derivation order, and
the final equation as ", then obtain $...$". Targets are the bare equations
joined by " and " (no dollar signs).
"""
from __future__ import annotations

import random
from typing import Optional, Sequence

from .latex import equation_to_latex, parse_equation
from .ops import RENAME_FAMILY, Derivation
from .records import PromptRecord

FEWSHOT_HEADER = (
    "The following examples consist of a prompt (denoted by Prompt:) and a "
    'mathematical derivation (denoted by Derivation:). Each derivation contains '
    'LaTeX equations separated by "and".'
)
FEWSHOT_INSTRUCTION = (
    "Now given the following prompt, generate the derivation. "
    'Ensure equations are split by the word "and".'
)

THEN_DERIVE = "then derive"


class PromptError(Exception):
    pass


class RoleMissing(PromptError):
    pass


class InsufficientPool(PromptError):
    pass


def prompt_premise_indices(derivation: Derivation) -> tuple[int, ...]:
    """Steps rendered as Given/and clauses: introduced premises plus
    renaming definitions (both state equations the model cannot derive)."""
    last = len(derivation) - 1
    return tuple(
        i
        for i, s in enumerate(derivation.steps)
        if i != last and (s.role == "premise" or s.op in RENAME_FAMILY)
    ) or ((0,) if len(derivation) else ())


def build_target(derivation: Derivation) -> str:
    return " and ".join(equation_to_latex(s.equation) for s in derivation.steps)


def render_prompt_text(
    premise_eqs: Sequence[str], derive_eqs: Sequence[str], goal_eq: str
) -> str:
    parts = [f"Given ${premise_eqs[0]}$"]
    for eq in premise_eqs[1:]:
        parts.append(f"and ${eq}$")
    text = " ".join(parts)
    for eq in derive_eqs:
        text += f", {THEN_DERIVE} ${eq}$"
    text += f", then obtain ${goal_eq}$"
    return text


def build_prompt(
    derivation: Derivation,
    record_id: str = "",
    static_id: Optional[str] = None,
    perturbation: Optional[str] = None,
) -> PromptRecord:
    if not len(derivation):
        raise RoleMissing("empty derivation has no goal")
    premises = prompt_premise_indices(derivation)
    if not premises:
        raise RoleMissing("derivation has no premise")
    intermediates = derivation.intermediates()
    goal = len(derivation) - 1
    eqs = [equation_to_latex(s.equation) for s in derivation.steps]
    prompt = render_prompt_text(
        [eqs[i] for i in premises], [eqs[i] for i in intermediates], eqs[goal]
    )
    return PromptRecord(
        id=record_id,
        static_id=static_id if static_id is not None else record_id,
        perturbation=perturbation,
        prompt=prompt,
        target=build_target(derivation),
        premises=premises,
        intermediates=intermediates,
        goal=goal,
    )


def parse_prompt_equations(prompt: str) -> list:
    """Parse every $-delimited equation in a prompt back to Equation values."""
    out = []
    chunks = prompt.split("$")
    for i in range(1, len(chunks), 2):
        out.append(parse_equation(chunks[i]))
    return out


def qualifies_for_fewshot(record: PromptRecord) -> bool:
    """The sampling constraint: prompt shows an intermediate step and more
    than one premise."""
    return THEN_DERIVE in record.prompt and " and $" in record.prompt


def build_fewshot(
    record: PromptRecord, pool: Sequence[PromptRecord], rng: random.Random
) -> str:
    """Five pool examples (at least two qualifying), then the evaluation
    prompt. Pool records matching the evaluation record's static family are
    never sampled."""
    candidates = [p for p in pool if p.static_id != record.static_id]
    qualifying = [p for p in candidates if qualifies_for_fewshot(p)]
    if len(candidates) < 5 or len(qualifying) < 2:
        raise InsufficientPool(
            f"need >= 5 pool prompts with >= 2 qualifying, have {len(candidates)}"
            f"/{len(qualifying)}"
        )
    shuffled = list(candidates)
    rng.shuffle(shuffled)
    picked = [p for p in shuffled if qualifies_for_fewshot(p)][:2]
    for p in shuffled:
        if len(picked) == 5:
            break
        if p not in picked:
            picked.append(p)
    order = {id(p): i for i, p in enumerate(shuffled)}
    picked.sort(key=lambda p: order[id(p)])
    blocks = [f"Prompt: {p.prompt}\nDerivation: {p.target}" for p in picked]
    return (
        FEWSHOT_HEADER
        + "\n\n"
        + "\n\n".join(blocks)
        + "\n\n"
        + FEWSHOT_INSTRUCTION
        + "\n\n"
        + f"Prompt: {record.prompt}"
    )
