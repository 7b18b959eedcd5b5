"""JSONL record schemas for derivations and prompts.

DerivationRecord rows serialize each step as
{"latex", "op", "parents", "operand_latex", "role"}; eval_int steps store
their integration constants comma-joined in the operand_latex slot.
Perturbed rows additionally carry "perturbation" and "static_id". Every row
ends with "schema_version".
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .expr import Symbol
from .latex import equation_to_latex, parse_equation, parse_latex, to_latex
from .ops import EVAL_INT, PREMISE, Derivation, Step

SCHEMA_VERSION = 1


class RecordError(Exception):
    pass


@dataclass(frozen=True)
class DerivationRecord:
    id: str
    seed: int
    derivation: Derivation
    perturbation: Optional[str] = None
    static_id: Optional[str] = None


@dataclass(frozen=True)
class PromptRecord:
    id: str
    static_id: str
    perturbation: Optional[str]
    prompt: str
    target: str
    premises: tuple[int, ...] = ()
    intermediates: tuple[int, ...] = ()
    goal: int = -1


def step_to_json(step: Step) -> dict:
    if step.op == EVAL_INT:
        operand_latex: Optional[str] = ",".join(c.name for c in step.constants)
    elif step.operand is not None:
        operand_latex = to_latex(step.operand)
    else:
        operand_latex = None
    return {
        "latex": equation_to_latex(step.equation),
        "op": step.op_tag(),
        "parents": list(step.parents),
        "operand_latex": operand_latex,
        "role": step.role,
    }


def step_from_json(payload: dict) -> Step:
    op = payload["op"]
    operand = None
    constants: tuple[Symbol, ...] = ()
    raw_operand = payload.get("operand_latex")
    if op == EVAL_INT:
        if raw_operand:
            constants = tuple(Symbol(name) for name in raw_operand.split(","))
    elif raw_operand is not None:
        operand = parse_latex(raw_operand)
    return Step(
        equation=parse_equation(payload["latex"]),
        op=None if op == PREMISE else op,
        parents=tuple(payload.get("parents", ())),
        operand=operand,
        role=payload["role"],
        constants=constants,
    )


def derivation_record_to_json(record: DerivationRecord) -> dict:
    payload: dict = {
        "id": record.id,
        "seed": record.seed,
        "steps": [step_to_json(s) for s in record.derivation.steps],
    }
    if record.perturbation is not None:
        payload["perturbation"] = record.perturbation
        payload["static_id"] = record.static_id
    payload["schema_version"] = SCHEMA_VERSION
    return payload


def derivation_record_from_json(payload: dict) -> DerivationRecord:
    return DerivationRecord(
        id=payload["id"],
        seed=payload.get("seed", 0),
        derivation=Derivation(tuple(step_from_json(s) for s in payload["steps"])),
        perturbation=payload.get("perturbation"),
        static_id=payload.get("static_id"),
    )


def prompt_record_to_json(record: PromptRecord) -> dict:
    return {
        "id": record.id,
        "static_id": record.static_id,
        "perturbation": record.perturbation,
        "prompt": record.prompt,
        "target": record.target,
        "schema_version": SCHEMA_VERSION,
    }


def prompt_record_from_json(payload: dict) -> PromptRecord:
    return PromptRecord(
        id=payload["id"],
        static_id=payload["static_id"],
        perturbation=payload.get("perturbation"),
        prompt=payload["prompt"],
        target=payload["target"],
    )


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"{path}:{lineno}: bad JSON: {exc}") from exc


def load_derivation_records(path: str | Path) -> list[DerivationRecord]:
    return [derivation_record_from_json(row) for row in read_jsonl(path)]


def load_prompt_records(path: str | Path) -> list[PromptRecord]:
    return [prompt_record_from_json(row) for row in read_jsonl(path)]
