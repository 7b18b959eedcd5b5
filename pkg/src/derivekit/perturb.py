"""The four static-set perturbations: VR, EE, AG, SR.

Variable renaming and expression exchange rewrite trees without
re-canonicalizing, so outputs are tree-isomorphic to their inputs (VR) or
exact side swaps (EE). Alternative goal re-samples the final operation from
the penultimate equation; step removal rewrites the prompt only.
"""
from __future__ import annotations

import random
import re
from dataclasses import replace
from typing import Optional

from . import ops
from .expr import (
    Add,
    AppliedFunction,
    Derivative,
    Equation,
    Expr,
    Func,
    Integer,
    Integral,
    Mul,
    Pow,
    Rational,
    Symbol,
)
from .genalg import GenConfig, _GenState
from .ops import Derivation, ROLE_GOAL, Step
from .records import PromptRecord
from .vocab import GreekPool

VR, EE, AG, SR = "VR", "EE", "AG", "SR"
KINDS = (VR, EE, AG, SR)


class PerturbationError(Exception):
    pass


class TooManySymbols(PerturbationError):
    pass


class GoalExhausted(PerturbationError):
    pass


# ---------------------------------------------------------------------------
# variable renaming

def rename_leaves(e: Expr, mapping: dict[str, str]) -> Expr:
    """Rename symbol and function names without touching tree structure."""
    t = type(e)
    if t in (Integer, Rational):
        return e
    if t is Symbol:
        return Symbol(mapping.get(e.name, e.name))
    if t is Add:
        return Add(tuple(rename_leaves(x, mapping) for x in e.terms))
    if t is Mul:
        return Mul(tuple(rename_leaves(x, mapping) for x in e.factors))
    if t is Pow:
        return Pow(rename_leaves(e.base, mapping), rename_leaves(e.exp, mapping))
    if t is Func:
        return Func(e.kind, rename_leaves(e.arg, mapping))
    if t is AppliedFunction:
        return AppliedFunction(
            mapping.get(e.name, e.name), tuple(rename_leaves(a, mapping) for a in e.args)
        )
    if t is Derivative:
        return Derivative(
            rename_leaves(e.body, mapping), Symbol(mapping.get(e.var.name, e.var.name)), e.order
        )
    if t is Integral:
        return Integral(
            rename_leaves(e.body, mapping), Symbol(mapping.get(e.var.name, e.var.name))
        )
    raise PerturbationError(f"unexpected node {t!r}")


def collect_names(d: Derivation) -> list[str]:
    """Distinct symbol/function names in first-appearance order."""
    seen: dict[str, None] = {}

    def walk(e: Expr) -> None:
        for node in e.subtrees():
            if type(node) is Symbol or type(node) is AppliedFunction:
                seen.setdefault(node.name, None)

    for s in d.steps:
        walk(s.equation.lhs)
        walk(s.equation.rhs)
        if s.operand is not None:
            walk(s.operand)
        for c in s.constants:
            seen.setdefault(c.name, None)
    return list(seen)


def rename_variables(
    d: Derivation, pool: GreekPool, rng: random.Random
) -> tuple[Derivation, dict[str, str]]:
    """Bijectively map every distinct name to an out-of-distribution letter."""
    names = collect_names(d)
    if len(names) > len(pool.letters):
        raise TooManySymbols(
            f"{len(names)} distinct symbols exceed the {len(pool.letters)}-letter pool"
        )
    letters = rng.sample(pool.letters, len(names))
    mapping = dict(zip(names, letters))
    steps = []
    for s in d.steps:
        steps.append(
            replace(
                s,
                equation=Equation(
                    rename_leaves(s.equation.lhs, mapping),
                    rename_leaves(s.equation.rhs, mapping),
                ),
                operand=None if s.operand is None else rename_leaves(s.operand, mapping),
                constants=tuple(Symbol(mapping.get(c.name, c.name)) for c in s.constants),
            )
        )
    return Derivation(tuple(steps)), mapping


# ---------------------------------------------------------------------------
# expression exchange

def exchange_expressions(d: Derivation) -> Derivation:
    """Swap lhs and rhs of every equation; an involution."""
    return Derivation(tuple(replace(s, equation=s.equation.swapped()) for s in d.steps))


# ---------------------------------------------------------------------------
# alternative goal

def alternative_goal(d: Derivation, cfg: GenConfig, rng: random.Random) -> Derivation:
    """Replace the final step with a freshly sampled applicable operation on
    the penultimate equation whose result is a new equation."""
    if len(d) < 2:
        raise PerturbationError("alternative goal needs at least two steps")
    prefix = d.steps[:-1]
    old_goal = d.steps[-1].equation
    existing = {s.equation for s in d.steps}
    vocab = cfg.load_vocabulary()
    state = _GenState(cfg, vocab, rng)
    for s in prefix:
        state.note(s)
    penultimate = len(prefix) - 1
    for _ in range(cfg.retry_cap):
        candidate = _sample_goal_step(state, penultimate, rng)
        if candidate is None:
            continue
        eq = candidate.equation
        if eq == old_goal or eq in existing or eq.lhs == eq.rhs:
            continue
        return Derivation(prefix + (replace(candidate, role=ROLE_GOAL),))
    raise GoalExhausted("no differing applicable operation found within retry_cap")


def _sample_goal_step(state: _GenState, target: int, rng: random.Random) -> Optional[Step]:
    cfg, steps = state.cfg, state.steps
    arity1 = (ops.ADD, ops.SUB, ops.MUL, ops.DIV, ops.POW, ops.DIFF, ops.INT,
              ops.EVAL_DIFF, ops.EVAL_INT, ops.NEGATE, ops.SWAP, ops.EXP_BOTH, ops.LOG_BOTH)
    choices: list[str] = list(arity1)
    if target >= 1:
        choices += [ops.SUB_LHS, ops.SUB_RHS]
    action = choices[rng.randrange(len(choices))]
    try:
        if action in (ops.SUB_LHS, ops.SUB_RHS):
            definition = rng.randrange(target)
            return ops.apply(action, steps, (definition, target))
        if action in (ops.DIFF, ops.INT):
            var = ops.sample_variable(steps[target].equation, rng)
            if var is None:
                return None
            return ops.apply(action, steps, (target,), var)
        if action == ops.EVAL_INT:
            if (target,) in state.eval_int_parents:
                return None
            return ops.apply(action, steps, (target,), constant_pool=state.constant_pool())
        if action in (ops.EVAL_DIFF, ops.NEGATE, ops.SWAP, ops.EXP_BOTH, ops.LOG_BOTH):
            return ops.apply(action, steps, (target,))
        operand = ops.sample_operand(steps, rng, cfg.p_history)
        return ops.apply(action, steps, (target,), operand)
    except ops.OpError:
        return None


# ---------------------------------------------------------------------------
# step removal

_THEN_DERIVE_CLAUSE = re.compile(r", then derive \$[^$]*\$")


def remove_steps(record: PromptRecord) -> Optional[PromptRecord]:
    """Delete every "then derive" clause from the prompt; None when the
    record has no intermediate steps to remove."""
    if "then derive" not in record.prompt:
        return None
    stripped = _THEN_DERIVE_CLAUSE.sub("", record.prompt)
    return replace(record, prompt=stripped, intermediates=(), perturbation=SR)
