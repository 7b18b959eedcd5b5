"""The derivation generation algorithm: premises, stochastic steps, coherent
extraction, retry control, and dataset-scale generation with filters.

A derivation grows by weighted-random operation draws; after every accepted
step the coherent sub-derivation ending at the newest equation is extracted,
and generation stops once it reaches the sampled target length. Draws that
are inapplicable, duplicate an existing equation, re-evaluate an integral,
or produce a trivial lhs = rhs equation count as failures; retry_cap
consecutive failures abandon the attempt.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, fields, replace
from typing import Callable, Iterable, Optional

from . import ops
from .expr import (
    Equation,
    Expr,
    Integer,
    Symbol,
    add,
    applied,
    div,
    equation_free_symbols,
    free_symbols,
    func,
    mul,
    pow_,
)
from .latex import count_lexemes, equation_to_latex
from .ops import Derivation, ROLE_GOAL, ROLE_INTERMEDIATE, ROLE_PREMISE, Step
from .records import DerivationRecord
from .vocab import SymbolTable, load_symbol_table


class GenerationError(Exception):
    pass


class VocabularyExhausted(GenerationError):
    pass


@dataclass(frozen=True)
class GenConfig:
    """Generation hyperparameters. The eight named relative weights and the
    length/filter settings carry the reference defaults; the remaining
    weights cover operation groups the named set leaves implicit."""

    p_history: float = 10.0
    p_arity_0: float = 5.0
    p_renaming: float = 1.0
    p_arity_1: float = 50.0
    p_evaluate: float = 50.0
    p_arity_2: float = 100.0
    p_int_or_diff: float = 1.0
    p_diff_vs_int: float = 1.5
    p_subs: float = 5.0
    p_define: float = 0.05
    p_arith: float = 1.0
    p_extension: float = 0.5
    p_add_eq: float = 0.02
    length_mean: float = 7.0
    length_sigma: float = 3.0
    length_min: int = 4
    max_latex_chars: int = 350
    max_prompt_tokens: int = 512
    retry_cap: int = 100
    attempt_factor: int = 50
    vocabulary: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            if f.name.startswith("p_") and getattr(self, f.name) < 0:
                raise GenerationError(f"{f.name} must be >= 0")
        if self.length_min < 4:
            raise GenerationError("length_min must be >= 4 (lengths are kept above 3)")
        if self.retry_cap < 1:
            raise GenerationError("retry_cap must be >= 1")

    def load_vocabulary(self) -> SymbolTable:
        return load_symbol_table(self.vocabulary)


def derive_seed(seed: int, index: int) -> int:
    """Deterministic per-record stream seed, stable across platforms."""
    digest = hashlib.sha256(f"{seed}:{index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def sample_length(cfg: GenConfig, rng: random.Random) -> int:
    while True:
        value = round(rng.gauss(cfg.length_mean, cfg.length_sigma))
        if value >= cfg.length_min:
            return int(value)


# ---------------------------------------------------------------------------
# premise generation

_ONE_ARG_BODIES: tuple[Callable[[Expr], Expr], ...] = (
    lambda x: x,
    lambda x: func("sin", x),
    lambda x: func("cos", x),
    lambda x: func("exp", x),
    lambda x: func("log", x),
    lambda x: div(Integer(1), x),
    lambda x: pow_(x, Integer(2)),
)

_TWO_ARG_BODIES: tuple[Callable[[Expr, Expr], Expr], ...] = (
    lambda x, y: add(x, y),
    lambda x, y: mul(x, y),
    lambda x, y: div(x, y),
    lambda x, y: pow_(x, y),
)

_THREE_ARG_BODIES: tuple[Callable[[Expr, Expr, Expr], Expr], ...] = (
    lambda x, y, z: add(x, div(y, z)),
    lambda x, y, z: add(mul(x, y), z),
    lambda x, y, z: add(x, y, z),
    lambda x, y, z: div(mul(x, y), z),
)


def generate_premise(
    vocab: SymbolTable, rng: random.Random, used: Iterable[str] = ()
) -> Equation:
    """Fresh premise: an unused function name applied to 1-3 unused variables,
    equal to an elementary-function or rational body over those variables."""
    used_set = set(used)
    fn_names = [n for n in vocab.names("function-name") if n not in used_set]
    var_names = [n for n in vocab.names("variable") if n not in used_set]
    if not fn_names or len(var_names) < 1:
        raise VocabularyExhausted("not enough unused symbols for a premise")
    k = rng.choices((1, 2, 3), weights=(35, 40, 25))[0]
    k = min(k, len(var_names))
    name = fn_names[rng.randrange(len(fn_names))]
    args = [Symbol(v) for v in rng.sample(var_names, k)]
    if k == 1:
        body = _ONE_ARG_BODIES[rng.randrange(len(_ONE_ARG_BODIES))](args[0])
    elif k == 2:
        body = _TWO_ARG_BODIES[rng.randrange(len(_TWO_ARG_BODIES))](args[0], args[1])
    else:
        body = _THREE_ARG_BODIES[rng.randrange(len(_THREE_ARG_BODIES))](*args)
    return Equation(applied(name, args), body)


# ---------------------------------------------------------------------------
# single-step sampling

_ARITH_OPS = (ops.ADD, ops.SUB, ops.MUL, ops.DIV, ops.POW)
_EXT1_OPS = (ops.NEGATE, ops.SWAP, ops.EXP_BOTH, ops.LOG_BOTH)

NEW_PREMISE = "new_premise"


@dataclass(frozen=True)
class Applicability:
    n_steps: int
    has_derivative: bool
    has_integral: bool
    has_derived: bool = False


def sample_action(flags: Applicability, cfg: GenConfig, rng: random.Random) -> Optional[str]:
    """Draw the next action (an op id or NEW_PREMISE) through the arity gate
    hierarchy. Returns None when the drawn group has no applicable member."""
    arity = rng.choices((0, 1, 2), weights=(cfg.p_arity_0, cfg.p_arity_1, cfg.p_arity_2))[0]
    if arity == 0:
        return NEW_PREMISE
    if flags.n_steps < 1:
        return None
    if arity == 1:
        group = rng.choices(
            ("evaluate", "int_or_diff", "renaming", "arith", "ext"),
            weights=(cfg.p_evaluate, cfg.p_int_or_diff, cfg.p_renaming + cfg.p_define,
                     cfg.p_arith, cfg.p_extension),
        )[0]
        if group == "evaluate":
            candidates = []
            if flags.has_derivative:
                candidates.append(ops.EVAL_DIFF)
            if flags.has_integral:
                candidates.append(ops.EVAL_INT)
            if not candidates:
                return None
            return candidates[rng.randrange(len(candidates))]
        if group == "int_or_diff":
            return rng.choices((ops.DIFF, ops.INT), weights=(cfg.p_diff_vs_int, 1.0))[0]
        if group == "renaming":
            if not flags.has_derived:
                return None
            return rng.choices(
                (ops.RENAME, ops.DEFINE), weights=(cfg.p_renaming, cfg.p_define)
            )[0]
        if group == "arith":
            return _ARITH_OPS[rng.randrange(len(_ARITH_OPS))]
        return _EXT1_OPS[rng.randrange(len(_EXT1_OPS))]
    if flags.n_steps < 2:
        return None
    group = rng.choices(("subs", "add_eq"), weights=(cfg.p_subs, cfg.p_add_eq))[0]
    if group == "subs":
        return (ops.SUB_LHS, ops.SUB_RHS)[rng.randrange(2)]
    return ops.ADD_EQ


def _recency_pick(indices: list[int], n_total: int, cfg: GenConfig, rng: random.Random) -> int:
    weights = ops.step_weights(n_total, cfg.p_history)
    ws = [weights[i] for i in indices]
    return rng.choices(indices, weights=ws)[0]


class _GenState:
    def __init__(self, cfg: GenConfig, vocab: SymbolTable, rng: random.Random):
        self.cfg = cfg
        self.vocab = vocab
        self.rng = rng
        self.steps: list[Step] = []
        self.used_names: set[str] = set()
        self.seen_equations: set[Equation] = set()
        self.eval_int_parents: set[tuple[int, ...]] = set()
        self.eval_diff_parents: set[tuple[int, ...]] = set()
        self.derivative_indices: list[int] = []
        self.integral_indices: list[int] = []
        self.derived_indices: list[int] = []
        self.subtree_sets: list[set] = []

    def note(self, step: Step) -> None:
        from .expr import Derivative, Integral

        index = len(self.steps)
        self.steps.append(step)
        self.seen_equations.add(step.equation)
        self.used_names.update(equation_free_symbols(step.equation))
        if step.operand is not None:
            self.used_names.update(free_symbols(step.operand))
        self.used_names.update(c.name for c in step.constants)
        if step.op == ops.EVAL_INT:
            self.eval_int_parents.add(step.parents)
        elif step.op == ops.EVAL_DIFF:
            self.eval_diff_parents.add(step.parents)
        nodes = set(ops.subexpression_pool(step.equation))
        self.subtree_sets.append(nodes)
        if any(type(n) is Derivative for n in nodes):
            self.derivative_indices.append(index)
        if any(type(n) is Integral for n in nodes):
            self.integral_indices.append(index)
        if step.role != ROLE_PREMISE:
            self.derived_indices.append(index)

    def constant_pool(self) -> list[str]:
        pool = [
            n
            for n in self.vocab.names("constant") + self.vocab.names("variable")
            if n not in self.used_names
        ]
        self.rng.shuffle(pool)
        return pool

    def fresh_function_name(self) -> Optional[str]:
        names = [n for n in self.vocab.names("function-name") if n not in self.used_names]
        if not names:
            return None
        return names[self.rng.randrange(len(names))]


def _substitution_draw(state: _GenState, op: str) -> Optional[Step]:
    """Walk definition candidates in recency-sampled order and pick a
    recency-weighted target whose matching side contains one of the
    definition's sides (the "relevant equation elements" pre-search of the
    step procedure)."""
    cfg, rng, steps = state.cfg, state.rng, state.steps
    n = len(steps)
    weights = ops.step_weights(n, cfg.p_history)
    def_order = _weighted_order(list(range(n)), weights, rng)
    for definition in def_order:
        def_eq = steps[definition].equation
        pattern = def_eq.lhs if op == ops.SUB_LHS else def_eq.rhs
        targets = [
            j
            for j in range(n)
            if j != definition and pattern in state.subtree_sets[j]
        ]
        if not targets:
            continue
        target = _recency_pick(targets, n, cfg, rng)
        try:
            return ops.apply(op, steps, (definition, target))
        except ops.OpError:
            continue
    return None


def _weighted_order(indices: list[int], weights, rng: random.Random) -> list[int]:
    """Weighted order without replacement (exponential-sort sampling)."""
    keyed = sorted(
        ((rng.random() ** (1.0 / weights[i]), i) for i in indices), reverse=True
    )
    return [i for _, i in keyed]


def _occurs_in(side: Expr, operand: Expr) -> bool:
    return any(node == operand for node in side.subtrees())


def try_step(state: _GenState) -> Optional[Step]:
    """One stochastic step draw; None counts as a failed attempt."""
    cfg, rng, steps = state.cfg, state.rng, state.steps
    flags = Applicability(
        len(steps),
        bool(state.derivative_indices),
        bool(state.integral_indices),
        bool(state.derived_indices),
    )
    action = sample_action(flags, cfg, rng)
    if action is None:
        return None
    try:
        if action == NEW_PREMISE:
            eq = generate_premise(state.vocab, rng, state.used_names)
            candidate = Step(eq, None, role=ROLE_PREMISE)
        elif action in ops.RENAME_FAMILY:
            name = state.fresh_function_name()
            if name is None or not state.derived_indices:
                return None
            src = _recency_pick(state.derived_indices, len(steps), cfg, rng)
            eq = steps[src].equation
            if action == ops.RENAME:
                operand = eq.lhs if rng.random() < 0.5 else eq.rhs
            else:
                pool = ops.subexpression_pool(eq)
                operand = pool[rng.randrange(len(pool))]
            candidate = ops.apply(action, steps, (src,), operand, fresh_name=name)
        elif action in (ops.SUB_LHS, ops.SUB_RHS):
            candidate = _substitution_draw(state, action)
            if candidate is None:
                return None
        elif action == ops.ADD_EQ:
            first = _recency_pick(list(range(len(steps))), len(steps), cfg, rng)
            others = [i for i in range(len(steps)) if i != first]
            second = _recency_pick(others, len(steps), cfg, rng)
            candidate = ops.apply(action, steps, (first, second))
        elif action in (ops.EVAL_DIFF, ops.EVAL_INT):
            indices = (
                state.derivative_indices
                if action == ops.EVAL_DIFF
                else state.integral_indices
            )
            done = (
                state.eval_int_parents
                if action == ops.EVAL_INT
                else state.eval_diff_parents
            )
            indices = [i for i in indices if (i,) not in done]
            if not indices:
                return None
            parent = _recency_pick(indices, len(steps), cfg, rng)
            if action == ops.EVAL_INT:
                candidate = ops.apply(
                    action, steps, (parent,), constant_pool=state.constant_pool()
                )
            else:
                candidate = ops.apply(action, steps, (parent,))
        elif action in (ops.DIFF, ops.INT):
            parent = _recency_pick(list(range(len(steps))), len(steps), cfg, rng)
            var = ops.sample_variable(steps[parent].equation, rng)
            if var is None:
                return None
            candidate = ops.apply(action, steps, (parent,), var)
        elif action in _EXT1_OPS:
            parent = _recency_pick(list(range(len(steps))), len(steps), cfg, rng)
            candidate = ops.apply(action, steps, (parent,))
        else:  # arithmetic with a sampled operand
            parent = _recency_pick(list(range(len(steps))), len(steps), cfg, rng)
            operand = ops.sample_operand(steps, rng, cfg.p_history)
            candidate = ops.apply(action, steps, (parent,), operand)
    except (ops.OpError, VocabularyExhausted):
        return None

    eq = candidate.equation
    if eq.lhs == eq.rhs:
        return None
    if eq in state.seen_equations:
        return None
    # runtime guard: reject runaway trees early; the strict 350-char filter
    # is still applied per record downstream
    if len(equation_to_latex(eq)) > 2 * cfg.max_latex_chars:
        return None
    return candidate


# ---------------------------------------------------------------------------
# coherent extraction and the outer loop

def extract_derivation(steps: list[Step] | tuple[Step, ...]) -> Derivation:
    """Keep exactly the ancestors of the final step, preserving order,
    remapping parent indices, and assigning prompt roles."""
    steps = tuple(steps)
    if not steps:
        return Derivation(())
    n = len(steps)
    keep = {n - 1}
    frontier = [n - 1]
    while frontier:
        j = frontier.pop()
        for p in steps[j].parents:
            if p not in keep:
                keep.add(p)
                frontier.append(p)
    kept = sorted(keep)
    remap = {old: new for new, old in enumerate(kept)}
    out = []
    last = len(kept) - 1
    for new_idx, old_idx in enumerate(kept):
        s = steps[old_idx]
        if new_idx == last:
            role = ROLE_GOAL
        elif s.role == ROLE_PREMISE:
            role = ROLE_PREMISE
        elif s.op in ops.EVAL_FAMILY:
            role = ROLE_INTERMEDIATE
        else:
            role = ops.ROLE_ORDINARY
        out.append(replace(s, parents=tuple(remap[p] for p in s.parents), role=role))
    return Derivation(tuple(out))


def generate_derivation(
    cfg: GenConfig,
    rng: random.Random,
    prior: Optional[Derivation] = None,
    vocab: Optional[SymbolTable] = None,
) -> Optional[Derivation]:
    """Run the stepping loop until a coherent derivation of the sampled
    length exists; None after retry_cap consecutive failed draws."""
    vocab = vocab if vocab is not None else cfg.load_vocabulary()
    state = _GenState(cfg, vocab, rng)
    if prior is not None:
        for s in prior.steps:
            state.note(s)
    else:
        premise = Step(generate_premise(vocab, rng, state.used_names), None, role=ROLE_PREMISE)
        state.note(premise)
    target_length = sample_length(cfg, rng)
    failures = 0
    while True:
        candidate = try_step(state)
        if candidate is None:
            failures += 1
            if failures >= cfg.retry_cap:
                return None
            continue
        failures = 0
        state.note(candidate)
        extracted = extract_derivation(state.steps)
        if len(extracted) >= target_length:
            return extracted


@dataclass
class GenerationSummary:
    requested: int = 0
    produced: int = 0
    attempts: int = 0
    retry_exhausted: int = 0
    char_filtered: int = 0
    token_filtered: int = 0

    def as_dict(self) -> dict:
        return {
            "requested": self.requested,
            "produced": self.produced,
            "attempts": self.attempts,
            "retry_exhausted": self.retry_exhausted,
            "char_filtered": self.char_filtered,
            "token_filtered": self.token_filtered,
            "schema_version": 1,
        }


def passes_char_filter(d: Derivation, cfg: GenConfig) -> bool:
    return all(len(equation_to_latex(s.equation)) <= cfg.max_latex_chars for s in d.steps)


def passes_token_filter(prompt: str, target: str, cfg: GenConfig) -> bool:
    return count_lexemes(prompt + " " + target) <= cfg.max_prompt_tokens


def generate_dataset(
    cfg: GenConfig, n: int, on_record: Optional[Callable[[DerivationRecord], None]] = None
) -> tuple[list[DerivationRecord], GenerationSummary]:
    """Generate n records passing both dataset filters. Records carry the
    per-attempt stream seed, so output is deterministic regardless of how
    attempts are scheduled."""
    from .prompts import build_prompt

    if n < 1:
        raise GenerationError("record count must be >= 1")
    vocab = cfg.load_vocabulary()
    summary = GenerationSummary(requested=n)
    records: list[DerivationRecord] = []
    max_attempts = cfg.attempt_factor * n
    attempt = 0
    while len(records) < n and attempt < max_attempts:
        stream_seed = derive_seed(cfg.seed, attempt)
        rng = random.Random(stream_seed)
        attempt += 1
        summary.attempts = attempt
        derivation = generate_derivation(cfg, rng, vocab=vocab)
        if derivation is None:
            summary.retry_exhausted += 1
            continue
        if not passes_char_filter(derivation, cfg):
            summary.char_filtered += 1
            continue
        record = DerivationRecord(f"d{attempt - 1:06d}", stream_seed, derivation)
        prompt = build_prompt(derivation, record.id)
        if not passes_token_filter(prompt.prompt, prompt.target, cfg):
            summary.token_filtered += 1
            continue
        records.append(record)
        summary.produced += 1
        if on_record is not None:
            on_record(record)
    return records, summary
