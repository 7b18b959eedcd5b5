"""Rule-based differentiation and table-driven integration.

Differentiation is total over the supported vocabulary: applications of
named unknown functions differentiate to symbolic Derivative nodes, so
"evaluating" a derivative leaves exactly the parts that cannot be reduced.
Integration is a closed table (powers, 1/x, sin, cos, e^x, log x, linear
combinations); integrands outside the table yield ``None`` rather than an
error, mirroring the generator's skip-on-miss contract. Each successful
integration introduces a fresh constant drawn from the unused vocabulary.
"""
from __future__ import annotations

from typing import Callable, Iterable, Optional

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
    add,
    applied,
    as_fraction,
    canonicalize,
    derivative,
    div,
    free_symbols,
    func,
    integral,
    is_number,
    mul,
    neg,
    num_from_fraction,
    pow_,
    sub,
)

ZERO = Integer(0)
ONE = Integer(1)


class CalculusError(Exception):
    pass


class NoDerivativePresent(CalculusError):
    """The equation has no derivative node that evaluation would change."""


class NoIntegralPresent(CalculusError):
    """The equation has no integral node that evaluation could touch."""


def _depends_on(e: Expr, v: Symbol) -> bool:
    return v.name in free_symbols(e)


def differentiate(e: Expr, v: Symbol) -> Expr:
    """Symbolic derivative de/dv, canonical. Unknown function applications
    become Derivative nodes; derivatives of unrelated variables vanish."""
    return canonicalize(_diff(e, v))


def _diff(e: Expr, v: Symbol) -> Expr:
    t = type(e)
    if t in (Integer, Rational):
        return ZERO
    if t is Symbol:
        return ONE if e == v else ZERO
    if t is AppliedFunction:
        if not _depends_on(e, v):
            return ZERO
        return Derivative(e, v, 1)
    if t is Add:
        return add(*(_diff(x, v) for x in e.terms))
    if t is Mul:
        terms = []
        factors = e.factors
        for i, f in enumerate(factors):
            df = _diff(f, v)
            if df == ZERO:
                continue
            rest = factors[:i] + factors[i + 1:]
            terms.append(mul(df, *rest))
        return add(*terms) if terms else ZERO
    if t is Pow:
        b, p = e.base, e.exp
        db, dp = _diff(b, v), _diff(p, v)
        if dp == ZERO:
            if db == ZERO:
                return ZERO
            return mul(p, pow_(b, sub(p, ONE)), db)
        if db == ZERO:
            return mul(e, func("log", b), dp)
        # general case: b^p (p' log b + p b'/b)
        return mul(e, add(mul(dp, func("log", b)), mul(p, div(db, b))))
    if t is Func:
        u = e.arg
        du = _diff(u, v)
        if du == ZERO:
            return ZERO
        if e.kind == "sin":
            outer: Expr = func("cos", u)
        elif e.kind == "cos":
            outer = neg(func("sin", u))
        elif e.kind == "exp":
            outer = func("exp", u)
        else:
            outer = pow_(u, Integer(-1))
        return mul(outer, du)
    if t is Derivative:
        if not _depends_on(e, v):
            return ZERO
        return derivative(e, v, 1)
    if t is Integral:
        if e.var == v:
            return e.body
        inner = _diff(e.body, v)
        if inner == ZERO:
            return ZERO
        return integral(inner, e.var)
    raise CalculusError(f"cannot differentiate {t!r}")


# ---------------------------------------------------------------------------
# integration table

class IntegralRule:
    """One antiderivative rule: matches an integrand shape in var v."""

    def __init__(self, name: str, match: Callable[[Expr, Symbol], Optional[Expr]]):
        self.name = name
        self.match = match

    def __repr__(self) -> str:
        return f"IntegralRule({self.name})"


def _is_plain_coefficient(e: Expr) -> bool:
    """Numbers, symbols, products of them, and their integer powers."""
    t = type(e)
    if t in (Integer, Rational, Symbol):
        return True
    if t is Pow:
        return _is_plain_coefficient(e.base) and is_number(e.exp)
    if t is Mul:
        return all(_is_plain_coefficient(f) for f in e.factors)
    return False


def _rule_constant(e: Expr, v: Symbol) -> Optional[Expr]:
    if not _depends_on(e, v) and _is_plain_coefficient(e):
        return mul(e, v)
    return None


def _rule_power(e: Expr, v: Symbol) -> Optional[Expr]:
    if e == v:
        return div(pow_(v, Integer(2)), Integer(2))
    if type(e) is Pow and e.base == v:
        n = as_fraction(e.exp)
        if n is None:
            return None
        if n == -1:
            return func("log", v)
        return div(pow_(v, num_from_fraction(n + 1)), num_from_fraction(n + 1))
    return None


def _rule_elementary(e: Expr, v: Symbol) -> Optional[Expr]:
    if type(e) is Func and e.arg == v:
        if e.kind == "sin":
            return neg(func("cos", v))
        if e.kind == "cos":
            return func("sin", v)
        if e.kind == "exp":
            return func("exp", v)
        if e.kind == "log":
            return sub(mul(v, func("log", v)), v)
    return None


CORE_RULES: tuple[IntegralRule, ...] = (
    IntegralRule("constant", _rule_constant),
    IntegralRule("power", _rule_power),
    IntegralRule("elementary", _rule_elementary),
)


class IntegralTable:
    """Table of antiderivative rules over linear combinations of matched terms."""

    def __init__(self, rules: Iterable[IntegralRule] = CORE_RULES):
        self.rules = tuple(rules)

    def antiderivative(self, e: Expr, v: Symbol) -> Optional[Expr]:
        """Antiderivative of e in v without the integration constant, or None."""
        if type(e) is Add:
            parts = [self._term(t, v) for t in e.terms]
            if any(p is None for p in parts):
                return None
            return add(*parts)  # type: ignore[arg-type]
        return self._term(e, v)

    def _term(self, e: Expr, v: Symbol) -> Optional[Expr]:
        direct = self._atom(e, v)
        if direct is not None:
            return direct
        if type(e) is Mul:
            # split a coefficient free of v from the rest; the table's closure
            # only covers coefficients built from numbers and plain symbols
            const_parts = [f for f in e.factors if not _depends_on(f, v)]
            var_parts = [f for f in e.factors if _depends_on(f, v)]
            if not all(_is_plain_coefficient(f) for f in const_parts):
                return None
            if const_parts and len(var_parts) <= 1:
                rest = var_parts[0] if var_parts else ONE
                inner = self._atom(rest, v)
                if inner is None and rest == ONE:
                    inner = v
                if inner is not None:
                    return mul(*const_parts, inner)
        return None

    def _atom(self, e: Expr, v: Symbol) -> Optional[Expr]:
        for rule in self.rules:
            out = rule.match(e, v)
            if out is not None:
                return out
        return None


DEFAULT_TABLE = IntegralTable()


def _is_concrete_integrand(e: Expr) -> bool:
    """True when the integrand contains no unknown-function application."""
    return not any(type(n) is AppliedFunction for n in e.subtrees())


def integrate(
    e: Expr,
    v: Symbol,
    used_symbols: Iterable[str],
    constant_pool: Iterable[str],
    table: IntegralTable = DEFAULT_TABLE,
) -> Optional[tuple[Expr, Symbol]]:
    """Table-driven antiderivative of e in v plus a fresh constant.

    Returns (antiderivative + constant, constant) or None when no rule
    applies. The constant is the first pool symbol not in used_symbols.
    """
    anti = table.antiderivative(e, v)
    if anti is None:
        return None
    used = set(used_symbols)
    used.update(free_symbols(anti))
    const_name = next((name for name in constant_pool if name not in used), None)
    if const_name is None:
        raise CalculusError("constant pool exhausted")
    const = Symbol(const_name)
    return add(anti, const), const


# ---------------------------------------------------------------------------
# equation-level evaluation operators

def _map_derivative_nodes(e: Expr) -> Expr:
    t = type(e)
    if t is Derivative:
        body = _map_derivative_nodes(e.body)
        out: Expr = body
        for _ in range(e.order):
            out = differentiate(out, e.var)
        return out
    if t in (Integer, Rational, Symbol):
        return e
    if t is Add:
        return add(*(_map_derivative_nodes(x) for x in e.terms))
    if t is Mul:
        return mul(*(_map_derivative_nodes(x) for x in e.factors))
    if t is Pow:
        return pow_(_map_derivative_nodes(e.base), _map_derivative_nodes(e.exp))
    if t is Func:
        return func(e.kind, _map_derivative_nodes(e.arg))
    if t is AppliedFunction:
        return applied(e.name, (_map_derivative_nodes(a) for a in e.args))
    if t is Integral:
        return integral(_map_derivative_nodes(e.body), e.var)
    raise CalculusError(f"unexpected node {t!r}")


def evaluate_derivatives(eq: Equation) -> Equation:
    """Evaluate every reducible Derivative node on both sides.

    Derivatives of bare unknown-function applications are fixed points and
    stay symbolic. Raises NoDerivativePresent when nothing changes.
    """
    new = Equation(_map_derivative_nodes(eq.lhs), _map_derivative_nodes(eq.rhs))
    if new == eq:
        raise NoDerivativePresent("no evaluable derivative in equation")
    return new


class _IntegralEvaluator:
    def __init__(self, used: set[str], constant_pool: tuple[str, ...], table: IntegralTable):
        self.used = used
        self.pool = constant_pool
        self.table = table
        self.constants: list[Symbol] = []
        self.miss = False
        self.saw_integral = False

    def fresh_constant(self) -> Symbol:
        name = next((n for n in self.pool if n not in self.used), None)
        if name is None:
            raise CalculusError("constant pool exhausted")
        self.used.add(name)
        const = Symbol(name)
        self.constants.append(const)
        return const

    def visit(self, e: Expr) -> Expr:
        t = type(e)
        if t in (Integer, Rational, Symbol):
            return e
        if t is Integral:
            self.saw_integral = True
            body = self.visit(e.body)
            if self.miss:
                return e
            if not _is_concrete_integrand(body):
                return integral(body, e.var)
            anti = self.table.antiderivative(body, e.var)
            if anti is None:
                self.miss = True
                return e
            return add(anti, self.fresh_constant())
        if t is Add:
            return add(*(self.visit(x) for x in e.terms))
        if t is Mul:
            return mul(*(self.visit(x) for x in e.factors))
        if t is Pow:
            return pow_(self.visit(e.base), self.visit(e.exp))
        if t is Func:
            return func(e.kind, self.visit(e.arg))
        if t is AppliedFunction:
            return applied(e.name, (self.visit(a) for a in e.args))
        if t is Derivative:
            return derivative(self.visit(e.body), e.var, e.order)
        raise CalculusError(f"unexpected node {t!r}")


def evaluate_integrals(
    eq: Equation,
    used_symbols: Iterable[str],
    constant_pool: Iterable[str],
    table: IntegralTable = DEFAULT_TABLE,
) -> Optional[tuple[Equation, tuple[Symbol, ...]]]:
    """Evaluate every concrete Integral node, one fresh constant per node.

    Integrals over unknown-function applications stay symbolic. Returns None
    when some concrete integrand has no table rule; raises NoIntegralPresent
    when there is no concrete integral to evaluate at all.
    """
    ev = _IntegralEvaluator(set(used_symbols), tuple(constant_pool), table)
    lhs = ev.visit(eq.lhs)
    rhs = ev.visit(eq.rhs)
    if ev.miss:
        return None
    if not ev.saw_integral:
        raise NoIntegralPresent("no integral node in equation")
    new = Equation(lhs, rhs)
    if new == eq:
        raise NoIntegralPresent("no concrete integral to evaluate")
    return new, tuple(ev.constants)
