"""Bidirectional LaTeX conversion for expression trees.

The printer mirrors the rendering style of the generated corpora exactly
(``\\frac`` for quotients, ``\\int ... d<var>``, ``\\frac{d}{d x}`` vs
``\\frac{\\partial}{\\partial x}`` chosen by the number of distinct symbols
in the body, ``\\operatorname`` for multi-letter plain-ASCII function names).
The parser accepts the emitted grammar plus arbitrary whitespace; it is not
a general LaTeX math parser. See docs/latex-grammar.md.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Optional

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
    derivative,
    div,
    func,
    integral,
    is_number,
    mul,
    neg,
    pow_,
    symbol_nodes,
)

__all__ = [
    "to_latex",
    "equation_to_latex",
    "parse_latex",
    "parse_equation",
    "count_lexemes",
    "LatexError",
    "LatexParseError",
    "UnknownLatexCommand",
    "RenderError",
]


class LatexError(Exception):
    pass


class RenderError(LatexError):
    """An expression cannot be rendered (unresolvable name)."""


class LatexParseError(LatexError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnknownLatexCommand(LatexParseError):
    pass


# ---------------------------------------------------------------------------
# printer

_SIMPLE_HEAD = re.compile(r"^[A-Za-z]$")


def _is_simple_head(name: str) -> bool:
    # single ASCII letters and \command-decorated glyphs print bare;
    # plain multi-character ASCII names get \operatorname
    return bool(_SIMPLE_HEAD.match(name)) or name.startswith("\\")


def _coeff_of(e: Expr) -> Fraction:
    if is_number(e):
        q = as_fraction(e)
        assert q is not None
        return q
    if type(e) is Mul:
        q = as_fraction(e.factors[0])
        if q is not None:
            return q
    return Fraction(1)


def _signed(e: Expr) -> tuple[bool, str]:
    """Render e as (is_negative, latex of |e|)."""
    q = as_fraction(e)
    if q is not None:
        return q < 0, _number_str(abs(q))
    if type(e) is Mul:
        coeff = _coeff_of(e)
        if coeff < 0:
            return True, _mul_str(e, flip_sign=True)
        return False, _mul_str(e)
    return False, to_latex(e)


def _number_str(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"\\frac{{{q.numerator}}}{{{q.denominator}}}"


def _mul_operand(f: Expr) -> str:
    s = to_latex(f)
    if type(f) is Add:
        return f"({s})"
    return s


def _mul_str(e: Mul, flip_sign: bool = False) -> str:
    coeff = Fraction(1)
    num_factors: list[Expr] = []
    den_factors: list[tuple[Expr, Fraction]] = []
    for f in e.factors:
        q = as_fraction(f)
        if q is not None:
            coeff *= q
            continue
        if type(f) is Pow:
            fq = as_fraction(f.exp)
            if fq is not None and fq < 0:
                den_factors.append((f.base, -fq))
                continue
        num_factors.append(f)

    def render_run(items: list[str], exprs: list[Optional[Expr]]) -> str:
        # a derivative/integral factor binds everything to its right when
        # parsed back, so it may only appear bare in final position
        out = []
        for j, (s, x) in enumerate(zip(items, exprs)):
            if x is not None and type(x) in (Derivative, Integral) and j < len(items) - 1:
                out.append(f"({s})")
            else:
                out.append(s)
        return " ".join(out)

    if flip_sign:
        coeff = -coeff
    fraction = bool(den_factors) or coeff.denominator != 1
    if fraction and len(num_factors) == 1 and coeff.numerator == 1:
        # a lone sum in a \frac numerator/denominator needs no parentheses
        num_parts = [to_latex(num_factors[0])]
    else:
        num_parts = [_mul_operand(f) for f in num_factors]
    num_exprs: list[Optional[Expr]] = list(num_factors)
    if fraction and len(den_factors) == 1 and den_factors[0][1] == 1 and coeff.denominator == 1:
        den_parts = [to_latex(den_factors[0][0])]
    else:
        den_parts = [
            _mul_operand(b) if q == 1 else _pow_str(b, q) for b, q in den_factors
        ]
    den_exprs: list[Optional[Expr]] = [b if q == 1 else None for b, q in den_factors]
    if coeff.numerator != 1 or not num_parts:
        num_parts.insert(0, str(coeff.numerator))
        num_exprs.insert(0, None)
    if coeff.denominator != 1:
        den_parts.insert(0, str(coeff.denominator))
        den_exprs.insert(0, None)
    num = render_run(num_parts, num_exprs)
    if den_parts:
        return f"\\frac{{{num}}}{{{render_run(den_parts, den_exprs)}}}"
    return num


def _pow_base_str(base: Expr) -> str:
    if type(base) is Symbol:
        return base.name
    if type(base) is Integer and base.value >= 0:
        return str(base.value)
    return f"({to_latex(base)})"


def _pow_str(base: Expr, exp_q: Fraction) -> str:
    if exp_q == 1:
        return to_latex(base)
    return f"{_pow_base_str(base)}^{{{_number_str(exp_q)}}}"


def _body_str(body: Expr) -> str:
    """Derivative/integral body: sums and negative-leading terms take parens."""
    negative, s = _signed(body)
    if type(body) is Add or negative:
        return f"({to_latex(body)})"
    return s


def to_latex(e: Expr) -> str:
    t = type(e)
    if t is Integer:
        return str(e.value)
    if t is Rational:
        if e.num < 0:
            return f"- \\frac{{{-e.num}}}{{{e.den}}}"
        return f"\\frac{{{e.num}}}{{{e.den}}}"
    if t is Symbol:
        return e.name
    if t is Add:
        parts: list[str] = []
        for i, term in enumerate(e.terms):
            negative, body = _signed(term)
            if i == 0:
                parts.append(f"- {body}" if negative else body)
            else:
                parts.append(f"- {body}" if negative else f"+ {body}")
        return " ".join(parts)
    if t is Mul:
        negative, body = _signed(e)
        return f"- {body}" if negative else body
    if t is Pow:
        q = as_fraction(e.exp)
        if q is not None and q < 0:
            return f"\\frac{{1}}{{{_pow_str(e.base, -q)}}}"
        return f"{_pow_base_str(e.base)}^{{{to_latex(e.exp)}}}"
    if t is Func:
        if e.kind == "exp":
            return f"e^{{{to_latex(e.arg)}}}"
        return f"\\{e.kind}{{({to_latex(e.arg)})}}"
    if t is AppliedFunction:
        if not e.name:
            raise RenderError("empty function name")
        head = e.name if _is_simple_head(e.name) else f"\\operatorname{{{e.name}}}"
        args = ",".join(to_latex(a) for a in e.args)
        return f"{head}{{({args})}}"
    if t is Derivative:
        marker = "d" if len(symbol_nodes(e.body)) <= 1 else "\\partial"
        if e.order == 1:
            head = f"\\frac{{{marker}}}{{{marker} {e.var.name}}}"
        else:
            head = f"\\frac{{{marker}^{{{e.order}}}}}{{{marker} {e.var.name}^{{{e.order}}}}}"
        return f"{head} {_body_str(e.body)}"
    if t is Integral:
        return f"\\int {_body_str(e.body)} d{e.var.name}"
    raise RenderError(f"cannot render {t!r}")


def equation_to_latex(eq: Equation) -> str:
    return f"{to_latex(eq.lhs)} = {to_latex(eq.rhs)}"


# ---------------------------------------------------------------------------
# token estimator

_LEXEME = re.compile(r"\\[A-Za-z]+|[A-Za-z]+|[0-9]+|\S")


def count_lexemes(text: str) -> int:
    """Deterministic token-count proxy: LaTeX commands, identifier runs,
    digit runs, and any other non-space character each count as one lexeme."""
    return len(_LEXEME.findall(text))


# ---------------------------------------------------------------------------
# lexer

_CMD = "CMD"
_LETTER = "LETTER"
_DIGITS = "DIGITS"
_EOF = "EOF"

_PUNCT = {
    "{": "LBRACE",
    "}": "RBRACE",
    "(": "LPAREN",
    ")": "RPAREN",
    "+": "PLUS",
    "-": "MINUS",
    "=": "EQUALS",
    "^": "CARET",
    "_": "UNDERSCORE",
    ",": "COMMA",
}

_DECORATORS = {"mathbf", "hat", "dot", "mathbb", "tilde", "bar", "vec", "boldsymbol"}
_RESERVED_CMDS = {"frac", "int", "partial", "sin", "cos", "log", "operatorname", "prime"}
_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota",
    "kappa", "lambda", "mu", "nu", "xi", "omicron", "pi", "rho", "sigma", "tau",
    "upsilon", "phi", "chi", "psi", "omega",
    "varepsilon", "vartheta", "varpi", "varrho", "varsigma", "varphi",
    "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon",
    "Phi", "Psi", "Omega",
    "ell", "hbar", "nabla", "imath", "jmath",
}


def _tokenize(s: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(s)
    while i < n:
        c = s[i]
        if c.isspace():
            i += 1
            continue
        if c == "\\":
            m = re.match(r"\\[A-Za-z]+", s[i:])
            if not m:
                raise LatexParseError("stray backslash", i)
            tokens.append((_CMD, m.group(0), i))
            i += m.end()
            continue
        if c.isdigit():
            m = re.match(r"[0-9]+", s[i:])
            tokens.append((_DIGITS, m.group(0), i))
            i += m.end()
            continue
        if c in _PUNCT:
            tokens.append((_PUNCT[c], c, i))
            i += 1
            continue
        if c.isalpha():
            tokens.append((_LETTER, c, i))
            i += 1
            continue
        raise LatexParseError(f"unexpected character {c!r}", i)
    tokens.append((_EOF, "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    # token helpers -----------------------------------------------------
    def peek(self, offset: int = 0) -> tuple[str, str, int]:
        j = min(self.i + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        if tok[0] != _EOF:
            self.i += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            raise LatexParseError(f"expected {kind}, found {tok[1]!r}", tok[2])
        return tok

    def fail(self, message: str):
        tok = self.peek()
        raise LatexParseError(message, tok[2])

    # grammar -----------------------------------------------------------
    def parse_expression(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != _EOF:
            self.fail(f"trailing input {tok[1]!r}")
        return e

    def parse_equation(self) -> Equation:
        lhs = self.expr()
        self.expect("EQUALS")
        rhs = self.expr()
        tok = self.peek()
        if tok[0] != _EOF:
            self.fail(f"trailing input {tok[1]!r}")
        return Equation(lhs, rhs)

    def expr(self) -> Expr:
        terms = []
        sign = 1
        if self.peek()[0] == "MINUS":
            self.next()
            sign = -1
        elif self.peek()[0] == "PLUS":
            self.next()
        t = self.term()
        terms.append(t if sign > 0 else neg(t))
        while True:
            kind = self.peek()[0]
            if kind == "PLUS":
                self.next()
                terms.append(self.term())
            elif kind == "MINUS":
                self.next()
                terms.append(neg(self.term()))
            else:
                break
        if len(terms) == 1:
            return terms[0]
        return add(*terms)

    _TERM_STOP = {"PLUS", "MINUS", "EQUALS", "RPAREN", "RBRACE", "COMMA", _EOF}

    def at_term_stop(self) -> bool:
        kind, text, _ = self.peek()
        if kind in self._TERM_STOP:
            return True
        # a bare 'd' marks the differential of an enclosing integral
        return kind == _LETTER and text == "d"

    def term(self) -> Expr:
        factors = [self.factor()]
        while not self.at_term_stop():
            factors.append(self.factor())
        if len(factors) == 1:
            return factors[0]
        return mul(*factors)

    def factor(self) -> Expr:
        e = self.primary()
        while self.peek()[0] == "CARET":
            self.next()
            e = pow_(e, self.exponent())
        return e

    def exponent(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == "LBRACE":
            self.next()
            e = self.expr()
            self.expect("RBRACE")
            return e
        if kind == _DIGITS:
            self.next()
            return Integer(int(text))
        raise LatexParseError("expected '{' or digits after '^'", pos)

    def primary(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == _DIGITS:
            self.next()
            return Integer(int(text))
        if kind == "LPAREN":
            self.next()
            e = self.expr()
            self.expect("RPAREN")
            return e
        if kind == _CMD:
            name = text[1:]
            if name == "frac":
                self.next()
                return self.frac_rest()
            if name == "int":
                self.next()
                return self.integral_rest()
            if name in ("sin", "cos", "log"):
                self.next()
                return func(name, self.function_argument())
            if name == "operatorname":
                self.next()
                self.expect("LBRACE")
                fname = self.raw_braced_content()
                args = self.application_args()
                if args is None:
                    self.fail("\\operatorname must be applied to arguments")
                return applied(fname, args)
            if name == "partial":
                raise LatexParseError("\\partial outside \\frac", pos)
            return self.symbol_or_application()
        if kind == _LETTER:
            if text == "e":
                self.next()
                self.expect("CARET")
                self.expect("LBRACE")
                arg = self.expr()
                self.expect("RBRACE")
                return func("exp", arg)
            if text == "d":
                raise LatexParseError("differential marker 'd' outside an integral", pos)
            return self.symbol_or_application()
        raise LatexParseError(f"unexpected token {text!r}", pos)

    def function_argument(self) -> Expr:
        kind, _, _ = self.peek()
        if kind == "LBRACE":
            self.next()
            self.expect("LPAREN")
            e = self.expr()
            self.expect("RPAREN")
            self.expect("RBRACE")
            return e
        self.expect("LPAREN")
        e = self.expr()
        self.expect("RPAREN")
        return e

    def raw_braced_content(self) -> str:
        """Consume tokens up to the matching close brace, returning raw text."""
        depth = 1
        parts: list[str] = []
        while True:
            kind, text, pos = self.next()
            if kind == _EOF:
                raise LatexParseError("unterminated brace group", pos)
            if kind == "LBRACE":
                depth += 1
            elif kind == "RBRACE":
                depth -= 1
                if depth == 0:
                    return "".join(parts)
            parts.append(text)

    def symbol_or_application(self) -> Expr:
        name = self.atom_name()
        if self.peek()[0] == "LBRACE" and self.peek(1)[0] == "LPAREN":
            args = self.application_args()
            assert args is not None
            return applied(name, args)
        return Symbol(name)

    def application_args(self) -> Optional[list[Expr]]:
        if not (self.peek()[0] == "LBRACE" and self.peek(1)[0] == "LPAREN"):
            return None
        self.next()
        self.next()
        args = [self.expr()]
        while self.peek()[0] == "COMMA":
            self.next()
            args.append(self.expr())
        self.expect("RPAREN")
        self.expect("RBRACE")
        return args

    def atom_name(self) -> str:
        kind, text, pos = self.next()
        if kind == _LETTER:
            base = text
        elif kind == _CMD:
            cmd = text[1:]
            if cmd in _DECORATORS:
                self.expect("LBRACE")
                inner = self.raw_braced_content()
                base = f"{text}{{{inner}}}"
            elif cmd in _GREEK:
                base = text
            elif cmd in _RESERVED_CMDS:
                raise LatexParseError(f"reserved command \\{cmd} cannot name a symbol", pos)
            else:
                raise UnknownLatexCommand(f"unknown command {text!r}", pos)
        else:
            raise LatexParseError(f"expected a symbol, found {text!r}", pos)
        return base + self.name_suffixes()

    def name_suffixes(self) -> str:
        out = []
        while True:
            kind, text, _ = self.peek()
            if kind == "UNDERSCORE":
                self.next()
                k2, t2, p2 = self.next()
                if k2 == "LBRACE":
                    out.append("_{" + self.raw_braced_content() + "}")
                elif k2 in (_LETTER, _DIGITS, _CMD):
                    out.append("_" + t2)
                else:
                    raise LatexParseError("bad subscript", p2)
            elif kind == "CARET" and self.peek(1)[1] == "\\prime":
                self.next()
                self.next()
                out.append("^\\prime")
            elif (
                kind == "CARET"
                and self.peek(1)[0] == "LBRACE"
                and self.peek(2)[1] == "\\prime"
                and self.peek(3)[0] == "RBRACE"
            ):
                self.next()
                self.next()
                self.next()
                self.next()
                out.append("^{\\prime}")
            else:
                return "".join(out)

    def frac_rest(self) -> Expr:
        self.expect("LBRACE")
        kind, text, _ = self.peek()
        if (kind == _LETTER and text == "d") or (kind == _CMD and text == "\\partial"):
            return self.derivative_rest(text)
        num = self.expr()
        self.expect("RBRACE")
        self.expect("LBRACE")
        den = self.expr()
        self.expect("RBRACE")
        return div(num, den)

    def derivative_rest(self, marker: str) -> Expr:
        self.next()  # the marker inside the numerator
        order = 1
        if self.peek()[0] == "CARET":
            self.next()
            e = self.exponent()
            if type(e) is not Integer or e.value < 1:
                self.fail("derivative order must be a positive integer")
            order = e.value
        self.expect("RBRACE")
        self.expect("LBRACE")
        kind, text, pos = self.next()
        if not ((kind == _LETTER and text == "d") or (kind == _CMD and text == "\\partial")):
            raise LatexParseError("mismatched derivative denominator", pos)
        var = Symbol(self.atom_name())
        if self.peek()[0] == "CARET":
            self.next()
            e = self.exponent()
            if type(e) is not Integer or e.value != order:
                self.fail("derivative orders disagree")
        self.expect("RBRACE")
        factors = [self.factor()]
        while not self.at_term_stop():
            factors.append(self.factor())
        body = factors[0] if len(factors) == 1 else mul(*factors)
        return derivative(body, var, order)

    def integral_rest(self) -> Expr:
        body = self.expr()
        kind, text, pos = self.next()
        if not (kind == _LETTER and text == "d"):
            raise LatexParseError("expected differential 'd<var>' closing the integral", pos)
        var = Symbol(self.atom_name())
        return integral(body, var)


def parse_latex(s: str) -> Expr:
    """Parse a single expression in the emitted grammar (whitespace tolerant)."""
    return _Parser(s).parse_expression()


def parse_equation(s: str) -> Equation:
    return _Parser(s).parse_equation()
