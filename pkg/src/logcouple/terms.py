"""Parser, AST, and evaluator for the couple's term language.

Terms are built from variables, element literals, negation, addition,
scalar division d<n>, and the primitives psi, s, p, and the asymptotic
integral.  The integral is not a primitive of the language but is
definable from s, and the evaluator keeps int(t) == t - s(t) exact.

Generalized s-functions (rational combinations of shifted arguments
s^k(alpha_i) plus an offset, with negative shifts read as predecessors)
live here too, together with their covering by affine maps.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .element import (
    GammaElement,
    GammaExt,
    INF,
    ZERO,
    delta,
    format_element,
    format_rational,
    integral,
    parse_element,
    parse_rational,
    pred,
    psi,
    psi_point,
    psi_point_index,
    succ,
)
from .psifun import PsiFunction

__all__ = [
    "Term",
    "Var",
    "Const",
    "Add",
    "Neg",
    "Delta",
    "Psi",
    "Succ",
    "Pred",
    "Integ",
    "TermSyntaxError",
    "UnboundVariableError",
    "parse_term",
    "print_term",
    "free_vars",
    "eval_term",
    "GenSFunction",
    "eval_gensfun",
    "gensfun_cover",
    "AffineReport",
    "local_slope",
]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: GammaExt


@dataclass(frozen=True)
class Add:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Neg:
    arg: "Term"


@dataclass(frozen=True)
class Delta:
    n: int
    arg: "Term"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("d_n requires a positive integer")


@dataclass(frozen=True)
class Psi:
    arg: "Term"


@dataclass(frozen=True)
class Succ:
    arg: "Term"


@dataclass(frozen=True)
class Pred:
    arg: "Term"


@dataclass(frozen=True)
class Integ:
    arg: "Term"


Term = Union[Var, Const, Add, Neg, Delta, Psi, Succ, Pred, Integ]


class TermSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnboundVariableError(ValueError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<int>\d+)|(?P<punct>[\[\],/()+-]))"
)

_FUNCTIONS = {"psi": Psi, "s": Succ, "p": Pred, "int": Integ}
_DELTA_RE = re.compile(r"d(\d+)$")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                stripped = text[pos:].lstrip()
                if not stripped:
                    break
                raise TermSyntaxError(f"unexpected character {stripped[0]!r}", pos)
            for kind in ("ident", "int", "punct"):
                if m.group(kind) is not None:
                    self.tokens.append((kind, m.group(kind), m.start(kind)))
                    break
            pos = m.end()
        self.i = 0

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> Tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise TermSyntaxError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        tok = self.next()
        if tok[1] != value:
            raise TermSyntaxError(f"expected {value!r}, found {tok[1]!r}", tok[2])

    # term := unary (('+'|'-') unary)*
    def parse_sum(self) -> Term:
        t = self.parse_unary()
        while True:
            tok = self.peek()
            if tok and tok[1] in "+-":
                self.next()
                rhs = self.parse_unary()
                t = Add(t, rhs) if tok[1] == "+" else Add(t, Neg(rhs))
            else:
                return t

    def parse_unary(self) -> Term:
        tok = self.peek()
        if tok and tok[1] == "-":
            self.next()
            return Neg(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Term:
        tok = self.next()
        kind, value, pos = tok
        if value == "(":
            inner = self.parse_sum()
            self.expect(")")
            return inner
        if value == "[":
            return Const(self.parse_element_body())
        if kind == "ident":
            if value == "inf":
                return Const(INF)
            nxt = self.peek()
            if nxt and nxt[1] == "(":
                ctor = _FUNCTIONS.get(value)
                dm = _DELTA_RE.match(value)
                if ctor is None and dm:
                    n = int(dm.group(1))
                    if n < 1:
                        raise TermSyntaxError("d_n requires a positive n", pos)
                    ctor = lambda arg: Delta(n, arg)
                if ctor is not None:
                    self.expect("(")
                    inner = self.parse_sum()
                    self.expect(")")
                    return ctor(inner)
                raise TermSyntaxError(f"unknown function {value!r}", pos)
            return Var(value)
        raise TermSyntaxError(f"unexpected token {value!r}", pos)

    def parse_element_body(self) -> GammaElement:
        # '[' already consumed
        coords: List[Fraction] = []
        tok = self.peek()
        if tok and tok[1] == "]":
            self.next()
            return ZERO
        while True:
            coords.append(self.parse_rational())
            tok = self.next()
            if tok[1] == "]":
                return GammaElement.from_list(coords)
            if tok[1] != ",":
                raise TermSyntaxError(f"expected ',' or ']', found {tok[1]!r}", tok[2])

    def parse_rational(self) -> Fraction:
        sign = 1
        tok = self.next()
        if tok[1] == "-":
            sign = -1
            tok = self.next()
        if tok[0] != "int":
            raise TermSyntaxError(f"expected a number, found {tok[1]!r}", tok[2])
        num = int(tok[1])
        nxt = self.peek()
        if nxt and nxt[1] == "/":
            self.next()
            den_tok = self.next()
            if den_tok[0] != "int" or int(den_tok[1]) == 0:
                raise TermSyntaxError("expected a positive denominator", den_tok[2])
            return Fraction(sign * num, int(den_tok[1]))
        return Fraction(sign * num)


def parse_term(text: str) -> Term:
    parser = _Parser(text)
    t = parser.parse_sum()
    tok = parser.peek()
    if tok is not None:
        raise TermSyntaxError(f"trailing input {tok[1]!r}", tok[2])
    return t


def print_term(t: Term) -> str:
    """Render a term; parse_term(print_term(t)) == t structurally."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return format_element(t.value)
    if isinstance(t, Add):
        left = print_term(t.left)
        if isinstance(t.right, Add):
            return f"{left} + ({print_term(t.right)})"
        if isinstance(t.right, Neg):
            inner = t.right.arg
            body = print_term(inner)
            if isinstance(inner, (Add, Neg)):
                return f"{left} - ({body})"
            return f"{left} - {body}"
        return f"{left} + {print_term(t.right)}"
    if isinstance(t, Neg):
        body = print_term(t.arg)
        if isinstance(t.arg, Add):
            return f"-({body})"
        return f"-{body}"
    if isinstance(t, Delta):
        return f"d{t.n}({print_term(t.arg)})"
    if isinstance(t, Psi):
        return f"psi({print_term(t.arg)})"
    if isinstance(t, Succ):
        return f"s({print_term(t.arg)})"
    if isinstance(t, Pred):
        return f"p({print_term(t.arg)})"
    if isinstance(t, Integ):
        return f"int({print_term(t.arg)})"
    raise TypeError(f"not a term: {t!r}")


def free_vars(t: Term) -> Set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Const):
        return set()
    if isinstance(t, Add):
        return free_vars(t.left) | free_vars(t.right)
    return free_vars(t.arg)


def eval_term(t: Term, env: Mapping[str, GammaExt]) -> GammaExt:
    """Structural evaluation over the extended group; total thanks to the
    default value of every primitive at infinity."""
    if isinstance(t, Var):
        if t.name not in env:
            raise UnboundVariableError(t.name)
        return env[t.name]
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Add):
        return eval_term(t.left, env) + eval_term(t.right, env)
    if isinstance(t, Neg):
        return -eval_term(t.arg, env)
    if isinstance(t, Delta):
        return delta(t.n, eval_term(t.arg, env))
    if isinstance(t, Psi):
        return psi(eval_term(t.arg, env))
    if isinstance(t, Succ):
        return succ(eval_term(t.arg, env))
    if isinstance(t, Pred):
        return pred(eval_term(t.arg, env))
    if isinstance(t, Integ):
        return integral(eval_term(t.arg, env))
    raise TypeError(f"not a term: {t!r}")


# -- generalized s-functions ---------------------------------------------------


class GenSFunction:
    """A finite rational combination of shifted arguments plus an offset:
    alpha -> sum q[(i, k)] * s^k(alpha_i) + beta, where negative shifts are
    read as predecessors (and may push a value off the psi set to inf).

    Zero coefficients are kept in the table so arity and shape survive
    serialization round trips; they contribute nothing when evaluating.
    """

    __slots__ = ("arity", "terms", "offset")

    def __init__(
        self,
        arity: int,
        terms: Iterable[Tuple[int, int, object]] = (),
        offset: GammaExt = ZERO,
    ):
        if arity < 0:
            raise ValueError("arity must be >= 0")
        self.arity = arity
        normalized: List[Tuple[int, int, Fraction]] = []
        seen = set()
        for var, shift, coeff in terms:
            var, shift = int(var), int(shift)
            if not 0 <= var < arity:
                raise ValueError(f"variable index {var} out of range")
            if (var, shift) in seen:
                raise ValueError(f"duplicate (variable, shift) pair ({var}, {shift})")
            seen.add((var, shift))
            normalized.append((var, shift, Fraction(coeff)))
        self.terms = tuple(sorted(normalized, key=lambda t: (t[0], t[1])))
        self.offset = offset

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GenSFunction):
            return (
                self.arity == other.arity
                and self.terms == other.terms
                and self.offset == other.offset
            )
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.arity, self.terms, self.offset))

    def __repr__(self) -> str:
        pieces = [
            f"{format_rational(q)}*s^{k}(a{i})" for i, k, q in self.terms
        ]
        pieces.append(format_element(self.offset) if self.offset is not INF else "inf")
        return " + ".join(pieces)

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "terms": [
                {"var": i, "shift": k, "coeff": format_rational(q)}
                for i, k, q in self.terms
            ],
            "offset": format_element(self.offset),
        }

    @staticmethod
    def from_json(obj: Mapping) -> "GenSFunction":
        return GenSFunction(
            int(obj["arity"]),
            [(t["var"], t["shift"], parse_rational(str(t["coeff"]))) for t in obj.get("terms", [])],
            parse_element(obj.get("offset", "[]")),
        )


def _shift(x: GammaExt, k: int) -> GammaExt:
    for _ in range(k):
        x = succ(x)
    for _ in range(-k):
        x = pred(x)
    return x


def eval_gensfun(F: GenSFunction, args: Sequence) -> GammaExt:
    """Evaluate at a tuple of psi points; any predecessor falling off the
    psi set makes the whole value inf."""
    if len(args) != F.arity:
        raise ValueError(f"expected {F.arity} arguments, got {len(args)}")
    points: List[GammaElement] = []
    for a in args:
        if isinstance(a, GammaElement):
            if psi_point_index(a) is None:
                raise ValueError("arguments must be psi points")
            points.append(a)
        else:
            points.append(psi_point(int(a)))
    total: GammaExt = F.offset
    for i, k, q in F.terms:
        if not q:
            continue
        shifted = _shift(points[i], k)
        total = total + shifted * q
    return total


def gensfun_cover(F: GenSFunction) -> PsiFunction:
    """An affine map whose image contains every finite value of F: one fresh
    index per nonzero table entry, same offset."""
    nonzero = [(i, k, q) for i, k, q in F.terms if q]
    if F.offset is INF:
        # no finite values at all; the empty cover
        return PsiFunction({}, ZERO)
    return PsiFunction(
        {fresh: q for fresh, (_, _, q) in enumerate(nonzero)}, F.offset
    )


# -- local affineness probe -----------------------------------------------------


@dataclass(frozen=True)
class AffineReport:
    slopes: Dict[str, Fraction]
    value: GammaExt


def _ratio(diff: GammaElement, h: GammaElement) -> Optional[Fraction]:
    # the rational q with diff = q*h, if any
    if diff.is_zero:
        return Fraction(0)
    if diff.leading_index != h.leading_index:
        return None
    q = diff.leading_coeff / h.leading_coeff
    return q if h * q == diff else None


def local_slope(
    t: Term,
    at: Union[GammaElement, Mapping[str, GammaElement]],
    radius: GammaElement,
) -> Optional[AffineReport]:
    """Probe t for an affine law around a point: evaluate at offsets
    +-radius/2^i (i = 1..4) in each variable, plus two joint offsets, and
    report the unique matching slopes and base value, or None.  This
    falsifies non-affineness on the probe set; it does not prove local
    affineness."""
    if not isinstance(radius, GammaElement) or radius <= ZERO:
        raise ValueError("radius must be a positive group element")
    names = sorted(free_vars(t))
    if isinstance(at, GammaElement):
        if len(names) != 1:
            raise ValueError("a bare point needs exactly one free variable")
        env = {names[0]: at}
    else:
        env = dict(at)
        missing = set(names) - set(env)
        if missing:
            raise ValueError(f"missing values for {sorted(missing)}")
    offsets = [radius * Fraction(1, 2**i) for i in range(1, 5)]
    offsets += [-h for h in offsets]
    base = eval_term(t, env)
    evaluations: Dict[Tuple[str, int], GammaExt] = {}
    any_inf = base is INF
    all_inf = base is INF
    for v in names:
        for idx, h in enumerate(offsets):
            shifted = dict(env)
            shifted[v] = env[v] + h
            val = eval_term(t, shifted)
            evaluations[(v, idx)] = val
            any_inf = any_inf or val is INF
            all_inf = all_inf and val is INF
    if any_inf:
        if all_inf and (names or base is INF):
            return AffineReport({v: Fraction(0) for v in names}, INF)
        if base is INF and not names:
            return AffineReport({}, INF)
        return None
    slopes: Dict[str, Fraction] = {}
    for v in names:
        q: Optional[Fraction] = None
        for idx, h in enumerate(offsets):
            val = evaluations[(v, idx)]
            ratio = _ratio(val - base, h)
            if ratio is None:
                return None
            if q is None:
                q = ratio
            elif q != ratio:
                return None
        slopes[v] = q if q is not None else Fraction(0)
    # joint probes: the affine law must predict simultaneous offsets
    for i in (1, 2):
        h = radius * Fraction(1, 2**i)
        shifted = {v: env[v] + h for v in names}
        shifted.update({k: w for k, w in env.items() if k not in shifted})
        predicted = base
        for v in names:
            predicted = predicted + h * slopes[v]
        if eval_term(t, shifted) != predicted:
            return None
    return AffineReport(slopes, base)
