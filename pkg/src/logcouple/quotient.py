"""Convex-subgroup scales, quotient projections, and counting.

For a finite scale value s^k0 the convex subgroup consists of the
elements whose first k coordinates vanish, so the quotient is the
lexicographic rational k-space and the projection is coordinate
truncation.  Images of small sets in these quotients are finite and are
computed exactly by enumerating capped index profiles: the first k
coordinates of a staircase sum only depend on min(n_i, k).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Set, Tuple

from .element import GammaElement, GammaExt, INF, format_rational, psi_point
from .psifun import PsiFunction, _component_parts, solve_min

__all__ = [
    "Phi",
    "PHI_INF",
    "TruncatedVector",
    "in_delta",
    "project",
    "project_tuple",
    "project_set",
    "count_function",
    "closed_discrete_certificate",
    "fit_count_polynomial",
    "format_vector",
]

TruncatedVector = Tuple[Fraction, ...]


@dataclass(frozen=True, order=False)
class Phi:
    """A scale value: s^k0 (the k-th staircase point) or infinity (k=None)."""

    k: Optional[int] = None

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise ValueError("finite scale values are s^k0 with k >= 1")

    @property
    def is_finite(self) -> bool:
        return self.k is not None

    def as_element(self) -> GammaExt:
        return INF if self.k is None else psi_point(self.k)

    def __le__(self, other: "Phi") -> bool:
        if self.k is None:
            return other.k is None
        return other.k is None or self.k <= other.k

    def __lt__(self, other: "Phi") -> bool:
        return self <= other and self != other

    def __ge__(self, other: "Phi") -> bool:
        return other <= self

    def __gt__(self, other: "Phi") -> bool:
        return other < self

    def __str__(self) -> str:
        return "inf" if self.k is None else f"s^{self.k}0"

    @staticmethod
    def parse(text: str) -> "Phi":
        text = text.strip()
        if text in ("inf", "∞"):
            return Phi(None)
        m = re.fullmatch(r"s\^(\d+)0", text) or re.fullmatch(r"s\^(\d+)", text)
        if not m:
            raise ValueError(f"not a scale value (expected s^k0 or inf): {text!r}")
        return Phi(int(m.group(1)))


PHI_INF = Phi(None)


def in_delta(gamma: GammaElement, phi: Phi) -> bool:
    """Membership in the convex subgroup at scale phi: for s^k0, the first
    k coordinates vanish; at infinity only zero qualifies."""
    if not isinstance(gamma, GammaElement):
        raise ValueError("in_delta takes a group element")
    if phi.k is None:
        return gamma.is_zero
    return gamma.is_zero or gamma.leading_index >= phi.k


def project(gamma: GammaElement, k: int) -> TruncatedVector:
    """Coordinate truncation onto the rational k-space (zeros kept)."""
    if k < 1:
        raise ValueError("projection depth must be >= 1")
    return gamma.truncate(k)


def project_tuple(point: Sequence[GammaElement], k: int) -> Tuple[TruncatedVector, ...]:
    return tuple(project(g, k) for g in point)


def _capped_value(F: PsiFunction, profile: Sequence[int]) -> GammaElement:
    total = F.offset
    for (label, q), v in zip(F._coeffs, profile):
        total = total + psi_point(v) * q
    return total


def project_set(X, k: int) -> Set[TruncatedVector]:
    """The exact finite projection of an image union or constrained image:
    capped profiles in {1..k}^I, a cap meaning "at least k"; constrained
    profiles are kept only when the extended difference system is
    satisfiable."""
    if k < 1:
        raise ValueError("projection depth must be >= 1")
    out: Set[TruncatedVector] = set()
    for F, atoms in _component_parts(X):
        labels = F.labels
        if not labels:
            out.add(F.offset.truncate(k))
            continue
        for profile in itertools.product(range(1, k + 1), repeat=len(labels)):
            if atoms:
                lower = {l: k for l, v in zip(labels, profile) if v == k}
                pins = {l: v for l, v in zip(labels, profile) if v < k}
                lower.update(pins)
                if solve_min(labels, atoms, lower=lower, upper=pins) is None:
                    continue
            out.add(_capped_value(F, profile).truncate(k))
    return out


def count_function(X, ks: Iterable[int]) -> List[Tuple[int, int]]:
    """Exact quotient cardinalities |projection at s^k0| for each k."""
    return [(k, len(project_set(X, k))) for k in ks]


def closed_discrete_certificate(X, phi: Phi) -> Tuple[TruncatedVector, ...]:
    """The finite quotient image at a finite scale, sorted; its finiteness
    certifies that the image is closed and discrete in the dense quotient
    order."""
    if not phi.is_finite:
        raise ValueError("certificates exist at finite scales only")
    return tuple(sorted(project_set(X, phi.k)))


def fit_count_polynomial(
    counts: Sequence[Tuple[int, int]], max_degree: int = 4
) -> Optional[Tuple[Fraction, ...]]:
    """Exact polynomial fit of the count table: the least degree d whose
    interpolation through the last d+1 points also matches the remaining
    point of the last d+2.  Returns coefficients (constant first) or None.
    Any fit is conjectural; the caller must flag it as such."""
    if len(counts) < 2:
        return None
    for d in range(0, max_degree + 1):
        tail = counts[-(d + 2) :]
        if len(tail) < d + 2:
            break
        nodes = tail[-(d + 1) :]
        # solve the Vandermonde system exactly
        coeffs = _interpolate([Fraction(k) for k, _ in nodes], [Fraction(c) for _, c in nodes])
        if coeffs is None:
            continue
        if all(_poly_eval(coeffs, Fraction(k)) == c for k, c in tail):
            return coeffs
    return None


def _poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _interpolate(xs: List[Fraction], ys: List[Fraction]) -> Optional[Tuple[Fraction, ...]]:
    n = len(xs)
    rows = [[x**j for j in range(n)] + [y] for x, y in zip(xs, ys)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col]), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        pv = rows[col][col]
        rows[col] = [v / pv for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return tuple(rows[i][n] for i in range(n))


def format_vector(vec: TruncatedVector) -> str:
    return "(" + ",".join(format_rational(q) for q in vec) + ")"
