"""The small-set calculus: affine maps out of the psi set and their images.

A PsiFunction is an affine map (alpha_i) -> sum q_i * alpha_i + beta from
tuples of staircase points into the group, with nonzero rational
coefficients.  Finite unions of their images are exactly the sets whose
every quotient picture is degenerate, and they admit an exact derived-set
calculus: the limit points of image(F) are the images of the restrictions
F_{I\\J} over nonempty J with zero coefficient sum.

The membership solver exploits the staircase shape of E_n = e_0+...+e_{n-1}:
coordinate drops of gamma - beta must be partitioned into exact sub-multiset
sums of the coefficients, with zero-sum leftovers free to sit beyond the
support (reported as parametric families).

Everything here is pure and immutable.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .element import (
    GammaElement,
    INF,
    ZERO,
    format_element,
    format_rational,
    parse_element,
    parse_rational,
    psi,
    psi_point,
    psi_point_index,
)

__all__ = [
    "PsiFunction",
    "Atom",
    "ConstrainedImage",
    "ImageUnion",
    "MemberSolution",
    "norm",
    "restrict",
    "derived_set",
    "d_rank",
    "closure",
    "member",
    "expand_solutions",
    "member_constrained",
    "contains",
    "limit_point_probe",
    "recover",
    "recovery_probes",
    "equilateral_max_clique",
    "solve_min",
    "satisfies",
    "sample_points",
    "semantically_equal",
    "product_derived_step",
    "product_derived_direct",
    "product_contains",
    "parse_linear",
    "fig2_set",
    "psifunction_to_json",
    "psifunction_from_json",
    "component_to_json",
    "component_from_json",
    "imageunion_to_json",
    "imageunion_from_json",
]


class PsiFunction:
    """An affine map out of a finite power of the psi set.

    ``coeffs`` maps integer index labels to nonzero rationals; an empty
    map denotes the constant function with value ``offset``.
    """

    __slots__ = ("_coeffs", "offset")

    def __init__(
        self,
        coeffs: Union[Mapping[int, object], Iterable[Tuple[int, object]]] = (),
        offset: GammaElement = ZERO,
    ):
        if isinstance(coeffs, Mapping):
            items = coeffs.items()
        else:
            items = coeffs
        acc = {}
        for label, q in items:
            label = int(label)
            q = Fraction(q)
            if not q:
                raise ValueError(f"coefficient of x{label} must be nonzero")
            if label in acc:
                raise ValueError(f"duplicate label x{label}")
            acc[label] = q
        if not isinstance(offset, GammaElement):
            raise ValueError("offset must be a group element (not inf)")
        self._coeffs = tuple(sorted(acc.items()))
        self.offset = offset

    @property
    def labels(self) -> Tuple[int, ...]:
        return tuple(l for l, _ in self._coeffs)

    @property
    def coeffs(self) -> Dict[int, Fraction]:
        return dict(self._coeffs)

    @property
    def is_constant(self) -> bool:
        return not self._coeffs

    def norm(self) -> Fraction:
        """Sum of the coefficients (empty sum for constants)."""
        return sum((q for _, q in self._coeffs), Fraction(0))

    def restrict(self, J: Iterable[int]) -> "PsiFunction":
        """Keep the coefficients on J (a subset of the labels), same offset."""
        J = set(J)
        missing = J - set(self.labels)
        if missing:
            raise ValueError(f"labels not in index set: {sorted(missing)}")
        return PsiFunction(((l, q) for l, q in self._coeffs if l in J), self.offset)

    def evaluate(self, assignment) -> GammaElement:
        """Value at an index assignment (label -> n, or a sequence in label order)."""
        if not isinstance(assignment, Mapping):
            seq = tuple(assignment)
            if len(seq) != len(self._coeffs):
                raise ValueError("assignment length does not match arity")
            assignment = {l: seq[i] for i, (l, _) in enumerate(self._coeffs)}
        total = self.offset
        for l, q in self._coeffs:
            n = assignment[l]
            if isinstance(n, GammaElement):
                idx = psi_point_index(n)
                if idx is None:
                    raise ValueError("arguments must be psi points")
                n = idx
            if n < 1:
                raise ValueError("psi indices start at 1")
            total = total + psi_point(n) * q
        return total

    def __eq__(self, other: object) -> bool:
        if isinstance(other, PsiFunction):
            return self._coeffs == other._coeffs and self.offset == other.offset
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._coeffs, self.offset))

    def __repr__(self) -> str:
        if not self._coeffs:
            return format_element(self.offset)
        parts: List[str] = []
        for l, q in self._coeffs:
            mag = abs(q)
            body = f"x{l}" if mag == 1 else f"{format_rational(mag)} x{l}"
            if not parts:
                parts.append(body if q > 0 else f"-{body}")
            else:
                parts.append(f"{'+' if q > 0 else '-'} {body}")
        if not self.offset.is_zero:
            parts.append(f"+ {format_element(self.offset)}")
        return " ".join(parts)


ImageUnion = Sequence[PsiFunction]


def norm(F: PsiFunction) -> Fraction:
    return F.norm()


def restrict(F: PsiFunction, J: Iterable[int]) -> PsiFunction:
    return F.restrict(J)


# -- difference constraints --------------------------------------------------

_ATOM_KINDS = ("diff_le", "diff_eq", "ge", "le")


@dataclass(frozen=True)
class Atom:
    """One conjunct over index variables: n_i - n_j <= c, n_i - n_j = c,
    n_i >= c, or n_i <= c."""

    kind: str
    i: int
    c: int
    j: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _ATOM_KINDS:
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if self.kind.startswith("diff") and self.j is None:
            raise ValueError(f"{self.kind} needs both variables")

    def to_json(self) -> dict:
        d = {"kind": self.kind, "i": self.i, "c": self.c}
        if self.j is not None:
            d["j"] = self.j
        return d

    @staticmethod
    def from_json(obj: Mapping) -> "Atom":
        return Atom(kind=obj["kind"], i=int(obj["i"]), c=int(obj["c"]), j=int(obj["j"]) if "j" in obj else None)


def satisfies(assignment: Mapping[int, int], atoms: Iterable[Atom]) -> bool:
    for a in atoms:
        ni = assignment[a.i]
        if a.kind == "diff_le":
            if not ni - assignment[a.j] <= a.c:
                return False
        elif a.kind == "diff_eq":
            if not ni - assignment[a.j] == a.c:
                return False
        elif a.kind == "ge":
            if not ni >= a.c:
                return False
        else:
            if not ni <= a.c:
                return False
    return True


def solve_min(
    labels: Iterable[int],
    atoms: Iterable[Atom] = (),
    lower: Optional[Mapping[int, int]] = None,
    upper: Optional[Mapping[int, int]] = None,
) -> Optional[Dict[int, int]]:
    """Least integer solution of the difference-constraint system with all
    variables >= 1, or None if unsatisfiable (detected as a forcing cycle,
    Bellman-Ford style)."""
    labels = sorted(set(labels))
    lo = {l: 1 for l in labels}
    up: Dict[int, Optional[int]] = {l: None for l in labels}
    if lower:
        for l, b in lower.items():
            lo[l] = max(lo[l], b)
    if upper:
        for l, b in upper.items():
            up[l] = b if up[l] is None else min(up[l], b)
    edges: List[Tuple[int, int, int]] = []  # (i, j, c): n_i - n_j <= c
    for a in atoms:
        if a.i not in lo or (a.j is not None and a.j not in lo):
            raise ValueError(f"atom over unknown variable: {a}")
        if a.kind == "diff_le":
            edges.append((a.i, a.j, a.c))
        elif a.kind == "diff_eq":
            edges.append((a.i, a.j, a.c))
            edges.append((a.j, a.i, -a.c))
        elif a.kind == "ge":
            lo[a.i] = max(lo[a.i], a.c)
        else:
            up[a.i] = a.c if up[a.i] is None else min(up[a.i], a.c)
    x = dict(lo)
    for l in labels:
        if up[l] is not None and x[l] > up[l]:
            return None
    for _ in range(len(labels) + 2):
        changed = False
        for i, j, c in edges:
            need = x[i] - c  # n_j >= n_i - c
            if x[j] < need:
                x[j] = need
                if up[j] is not None and x[j] > up[j]:
                    return None
                changed = True
        if not changed:
            return x
    return None  # raising never stabilized: positive-gain cycle


class ConstrainedImage:
    """The image of a PsiFunction restricted to index tuples satisfying a
    conjunction of difference constraints."""

    __slots__ = ("base", "constraints")

    def __init__(self, base: PsiFunction, constraints: Iterable[Atom] = ()):
        self.base = base
        atoms = tuple(constraints)
        known = set(base.labels)
        for a in atoms:
            if a.i not in known or (a.j is not None and a.j not in known):
                raise ValueError(f"constraint over unknown label: {a}")
        self.constraints = atoms

    def is_empty(self) -> bool:
        return solve_min(self.base.labels, self.constraints) is None

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ConstrainedImage):
            return self.base == other.base and self.constraints == other.constraints
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.base, self.constraints))

    def __repr__(self) -> str:
        return f"{{{self.base!r} : {len(self.constraints)} constraints}}"


Component = Union[PsiFunction, ConstrainedImage]


def _component_parts(X) -> List[Tuple[PsiFunction, Tuple[Atom, ...]]]:
    if isinstance(X, PsiFunction):
        return [(X, ())]
    if isinstance(X, ConstrainedImage):
        return [(X.base, X.constraints)]
    parts: List[Tuple[PsiFunction, Tuple[Atom, ...]]] = []
    for comp in X:
        parts.extend(_component_parts(comp))
    return parts


def _plain_components(X) -> List[PsiFunction]:
    parts = _component_parts(X)
    for _, atoms in parts:
        if atoms:
            raise TypeError("exact derived sets are only computed for unconstrained images")
    return [F for F, _ in parts]


# -- derived sets ------------------------------------------------------------


def derived_set(X) -> List[PsiFunction]:
    """Exact derived set of a finite union of images: per component, the
    union over nonempty zero-norm J of the restriction to the complement.
    Components with identical data are merged."""
    out: List[PsiFunction] = []
    seen = set()
    for F in _plain_components(X):
        labels = F.labels
        qs = F.coeffs
        n = len(labels)
        for mask in range(1, 1 << n):
            J = [labels[i] for i in range(n) if mask >> i & 1]
            if sum(qs[l] for l in J) == 0:
                G = F.restrict(set(labels) - set(J))
                key = (G._coeffs, G.offset)
                if key not in seen:
                    seen.add(key)
                    out.append(G)
    return out


def d_rank(X) -> int:
    """Least n with the n-th derived set empty; at most 1 + max arity."""
    current = _plain_components(X)
    n = 0
    while current:
        current = derived_set(current)
        n += 1
    return n


def closure(X) -> List[PsiFunction]:
    """X together with its derived set (the topological closure)."""
    comps = _plain_components(X)
    out = list(comps)
    have = {(F._coeffs, F.offset) for F in comps}
    for G in derived_set(comps):
        key = (G._coeffs, G.offset)
        if key not in have:
            have.add(key)
            out.append(G)
    return out


# -- membership: the staircase solver ----------------------------------------


@dataclass(frozen=True)
class MemberSolution:
    """One solution family of sum q_i E_{n_i} = gamma - beta.

    ``assignment`` is the canonical witness.  Each frozenset in
    ``floating`` is a zero-sum group of labels whose members share one
    position that may be moved to any index (the family is then infinite);
    in the witness the groups sit just beyond the support of gamma - beta.
    """

    assignment: Tuple[Tuple[int, int], ...]
    floating: Tuple[frozenset, ...] = ()

    @property
    def parametric(self) -> bool:
        return bool(self.floating)

    def as_dict(self) -> Dict[int, int]:
        return dict(self.assignment)


def _zero_partitions(mask: int, msum) -> Iterable[List[int]]:
    if mask == 0:
        yield []
        return
    low = mask & -mask
    rest = mask ^ low
    sub = rest
    while True:
        block = low | sub
        if msum[block] == 0:
            for p in _zero_partitions(mask ^ block, msum):
                yield [block] + p
        if sub == 0:
            break
        sub = (sub - 1) & rest


def member(gamma: GammaElement, F: PsiFunction) -> List[MemberSolution]:
    """All index assignments with F(assignment) = gamma, including parametric
    zero-sum families; empty list means gamma is not in the image."""
    if not isinstance(gamma, GammaElement):
        return []
    delta = gamma - F.offset
    labels = F.labels
    if not labels:
        return [MemberSolution(())] if delta.is_zero else []
    qs = [F.coeffs[l] for l in labels]
    n = len(labels)
    if n > 16:
        raise ValueError("membership solving supports at most 16 indices")
    msum = [Fraction(0)] * (1 << n)
    for mask in range(1, 1 << n):
        low_i = (mask & -mask).bit_length() - 1
        msum[mask] = msum[mask ^ (1 << low_i)] + qs[low_i]
    if delta.coord(0) != msum[(1 << n) - 1]:
        return []
    M = 0 if delta.is_zero else delta.items()[-1][0] + 1
    dense = [delta.coord(c) for c in range(M + 1)]
    jumps = [dense[m - 1] - dense[m] for m in range(1, M + 1)]
    out: List[MemberSolution] = []

    def emit(placed: List[Tuple[int, int]], remaining: int) -> None:
        for part in _zero_partitions(remaining, msum):
            blocks = sorted(part, key=lambda b: (b & -b).bit_length())
            assignment = dict(placed)
            floating = []
            for pos, block in enumerate(blocks, start=M + 1):
                group = frozenset(labels[i] for i in range(n) if block >> i & 1)
                floating.append(group)
                for l in group:
                    assignment[l] = pos
            out.append(
                MemberSolution(tuple(sorted(assignment.items())), tuple(floating))
            )

    def place(m: int, remaining: int, placed: List[Tuple[int, int]]) -> None:
        if m > M:
            emit(placed, remaining)
            return
        target = jumps[m - 1]
        sub = remaining
        while True:
            if msum[sub] == target:
                chosen = [(labels[i], m) for i in range(n) if sub >> i & 1]
                place(m + 1, remaining ^ sub, placed + chosen)
            if sub == 0:
                break
            sub = (sub - 1) & remaining

    place(1, (1 << n) - 1, [])
    return out


def expand_solutions(
    solutions: Iterable[MemberSolution], labels: Sequence[int], bound: int
) -> set:
    """All concrete assignments (tuples in label order) with every index in
    1..bound, instantiating parametric groups at every position."""
    labels = list(labels)
    result = set()
    for sol in solutions:
        base = sol.as_dict()
        fixed = {l: v for l, v in base.items() if all(l not in g for g in sol.floating)}
        if any(v > bound for v in fixed.values()):
            continue
        if not sol.floating:
            result.add(tuple(base[l] for l in labels))
            continue
        for positions in itertools.product(range(1, bound + 1), repeat=len(sol.floating)):
            inst = dict(fixed)
            for group, pos in zip(sol.floating, positions):
                for l in group:
                    inst[l] = pos
            result.add(tuple(inst[l] for l in labels))
    return result


def member_constrained(gamma: GammaElement, C: ConstrainedImage) -> Optional[Dict[int, int]]:
    """A witness assignment satisfying the constraints, or None.  Parametric
    families are intersected with the constraints via the least solution of
    the combined difference system."""
    for sol in member(gamma, C.base):
        floating_labels = set().union(*sol.floating) if sol.floating else set()
        lower: Dict[int, int] = {}
        upper: Dict[int, int] = {}
        atoms = list(C.constraints)
        for l, v in sol.assignment:
            if l not in floating_labels:
                lower[l] = v
                upper[l] = v
        for group in sol.floating:
            anchor = min(group)
            for other in sorted(group - {anchor}):
                atoms.append(Atom("diff_eq", anchor, 0, other))
        witness = solve_min(C.base.labels, atoms, lower=lower, upper=upper)
        if witness is not None:
            return witness
    return None


def contains(X, gamma: GammaElement) -> bool:
    """Membership in a component, a constrained component, or a union."""
    if isinstance(X, PsiFunction):
        return bool(member(gamma, X))
    if isinstance(X, ConstrainedImage):
        return member_constrained(gamma, X) is not None
    return any(contains(comp, gamma) for comp in X)


# -- the limit-point probe ----------------------------------------------------


def _profile_truncation(F: PsiFunction, profile: Sequence[int], k: int) -> Tuple[Fraction, ...]:
    total = F.offset
    for (l, q), v in zip(F._coeffs, profile):
        total = total + psi_point(v) * q
    return total.truncate(k)


def _has_nongamma_value(
    F: PsiFunction,
    atoms: Tuple[Atom, ...],
    pins: Dict[int, int],
    capped: List[int],
    k: int,
    gamma: GammaElement,
) -> bool:
    """Exactly decide whether the constrained capped profile holds a point
    different from gamma.  Witness-driven: returns True only on an explicit
    instantiation with a different value."""
    labels = F.labels
    lower = {l: k for l in capped}
    lower.update(pins)
    upper = dict(pins)
    least = solve_min(labels, atoms, lower=lower, upper=upper)
    if least is None:
        return False
    if F.evaluate(least) != gamma:
        return True
    # push each variable off the least solution
    for l in labels:
        pushed = dict(lower)
        pushed[l] = least[l] + 1
        alt = solve_min(labels, atoms, lower=pushed, upper=upper)
        if alt is not None and F.evaluate(alt) != gamma:
            return True
    # windowed sweep; beyond this window only engineered ties could differ
    width = k + len(labels) + 3
    ranges = []
    for l in labels:
        if l in pins:
            ranges.append((pins[l],))
        else:
            ranges.append(tuple(range(k, width + 1)))
    for combo in itertools.product(*ranges):
        assignment = dict(zip(labels, combo))
        if satisfies(assignment, atoms) and F.evaluate(assignment) != gamma:
            return True
    return False


def limit_point_probe(gamma: GammaElement, X, K: int) -> bool:
    """True iff for every k <= K some point of X other than gamma matches
    gamma on the first k coordinates.  The per-k check enumerates capped
    index profiles in {1..k}^I (the truncation only depends on min(n_i, k)),
    filtering constrained components by satisfiability."""
    if K < 1:
        raise ValueError("probe depth must be >= 1")
    parts = _component_parts(X)
    for k in range(1, K + 1):
        target = gamma.truncate(k)
        found = False
        for F, atoms in parts:
            labels = F.labels
            if not labels:
                x = F.offset
                if x != gamma and x.truncate(k) == target:
                    found = True
                    break
                continue
            for profile in itertools.product(range(1, k + 1), repeat=len(labels)):
                if _profile_truncation(F, profile, k) != target:
                    continue
                capped = [l for l, v in zip(labels, profile) if v == k]
                pins = {l: v for l, v in zip(labels, profile) if v < k}
                if not atoms:
                    if capped:
                        # the capped family takes infinitely many distinct
                        # values, so certainly one differs from gamma
                        found = True
                        break
                    if F.evaluate(pins) != gamma:
                        found = True
                        break
                else:
                    if not capped:
                        if satisfies(pins, atoms) and F.evaluate(pins) != gamma:
                            found = True
                            break
                    elif _has_nongamma_value(F, atoms, pins, capped, k, gamma):
                        found = True
                        break
            if found:
                break
        if not found:
            return False
    return True


# -- recovery from probe evaluations -------------------------------------------


def recovery_probes(arity: int) -> List[Tuple[int, ...]]:
    """The documented spanning probe set: the all-ones tuple, then one bump
    of each coordinate to 2."""
    base = (1,) * arity
    probes = [base]
    for i in range(arity):
        probes.append(base[:i] + (2,) + base[i + 1 :])
    return probes


def recover(evals: Iterable[Tuple[Sequence[int], GammaElement]]) -> PsiFunction:
    """The unique PsiFunction consistent with evaluations on the spanning
    probe set of ``recovery_probes``; extra evaluations are verified.
    Raises ValueError on inconsistent data."""
    table: Dict[Tuple[int, ...], GammaElement] = {}
    arity = None
    for args, value in evals:
        key = []
        for a in args:
            if isinstance(a, GammaElement):
                idx = psi_point_index(a)
                if idx is None:
                    raise ValueError("probe arguments must be psi points")
                key.append(idx)
            else:
                key.append(int(a))
        key = tuple(key)
        if arity is None:
            arity = len(key)
        elif len(key) != arity:
            raise ValueError("evaluations have mixed arities")
        if key in table and table[key] != value:
            raise ValueError("inconsistent evaluations")
        table[key] = value
    if arity is None:
        raise ValueError("no evaluations given")
    probes = recovery_probes(arity)
    missing = [p for p in probes if p not in table]
    if missing:
        raise ValueError(f"missing required probes: {missing}")
    base_val = table[probes[0]]
    bump = psi_point(2) - psi_point(1)  # = e_1
    coeffs: Dict[int, Fraction] = {}
    for i in range(arity):
        diff = table[probes[i + 1]] - base_val
        q = diff.coord(1)
        if diff != bump * q:
            raise ValueError("inconsistent evaluations")
        if q:
            coeffs[i] = q
    offset = base_val - psi_point(1) * sum(coeffs.values())
    F = PsiFunction(coeffs, offset)
    for key, value in table.items():
        got = F.offset
        for i, n in enumerate(key):
            if i in coeffs:
                got = got + psi_point(n) * coeffs[i]
        if got != value:
            raise ValueError("inconsistent evaluations")
    return F


# -- equilateral sets ----------------------------------------------------------


def equilateral_max_clique(sample: Sequence[GammaElement], phi: GammaElement) -> List[GammaElement]:
    """A maximum subset whose pairwise psi-differences all equal phi
    (exhaustive branch-and-bound clique search; intended for samples of a
    couple dozen points)."""
    if phi is INF or psi_point_index(phi) is None:
        raise ValueError("phi must be a finite psi point")
    points = list(sample)
    n = len(points)
    if len(set(points)) != n:
        raise ValueError("sample must be pairwise distinct")
    if n > 32:
        raise ValueError("exhaustive clique search supports at most 32 points")
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if psi(points[i] - points[j]) == phi:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    best = 0
    best_mask = 0

    def expand(cand: int, cur_mask: int, size: int) -> None:
        nonlocal best, best_mask
        if size + bin(cand).count("1") <= best:
            return
        if not cand:
            if size > best:
                best, best_mask = size, cur_mask
            return
        while cand:
            if size + bin(cand).count("1") <= best:
                return
            v = (cand & -cand).bit_length() - 1
            cand ^= 1 << v
            expand(cand & adj[v], cur_mask | (1 << v), size + 1)

    expand((1 << n) - 1, 0, 0)
    return [points[i] for i in range(n) if best_mask >> i & 1]


# -- sampling and semantic comparison -------------------------------------------


def sample_points(X, count: int, max_rounds: int = 24) -> List[GammaElement]:
    """A deterministic sample of distinct points of X, enumerated by
    increasing index budget."""
    parts = _component_parts(X)
    seen = set()
    out: List[GammaElement] = []
    for t in range(1, max_rounds + 1):
        for F, atoms in parts:
            labels = F.labels
            if not labels:
                candidates: Iterable[Tuple[int, ...]] = [()]
            else:
                candidates = (
                    c
                    for c in itertools.product(range(1, t + 1), repeat=len(labels))
                    if t == 1 or max(c) == t
                )
            for combo in candidates:
                assignment = dict(zip(labels, combo))
                if atoms and not satisfies(assignment, atoms):
                    continue
                v = F.evaluate(assignment)
                if v not in seen:
                    seen.add(v)
                    out.append(v)
                    if len(out) >= count:
                        return out
    return out


def semantically_equal(X, Y, samples: int = 24) -> bool:
    """Set equality decided by mutual membership on canonical samples plus
    d-rank agreement (presentations of the same image may differ)."""
    if d_rank(X) != d_rank(Y):
        return False
    for p in sample_points(X, samples):
        if not contains(Y, p):
            return False
    for p in sample_points(Y, samples):
        if not contains(X, p):
            return False
    return True


# -- products of closures --------------------------------------------------------


def product_derived_step(pairs):
    """One derived-set step of a union of products of closed factors:
    (A x C)' = A' x C  union  A x C'."""
    out = []
    for A, C in pairs:
        A1, C1 = derived_set(A), derived_set(C)
        if A1 and C:
            out.append((A1, list(C)))
        if A and C1:
            out.append((list(A), C1))
    return out


def product_derived_direct(A, C, k: int):
    """The k-th derived set of A x C assembled factorwise: the union of
    A^(m) x C^(n) over m + n = k."""
    iterates_A = [list(_plain_components(A))]
    iterates_C = [list(_plain_components(C))]
    for _ in range(k):
        iterates_A.append(derived_set(iterates_A[-1]))
        iterates_C.append(derived_set(iterates_C[-1]))
    out = []
    for m in range(k + 1):
        Am, Cn = iterates_A[m], iterates_C[k - m]
        if Am and Cn:
            out.append((Am, Cn))
    return out


def product_contains(pairs, x: GammaElement, y: GammaElement) -> bool:
    return any(contains(A, x) and contains(C, y) for A, C in pairs)


# -- parsing and JSON --------------------------------------------------------------

_TERM_RE = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?:(?P<coeff>\d+(?:\s*/\s*\d+)?)\s*\*?\s*)?"
    r"(?:x(?P<var>\d+)|(?P<elem>\[[^\]]*\]))\s*"
)


def parse_linear(text: str):
    """Parse a linear expression like 'x0 - x1 + 2x2 + [1, 1/2]' into a
    PsiFunction (repeated variables accumulate; element literals sum into
    the offset)."""
    pos = 0
    coeffs: Dict[int, Fraction] = {}
    offset = ZERO
    first = True
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad linear expression at position {pos}: {text!r}")
        sign = m.group("sign")
        if sign is None and not first:
            raise ValueError(f"missing +/- at position {pos}: {text!r}")
        s = -1 if sign == "-" else 1
        q = parse_rational(m.group("coeff")) if m.group("coeff") else Fraction(1)
        q *= s
        if m.group("var") is not None:
            label = int(m.group("var"))
            coeffs[label] = coeffs.get(label, Fraction(0)) + q
        else:
            e = parse_element(m.group("elem"))
            offset = offset + e * q
        pos = m.end()
        first = False
    coeffs = {l: q for l, q in coeffs.items() if q}
    return PsiFunction(coeffs, offset)


def fig2_set() -> ConstrainedImage:
    """The worked example: (s x - x) + (s y - y) over x < y in the psi set,
    presented as x0 - x1 + x2 - x3 with x0 = s x1, x2 = s x3, x1 < x3."""
    F = PsiFunction({0: 1, 1: -1, 2: 1, 3: -1})
    atoms = (
        Atom("diff_eq", i=0, j=1, c=1),
        Atom("diff_eq", i=2, j=3, c=1),
        Atom("diff_le", i=1, j=3, c=-1),
    )
    return ConstrainedImage(F, atoms)


def psifunction_to_json(F: PsiFunction) -> dict:
    return {
        "vars": [f"x{l}" for l in F.labels],
        "coeffs": {f"x{l}": format_rational(q) for l, q in F._coeffs},
        "offset": format_element(F.offset),
    }


def psifunction_from_json(obj: Mapping) -> PsiFunction:
    coeffs = {}
    for name, q in obj.get("coeffs", {}).items():
        if not re.fullmatch(r"x\d+", name):
            raise ValueError(f"variable names must look like x0, x1, ...: {name!r}")
        coeffs[int(name[1:])] = parse_rational(str(q))
    offset = parse_element(obj.get("offset", "[]"))
    if offset is INF:
        raise ValueError("offset must be a group element")
    return PsiFunction(coeffs, offset)


def component_to_json(comp: Component) -> dict:
    if isinstance(comp, PsiFunction):
        return psifunction_to_json(comp)
    d = psifunction_to_json(comp.base)
    d["constraints"] = [a.to_json() for a in comp.constraints]
    return d


def component_from_json(obj: Mapping) -> Component:
    F = psifunction_from_json(obj)
    if "constraints" in obj:
        return ConstrainedImage(F, tuple(Atom.from_json(a) for a in obj["constraints"]))
    return F


def imageunion_to_json(X) -> list:
    return [component_to_json(c) for c in (X if isinstance(X, (list, tuple)) else [X])]


def imageunion_from_json(data) -> List[Component]:
    if isinstance(data, Mapping):
        return [component_from_json(data)]
    return [component_from_json(obj) for obj in data]
