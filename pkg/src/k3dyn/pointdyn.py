"""Rational point dynamics on Wehler surfaces.

Points have coprime integer coordinates.  Each involution swaps the two
roots of a fiber quadratic (Vieta), so orbits stay exact; heights are
read off the coordinate sizes and turned into canonical-height estimates
``alpha^-k h_E(phi^k P)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .dynsys import PolarizedSystem, find_polarizations
from .errors import (
    CertificateFailure,
    DegenerateFiber,
    K3DynError,
    LatticeMismatch,
    NotARoot,
    PointNotOnSurface,
    WordMismatch,
)
from .exactnum import QuadExt
from .piclattice import DivisorClass
from .surfaces import (
    Wehler22Surface,
    Wehler222Surface,
    fiber_line_conic,
    model_for,
    normalize_word,
)

DEFAULT_BIT_BUDGET = 2**20


class BudgetExceeded(K3DynError):
    pass


def normalize_coords(coords: Sequence) -> tuple[int, ...]:
    """Coprime integers, last nonzero coordinate positive."""
    fr = [Fraction(c) for c in coords]
    if not any(fr):
        raise ValueError("the zero vector is not a projective point")
    den = reduce(math.lcm, (f.denominator for f in fr), 1)
    ints = [int(f * den) for f in fr]
    g = reduce(math.gcd, ints, 0)
    ints = [v // g for v in ints]
    last = next(v for v in reversed(ints) if v)
    if last < 0:
        ints = [-v for v in ints]
    return tuple(ints)


class ProjectivePoint:
    __slots__ = ("_c",)
    dim = 0

    def __init__(self, *coords):
        if len(coords) == 1 and not isinstance(coords[0], (int, Fraction)):
            coords = tuple(coords[0])
        if len(coords) != self.dim + 1:
            raise ValueError(f"{type(self).__name__} needs {self.dim + 1} coordinates")
        object.__setattr__(self, "_c", normalize_coords(coords))

    def __setattr__(self, name, value):
        raise AttributeError("points are immutable")

    @property
    def coords(self) -> tuple[int, ...]:
        return self._c

    def __iter__(self):
        return iter(self._c)

    def __getitem__(self, i):
        return self._c[i]

    def __len__(self):
        return len(self._c)

    def __eq__(self, other):
        return type(other) is type(self) and other._c == self._c

    def __hash__(self):
        return hash((type(self).__name__, self._c))

    def __repr__(self):
        return f"{type(self).__name__}{self._c}"

    def __str__(self):
        return ":".join(str(c) for c in self._c)

    def bits(self) -> int:
        return max(abs(c).bit_length() for c in self._c)


class P1Point(ProjectivePoint):
    __slots__ = ()
    dim = 1

    @property
    def c0(self):
        return self._c[0]

    @property
    def c1(self):
        return self._c[1]


class P2Point(ProjectivePoint):
    __slots__ = ()
    dim = 2

    @property
    def c0(self):
        return self._c[0]

    @property
    def c1(self):
        return self._c[1]

    @property
    def c2(self):
        return self._c[2]


@dataclass(frozen=True)
class SurfacePoint:
    surface: Wehler222Surface | Wehler22Surface = field(repr=False)
    coords: tuple

    def __post_init__(self):
        kind = P1Point if isinstance(self.surface, Wehler222Surface) else P2Point
        pts = tuple(p if isinstance(p, kind) else kind(p) for p in self.coords)
        if len(pts) != self.surface.arity:
            raise ValueError(f"expected {self.surface.arity} factor points")
        object.__setattr__(self, "coords", pts)
        if not self.surface.contains(pts):
            raise PointNotOnSurface(f"{self} does not satisfy the defining equations")

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __str__(self):
        sep = "," if isinstance(self.surface, Wehler222Surface) else ";"
        return sep.join(str(p) for p in self.coords)

    def bits(self) -> int:
        return max(p.bits() for p in self.coords)


def parse_point(surface, text: str) -> SurfacePoint:
    """``x0:x1,y0:y1,z0:z1`` for (2,2,2) surfaces, ``x0:x1:x2;y0:y1:y2`` otherwise."""
    sep = "," if isinstance(surface, Wehler222Surface) else ";"
    parts = [p.strip() for p in text.strip().split(sep)]
    try:
        coords = [tuple(int(c) for c in p.split(":")) for p in parts]
    except ValueError as exc:
        raise ValueError(f"cannot parse point {text!r}: {exc}") from None
    return SurfacePoint(surface, tuple(coords))


# -- Vieta involutions ---------------------------------------------------------


def _as_int_if_integral(v):
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else v


def _on_surface(surface, p: SurfacePoint) -> bool:
    # SurfacePoint validates on construction; only foreign points need a check
    return p.surface is surface or surface.contains(p.coords)


def vieta_other_root(a, b, c, t) -> P1Point:
    """Second root of ``a t0^2 + b t0 t1 + c t1^2`` given the root ``t``."""
    a, b, c = (_as_int_if_integral(v) for v in (a, b, c))
    t = t if isinstance(t, P1Point) else P1Point(t)
    t0, t1 = t
    if not (a or b or c):
        raise DegenerateFiber("the fiber quadratic vanishes identically")
    if a * t0 * t0 + b * t0 * t1 + c * t1 * t1 != 0:
        raise NotARoot(f"{t} is not a root of ({a}, {b}, {c})")
    if a:
        if t0:
            return P1Point(c * t1, a * t0)
        return P1Point(-b * t1 - a * t0, a * t1)
    # a == 0: roots are (1:0) and (-c:b)
    inf = P1Point(1, 0)
    if not b:
        return inf
    finite = P1Point(-c, b)
    return finite if t == inf else inf


def involution_222(surface: Wehler222Surface, i: int, p: SurfacePoint) -> SurfacePoint:
    """Swap the ``i``-th coordinate for the other root of its fiber quadratic."""
    if not _on_surface(surface, p):
        raise PointNotOnSurface(f"{p} is not on the surface")
    if i not in (1, 2, 3):
        raise ValueError("involution index must be 1, 2 or 3")
    others = [p.coords[l] for l in range(3) if l != i - 1]
    # the common denominator does not change the roots
    a, b, c = surface.fiber_scaled(i, *others)
    if not (a or b or c):
        raise DegenerateFiber(f"fiber of axis {i} through {p} is not finite")
    new = list(p.coords)
    new[i - 1] = vieta_other_root(a, b, c, p.coords[i - 1])
    try:
        return SurfacePoint(surface, tuple(new))
    except PointNotOnSurface as exc:
        raise CertificateFailure(f"involution left the surface: {exc}") from None


def _line_basis(line) -> tuple[tuple[int, ...], tuple[int, ...]]:
    den = reduce(math.lcm, (Fraction(v).denominator for v in line), 1)
    l1, l2, l3 = (int(Fraction(v) * den) for v in line)
    cands = [(0, l3, -l2), (-l3, 0, l1), (l2, -l1, 0)]
    cands = [c for c in cands if any(c)]
    u = cands[0]
    for v in cands[1:]:
        cross = (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
        if any(cross):
            return u, v
    raise AssertionError("a nonzero line always has a 2-dimensional kernel")


def _quad(m, u, v) -> Fraction:
    return sum((m[r][s] * u[r] * v[s] for r in range(3) for s in range(3)), Fraction(0))


def involution_22(surface: Wehler22Surface, side: str, p: SurfacePoint) -> SurfacePoint:
    """Fix the ``side`` factor and swap the moving factor within its fiber."""
    if not _on_surface(surface, p):
        raise PointNotOnSurface(f"{p} is not on the surface")
    if side not in ("x", "y"):
        raise ValueError("side must be 'x' or 'y'")
    fixed_idx = 0 if side == "x" else 1
    moving = p.coords[1 - fixed_idx]
    line, conic = fiber_line_conic(surface, side, p.coords[fixed_idx])
    if not any(line):
        raise DegenerateFiber(f"the linear form vanishes on the fiber over {side}={p.coords[fixed_idx]}")
    u, v = _line_basis(line)
    # coordinates of the moving point along the parametrized line
    for r1 in range(3):
        for r2 in range(r1 + 1, 3):
            det = u[r1] * v[r2] - u[r2] * v[r1]
            if det:
                break
        else:
            continue
        break
    m = moving.coords
    s = Fraction(m[r1] * v[r2] - m[r2] * v[r1], det)
    t = Fraction(u[r1] * m[r2] - u[r2] * m[r1], det)
    if any(s * u[k] + t * v[k] != m[k] for k in range(3)):
        raise PointNotOnSurface(f"{p} is not on the fiber line")
    qa, qb, qc = _quad(conic, u, u), 2 * _quad(conic, u, v), _quad(conic, v, v)
    if not (qa or qb or qc):
        raise DegenerateFiber(f"the fiber line over {side}={p.coords[fixed_idx]} lies in the conic")
    s2, t2 = vieta_other_root(qa, qb, qc, P1Point(s, t))
    image = P2Point(*(s2 * u[k] + t2 * v[k] for k in range(3)))
    new = list(p.coords)
    new[1 - fixed_idx] = image
    try:
        return SurfacePoint(surface, tuple(new))
    except PointNotOnSurface as exc:
        raise CertificateFailure(f"involution left the surface: {exc}") from None


def apply_involution(surface, key, p: SurfacePoint) -> SurfacePoint:
    if isinstance(surface, Wehler222Surface):
        return involution_222(surface, int(key), p)
    return involution_22(surface, str(key), p)


def apply_word(surface, word: Sequence, p: SurfacePoint) -> SurfacePoint:
    """Apply ``w1 ∘ ... ∘ wk``: the rightmost involution acts first."""
    for key in reversed(list(word)):
        p = apply_involution(surface, key, p)
    return p


# -- heights -------------------------------------------------------------------

_LN2 = math.log(2.0)


def _log_abs(n: int) -> float:
    n = abs(n)
    k = n.bit_length() - 64
    if k > 0:
        return math.log(n >> k) + k * _LN2
    return math.log(n)


def weil_height(p: ProjectivePoint) -> float:
    """Natural-log Weil height of a normalized point."""
    return _log_abs(max(abs(c) for c in p))


def divisor_height(e: DivisorClass, p: SurfacePoint) -> float:
    if e.lattice.rank != len(p.coords):
        raise LatticeMismatch(f"class of rank {e.lattice.rank} on a point with {len(p.coords)} projections")
    return sum(float(c) * weil_height(q) for c, q in zip(e.coords, p.coords) if c)


@dataclass
class OrbitRecord:
    points: list[SurfacePoint]
    word: list
    heights: list[list[float]]
    bit_sizes: list[int]
    truncated: bool = False
    error: str | None = None

    def total_heights(self) -> list[float]:
        return [sum(h) for h in self.heights]

    def to_json(self) -> dict:
        return {
            "steps": [
                {"point": str(p), "heights": list(h), "bits": b}
                for p, h, b in zip(self.points, self.heights, self.bit_sizes)
            ],
            "word": [w if isinstance(w, int) else str(w) for w in self.word],
            "truncated": self.truncated,
            "error": self.error,
        }


def _record(rec: OrbitRecord, p: SurfacePoint):
    rec.points.append(p)
    rec.heights.append([weil_height(q) for q in p.coords])
    rec.bit_sizes.append(p.bits())


def orbit(surface, word: Sequence, p: SurfacePoint, steps: int, bit_budget: int = DEFAULT_BIT_BUDGET) -> OrbitRecord:
    """Iterate the word ``steps`` times; degeneracy or budget overrun truncates."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    model = model_for(surface)
    word = normalize_word(model, word)
    if not word:
        raise ValueError("empty involution word")
    if not _on_surface(surface, p):
        raise PointNotOnSurface(f"{p} is not on the surface")
    rec = OrbitRecord([], list(word), [], [])
    _record(rec, p)
    for _ in range(steps):
        try:
            for key in reversed(word):
                p = apply_involution(surface, key, p)
                if p.bits() > bit_budget:
                    raise BudgetExceeded(f"coordinate size {p.bits()} bits exceeds the budget of {bit_budget}")
        except DegenerateFiber as exc:
            rec.truncated, rec.error = True, f"DegenerateFiber: {exc}"
            break
        except BudgetExceeded as exc:
            rec.truncated, rec.error = True, f"BudgetExceeded: {exc}"
            break
        _record(rec, p)
    return rec


@dataclass
class HeightEstimate:
    value: float
    per_step_estimates: list[float]
    steps: int
    alpha: QuadExt

    def differences(self) -> list[float]:
        e = self.per_step_estimates
        return [b - a for a, b in zip(e, e[1:])]


def canonical_height(
    surface,
    sys: PolarizedSystem,
    word: Sequence,
    p: SurfacePoint,
    steps: int,
    bit_budget: int = DEFAULT_BIT_BUDGET,
) -> HeightEstimate:
    """Estimates ``alpha^-k h_E(phi^k P)`` for ``k = 0..steps``."""
    if steps < 1:
        raise ValueError("at least one step is required")
    model = model_for(surface)
    if model.pullback_of_word(word).matrix != sys.pullback.matrix:
        raise WordMismatch(f"the pullback of word {list(word)} is not the system's map")
    rec = orbit(surface, word, p, steps, bit_budget)
    if rec.truncated:
        if rec.error and rec.error.startswith("DegenerateFiber"):
            raise DegenerateFiber(rec.error)
        raise BudgetExceeded(rec.error or "orbit truncated")
    a = float(sys.alpha)
    est = [divisor_height(sys.polarizing_class, q) / a**k for k, q in enumerate(rec.points)]
    return HeightEstimate(est[-1], est, steps, sys.alpha)


def word_polarization(surface, word: Sequence) -> PolarizedSystem:
    """The expanding polarization of the word's pullback (largest eigenvalue)."""
    model = model_for(surface)
    m = model.pullback_of_word(word)
    return find_polarizations(m, model.lattice)[0]


@dataclass
class TwoSidedHeights:
    forward: HeightEstimate
    backward: HeightEstimate
    forward_next: HeightEstimate
    backward_next: HeightEstimate

    def scaling(self) -> tuple[float, float]:
        """Observed ``h+(phi P)/h+(P)`` and ``h-(phi P)/h-(P)``."""
        return (
            self.forward_next.value / self.forward.value,
            self.backward_next.value / self.backward.value,
        )


def two_sided_heights(surface, word: Sequence, p: SurfacePoint, steps: int, bit_budget: int = DEFAULT_BIT_BUDGET):
    """Heights for ``phi`` (class E) and ``phi^-1`` (class E') at ``P`` and ``phi P``."""
    model = model_for(surface)
    word = normalize_word(model, word)
    rev = list(reversed(word))
    fwd_sys = word_polarization(surface, word)
    bwd_sys = word_polarization(surface, rev)
    q = apply_word(surface, word, p)
    return TwoSidedHeights(
        canonical_height(surface, fwd_sys, word, p, steps, bit_budget),
        canonical_height(surface, bwd_sys, rev, p, steps, bit_budget),
        canonical_height(surface, fwd_sys, word, q, steps, bit_budget),
        canonical_height(surface, bwd_sys, rev, q, steps, bit_budget),
    )
