"""Picard lattices: divisor classes, the intersection pairing and pullbacks.

A lattice is a free module with an integral symmetric Gram matrix.
Divisor classes carry coordinates in one real quadratic field per
lattice (``field_disc``).  A pullback map is an integer matrix whose
column ``j`` holds the image of basis class ``j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import linalg
from .errors import DegenerateGenerators, LatticeMismatch, NotSquarefree
from .exactnum import QuadExt, is_squarefree, qe_sign


@dataclass(frozen=True)
class PicLattice:
    rank: int
    basis_labels: tuple[str, ...]
    gram: tuple[tuple[int, ...], ...]
    ample_basis: tuple[int, ...]
    canonical_class: tuple[int, ...]
    field_disc: int = 1
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gram", tuple(tuple(int(v) for v in row) for row in self.gram))
        object.__setattr__(self, "basis_labels", tuple(self.basis_labels))
        object.__setattr__(self, "ample_basis", tuple(self.ample_basis))
        object.__setattr__(self, "canonical_class", tuple(int(v) for v in self.canonical_class))
        r = self.rank
        if r < 1:
            raise ValueError("rank must be positive")
        if len(self.gram) != r or any(len(row) != r for row in self.gram):
            raise ValueError(f"gram must be {r}x{r}")
        for i in range(r):
            for j in range(i):
                if self.gram[i][j] != self.gram[j][i]:
                    raise ValueError("gram matrix is not symmetric")
        if len(self.basis_labels) != r:
            raise ValueError("one label per basis class is required")
        if len(self.canonical_class) != r:
            raise ValueError("canonical class has the wrong length")
        if any(not 0 <= i < r for i in self.ample_basis):
            raise ValueError("ample basis index out of range")
        if self.field_disc != 1 and not is_squarefree(self.field_disc):
            raise NotSquarefree(f"field discriminant {self.field_disc} is not squarefree")

    def divisor(self, coords) -> DivisorClass:
        return DivisorClass(tuple(QuadExt.coerce(c) for c in coords), self)

    def basis_class(self, i: int) -> DivisorClass:
        return self.divisor([1 if j == i else 0 for j in range(self.rank)])

    def zero(self) -> DivisorClass:
        return self.divisor([0] * self.rank)

    def ample_sum(self) -> DivisorClass:
        return self.divisor([1 if j in self.ample_basis else 0 for j in range(self.rank)])

    def canonical(self) -> DivisorClass:
        return self.divisor(self.canonical_class)

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "labels": list(self.basis_labels),
            "gram": [list(row) for row in self.gram],
            "ample_basis": list(self.ample_basis),
            "canonical_class": list(self.canonical_class),
            "d": self.field_disc,
        }

    @classmethod
    def from_json(cls, obj: dict, name: str = "") -> PicLattice:
        rank = int(obj["rank"])
        return cls(
            rank=rank,
            basis_labels=tuple(obj.get("labels") or [f"D{i + 1}" for i in range(rank)]),
            gram=obj["gram"],
            ample_basis=tuple(int(i) for i in obj.get("ample_basis", [])),
            canonical_class=tuple(obj.get("canonical_class") or [0] * rank),
            field_disc=int(obj.get("d", 1)),
            name=name,
        )


def load_lattice(path: str | Path) -> PicLattice:
    with open(path, encoding="utf-8") as fh:
        return PicLattice.from_json(json.load(fh), name=str(path))


@dataclass(frozen=True)
class DivisorClass:
    coords: tuple[QuadExt, ...]
    lattice: PicLattice

    def __post_init__(self):
        if len(self.coords) != self.lattice.rank:
            raise LatticeMismatch(f"{len(self.coords)} coordinates for a rank {self.lattice.rank} lattice")
        d = self.lattice.field_disc
        for c in self.coords:
            if not c.is_rational and c.d != d:
                raise LatticeMismatch(f"coefficient {c} is outside Q(sqrt {d})")

    def _check(self, other: DivisorClass):
        if other.lattice is not self.lattice and other.lattice != self.lattice:
            raise LatticeMismatch("divisor classes live on different lattices")

    def __add__(self, other: DivisorClass) -> DivisorClass:
        self._check(other)
        return DivisorClass(tuple(a + b for a, b in zip(self.coords, other.coords)), self.lattice)

    def __sub__(self, other: DivisorClass) -> DivisorClass:
        self._check(other)
        return DivisorClass(tuple(a - b for a, b in zip(self.coords, other.coords)), self.lattice)

    def __neg__(self) -> DivisorClass:
        return DivisorClass(tuple(-a for a in self.coords), self.lattice)

    def __mul__(self, scalar) -> DivisorClass:
        s = QuadExt.coerce(scalar)
        return DivisorClass(tuple(s * a for a in self.coords), self.lattice)

    __rmul__ = __mul__

    def __bool__(self):
        return any(self.coords)

    def is_proportional(self, other: DivisorClass, positive: bool = False) -> bool:
        """True if ``other = c*self`` for some nonzero (positive) scalar ``c``."""
        self._check(other)
        pivot = next((i for i, c in enumerate(self.coords) if c), None)
        if pivot is None or not other.coords[pivot]:
            return False
        c = other.coords[pivot] / self.coords[pivot]
        if positive and qe_sign(c) <= 0:
            return False
        return all(c * a == b for a, b in zip(self.coords, other.coords))

    def __str__(self):
        return "[" + ", ".join(str(c) for c in self.coords) + "]"


def intersect(d1: DivisorClass, d2: DivisorClass) -> QuadExt:
    """Intersection number ``d1^T * gram * d2``."""
    d1._check(d2)
    g = d1.lattice.gram
    total = QuadExt(0)
    for i, a in enumerate(d1.coords):
        if not a:
            continue
        row = sum((g[i][j] * b for j, b in enumerate(d2.coords) if g[i][j]), QuadExt(0))
        total = total + a * row
    return total


@dataclass(frozen=True)
class PullbackMap:
    matrix: tuple[tuple[int, ...], ...]
    declared_degree: int = 1
    label: str = ""

    def __post_init__(self):
        m = tuple(tuple(int(v) for v in row) for row in self.matrix)
        object.__setattr__(self, "matrix", m)
        if any(len(row) != len(m) for row in m):
            raise ValueError("pullback matrix must be square")
        if self.declared_degree < 1:
            raise ValueError("map degree must be positive")
        if self.declared_degree == 1 and self.determinant() == 0:
            raise ValueError("an automorphism pullback must be invertible")

    @property
    def size(self) -> int:
        return len(self.matrix)

    def trace(self) -> int:
        return sum(self.matrix[i][i] for i in range(self.size))

    def determinant(self) -> int:
        m = [list(row) for row in self.matrix]
        n = len(m)
        if n == 1:
            return m[0][0]
        if n == 2:
            return m[0][0] * m[1][1] - m[0][1] * m[1][0]
        # Bareiss fraction-free elimination
        sign, prev = 1, 1
        for k in range(n - 1):
            if m[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if m[i][k]), None)
                if swap is None:
                    return 0
                m[k], m[swap] = m[swap], m[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            prev = m[k][k]
        return sign * m[n - 1][n - 1]

    def __matmul__(self, other: PullbackMap) -> PullbackMap:
        """Matrix product; as maps, ``other`` acts first."""
        prod = linalg.mat_mul(self.matrix, other.matrix)
        return PullbackMap(
            prod,
            self.declared_degree * other.declared_degree,
            f"{self.label}∘{other.label}" if self.label and other.label else "",
        )

    def power(self, n: int) -> PullbackMap:
        if n < 0:
            raise ValueError("only non-negative powers of integer matrices are supported")
        result = PullbackMap(linalg.identity(self.size), 1, "id")
        base, k = self, n
        while k:
            if k & 1:
                result = base @ result
            base = base @ base
            k >>= 1
        return PullbackMap(result.matrix, result.declared_degree, f"({self.label})^{n}" if self.label else "")

    def to_json(self) -> dict:
        return {"matrix": [list(r) for r in self.matrix], "degree": self.declared_degree, "label": self.label}

    @classmethod
    def from_json(cls, obj) -> PullbackMap:
        if isinstance(obj, list):
            return cls(obj)
        return cls(obj["matrix"], int(obj.get("degree", 1)), obj.get("label", ""))


def identity_map(n: int) -> PullbackMap:
    return PullbackMap(linalg.identity(n), 1, "id")


def pullback_apply(m: PullbackMap, d: DivisorClass) -> DivisorClass:
    if m.size != d.lattice.rank:
        raise LatticeMismatch(f"{m.size}x{m.size} map on a rank {d.lattice.rank} lattice")
    return DivisorClass(tuple(linalg.mat_vec(m.matrix, d.coords)), d.lattice)


def isometry_defect(m: PullbackMap, lattice: PicLattice):
    """``M^T G M - deg*G`` as a list of rows (all zero for a scaled isometry)."""
    if m.size != lattice.rank:
        raise LatticeMismatch("map and lattice sizes differ")
    g = [list(r) for r in lattice.gram]
    mtgm = linalg.mat_mul(linalg.mat_mul(linalg.transpose(m.matrix), g), m.matrix)
    k = m.declared_degree
    return [[mtgm[i][j] - k * g[i][j] for j in range(lattice.rank)] for i in range(lattice.rank)]


def validate_scaled_isometry(m: PullbackMap, lattice: PicLattice) -> bool:
    if m.size != lattice.rank:
        return False
    return all(v == 0 for row in isometry_defect(m, lattice) for v in row)


def positive_span_certificate(d: DivisorClass, generators: Sequence[DivisorClass]) -> list[QuadExt] | None:
    """Coefficients ``a_i > 0`` with ``d = sum a_i * gen_i``, or None.

    The generators must be linearly independent.
    """
    if not generators:
        raise DegenerateGenerators("no generators given")
    for g in generators:
        d._check(g)
    cols = [g.coords for g in generators]
    a = [[cols[j][i] for j in range(len(cols))] for i in range(d.lattice.rank)]
    if linalg.rank(a) < len(generators):
        raise DegenerateGenerators("generators are linearly dependent")
    coeffs = linalg.solve(a, list(d.coords))
    if coeffs is None or any(qe_sign(c) <= 0 for c in coeffs):
        return None
    return coeffs


def is_effective_sample(d: DivisorClass) -> bool:
    """Sampling convention: a nonzero, non-negative combination of basis classes."""
    return bool(d) and all(qe_sign(c) >= 0 for c in d.coords)
