"""The two Wehler K3 families: defining forms and lattice models.

``S_ab`` is a (1,1)-form and a (2,2)-form in P^2 x P^2; its two double
covers of P^2 give involutions ``x`` (fixes the x-point) and ``y``.
``S_c`` is a (2,2,2)-form in P^1 x P^1 x P^1 with involutions 1, 2, 3.

Word convention: a word ``(w1, ..., wk)`` denotes the point map
``w1 ∘ ... ∘ wk`` (rightmost acts first) and its pullback is the matrix
product ``M_wk ... M_w1``.  Thus the word ``(1, 3, 2)`` has pullback
``σ2* σ3* σ1*``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence

from .errors import DegenerateFiber
from .exactnum import QuadExt, as_rational, format_rational
from .piclattice import DivisorClass, PicLattice, PullbackMap, identity_map, validate_scaled_isometry

# -- lattice models ------------------------------------------------------------

BETA_AB = QuadExt(2, 1, 3)  # 2 + sqrt 3
BETA_C = QuadExt(Fraction(3, 2), Fraction(1, 2), 5)  # (3 + sqrt 5)/2
A_C = QuadExt(Fraction(-3, 2), Fraction(1, 2), 5)
B_C = QuadExt(Fraction(-1, 2), Fraction(1, 2), 5)


@dataclass(frozen=True)
class PolarizationPair:
    """A map and its inverse, each polarized with the same expansion factor."""

    name: str
    forward_word: tuple
    forward_class: str
    backward_word: tuple
    backward_class: str
    alpha: QuadExt


@dataclass(frozen=True)
class LatticeModel:
    name: str
    lattice: PicLattice
    involutions: dict
    composites: dict
    classes: dict = field(default_factory=dict)
    pairs: tuple[PolarizationPair, ...] = ()
    minus_one_vectors: dict = field(default_factory=dict)

    def pullback_of_word(self, word: Sequence) -> PullbackMap:
        word = tuple(normalize_word(self, word))
        if not word:
            raise ValueError("empty involution word")
        if word in self.composites:
            return self.composites[word]
        m = identity_map(self.lattice.rank)
        for w in word:
            m = self.involutions[w] @ m
        return PullbackMap(m.matrix, 1, word_label(word))

    def named_class(self, name: str) -> DivisorClass:
        return self.classes[name]


def normalize_word(model: LatticeModel, word: Sequence) -> list:
    out = []
    for w in word:
        key = w
        if isinstance(w, str) and w.strip().isdigit():
            key = int(w)
        elif isinstance(w, str):
            key = w.strip()
        if key not in model.involutions:
            raise ValueError(f"unknown involution {w!r} for {model.name}; expected one of {sorted(map(str, model.involutions))}")
        out.append(key)
    return out


def word_label(word: Sequence) -> str:
    return "σ_{" + ",".join(str(w) for w in word) + "}"


@lru_cache(maxsize=None)
def lattice_model_s_ab() -> LatticeModel:
    lat = PicLattice(
        rank=2,
        basis_labels=("Dx", "Dy"),
        gram=((2, 4), (4, 2)),
        ample_basis=(0, 1),
        canonical_class=(0, 0),
        field_disc=3,
        name="s_ab",
    )
    sx = PullbackMap(((1, 4), (0, -1)), 1, "σx*")
    sy = PullbackMap(((-1, 0), (4, 1)), 1, "σy*")
    plus = PullbackMap((sx @ sy).matrix, 1, "φ⁺*")
    minus = PullbackMap((sy @ sx).matrix, 1, "φ⁻*")
    classes = {
        "E⁺": lat.divisor([BETA_AB, -1]),
        "E⁻": lat.divisor([-1, BETA_AB]),
    }
    pairs = (PolarizationPair("φ", ("y", "x"), "E⁺", ("x", "y"), "E⁻", BETA_AB**2),)
    return LatticeModel(
        "s_ab",
        lat,
        {"x": sx, "y": sy},
        {("y", "x"): plus, ("x", "y"): minus},
        classes,
        pairs,
    )


def _sc_involution(i: int) -> PullbackMap:
    cols = []
    for j in range(3):
        col = [0, 0, 0]
        if j == i:
            col = [2, 2, 2]
            col[i] = -1
        else:
            col[j] = 1
        cols.append(col)
    rows = tuple(tuple(cols[j][r] for j in range(3)) for r in range(3))
    return PullbackMap(rows, 1, f"σ{i + 1}*")


SC_TABLE = {
    # word: (beta^3 class, beta^-3 class, -1 eigenvector)
    (3, 2, 1): ("E₃", "E₄", (1, -3, 1)),
    (1, 3, 2): ("E₁", "E₂", (1, 1, -3)),
    (2, 1, 3): ("E₅", "E₆", (-3, 1, 1)),
    (3, 1, 2): ("E₆", "E₅", (-3, 1, 1)),
    (2, 3, 1): ("E₂", "E₁", (1, 1, -3)),
    (1, 2, 3): ("E₄", "E₃", (1, -3, 1)),
}


@lru_cache(maxsize=None)
def lattice_model_s_c() -> LatticeModel:
    lat = PicLattice(
        rank=3,
        basis_labels=("D1", "D2", "D3"),
        gram=((0, 2, 2), (2, 0, 2), (2, 2, 0)),
        ample_basis=(0, 1, 2),
        canonical_class=(0, 0, 0),
        field_disc=5,
        name="s_c",
    )
    inv = {i + 1: _sc_involution(i) for i in range(3)}
    a, b = A_C, B_C
    classes = {
        "E₁": lat.divisor([1, a, b]),
        "E₂": lat.divisor([a, 1, b]),
        "E₃": lat.divisor([a, b, 1]),
        "E₄": lat.divisor([1, b, a]),
        "E₅": lat.divisor([b, 1, a]),
        "E₆": lat.divisor([b, a, 1]),
    }
    composites = {}
    for word in SC_TABLE:
        m = identity_map(3)
        for w in word:
            m = inv[w] @ m
        composites[word] = PullbackMap(m.matrix, 1, word_label(word) + "*")
    beta3 = BETA_C**3
    pairs = (
        PolarizationPair("τ₁", (3, 2, 1), "E₃", (1, 2, 3), "E₄", beta3),
        PolarizationPair("τ₂", (1, 3, 2), "E₁", (2, 3, 1), "E₂", beta3),
        PolarizationPair("τ₃", (2, 1, 3), "E₅", (3, 1, 2), "E₆", beta3),
    )
    minus = {w: lat.divisor(v) for w, (_, _, v) in SC_TABLE.items()}
    return LatticeModel("s_c", lat, inv, composites, classes, pairs, minus)


def lattice_model(name: str) -> LatticeModel:
    name = name.removeprefix("builtin:")
    if name == "s_ab":
        return lattice_model_s_ab()
    if name == "s_c":
        return lattice_model_s_c()
    raise ValueError(f"unknown built-in family {name!r}")


def check_model(model: LatticeModel) -> list[str]:
    """Return a list of failed structural checks (empty when consistent)."""
    problems = []
    n = model.lattice.rank
    ident = identity_map(n).matrix
    for key, m in model.involutions.items():
        if (m @ m).matrix != ident:
            problems.append(f"{m.label} is not an involution")
        if not validate_scaled_isometry(m, model.lattice):
            problems.append(f"{m.label} is not an isometry")
    return problems


# -- defining forms ------------------------------------------------------------


def _mono2(pt, i: int) -> int:
    """``pt0^i * pt1^(2-i)`` for a P^1 point."""
    return pt[0] ** i * pt[1] ** (2 - i)


def _scaled(values) -> tuple[int, list[int]]:
    values = list(values)
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return den, [int(v * den) for v in values]


@dataclass(frozen=True)
class Wehler222Surface:
    """Zero locus of ``sum c[e] x0^i1 x1^j1 y0^i2 y1^j2 z0^i3 z1^j3``.

    Keys of ``coeffs`` are exponent tuples ``(i1, j1, i2, j2, i3, j3)``
    with ``i_l + j_l = 2``.
    """

    coeffs: dict
    _tensor: tuple = field(init=False, repr=False, compare=False)
    _den: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        clean = {}
        for key, v in self.coeffs.items():
            key = tuple(int(e) for e in key)
            if len(key) != 6 or any(e < 0 for e in key) or any(key[2 * l] + key[2 * l + 1] != 2 for l in range(3)):
                raise ValueError(f"bad exponent tuple {key}")
            v = as_rational(v)
            if v:
                clean[key] = clean.get(key, Fraction(0)) + v
        clean = {k: v for k, v in clean.items() if v}
        if not clean:
            raise ValueError("all coefficients vanish")
        object.__setattr__(self, "coeffs", clean)
        # integer tensor indexed by the exponent of the first coordinate of each factor
        keys = list(clean)
        den, ints = _scaled(clean[k] for k in keys)
        t = [[[0] * 3 for _ in range(3)] for _ in range(3)]
        for k, v in zip(keys, ints):
            t[k[0]][k[2]][k[4]] = v
        object.__setattr__(self, "_tensor", t)
        object.__setattr__(self, "_den", den)

    @property
    def family(self) -> str:
        return "s_c"

    @property
    def arity(self) -> int:
        return 3

    def _evaluate_scaled(self, x, y, z) -> int:
        mx = [_mono2(x, i) for i in range(3)]
        my = [_mono2(y, i) for i in range(3)]
        mz = [_mono2(z, i) for i in range(3)]
        t = self._tensor
        total = 0
        for i1 in range(3):
            inner = 0
            for i2 in range(3):
                row = t[i1][i2]
                s = row[0] * mz[0] + row[1] * mz[1] + row[2] * mz[2]
                if s:
                    inner += my[i2] * s
            if inner:
                total += mx[i1] * inner
        return total

    def evaluate(self, x, y, z) -> Fraction:
        return Fraction(self._evaluate_scaled(tuple(x), tuple(y), tuple(z)), self._den)

    def contains(self, point) -> bool:
        x, y, z = point
        return self._evaluate_scaled(tuple(x), tuple(y), tuple(z)) == 0

    def fiber_scaled(self, axis: int, p, q) -> tuple[int, int, int]:
        """Fiber quadratic coefficients times the common denominator."""
        mp = [_mono2(tuple(p), i) for i in range(3)]
        mq = [_mono2(tuple(q), i) for i in range(3)]
        t = self._tensor
        out = []
        for i in (2, 1, 0):
            acc = 0
            for a in range(3):
                s = 0
                for b in range(3):
                    if axis == 1:
                        c = t[i][a][b]
                    elif axis == 2:
                        c = t[a][i][b]
                    else:
                        c = t[a][b][i]
                    if c:
                        s += c * mq[b]
                if s:
                    acc += mp[a] * s
            out.append(acc)
        return out[0], out[1], out[2]

    def to_json(self) -> dict:
        return {
            "type": "wehler_222",
            "coefficients": [
                {"exp": list(k), "value": format_rational(v)} for k, v in sorted(self.coeffs.items())
            ],
        }


def fiber_quadratic(surface: Wehler222Surface, axis: int, others) -> tuple[Fraction, Fraction, Fraction]:
    """Coefficients ``(A, B, C)`` of ``A t0^2 + B t0 t1 + C t1^2`` along ``axis``.

    ``others`` are the two fixed P^1 points in increasing axis order.
    """
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    p, q = others
    a, b, c = surface.fiber_scaled(axis, p, q)
    den = surface._den
    return Fraction(a, den), Fraction(b, den), Fraction(c, den)


@dataclass(frozen=True)
class Wehler22Surface:
    """``sum a[i][j] x_i y_j = sum b[i,j,k,l] x_i x_k y_j y_l = 0`` in P^2 x P^2.

    ``a`` is 3x3 (0-based storage of 1-based indices); keys of ``b`` are
    1-based tuples ``(i, j, k, l)`` with ``i <= k`` and ``j <= l``.
    """

    a: tuple
    b: dict
    _a_int: tuple = field(init=False, repr=False, compare=False)
    _b_int: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = tuple(tuple(as_rational(v) for v in row) for row in self.a)
        if len(a) != 3 or any(len(r) != 3 for r in a):
            raise ValueError("the (1,1)-form needs a 3x3 coefficient matrix")
        clean = {}
        for key, v in self.b.items():
            i, j, k, l = (int(e) for e in key)
            if not all(1 <= e <= 3 for e in (i, j, k, l)):
                raise ValueError(f"index out of range in {key}")
            i, k = min(i, k), max(i, k)
            j, l = min(j, l), max(j, l)
            v = as_rational(v)
            if v:
                clean[(i, j, k, l)] = clean.get((i, j, k, l), Fraction(0)) + v
        if not any(v for row in a for v in row) or not clean:
            raise ValueError("both forms need a nonzero coefficient")
        clean = {k: v for k, v in clean.items() if v}
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", clean)
        aden, aints = _scaled(v for row in a for v in row)
        object.__setattr__(self, "_a_int", (aden, [aints[3 * r : 3 * r + 3] for r in range(3)]))
        keys = list(clean)
        bden, bints = _scaled(clean[k] for k in keys)
        # group by the x-monomial (i, k): [((j, l), coefficient), ...]
        grouped = {}
        for key, v in zip(keys, bints):
            grouped.setdefault((key[0], key[2]), []).append(((key[1], key[3]), v))
        object.__setattr__(self, "_b_int", (bden, grouped))

    @property
    def family(self) -> str:
        return "s_ab"

    @property
    def arity(self) -> int:
        return 2

    def _linear_scaled(self, x, y) -> int:
        a = self._a_int[1]
        return sum(x[i] * sum(a[i][j] * y[j] for j in range(3)) for i in range(3))

    def _quadratic_scaled(self, x, y) -> int:
        yy = {}
        total = 0
        for (i, k), terms in self._b_int[1].items():
            s = 0
            for (j, l), c in terms:
                if (j, l) not in yy:
                    yy[(j, l)] = y[j - 1] * y[l - 1]
                s += c * yy[(j, l)]
            if s:
                total += x[i - 1] * x[k - 1] * s
        return total

    def linear_form(self, x, y) -> Fraction:
        return Fraction(self._linear_scaled(tuple(x), tuple(y)), self._a_int[0])

    def quadratic_form(self, x, y) -> Fraction:
        return Fraction(self._quadratic_scaled(tuple(x), tuple(y)), self._b_int[0])

    def contains(self, point) -> bool:
        x, y = (tuple(p) for p in point)
        return self._linear_scaled(x, y) == 0 and self._quadratic_scaled(x, y) == 0

    def to_json(self) -> dict:
        return {
            "type": "wehler_22",
            "a": [[format_rational(v) for v in row] for row in self.a],
            "b": [{"exp": list(k), "value": format_rational(v)} for k, v in sorted(self.b.items())],
        }


def fiber_line_conic(surface: Wehler22Surface, side: str, fixed):
    """Restrict both forms with the ``side`` point fixed.

    Returns ``(line, conic)``: a length-3 coefficient list of the linear
    form and a symmetric 3x3 matrix of the quadratic form in the moving
    P^2 coordinates.
    """
    f = tuple(fixed)
    line = [Fraction(0)] * 3
    conic = [[Fraction(0)] * 3 for _ in range(3)]
    if side == "x":
        for i in range(3):
            for j in range(3):
                line[j] += surface.a[i][j] * f[i]
        for (i, j, k, l), c in surface.b.items():
            _add_sym(conic, j - 1, l - 1, c * f[i - 1] * f[k - 1])
    elif side == "y":
        for i in range(3):
            for j in range(3):
                line[i] += surface.a[i][j] * f[j]
        for (i, j, k, l), c in surface.b.items():
            _add_sym(conic, i - 1, k - 1, c * f[j - 1] * f[l - 1])
    else:
        raise ValueError("side must be 'x' or 'y'")
    if not any(line) and not any(v for row in conic for v in row):
        raise DegenerateFiber(f"both forms vanish identically on the fiber over {side}={f}")
    return line, conic


def _add_sym(m, r, s, v):
    if r == s:
        m[r][r] += v
    else:
        m[r][s] += v / 2
        m[s][r] += v / 2


# -- surface files ------------------------------------------------------------


def surface_from_json(obj: dict):
    kind = obj.get("type")
    if kind == "wehler_222":
        return Wehler222Surface({tuple(e["exp"]): e["value"] for e in obj["coefficients"]})
    if kind == "wehler_22":
        return Wehler22Surface(tuple(tuple(r) for r in obj["a"]), {tuple(e["exp"]): e["value"] for e in obj["b"]})
    raise ValueError(f"unknown surface type {kind!r}")


def load_surface(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        return surface_from_json(json.load(fh))


def save_surface(surface, path: str | Path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(surface.to_json(), fh, indent=1)
        fh.write("\n")


def model_for(surface) -> LatticeModel:
    return lattice_model(surface.family)
