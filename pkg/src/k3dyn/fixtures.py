"""Random Wehler surfaces constructed to pass through chosen rational points.

Rational points on a random surface are hard to find, so the surface is
built around the point instead: random integer coefficients, then one
coefficient per defining form is solved for so the form vanishes there.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from functools import reduce

from . import linalg
from .errors import DegenerateFiber
from .exactnum import QuadExt
from .pointdyn import P1Point, P2Point, SurfacePoint, apply_involution
from .surfaces import Wehler22Surface, Wehler222Surface, fiber_quadratic

EXPONENTS_222 = [
    (i1, 2 - i1, i2, 2 - i2, i3, 2 - i3) for i1 in (2, 1, 0) for i2 in (2, 1, 0) for i3 in (2, 1, 0)
]
KEYS_22_B = [
    (i, j, k, l)
    for i, k in itertools.combinations_with_replacement((1, 2, 3), 2)
    for j, l in itertools.combinations_with_replacement((1, 2, 3), 2)
]


def _mono(pt, e0, e1):
    return pt[0] ** e0 * pt[1] ** e1


def _mono222(key, x, y, z):
    return _mono(x, *key[0:2]) * _mono(y, *key[2:4]) * _mono(z, *key[4:6])


def _integral(values: dict) -> dict:
    den = reduce(math.lcm, (Fraction(v).denominator for v in values.values()), 1)
    ints = {k: int(Fraction(v) * den) for k, v in values.items()}
    g = reduce(math.gcd, ints.values(), 0) or 1
    return {k: v // g for k, v in ints.items()}


def random_p1(rng: random.Random, bound: int = 9) -> P1Point:
    while True:
        c = (rng.randint(-bound, bound), rng.randint(-bound, bound))
        if any(c):
            return P1Point(c)


def random_p2(rng: random.Random, bound: int = 9) -> P2Point:
    while True:
        c = tuple(rng.randint(-bound, bound) for _ in range(3))
        if any(c):
            return P2Point(c)


# -- genericity screen ----------------------------------------------------------
# Polynomials in one variable t are coefficient lists, lowest degree first.


def _padd(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _pneg(a):
    return [-c for c in a]


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        if u:
            for j, v in enumerate(b):
                out[i + j] += u * v
    return out


def _ptrim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _pgcd(a, b):
    a, b = _ptrim(a), _ptrim(b)
    while b:
        a = [Fraction(c) for c in a]
        while len(a) >= len(b) and a:
            f = a[-1] / b[-1]
            shift = len(a) - len(b)
            a = _ptrim(_padd(a, _pneg([0] * shift + [f * c for c in b])))
        a, b = b, a
    return a


def _binary_resultant(f, g):
    """Resultant of two binary quadratics with polynomial coefficients."""
    a, b, c = f
    d, e, h = g
    af_cd = _padd(_pmul(a, h), _pneg(_pmul(c, d)))
    ae_bd = _padd(_pmul(a, e), _pneg(_pmul(b, d)))
    bf_ce = _padd(_pmul(b, h), _pneg(_pmul(c, e)))
    return _padd(_pmul(af_cd, af_cd), _pneg(_pmul(ae_bd, bf_ce)))


def _fiber_forms(surface: Wehler222Surface, axis: int):
    """The (2,2)-forms F0, F1, F2 of one axis, as quadratics in the first
    remaining factor whose coefficients are polynomials in t = w0/w1 of the second."""
    forms = []
    for k in (2, 1, 0):
        quad = [[0, 0, 0] for _ in range(3)]
        for key, c in surface.coeffs.items():
            if key[2 * (axis - 1)] != k:
                continue
            rest = [key[2 * l] for l in range(3) if l != axis - 1]
            quad[2 - rest[0]][rest[1]] += c
        forms.append(quad)
    return forms


def has_degenerate_fiber(surface: Wehler222Surface) -> bool:
    """Conservative test for a fiber on which all three coefficients vanish.

    Necessary condition for a common zero of F0, F1, F2: a common root of
    Res(F0, F1) and Res(F0, F2) in the last factor (a root at infinity
    counts when both resultants drop degree).  May reject a few generic
    surfaces; never accepts a degenerate one.
    """
    for axis in (1, 2, 3):
        f0, f1, f2 = _fiber_forms(surface, axis)
        r1, r2 = _binary_resultant(f0, f1), _binary_resultant(f0, f2)
        r1 += [0] * (9 - len(r1))
        r2 += [0] * (9 - len(r2))
        if not _ptrim(r1) or not _ptrim(r2):
            return True
        if r1[8] == 0 and r2[8] == 0:
            return True
        if len(_pgcd(r1, r2)) > 1:
            return True
    return False


def _generic_222(surface: Wehler222Surface, p: SurfacePoint) -> bool:
    for axis in (1, 2, 3):
        others = [p.coords[l] for l in range(3) if l != axis - 1]
        if not any(fiber_quadratic(surface, axis, others)):
            return False
    return not has_degenerate_fiber(surface)


def seed_wehler222(rng: random.Random, point_bound: int = 9, coeff_bound: int = 5):
    """A random (2,2,2) surface with integer coefficients and a rational point on it."""
    while True:
        x, y, z = (random_p1(rng, point_bound) for _ in range(3))
        coeffs = {k: Fraction(rng.randint(-coeff_bound, coeff_bound)) for k in EXPONENTS_222}
        keys = EXPONENTS_222[:]
        rng.shuffle(keys)
        value = sum(c * _mono222(k, x, y, z) for k, c in coeffs.items())
        pivot = next((k for k in keys if _mono222(k, x, y, z)), None)
        if pivot is None:
            continue
        coeffs[pivot] -= value / _mono222(pivot, x, y, z)
        try:
            surface = Wehler222Surface(_integral(coeffs))
        except ValueError:
            continue
        p = SurfacePoint(surface, (x, y, z))
        if _generic_222(surface, p):
            return surface, p


def seed_wehler22(rng: random.Random, point_bound: int = 9, coeff_bound: int = 5):
    """A random (1,1)+(2,2) surface through a random rational point."""
    while True:
        x, y = random_p2(rng, point_bound), random_p2(rng, point_bound)
        a = {(i, j): Fraction(rng.randint(-coeff_bound, coeff_bound)) for i in range(3) for j in range(3)}
        b = {k: Fraction(rng.randint(-coeff_bound, coeff_bound)) for k in KEYS_22_B}
        lin = sum(c * x[i] * y[j] for (i, j), c in a.items())
        piv = [k for k in a if x[k[0]] * y[k[1]]]
        quad = sum(c * x[i - 1] * x[k - 1] * y[j - 1] * y[l - 1] for (i, j, k, l), c in b.items())
        qpiv = [k for k in b if x[k[0] - 1] * x[k[2] - 1] * y[k[1] - 1] * y[k[3] - 1]]
        if not piv or not qpiv:
            continue
        i, j = rng.choice(piv)
        a[(i, j)] -= lin / (x[i] * y[j])
        kk = rng.choice(qpiv)
        b[kk] -= quad / (x[kk[0] - 1] * x[kk[2] - 1] * y[kk[1] - 1] * y[kk[3] - 1])
        a_int = _integral(a)
        try:
            surface = Wehler22Surface(
                tuple(tuple(a_int[(i, j)] for j in range(3)) for i in range(3)),
                _integral(b),
            )
        except ValueError:
            continue
        p = SurfacePoint(surface, (x, y))
        try:
            for side in ("x", "y"):
                apply_involution(surface, side, p)
        except DegenerateFiber:
            continue
        return surface, p


def _d_dy0_222(key, x, y, z, slot):
    """Partial derivative of a (2,2,2) monomial by the first coordinate of factor ``slot``."""
    pts = [x, y, z]
    e0 = key[2 * slot]
    if e0 == 0:
        return 0
    out = 1
    for l in range(3):
        if l == slot:
            out *= e0 * pts[l][0] ** (e0 - 1) * pts[l][1] ** key[2 * l + 1]
        else:
            out *= _mono(pts[l], *key[2 * l : 2 * l + 2])
    return out


def periodic_fixture_222(seed: int = 7, coeff_bound: int = 5):
    """A surface with a period-2 point ``P`` for the word ``(1, 3, 2)``.

    ``P = (x, y, z)`` and ``Q = (x', y, z)`` are the two points of one
    axis-1 fiber, and both are fixed by the involutions 2 and 3 (double
    roots of their fiber quadratics).  Then ``σ1σ3σ2`` swaps ``P`` and
    ``Q``.  Returns ``(surface, P, Q)``.
    """
    rng = random.Random(seed)
    x, x2, y, z = P1Point(2, 1), P1Point(3, 1), P1Point(1, 1), P1Point(5, 1)
    rows = []
    for xx in (x, x2):
        rows.append([_mono222(k, xx, y, z) for k in EXPONENTS_222])
        for slot in (1, 2):
            # y1, z1 != 0, so one partial plus Euler's relation gives a double root
            rows.append([_d_dy0_222(k, xx, y, z, slot) for k in EXPONENTS_222])
    red, pivots = linalg.rref(rows)
    for _ in range(200):
        free = {c: Fraction(rng.randint(-coeff_bound, coeff_bound)) for c in range(27) if c not in pivots}
        sol = dict(free)
        for r, pc in enumerate(pivots):
            acc = -sum((red[r][c] * v for c, v in free.items()), QuadExt(0))
            sol[pc] = acc.rat
        coeffs = {EXPONENTS_222[c]: v for c, v in sol.items()}
        try:
            surface = Wehler222Surface(_integral(coeffs))
        except ValueError:
            continue
        p = SurfacePoint(surface, (x, y, z))
        try:
            q = apply_involution(surface, 1, p)
            if q.coords[0] != x2:
                continue
            if any(apply_involution(surface, i, pt) != pt for i in (2, 3) for pt in (p, q)):
                continue
        except DegenerateFiber:
            continue
        return surface, p, q
    raise RuntimeError("could not build a periodic fixture")
