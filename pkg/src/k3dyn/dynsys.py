"""Polarized systems on Picard lattices and the certificates built on them.

Everything here is exact.  A polarized system is a pullback map ``M``
with an eigenclass ``E`` whose eigenvalue ``alpha`` exceeds 1.  A
hyperbolic certificate adds the ``1/alpha`` eigenclass ``E'`` and a
positive-span witness that ``E + E'`` is ample.  The verdict functions
package the consequences for surfaces: vanishing self-intersection,
positivity against effective classes, non-effectivity, the canonical
class obstruction, failure of the Dirichlet property and vanishing of
the arithmetic degree.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .errors import (
    AlphaNotExpanding,
    CertificateFailure,
    FieldMismatch,
    IrreducibleCubic,
    LatticeMismatch,
    DegenerateGenerators,
    NoExpandingEigenvalue,
    NotAmpleWitness,
    NotApplicable,
    NotEffectiveSample,
    NotHyperbolic,
    NotPolarized,
    RepeatedEigenvalueDefect,
)
from .exactnum import QuadExt, qe_sign
from .piclattice import (
    DivisorClass,
    PicLattice,
    PullbackMap,
    intersect,
    is_effective_sample,
    positive_span_certificate,
    pullback_apply,
)

SURFACE_DIM = 2


class ComplexSpectrum(FieldMismatch):
    """Eigenvalues are not real; no real quadratic field can hold them."""


# -- characteristic polynomial and eigenvalues ----------------------------


def charpoly(m: PullbackMap) -> list[int]:
    """Coefficients ``[1, c1, ..., cn]`` of ``det(t*I - M)`` (Faddeev-LeVerrier)."""
    n = m.size
    a = [[Fraction(v) for v in row] for row in m.matrix]
    coeffs = [Fraction(1)]
    mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A*M_{k-1} + c_{k-1} I
        prod = linalg.mat_mul(a, mk)
        mk = [[prod[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        am = linalg.mat_mul(a, mk)
        ck = -sum(am[i][i] for i in range(n)) / k
        coeffs.append(ck)
    if any(c.denominator != 1 for c in coeffs):
        raise AssertionError("integer matrix produced a non-integral characteristic polynomial")
    return [int(c) for c in coeffs]


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    f = 1
    while f * f <= n:
        if n % f == 0:
            small.append(f)
            if f * f != n:
                large.append(n // f)
        f += 1
    return small + large[::-1]


def _poly_eval(coeffs: Sequence[int], t: int) -> int:
    acc = 0
    for c in coeffs:
        acc = acc * t + c
    return acc


def _deflate(coeffs: Sequence[int], root: int) -> list[int]:
    out = [coeffs[0]]
    for c in coeffs[1:-1]:
        out.append(c + out[-1] * root)
    return out


def _quadratic_roots(b: int, c: int, field_disc: int) -> list[QuadExt]:
    """Real roots of ``t^2 + b t + c`` in Q or in Q(sqrt field_disc)."""
    disc = b * b - 4 * c
    if disc < 0:
        raise ComplexSpectrum(f"t^2{b:+}t{c:+} has complex roots")
    root = QuadExt.sqrt(disc)
    if not root.is_rational and root.d != field_disc:
        raise FieldMismatch(
            f"eigenvalues need sqrt({root.d}) but the lattice coefficients live in Q(sqrt {field_disc})"
        )
    return [(QuadExt(-b) + root) / 2, (QuadExt(-b) - root) / 2]


def eigenvalues(m: PullbackMap, lattice: PicLattice) -> list[tuple[QuadExt, int]]:
    """Distinct eigenvalues with algebraic multiplicity, largest first."""
    n = m.size
    if n != lattice.rank:
        raise LatticeMismatch("map and lattice sizes differ")
    if n > 3:
        raise ValueError("exact spectra are supported up to rank 3")
    cp = charpoly(m)
    if n == 1:
        roots = [QuadExt(-cp[1])]
    elif n == 2:
        roots = _quadratic_roots(cp[1], cp[2], lattice.field_disc)
    else:
        c0 = cp[-1]
        candidates = [0] if c0 == 0 else [s * v for v in _divisors(c0) for s in (1, -1)]
        r = next((t for t in candidates if _poly_eval(cp, t) == 0), None)
        if r is None:
            raise IrreducibleCubic(f"characteristic polynomial {cp} has no rational root")
        q = _deflate(cp, r)
        roots = [QuadExt(r)] + _quadratic_roots(q[1], q[2], lattice.field_disc)
    merged: list[tuple[QuadExt, int]] = []
    for root in roots:
        for i, (v, k) in enumerate(merged):
            if v == root:
                merged[i] = (v, k + 1)
                break
        else:
            merged.append((root, 1))
    merged.sort(key=lambda vk: vk[0], reverse=True)
    return merged


def normalize_eigenvector(v: DivisorClass) -> DivisorClass:
    """Scale so the first nonzero coordinate is 1, then flip the sign if the
    pairing with the ample basis sum is negative."""
    lead = next(c for c in v.coords if c)
    v = v * lead.inverse()
    if qe_sign(intersect(v, v.lattice.ample_sum())) < 0:
        v = -v
    return v


def eigenvector(m: PullbackMap, lattice: PicLattice, value: QuadExt) -> DivisorClass:
    """The normalized eigenclass for ``value``; the eigenspace must be a line."""
    n = lattice.rank
    shifted = [[QuadExt(m.matrix[i][j]) - (value if i == j else 0) for j in range(n)] for i in range(n)]
    basis = linalg.nullspace(shifted)
    if len(basis) != 1:
        raise RepeatedEigenvalueDefect(f"eigenspace for {value} has dimension {len(basis)}, expected 1")
    return normalize_eigenvector(lattice.divisor(basis[0]))


def spectrum(m: PullbackMap, lattice: PicLattice) -> list[tuple[QuadExt, DivisorClass]]:
    """Exact eigenpairs of a pullback map (rank at most 3)."""
    return [(value, eigenvector(m, lattice, value)) for value, _ in eigenvalues(m, lattice)]


# -- polarized systems -------------------------------------------------------


@dataclass(frozen=True)
class PolarizedSystem:
    lattice: PicLattice
    pullback: PullbackMap
    alpha: QuadExt
    polarizing_class: DivisorClass
    name: str = field(default="E", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", QuadExt.coerce(self.alpha))
        if not self.polarizing_class:
            raise NotPolarized("the polarizing class must be nonzero")
        if pullback_apply(self.pullback, self.polarizing_class) != self.alpha * self.polarizing_class:
            raise NotPolarized(f"{self.pullback.label or 'map'} does not scale {self.name} by {self.alpha}")
        if qe_sign(self.alpha - 1) <= 0:
            raise AlphaNotExpanding(f"alpha = {self.alpha} is not > 1")

    @property
    def degree(self) -> int:
        return self.pullback.declared_degree


def find_polarizations(m: PullbackMap, lattice: PicLattice) -> list[PolarizedSystem]:
    # eigenvalues first: a map without expansion is rejected before any
    # (possibly degenerate) eigenspace is examined
    values = [v for v, _ in eigenvalues(m, lattice) if qe_sign(v - 1) > 0]
    if not values:
        raise NoExpandingEigenvalue(f"{m.label or 'map'} has no eigenvalue > 1")
    return [PolarizedSystem(lattice, m, v, eigenvector(m, lattice, v)) for v in values]


@dataclass(frozen=True)
class HyperbolicCertificate:
    system: PolarizedSystem
    dual_class: DivisorClass
    ample_witness: tuple[QuadExt, ...]
    degree_check: dict
    dual_name: str = field(default="E′", compare=False)

    @property
    def is_automorphism(self) -> bool:
        return self.system.degree == 1


def _balance(dual: DivisorClass, e: DivisorClass) -> DivisorClass:
    # scale E' so that it pairs with the ample sum exactly as E does
    h = e.lattice.ample_sum()
    he, hd = intersect(e, h), intersect(dual, h)
    if he and hd:
        return dual * (he / hd)
    return dual


def hyperbolic_certificate(sys: PolarizedSystem, dual_name: str = "E′") -> HyperbolicCertificate:
    lat, m = sys.lattice, sys.pullback
    inv = sys.alpha.inverse()
    if not any(v == inv for v, _ in eigenvalues(m, lat)):
        raise NotHyperbolic(f"1/alpha = {inv} is not an eigenvalue of {m.label or 'the map'}")
    dual = _balance(eigenvector(m, lat, inv), sys.polarizing_class)
    gens = [lat.basis_class(i) for i in lat.ample_basis]
    witness = None
    if gens:
        try:
            witness = positive_span_certificate(sys.polarizing_class + dual, gens)
        except DegenerateGenerators as exc:
            raise NotAmpleWitness(f"undetermined: {exc}") from exc
    if witness is None:
        raise NotAmpleWitness("undetermined: E + E′ is not a positive combination of the ample basis")
    a2 = sys.alpha ** SURFACE_DIM
    check = {"degree": sys.degree, "alpha_pow_dim": a2, "equal": a2 == sys.degree}
    return HyperbolicCertificate(sys, dual, tuple(witness), check, dual_name)


# -- verdicts ----------------------------------------------------------------


class Claim(enum.Enum):
    SelfIntersectionZero = "SelfIntersectionZero"
    PositivityOnSamples = "PositivityOnSamples"
    NotEffective = "NotEffective"
    KodairaObstruction = "KodairaObstruction"
    DirichletFails = "DirichletFails"
    ArithmeticDegreeZero = "ArithmeticDegreeZero"


@dataclass(frozen=True)
class Evidence:
    step: str
    value: QuadExt | None = None

    def to_json(self) -> dict:
        return {"step": self.step, "value": None if self.value is None else self.value.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> Evidence:
        v = obj.get("value")
        return cls(obj["step"], None if v is None else QuadExt.from_json(v))


@dataclass
class Verdict:
    claim: Claim
    holds: bool
    evidence: list[Evidence]
    subjects: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.holds and not self.evidence:
            raise ValueError("a holding verdict needs evidence")

    def to_json(self) -> dict:
        return {
            "claim": self.claim.value,
            "holds": self.holds,
            "evidence": [e.to_json() for e in self.evidence],
            "subjects": list(self.subjects),
        }

    @classmethod
    def from_json(cls, obj: dict) -> Verdict:
        return cls(
            Claim(obj["claim"]),
            bool(obj["holds"]),
            [Evidence.from_json(e) for e in obj["evidence"]],
            list(obj.get("subjects", [])),
        )


def _degree_equals(sys: PolarizedSystem, power: int) -> bool:
    return sys.alpha ** power == sys.degree


def self_intersection_verdict(sys: PolarizedSystem) -> Verdict:
    if _degree_equals(sys, SURFACE_DIM):
        raise NotApplicable(f"deg = alpha^2 = {sys.degree}; no constraint on ({sys.name}^2)")
    a2 = sys.alpha ** SURFACE_DIM
    e2 = intersect(sys.polarizing_class, sys.polarizing_class)
    ev = [
        Evidence("alpha^2", a2),
        Evidence("deg(phi)", QuadExt(sys.degree)),
        Evidence(f"alpha^2 ({sys.name}^2) = deg(phi) ({sys.name}^2) with alpha^2 != deg(phi)"),
        Evidence(f"({sys.name}^2)", e2),
    ]
    return Verdict(Claim.SelfIntersectionZero, e2 == 0, ev, [sys.name])


def pullback_intersection_sequence(cert: HyperbolicCertificate, d: DivisorClass, n_max: int) -> list[QuadExt]:
    """``((phi^n)^*(E+E'), D)`` for ``n = 0..n_max`` via the eigen-decomposition,
    cross-checked against explicit matrix powers; every term must be positive."""
    if not is_effective_sample(d):
        raise NotEffectiveSample(f"{d} is not a nonzero non-negative combination of basis classes")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    sys = cert.system
    e_d = intersect(sys.polarizing_class, d)
    f_d = intersect(cert.dual_class, d)
    total = sys.polarizing_class + cert.dual_class
    inv = sys.alpha.inverse()
    values = []
    power = PullbackMap([[int(i == j) for j in range(sys.lattice.rank)] for i in range(sys.lattice.rank)])
    for n in range(n_max + 1):
        value = sys.alpha ** n * e_d + inv ** n * f_d
        direct = intersect(pullback_apply(power, total), d)
        if value != direct:
            raise CertificateFailure(f"n={n}: eigen-decomposition {value} != matrix power {direct}")
        if qe_sign(value) <= 0:
            raise CertificateFailure(f"n={n}: term {value} is not positive")
        values.append(value)
        power = sys.pullback @ power
    return values


def _check_samples(samples: Sequence[DivisorClass]):
    for s in samples:
        if not is_effective_sample(s):
            raise NotEffectiveSample(f"{s} is not a nonzero non-negative combination of basis classes")


def positivity_verdict(cert: HyperbolicCertificate, samples: Sequence[DivisorClass]) -> Verdict:
    _check_samples(samples)
    sys = cert.system
    ev = [Evidence(f"{sys.name} + {cert.dual_name} ample; witness over the ample basis")]
    ev += [Evidence(f"witness coefficient {i}", c) for i, c in enumerate(cert.ample_witness)]
    ok = True
    for s in samples:
        v = intersect(sys.polarizing_class, s)
        ok &= qe_sign(v) > 0
        ev.append(Evidence(f"({sys.name}, {s})", v))
        w = intersect(cert.dual_class, s)
        ev.append(Evidence(f"({cert.dual_name}, {s})", w))
        # positivity of E' is a theorem only when phi is invertible
        if cert.is_automorphism:
            ok &= qe_sign(w) > 0
    ev.append(Evidence("ample hyperbolic polarization: (E, D) > 0 for every nonzero effective D"))
    subjects = [sys.name, cert.dual_name] if cert.is_automorphism else [sys.name]
    return Verdict(Claim.PositivityOnSamples, bool(ok), ev, subjects)


def _subjects(cert: HyperbolicCertificate) -> list[tuple[str, DivisorClass]]:
    out = [(cert.system.name, cert.system.polarizing_class)]
    if cert.is_automorphism:
        out.append((cert.dual_name, cert.dual_class))
    return out


def effectivity_verdict(cert: HyperbolicCertificate) -> Verdict:
    sys = cert.system
    if _degree_equals(sys, SURFACE_DIM):
        raise NotApplicable("deg = alpha^2; self-intersection need not vanish")
    ok = True
    ev = []
    for name, cls in _subjects(cert):
        sq = intersect(cls, cls)
        ok &= sq == 0
        ev.append(Evidence(f"({name}^2)", sq))
        ev.append(Evidence(f"if {name} ~ effective D != 0 then ({name}, D) = ({name}^2) > 0 by positivity; contradiction"))
    ev.append(Evidence("E + E′ ample: sum of positive witness coefficients", sum(cert.ample_witness, QuadExt(0))))
    return Verdict(Claim.NotEffective, bool(ok), ev, [n for n, _ in _subjects(cert)])


def kodaira_verdict(cert: HyperbolicCertificate, etale: bool) -> Verdict:
    sys = cert.system
    if not etale:
        raise NotApplicable("the map is not declared étale")
    if _degree_equals(sys, 1):
        raise NotApplicable("deg(phi) = alpha")
    k = sys.lattice.canonical()
    if not k:
        ev = [Evidence("K_X = 0: every multiple m K_X is zero", QuadExt(0))]
        return Verdict(Claim.KodairaObstruction, True, ev, ["K_X"])
    invariant = pullback_apply(sys.pullback, k) == k
    ke = intersect(k, sys.polarizing_class)
    ev = [
        Evidence("phi^* K_X = K_X (étale)", QuadExt(int(invariant))),
        Evidence("alpha (m K_X, E) = deg(phi) (m K_X, E), alpha != deg(phi)"),
        Evidence(f"(K_X, {sys.name})", ke),
    ]
    ok = invariant and ke == 0
    if ok:
        ev.append(Evidence("(m K_X, E) = 0 so m K_X is zero or not effective; kappa(X) <= 0"))
    return Verdict(Claim.KodairaObstruction, ok, ev, ["K_X"])


def dirichlet_verdict(cert: HyperbolicCertificate) -> Verdict:
    if _degree_equals(cert.system, SURFACE_DIM):
        raise NotApplicable("deg = alpha^2")
    eff = effectivity_verdict(cert)
    ev = list(eff.evidence)
    names = [n for n, _ in _subjects(cert)]
    for n in names:
        ev.append(Evidence(f"canonical compactification of {n} + (f)^ ⪰ 0 would make {n} effective"))
    ev.append(Evidence("no such f exists: the Dirichlet property fails"))
    return Verdict(Claim.DirichletFails, eff.holds, ev, [bar(n) for n in names])


def bar(name: str) -> str:
    """Mark a class name as its canonical compactification: ``E⁺`` -> ``Ē⁺``."""
    if name.startswith("E"):
        return "Ē" + name[1:]
    return name + "̄"


def arithmetic_degree_zero(sys: PolarizedSystem, dim: int) -> Verdict:
    """Formal derivation that the top arithmetic self-intersection of the
    canonical compactification vanishes."""
    if qe_sign(sys.alpha - 1) <= 0:
        raise AlphaNotExpanding(f"alpha = {sys.alpha} is not > 1")
    if dim < 1:
        raise ValueError("dimension must be positive")
    top = sys.alpha ** (dim + 1)
    factor = 1 - top
    if not factor:
        raise CertificateFailure("1 - alpha^(d+1) vanished")
    ev = [
        Evidence(f"alpha^{dim + 1}", top),
        Evidence("0 = deg((phi^* E)^(d+1)) - deg((alpha E)^(d+1)) = (1 - alpha^(d+1)) deg(E^(d+1))"),
        Evidence(f"1 - alpha^{dim + 1}", factor),
        Evidence(f"deg(E^{dim + 1})", QuadExt(0)),
    ]
    return Verdict(Claim.ArithmeticDegreeZero, True, ev, [bar(sys.name)])
