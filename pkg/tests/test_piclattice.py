from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from k3dyn.errors import DegenerateGenerators, LatticeMismatch, NotSquarefree
from k3dyn.exactnum import QuadExt
from k3dyn.piclattice import (
    PicLattice,
    PullbackMap,
    identity_map,
    intersect,
    is_effective_sample,
    load_lattice,
    positive_span_certificate,
    pullback_apply,
    validate_scaled_isometry,
)
from k3dyn.surfaces import A_C, B_C, BETA_AB, lattice_model_s_ab, lattice_model_s_c

SAB = lattice_model_s_ab().lattice
SC = lattice_model_s_c().lattice
SQRT3 = QuadExt.sqrt(3)


def e_plus():
    return SAB.divisor([BETA_AB, -1])


def e_minus():
    return SAB.divisor([-1, BETA_AB])


# -- intersect -------------------------------------------------------------------


def test_e_plus_self_intersection():
    assert intersect(e_plus(), e_plus()) == 0


def test_e_plus_against_d1():
    assert intersect(e_plus(), SAB.basis_class(0)) == 2 * SQRT3


def test_e1_self_intersection():
    e1 = SC.divisor([1, A_C, B_C])
    assert intersect(e1, e1) == 0


def test_intersect_rejects_other_lattice():
    with pytest.raises(LatticeMismatch):
        intersect(SAB.basis_class(0), SC.basis_class(0))


# -- pullback_apply ------------------------------------------------------------------


def test_sab_composite_scales_e_plus():
    phi = PullbackMap([[15, 4], [-4, -1]])
    assert pullback_apply(phi, e_plus()) == BETA_AB**2 * e_plus()


def test_identity_pullback():
    d = SC.divisor([3, -1, QuadExt(0, 2, 5)])
    assert pullback_apply(identity_map(3), d) == d


def test_sc_composite_scales_e1():
    m = lattice_model_s_c()
    composite = m.involutions[2] @ m.involutions[3] @ m.involutions[1]
    e1 = SC.divisor([1, A_C, B_C])
    assert pullback_apply(composite, e1) == QuadExt(9, 4, 5) * e1


def test_pullback_size_mismatch():
    with pytest.raises(LatticeMismatch):
        pullback_apply(identity_map(3), e_plus())


# -- scaled isometries -----------------------------------------------------------------


def test_sigma1_is_isometry():
    sigma1 = PullbackMap([[-1, 0, 0], [2, 1, 0], [2, 0, 1]])
    assert validate_scaled_isometry(sigma1, SC)


def test_sab_composite_is_isometry():
    assert validate_scaled_isometry(PullbackMap([[15, 4], [-4, -1]]), SAB)


def test_doubling_is_not_isometry():
    assert not validate_scaled_isometry(PullbackMap([[2, 0], [0, 2]]), SAB)


def test_doubling_is_degree_four_scaled_isometry():
    assert validate_scaled_isometry(PullbackMap([[2, 0], [0, 2]], 4), SAB)


def test_automorphism_must_be_invertible():
    with pytest.raises(ValueError):
        PullbackMap([[1, 2], [2, 4]])


def test_determinant_and_power():
    m = PullbackMap([[15, 2, 6], [-6, -1, -2], [10, 2, 3]], 1, "τ")
    assert m.determinant() == -1
    assert m.trace() == 17
    assert m.power(3).matrix == (m @ m @ m).matrix
    assert m.power(3).label == "(τ)^3"
    assert m.power(0).matrix == identity_map(3).matrix


# -- positive span certificates ------------------------------------------------------------


def test_witness_sab():
    cert = positive_span_certificate(e_plus() + e_minus(), [SAB.basis_class(0), SAB.basis_class(1)])
    assert cert == [1 + SQRT3, 1 + SQRT3]


def test_witness_sc():
    model = lattice_model_s_c()
    d = model.named_class("E₁") + model.named_class("E₂")
    cert = positive_span_certificate(d, [SC.basis_class(i) for i in range(3)])
    assert cert == [B_C, B_C, 2 * B_C]


def test_no_witness_for_negative_coefficient():
    d = SAB.basis_class(0) - SAB.basis_class(1)
    assert positive_span_certificate(d, [SAB.basis_class(0), SAB.basis_class(1)]) is None


def test_dependent_generators():
    with pytest.raises(DegenerateGenerators):
        positive_span_certificate(SAB.basis_class(0), [SAB.basis_class(0), SAB.basis_class(0) * 2])


def test_effective_sampling_convention():
    assert is_effective_sample(SC.divisor([1, 0, 2]))
    assert not is_effective_sample(SC.zero())
    assert not is_effective_sample(SC.divisor([-1, 0, 0]))


# -- lattice files ---------------------------------------------------------------------


def test_lattice_file_round_trip(tmp_path):
    path = tmp_path / "lat.json"
    path.write_text(json.dumps(SC.to_json()), encoding="utf-8")
    assert load_lattice(path) == SC


def test_lattice_validation():
    with pytest.raises(ValueError):
        PicLattice(2, ("a", "b"), ((0, 1), (2, 0)), (0,), (0, 0), 1)
    with pytest.raises(NotSquarefree):
        PicLattice(1, ("a",), ((1,),), (0,), (0,), 8)


# -- invariants (property tests) ---------------------------------------------------------

coef = st.fractions(min_value=-20, max_value=20, max_denominator=12)
q5 = st.builds(lambda p, q: QuadExt(p, q, 5), coef, coef)
vec3 = st.lists(q5, min_size=3, max_size=3).map(SC.divisor)


@settings(max_examples=150, deadline=None)
@given(vec3, vec3, vec3, q5, q5)
def test_bilinearity(d1, d2, d3, a, b):
    assert intersect(a * d1 + b * d2, d3) == a * intersect(d1, d3) + b * intersect(d2, d3)


@settings(max_examples=150, deadline=None)
@given(vec3, vec3)
def test_symmetry(d1, d2):
    assert intersect(d1, d2) == intersect(d2, d1)


@settings(max_examples=100, deadline=None)
@given(vec3, vec3, st.lists(st.sampled_from([1, 2, 3]), min_size=1, max_size=5))
def test_isometry_scaling(d1, d2, word):
    model = lattice_model_s_c()
    m = model.pullback_of_word(word)
    assert validate_scaled_isometry(m, SC)
    assert intersect(pullback_apply(m, d1), pullback_apply(m, d2)) == m.declared_degree * intersect(d1, d2)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=2, max_size=2), st.lists(st.integers(-5, 5), min_size=2, max_size=2))
def test_degree_scaled_isometry(v1, v2):
    m = PullbackMap([[2, 0], [0, 2]], 4)
    d1, d2 = SAB.divisor(v1), SAB.divisor(v2)
    assert intersect(pullback_apply(m, d1), pullback_apply(m, d2)) == 4 * intersect(d1, d2)


@settings(max_examples=150, deadline=None)
@given(vec3)
def test_certificate_reconstructs(d):
    gens = [SC.basis_class(i) for i in range(3)]
    cert = positive_span_certificate(d, gens)
    if cert is not None:
        rebuilt = sum((c * g for c, g in zip(cert, gens)), SC.zero())
        assert rebuilt == d
        assert all(c > 0 for c in cert)
