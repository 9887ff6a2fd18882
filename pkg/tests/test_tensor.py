import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lindyn.criteria import CriterionData, shift_data
from lindyn.errors import CriterionDataError, SpaceMismatchError
from lindyn.operators import (
    apply,
    compose,
    direct_sum,
    identity,
    join,
    operator,
    power,
    weighted_backward_shift,
)
from lindyn.spaces import Functional, SpaceDesc, SpaceVec, basis, norm, pair
from lindyn.tensor import (
    TSCData,
    balance,
    check_theorem3,
    check_tsc,
    decomposition_cost,
    elementary,
    identity_tsc,
    isometry_tsc,
    kronecker,
    projective_norm_dual_lower,
    projective_norm_hilbert_oracle,
    projective_norm_report,
    projective_norm_upper,
    proposition_phi,
    proposition_witness,
    random_unimodular,
    shift_tsc,
    tensor,
    tensor_apply,
    tensor_from_matrix,
)

from conftest import cgauss

seeds = st.integers(0, 2**32 - 1)
exponents = st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf])


def rand_tensor(rng, p1, p2, d1, d2, terms):
    s1, s2 = SpaceDesc(p1, d1), SpaceDesc(p2, d2)
    return tensor([(SpaceVec(s1, cgauss(rng, d1)), SpaceVec(s2, cgauss(rng, d2))) for _ in range(terms)])


def test_coefficient_matrix_must_match_decomposition():
    from lindyn.tensor import TensorElem
    s = SpaceDesc(2, 2)
    with pytest.raises(ValueError):
        TensorElem(s, s, ((basis(s, 0), basis(s, 1)),), np.eye(2))


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_elementary_is_exact(p):
    rng = np.random.default_rng(8)
    s = SpaceDesc(p, 5)
    x, y = SpaceVec(s, cgauss(rng, 5)), SpaceVec(s, cgauss(rng, 5))
    assert projective_norm_upper(elementary(x, y)) == norm(x) * norm(y)


@given(exponents, exponents, seeds)
def test_cross_norm_property(p1, p2, seed):
    rng = np.random.default_rng(seed)
    x = SpaceVec(SpaceDesc(p1, 4), cgauss(rng, 4))
    y = SpaceVec(SpaceDesc(p2, 3), cgauss(rng, 3))
    assert projective_norm_upper(elementary(x, y)) == norm(x) * norm(y)


def test_zero_tensor():
    s = SpaceDesc(2, 3)
    assert projective_norm_upper(tensor_from_matrix(np.zeros((3, 3)), s, s)) == 0.0


def test_identity_coefficients():
    s = SpaceDesc(2, 2)
    z = tensor_from_matrix(np.eye(2), s, s)
    assert projective_norm_upper(z) == pytest.approx(2.0, abs=1e-12)
    assert projective_norm_hilbert_oracle(z) == pytest.approx(2.0, abs=1e-12)


def test_oracle_examples():
    s = SpaceDesc(2, 2)
    assert projective_norm_hilbert_oracle(tensor_from_matrix(np.diag([3, 4]), s, s)) == pytest.approx(7.0)
    u = np.array([0.6, 0.8])
    v = np.array([1, 1j]) / math.sqrt(2)
    assert projective_norm_hilbert_oracle(tensor_from_matrix(np.outer(u, v), s, s)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        projective_norm_hilbert_oracle(tensor_from_matrix(np.eye(2), SpaceDesc(1, 2), s))


@given(seeds, st.integers(1, 6))
def test_upper_matches_nuclear_norm(seed, terms):
    z = rand_tensor(np.random.default_rng(seed), 2, 2, 4, 4, terms)
    up = projective_norm_upper(z)
    oracle = projective_norm_hilbert_oracle(z)
    assert up >= oracle - 1e-9
    assert up - oracle < 1e-6


@given(exponents, exponents, seeds)
def test_upper_beats_stored_decomposition(p1, p2, seed):
    z = rand_tensor(np.random.default_rng(seed), p1, p2, 3, 4, 3)
    assert projective_norm_upper(z) <= decomposition_cost(z.decomposition) * (1 + 1e-12)


@given(exponents, seeds)
def test_triangle_inequality(p, seed):
    rng = np.random.default_rng(seed)
    z, w = rand_tensor(rng, p, p, 3, 3, 2), rand_tensor(rng, p, p, 3, 3, 2)
    total = z + w
    assert len(total.decomposition) == 4
    assert projective_norm_upper(total) <= decomposition_cost(balance(z.decomposition + w.decomposition)) * (1 + 1e-12)


@settings(max_examples=15)
@given(exponents, exponents, seeds)
def test_dual_lower_below_upper(p1, p2, seed):
    z = rand_tensor(np.random.default_rng(seed), p1, p2, 3, 3, 3)
    lower, exact = projective_norm_dual_lower(z)
    upper = projective_norm_upper(z)
    if exact:
        assert lower <= upper * (1 + 1e-9)
    assert lower > 0


def test_dual_lower_exact_on_l1():
    # on l^1 (x) l^1 the projective norm is the entrywise l^1 norm
    rng = np.random.default_rng(2)
    s = SpaceDesc(1, 3)
    z = rand_tensor(rng, 1, 1, 3, 3, 4)
    lower, exact = projective_norm_dual_lower(z)
    assert exact
    assert lower == pytest.approx(np.abs(z.coeff).sum(), rel=1e-12)
    assert projective_norm_upper(z) == pytest.approx(np.abs(z.coeff).sum(), rel=1e-12)


def test_report_fields():
    rng = np.random.default_rng(0)
    rep = projective_norm_report(rand_tensor(rng, 2, 2, 3, 3, 2))
    assert rep["lower_kind"] == "oracle" and rep["decomposition_rank"] == 2
    assert -1e-9 <= rep["gap"] < 1e-6
    rep = projective_norm_report(rand_tensor(rng, 3, 3, 3, 3, 2))
    assert rep["lower_kind"] == "dual-heuristic"


def test_balance_preserves_tensor_and_cost(rng):
    z = rand_tensor(rng, 2, 2, 3, 3, 3)
    b = balance(z.decomposition)
    assert np.allclose(tensor(b).coeff, z.coeff, atol=1e-12)
    assert decomposition_cost(b) == pytest.approx(decomposition_cost(z.decomposition), rel=1e-12)
    for x, y in b:
        assert norm(x) == pytest.approx(norm(y), rel=1e-12)


# -- Kronecker ------------------------------------------------------------------

def test_kron_identity():
    s = SpaceDesc(2, 3)
    assert kronecker(identity(s), identity(s)).allclose(identity(SpaceDesc(2, 9)), rtol=0)


def test_kron_acts_on_elementary(rng):
    s = SpaceDesc(2, 3)
    T = operator(s, cgauss(rng, 3, 3))
    x, y = SpaceVec(s, cgauss(rng, 3)), SpaceVec(s, cgauss(rng, 3))
    z = elementary(x, y)
    K = kronecker(T, identity(s))
    assert np.allclose(K.entries @ z.flat(), elementary(apply(T, x), y).flat(), atol=1e-12)
    assert np.allclose(tensor_apply(T, identity(s), z).flat(), K.entries @ z.flat(), atol=1e-12)


def test_kron_square_of_doubled_shift():
    B2 = weighted_backward_shift(2, 4)
    K = kronecker(B2, B2)
    lhs = K.entries @ K.entries
    rhs = np.kron(B2.entries @ B2.entries, B2.entries @ B2.entries)
    assert np.array_equal(lhs, rhs)
    assert np.array_equal(lhs, kronecker(power(B2, 2), power(B2, 2)).entries)


@given(seeds)
def test_kron_functorial(seed):
    rng = np.random.default_rng(seed)
    s1, s2 = SpaceDesc(2, 3), SpaceDesc(2, 2)
    T1, S1 = operator(s1, cgauss(rng, 3, 3)), operator(s1, cgauss(rng, 3, 3))
    T2, S2 = operator(s2, cgauss(rng, 2, 2)), operator(s2, cgauss(rng, 2, 2))
    lhs = kronecker(T1, T2).entries @ kronecker(S1, S2).entries
    rhs = kronecker(compose(T1, S1), compose(T2, S2)).entries
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * np.abs(rhs).max())


# -- TSC ----------------------------------------------------------------------------

def test_identity_tsc_passes():
    data = identity_tsc(SpaceDesc(2, 8), 12)
    rep = check_tsc(data, 1.0, 1e-6)
    assert rep.passed


def test_isometry_tsc_passes():
    data = isometry_tsc(random_unimodular(8, 3), 12)
    rep = check_tsc(data, 1.0, 1e-6)
    assert rep.passed
    assert max(rep.sequence("max_reconstruction_error")) < 1e-14


def test_shift_tsc_sequences():
    rep = check_tsc(shift_tsc(2, 16, 12), 1.0, 1e-6)
    assert rep.passed
    # ||2^-k (2B)^k x|| = ||B^k x|| and ||2^k (F/2)^k y|| = ||F^k y||
    orb = rep.sequence("scaled_orbit")
    inv = rep.sequence("scaled_inverse")
    assert orb == [1.0] * 4 + [0.0] * 9
    assert inv == [1.0] * 13


def test_tsc_bound_violation():
    rep = check_tsc(shift_tsc(2, 16, 12), 0.5, 1e-6)
    assert rep.failed == ["(i)", "(ii)"]


def test_tsc_needs_scalars():
    s = SpaceDesc(2, 3)
    I = identity(s)
    with pytest.raises(CriterionDataError):
        TSCData(I, [0, 1], [basis(s, 0)], [basis(s, 0)], [I, I])
    with pytest.raises(CriterionDataError):
        TSCData(I, [0, 1], [basis(s, 0)], [basis(s, 0)], [I, I], scalars=[1, 0])


def test_isometry_requires_unimodular():
    with pytest.raises(ValueError):
        isometry_tsc([1, 2], 3)


# -- tensor product criterion ---------------------------------------------------

def sc_shift(dim, kmax):
    return shift_data(2, dim, kmax, scalars=lambda n: 2.0 ** (-n / 2))


def test_theorem3_sequences_by_hand():
    rep = check_theorem3(sc_shift(8, 12), identity_tsc(SpaceDesc(2, 8), 12), 1e-6)
    inside = [r for r in rep.records if r.window_ok]
    assert [r.n_k for r in inside] == [0, 1, 2, 3, 4, 5, 6, 7]
    # generators e_0 of l^2_8 (window leaves a single generator)
    first = [r.extras["pi_scaled_orbit"] for r in inside]
    second = [r.extras["pi_scaled_inverse"] for r in inside]
    assert first == pytest.approx([2.0 ** (k / 2) if k == 0 else 0.0 for k in range(8)], abs=0)
    assert second == pytest.approx([2.0 ** (-k / 2) for k in range(8)], rel=1e-15)
    assert all(r.max_reconstruction_error == 0.0 for r in inside)
    assert all(r.extras["pi_reconstruction_direct"] == 0.0 for r in inside)
    assert all(r.extras["kron_consistency"] == 0.0 for r in rep.records)
    # the combined scalar is lambda1 alone when lambda2 = 1
    assert [r.extras["lambda_abs"] for r in rep.records] == pytest.approx([2.0 ** (-k / 2) for k in range(13)])


def test_theorem3_passes_when_window_allows_decay():
    # wide enough truncation: the second sequence 2^{-k/2} falls below tol in-window
    rep = check_theorem3(sc_shift(64, 60), identity_tsc(SpaceDesc(2, 2), 60), 1e-6)
    assert rep.passed, rep.failed


def test_theorem3_identity_sc_fails_clause_i():
    s = SpaceDesc(2, 4)
    I = identity(s)
    sc = CriterionData(I, range(6), [basis(s, 0)], [basis(s, 0)], [I] * 6, scalars=[1] * 6)
    rep = check_theorem3(sc, identity_tsc(s, 5), 1e-6)
    assert not rep.passed
    assert "sc:(i)" in rep.failed and "(i)" in rep.failed


def test_theorem3_validation():
    s = SpaceDesc(2, 4)
    I = identity(s)
    plain = CriterionData(I, range(3), [basis(s, 0)], [basis(s, 0)], [I] * 3)
    with pytest.raises(CriterionDataError):
        check_theorem3(plain, identity_tsc(s, 2), 1e-6)
    with pytest.raises(CriterionDataError):
        check_theorem3(sc_shift(4, 3), identity_tsc(s, 2), 1e-6)


# -- direct-sum diagram ------------------------------------------------------------

def test_phi_simple():
    s = SpaceDesc(2, 3)
    e = basis(s, 1)
    x = SpaceVec(s, [1, 0, 5])
    f1 = Functional(s, [1, 0, 0])
    f2 = Functional(s, [0, 1, 0])
    a, b = proposition_phi(elementary(e, x), f1, f2)
    assert a.allclose(e, rtol=0) and np.all(b.coords == 0)


def test_phi_surjective():
    rng = np.random.default_rng(6)
    s = SpaceDesc(2, 4)
    e1, e2 = SpaceVec(s, cgauss(rng, 4)), SpaceVec(s, cgauss(rng, 4))
    f1, f2 = Functional(s, cgauss(rng, 4)), Functional(s, cgauss(rng, 4))
    u = proposition_witness(e1, e2, f1, f2)
    a, b = proposition_phi(u, f1, f2)
    assert a.allclose(e1, atol=1e-12) and b.allclose(e2, atol=1e-12)


@given(seeds)
def test_phi_diagram(seed):
    rng = np.random.default_rng(seed)
    s = SpaceDesc(2, 4)
    T = operator(s, cgauss(rng, 4, 4))
    u = rand_tensor(rng, 2, 2, 4, 4, 3)
    f1, f2 = Functional(s, cgauss(rng, 4)), Functional(s, cgauss(rng, 4))
    lhs = join(*proposition_phi(tensor_apply(T, identity(s), u), f1, f2)).coords
    rhs = apply(direct_sum(T), join(*proposition_phi(u, f1, f2))).coords
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.abs(rhs).max())


@given(seeds)
def test_phi_independent_of_decomposition(seed):
    rng = np.random.default_rng(seed)
    s = SpaceDesc(2, 4)
    u = rand_tensor(rng, 2, 2, 4, 4, 3)
    v = tensor_from_matrix(u.coeff, s, s)
    f1, f2 = Functional(s, cgauss(rng, 4)), Functional(s, cgauss(rng, 4))
    for a, b in zip(proposition_phi(u, f1, f2), proposition_phi(v, f1, f2)):
        assert np.allclose(a.coords, b.coords, rtol=1e-12, atol=1e-12 * max(1, np.abs(b.coords).max()))


def test_phi_rejects_wrong_space():
    s, t = SpaceDesc(2, 3), SpaceDesc(2, 4)
    u = elementary(basis(s, 0), basis(t, 0))
    with pytest.raises(SpaceMismatchError):
        proposition_phi(u, Functional(s, [1, 0, 0]), Functional(s, [0, 1, 0]))
