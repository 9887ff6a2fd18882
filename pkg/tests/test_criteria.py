import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lindyn.criteria import (
    CriterionData,
    MultOp,
    check_hypercyclicity_criterion,
    check_supercyclicity_criterion,
    decays,
    dual_shift_data,
    intertwiner_left,
    intertwiner_right,
    lift_left,
    lift_right,
    shift_data,
)
from lindyn.errors import CriterionDataError, LinearDependenceError, SpaceMismatchError, WindowViolationError
from lindyn.ideals import IdealDesc, element, ideal_norm, rank_one_element
from lindyn.operators import (
    MatOp,
    adjoint,
    apply,
    direct_sum,
    forward_shift,
    identity,
    join,
    left_mult,
    op_norm,
    operator,
    power,
    right_mult,
    weighted_backward_shift,
    zero_op,
)
from lindyn.spaces import Functional, SpaceDesc, SpaceVec, basis, coordinate_functional

from conftest import cgauss

seeds = st.integers(0, 2**32 - 1)
L2_16 = SpaceDesc(2, 16)


def products_for(T, S_maps, x, y, kmax):
    """Independent evaluation of ||T^k x|| ||S_k y|| with plain numpy."""
    out = []
    for k in range(kmax + 1):
        Tk = np.linalg.matrix_power(T, k)
        out.append(np.linalg.norm(Tk @ x) * np.linalg.norm(S_maps[k] @ y))
    return out


def test_shift_instance_passes():
    data = shift_data(2, 16, 12)
    assert [g.coords.nonzero()[0][0] for g in data.D1] == [0, 1, 2, 3]
    rep = check_supercyclicity_criterion(data, 1e-6)
    assert rep.passed and rep.exit_code == 0
    assert rep.sequence("max_product") == [1.0, 1.0, 1.0, 1.0] + [0.0] * 9
    assert all(r.max_reconstruction_error == 0.0 for r in rep.records)


def test_shift_product_for_e3_e0():
    # T^3 e_3 = 8 e_0 and ||(F/2)^3 e_0|| = 1/8
    T = 2 * np.diag(np.ones(15), 1)
    S = [np.linalg.matrix_power(0.5 * np.diag(np.ones(15), -1), k) for k in range(13)]
    e = np.eye(16)
    seq = products_for(T, S, e[3], e[0], 12)
    assert seq == [1.0, 1.0, 1.0, 1.0] + [0.0] * 9
    data = shift_data(2, 16, 12)
    mine = [np.linalg.norm(power(data.op, k).entries @ e[3]) * np.linalg.norm(data.maps[k].entries @ e[0])
            for k in range(13)]
    assert mine == seq


def test_identity_never_decays():
    s = SpaceDesc(2, 4)
    I = identity(s)
    data = CriterionData(I, range(5), [basis(s, 0)], [basis(s, 1)], [I] * 5)
    rep = check_supercyclicity_criterion(data, 0.5)
    assert not rep.passed and rep.failed == ["(i)"]
    assert rep.exit_code == 2
    assert rep.sequence("max_product") == [1.0] * 5


def test_empty_indices_rejected():
    s = SpaceDesc(2, 3)
    with pytest.raises(CriterionDataError):
        CriterionData(identity(s), [], [basis(s, 0)], [basis(s, 0)], [])


def test_data_validation():
    s = SpaceDesc(2, 3)
    I = identity(s)
    g = [basis(s, 0)]
    with pytest.raises(CriterionDataError):
        CriterionData(I, [0, 2, 1], g, g, [I] * 3)
    with pytest.raises(CriterionDataError):
        CriterionData(I, [0, 1], g, g, [I])
    with pytest.raises(CriterionDataError):
        CriterionData(I, [0, 1], g, g, [I, I], scalars=[1, 0])
    with pytest.raises(CriterionDataError):
        CriterionData(I, [0, 1], [], g, [I, I])
    d = CriterionData(I, [1, 3], g, g, lambda k: I)
    assert len(d.maps) == 2


def test_window_violation():
    data = shift_data(2, 8, 6, n_generators=4)
    with pytest.raises(WindowViolationError) as info:
        check_supercyclicity_criterion(data, 1e-6)
    rep = info.value.report
    assert rep is not None and rep.window_violated
    # non-strict runs keep the report and judge at the last in-window index
    loose = check_supercyclicity_criterion(data, 1e-6, strict=False)
    assert loose.final == 4
    assert loose.records[5].window_ok is False


def test_nothing_in_window():
    base = shift_data(2, 4, 3, n_generators=4)
    data = CriterionData(base.op, [1, 2, 3], base.D1, base.D2, base.maps[1:], window=4)
    rep = check_supercyclicity_criterion(data, 1e-6, strict=False)
    assert rep.final is None and rep.exit_code == 3 and "window" in rep.failed


def test_hypercyclicity_shift_passes():
    rep = check_hypercyclicity_criterion(shift_data(2, 16, 12), 1e-3)
    assert rep.passed
    inv = rep.sequence("max_inverse_norm")
    assert inv == [2.0 ** -k for k in range(13)]
    orb = rep.sequence("max_orbit_norm")
    assert orb[:4] == [1, 2, 4, 8] and orb[4:] == [0.0] * 9


def test_hypercyclicity_unweighted_fails_clause_ii():
    rep = check_hypercyclicity_criterion(shift_data(1, 16, 12), 1e-6)
    assert rep.failed == ["(ii)"]
    assert rep.sequence("max_inverse_norm") == [1.0] * 13


def test_hypercyclicity_zero_operator_fails_clause_iii():
    s = SpaceDesc(2, 4)
    data = CriterionData(zero_op(s), range(1, 5), [basis(s, 0)], [basis(s, 0)], [identity(s)] * 4)
    rep = check_hypercyclicity_criterion(data, 1e-6)
    assert "(iii)" in rep.failed


def test_unweighted_shift_products_match_doubled_shift():
    # ||B^k x|| ||F^k y|| coincides with ||(2B)^k x|| ||(F/2)^k y||
    a = check_supercyclicity_criterion(shift_data(1, 16, 12), 1e-6).sequence("max_product")
    b = check_supercyclicity_criterion(shift_data(2, 16, 12), 1e-6).sequence("max_product")
    assert a == b


def test_decays():
    assert decays([3, 2, 1, 0.0], 3, 1e-6)
    assert not decays([3, 0, 1e-7, 1e-6 / 2], 3, 1e-6)
    assert not decays([1, 1, 1], 2, 1e-6)
    assert decays([5, 0, 0, 0, 9], 3, 1e-6)


@given(st.floats(1e-8, 1.0), st.floats(1.0, 10.0))
def test_pass_monotone_in_tolerance(tol, factor):
    data = shift_data(1.5, 10, 7)
    if check_supercyclicity_criterion(data, tol).passed:
        assert check_supercyclicity_criterion(data, tol * factor).passed


def test_report_json_shape():
    d = check_supercyclicity_criterion(shift_data(2, 6, 3), 1e-6).to_dict()
    assert d["verdict"] == "pass"
    rec = d["records"][0]
    assert {"k", "n_k", "max_product", "max_reconstruction_error", "window_ok"} <= set(rec)


# -- lifts -------------------------------------------------------------------

S2_16 = IdealDesc.schatten(2, L2_16)


def test_q1_formula():
    data = shift_data(2, 16, 12)
    lifted = lift_left(data, [coordinate_functional(L2_16, 0)], S2_16)
    B = rank_one_element(basis(L2_16, 0), coordinate_functional(L2_16, 0), S2_16)
    expected = rank_one_element(basis(L2_16, 1) * 0.5, coordinate_functional(L2_16, 0), S2_16)
    assert lifted.maps[1].act(B).allclose(expected, rtol=0)


def test_lift_left_passes_and_reconstructs():
    data = shift_data(2, 16, 12)
    Phi = [coordinate_functional(L2_16, j) for j in range(3)]
    lifted = lift_left(data, Phi, S2_16)
    rep = check_supercyclicity_criterion(lifted, 1e-6)
    assert rep.passed
    assert max(rep.sequence("max_reconstruction_error")) <= 1e-12
    assert rep.sequence("max_product") == [1.0] * 4 + [0.0] * 9


def test_lift_left_product_for_cited_pair():
    data = shift_data(2, 16, 12)
    f0 = coordinate_functional(L2_16, 0)
    A = rank_one_element(basis(L2_16, 3), f0, S2_16)
    B = rank_one_element(basis(L2_16, 0), f0, S2_16)
    L = MultOp("left", data.op, S2_16)
    seq = []
    for k in range(13):
        LA = A
        for _ in range(k):
            LA = L.act(LA)
        seq.append(ideal_norm(LA) * ideal_norm(MultOp("left", data.maps[k], S2_16).act(B)))
    assert seq == [1.0] * 4 + [0.0] * 9


def test_lift_soundness_bound():
    data = shift_data(2, 16, 12)
    base = check_supercyclicity_criterion(data, 1e-6)
    Phi = [Functional(L2_16, cgauss(np.random.default_rng(4), 16)) for _ in range(2)]
    rep = check_supercyclicity_criterion(lift_left(data, Phi, S2_16), 1e-6)
    c = max(np.linalg.norm(f.coords) for f in Phi) ** 2
    for a, b in zip(rep.sequence("max_product"), base.sequence("max_product")):
        assert a <= c * b * (1 + 1e-12)


def test_lift_left_rejects_mismatch():
    data = shift_data(2, 8, 4)
    with pytest.raises(SpaceMismatchError):
        lift_left(data, [coordinate_functional(SpaceDesc(2, 4), 0)], IdealDesc.schatten(2, SpaceDesc(2, 8)))
    with pytest.raises(CriterionDataError):
        lift_left(data, [], IdealDesc.schatten(2, SpaceDesc(2, 8)))


def test_n1_formula_for_doubled_shift():
    # T = 2B: T* = 2F, M_1 = (B/2 on the dual) kills e_0*, so N_1(e_0 (x) e_0*) = 0
    T = weighted_backward_shift(2, 16)
    M1 = 0.5 * weighted_backward_shift(1, 16)
    N1 = MultOp("right", adjoint(M1), S2_16)
    B = rank_one_element(basis(L2_16, 0), coordinate_functional(L2_16, 0), S2_16)
    out = N1.act(B)
    expected = rank_one_element(basis(L2_16, 0), M1.act(coordinate_functional(L2_16, 0)), S2_16)
    assert out.allclose(expected, rtol=0)
    assert np.all(out.matrix == 0)
    assert adjoint(T).allclose(forward_shift(2, 16), rtol=0)


def test_lift_right_mirror():
    adj = dual_shift_data(2, 16, 12)
    D = [basis(L2_16, j) for j in range(3)]
    lifted = lift_right(adj, D, S2_16)
    assert lifted.op.T.allclose(forward_shift(2, 16), rtol=0)
    rep = check_supercyclicity_criterion(lifted, 1e-6)
    assert rep.passed
    assert max(rep.sequence("max_reconstruction_error")) <= 1e-12
    # transpose mirror of the left lift
    left = check_supercyclicity_criterion(lift_left(shift_data(2, 16, 12), [coordinate_functional(L2_16, j) for j in range(3)], S2_16), 1e-6)
    assert rep.sequence("max_product") == left.sequence("max_product")


def test_lift_right_needs_functional_generators():
    with pytest.raises(TypeError):
        lift_right(shift_data(2, 8, 3), [basis(SpaceDesc(2, 8), 0)], IdealDesc.schatten(2, SpaceDesc(2, 8)))


def test_mult_op_termwise_matches_matrix(rng):
    from lindyn.ideals import FiniteRankCombo
    s = SpaceDesc(2, 5)
    ideal = IdealDesc.schatten(1, s)
    T = operator(s, cgauss(rng, 5, 5))
    combo = FiniteRankCombo(tuple((complex(rng.standard_normal()), SpaceVec(s, cgauss(rng, 5)),
                                   Functional(s, cgauss(rng, 5))) for _ in range(3)))
    for side in ("left", "right"):
        M = MultOp(side, T, ideal)
        assert np.allclose(M.act_combo(combo).matrix(), M.act(combo.element(ideal)).matrix, atol=1e-12)


# -- intertwiners --------------------------------------------------------------

def test_intertwiner_columns(rng):
    s = SpaceDesc(2, 5)
    T = operator(s, cgauss(rng, 5, 5))
    u, v = intertwiner_left(basis(s, 0), basis(s, 1))(T)
    assert np.array_equal(u.coords, T.entries[:, 0]) and np.array_equal(v.coords, T.entries[:, 1])


def test_intertwiner_dependent():
    s = SpaceDesc(2, 3)
    with pytest.raises(LinearDependenceError):
        intertwiner_left(basis(s, 0), basis(s, 0) * 2)


@given(seeds)
def test_intertwining_identities(seed):
    rng = np.random.default_rng(seed)
    s = SpaceDesc(2, 8)
    T, A = operator(s, cgauss(rng, 8, 8)), operator(s, cgauss(rng, 8, 8))
    phi = intertwiner_left(SpaceVec(s, cgauss(rng, 8)), SpaceVec(s, cgauss(rng, 8)))
    lhs = join(*phi(left_mult(T, A))).coords
    rhs = apply(direct_sum(T), join(*phi(A))).coords
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.abs(rhs).max())
    psi = intertwiner_right(Functional(s, cgauss(rng, 8)), Functional(s, cgauss(rng, 8)))
    lhs = join(*psi(right_mult(T, A))).coords
    rhs = psi.intertwined(T).act(join(*psi(A))).coords
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.abs(rhs).max())


@given(seeds)
def test_surjectivity_witnesses(seed):
    rng = np.random.default_rng(seed)
    s = SpaceDesc(2, 8)
    phi = intertwiner_left(SpaceVec(s, cgauss(rng, 8)), SpaceVec(s, cgauss(rng, 8)))
    t1, t2 = SpaceVec(s, cgauss(rng, 8)), SpaceVec(s, cgauss(rng, 8))
    u, v = phi(phi.witness(t1, t2))
    assert u.allclose(t1, atol=1e-10) and v.allclose(t2, atol=1e-10)
    psi = intertwiner_right(Functional(s, cgauss(rng, 8)), Functional(s, cgauss(rng, 8)))
    g1, g2 = Functional(s, cgauss(rng, 8)), Functional(s, cgauss(rng, 8))
    u, v = psi(psi.witness(g1, g2))
    assert u.allclose(g1, atol=1e-10) and v.allclose(g2, atol=1e-10)


def test_direct_sum_norm_by_svd(rng):
    T = operator(SpaceDesc(2, 6), cgauss(rng, 6, 6))
    blocks = np.block([[T.entries, np.zeros((6, 6))], [np.zeros((6, 6)), T.entries]])
    assert op_norm(direct_sum(T)) == pytest.approx(np.linalg.svd(blocks, compute_uv=False)[0], rel=1e-12)
