import math
from fractions import Fraction

import numpy as np
import pytest

from tocp import moments, walk
from tocp.moments import (
    ValidityError,
    box_coords,
    box_index,
    build_h,
    build_q,
    check_harmonic,
    expm_apply,
    integrate_second_moment,
    mean_xi_closed_form,
    q_norm_bound,
    second_moment_bound,
    shell_distances,
)


def test_mean_closed_form():
    assert mean_xi_closed_form(0.7, 3, 0.0) == 1.0
    assert mean_xi_closed_form(0.25, 4, 7.3) == 1.0
    assert mean_xi_closed_form(0.2, 4, 1.0) == pytest.approx(math.exp(-0.2))


def test_box_indexing_roundtrip():
    for idx in (0, 1, 37, 124):
        assert box_index(box_coords(idx, 3, 2), 2) == idx
    assert box_coords(box_index((0, 0), 4), 2, 4) == (0, 0)


def test_build_q_entries():
    d, lam, R = 2, 0.3, 3
    Q = build_q(d, lam, R)
    A = Q.matrix.toarray()
    o = Q.origin
    x = box_index((1, 1), R)
    assert A[x, x] == -4 * lam * d
    assert A[o, o] == 1 - 2 * lam * d
    assert A[o, box_index((1, 1), R)] == 2 * lam  # mixed two-step target, 2 ordered pairs
    assert A[o, box_index((2, 0), R)] == lam  # doubled step, 1 ordered pair
    assert A[o, box_index((1, 0), R)] == 2 * lam  # neighbour entry
    assert A[x, box_index((1, 2), R)] == 2 * lam


def test_build_q_rejects_small_radius():
    with pytest.raises(ValueError):
        build_q(2, 0.3, 1)


def test_row_sums_exact():
    d, lam, R = 2, 0.3, 4
    Q = build_q(d, lam, R, exact=True)
    interior = shell_distances(d, R) <= R - 1
    lamf = Fraction(lam)
    for r, cols in Q.exact_rows.items():
        if not interior[r]:
            continue
        want = 1 + 4 * lamf * d * d if r == Q.origin else Fraction(0)
        assert sum(cols.values()) == want


def test_off_diagonal_structure_is_nonnegative():
    Q = build_q(3, 0.4, 3)
    coo = Q.matrix.tocoo()
    for r, c, v in zip(coo.row, coo.col, coo.data):
        if r != c:
            assert v > 0
        else:
            assert v >= -4 * 0.4 * 3


def test_expm_identity_and_zero():
    Q = build_q(1, 0.3, 2)
    v = np.arange(5, dtype=float)
    assert np.array_equal(expm_apply(Q, v, 0.0), v)
    assert not expm_apply(Q, np.zeros(5), 1.0).any()


def test_expm_matches_dense_series():
    Q = build_q(1, 0.3, 2)
    A = Q.matrix.toarray()
    rng = np.random.default_rng(1)
    v = rng.random(5)

    def dense(t):
        acc = v.copy()
        term = v.copy()
        for k in range(1, 300):
            term = (A @ term) * (t / k)
            acc = acc + term
            if np.abs(term).max() < 1e-300:
                break
        return acc

    for t in (0.2, 1.0, 3.0):
        assert np.abs(expm_apply(Q, v, t) - dense(t)).max() < 1e-12


def test_iterated_norm_bound():
    Q = build_q(2, 0.3, 5)
    bound = q_norm_bound(Q)
    v = np.ones(Q.size)
    for n in range(1, 6):
        v = Q.matrix.dot(v)
        assert np.abs(v).max() <= bound**n


def test_expm_columns_nonnegative():
    Q = build_q(2, 0.3, 4)
    probe = np.zeros(Q.size)
    for c in range(0, Q.size, 7):
        probe[:] = 0
        probe[c] = 1.0
        for t in (0.1, 0.5, 1.0):
            assert expm_apply(Q, probe, t).min() >= -1e-10


def test_second_moment_initial_conditions():
    res = integrate_second_moment(2, 0.3, 4, [0.0])
    assert res.g0[0] == 1.0
    # slope at zero: row sums give 1 + 4 lam d^2 at the origin, 0 elsewhere
    eps = 1e-6
    Q = build_q(2, 0.3, 4)
    g_eps = expm_apply(Q, np.ones(Q.size), eps)
    slope = (g_eps - 1.0) / eps
    assert slope[Q.origin] == pytest.approx(1 + 4 * 0.3 * 4, rel=1e-4)
    interior = (shell_distances(2, 4) <= 2)
    interior[Q.origin] = False
    assert np.abs(slope[interior]).max() < 1e-4


def test_harmonic_on_constants_vanishes_off_origin():
    Q = build_q(2, 0.35, 4, exact=True)
    interior = shell_distances(2, 4) <= 3
    c = Fraction(7, 3)
    for r, cols in Q.exact_rows.items():
        if interior[r] and r != Q.origin:
            assert sum(v * c for v in cols.values()) == 0
    resid = Q.matrix.dot(np.full(Q.size, 2.5))
    mask = interior.copy()
    mask[Q.origin] = False
    assert np.abs(resid[mask]).max() < 1e-12


def test_build_h_validity_guard():
    tab3 = walk.hitting_table(3, 2, n_terms=2000)
    with pytest.raises(ValidityError):
        build_h(3, 0.5, tab3, 2)  # (d+1) F_3(e1) = 1.36 > 1
    tab5 = walk.hitting_table(5, 2, n_terms=1000)
    thr = moments.offset_threshold(5, tab5.lookup((1, 0, 0, 0, 0)))
    with pytest.raises(ValidityError):
        build_h(5, thr, tab5, 2)  # boundary rate gives offset 0, rejected


def test_build_h_values():
    tab = walk.hitting_table(5, 2, n_terms=1500)
    h = build_h(5, 0.3, tab, 2)
    f1 = tab.lookup((1, 0, 0, 0, 0))
    want_b = (4 * 5 * 0.3 * (1 - 6 * f1) - 1) / (1 + 4 * 25 * 0.3)
    assert h.b == pytest.approx(want_b)
    assert h.b > 0
    assert h.values[box_index((0,) * 5, 2)] == pytest.approx(1 + h.b)


def test_check_harmonic_and_fixed_point_small():
    d, lam, R = 5, 0.3, 3
    tab = walk.hitting_table(d, R, n_terms=1500)
    h = build_h(d, lam, tab, R)
    Q = build_q(d, lam, R)
    rep = check_harmonic(Q, h, 1)
    assert rep.max_residual < 1e-3
    assert abs(rep.row0_identity_residual) < 1e-12
    w = expm_apply(Q, h.values, 0.5)
    mask = shell_distances(d, R) <= 1
    assert np.abs(w - h.values)[mask].max() < 2e-3


def test_second_moment_bound_properties():
    tab = walk.hitting_table(5, 2, n_terms=1500)
    h = build_h(5, 0.3, tab, 2)
    bound = second_moment_bound(h)
    assert bound == pytest.approx((1 + h.b) / h.b)
    assert bound >= 1
    h.b = 1e9
    assert second_moment_bound(h) == pytest.approx(1.0, abs=1e-8)
