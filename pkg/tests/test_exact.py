import numpy as np
import pytest

from xxzent.errors import DomainError, InconsistentMomentsError
from xxzent.exact import (CollectiveMoments, brute_force_moments,
                          brute_force_pair_density, concurrence,
                          eof_from_concurrence, exact_moments,
                          exact_pair_state, far_field_limit_temperature,
                          ground_state_moments, ground_state_pair_state,
                          large_field_expansion, pair_state,
                          thermal_observables, wootters_concurrence,
                          zero_T_concurrence_approx)
from xxzent.model import ModelParams, crossing_fields


def random_params(rng, n_max=8):
    return ModelParams(n=int(rng.integers(2, n_max + 1)), v=1.0,
                       gamma=float(rng.uniform(0.0, 1.0)),
                       b=float(rng.uniform(-1.5, 1.5)),
                       T=float(rng.uniform(0.05, 2.0)))


# ---------------------------------------------------------------- exact sums

def test_infinite_temperature_limit_n2():
    p = ModelParams(n=2, v=1.0, gamma=1.0, b=0.0, T=1e7)
    m = exact_moments(p)
    assert m.sz == pytest.approx(0.0, abs=1e-6)
    assert m.sz2 == pytest.approx(0.5, abs=1e-6)
    assert m.s2 == pytest.approx(1.5, abs=1e-6)


def test_sz_vanishes_at_zero_field():
    for n, T in ((5, 0.3), (30, 0.08), (101, 1.0)):
        m = exact_moments(ModelParams(n=n, v=1.0, gamma=0.7, b=0.0, T=T))
        assert m.sz == pytest.approx(0.0, abs=1e-10)


def test_exact_matches_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(30):
        p = random_params(rng)
        a = exact_moments(p)
        b = brute_force_moments(p)
        for x, y in ((a.logZ, b.logZ), (a.sz, b.sz), (a.sz2, b.sz2),
                     (a.s2, b.s2)):
            assert x == pytest.approx(y, rel=1e-11, abs=1e-12)


def test_derivative_identities_against_finite_differences():
    # <S_z> = -T dlnZ/db ; <S_z^2> = T^2 d2lnZ/db2 + <S_z>^2 ;
    # <S^2> = n T dlnZ/dv + gamma <S_z^2> + n(3-gamma)/4 ;
    # and with E0 kept, <S_z^2> = n/4 - (n T / v) dlnZ/dgamma.
    rng = np.random.default_rng(5)
    for _ in range(25):
        p = ModelParams(n=int(rng.integers(2, 30)), v=1.0,
                        gamma=float(rng.uniform(0.0, 0.95)),
                        b=float(rng.uniform(-1.2, 1.2)),
                        T=float(rng.uniform(0.1, 2.0)))
        m = exact_moments(p)
        h = 1e-5 * max(1.0, abs(p.b))
        dz_db = (exact_moments(p.replace(b=p.b + h)).logZ
                 - exact_moments(p.replace(b=p.b - h)).logZ) / (2 * h)
        d2z = (exact_moments(p.replace(b=p.b + h)).logZ - 2 * m.logZ
               + exact_moments(p.replace(b=p.b - h)).logZ) / h ** 2
        hv = 1e-5
        dz_dv = (exact_moments(p.replace(v=1.0 + hv)).logZ
                 - exact_moments(p.replace(v=1.0 - hv)).logZ) / (2 * hv)
        hg = 1e-5
        dz_dg = (exact_moments(p.replace(gamma=p.gamma + hg)).logZ
                 - exact_moments(p.replace(gamma=p.gamma - hg)).logZ) / (2 * hg)
        assert m.sz == pytest.approx(-p.T * dz_db, abs=1e-6)
        assert m.sz2 == pytest.approx(p.T ** 2 * d2z + m.sz ** 2, abs=1e-4)
        assert m.s2 == pytest.approx(
            p.n * p.T * dz_dv + p.gamma * m.sz2 + p.n * (3 - p.gamma) / 4,
            abs=1e-5 * p.n)
        assert m.sz2 == pytest.approx(
            p.n / 4 - (p.n * p.T / p.v) * dz_dg, abs=1e-5 * p.n)


# ------------------------------------------------------------- pair state

def test_pair_state_aligned():
    # fully aligned M = -n/2: p- = 1, everything else 0, separable
    n = 12
    m = CollectiveMoments(sz=-6.0, sz2=36.0, s2=6.0 * 7.0)
    ps = pair_state(m, n)
    assert ps.p_minus == pytest.approx(1.0, abs=1e-12)
    assert ps.p_plus == pytest.approx(0.0, abs=1e-12)
    assert ps.p == pytest.approx(0.0, abs=1e-12)
    assert ps.alpha == pytest.approx(0.0, abs=1e-12)
    assert concurrence(ps, n).concurrence == 0.0


def test_pair_state_singlet():
    # n = 2 singlet: alpha = -1/2, p = 1/2, p+- = 0 (explicit density oracle)
    m = CollectiveMoments(sz=0.0, sz2=0.0, s2=0.0)
    ps = pair_state(m, 2)
    assert ps.alpha == pytest.approx(-0.5, abs=1e-15)
    assert ps.p == pytest.approx(0.5, abs=1e-15)
    assert ps.p_plus == pytest.approx(0.0, abs=1e-15)
    assert ps.p_minus == pytest.approx(0.0, abs=1e-15)


def test_pair_state_w_state_alpha():
    # sharp S = n/2, M = n/2 - 1 gives alpha = 1/n exactly
    for n in (4, 9, 30):
        half = n / 2
        m = CollectiveMoments(sz=half - 1, sz2=(half - 1) ** 2,
                              s2=half * (half + 1))
        assert pair_state(m, n).alpha == pytest.approx(1.0 / n, rel=1e-12)


def test_pair_state_psd_guard():
    bad = CollectiveMoments(sz=0.0, sz2=3.0, s2=1.0)   # alpha << -p
    with pytest.raises(InconsistentMomentsError):
        pair_state(bad, 4)


def test_concurrence_bounds_and_eof():
    rng = np.random.default_rng(2)
    for _ in range(100):
        p = random_params(rng)
        res = concurrence(exact_pair_state(p), p.n)
        assert 0.0 <= res.concurrence <= 2.0 / p.n + 1e-12
        assert res.eof >= 0.0
        assert (res.eof == 0.0) == (res.concurrence == 0.0)
    # EoF monotone in C
    cs = np.linspace(0, 1, 50)
    es = [eof_from_concurrence(c) for c in cs]
    assert all(b >= a - 1e-15 for a, b in zip(es, es[1:]))


def test_w_state_concurrence_is_two_over_n():
    for n in (4, 10, 21):
        half = n / 2
        m = CollectiveMoments(sz=half - 1, sz2=(half - 1) ** 2,
                              s2=half * (half + 1))
        res = concurrence(pair_state(m, n), n)
        assert res.concurrence == pytest.approx(2.0 / n, rel=1e-12)


def test_ground_sector_concurrence_near_inverse_n():
    # S = n/2, M = 0 sharp state: C = 1/(n-1) + O((n-1)^-2)
    for n in (10, 40, 200):
        half = n / 2
        m = CollectiveMoments(sz=0.0, sz2=0.0, s2=half * (half + 1))
        res = concurrence(pair_state(m, n), n)
        assert res.concurrence == pytest.approx(1.0 / (n - 1),
                                                abs=2.0 / (n - 1) ** 2)


# ---------------------------------------------------------------- T = 0 path

def test_ground_state_moments_b0_even_n():
    m = ground_state_moments(ModelParams(n=8, v=1.0, gamma=1.0, b=0.0))
    assert m.sz == pytest.approx(0.0)
    assert m.s2 == pytest.approx(4 * 5)


def test_ground_state_aligned_beyond_bc():
    p = ModelParams(n=20, v=1.0, gamma=1.0, b=1.0)   # b > b_c = 0.95
    m = ground_state_moments(p)
    assert m.sz == pytest.approx(-10.0)
    assert m.sz2 == pytest.approx(100.0)
    res = concurrence(ground_state_pair_state(p), 20)
    assert res.concurrence == 0.0


def test_crossing_field_fluctuation_and_dip():
    cf = crossing_fields(ModelParams(n=20, v=1.0, gamma=1.0))
    for b in [x for x in cf.fields if x > 0]:
        p = ModelParams(n=20, v=1.0, gamma=1.0, b=b)
        m = ground_state_moments(p)
        assert m.sz2 - m.sz ** 2 == pytest.approx(0.25, abs=1e-10)
        res = concurrence(ground_state_pair_state(p), 20)
        assert 20 * res.concurrence == pytest.approx(1.0, abs=1e-12)


def test_gamma_nonpositive_no_entanglement_at_t0():
    for gamma in (-0.5, 0.0):
        for b in (0.3, 1.0, 2.5):
            p = ModelParams(n=10, v=1.0, gamma=gamma, b=b)
            res = concurrence(ground_state_pair_state(p), 10)
            assert res.concurrence == 0.0


# --------------------------------------------------------------- brute force

def test_brute_force_caps_n():
    with pytest.raises(DomainError):
        brute_force_moments(ModelParams(n=15, v=1.0, T=0.5))


def test_brute_force_pair_density_structure():
    # symmetry of H zeroes all elements outside the symmetric-pair pattern
    p = ModelParams(n=6, v=1.0, gamma=0.8, b=0.0, T=0.4)
    rho2 = brute_force_pair_density(p)
    pattern = np.array([
        [1, 0, 0, 0],
        [0, 1, 1, 0],
        [0, 1, 1, 0],
        [0, 0, 0, 1],
    ], dtype=bool)
    assert np.abs(rho2[~pattern]).max() < 1e-12
    assert rho2[1, 1] == pytest.approx(rho2[2, 2], abs=1e-12)
    assert np.trace(rho2) == pytest.approx(1.0, abs=1e-12)


def test_brute_force_concurrence_routes_agree():
    # Wootters on the partial-trace rho2 vs the closed pair-state formula
    rng = np.random.default_rng(23)
    for _ in range(15):
        p = random_params(rng, n_max=7)
        c_wootters = wootters_concurrence(brute_force_pair_density(p))
        c_formula = concurrence(exact_pair_state(p), p.n).concurrence
        assert c_wootters == pytest.approx(c_formula, abs=1e-10)


def test_direct_pair_state_matches_moment_route():
    rng = np.random.default_rng(31)
    for _ in range(20):
        p = random_params(rng, n_max=10)
        moments, direct = thermal_observables(p)
        via_moments = pair_state(moments, p.n)
        assert direct.p_plus == pytest.approx(via_moments.p_plus, abs=1e-12)
        assert direct.p_minus == pytest.approx(via_moments.p_minus, abs=1e-12)
        assert direct.alpha == pytest.approx(via_moments.alpha, abs=1e-12)


# --------------------------------------------------------------- asymptotics

def test_far_field_limit_temperature_value():
    assert far_field_limit_temperature(20, 1.0, 1.0) == pytest.approx(
        2.0 / (20 * np.log(40 / 19)), rel=1e-14)
    assert far_field_limit_temperature(20, 1.0, 1.0) == pytest.approx(
        0.134, abs=5e-4)


def test_large_field_expansion_positive_at_low_T():
    res = large_field_expansion(ModelParams(n=20, v=1.0, gamma=1.0, b=2.0,
                                            T=0.02))
    assert res.status == "ok"
    assert res.concurrence > 0.0


def test_large_field_expansion_precondition():
    res = large_field_expansion(ModelParams(n=20, v=1.0, gamma=1.0, b=1.0,
                                            T=0.2))
    assert res.status == "not-applicable"


def test_large_field_expansion_tracks_exact():
    # deep in the aligned region the expansion should be a few-percent match
    for T in (0.05, 0.1):
        p = ModelParams(n=20, v=1.0, gamma=1.0, b=2.0, T=T)
        approx = large_field_expansion(p).concurrence
        ex = concurrence(exact_pair_state(p), 20).concurrence
        assert approx == pytest.approx(ex, rel=0.1)


def test_zero_T_concurrence_approx_values():
    assert zero_T_concurrence_approx(17, 0.0) == pytest.approx(1.0 / 16)
    # n=20, m=1/4: 1/19 + (0.25/0.75)/361
    assert zero_T_concurrence_approx(20, 0.25) == pytest.approx(
        1 / 19 + (1 / 3) / 361, rel=1e-12)
    assert zero_T_concurrence_approx(20, 0.25) == pytest.approx(0.05356,
                                                                abs=5e-5)
    with pytest.raises(DomainError):
        zero_T_concurrence_approx(20, 0.46)


def test_zero_T_approx_matches_ground_state_chain():
    # mid-plateau ground state at M = -n/4 vs the stepwise expansion
    n = 40
    half = n / 2
    M = -n // 4
    m = CollectiveMoments(sz=float(M), sz2=float(M * M), s2=half * (half + 1))
    chain = concurrence(pair_state(m, n), n).concurrence
    approx = zero_T_concurrence_approx(n, M / n)
    assert chain == pytest.approx(approx, abs=5.0 / (n - 1) ** 2)


def test_field_symmetry_of_concurrence():
    rng = np.random.default_rng(4)
    for _ in range(10):
        p = random_params(rng, n_max=12)
        cp = concurrence(exact_pair_state(p), p.n).concurrence
        cm = concurrence(exact_pair_state(p.replace(b=-p.b)), p.n).concurrence
        assert cp == pytest.approx(cm, abs=1e-12)
