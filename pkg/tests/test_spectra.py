import itertools
import math

import numpy as np
import pytest

import pcfractal as pf


def skew_interval(interval, mu=(0.25, 0.75)):
    mw = pf.MeasureWeights(mu=np.array(mu))
    se = pf.solve_spectral_exponent(interval.hs, mw)
    return mw, se


def test_spectral_exponents(interval, gasket):
    assert abs(interval.se.d_S - 1.0) <= 1e-12
    assert abs(gasket.se.d_S - 2 * math.log(3) / math.log(5)) <= 1e-12


def test_lattice_flags(interval, gasket):
    assert interval.se.lattice
    assert gasket.se.lattice
    _, se = skew_interval(interval)
    assert not se.lattice


def test_incompatible_measure_rejected(interval):
    # mu_i r_i < 1 always holds for r < 1, so force failure via bad weights
    with pytest.raises(pf.SpectraError):
        pf.MeasureWeights(mu=np.array([0.5, 0.6]))
    with pytest.raises(pf.SpectraError):
        pf.MeasureWeights(mu=np.array([-0.5, 1.5]))


def test_kl_weights(interval, gasket):
    assert np.allclose(pf.kl_weights(gasket.se), [1 / 3] * 3, atol=1e-12)
    nu = pf.kl_weights(interval.se)
    assert abs(nu.sum() - 1.0) <= 1e-12


def test_tent_integrals_uniform(interval, gasket):
    assert np.allclose(
        pf.tent_integrals(interval.S, interval.hs, interval.mw), [0.5, 0.5]
    )
    assert np.allclose(
        pf.tent_integrals(gasket.S, gasket.hs, gasket.mw), [1 / 3] * 3
    )


def test_tent_integrals_vs_quadrature_oracle(interval):
    # brute-force: approximate the measure by depth-12 cell masses placed at
    # cell midpoints and integrate the two affine tents h1 = 1-x, h2 = x
    mw, _ = skew_interval(interval)
    I = pf.tent_integrals(interval.S, interval.hs, mw)
    depth = 12
    q = np.zeros(2)
    for w in itertools.product((0, 1), repeat=depth):
        mass = np.prod([mw.mu[c] for c in w])
        x = 0.0
        for c in reversed(w):
            x = x / 2 + c / 2
        x += 2.0 ** -(depth + 1)  # cell midpoint
        q += mass * np.array([1.0 - x, x])
    assert np.allclose(I, q, atol=1e-3)


def test_mass_vector_sums_to_one(interval, gasket):
    # the tents form a partition of unity, so lumped masses total the measure
    for bundle, m in [(interval, 5), (gasket, 3)]:
        mass = pf.mass_vector(bundle.S, bundle.hs, bundle.mw, m)
        assert abs(mass.sum() - 1.0) <= 1e-12
        assert np.all(mass > 0)


def test_eigensolve_mass_orthonormal(gasket):
    sd = gasket.sd(3)
    M = np.diag(sd.mass[sd.support])
    G = sd.vectors.T @ M @ sd.vectors
    assert np.allclose(G, np.eye(G.shape[0]), atol=1e-9)


def test_neumann_has_constant_ground_state(gasket):
    sd = gasket.sd(3, bc="neumann")
    assert abs(sd.eigenvalues[0]) <= 1e-8
    v = sd.vectors[:, 0]
    assert np.std(v) <= 1e-6 * np.abs(v).max()


def test_eigensolve_rejects_bad_input(gasket):
    ef = gasket.ef(2)
    mass = pf.mass_vector(gasket.S, gasket.hs, gasket.mw, 2, cm=ef.complex)
    with pytest.raises(pf.SpectraError):
        pf.eigensolve(ef, mass, "robin")
    with pytest.raises(pf.SpectraError):
        pf.eigensolve(ef, 0.0 * mass, "dirichlet")


def test_interval_dirichlet_eigenvalues(interval):
    sd = interval.sd(6)
    for k in (1, 2, 3):
        exact = (k * math.pi) ** 2
        assert abs(sd.eigenvalues[k - 1] - exact) <= 0.02 * exact


def test_gasket_ground_eigenvalue_converges(gasket):
    lam = [gasket.sd(m).eigenvalues[0] for m in (2, 3, 4)]
    assert abs(lam[2] - lam[1]) < abs(lam[1] - lam[0])


def test_counting_function_oracle(gasket):
    sd = gasket.sd(3)
    rng = np.random.default_rng(3)
    for x in rng.uniform(-10, sd.eigenvalues[-1] * 1.1, size=50):
        assert pf.counting_function(sd, x) == int(np.sum(sd.eigenvalues <= x))


def test_weyl_fit_interval(interval):
    fit = pf.weyl_fit(interval.sd(7), interval.se)
    assert fit["pass"]
    assert abs(fit["slope"] - 0.5) <= 0.05
    lo, hi = fit["ratio_band"]
    assert 0 < lo <= hi


def test_weyl_fit_needs_enough_eigenvalues(interval):
    with pytest.raises(pf.SpectraError):
        pf.weyl_fit(interval.sd(4), interval.se)


def test_green_diagonal_matches_direct_inverse(gasket):
    # independent oracle: the Green kernel is the inverse of the interior
    # energy block, no mass matrix involved
    sd = gasket.sd(3)
    g, sup_g = pf.green_diagonal(sd)
    H = gasket.ef(3).H
    Hii = H[np.ix_(sd.support, sd.support)]
    direct = np.diag(np.linalg.inv(Hii))
    assert np.allclose(g[sd.support], direct, rtol=1e-9)
    assert abs(sup_g - direct.max()) <= 1e-9 * sup_g


def test_green_requires_dirichlet(gasket):
    with pytest.raises(pf.SpectraError):
        pf.green_diagonal(gasket.sd(3, bc="neumann"))


def test_heat_kernel_semigroup(gasket):
    sd = gasket.sd(3)
    M = np.diag(sd.mass[sd.support])
    P_s = pf.heat_kernel_matrix(sd, 0.003)
    P_t = pf.heat_kernel_matrix(sd, 0.005)
    P_st = pf.heat_kernel_matrix(sd, 0.008)
    assert np.allclose(P_s @ M @ P_t, P_st, atol=1e-8 * np.abs(P_st).max())
    x, y = 1, 4
    assert abs(pf.heat_kernel(sd, 0.005, x, y) - P_t[x, y]) <= 1e-12


def test_heat_kernel_requires_positive_time(gasket):
    with pytest.raises(pf.SpectraError):
        pf.heat_kernel_matrix(gasket.sd(3), 0.0)


def test_heat_bound_check(interval, gasket):
    for bundle, m in [(interval, 6), (gasket, 4)]:
        rep = pf.heat_bound_check(bundle.sd(m), bundle.se)
        assert rep["pass"], rep


def test_potential_kernel(gasket):
    sd = gasket.sd(4)
    rep = pf.potential_kernel(sd, gasket.se, 1.8)
    assert rep["pass"], rep
    assert rep["max_diag"] > 0
    with pytest.raises(pf.SpectraError):
        pf.potential_kernel(sd, gasket.se, gasket.se.d_S)  # p must exceed d_S


def test_spectral_volume_refuses_lattice(interval):
    with pytest.raises(pf.SpectraError):
        pf.spectral_volume_estimate(interval.sd(6), interval.se)


def test_spectral_volume_level_consistency(interval):
    # non-lattice skew interval: estimates at consecutive levels agree to
    # within the reported truncation bands
    mw, se = skew_interval(interval)
    results = []
    for m in (7, 8):
        ef = interval.ef(m)
        mass = pf.mass_vector(interval.S, interval.hs, mw, m, cm=ef.complex)
        sd = pf.eigensolve(ef, mass, "dirichlet")
        results.append(pf.spectral_volume_estimate(sd, se))
    (v7, b7), (v8, b8) = results
    assert v7 > 0 and v8 > 0
    assert abs(v8 - v7) <= b7 + b8 + 0.05 * v8
