import numpy as np
import pytest

from fluxlattice import (ConsistencyError, DomainError, RationalFlux,
                         TorusSizeError, approximate_irrational, best_convergent,
                         bloch_matrix, chambers_defect, chambers_polynomial,
                         harper_spectrum, make_rational, torus_oracle)
from oracles import dense_kgrid_bands, symmetric_gauge_torus

SQ3 = np.sqrt(3.0)
THIRD_FLUX_BANDS = [(-1.0 - SQ3, -2.0), (1.0 - SQ3, SQ3 - 1.0), (2.0, 1.0 + SQ3)]


def test_rational_flux_validation():
    with pytest.raises(DomainError):
        RationalFlux(2, 4)
    with pytest.raises(DomainError):
        RationalFlux(1, 0)
    assert make_rational(2, 4) == RationalFlux(1, 2)
    assert make_rational(3, -6) == RationalFlux(-1, 2)
    assert RationalFlux(4, 3).theta == pytest.approx(4 / 3)


def test_bloch_integer_flux_peak():
    h = bloch_matrix(RationalFlux(0, 1), 1.0, 0.0, 0.0)
    assert h.shape == (1, 1)
    assert h[0, 0] == pytest.approx(4.0)


def test_bloch_half_flux():
    h = bloch_matrix(RationalFlux(1, 2), 1.0, 0.0, 0.0)
    assert np.allclose(h, [[2.0, 2.0], [2.0, -2.0]], atol=1e-14)
    assert np.allclose(np.linalg.eigvalsh(h), [-2 * np.sqrt(2), 2 * np.sqrt(2)],
                       atol=1e-12)


def test_bloch_hermitian_exactly():
    rng = np.random.default_rng(3)
    for _ in range(25):
        q = int(rng.integers(1, 9))
        p = int(rng.integers(0, q))
        if np.gcd(p, q) != 1:
            continue
        beta = float(rng.uniform(0.3, 2.5))
        k1, k2 = rng.uniform(0.0, 2 * np.pi, size=2)
        h = bloch_matrix(RationalFlux(p, q), beta, float(k1), float(k2))
        assert np.array_equal(h, h.conj().T)


def test_chambers_half_flux():
    poly = chambers_polynomial(RationalFlux(1, 2), 1.0)
    assert np.allclose(poly.coef, [-4.0, 0.0, 1.0], atol=1e-12)


def test_chambers_integer_flux():
    poly = chambers_polynomial(RationalFlux(0, 1), 1.0)
    assert np.allclose(poly.coef, [0.0, 1.0], atol=1e-12)


def test_chambers_third_flux():
    poly = chambers_polynomial(RationalFlux(1, 3), 1.0)
    assert np.allclose(poly.coef, [0.0, -6.0, 0.0, 1.0], atol=1e-12)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_chambers_independence(beta):
    for q in range(1, 9):
        for p in range(q):
            if np.gcd(p, q) == 1:
                assert chambers_defect(RationalFlux(p, q), beta) < 1e-9


def test_harper_integer_flux():
    bands = harper_spectrum(RationalFlux(0, 1), 1.0).bands
    assert len(bands) == 1
    assert bands[0][0] == pytest.approx(-4.0, abs=1e-12)
    assert bands[0][1] == pytest.approx(4.0, abs=1e-12)


def test_harper_half_flux_touching():
    bands = harper_spectrum(RationalFlux(1, 2), 1.0).bands
    assert len(bands) == 2
    assert bands[0][0] == pytest.approx(-2 * np.sqrt(2), abs=1e-9)
    assert bands[0][1] == pytest.approx(0.0, abs=1e-9)
    assert bands[1][0] == pytest.approx(0.0, abs=1e-9)
    assert bands[1][1] == pytest.approx(2 * np.sqrt(2), abs=1e-9)


def test_harper_third_flux_edges():
    bands = harper_spectrum(RationalFlux(1, 3), 1.0).bands
    for (lo, hi), (elo, ehi) in zip(bands, THIRD_FLUX_BANDS):
        assert lo == pytest.approx(elo, abs=1e-9)
        assert hi == pytest.approx(ehi, abs=1e-9)


@pytest.mark.parametrize("p,q,beta", [(1, 3, 1.0), (2, 5, 1.0), (1, 4, 1.7)])
def test_harper_vs_dense_kgrid(p, q, beta):
    bands = harper_spectrum(RationalFlux(p, q), beta).bands
    grid = dense_kgrid_bands(p, q, beta, nk=200)
    for (lo, hi), (glo, ghi) in zip(bands, grid):
        # the grid underestimates band reach by O(grid step^2)
        assert glo >= lo - 1e-9 and ghi <= hi + 1e-9
        assert abs(glo - lo) < 1e-3 and abs(ghi - hi) < 1e-3


def test_harper_third_flux_vs_fine_grid():
    # spec-pinned cross-check: 200x200 momentum grid, deviation < 1e-6
    bands = harper_spectrum(RationalFlux(1, 3), 1.0).bands
    grid = dense_kgrid_bands(1, 3, 1.0, nk=200)
    worst = max(max(abs(lo - glo), abs(hi - ghi))
                for (lo, hi), (glo, ghi) in zip(bands, grid))
    assert worst < 1e-6


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_norm_bound_strict_for_noninteger(beta):
    bound = 2.0 * (1.0 + beta**2)
    for q in range(2, 13):
        for p in range(1, q):
            if np.gcd(p, q) == 1:
                bands = harper_spectrum(RationalFlux(p, q), beta)
                assert bands.max_abs_edge() < bound - 1e-6


def test_band_count_at_most_q():
    for q in range(1, 13):
        for p in range(q):
            if np.gcd(p, q) == 1:
                assert len(harper_spectrum(RationalFlux(p, q), 1.0).bands) <= q


def test_flux_periodicity_bands():
    for (p, q) in [(0, 1), (1, 2), (1, 3), (2, 5), (3, 7)]:
        a = harper_spectrum(RationalFlux(p, q), 1.3).edges
        b = harper_spectrum(RationalFlux(p + q, q), 1.3).edges
        assert np.max(np.abs(a - b)) < 1e-9


def test_flux_reflection():
    for (p, q) in [(1, 2), (1, 3), (2, 5)]:
        a = harper_spectrum(RationalFlux(p, q), 0.8).edges
        b = harper_spectrum(RationalFlux(-p, q), 0.8).edges
        assert np.max(np.abs(a - b)) < 1e-9


def test_band_reflection_symmetry():
    for (p, q, beta) in [(1, 2, 1.0), (1, 3, 1.4), (2, 5, 0.6), (3, 8, 2.0)]:
        bands = harper_spectrum(RationalFlux(p, q), beta).bands
        flipped = sorted((-hi, -lo) for lo, hi in bands)
        for (lo, hi), (flo, fhi) in zip(bands, flipped):
            assert lo == pytest.approx(flo, abs=1e-9)
            assert hi == pytest.approx(fhi, abs=1e-9)


def test_torus_integer_flux_exact():
    evals = torus_oracle(RationalFlux(0, 1), 1.0, 4)
    expected = np.sort([2 * np.cos(2 * np.pi * a / 4) + 2 * np.cos(2 * np.pi * b / 4)
                        for a in range(4) for b in range(4)])
    assert np.allclose(evals, expected, atol=1e-12)


def test_torus_half_flux_range():
    evals = torus_oracle(RationalFlux(1, 2), 1.0, 3)  # N = 6, N*theta odd
    assert len(evals) == 36
    assert evals[0] >= -2 * np.sqrt(2) - 1e-9
    assert evals[-1] <= 2 * np.sqrt(2) + 1e-9


@pytest.mark.parametrize("p,q,beta,reps", [(1, 2, 1.0, 5), (1, 3, 2.0, 2),
                                           (2, 5, 1.0, 3)])
def test_torus_containment(p, q, beta, reps):
    bands = harper_spectrum(RationalFlux(p, q), beta)
    for e in torus_oracle(RationalFlux(p, q), beta, reps):
        assert bands.contains(float(e), tol=1e-9)


def test_torus_matches_symmetric_gauge():
    # the paper's symmetric-gauge phases wrap consistently when N theta is
    # even; there both gauges must have identical spectra
    for (p, q, reps) in [(1, 2, 4), (1, 3, 2), (2, 5, 1)]:
        n = reps * q
        if (n * p) % (2 * q) != 0:
            continue
        landau = torus_oracle(RationalFlux(p, q), 1.0, reps)
        sym = symmetric_gauge_torus(p, q, 1.0, n)
        assert np.max(np.abs(landau - sym)) < 1e-10


def test_torus_size_guard():
    with pytest.raises(TorusSizeError):
        torus_oracle(RationalFlux(0, 1), 1.0, 65)


def test_convergents_golden_mean():
    theta = (np.sqrt(5.0) - 1.0) / 2.0
    got = [(f.p, f.q) for f in approximate_irrational(theta, 13)]
    assert got == [(1, 1), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13)]


def test_convergents_half():
    got = [(f.p, f.q) for f in approximate_irrational(0.5, 10)]
    assert got == [(1, 2)]


def test_convergents_pi_minus_3():
    got = [(f.p, f.q) for f in approximate_irrational(np.pi - 3.0, 120)]
    assert got == [(1, 7), (15, 106), (16, 113)]


def test_convergents_integer():
    assert [(f.p, f.q) for f in approximate_irrational(3.0, 10)] == [(3, 1)]


def test_convergents_nonfinite():
    with pytest.raises(DomainError):
        approximate_irrational(float("nan"), 10)


def test_best_convergent_decimal():
    assert best_convergent(0.4142, 50) == RationalFlux(12, 29)
