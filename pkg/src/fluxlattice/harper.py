"""Spectrum of the discrete magnetic Laplacian M(theta, beta) on Z^2.

M acts as

    (M g)_{m,n} = e^{i pi n theta} g_{m+1,n} + e^{-i pi n theta} g_{m-1,n}
                  + beta^2 (e^{-i pi m theta} g_{m,n+1} + e^{i pi m theta} g_{m,n-1}),

a Harper-type operator with flux 2*pi*theta per plaquette (the phase sum
around one cell is -2*pi*theta).  For rational theta = p/q the Landau-gauge
Bloch reduction gives the q x q fiber

    H(k1,k2)_{jj}    = 2 beta^2 cos(2 pi theta j + k2)
    H(k1,k2)_{j,j+1} = e^{i k1},  H(k1,k2)_{j+1,j} = e^{-i k1}   (indices mod q),

and the Chambers relation states that

    P(E) = det(E I - H(k1,k2)) + 2 cos(q k1) + 2 beta^{2q} cos(q k2)

is independent of momentum.  The spectrum is P^{-1}([-L, L]) with
L = 2 + 2 beta^{2q}: exactly q closed bands (touching allowed) whose edges
are the eigenvalues of H at the extremal momenta (0,0) and (pi/q, pi/q).

The Chambers pipeline runs in extended precision (numpy longdouble): in plain
float64 the roundoff of an 8x8 determinant already exceeds the 1e-9
k-independence budget at beta = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConsistencyError, DomainError, TorusSizeError

_LD = np.longdouble
_CLD = np.clongdouble
_PI_LD = np.arccos(_LD(-1.0))  # pi beyond float64 precision
TORUS_DIM_GUARD = 4096         # refuse N^2 above this (N^2 x N^2 dense matrix)


@dataclass(frozen=True)
class RationalFlux:
    """Reduced fraction theta = p/q with q >= 1; p is not reduced mod q."""

    p: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise DomainError(f"flux denominator must be >= 1, got {self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise DomainError(f"flux {self.p}/{self.q} is not a reduced fraction")

    @property
    def theta(self) -> float:
        return self.p / self.q

    @property
    def is_integer(self) -> bool:
        return self.q == 1

    def __str__(self):
        return f"{self.p}/{self.q}"


def make_rational(p: int, q: int) -> RationalFlux:
    """Reduce p/q and normalize the denominator sign."""
    if q == 0:
        raise DomainError("flux denominator must be nonzero")
    if q < 0:
        p, q = -p, -q
    g = math.gcd(p, q)
    return RationalFlux(p // g, q // g)


@dataclass(frozen=True)
class HarperBands:
    """Ordered band intervals of M(theta, beta) for rational flux."""

    flux: RationalFlux
    beta: float
    bands: tuple[tuple[float, float], ...]

    @property
    def edges(self) -> np.ndarray:
        return np.asarray([e for band in self.bands for e in band])

    def max_abs_edge(self) -> float:
        return float(np.max(np.abs(self.edges)))

    def contains(self, e: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= e <= hi + tol for lo, hi in self.bands)


def _fiber(p: int, q: int, beta, k1, k2, dtype=np.complex128) -> np.ndarray:
    rdtype = np.longdouble if dtype == _CLD else np.float64
    two_pi = 2.0 * (_PI_LD if dtype == _CLD else np.pi)
    h = np.zeros((q, q), dtype=dtype)
    diag_amp = rdtype(2.0) * rdtype(beta) ** 2
    e = np.exp(1j * rdtype(k1))
    for j in range(q):
        # (p*j) mod q keeps angles in [0, 2 pi) and makes flux 1-periodicity exact
        h[j, j] += diag_amp * np.cos(two_pi * rdtype((p * j) % q) / rdtype(q) + rdtype(k2))
        h[j, (j + 1) % q] += e
        h[(j + 1) % q, j] += e.conjugate()
    return h


def bloch_matrix(f: RationalFlux, beta: float, k1: float, k2: float) -> np.ndarray:
    """The q x q Hermitian Bloch fiber H(k1, k2); for q = 1 the single entry is
    2 cos(k1) + 2 beta^2 cos(k2), for q = 2 wrap and direct hop add to 2 cos(k1)."""
    return _fiber(f.p, f.q, beta, k1, k2)


def _det_cld(a: np.ndarray) -> np.clongdouble:
    """Determinant by LU with partial pivoting in complex longdouble."""
    a = a.astype(_CLD, copy=True)
    n = a.shape[0]
    det = _CLD(1.0)
    for col in range(n - 1):
        piv = int(np.argmax(np.abs(a[col:, col]))) + col
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            det = -det
        d = a[col, col]
        if d == 0:
            return _CLD(0.0)
        det = det * d
        a[col + 1:, col + 1:] -= np.outer(a[col + 1:, col] / d, a[col, col + 1:])
    return det * a[n - 1, n - 1]


def _polyval_ld(coeffs_desc: np.ndarray, x):
    out = x * _LD(0.0)
    for c in coeffs_desc:
        out = out * x + c
    return out


@lru_cache(maxsize=256)
def _chambers_ld(p: int, q: int, beta: float) -> np.ndarray:
    """Descending longdouble coefficients of P(E) = det(E I - H(ref)) at the
    reference momentum (pi/2q, pi/2q), where both cosine terms vanish."""
    ref = _PI_LD / (2 * q)
    href = _fiber(p, q, beta, ref, ref, dtype=_CLD)
    bound = _LD(2.0) + _LD(2.0) * _LD(beta) ** 2
    jj = np.arange(q + 1)
    nodes = bound * np.cos(_PI_LD * (2 * jj.astype(_LD) + 1) / (2 * (q + 1)))
    eye = np.eye(q, dtype=_CLD)
    vals = np.array([np.real(_det_cld(node * eye - href)) for node in nodes], dtype=_LD)
    # Vandermonde solve, descending powers
    vander = np.vander(nodes, q + 1).astype(_LD)
    coeffs = _gauss_solve_ld(vander, vals)
    _check_chambers(p, q, beta, coeffs)
    return coeffs


def _gauss_solve_ld(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = a.astype(_LD, copy=True)
    b = b.astype(_LD, copy=True)
    n = a.shape[0]
    for col in range(n):
        piv = int(np.argmax(np.abs(a[col:, col]))) + col
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        d = a[col, col]
        factors = a[col + 1:, col] / d
        a[col + 1:, col:] -= np.outer(factors, a[col, col:])
        b[col + 1:] -= factors * b[col]
    x = np.zeros(n, dtype=_LD)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - np.dot(a[row, row + 1:], x[row + 1:])) / a[row, row]
    return x


def _check_chambers(p: int, q: int, beta: float, coeffs: np.ndarray) -> None:
    """Spot-check momentum independence at construction time."""
    beta_ld = _LD(beta)
    bound = float(2 + 2 * beta_ld**2)
    level = _LD(2.0) * beta_ld ** (2 * q)
    scale = float(2 + 2 * level) + bound**q
    tol = max(1e-9, 64.0 * float(np.finfo(_LD).eps) * scale)
    ks = [_LD(0.3), _LD(1.1), _LD(2.9)]
    energies = np.linspace(-0.7, 0.7, 3) * bound
    eye = np.eye(q, dtype=_CLD)
    for k1 in ks:
        for k2 in ks:
            h = _fiber(p, q, beta, k1, k2, dtype=_CLD)
            for e in energies:
                det = np.real(_det_cld(_LD(e) * eye - h))
                val = det + 2 * np.cos(q * k1) + level * np.cos(q * k2)
                defect = abs(float(val - _polyval_ld(coeffs, _LD(e))))
                if defect > tol:
                    raise ConsistencyError(
                        f"Chambers k-independence defect {defect:.3e} > {tol:.3e} "
                        f"for theta={p}/{q}, beta={beta} (fiber-matrix bug)")


def chambers_polynomial(f: RationalFlux, beta: float) -> np.polynomial.Polynomial:
    """The degree-q Chambers polynomial P(E), momentum independent.

    Coefficients are fit from det(E I - H) at q+1 Chebyshev-spaced energies at
    the reference momentum (pi/2q, pi/2q) and verified against a spot k-grid.
    """
    coeffs_desc = _chambers_ld(f.p, f.q, float(beta))
    return np.polynomial.Polynomial(np.asarray(coeffs_desc, dtype=float)[::-1])


def chambers_defect(f: RationalFlux, beta: float, n_k: int = 10, n_e: int = 5) -> float:
    """Max |det(E I - H(k)) + 2 cos(q k1) + 2 beta^{2q} cos(q k2) - P(E)| over a
    k-grid at in-band test energies; the measured momentum-independence defect."""
    p, q = f.p, f.q
    coeffs = _chambers_ld(p, q, float(beta))
    beta_ld = _LD(beta)
    level = _LD(2.0) * beta_ld ** (2 * q)
    energies = np.linspace(-0.8, 0.8, n_e) * float(2 + 2 * beta_ld**2)
    kgrid = np.linspace(0.0, 2.0 * float(_PI_LD), n_k, endpoint=False).astype(_LD)
    eye = np.eye(q, dtype=_CLD)
    worst = 0.0
    for k1 in kgrid:
        for k2 in kgrid:
            h = _fiber(p, q, beta, k1, k2, dtype=_CLD)
            for e in energies:
                det = np.real(_det_cld(_LD(e) * eye - h))
                val = det + 2 * np.cos(q * k1) + level * np.cos(q * k2)
                worst = max(worst, abs(float(val - _polyval_ld(coeffs, _LD(e)))))
    return worst


def harper_spectrum(f: RationalFlux, beta: float) -> HarperBands:
    """Band intervals {E : P(E) in [-L, L]}, L = 2 + 2 beta^{2q}.

    Edges are the eigenvalues of H(0,0) (roots of P = +L) and of
    H(pi/q, pi/q) (roots of P = -L); sorted and paired they bound the q bands.
    Each edge is polished by bisection on the longdouble P when a sign change
    survives in a tight bracket (touching bands have double roots and keep the
    eigenvalue value).  Touching bands stay separate intervals.
    """
    p, q = f.p, f.q
    e_plus = np.linalg.eigvalsh(_fiber(p, q, beta, 0.0, 0.0))
    e_minus = np.linalg.eigvalsh(_fiber(p, q, beta, np.pi / q, np.pi / q))
    beta_ld = _LD(beta)
    level = _LD(2.0) + _LD(2.0) * beta_ld ** (2 * q)
    roots = [(float(e), _LD(1.0)) for e in e_plus] + [(float(e), _LD(-1.0)) for e in e_minus]
    roots.sort(key=lambda t: t[0])
    if float(level) < 1e12:  # beyond that the polynomial scale swamps the edge scale
        coeffs = _chambers_ld(p, q, float(beta))
        roots = [(_polish_edge(coeffs, e, s * level), s) for e, s in roots]
    edges = [e for e, _ in roots]
    bands = tuple((edges[2 * i], edges[2 * i + 1]) for i in range(q))
    bound = 2.0 * (1.0 + float(beta) ** 2)
    bands = tuple((max(lo, -bound), min(hi, bound)) for lo, hi in bands)
    if any(lo > hi for lo, hi in bands):
        raise ConsistencyError(f"band pairing failed for theta={f}, beta={beta}")
    return HarperBands(flux=f, beta=float(beta), bands=bands)


def _polish_edge(coeffs: np.ndarray, e: float, target) -> float:
    g = lambda x: _polyval_ld(coeffs, _LD(x)) - target
    delta = 1e-10 * max(1.0, abs(e))
    lo, hi = _LD(e - delta), _LD(e + delta)
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return float(lo)
    if ghi == 0 or glo * ghi > 0:
        return e  # double root (touching) or already at roundoff floor
    for _ in range(60):
        mid = (lo + hi) / 2
        gm = g(mid)
        if gm == 0:
            return float(mid)
        if gm * glo > 0:
            lo, glo = mid, gm
        else:
            hi = mid
    return float((lo + hi) / 2)


def torus_oracle(f: RationalFlux, beta: float, L: int) -> np.ndarray:
    """All N^2 eigenvalues of M restricted to an N x N torus, N = L q.

    Built in the Landau gauge (horizontal hops free, vertical hops carry
    e^{-+ 2 pi i m theta}), unitarily equivalent to the paper gauge on the
    infinite lattice and wrap-consistent whenever q | N.  Every eigenvalue
    must land inside a band of harper_spectrum.
    """
    if L < 1:
        raise DomainError(f"torus repetition count must be >= 1, got {L}")
    n = L * f.q
    if n * n > TORUS_DIM_GUARD:
        raise TorusSizeError(
            f"torus dimension N^2 = {n * n} exceeds the guard {TORUS_DIM_GUARD}")
    dim = n * n
    h = np.zeros((dim, dim), dtype=complex)
    idx = lambda m, nn: (m % n) * n + (nn % n)
    beta2 = float(beta) ** 2
    for m in range(n):
        phase = np.exp(-2j * np.pi * ((f.p * m) % f.q) / f.q)
        for nn in range(n):
            i = idx(m, nn)
            h[i, idx(m + 1, nn)] += 1.0
            h[i, idx(m - 1, nn)] += 1.0
            h[i, idx(m, nn + 1)] += beta2 * phase
            h[i, idx(m, nn - 1)] += beta2 * phase.conjugate()
    return np.sort(np.linalg.eigvalsh(h))


def approximate_irrational(theta: float, q_max: int) -> list[RationalFlux]:
    """Continued-fraction convergents p_k/q_k of theta with q_k <= q_max.

    Returns the proper convergents (index >= 1) in increasing q order; an
    integer theta returns itself over 1.  Terminates early when the residual
    drops below float noise, so decimal inputs do not grow junk terms.
    """
    if q_max < 1:
        raise DomainError(f"q_max must be >= 1, got {q_max}")
    if not np.isfinite(theta):
        raise DomainError(f"theta must be finite, got {theta!r}")
    a0 = math.floor(theta)
    frac = theta - a0
    if frac < 1e-12:
        return [RationalFlux(int(a0), 1)]
    out: list[RationalFlux] = []
    h, hp = a0, 1
    k, kp = 1, 0
    for _ in range(64):
        x = 1.0 / frac
        a = math.floor(x)
        frac = x - a
        h, hp = a * h + hp, h
        k, kp = a * k + kp, k
        if k > q_max:
            break
        out.append(RationalFlux(int(h), int(k)))
        if frac < 1e-12:
            break
    return out if out else [RationalFlux(int(a0), 1)]


def best_convergent(theta: float, q_max: int) -> RationalFlux:
    """The last continued-fraction convergent with denominator <= q_max."""
    return approximate_irrational(theta, q_max)[-1]
