"""Assemble the full lattice spectrum: point spectrum plus eta-preimage of Harper bands.

The spectrum splits as Sigma_0 (the Dirichlet eigenvalues mu_k, infinitely
degenerate point spectrum) union Sigma = eta^{-1}(spec M(theta, beta)).  Per
band window J_n and Harper band [e-, e+] the continuous part receives the
monotone pullback [eta^{-1}(y1), eta^{-1}(y2)] with the endpoint order set by
the window orientation.  Eigenvalues are classified against the Harper bands
through eta(mu_k): strictly outside every band -> Isolated, on an edge within
tolerance -> BandEdge, strictly inside -> Embedded.

Band windows and eta(mu_k) do not depend on the flux, so the butterfly sweep
computes them once and reuses them for every Farey fraction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .discriminant import (BandWindow, CouplingParams, band_windows,
                           default_scan_floor, eta_many, eta_on_pole,
                           invert_eta_many)
from .edge_solver import _count_below_many, spectrum_upto
from .errors import ConfigError, NumericalError
from .harper import HarperBands, RationalFlux, best_convergent, harper_spectrum
from .potential import Potential

EDGE_CLASSIFY_TOL = 1e-9


class Classification(enum.Enum):
    ISOLATED = "Isolated"
    EMBEDDED = "Embedded"
    BAND_EDGE = "BandEdge"


@dataclass(frozen=True)
class PointEigenvalue:
    k: int
    mu: float
    classification: Classification


@dataclass(frozen=True)
class ContinuousInterval:
    """One closed interval of Sigma with provenance (window n, Harper band j)."""

    z_lo: float
    z_hi: float
    window: int
    band: int
    truncated: bool


@dataclass(frozen=True)
class SpectralSet:
    point_spectrum: tuple[PointEigenvalue, ...]
    continuous: tuple[ContinuousInterval, ...]
    z_min: float
    z_max: float
    coupling: CouplingParams = field(repr=False)
    flux: RationalFlux = RationalFlux(0, 1)
    theta_input: float = 0.0
    convergent_used: str | None = None  # "p/q" when a decimal theta was resolved
    scan_floor_heuristic: bool = False  # z_min came from the heuristic floor
    floor_touched: bool = False         # lowest window clipped at z_min
    harper: HarperBands | None = field(default=None, repr=False)
    windows: tuple[BandWindow, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class Gap:
    lo: float
    hi: float
    contains_mu: tuple[float, ...]


@dataclass(frozen=True)
class GapReport:
    z_min: float
    z_max: float
    gaps: tuple[Gap, ...]


def resolve_flux(theta, q_max: int = 50) -> tuple[RationalFlux, str | None]:
    """Map a flux input to a RationalFlux.

    RationalFlux passes through; floats resolve to their best continued-
    fraction convergent with denominator <= q_max, and the substitution is
    reported (None when the float already equals the convergent).
    """
    if isinstance(theta, RationalFlux):
        return theta, None
    theta = float(theta)
    if not np.isfinite(theta):
        raise ConfigError(f"theta must be finite, got {theta!r}")
    flux = best_convergent(theta, q_max)
    exact = abs(flux.theta - theta) < 1e-12 * max(1.0, abs(theta))
    return flux, (None if exact else str(flux))


def classify_eigenvalue(c: CouplingParams, f: RationalFlux, k: int,
                        tol: float = EDGE_CLASSIFY_TOL) -> Classification:
    """Locate eta(mu_k) relative to the Harper bands of M(theta, beta)."""
    y = eta_on_pole(c, k)
    bands = harper_spectrum(f, c.beta)
    return _classify_value(y, bands, tol)


def _classify_value(y: float, bands: HarperBands, tol: float) -> Classification:
    for lo, hi in bands.bands:
        if abs(y - lo) <= tol or abs(y - hi) <= tol:
            return Classification.BAND_EDGE
        if lo < y < hi:
            return Classification.EMBEDDED
    return Classification.ISOLATED


def _point_spectrum(p: Potential, c: CouplingParams, harper: HarperBands,
                    z_min: float, z_max: float) -> tuple[PointEigenvalue, ...]:
    k_hi = int(_count_below_many(p, np.asarray([z_max]))[0])  # mu_{k_hi} >= z_max
    spec = spectrum_upto(p, k_hi)
    points = []
    for k, mu in enumerate(spec.eigenvalues[:k_hi + 1]):
        if z_min <= mu <= z_max:
            y = eta_on_pole(c, k)
            points.append(PointEigenvalue(
                k=k, mu=mu,
                classification=_classify_value(y, harper, EDGE_CLASSIFY_TOL)))
    return tuple(points)


def _assemble(p: Potential, c: CouplingParams, flux: RationalFlux,
              windows: list[BandWindow], z_min: float, z_max: float,
              theta_input: float, convergent_used: str | None,
              used_floor: bool) -> SpectralSet:
    harper = harper_spectrum(flux, c.beta)
    threshold = c.threshold
    intervals: list[ContinuousInterval] = []
    floor_touched = False
    for w in windows:
        floor_touched = floor_touched or (w.truncated_lo and used_floor)
        y_bounds = None
        if w.truncated_lo or w.truncated_hi:
            vals = eta_many(c, np.asarray([w.a, w.b]))
            y_bounds = (float(np.min(vals)), float(np.max(vals)))
        for j, (lo, hi) in enumerate(harper.bands):
            y1, y2 = max(lo, -threshold), min(hi, threshold)
            z1 = z2 = None  # endpoints pinned by clipping, no inversion needed
            clipped = False
            if y_bounds is not None:
                yl, yh = y_bounds
                if y1 < yl:
                    y1, clipped = yl, True
                    z1 = w.a if w.increasing else w.b
                if y2 > yh:
                    y2, clipped = yh, True
                    z2 = w.b if w.increasing else w.a
                if y1 > y2:
                    continue  # band lies entirely outside the clipped window
            free_ys = [y for y, zz in ((y1, z1), (y2, z2)) if zz is None]
            if free_ys:
                inv = invert_eta_many(w, np.asarray(free_ys))
            k = 0
            if z1 is None:
                z1 = float(inv[k]); k += 1
            if z2 is None:
                z2 = float(inv[k])
            z_lo, z_hi = min(z1, z2), max(z1, z2)
            z_lo, z_hi = max(z_lo, w.a), min(z_hi, w.b)
            if z_hi < z_lo:
                continue
            intervals.append(ContinuousInterval(
                z_lo=z_lo, z_hi=z_hi, window=w.index, band=j,
                truncated=bool(clipped)))
    intervals.sort(key=lambda i: (i.z_lo, i.z_hi, i.window, i.band))
    return SpectralSet(
        point_spectrum=_point_spectrum(p, c, harper, z_min, z_max),
        continuous=tuple(intervals),
        z_min=float(z_min), z_max=float(z_max),
        coupling=c, flux=flux, theta_input=theta_input,
        convergent_used=convergent_used,
        scan_floor_heuristic=used_floor,
        floor_touched=floor_touched,
        harper=harper,
        windows=tuple(windows),
    )


def graph_spectrum(p: Potential, c: CouplingParams, theta,
                   z_min: float | None = None, z_max: float = 100.0,
                   q_max: int = 50) -> SpectralSet:
    """The lattice spectrum over [z_min, z_max].

    theta may be a RationalFlux or a float (resolved to its best convergent
    with denominator <= q_max, recorded in the result).  z_min defaults to the
    heuristic scan floor min(0, inf V) - |alpha|/l - 1.
    """
    if c.potential != p:
        c = CouplingParams(alpha=c.alpha, beta=c.beta, potential=p)
    flux, convergent_used = resolve_flux(theta, q_max)
    theta_input = flux.theta if isinstance(theta, RationalFlux) else float(theta)
    used_floor = z_min is None
    if used_floor:
        z_min = default_scan_floor(c)
    windows = band_windows(c, z_min, z_max)
    return _assemble(p, c, flux, windows, z_min, z_max, theta_input,
                     convergent_used, used_floor)


def gap_report(s: SpectralSet, merge_eps: float = 1e-12) -> GapReport:
    """Maximal open subintervals of [z_min, z_max] free of the continuous part.

    Touching continuous intervals produce no gap; each gap is annotated with
    the eigenvalues mu_k sitting inside it.
    """
    gaps = []
    eps = merge_eps * max(1.0, abs(s.z_min), abs(s.z_max))
    cursor = s.z_min
    mus = [pt.mu for pt in s.point_spectrum]
    for iv in s.continuous:
        if iv.z_lo > cursor + eps:
            gaps.append(Gap(lo=cursor, hi=iv.z_lo,
                            contains_mu=tuple(m for m in mus if cursor < m < iv.z_lo)))
        cursor = max(cursor, iv.z_hi)
    if cursor < s.z_max - eps:
        gaps.append(Gap(lo=cursor, hi=s.z_max,
                        contains_mu=tuple(m for m in mus if cursor < m < s.z_max)))
    return GapReport(z_min=s.z_min, z_max=s.z_max, gaps=tuple(gaps))


def farey_fluxes(q_max: int) -> list[RationalFlux]:
    """All reduced p/q in [0, 1] with q <= q_max, ordered by (q, p)."""
    if q_max < 1:
        raise ConfigError(f"q_max must be >= 1, got {q_max}")
    out = [RationalFlux(0, 1), RationalFlux(1, 1)]
    for q in range(2, q_max + 1):
        out.extend(RationalFlux(p, q) for p in range(1, q) if math.gcd(p, q) == 1)
    return out


@dataclass(frozen=True)
class ButterflyRow:
    flux: RationalFlux
    band_index: int
    z_lo: float
    z_hi: float
    truncated: bool


def _sweep_one(flux: RationalFlux, p: Potential, c: CouplingParams,
               windows: tuple[BandWindow, ...], z_min: float, z_max: float,
               used_floor: bool):
    try:
        s = _assemble(p, c, flux, list(windows), z_min, z_max, flux.theta,
                      None, used_floor)
        return [(flux, i, iv.z_lo, iv.z_hi, iv.truncated)
                for i, iv in enumerate(s.continuous)], None
    except NumericalError as exc:
        return [], f"theta={flux}: {exc}"


def butterfly_sweep(p: Potential, c: CouplingParams, q_max: int,
                    z_min: float | None = None, z_max: float = 100.0,
                    map_fn=None) -> tuple[list[ButterflyRow], list[str]]:
    """Continuous spectrum intervals for every Farey flux with q' <= q_max.

    Band windows are computed once (flux-independent) and shared across rows.
    Rows come back ordered by (q', p') then z; per-flux failures are collected
    as diagnostics without aborting the sweep.  map_fn may be any
    order-preserving map over pure calls (e.g. a process pool's .map); the
    worker is a module-level partial, so it pickles.
    """
    if c.potential != p:
        c = CouplingParams(alpha=c.alpha, beta=c.beta, potential=p)
    used_floor = z_min is None
    if used_floor:
        z_min = default_scan_floor(c)
    windows = tuple(band_windows(c, z_min, z_max))
    fluxes = farey_fluxes(q_max)
    worker = partial(_sweep_one, p=p, c=c, windows=windows, z_min=z_min,
                     z_max=z_max, used_floor=used_floor)
    mapper = map_fn if map_fn is not None else map
    rows: list[ButterflyRow] = []
    diagnostics: list[str] = []
    for result, err in mapper(worker, fluxes):
        if err is not None:
            diagnostics.append(err)
        for flux, i, z_lo, z_hi, trunc in result:
            rows.append(ButterflyRow(flux=flux, band_index=i, z_lo=z_lo,
                                     z_hi=z_hi, truncated=trunc))
    return rows, diagnostics
