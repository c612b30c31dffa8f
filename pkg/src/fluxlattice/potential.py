"""Edge potential V on [0,l] and the magnetic-field cell average.

The potential lives on a single edge of length l and is shared by every edge
of the lattice.  Supported representations: zero, constant, piecewise constant
(right-continuous at interior breakpoints), and sampled with linear
interpolation.  The magnetic field enters the rest of the pipeline only
through the flux per plaquette theta = (1/2pi) * integral of b over the
fundamental cell F = [0,l]x[0,l].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, DomainError

KINDS = ("zero", "constant", "piecewise_constant", "sampled")


@dataclass(frozen=True)
class Potential:
    """Immutable edge potential. Data is stored in tuples so instances hash."""

    l: float
    kind: str
    c: float = 0.0
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    grid: tuple[float, ...] = ()

    def __post_init__(self):
        if not np.isfinite(self.l) or self.l <= 0:
            raise ConfigError(f"l must be a positive real, got {self.l!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"potential.kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "constant" and not np.isfinite(self.c):
            raise ConfigError("potential.c must be finite")
        if self.kind == "piecewise_constant":
            bp, vals = self.breakpoints, self.values
            if len(bp) < 2 or len(vals) != len(bp) - 1:
                raise ConfigError(
                    "potential.breakpoints needs >= 2 entries and "
                    "len(values) == len(breakpoints) - 1")
            if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
                raise ConfigError("potential.breakpoints must be strictly increasing")
            if abs(bp[0]) > 1e-12 * self.l or abs(bp[-1] - self.l) > 1e-12 * self.l:
                raise ConfigError("potential.breakpoints must start at 0 and end at l")
            if not all(np.isfinite(v) for v in vals):
                raise ConfigError("potential.values must be finite")
        if self.kind == "sampled":
            g, vals = self.grid, self.values
            if len(g) < 2 or len(vals) != len(g):
                raise ConfigError(
                    "potential.grid needs >= 2 nodes and len(values) == len(grid)")
            if any(g2 <= g1 for g1, g2 in zip(g, g[1:])):
                raise ConfigError("potential.grid must be strictly increasing")
            if abs(g[0]) > 1e-12 * self.l or abs(g[-1] - self.l) > 1e-12 * self.l:
                raise ConfigError("potential.grid must span [0, l]")
            if not all(np.isfinite(v) for v in vals):
                raise ConfigError("potential.values must be finite")

    @cached_property
    def _grid_arr(self) -> np.ndarray:
        return np.asarray(self.grid, dtype=float)

    @cached_property
    def _values_arr(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @cached_property
    def _breakpoints_arr(self) -> np.ndarray:
        return np.asarray(self.breakpoints, dtype=float)

    def segments(self) -> list[tuple[float, float]]:
        """(value, length) pieces for exact transfer-matrix propagation.

        Only meaningful for the piecewise-constant family (zero, constant,
        piecewise_constant).
        """
        if self.kind == "zero":
            return [(0.0, self.l)]
        if self.kind == "constant":
            return [(self.c, self.l)]
        if self.kind == "piecewise_constant":
            bp = self._breakpoints_arr
            return [(v, bp[i + 1] - bp[i]) for i, v in enumerate(self.values)]
        raise ValueError("sampled potentials have no exact segment decomposition")

    @property
    def is_piecewise(self) -> bool:
        return self.kind != "sampled"

    def values_on(self, t: np.ndarray) -> np.ndarray:
        """V(t) on an array of points inside [0,l]; no domain check (internal)."""
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "constant":
            return np.full_like(t, self.c)
        if self.kind == "sampled":
            return np.interp(t, self._grid_arr, self._values_arr)
        bp = self._breakpoints_arr
        idx = np.clip(np.searchsorted(bp, t, side="right") - 1, 0, len(self.values) - 1)
        return self._values_arr[idx]

    @cached_property
    def uniform_cells(self) -> int | None:
        """Number of equal sample cells for uniformly gridded sampled data.

        RK4 steps aligned with the interpolation cells keep the integrand
        smooth inside every step; None for non-sampled or non-uniform grids.
        """
        if self.kind != "sampled":
            return None
        dg = np.diff(self._grid_arr)
        if np.max(np.abs(dg - dg[0])) > 1e-12 * self.l:
            return None
        return len(dg)

    def mean(self) -> float:
        """Cell average of V, used to seed eigenvalue asymptotics."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.c
        if self.kind == "piecewise_constant":
            bp = self._breakpoints_arr
            return float(np.dot(self._values_arr, np.diff(bp)) / self.l)
        return float(np.trapezoid(self._values_arr, self._grid_arr) / self.l)

    def infimum(self) -> float:
        """inf V over [0,l] (exact for all supported representations)."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.c
        return float(self._values_arr.min())


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Magnetic field b(x) sampled on a uniform tensor grid over the cell F."""

    grid_x: np.ndarray
    grid_y: np.ndarray
    values: np.ndarray  # shape (len(grid_x), len(grid_y)), row-major over x

    def __post_init__(self):
        gx = np.asarray(self.grid_x, dtype=float)
        gy = np.asarray(self.grid_y, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if gx.ndim != 1 or gy.ndim != 1 or len(gx) < 2 or len(gy) < 2:
            raise ConfigError("field grid must be 1-d with >= 2 nodes per axis")
        for name, g in (("grid_x", gx), ("grid_y", gy)):
            if np.any(np.diff(g) <= 0):
                raise ConfigError(f"field.{name} must be strictly increasing")
            dg = np.diff(g)
            if np.max(np.abs(dg - dg[0])) > 1e-9 * max(abs(g[-1]), 1.0):
                raise ConfigError(f"field.{name} must be uniformly spaced")
        if vals.shape != (len(gx), len(gy)):
            raise ConfigError(
                f"field.values must have shape ({len(gx)}, {len(gy)}), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ConfigError("field.values must be finite")
        for arr in (gx, gy, vals):
            arr.setflags(write=False)
        object.__setattr__(self, "grid_x", gx)
        object.__setattr__(self, "grid_y", gy)
        object.__setattr__(self, "values", vals)


def make_potential(spec: dict) -> Potential:
    """Build a Potential from a structured description.

    Expected keys: l (positive number) and potential {kind, ...} with
    kind-specific fields: constant -> c; piecewise_constant -> breakpoints,
    values; sampled -> grid, values.
    """
    if not isinstance(spec, dict):
        raise ConfigError("potential spec must be a mapping")
    try:
        l = float(spec["l"])
    except KeyError:
        raise ConfigError("missing field: l") from None
    except (TypeError, ValueError):
        raise ConfigError(f"field l must be a number, got {spec.get('l')!r}") from None
    pot = spec.get("potential", {"kind": "zero"})
    if not isinstance(pot, dict) or "kind" not in pot:
        raise ConfigError("field potential must be an object with a 'kind'")
    kind = pot["kind"]
    if kind == "zero":
        return Potential(l=l, kind="zero")
    if kind == "constant":
        if "c" not in pot:
            raise ConfigError("missing field: potential.c")
        return Potential(l=l, kind="constant", c=_as_float(pot["c"], "potential.c"))
    if kind == "piecewise_constant":
        bp = _as_float_tuple(pot.get("breakpoints"), "potential.breakpoints")
        vals = _as_float_tuple(pot.get("values"), "potential.values")
        return Potential(l=l, kind="piecewise_constant", breakpoints=bp, values=vals)
    if kind == "sampled":
        grid = _as_float_tuple(pot.get("grid"), "potential.grid")
        vals = _as_float_tuple(pot.get("values"), "potential.values")
        return Potential(l=l, kind="sampled", grid=grid, values=vals)
    raise ConfigError(f"potential.kind must be one of {KINDS}, got {kind!r}")


def _as_float(x, name: str) -> float:
    try:
        return float(x)
    except (TypeError, ValueError):
        raise ConfigError(f"field {name} must be a number, got {x!r}") from None


def _as_float_tuple(x, name: str) -> tuple[float, ...]:
    if x is None:
        raise ConfigError(f"missing field: {name}")
    try:
        return tuple(float(v) for v in x)
    except (TypeError, ValueError):
        raise ConfigError(f"field {name} must be a list of numbers") from None


def evaluate_potential(p: Potential, t: float) -> float:
    """V(t) for t in [0,l]; right-continuous at interior breakpoints."""
    if not 0.0 <= t <= p.l:
        raise DomainError(f"t={t} outside [0, {p.l}]")
    return float(p.values_on(np.asarray([t]))[0])


def flux_from_field(f: FieldSample, l: float) -> float:
    """Flux quanta per plaquette: theta = (1/2pi) * trapezoid(b over F).

    Equals xi * l^2 with xi the paper-normalized field average; the composite
    trapezoid rule is second-order, enough for continuous b.
    """
    if not np.isfinite(l) or l <= 0:
        raise ConfigError(f"l must be a positive real, got {l!r}")
    for name, g in (("grid_x", f.grid_x), ("grid_y", f.grid_y)):
        if abs(g[0]) > 1e-9 * l or abs(g[-1] - l) > 1e-9 * l:
            raise ConfigError(f"field.{name} must span [0, l] = [0, {l}]")
    integral = np.trapezoid(np.trapezoid(f.values, f.grid_y, axis=1), f.grid_x)
    return float(integral / (2.0 * np.pi))
