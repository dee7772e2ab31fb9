"""Diagnostics on trajectories: echo, return probability, photon variance.

Time arguments are in the grid's own units (round trips T_B for every
grid built by :mod:`adtc.experiments`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .model import CAVITY1
from .propagator import TimeGrid, Trajectory

PEAK_PROMINENCE = 0.2
PEAK_PROMINENCE_FLOOR = 1e-3
PEAK_MIN_SEPARATION = 0.5
MIN_PERIOD_SPAN = 20.0
FIT_FLOOR = 1e-3
MIN_AVERAGING_T0 = 100.0
MIN_AVERAGING_M = 100


@dataclass(frozen=True)
class ObservableSeries:
    grid: TimeGrid
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.grid),):
            raise ValueError(
                f"{values.shape} values for a grid of {len(self.grid)} points"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError(f"series {self.label!r} contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def t(self) -> np.ndarray:
        return self.grid.points

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class PeriodEstimate:
    """Period from the median spacing of prominent maxima.

    ``confidence`` is MAD(spacings) / median(spacing); smaller is cleaner.
    """

    period: float
    peak_times: np.ndarray
    confidence: float


def _same_grid(a: TimeGrid, b: TimeGrid) -> bool:
    return a.unit == b.unit and np.array_equal(a.points, b.points)


def loschmidt_echo(unperturbed: Trajectory, perturbed: Trajectory) -> ObservableSeries:
    """L(t) = |<psi'(t)|psi(t)>|^2 between two evolutions of one initial state."""
    if not _same_grid(unperturbed.grid, perturbed.grid):
        raise ValueError("trajectories are sampled on different grids")
    if unperturbed.dim != perturbed.dim:
        raise ValueError(f"dimension mismatch: {unperturbed.dim} vs {perturbed.dim}")
    if unperturbed.grid.start == 0 and not np.allclose(
        unperturbed.states[0], perturbed.states[0], rtol=0, atol=1e-12
    ):
        raise ValueError("trajectories do not start from the same state")
    overlap = np.einsum("ij,ij->i", perturbed.states.conj(), unperturbed.states)
    values = np.minimum(np.abs(overlap) ** 2, 1.0)
    return ObservableSeries(unperturbed.grid, values, "echo")


def return_probability(traj: Trajectory, psi0: np.ndarray) -> ObservableSeries:
    """p(t) = |<psi0|psi(t)>|^2."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (traj.dim,):
        raise ValueError(f"state of shape {psi0.shape} does not match dimension {traj.dim}")
    values = np.minimum(np.abs(traj.states @ psi0.conj()) ** 2, 1.0)
    return ObservableSeries(traj.grid, values, "return")


def variance_from_population(population: np.ndarray) -> np.ndarray:
    """Single-excitation photon-number variance y - y^2 of a population y."""
    y = np.clip(np.asarray(population, dtype=float), 0.0, 1.0)
    return y - y * y


def photon_variance_a1(traj: Trajectory) -> ObservableSeries:
    """Variance of the photon number in cavity 1, |C_a1|^2 - |C_a1|^4."""
    y = np.abs(traj.amplitude(CAVITY1)) ** 2
    return ObservableSeries(traj.grid, variance_from_population(y), "variance_a1")


def _trapezoid_mean(series: ObservableSeries, lo: float, hi: float) -> float:
    mask = series.grid.window(lo, hi)
    if mask.sum() < 2:
        raise ValueError(f"window [{lo}, {hi}] holds fewer than two samples")
    t = series.t[mask]
    span = t[-1] - t[0]
    return float(np.trapezoid(series.values[mask], t) / span)


def _check_inside(series: ObservableSeries, lo: float, hi: float):
    slack = 1e-9 * series.grid.dt
    if lo < series.t[0] - slack or hi > series.t[-1] + slack:
        raise ValueError(
            f"window [{lo}, {hi}] exceeds series span [{series.t[0]}, {series.t[-1]}]"
        )


def time_averaged_variance(series: ObservableSeries, t0: float, m: int) -> float:
    """Trapezoidal mean of a variance series over [t0, t0 + m] round trips.

    The integral is divided by the window length, so the result is a true
    time average.  Requires t0 >= 100 and an integer m >= 100.
    """
    if t0 < MIN_AVERAGING_T0:
        raise ValueError(f"averaging start t0={t0} must be >= {MIN_AVERAGING_T0:g} T_B")
    if int(m) != m or m < MIN_AVERAGING_M:
        raise ValueError(f"averaging length m={m} must be an integer >= {MIN_AVERAGING_M}")
    _check_inside(series, t0, t0 + m)
    return _trapezoid_mean(series, t0, t0 + m)


def window_mean(series: ObservableSeries, t_lo: float, t_hi: float) -> float:
    """Trapezoidal mean of ``series`` over [t_lo, t_hi]."""
    if not t_hi > t_lo:
        raise ValueError(f"empty window [{t_lo}, {t_hi}]")
    _check_inside(series, t_lo, t_hi)
    return _trapezoid_mean(series, t_lo, t_hi)


def detect_peak_period(
    series: ObservableSeries,
    prominence: float = PEAK_PROMINENCE,
    min_separation: float = PEAK_MIN_SEPARATION,
) -> PeriodEstimate | None:
    """Period of the revivals in ``series``, or None without periodic structure.

    A maximum qualifies when its prominence is at least ``prominence``
    times the peak-to-peak range of the series (and never below 1e-3) and
    it lies at least ``min_separation`` from its neighbours.  Scaling by the
    range keeps the shallow revivals of a weakly depleted cavity visible.
    Fewer than three qualifying maxima give None.
    """
    span = series.t[-1] - series.t[0]
    if span < MIN_PERIOD_SPAN:
        raise ValueError(f"series spans {span:g} T_B; need >= {MIN_PERIOD_SPAN:g}")
    distance = max(1, int(np.ceil(min_separation / series.grid.dt - 1e-9)))
    spread = float(np.ptp(series.values))
    threshold = max(prominence * spread, PEAK_PROMINENCE_FLOOR)
    peaks, _ = find_peaks(series.values, prominence=threshold, distance=distance)
    if peaks.size < 3:
        return None
    times = series.t[peaks]
    spacings = np.diff(times)
    period = float(np.median(spacings))
    mad = float(np.median(np.abs(spacings - period)))
    return PeriodEstimate(period, times, mad / period)


def fit_decay_rate(series: ObservableSeries, t_lo: float, t_hi: float) -> float:
    """Negated least-squares slope of ln(values) against t on [t_lo, t_hi]."""
    _check_inside(series, t_lo, t_hi)
    mask = series.grid.window(t_lo, t_hi)
    if mask.sum() < 2:
        raise ValueError(f"window [{t_lo}, {t_hi}] holds fewer than two samples")
    y = series.values[mask]
    if np.any(y <= 0):
        raise ValueError("non-positive values in the fit window")
    if np.any(y <= FIT_FLOOR):
        raise ValueError(f"values fall to {y.min():.2e}, below the fit floor {FIT_FLOOR:g}")
    slope = np.polyfit(series.t[mask], np.log(y), 1)[0]
    return float(-slope)
