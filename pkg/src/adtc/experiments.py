"""Reproduction runs: echo and return experiments, Omega and length sweeps.

Every time in this module is measured in round trips T_B of the
resonator the run actually uses; frequencies are in units of omega0.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np
from scipy.signal import find_peaks

from .model import (
    ParameterError,
    SystemParams,
    assemble_hamiltonian,
    derived_gamma,
    make_initial_state,
    scale_to_length,
    validate_params,
)
from .observables import (
    ObservableSeries,
    PeriodEstimate,
    detect_peak_period,
    fit_decay_rate,
    loschmidt_echo,
    photon_variance_a1,
    return_probability,
    time_averaged_variance,
    window_mean,
)
from .propagator import TimeGrid, diagonalize, evolve_on_grid

TIME_CRYSTAL = "TimeCrystal"
NORMAL = "Normal"

PERIOD_WINDOW = (1.8, 2.2)
ECHO_THRESHOLD = 0.5
DECAY_FIT_WINDOW = (0.05, 0.4)
DEFAULT_OMEGA_ABS = 1e-2
REFERENCE_LENGTH = 250.0
FIXED_N = "fixed-n"
FIXED_BAND = "fixed-band"
PEAK_MARGIN = 0.05


def default_ratios() -> np.ndarray:
    """Omega / Omega_TC grid 0.1, 0.15, ..., 3.0."""
    return np.round(np.arange(0.1, 3.0 + 1e-9, 0.05), 10)


@dataclass(frozen=True)
class ExperimentSpec:
    """One simulation run.

    ``t_max``, ``dt``, ``t0``, ``m`` and ``late_window`` are in units of
    T_B; ``length`` is the resonator length in units of lambda0 and only
    matters to :func:`length_sweep`.
    """

    params: SystemParams = field(default_factory=SystemParams)
    initial: object = "special"
    t_max: float = 400.0
    dt: float = 0.01
    epsilon_override: float | None = None
    t0: float = 200.0
    m: int = 200
    late_window: tuple = (200.0, 400.0)
    length: float = REFERENCE_LENGTH
    label: str = ""

    @property
    def epsilon(self) -> float:
        if self.epsilon_override is not None:
            return self.epsilon_override
        return self.params.epsilon

    def resolved_params(self) -> SystemParams:
        """Validated parameters with any epsilon override applied.

        The decoupled limit g = 0 is accepted here for analytic checks.
        """
        p = self.params
        if self.epsilon_override is not None:
            p = replace(p, epsilon=self.epsilon_override)
        return validate_params(p, allow_decoupled=True)

    def grid(self) -> TimeGrid:
        return TimeGrid(0.0, self.t_max, self.dt, self.params.round_trip_time)

    def initial_state(self) -> np.ndarray:
        return make_initial_state(self.initial, self.params.n_modes)

    def covers_average(self) -> bool:
        return self.t_max >= self.t0 + self.m

    def covers_late_window(self) -> bool:
        return self.t_max >= self.late_window[1]


@dataclass(frozen=True)
class RegimeLabel:
    kind: str
    period: float
    echo_mean: float

    @property
    def is_time_crystal(self) -> bool:
        return self.kind == TIME_CRYSTAL


def classify_regime(period, echo_mean: float) -> RegimeLabel:
    """TimeCrystal iff the revival period lies in [1.8, 2.2] T_B and the
    late-window echo mean is at least 0.5.

    ``period`` may be a PeriodEstimate, a bare number, or None when no
    periodic structure was found.
    """
    if isinstance(period, PeriodEstimate):
        period = period.period
    period = math.nan if period is None else float(period)
    lo, hi = PERIOD_WINDOW
    doubled = lo <= period <= hi
    kind = TIME_CRYSTAL if doubled and echo_mean >= ECHO_THRESHOLD else NORMAL
    return RegimeLabel(kind, period, float(echo_mean))


def run_echo_experiment(spec: ExperimentSpec):
    """Evolve one initial state under H(eps=0) and H(eps).

    Returns (echo series, unperturbed trajectory, perturbed trajectory).
    """
    params = spec.resolved_params()
    grid = spec.grid()
    psi0 = spec.initial_state()
    eig0 = diagonalize(assemble_hamiltonian(params, use_epsilon=False))
    traj0 = evolve_on_grid(eig0, psi0, grid)
    if params.epsilon == 0:
        traj1 = traj0
    else:
        eig1 = diagonalize(assemble_hamiltonian(params, use_epsilon=True))
        traj1 = evolve_on_grid(eig1, psi0, grid)
    return loschmidt_echo(traj0, traj1), traj0, traj1


def _decay_rate(p: ObservableSeries) -> float:
    lo, hi = DECAY_FIT_WINDOW
    try:
        return fit_decay_rate(p, lo, hi)
    except ValueError:
        return math.nan


def _period(p: ObservableSeries) -> PeriodEstimate | None:
    if p.t[-1] - p.t[0] < 20.0:
        return None
    return detect_peak_period(p)


def run_return_experiment(spec: ExperimentSpec):
    """Return probability of the unperturbed system.

    Returns (p series, PeriodEstimate or None, early-time decay rate in
    1/T_B).  The rate is NaN when p(t) drops below the fit floor inside
    the fit window, as it does deep in the normal regime.
    """
    params = spec.resolved_params()
    psi0 = spec.initial_state()
    eig = diagonalize(assemble_hamiltonian(params, use_epsilon=False))
    traj = evolve_on_grid(eig, psi0, spec.grid())
    p = return_probability(traj, psi0)
    return p, _period(p), _decay_rate(p)


@dataclass(frozen=True)
class SweepPoint:
    """Metrics of one sweep point, with the exact parameters that made it."""

    axis_value: float
    params: SystemParams
    variance: float
    echo_mean: float
    regime: RegimeLabel
    length: float = math.nan

    @property
    def period(self) -> float:
        return self.regime.period

    @property
    def gamma(self) -> float:
        return derived_gamma(self.params)


@dataclass(frozen=True)
class SweepResult:
    axis_name: str
    points: tuple

    def __post_init__(self):
        axis = self.axis
        if axis.size and np.any(np.diff(axis) <= 0):
            raise ValueError("sweep axis must be strictly increasing")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def axis(self) -> np.ndarray:
        return np.array([pt.axis_value for pt in self.points], dtype=float)

    @property
    def variance(self) -> np.ndarray:
        return np.array([pt.variance for pt in self.points], dtype=float)

    @property
    def echo_mean(self) -> np.ndarray:
        return np.array([pt.echo_mean for pt in self.points], dtype=float)

    @property
    def period(self) -> np.ndarray:
        return np.array([pt.period for pt in self.points], dtype=float)

    @property
    def regimes(self) -> list:
        return [pt.regime.kind for pt in self.points]

    @property
    def argmax_index(self) -> int:
        """Index of the largest time-averaged variance; ties go to the
        smallest axis value."""
        v = self.variance
        if np.all(np.isnan(v)):
            raise ValueError("no time-averaged variance was recorded in this sweep")
        return int(np.nanargmax(v))

    @property
    def argmax_variance(self) -> float:
        return float(self.axis[self.argmax_index])

    def has_interior_peak(self, margin: float = PEAK_MARGIN) -> bool:
        """True if the variance curve has an interior local maximum whose
        prominence is at least ``margin`` times the curve maximum."""
        v = self.variance
        if v.size < 3:
            return False
        peaks, _ = find_peaks(v, prominence=margin * np.nanmax(v))
        return peaks.size > 0


def _measure(spec: ExperimentSpec, axis_value: float, length: float = math.nan):
    params = spec.resolved_params()
    echo, traj0, _ = run_echo_experiment(spec)
    p = return_probability(traj0, spec.initial_state())

    variance = math.nan
    if spec.covers_average():
        variance = time_averaged_variance(photon_variance_a1(traj0), spec.t0, spec.m)
    echo_mean = math.nan
    if spec.covers_late_window():
        echo_mean = window_mean(echo, *spec.late_window)
    regime = classify_regime(_period(p), echo_mean)
    return SweepPoint(axis_value, params, variance, echo_mean, regime, length)


def _omega_point(base: ExperimentSpec, ratio: float) -> SweepPoint:
    spec = replace(base, params=base.params.with_omega_ratio(ratio))
    return _measure(spec, float(ratio), spec.length)


def _run_points(func, items, workers):
    if workers is None or workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def omega_sweep(base: ExperimentSpec, ratios=None, workers: int | None = None) -> SweepResult:
    """Sweep Omega / Omega_TC at fixed (g, delta_omega, N).

    Each point records the time-averaged cavity-1 variance over
    [t0, t0 + m], the late-window echo mean, the revival period and a
    regime label.  ``workers`` > 1 evaluates points in worker processes;
    results always come back in axis order.
    """
    ratios = default_ratios() if ratios is None else np.asarray(ratios, dtype=float)
    if ratios.ndim != 1 or ratios.size == 0:
        raise ValueError("ratios must be a non-empty 1-D sequence")
    if np.any(np.diff(ratios) <= 0):
        raise ValueError("ratios must be strictly increasing")
    if ratios[0] <= 0 or ratios[-1] > 10:
        raise ValueError("ratios must lie in (0, 10]")
    if not base.covers_average():
        raise ValueError(
            f"t_max={base.t_max} T_B does not cover the averaging window "
            f"[{base.t0}, {base.t0 + base.m}]"
        )
    points = _run_points(partial(_omega_point, base), list(ratios), workers)
    return SweepResult("omega_ratio", tuple(points))


def modes_for_band(band_width: float, delta_omega: float) -> int:
    """N = 2 floor(W / (2 delta_omega)): the comb then spans about
    +-W/2 around omega0."""
    return 2 * int(math.floor(band_width / (2.0 * delta_omega) + 1e-9))


def _length_point(reference: ExperimentSpec, omega_absolute, policy, band_width, length):
    l_ratio = length / reference.length
    params = scale_to_length(reference.params, l_ratio)
    params = replace(params, Omega=omega_absolute)
    if policy == FIXED_BAND:
        n = modes_for_band(band_width, params.delta_omega)
        if n < 2:
            raise ParameterError(
                "n_modes",
                f"band {band_width:g} holds N={n} modes at length {length:g} lambda0",
            )
        params = replace(params, n_modes=n)
    spec = replace(reference, params=params, length=float(length))
    return _measure(spec, float(length), float(length))


def length_sweep(
    reference: ExperimentSpec,
    lengths,
    omega_absolute: float = DEFAULT_OMEGA_ABS,
    n_mode_policy: str = FIXED_N,
    band_width: float | None = None,
    workers: int | None = None,
) -> SweepResult:
    """Sweep the resonator length (in units of lambda0) at fixed Omega.

    The comb spacing and coupling follow delta_omega ~ 1/l and g ~ l^-1/2
    from ``reference`` (whose ``length`` field anchors the scaling).  With
    ``FIXED_N`` the mode count is that of the reference; with
    ``FIXED_BAND`` N is chosen so the comb covers a total width
    ``band_width`` (default: N * delta_omega of the reference comb).  The axis is sorted.
    """
    lengths = np.sort(np.asarray(lengths, dtype=float))
    if lengths.ndim != 1 or lengths.size == 0:
        raise ValueError("lengths must be a non-empty 1-D sequence")
    if np.any(lengths <= 0):
        raise ValueError("lengths must be > 0")
    if np.any(np.diff(lengths) == 0):
        raise ValueError("lengths must be distinct")
    if not omega_absolute > 0:
        raise ValueError(f"omega_absolute must be > 0, got {omega_absolute}")
    if n_mode_policy not in (FIXED_N, FIXED_BAND):
        raise ValueError(f"unknown mode policy {n_mode_policy!r}")
    if band_width is None:
        ref = reference.params
        band_width = ref.n_modes * ref.delta_omega
    func = partial(_length_point, reference, omega_absolute, n_mode_policy, band_width)
    points = _run_points(func, list(lengths), workers)
    return SweepResult("length", tuple(points))
