"""Single-excitation dynamics of two coupled cavities and a ring resonator.

Exact spectral propagation of the one-quantum sector, Loschmidt echo and
return-probability diagnostics, and sweeps locating the transition
between the autonomous discrete-time-crystal and the ergodic regime.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    ParameterError,
    SystemParams,
    assemble_hamiltonian,
    derived_gamma,
    make_initial_state,
    scale_to_length,
    validate_params,
)
from .propagator import (  # noqa: E402
    ConvergenceError,
    EigenSystem,
    TimeGrid,
    Trajectory,
    diagonalize,
    evolve_on_grid,
    evolve_to,
)
from .observables import (  # noqa: E402
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
from .experiments import (  # noqa: E402
    ExperimentSpec,
    RegimeLabel,
    SweepResult,
    classify_regime,
    length_sweep,
    omega_sweep,
    run_echo_experiment,
    run_return_experiment,
)
