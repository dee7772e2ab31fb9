"""System parameters, basis layout and the single-excitation Hamiltonian.

Natural units throughout: hbar = c = 1 and frequencies are given as
multiples of the cavity frequency ``omega0``.  The dense basis is

    0        -> excitation in cavity 1 (a1)
    1        -> excitation in cavity 2 (a2)
    2 + k    -> excitation in resonator mode j = k - N/2, k = 0 .. N

so the Hilbert-space dimension is ``N + 3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

CAVITY1 = 0
CAVITY2 = 1
FIRST_MODE = 2


class ParameterError(ValueError):
    """Raised for a physically invalid parameter set.

    ``field`` names the offending parameter.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of two coupled cavities plus a ring resonator.

    Attributes
    ----------
    omega0 : cavity frequency (the frequency unit).
    Omega : cavity-cavity coupling.
    g : coupling of cavity 2 to every resonator mode.
    delta_omega : spacing of the resonator comb.
    n_modes : N; the comb holds modes j = -N/2 .. N/2 (N + 1 modes).
    epsilon : relative shift of the comb frequencies in the perturbed system.
    """

    omega0: float = 1.0
    Omega: float = 0.5 * 6e-3 / math.sqrt(2.0)
    g: float = 6e-3
    delta_omega: float = 4e-3
    n_modes: int = 50
    epsilon: float = 1e-5

    @property
    def dim(self) -> int:
        return self.n_modes + 3

    @property
    def round_trip_time(self) -> float:
        """Resonator bypass time T_B = 2 pi / delta_omega."""
        return 2.0 * math.pi / self.delta_omega

    @property
    def omega_tc(self) -> float:
        """Critical cavity-cavity coupling g / sqrt(2)."""
        return self.g / math.sqrt(2.0)

    @property
    def omega_ratio(self) -> float:
        return self.Omega / self.omega_tc

    @property
    def gamma(self) -> float:
        return derived_gamma(self)

    def with_omega_ratio(self, ratio: float) -> "SystemParams":
        return replace(self, Omega=ratio * self.omega_tc)

    def mode_indices(self) -> np.ndarray:
        """Resonator mode labels j = -N/2 .. N/2."""
        half = self.n_modes // 2
        return np.arange(-half, half + 1)

    def mode_frequencies(self, perturbed: bool = False) -> np.ndarray:
        eps = self.epsilon if perturbed else 0.0
        return (self.omega0 + self.mode_indices() * self.delta_omega) * (1.0 + eps)

    def to_dict(self) -> dict:
        return {
            "omega0": self.omega0,
            "Omega": self.Omega,
            "g": self.g,
            "delta_omega": self.delta_omega,
            "n_modes": self.n_modes,
            "epsilon": self.epsilon,
        }


def validate_params(raw: SystemParams, allow_decoupled: bool = False) -> SystemParams:
    """Return ``raw`` unchanged if it describes a valid system.

    Raises ParameterError naming the first offending field.  With
    ``allow_decoupled`` the resonator may be switched off (g = 0), which
    analytic cross-checks rely on.
    """
    n = raw.n_modes
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ParameterError("n_modes", f"N must be an integer, got {n!r}")
    if n % 2:
        raise ParameterError("n_modes", f"N must be even, got {n}")
    if n < 2:
        raise ParameterError("n_modes", f"N must be >= 2, got {n}")
    for name in ("omega0", "Omega", "g", "delta_omega", "epsilon"):
        value = getattr(raw, name)
        if not math.isfinite(value):
            raise ParameterError(name, f"must be finite, got {value!r}")
    if raw.omega0 <= 0:
        raise ParameterError("omega0", f"omega0 must be > 0, got {raw.omega0}")
    if raw.Omega < 0:
        raise ParameterError("Omega", f"Omega must be >= 0, got {raw.Omega}")
    if raw.g < 0 or (raw.g == 0 and not allow_decoupled):
        raise ParameterError("g", f"g must be > 0, got {raw.g}")
    if raw.delta_omega <= 0:
        raise ParameterError(
            "delta_omega", f"delta_omega must be > 0, got {raw.delta_omega}"
        )
    if abs(raw.epsilon) >= 1:
        raise ParameterError("epsilon", f"|epsilon| must be < 1, got {raw.epsilon}")
    return raw


def derived_gamma(params: SystemParams) -> float:
    """Early-time rate of excitation transfer out of cavity 1.

    gamma = 2 Omega^2 delta_omega / (pi g^2), so gamma * T_B = 4 (Omega / g)^2.
    """
    return 2.0 * params.Omega**2 * params.delta_omega / (math.pi * params.g**2)


def scale_to_length(reference: SystemParams, l_ratio: float) -> SystemParams:
    """Rescale the resonator length by ``l_ratio``.

    The comb spacing goes as 1/l and the mode coupling as l^(-1/2); every
    other field is kept.
    """
    if not l_ratio > 0:
        raise ValueError(f"l_ratio must be > 0, got {l_ratio}")
    if l_ratio == 1:
        return reference
    return replace(
        reference,
        delta_omega=reference.delta_omega / l_ratio,
        g=reference.g / math.sqrt(l_ratio),
    )


def basis_index(role: str, j: int | None = None, n_modes: int | None = None) -> int:
    """Dense index of a basis state.

    ``role`` is ``"a1"``, ``"a2"`` or ``"b"``; the latter needs the mode
    label ``j`` and ``n_modes``.
    """
    if role == "a1":
        return CAVITY1
    if role == "a2":
        return CAVITY2
    if role == "b":
        if j is None or n_modes is None:
            raise ValueError("resonator index needs j and n_modes")
        half = n_modes // 2
        if not -half <= j <= half:
            raise ValueError(f"mode j={j} outside -{half}..{half}")
        return FIRST_MODE + j + half
    raise ValueError(f"unknown basis role {role!r}")


def basis_label(index: int, n_modes: int) -> str:
    """Inverse of :func:`basis_index`, e.g. ``'a1'`` or ``'b[-3]'``."""
    if index == CAVITY1:
        return "a1"
    if index == CAVITY2:
        return "a2"
    k = index - FIRST_MODE
    if not 0 <= k <= n_modes:
        raise ValueError(f"index {index} outside basis of dimension {n_modes + 3}")
    return f"b[{k - n_modes // 2}]"


def assemble_hamiltonian(params: SystemParams, use_epsilon: bool = False) -> np.ndarray:
    """Real symmetric single-excitation Hamiltonian, shape (N+3, N+3).

    The comb frequencies carry the factor (1 + epsilon) only when
    ``use_epsilon`` is set; the two cavity frequencies are never shifted.

    Only the basis layout is checked here (N even and >= 2), so decoupled
    limits such as g = 0 can be built for analytic cross-checks.  Physical
    validation is the job of :func:`validate_params`.
    """
    n = params.n_modes
    if n % 2 or n < 2:
        raise ParameterError("n_modes", f"N must be even and >= 2, got {n}")
    dim = n + 3
    h = np.zeros((dim, dim))
    modes = np.arange(FIRST_MODE, dim)
    h[CAVITY1, CAVITY1] = params.omega0
    h[CAVITY2, CAVITY2] = params.omega0
    h[modes, modes] = params.mode_frequencies(perturbed=use_epsilon)
    h[CAVITY1, CAVITY2] = h[CAVITY2, CAVITY1] = params.Omega
    h[CAVITY2, modes] = params.g
    h[modes, CAVITY2] = params.g
    return h


INITIAL_KINDS = ("special", "cavity2", "superposition")


def make_initial_state(kind, n_modes: int = 50) -> np.ndarray:
    """Initial single-excitation amplitude vector of length N + 3.

    ``kind`` is one of ``"special"`` (all amplitude in cavity 1),
    ``"cavity2"``, ``"superposition"`` (equal weight 1/sqrt(2) in both
    cavities) or an explicit amplitude sequence, which is normalised.
    """
    dim = n_modes + 3
    psi = np.zeros(dim, dtype=complex)
    if isinstance(kind, str):
        key = kind.lower()
        if key == "special":
            psi[CAVITY1] = 1.0
        elif key == "cavity2":
            psi[CAVITY2] = 1.0
        elif key == "superposition":
            psi[CAVITY1] = psi[CAVITY2] = 1.0 / math.sqrt(2.0)
        else:
            raise ValueError(
                f"unknown initial state {kind!r}; expected one of {INITIAL_KINDS}"
            )
        return psi

    amps = np.asarray(kind, dtype=complex)
    if amps.shape != (dim,):
        raise ValueError(f"custom state must have length {dim}, got shape {amps.shape}")
    norm = np.linalg.norm(amps)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("custom state has zero (or non-finite) norm")
    return amps / norm
