"""Exact time evolution by spectral decomposition of a real symmetric H.

psi(t) = V exp(-i Lambda t) V^T psi(0) is unitary to rounding for any t,
so echo values at hundreds or thousands of round trips carry no
step-size drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RESIDUAL_TOL = 1e-10
ORTHO_TOL = 1e-10

# states held in memory at once by evolve_on_grid
_CHUNK = 4096


class ConvergenceError(ArithmeticError):
    """The eigensolver result failed its residual or orthonormality audit."""


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def residuals(self, h: np.ndarray) -> np.ndarray:
        """||H v_k - lambda_k v_k|| for every k."""
        v = self.eigenvectors
        return np.linalg.norm(h @ v - v * self.eigenvalues, axis=0)

    def orthonormality_error(self) -> float:
        v = self.eigenvectors
        return float(np.abs(v.T @ v - np.eye(self.dim)).max())


def diagonalize(h: np.ndarray) -> EigenSystem:
    """Eigendecomposition of a real symmetric matrix.

    Eigenvector signs are fixed so that the largest-magnitude component of
    each column is positive, which makes the output reproducible for
    identical input.  Raises ConvergenceError if any residual exceeds
    ``1e-10 * ||H||`` or the eigenvectors are not orthonormal to 1e-10.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.array_equal(h, h.T):
        raise ValueError("matrix is not symmetric")

    off = h - np.diag(np.diag(h))
    if not off.any():
        # already diagonal: keep the entries bit-exact
        order = np.argsort(np.diag(h), kind="stable")
        w = np.diag(h)[order].copy()
        v = np.eye(h.shape[0])[:, order]
    else:
        w, v = np.linalg.eigh(h)
        pivots = np.abs(v).argmax(axis=0)
        signs = np.sign(v[pivots, np.arange(v.shape[1])])
        v = v * signs

    eig = EigenSystem(w, v)
    scale = max(np.linalg.norm(h, 2), np.finfo(float).tiny)
    worst = float(eig.residuals(h).max()) if h.size else 0.0
    if worst > RESIDUAL_TOL * scale:
        raise ConvergenceError(
            f"eigensolver residual {worst:.3e} exceeds {RESIDUAL_TOL:g} * ||H|| = "
            f"{RESIDUAL_TOL * scale:.3e}"
        )
    ortho = eig.orthonormality_error()
    if ortho > ORTHO_TOL:
        raise ConvergenceError(
            f"eigenvectors not orthonormal: max |V^T V - I| = {ortho:.3e} "
            f"(worst residual {worst:.3e})"
        )
    return eig


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid.

    ``start``, ``stop`` and ``dt`` are in units of ``unit`` (normally the
    round-trip time T_B, expressed in natural time units).
    """

    start: float
    stop: float
    dt: float
    unit: float = 1.0
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.stop < self.start:
            raise ValueError(f"stop {self.stop} precedes start {self.start}")
        if not self.unit > 0:
            raise ValueError(f"unit must be > 0, got {self.unit}")
        steps = (self.stop - self.start) / self.dt
        n = int(round(steps))
        if abs(steps - n) > 1e-9 * max(1.0, steps):
            raise ValueError(
                f"span {self.stop - self.start} is not a whole number of dt={self.dt}"
            )
        pts = self.start + self.dt * np.arange(n + 1)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @classmethod
    def span(cls, stop: float, dt: float = 0.01, start: float = 0.0, unit: float = 1.0):
        return cls(start, stop, dt, unit)

    def __len__(self) -> int:
        return self.points.size

    @property
    def times(self) -> np.ndarray:
        """Grid points in natural time units."""
        return self.points * self.unit

    def window(self, lo: float, hi: float) -> np.ndarray:
        """Boolean mask of samples with lo <= t <= hi (grid units).

        A relative slack of 1e-9 of dt absorbs rounding in the points.
        """
        slack = 1e-9 * self.dt
        return (self.points >= lo - slack) & (self.points <= hi + slack)


@dataclass(frozen=True)
class Trajectory:
    """States psi(t_k), one row per grid point."""

    grid: TimeGrid
    states: np.ndarray

    def __post_init__(self):
        if self.states.shape[0] != len(self.grid):
            raise ValueError(
                f"{self.states.shape[0]} states for a grid of {len(self.grid)} points"
            )

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def amplitude(self, index: int) -> np.ndarray:
        return self.states[:, index]

    def populations(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


def _check_dim(eig: EigenSystem, psi0: np.ndarray) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (eig.dim,):
        raise ValueError(f"state of shape {psi0.shape} does not match dimension {eig.dim}")
    return psi0


def evolve_to(eig: EigenSystem, psi0: np.ndarray, t: float) -> np.ndarray:
    """psi(t) = V exp(-i Lambda t) V^T psi0, with t in natural units."""
    psi0 = _check_dim(eig, psi0)
    v = eig.eigenvectors
    coeffs = v.T @ psi0
    return v @ (np.exp(-1j * eig.eigenvalues * t) * coeffs)


def evolve_times(eig: EigenSystem, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """States at each of ``times`` (natural units), shape (len(times), D)."""
    psi0 = _check_dim(eig, psi0)
    times = np.asarray(times, dtype=float)
    v = eig.eigenvectors
    coeffs = v.T @ psi0
    out = np.empty((times.size, eig.dim), dtype=complex)
    for lo in range(0, times.size, _CHUNK):
        t = times[lo : lo + _CHUNK]
        phases = np.exp(-1j * np.outer(t, eig.eigenvalues)) * coeffs
        out[lo : lo + _CHUNK] = phases @ v.T
    return out


def evolve_on_grid(eig: EigenSystem, psi0: np.ndarray, grid: TimeGrid) -> Trajectory:
    return Trajectory(grid, evolve_times(eig, psi0, grid.times))


def component_series(
    eig: EigenSystem, psi0: np.ndarray, times: np.ndarray, index: int
) -> np.ndarray:
    """Amplitude <index|psi(t)> without materialising full states."""
    psi0 = _check_dim(eig, psi0)
    v = eig.eigenvectors
    weights = v[index] * (v.T @ psi0)
    times = np.asarray(times, dtype=float)
    out = np.empty(times.size, dtype=complex)
    for lo in range(0, times.size, _CHUNK):
        t = times[lo : lo + _CHUNK]
        out[lo : lo + _CHUNK] = np.exp(-1j * np.outer(t, eig.eigenvalues)) @ weights
    return out
