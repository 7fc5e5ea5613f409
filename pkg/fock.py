"""
Truncated Fock-Space Field States

This module represents the single-mode cavity field as a density matrix on the
Fock basis |0>, |1>, ..., |n_max>:
1. FieldState - immutable, validated density matrix with a tail-mass flag
2. Constructors - diagonal, thermal (virtual Bose), pure Fock, auto-growing
3. Observables - mean photon number, variance, Mandel Q, trace distance

Every constructor checks the tail mass (population of the top level). A state
whose top level carries more than the tail tolerance is flagged as
under-truncated; constructors that cannot honour the caller's request raise
UnderTruncationError instead of truncating silently.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence

import numpy as np

from constants import (
    HERMITIAN_TOL,
    N_MAX_CAP,
    NORMALIZATION_TOL,
    POSITIVITY_TOL,
    TAIL_TOL,
    TRACE_TOL,
)
from errors import StateError, UnderTruncationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FieldState:
    """
    Density matrix of the cavity mode, truncated at Fock level n_max.

    The matrix is copied and frozen on construction, so a FieldState can be
    shared read-only between threads.
    """

    n_max: int
    matrix: np.ndarray = field(repr=False)
    tail_tol: float = field(default=TAIL_TOL, compare=False)

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=complex, copy=True)
        dim = self.n_max + 1
        if self.n_max < 0:
            raise StateError(f"n_max must be >= 0, got {self.n_max}")
        if rho.shape != (dim, dim):
            raise StateError(f"matrix shape {rho.shape} does not match n_max={self.n_max}")
        _check_density_matrix(rho)
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @property
    def dim(self) -> int:
        return self.n_max + 1

    @property
    def populations(self) -> np.ndarray:
        """Fock-level populations (real diagonal)."""
        return np.real(np.diag(self.matrix)).copy()

    @property
    def tail_mass(self) -> float:
        return float(np.real(self.matrix[-1, -1]))

    @property
    def under_truncated(self) -> bool:
        return self.tail_mass > self.tail_tol

    def embed(self, n_max_new: int) -> "FieldState":
        """Zero-pad the state into a larger truncation."""
        if n_max_new < self.n_max:
            raise StateError(f"cannot embed n_max={self.n_max} into smaller n_max={n_max_new}")
        rho = np.zeros((n_max_new + 1, n_max_new + 1), dtype=complex)
        rho[: self.dim, : self.dim] = self.matrix
        return FieldState(n_max_new, rho, self.tail_tol)

    def truncate(self, n_max_new: int) -> "FieldState":
        """Drop levels above n_max_new and renormalize the trace."""
        if n_max_new > self.n_max:
            raise StateError(f"cannot truncate n_max={self.n_max} up to n_max={n_max_new}")
        rho = np.array(self.matrix[: n_max_new + 1, : n_max_new + 1])
        kept = np.real(np.trace(rho))
        if kept <= 0.0:
            raise StateError("truncation removes all population")
        return FieldState(n_max_new, rho / kept, self.tail_tol)

    def to_json(self) -> Dict[str, Any]:
        """Serialize as {"n_max", "re", "im"}."""
        return {
            "n_max": self.n_max,
            "re": np.real(self.matrix).tolist(),
            "im": np.imag(self.matrix).tolist(),
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any], tail_tol: float = TAIL_TOL) -> "FieldState":
        try:
            n_max = int(data["n_max"])
            rho = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"malformed field-state document: {exc}") from exc
        return cls(n_max, rho, tail_tol)


def _check_density_matrix(rho: np.ndarray) -> None:
    """Trace, Hermiticity and numerical positivity checks."""
    trace = np.trace(rho)
    if abs(trace - 1.0) > TRACE_TOL:
        raise StateError(f"trace {trace.real:.15g}{trace.imag:+.3g}j differs from 1")
    herm_residual = np.max(np.abs(rho - rho.conj().T))
    if herm_residual > HERMITIAN_TOL:
        raise StateError(f"matrix is not Hermitian (residual {herm_residual:.3e})")
    min_eig = np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))
    if min_eig < POSITIVITY_TOL:
        raise StateError(f"negative eigenvalue {min_eig:.3e}")


def flag_tail(state: FieldState, context: str) -> FieldState:
    """Log a structured warning when the state is under-truncated."""
    if state.under_truncated:
        logger.warning(
            "under-truncated field state: context=%s n_max=%d tail_mass=%.3e tail_tol=%.1e",
            context, state.n_max, state.tail_mass, state.tail_tol,
        )
    return state


def require_tail(state: FieldState, context: str) -> FieldState:
    """Raise UnderTruncationError when the tail check fails."""
    if state.under_truncated:
        logger.debug("tail check failed in %s", context)
        raise UnderTruncationError(state.tail_mass, state.n_max, state.tail_tol)
    return state


def diagonal_state(populations: Sequence[float], tail_tol: float = TAIL_TOL) -> FieldState:
    """
    Build a diagonal (phase-averaged) field state.

    Args:
        populations: Fock populations p_0..p_n_max, summing to 1 within 1e-9

    Returns:
        FieldState with n_max = len(populations) - 1
    """
    p = np.asarray(populations, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise StateError("populations must be a non-empty list")
    if np.any(p < 0.0):
        raise StateError(f"negative population {p.min():.3e}")
    total = p.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise StateError(f"populations sum to {total:.12g}, not 1")
    state = FieldState(p.size - 1, np.diag(p / total).astype(complex), tail_tol)
    return flag_tail(state, "diagonal_state")


def fock_state(n_max: int, m: int, tail_tol: float = TAIL_TOL) -> FieldState:
    """Pure number state |m> in an n_max truncation."""
    if not 0 <= m <= n_max:
        raise StateError(f"Fock index {m} outside 0..{n_max}")
    p = np.zeros(n_max + 1)
    p[m] = 1.0
    return diagonal_state(p, tail_tol)


def thermal_state(n_max: int, nbar: float, tail_tol: float = TAIL_TOL) -> FieldState:
    """
    Virtual Bose (geometric) distribution p_m = nbar^m / (nbar+1)^(m+1).

    The distribution is renormalized on the truncated space, so its mean
    approaches nbar from below as n_max grows.

    Raises:
        UnderTruncationError: if p_{n_max} exceeds the tail tolerance
    """
    if nbar < 0.0:
        raise StateError(f"nbar must be non-negative, got {nbar}")
    if n_max < 0:
        raise StateError(f"n_max must be >= 0, got {n_max}")
    m = np.arange(n_max + 1)
    if nbar == 0.0:
        p = (m == 0).astype(float)
    else:
        ratio = nbar / (nbar + 1.0)
        p = np.exp(m * np.log(ratio)) / (nbar + 1.0)
    if nbar > 0.0 and p[-1] > tail_tol:
        raise UnderTruncationError(float(p[-1]), n_max, tail_tol)
    p = p / p.sum()
    return FieldState(n_max, np.diag(p).astype(complex), tail_tol)


def thermal_n_max(nbar: float, tail_tol: float = TAIL_TOL) -> int:
    """Smallest truncation whose geometric tail p_{n_max} is within tail_tol."""
    if nbar <= 0.0:
        return 0
    needed = math.log(tail_tol * (nbar + 1.0)) / math.log1p(-1.0 / (nbar + 1.0))
    return max(0, math.ceil(needed))


def auto_thermal_state(nbar: float,
                       n_max: int = 16,
                       cap: int = N_MAX_CAP,
                       tail_tol: float = TAIL_TOL) -> FieldState:
    """Thermal state whose truncation doubles until the tail check passes."""
    current = max(int(n_max), 1)
    while True:
        try:
            return thermal_state(current, nbar, tail_tol)
        except UnderTruncationError:
            if current >= cap:
                raise
            current = min(2 * current, cap)
            logger.debug("auto_thermal_state: growing n_max to %d for nbar=%g", current, nbar)


def number_operator(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max + 1, dtype=float))


def annihilation_operator(n_max: int) -> np.ndarray:
    """Truncated a with a|m> = sqrt(m)|m-1>."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1)


def mean_photon(state: FieldState) -> float:
    """<n> = Tr[n rho]."""
    m = np.arange(state.dim)
    value = np.sum(m * np.diag(state.matrix))
    return float(np.real(value))


def photon_variance(state: FieldState) -> float:
    m = np.arange(state.dim, dtype=float)
    p = state.populations
    mean = np.dot(m, p)
    return float(np.dot(m * m, p) - mean * mean)


def mandel_q(state: FieldState) -> float:
    """Mandel Q = (Var n - <n>) / <n>; equals nbar for a thermal field."""
    mean = mean_photon(state)
    if mean == 0.0:
        return 0.0
    return (photon_variance(state) - mean) / mean


def trace_distance(a: FieldState, b: FieldState) -> float:
    """Half the trace norm of a - b, embedding the smaller truncation."""
    n_max = max(a.n_max, b.n_max)
    diff = a.embed(n_max).matrix - b.embed(n_max).matrix
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))
