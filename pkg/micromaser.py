"""
Coarse-Grained Micromaser Master Equation

    d rho / dt = r [M(tau) - 1] rho + (nu / 2Q) [2 a rho a^dag - a^dag a rho - rho a^dag a]

This module holds the cavity/injection parameters and everything built on the
master equation:
1. EngineParams and mu = r lambda^2 tau^2 / 2
2. liouvillian_apply / liouvillian_matrix - the generator, matrix-free and
   as a sparse matrix on row-major vec(rho)
3. evolve - adaptive explicit time integration (scipy RK45)
4. steady_state - direct sparse solve with a trace row, integration fallback
5. The affine mean-photon equation, its root and closed-form trajectory

A lossless cavity is represented by q_factor = inf and the loss term is then
skipped entirely.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import RK45
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from atoms import AtomPrep, theta
from constants import HBAR, K_B, TAIL_TOL
from errors import (
    IntegrationError,
    RunawayGainError,
    StateError,
    SteadyStateError,
    UnderTruncationError,
)
from fock import FieldState, annihilation_operator, mean_photon, thermal_state
from jc_evolution import injection_superoperator, super_m

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-8
DEFAULT_ABS_TOL = 1e-12
DEFAULT_STEADY_TOL = 1e-9
MAX_STEPS = 2_000_000


@dataclass(frozen=True)
class EngineParams:
    """
    Cavity and injection parameters.

    Attributes:
        nu: field angular frequency (rad/s)
        q_factor: cavity quality factor, math.inf for a lossless cavity
        lamb: atom-field coupling lambda (rad/s)
        tau: interaction time (s)
        rate: atomic injection rate r (1/s)
        n_max: Fock truncation used by the numerical routines
        tail_tol: tail-mass tolerance for states produced with these params
    """

    nu: float
    q_factor: float
    lamb: float
    tau: float
    rate: float
    n_max: int = 60
    tail_tol: float = field(default=TAIL_TOL, compare=False)

    def __post_init__(self):
        for name in ("nu", "q_factor"):
            value = getattr(self, name)
            if not value > 0.0:
                raise StateError(f"{name} must be positive, got {value}")
        for name in ("lamb", "tau", "rate"):
            value = getattr(self, name)
            if value < 0.0 or not math.isfinite(value):
                raise StateError(f"{name} must be finite and non-negative, got {value}")
        if self.n_max < 1:
            raise StateError(f"n_max must be >= 1, got {self.n_max}")
        if self.rate * self.tau > 1.0:
            logger.warning(
                "more than one atom in the cavity: rate=%g tau=%g rate*tau=%g > 1",
                self.rate, self.tau, self.rate * self.tau,
            )

    @property
    def lossless(self) -> bool:
        return math.isinf(self.q_factor)

    @property
    def kappa(self) -> float:
        """Photon decay rate nu/Q (0 for a lossless cavity)."""
        return 0.0 if self.lossless else self.nu / self.q_factor

    @property
    def lambda_tau(self) -> float:
        return self.lamb * self.tau


@dataclass(frozen=True)
class Evolution:
    """Result of evolve: final state plus the per-step trajectory if recorded."""

    state: FieldState
    times: np.ndarray
    mean_photons: np.ndarray
    steps: int


def mu(params: EngineParams) -> float:
    """Gain coefficient mu = r lambda^2 tau^2 / 2 (1/s)."""
    return 0.5 * params.rate * params.lamb ** 2 * params.tau ** 2


def loss_superoperator(n_max: int, kappa: float) -> sp.csr_matrix:
    """Zero-temperature cavity damping at rate kappa on row-major vec(rho)."""
    dim_f = n_max + 1
    a = sp.csr_matrix(annihilation_operator(n_max))
    n_op = sp.diags(np.arange(dim_f, dtype=float))
    eye = sp.identity(dim_f, format="csr")
    jump = sp.kron(a, a, format="csr")
    decay = sp.kron(n_op, eye, format="csr") + sp.kron(eye, n_op, format="csr")
    return (0.5 * kappa * (2.0 * jump - decay)).astype(complex).tocsr()


def liouvillian_matrix(params: EngineParams, prep: AtomPrep) -> sp.csr_matrix:
    """Sparse generator r[M(tau) - 1] + L_loss on the params.n_max space."""
    dim = (params.n_max + 1) ** 2
    gen = sp.csr_matrix((dim, dim), dtype=complex)
    if params.rate > 0.0:
        m_op = injection_superoperator(params.n_max, prep, params.lambda_tau)
        gen = gen + params.rate * (m_op - sp.identity(dim, dtype=complex, format="csr"))
    if not params.lossless:
        gen = gen + loss_superoperator(params.n_max, params.kappa)
    return gen.tocsr()


def liouvillian_apply(rho: FieldState, params: EngineParams, prep: AtomPrep) -> np.ndarray:
    """
    Time derivative d rho/dt of the master equation at rho.

    Returns:
        complex matrix with the shape of rho.matrix; its trace vanishes
    """
    if params.rate * params.tau > 1.0:
        logger.warning("liouvillian_apply beyond single-atom regime: rate*tau=%g", params.rate * params.tau)
    out = np.zeros_like(rho.matrix, dtype=complex)
    if params.rate > 0.0:
        injected = super_m(rho, prep, params.lambda_tau)
        out += params.rate * (injected.matrix - rho.matrix)
    if not params.lossless:
        a = annihilation_operator(rho.n_max)
        n_op = a.T @ a
        out += 0.5 * params.kappa * (
            2.0 * a @ rho.matrix @ a.T - n_op @ rho.matrix - rho.matrix @ n_op
        )
    return out


def _as_state(vec: np.ndarray, n_max: int, tail_tol: float) -> FieldState:
    dim_f = n_max + 1
    rho = vec.reshape(dim_f, dim_f)
    rho = 0.5 * (rho + rho.conj().T)
    return FieldState(n_max, rho / np.real(np.trace(rho)), tail_tol)


def evolve(rho0: FieldState,
           params: EngineParams,
           prep: AtomPrep,
           t_final: float,
           rel_tol: float = DEFAULT_REL_TOL,
           abs_tol: float = DEFAULT_ABS_TOL,
           record: bool = False) -> Evolution:
    """
    Integrate the master equation from rho0 to t_final.

    The state is symmetrized, rho <- (rho + rho^dag)/2, after every accepted
    RK45 step, and the tail mass is checked as the run proceeds.

    Args:
        rho0: initial field, its n_max must match params.n_max
        t_final: end time (s), >= 0
        rel_tol: per-step relative tolerance
        record: keep (t, <n>) at every accepted step

    Raises:
        IntegrationError: the step size underflowed
        UnderTruncationError: population reached the top level mid-run
    """
    if t_final < 0.0:
        raise StateError(f"t_final must be non-negative, got {t_final}")
    if rho0.n_max != params.n_max:
        raise StateError(f"state n_max={rho0.n_max} differs from params n_max={params.n_max}")
    if t_final == 0.0:
        n0 = mean_photon(rho0)
        return Evolution(rho0, np.array([0.0]), np.array([n0]), 0)

    dim_f = params.n_max + 1
    gen = liouvillian_matrix(params, prep)
    tail_index = dim_f * dim_f - 1
    diag_index = np.arange(dim_f) * (dim_f + 1)
    photon_numbers = np.arange(dim_f, dtype=float)

    def rhs(_t, y):
        return gen @ y

    solver = RK45(rhs, 0.0, rho0.matrix.ravel().astype(complex), t_final,
                  rtol=rel_tol, atol=abs_tol)
    times: List[float] = [0.0]
    means: List[float] = [mean_photon(rho0)]
    steps = 0
    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed":
            raise IntegrationError(f"integration failed at t={solver.t:.6g}: {message}")
        steps += 1
        if steps > MAX_STEPS:
            raise IntegrationError(f"exceeded {MAX_STEPS} steps before t_final={t_final:g}")
        square = solver.y.reshape(dim_f, dim_f)
        solver.y[:] = (0.5 * (square + square.conj().T)).ravel()
        tail = float(np.real(solver.y[tail_index]))
        if tail > rho0.tail_tol:
            raise UnderTruncationError(tail, params.n_max, rho0.tail_tol)
        if record:
            times.append(solver.t)
            means.append(float(np.dot(photon_numbers, np.real(solver.y[diag_index]))))

    trace = np.real(np.sum(solver.y[diag_index]))
    if abs(trace - 1.0) > 1e-9:
        raise IntegrationError(f"trace drifted to {trace:.12g}")
    state = _as_state(solver.y, params.n_max, rho0.tail_tol)
    if not record:
        times.append(solver.t)
        means.append(mean_photon(state))
    logger.debug("evolve: %d steps to t=%g, <n>=%g", steps, t_final, means[-1])
    return Evolution(state, np.array(times), np.array(means), steps)


def _population_null_dimension(gen: sp.csr_matrix, n_max: int) -> int:
    """Number of (near-)zero singular values in the population sector."""
    dim_f = n_max + 1
    idx = np.arange(dim_f) * (dim_f + 1)
    block = gen[idx][:, idx].toarray()
    scale = np.max(np.abs(block)) if np.any(block) else 0.0
    if scale == 0.0:
        return dim_f
    singular = np.linalg.svd(block, compute_uv=False)
    return int(np.sum(singular <= 1e-12 * scale * dim_f))


def steady_state(params: EngineParams,
                 prep: AtomPrep,
                 tol: float = DEFAULT_STEADY_TOL) -> FieldState:
    """
    Stationary field of the master equation.

    Solves the vectorized system with the first row replaced by the trace
    condition; when the solve is singular or its residual exceeds tol, falls
    back to long-time integration from the vacuum. The residual is measured
    as max|L rho_ss| relative to the largest generator entry.

    Raises:
        SteadyStateError: null space is not one-dimensional, or both routes fail
        RunawayGainError: tail mass grows while gain exceeds absorption plus loss
        UnderTruncationError: tail mass too large below threshold
    """
    gen = liouvillian_matrix(params, prep)
    dim_f = params.n_max + 1
    if _population_null_dimension(gen, params.n_max) > 1:
        raise SteadyStateError("ambiguous null space: the generator has several stationary states")

    scale = float(np.max(np.abs(gen.data))) if gen.nnz else 0.0
    weight = float(np.mean(np.abs(gen.data)))
    system = gen.tolil(copy=True)
    trace_row = np.zeros(dim_f * dim_f, dtype=complex)
    trace_row[np.arange(dim_f) * (dim_f + 1)] = weight
    system[0, :] = trace_row
    rhs = np.zeros(dim_f * dim_f, dtype=complex)
    rhs[0] = weight

    vec: Optional[np.ndarray] = None
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            vec = spsolve(system.tocsc(), rhs)
        except (MatrixRankWarning, RuntimeError) as exc:
            logger.warning("steady-state direct solve failed: %s; falling back to integration", exc)

    if vec is not None and np.all(np.isfinite(vec)):
        residual = float(np.max(np.abs(gen @ vec))) / scale
        if residual > tol:
            logger.warning("steady-state direct solve residual=%.3e > tol=%.1e; falling back to integration",
                           residual, tol)
            vec = None
    else:
        vec = None

    if vec is None:
        state = _steady_state_by_integration(params, prep, gen, scale, tol)
    else:
        state = _as_state(vec, params.n_max, params.tail_tol)

    if state.under_truncated:
        if mean_photon_relaxation_rate(params, prep) <= 0.0:
            raise RunawayGainError(
                f"maser threshold exceeded: tail mass {state.tail_mass:.3e} at n_max={params.n_max} "
                f"with gain beyond absorption plus loss"
            )
        raise UnderTruncationError(state.tail_mass, params.n_max, params.tail_tol)
    return state


def _steady_state_by_integration(params: EngineParams,
                                 prep: AtomPrep,
                                 gen: sp.csr_matrix,
                                 scale: float,
                                 tol: float) -> FieldState:
    rate = mean_photon_relaxation_rate(params, prep)
    if rate <= 0.0:
        raise RunawayGainError("maser threshold exceeded: no relaxation towards a stationary state")
    vacuum = thermal_state(params.n_max, 0.0, params.tail_tol)
    state = vacuum
    horizon = 40.0 / rate
    for _ in range(4):
        state = evolve(state, params, prep, horizon).state
        residual = float(np.max(np.abs(gen @ state.matrix.ravel()))) / scale
        if residual <= tol:
            return state
    raise SteadyStateError(f"integration fallback did not converge (residual {residual:.3e})")


def mean_photon_rhs(n_avg: float, params: EngineParams, prep: AtomPrep) -> float:
    """d<n>/dt = mu[(2 p_e - theta) <n> + 2 p_e] - (nu/Q) <n>."""
    g = mu(params)
    return g * ((2.0 * prep.p_e - theta(prep)) * n_avg + 2.0 * prep.p_e) - params.kappa * n_avg


def mean_photon_relaxation_rate(params: EngineParams, prep: AtomPrep) -> float:
    """mu (theta - 2 p_e) + nu/Q, the decay rate of the affine mean-photon equation."""
    return mu(params) * (theta(prep) - 2.0 * prep.p_e) + params.kappa


def mean_photon_steady(params: EngineParams, prep: AtomPrep) -> float:
    """
    Root of the mean-photon equation, 2 mu p_e / (mu (theta - 2 p_e) + nu/Q).

    Equal to n / (1 + zeta) with the bare photon number n and the loss and
    coherence correction zeta.

    Raises:
        RunawayGainError: the denominator is not positive
    """
    denominator = mean_photon_relaxation_rate(params, prep)
    if denominator <= 0.0:
        raise RunawayGainError(
            f"maser threshold exceeded: mu(theta - 2 p_e) + nu/Q = {denominator:.6g} <= 0"
        )
    return 2.0 * mu(params) * prep.p_e / denominator


def mean_photon_analytic(n0: float, t: float, params: EngineParams, prep: AtomPrep) -> float:
    """Closed-form solution of the affine mean-photon equation at time t."""
    rate = mean_photon_relaxation_rate(params, prep)
    source = 2.0 * mu(params) * prep.p_e
    if rate == 0.0:
        return n0 + source * t
    n_inf = source / rate
    return n_inf + (n0 - n_inf) * math.exp(-rate * t)


def exact_effective_temperature(n_mean: float, nu: float) -> float:
    """Temperature of the Bose distribution with mean n_mean at frequency nu."""
    if n_mean <= 0.0:
        return 0.0
    return HBAR * nu / (K_B * math.log1p(1.0 / n_mean))
