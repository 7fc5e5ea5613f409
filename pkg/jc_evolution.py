"""
Resonant Jaynes-Cummings Evolution and the Injection Map M(tau)

The interaction H_I = hbar lambda |e><G| a + h.c., with the bright ground
superposition |G> = (|g1> + |g2>)/sqrt(2), leaves every subspace

    V_m = span{|e,m-1>, |g1,m>, |g2,m>},  m >= 1

invariant, and acts trivially on V_0 = span{|g1,0>, |g2,0>}. This module
provides:
1. block_u - the closed-form 3x3 block of U(tau) on V_m
2. full_unitary - block-diagonal assembly on the truncated atom x field space
3. kraus_operators / super_m - the single-atom map M(tau) on the field
4. injection_superoperator - M(tau) as a sparse matrix on vec(rho)

Joint-space ordering is atom-major: index = a * (n_max + 1) + n with
a = 0 (e), 1 (g1), 2 (g2). The state |e, n_max> would couple to the
truncated |G, n_max+1>; it is kept as an identity block so the truncated
map stays exactly trace preserving.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np
import scipy.sparse as sp

from atoms import AtomPrep, density_matrix
from errors import StateError, UnderTruncationError
from fock import FieldState

logger = logging.getLogger(__name__)

N_ATOM_LEVELS = 3


@dataclass(frozen=True)
class BlockUnitary:
    """U(tau) restricted to V_m, in the basis {|e,m-1>, |g1,m>, |g2,m>}."""

    m: int
    phase: float
    matrix: np.ndarray = field(repr=False)


def block_u(m: int, phase: float) -> BlockUnitary:
    """
    Closed-form block of the evolution operator.

    Args:
        m: photon number of the ground-state components, m >= 1
        phase: lambda * sqrt(m) * tau

    Returns:
        BlockUnitary with C = cos(phase), S = sin(phase) and ground entries
        cos^2(phase/2), -sin^2(phase/2)
    """
    if m < 1:
        raise StateError(f"block index m must be >= 1, got {m}")
    c = math.cos(phase)
    s = math.sin(phase)
    ch = math.cos(0.5 * phase) ** 2
    sh = math.sin(0.5 * phase) ** 2
    off = -1j * s / math.sqrt(2.0)
    matrix = np.array([
        [c, off, off],
        [off, ch, -sh],
        [off, -sh, ch],
    ], dtype=complex)
    matrix.setflags(write=False)
    return BlockUnitary(m, phase, matrix)


def full_unitary(n_max: int, lambda_tau: float) -> np.ndarray:
    """Joint unitary on the 3(n_max+1)-dimensional atom x field space."""
    if n_max < 0:
        raise StateError(f"n_max must be >= 0, got {n_max}")
    dim_f = n_max + 1
    u = np.eye(N_ATOM_LEVELS * dim_f, dtype=complex)
    for m in range(1, n_max + 1):
        block = block_u(m, lambda_tau * math.sqrt(m)).matrix
        idx = [m - 1, dim_f + m, 2 * dim_f + m]
        u[np.ix_(idx, idx)] = block
    return u


def field_blocks(n_max: int, lambda_tau: float) -> np.ndarray:
    """
    Field operators <j|U|i> for atom levels i, j.

    Returns:
        array of shape (3, 3, n_max+1, n_max+1)
    """
    dim_f = n_max + 1
    u = full_unitary(n_max, lambda_tau)
    return u.reshape(N_ATOM_LEVELS, dim_f, N_ATOM_LEVELS, dim_f).transpose(0, 2, 1, 3)


def kraus_operators(n_max: int, prep: AtomPrep, lambda_tau: float) -> List[np.ndarray]:
    """
    Kraus operators of M(tau) on the n_max field space.

    With rho_A = sum_k w_k |psi_k><psi_k|, the operators are
    K_jk = sqrt(w_k) sum_i <j|U|i> psi_k[i] for every outgoing atom level j.
    """
    blocks = field_blocks(n_max, lambda_tau)
    weights, vectors = np.linalg.eigh(density_matrix(prep))
    kraus = []
    for w, psi in zip(weights, vectors.T):
        if w <= 0.0:
            continue
        amp = math.sqrt(w)
        for j in range(N_ATOM_LEVELS):
            op = amp * np.tensordot(psi, blocks[j], axes=(0, 0))
            if np.any(op):
                kraus.append(op)
    return kraus


def apply_kraus(rho: np.ndarray, kraus: List[np.ndarray]) -> np.ndarray:
    out = np.zeros_like(rho, dtype=complex)
    for k in kraus:
        out += k @ rho @ k.conj().T
    return 0.5 * (out + out.conj().T)


def super_m(field_state: FieldState, prep: AtomPrep, lambda_tau: float) -> FieldState:
    """
    One atom transit: M(tau) rho = Tr_A[U (rho x rho_A) U^dagger].

    The field is embedded with one level of headroom first (an atom adds at
    most one photon); population reaching that extra level beyond the tail
    tolerance raises UnderTruncationError, otherwise the level is dropped.
    """
    n_max = field_state.n_max
    padded = field_state.embed(n_max + 1)
    out = apply_kraus(padded.matrix, kraus_operators(n_max + 1, prep, lambda_tau))
    leaked = float(np.real(out[-1, -1]))
    if leaked > field_state.tail_tol:
        raise UnderTruncationError(leaked, n_max + 1, field_state.tail_tol)
    result = FieldState(n_max + 1, out, field_state.tail_tol).truncate(n_max)
    return result


def injection_superoperator(n_max: int, prep: AtomPrep, lambda_tau: float) -> sp.csr_matrix:
    """
    M(tau) acting on row-major vec(rho), with the dangling-block convention.

    vec(K rho K^dagger) = (K kron conj(K)) vec(rho).
    """
    dim = (n_max + 1) ** 2
    total = sp.csr_matrix((dim, dim), dtype=complex)
    for k in kraus_operators(n_max, prep, lambda_tau):
        ks = sp.csr_matrix(k)
        total = total + sp.kron(ks, ks.conj(), format="csr")
    return total
