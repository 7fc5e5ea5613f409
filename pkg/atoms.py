"""
Injected Three-Level Atoms

Atoms enter the cavity in the state

    rho_D = p_e |e><e| + |c1|^2 |g1><g1| + |c2|^2 |g2><g2|
            + xi c1 c2* |g1><g2| + h.c.

with two exactly degenerate ground states. This module builds such
preparations:
1. phaseonium - explicit populations, ground amplitudes and dephasing factor
2. thermal_atoms - Boltzmann populations at temperature T, no coherence
3. coherent_thermal - thermal populations with a chosen ground coherence
4. dephase / with_phase - change xi or the phase Arg(c1 c2*)

Basis order for 3x3 matrices is {|e>, |g1>, |g2>}.
"""

import cmath
import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

import numpy as np

from constants import HBAR, K_B, NORMALIZATION_TOL
from errors import StateError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AtomPrep:
    """
    Preparation of one injected atom.

    Attributes:
        p_e: excited-state probability
        c1, c2: ground-state amplitudes
        xi: dephasing factor multiplying the ground coherence, |xi| <= 1
        label: provenance tag ("phaseonium", "thermal", ...)
        temperature: temperature (K) the populations were generated at, if any
        nu: transition angular frequency (rad/s) used with temperature, if any
    """

    p_e: float
    c1: complex
    c2: complex
    xi: complex = 1.0
    label: str = "phaseonium"
    temperature: Optional[float] = None
    nu: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "p_e", float(self.p_e))
        object.__setattr__(self, "c1", complex(self.c1))
        object.__setattr__(self, "c2", complex(self.c2))
        object.__setattr__(self, "xi", complex(self.xi))
        if not 0.0 <= self.p_e <= 1.0:
            raise StateError(f"p_e={self.p_e} outside [0, 1]")
        total = self.p_e + abs(self.c1) ** 2 + abs(self.c2) ** 2
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise StateError(f"p_e + |c1|^2 + |c2|^2 = {total:.12g}, not 1")
        if abs(self.xi) > 1.0 + 1e-15:
            raise StateError(f"|xi| = {abs(self.xi):.12g} exceeds 1")

    @property
    def ground_weight(self) -> float:
        """|c1|^2 + |c2|^2."""
        return abs(self.c1) ** 2 + abs(self.c2) ** 2

    @property
    def coherence(self) -> float:
        """Re(xi c1 c2*), the coherence term entering theta and zeta."""
        return (self.xi * self.c1 * self.c2.conjugate()).real

    @property
    def phase(self) -> float:
        """Arg(c1 c2*), zero when either amplitude vanishes."""
        product = self.c1 * self.c2.conjugate()
        return cmath.phase(product) if product != 0 else 0.0

    def to_json(self) -> Dict[str, Any]:
        return {
            "p_e": self.p_e,
            "c1": {"re": self.c1.real, "im": self.c1.imag},
            "c2": {"re": self.c2.real, "im": self.c2.imag},
            "xi": {"re": self.xi.real, "im": self.xi.imag},
            "label": self.label,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "AtomPrep":
        try:
            fields = dict(
                p_e=float(data["p_e"]),
                c1=_complex_from_json(data["c1"]),
                c2=_complex_from_json(data["c2"]),
                xi=_complex_from_json(data.get("xi", 1.0)),
                label=str(data.get("label", "phaseonium")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"malformed atom preparation: {exc}") from exc
        return cls(**fields)


def _complex_from_json(value: Any) -> complex:
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    return complex(float(value))


def phaseonium(p_e: float, c1: complex, c2: complex, xi: complex = 1.0) -> AtomPrep:
    """Partially coherent atoms with explicit amplitudes and dephasing factor."""
    return AtomPrep(p_e, c1, c2, xi, label="phaseonium")


def boltzmann_factor(T: float, nu: float) -> float:
    """exp(-hbar nu / k T)."""
    if T <= 0.0 or nu <= 0.0:
        raise StateError(f"temperature and frequency must be positive (T={T}, nu={nu})")
    return math.exp(-HBAR * nu / (K_B * T))


def thermal_atoms(T: float, nu: float) -> AtomPrep:
    """
    Atoms thermalized at temperature T on the transition frequency nu.

    With x = exp(-hbar nu / kT): p_e = x/(2+x), |c1|^2 = |c2|^2 = 1/(2+x).
    The ground coherence is absent, stored as xi = 0.
    """
    x = boltzmann_factor(T, nu)
    amplitude = math.sqrt(1.0 / (2.0 + x))
    p_e = 1.0 - 2.0 / (2.0 + x)
    return AtomPrep(p_e, amplitude, amplitude, 0.0, label="thermal", temperature=T, nu=nu)


def coherent_thermal(T: float,
                     nu: float,
                     coherence: float,
                     phase: float = math.pi,
                     xi: complex = 1.0) -> AtomPrep:
    """
    Thermal populations slightly displaced to carry ground coherence.

    Keeps p_e at its thermal value and |c1|^2 + |c2|^2 = 1 - p_e while setting
    |c1 c2| = coherence and Arg(c1 c2*) = phase.

    Args:
        T: temperature (K) for the excited population
        nu: transition angular frequency (rad/s)
        coherence: target |c1 c2|, at most (1 - p_e)/2
        phase: Arg(c1 c2*) in radians
        xi: dephasing factor
    """
    base = thermal_atoms(T, nu)
    s = 1.0 - base.p_e
    if coherence < 0.0 or coherence > 0.5 * s:
        raise StateError(f"coherence {coherence} outside [0, {0.5 * s:.6g}] for T={T}")
    root = math.sqrt(max(s * s - 4.0 * coherence * coherence, 0.0))
    w1 = 0.5 * (s + root)
    w2 = s - w1
    c1 = math.sqrt(w1)
    c2 = math.sqrt(w2) * cmath.exp(-1j * phase)
    return AtomPrep(base.p_e, c1, c2, xi, label="phaseonium", temperature=T, nu=nu)


def dephase(prep: AtomPrep, xi_new: complex) -> AtomPrep:
    """Same populations and amplitudes, new dephasing factor."""
    return replace(prep, xi=complex(xi_new))


def with_phase(prep: AtomPrep, phase: float) -> AtomPrep:
    """Rotate c2 so that Arg(c1 c2*) = phase, keeping both magnitudes."""
    arg1 = cmath.phase(prep.c1) if prep.c1 != 0 else 0.0
    c2 = abs(prep.c2) * cmath.exp(1j * (arg1 - phase))
    return replace(prep, c2=c2)


def density_matrix(prep: AtomPrep) -> np.ndarray:
    """3x3 rho_D in the basis {|e>, |g1>, |g2>}."""
    off = prep.xi * prep.c1 * prep.c2.conjugate()
    return np.array([
        [prep.p_e, 0.0, 0.0],
        [0.0, abs(prep.c1) ** 2, off],
        [0.0, off.conjugate(), abs(prep.c2) ** 2],
    ], dtype=complex)


def theta(prep: AtomPrep) -> float:
    """theta = |c1|^2 + |c2|^2 + 2 Re(xi c1 c2*)."""
    return prep.ground_weight + 2.0 * prep.coherence


def bright_population(prep: AtomPrep) -> float:
    """
    Population of |G> = (|g1> + |g2>)/sqrt(2) in rho_D.

    Only |G> couples to the field, so absorption is weighted by theta/2.
    """
    bright = np.array([0.0, 1.0, 1.0]) / math.sqrt(2.0)
    return float(np.real(bright @ density_matrix(prep) @ bright))
