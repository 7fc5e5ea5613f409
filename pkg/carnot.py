"""
Photon-Carnot Cycle Thermodynamics

Static thermodynamics of the cavity field driven to stationarity by the
injected atoms:
1. bare_n, zeta - photon number without coherence/loss and its correction
2. effective_temperature - T' = T / (1 + zeta)
3. photon_entropy - S = k ln(n+1) + hbar nu n / T'
4. run_cycle - four-corner Carnot cycle, heats, work and efficiency
5. efficiency_closed_form / efficiency_limits / positive_work_condition
6. ts_diagram - sampled temperature-entropy diagram of the cycle

Corners 1 -> 2 form the hot isotherm (atoms with ground coherence), 3 -> 4
the cold isotherm (thermal atoms); 2 -> 3 and 4 -> 1 are adiabats at constant
photon number. Corner photon numbers use the high-temperature mapping
n = k T' / (hbar nu).
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from atoms import AtomPrep, dephase
from constants import HBAR, HIGH_T_MIN_PHOTONS, K_B
from errors import NumericalError, RunawayGainError, StateError, UnphysicalZetaError
from micromaser import EngineParams, mu

logger = logging.getLogger(__name__)

LABELING_HOT_COLD = "hot-cold"
LABELING_AS_PRINTED = "as-printed"
FREQUENCY_LABELINGS = (LABELING_HOT_COLD, LABELING_AS_PRINTED)

CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class IsothermSpec:
    """Reservoir temperature (K), atom preparation and stroke frequency (rad/s)."""

    T: float
    prep: AtomPrep
    nu: float

    def __post_init__(self):
        if not self.T > 0.0:
            raise StateError(f"isotherm temperature must be positive, got {self.T}")
        if not self.nu > 0.0:
            raise StateError(f"isotherm frequency must be positive, got {self.nu}")


@dataclass(frozen=True)
class CycleSpec:
    """
    Carnot cycle definition.

    Attributes:
        hot: isothermal expansion stroke (corners 1 -> 2)
        cold: isothermal compression stroke (corners 3 -> 4)
        nu1, nu2: corner frequencies of the hot isotherm, nu1 > nu2
        engine: shared coupling, interaction time, injection rate and Q
        frequency_labeling: "hot-cold" evaluates zeta_h at hot.nu; "as-printed"
            swaps the two stroke frequencies
    """

    hot: IsothermSpec
    cold: IsothermSpec
    nu1: float
    nu2: float
    engine: EngineParams
    frequency_labeling: str = LABELING_HOT_COLD

    def __post_init__(self):
        if not (self.nu1 > self.nu2 > 0.0):
            raise StateError(f"corner frequencies must satisfy nu1 > nu2 > 0 (nu1={self.nu1}, nu2={self.nu2})")
        if self.frequency_labeling not in FREQUENCY_LABELINGS:
            raise StateError(f"unknown frequency_labeling {self.frequency_labeling!r}")
        if self.cold.prep.coherence != 0.0:
            logger.warning(
                "cold atoms carry ground coherence: coherence=%g; using the general zeta expression",
                self.cold.prep.coherence,
            )


@dataclass(frozen=True)
class Corner:
    index: int
    nu: float
    t_eff: float
    n_mean: float
    entropy: float


@dataclass(frozen=True)
class CycleReport:
    """Corners, heats (J), work (J) and efficiency of one cycle."""

    corners: Tuple[Corner, Corner, Corner, Corner]
    zeta_h: float
    zeta_l: float
    t_h_eff: float
    t_l_eff: float
    q_in: float
    q_out: float
    work: float
    eta: float
    eta_temperature_ratio: float
    eta_closed_form: float
    positive_work: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "corners": [
                {"index": c.index, "nu_radps": c.nu, "T_eff_K": c.t_eff,
                 "n_mean": c.n_mean, "entropy_JperK": c.entropy}
                for c in self.corners
            ],
            "zeta_h": self.zeta_h,
            "zeta_l": self.zeta_l,
            "T_h_eff_K": self.t_h_eff,
            "T_l_eff_K": self.t_l_eff,
            "q_in_J": self.q_in,
            "q_out_J": self.q_out,
            "work_J": self.work,
            "eta": self.eta,
            "eta_temperature_ratio": self.eta_temperature_ratio,
            "eta_closed_form": self.eta_closed_form,
            "positive_work": self.positive_work,
        }


@dataclass(frozen=True)
class EfficiencyLimits:
    ideal: float
    dephased: float
    bad_cavity: float


@dataclass(frozen=True)
class PositiveWork:
    satisfied: bool
    margin: float


@dataclass(frozen=True)
class DiagramPoint:
    stroke: str
    index: int
    entropy: float
    t_eff: float
    nu: float
    n_mean: float


def bare_n(prep: AtomPrep) -> float:
    """
    Photon number without coherence or loss: 2 p_e / (|c1|^2 + |c2|^2 - 2 p_e).

    Raises:
        RunawayGainError: at or above the maser threshold
    """
    denominator = prep.ground_weight - 2.0 * prep.p_e
    if denominator <= 0.0:
        raise RunawayGainError(
            f"maser threshold exceeded: |c1|^2 + |c2|^2 - 2 p_e = {denominator:.6g} <= 0"
        )
    return 2.0 * prep.p_e / denominator


def loss_term(nu: float, engine: EngineParams) -> float:
    """nu / (2 mu Q), zero for a lossless cavity."""
    if engine.lossless:
        return 0.0
    gain = mu(engine)
    if gain == 0.0:
        raise UnphysicalZetaError("zeta undefined: mu = 0 with a finite quality factor")
    return nu / (2.0 * gain * engine.q_factor)


def zeta(prep: AtomPrep, engine: EngineParams, nu: Optional[float] = None) -> float:
    """
    zeta = (n / p_e) [Re(xi c1 c2*) + nu / (2 mu Q)].

    n / p_e is evaluated as 2 / (|c1|^2 + |c2|^2 - 2 p_e) so p_e = 0 is regular.

    Args:
        prep: atom preparation of the stroke
        engine: shared cavity and injection parameters
        nu: stroke frequency, defaults to engine.nu
    """
    bare_n(prep)
    nu = engine.nu if nu is None else nu
    n_over_pe = 2.0 / (prep.ground_weight - 2.0 * prep.p_e)
    return n_over_pe * (prep.coherence + loss_term(nu, engine))


def effective_temperature(T: float, zeta_value: float) -> float:
    """T' = T / (1 + zeta)."""
    if 1.0 + zeta_value <= 0.0:
        raise UnphysicalZetaError(f"1 + zeta = {1.0 + zeta_value:.6g} <= 0: effective temperature undefined")
    return T / (1.0 + zeta_value)


def photon_entropy(n_e: float, nu: float, t_eff: float) -> float:
    """S = k ln(n_e + 1) + hbar nu n_e / T' (J/K)."""
    if n_e < 0.0:
        raise StateError(f"photon number must be non-negative, got {n_e}")
    if not t_eff > 0.0:
        raise StateError(f"effective temperature must be positive, got {t_eff}")
    return K_B * math.log1p(n_e) + HBAR * nu * n_e / t_eff


def bose_entropy(n: float) -> float:
    """Canonical photon entropy k[(n+1) ln(n+1) - n ln n]."""
    if n <= 0.0:
        return 0.0
    return K_B * (math.log1p(n) + n * math.log1p(1.0 / n))


def stroke_frequencies(spec: CycleSpec) -> Tuple[float, float]:
    """Frequencies at which zeta_h and zeta_l are evaluated."""
    if spec.frequency_labeling == LABELING_AS_PRINTED:
        return spec.cold.nu, spec.hot.nu
    return spec.hot.nu, spec.cold.nu


def stroke_zetas(spec: CycleSpec) -> Tuple[float, float]:
    nu_h, nu_l = stroke_frequencies(spec)
    return zeta(spec.hot.prep, spec.engine, nu_h), zeta(spec.cold.prep, spec.engine, nu_l)


def efficiency_closed_form(zeta_h: float, zeta_l: float, t_h: float, t_l: float) -> float:
    """eta = 1 - [(1 + zeta_h) / (1 + zeta_l)] T_l / T_h."""
    if 1.0 + zeta_h <= 0.0 or 1.0 + zeta_l <= 0.0:
        raise UnphysicalZetaError(f"1 + zeta must be positive (zeta_h={zeta_h}, zeta_l={zeta_l})")
    if not (t_h > 0.0 and t_l > 0.0):
        raise StateError(f"temperatures must be positive (T_h={t_h}, T_l={t_l})")
    return 1.0 - (1.0 + zeta_h) / (1.0 + zeta_l) * t_l / t_h


def high_t_photons(t_eff: float, nu: float) -> float:
    """n = k T' / (hbar nu)."""
    return K_B * t_eff / (HBAR * nu)


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= CONSISTENCY_TOL * max(1.0, abs(a), abs(b))


def run_cycle(spec: CycleSpec) -> CycleReport:
    """
    Evaluate the four corners, heats, work and efficiency of the cycle.

    Raises:
        UnphysicalZetaError: 1 + zeta <= 0 on either stroke
        RunawayGainError: a stroke's atoms are above threshold
        NumericalError: the three efficiency expressions disagree
    """
    zeta_h, zeta_l = stroke_zetas(spec)
    t_h_eff = effective_temperature(spec.hot.T, zeta_h)
    t_l_eff = effective_temperature(spec.cold.T, zeta_l)

    ratio = t_l_eff / t_h_eff
    nus = (spec.nu1, spec.nu2, spec.nu2 * ratio, spec.nu1 * ratio)
    temps = (t_h_eff, t_h_eff, t_l_eff, t_l_eff)
    corners = []
    for index, (nu_i, t_i) in enumerate(zip(nus, temps), start=1):
        n_i = high_t_photons(t_i, nu_i)
        if n_i < HIGH_T_MIN_PHOTONS:
            logger.warning(
                "high-temperature mapping dubious: corner=%d n_mean=%.4g < %g",
                index, n_i, HIGH_T_MIN_PHOTONS,
            )
        corners.append(Corner(index, nu_i, t_i, n_i, photon_entropy(n_i, nu_i, t_i)))

    s1, s2, s3, s4 = (c.entropy for c in corners)
    q_in = t_h_eff * (s2 - s1)
    q_out = t_l_eff * (s3 - s4)
    work = q_in - q_out
    eta = work / q_in
    eta_ratio = 1.0 - ratio
    eta_closed = efficiency_closed_form(zeta_h, zeta_l, spec.hot.T, spec.cold.T)
    if not (_close(eta, eta_ratio) and _close(eta, eta_closed)):
        raise NumericalError(
            f"efficiency expressions disagree: heats={eta:.15g} ratio={eta_ratio:.15g} closed={eta_closed:.15g}"
        )
    return CycleReport(
        corners=tuple(corners),
        zeta_h=zeta_h,
        zeta_l=zeta_l,
        t_h_eff=t_h_eff,
        t_l_eff=t_l_eff,
        q_in=q_in,
        q_out=q_out,
        work=work,
        eta=eta,
        eta_temperature_ratio=eta_ratio,
        eta_closed_form=eta_closed,
        positive_work=work > 0.0,
    )


def efficiency_limits(spec: CycleSpec) -> EfficiencyLimits:
    """
    Efficiency in the three limiting regimes.

    ideal: full coherence (xi = 1) in a lossless cavity.
    dephased: xi = 0 on both strokes at the cycle's quality factor.
    bad_cavity: Q -> 0, where the ratio (1 + zeta_h)/(1 + zeta_l) tends to
        (nu_h n_h p_e^l) / (nu_l n_l p_e^h).
    """
    nu_h, nu_l = stroke_frequencies(spec)
    hot, cold = spec.hot.prep, spec.cold.prep
    lossless = replace(spec.engine, q_factor=math.inf)

    ideal = efficiency_closed_form(
        zeta(dephase(hot, 1.0), lossless, nu_h),
        zeta(cold, lossless, nu_l),
        spec.hot.T, spec.cold.T,
    )
    dephased = efficiency_closed_form(
        zeta(dephase(hot, 0.0), spec.engine, nu_h),
        zeta(dephase(cold, 0.0), spec.engine, nu_l),
        spec.hot.T, spec.cold.T,
    )
    n_h, n_l = bare_n(hot), bare_n(cold)
    if n_l == 0.0 or hot.p_e == 0.0:
        raise UnphysicalZetaError("bad-cavity limit undefined: cold photon number or hot p_e vanishes")
    loss_ratio = (nu_h * n_h * cold.p_e) / (nu_l * n_l * hot.p_e)
    bad_cavity = 1.0 - loss_ratio * spec.cold.T / spec.hot.T
    return EfficiencyLimits(ideal=ideal, dephased=dephased, bad_cavity=bad_cavity)


def positive_work_condition(spec: CycleSpec) -> PositiveWork:
    """T_h > [(1 + zeta_h) / (1 + zeta_l)] T_l, with margin in kelvin."""
    zeta_h, zeta_l = stroke_zetas(spec)
    effective_temperature(spec.hot.T, zeta_h)
    effective_temperature(spec.cold.T, zeta_l)
    margin = spec.hot.T - (1.0 + zeta_h) / (1.0 + zeta_l) * spec.cold.T
    return PositiveWork(satisfied=margin > 0.0, margin=margin)


def caption_shift_coherence(prep: AtomPrep, T: float) -> float:
    """First-order rise n T |c1 c2| / p_e of the hot effective temperature."""
    return bare_n(prep) * T * abs(prep.c1 * prep.c2) / prep.p_e


def caption_shift_loss(prep: AtomPrep, T: float, nu: float, engine: EngineParams) -> float:
    """First-order drop n T nu / (2 mu p_e Q) of an effective temperature."""
    return bare_n(prep) * T * loss_term(nu, engine) / prep.p_e


def _stroke(name: str, start: Corner, end: Corner, points: int, isotherm: bool) -> List[DiagramPoint]:
    samples = []
    nus = np.linspace(start.nu, end.nu, points)
    for i, nu_i in enumerate(nus):
        if i == 0:
            corner = start
        elif i == points - 1:
            corner = end
        else:
            corner = None
        if corner is not None:
            samples.append(DiagramPoint(name, i, corner.entropy, corner.t_eff, corner.nu, corner.n_mean))
        elif isotherm:
            n_i = high_t_photons(start.t_eff, nu_i)
            samples.append(DiagramPoint(name, i, photon_entropy(n_i, nu_i, start.t_eff),
                                        start.t_eff, float(nu_i), n_i))
        else:
            # adiabat: photon number and entropy fixed, T' follows nu
            t_i = HBAR * nu_i * start.n_mean / K_B
            samples.append(DiagramPoint(name, i, start.entropy, float(t_i), float(nu_i), start.n_mean))
    return samples


def ts_diagram(spec: CycleSpec, points_per_stroke: int = 50) -> List[DiagramPoint]:
    """
    Temperature-entropy samples over the four strokes, in cycle order.

    Isotherms are horizontal at T_h' and T_l'; adiabats are vertical.
    """
    if points_per_stroke < 2:
        raise StateError(f"points_per_stroke must be >= 2, got {points_per_stroke}")
    c1, c2, c3, c4 = run_cycle(spec).corners
    samples: List[DiagramPoint] = []
    samples += _stroke("1-2", c1, c2, points_per_stroke, isotherm=True)
    samples += _stroke("2-3", c2, c3, points_per_stroke, isotherm=False)
    samples += _stroke("3-4", c3, c4, points_per_stroke, isotherm=True)
    samples += _stroke("4-1", c4, c1, points_per_stroke, isotherm=False)
    return samples


TS_COLUMNS = ["stroke", "index", "entropy_JperK", "T_eff_K", "nu_radps", "n_mean"]


def ts_rows(points: List[DiagramPoint]) -> List[List[Any]]:
    return [[p.stroke, p.index, p.entropy, p.t_eff, p.nu, p.n_mean] for p in points]
