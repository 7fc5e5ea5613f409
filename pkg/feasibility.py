"""
Experimental Feasibility Estimates

Order-of-magnitude comparison of the two terms inside zeta for real hardware:

    loss term       nu / (2 mu Q)
    coherence term  Re(xi c1 c2*)

Platform profiles (optical cavity QED, microwave cavity QED, circuit QED) are
loaded from data/platforms.json over the built-in defaults, so magnitudes can
be updated without touching code.

Frequencies are stored as quoted (the quoted "Hz" magnitudes are used directly
as angular frequencies, no 2*pi factor), since the comparison is only
meaningful at the level of decades.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

from atoms import thermal_atoms
from carnot import bare_n, efficiency_closed_form, zeta
from errors import ConfigError
from micromaser import EngineParams

logger = logging.getLogger(__name__)

DEFAULT_PLATFORMS_PATH = Path(__file__).parent / "data" / "platforms.json"
DEFAULT_COHERENCE = 0.1


@dataclass(frozen=True)
class PlatformProfile:
    """
    Hardware parameter set.

    Attributes:
        name: platform key
        nu: mode frequency, quoted magnitude used as rad/s
        lamb: atom-field coupling (1/s)
        q_max: highest reachable quality factor
        n_scale: typical photon number
        lambda_tau_sqrt_n: targeted pulse area lambda tau sqrt(n)
    """

    name: str
    nu: float
    lamb: float
    q_max: float
    n_scale: float = 1e2
    lambda_tau_sqrt_n: float = 1e-1

    def __post_init__(self):
        for key in ("nu", "lamb", "q_max", "n_scale", "lambda_tau_sqrt_n"):
            value = getattr(self, key)
            if not value > 0.0:
                raise ConfigError(f"platforms.{self.name}.{key}", f"must be positive, got {value}")


@dataclass(frozen=True)
class Injection:
    tau: float
    r_max: float
    mu: float


@dataclass(frozen=True)
class CoherenceVsLoss:
    loss_term: float
    coherence_term: float
    loss_dominates: bool
    log10_ratio: float
    loss_decade: int


class PlatformCatalog:
    """
    Named platform profiles.
    """

    def __init__(self, profiles_path: Optional[str] = None):
        """
        Initialize the catalog.

        Args:
            profiles_path: Optional JSON file whose entries override or extend
                the built-in profiles
        """
        self.profiles: Dict[str, PlatformProfile] = {}
        self._load_default_profiles()

        if profiles_path:
            self.load_profiles(profiles_path)

    def _load_default_profiles(self):
        """Built-in magnitudes for the three platforms."""
        self.profiles = {
            "optical": PlatformProfile("optical", nu=1e14, lamb=1e8, q_max=1e8),
            "microwave": PlatformProfile("microwave", nu=1e10, lamb=1e4, q_max=1e9),
            "circuit": PlatformProfile("circuit", nu=1e10, lamb=1e8, q_max=1e4),
        }

    def load_profiles(self, filepath: str):
        """Merge profiles from a JSON file {name: {nu, lamb, q_max, ...}}."""
        try:
            with open(filepath, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(str(filepath), f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
        self.update_profiles(data)
        logger.debug("loaded %d platform profiles from %s", len(data), filepath)

    def update_profiles(self, data: Dict[str, Any]):
        """
        Override fields of known platforms or add new ones.

        Args:
            data: {name: {field: value}}; a new platform needs nu, lamb and q_max
        """
        if not isinstance(data, dict):
            raise ConfigError("platforms", "expected an object of platform entries")
        for name, entry in data.items():
            if not isinstance(entry, dict):
                raise ConfigError(f"platforms.{name}", "entry must be an object")
            base = self.profiles.get(name)
            fields = asdict(base) if base else {"name": name}
            unknown = set(entry) - set(PlatformProfile.__dataclass_fields__)
            if unknown:
                raise ConfigError(f"platforms.{name}", f"unknown keys {sorted(unknown)}")
            for key, value in entry.items():
                if key == "name":
                    continue
                try:
                    fields[key] = float(value)
                except (TypeError, ValueError):
                    raise ConfigError(f"platforms.{name}.{key}", f"expected a number, got {value!r}")
            try:
                self.profiles[name] = PlatformProfile(**fields)
            except TypeError as exc:
                raise ConfigError(f"platforms.{name}", str(exc))

    def save_profiles(self, filepath: str):
        """Write the current profiles as JSON."""
        data = {name: {k: v for k, v in asdict(p).items() if k != "name"}
                for name, p in self.profiles.items()}
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2)

    def get(self, name: str) -> PlatformProfile:
        if name not in self.profiles:
            raise ConfigError("platform", f"unknown platform {name!r} (known: {', '.join(sorted(self.profiles))})")
        return self.profiles[name]


_default_catalog: Optional[PlatformCatalog] = None


def default_catalog() -> PlatformCatalog:
    global _default_catalog
    if _default_catalog is None:
        path = DEFAULT_PLATFORMS_PATH if DEFAULT_PLATFORMS_PATH.exists() else None
        _default_catalog = PlatformCatalog(str(path) if path else None)
    return _default_catalog


def platform_profile(name: str, catalog: Optional[PlatformCatalog] = None) -> PlatformProfile:
    """Look up a platform by name."""
    return (catalog or default_catalog()).get(name)


def derive_injection(profile: PlatformProfile) -> Injection:
    """
    Interaction time, maximal injection rate and gain coefficient.

    tau = (lambda tau sqrt(n)) / (lambda sqrt(n)); one atom in the cavity at a
    time gives r_max = 1 / tau; mu = r_max lambda^2 tau^2 / 2.
    """
    tau = profile.lambda_tau_sqrt_n / (profile.lamb * math.sqrt(profile.n_scale))
    r_max = 1.0 / tau
    return Injection(tau=tau, r_max=r_max, mu=0.5 * r_max * profile.lamb ** 2 * tau ** 2)


def _decade(x: float) -> int:
    """floor(log10(x)), snapping values within rounding of a power of ten."""
    return math.floor(round(math.log10(x), 9))


def coherence_vs_loss(profile: PlatformProfile,
                      coherence_magnitude: float = DEFAULT_COHERENCE,
                      q: Optional[float] = None) -> CoherenceVsLoss:
    """
    Compare nu/(2 mu Q) against the coherence magnitude.

    Args:
        profile: hardware parameters
        coherence_magnitude: |Re(xi c1 c2*)|, at most 1/2
        q: quality factor, defaults to the platform's q_max

    Ties within rounding count as the loss term dominating.
    """
    if not 0.0 <= coherence_magnitude <= 0.5:
        raise ConfigError("coherence", f"must lie in [0, 0.5], got {coherence_magnitude}")
    q = profile.q_max if q is None else q
    if not q > 0.0:
        raise ConfigError("q", f"must be positive, got {q}")
    injection = derive_injection(profile)
    loss = profile.nu / (2.0 * injection.mu * q)
    dominates = loss >= coherence_magnitude or math.isclose(loss, coherence_magnitude, rel_tol=1e-12)
    ratio = math.inf if coherence_magnitude == 0.0 else math.log10(loss / coherence_magnitude)
    return CoherenceVsLoss(
        loss_term=loss,
        coherence_term=coherence_magnitude,
        loss_dominates=dominates,
        log10_ratio=ratio,
        loss_decade=_decade(loss),
    )


def platform_engine(profile: PlatformProfile, q: Optional[float] = None) -> EngineParams:
    """EngineParams at the platform's maximal injection rate."""
    injection = derive_injection(profile)
    return EngineParams(
        nu=profile.nu,
        q_factor=profile.q_max if q is None else q,
        lamb=profile.lamb,
        tau=injection.tau,
        rate=injection.r_max,
    )


def platform_efficiency(profile: PlatformProfile,
                        t_h: float,
                        t_l: float,
                        coherence: float = 0.0,
                        q: Optional[float] = None) -> float:
    """
    Cycle efficiency expected on a platform.

    Both strokes use thermal atoms at the platform frequency; the hot stroke
    adds the signed coherence term Re(xi c1 c2*) = coherence to its zeta.
    """
    engine = platform_engine(profile, q)
    hot = thermal_atoms(t_h, profile.nu)
    cold = thermal_atoms(t_l, profile.nu)
    zeta_h = zeta(hot, engine) + bare_n(hot) / hot.p_e * coherence
    zeta_l = zeta(cold, engine)
    return efficiency_closed_form(zeta_h, zeta_l, t_h, t_l)


FEASIBILITY_COLUMNS = ["platform", "nu", "lamb", "q", "tau_s", "r_max_per_s", "mu_per_s",
                       "loss_term", "coherence_term", "loss_decade", "verdict"]


def feasibility_row(profile: PlatformProfile,
                    coherence_magnitude: float = DEFAULT_COHERENCE,
                    q: Optional[float] = None) -> Dict[str, object]:
    injection = derive_injection(profile)
    result = coherence_vs_loss(profile, coherence_magnitude, q)
    return {
        "platform": profile.name,
        "nu": profile.nu,
        "lamb": profile.lamb,
        "q": profile.q_max if q is None else q,
        "tau_s": injection.tau,
        "r_max_per_s": injection.r_max,
        "mu_per_s": injection.mu,
        "loss_term": result.loss_term,
        "coherence_term": result.coherence_term,
        "loss_decade": result.loss_decade,
        "verdict": "loss dominates" if result.loss_dominates else "coherence dominates",
    }


def feasibility_table(names: List[str],
                      coherence_magnitude: float = DEFAULT_COHERENCE,
                      catalog: Optional[PlatformCatalog] = None,
                      q: Optional[float] = None) -> List[Dict[str, object]]:
    return [feasibility_row(platform_profile(n, catalog), coherence_magnitude, q) for n in names]


def main():
    """Print the comparison for the stock platforms."""
    print("=" * 60)
    print("Coherence vs. cavity loss at the reachable quality factors")
    print("=" * 60)
    for row in feasibility_table(["optical", "microwave", "circuit"]):
        print(f"{row['platform']:<10} tau={row['tau_s']:.1e} s  mu={row['mu_per_s']:.1e}/s  "
              f"loss={row['loss_term']:.3g} (10^{row['loss_decade']})  -> {row['verdict']}")


if __name__ == "__main__":
    main()
