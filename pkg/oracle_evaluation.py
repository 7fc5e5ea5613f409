"""
Mean-Photon Oracle Evaluation - Compares the numerical steady state of the
full master equation against the closed-form stationary photon number.
Simply run: python oracle_evaluation.py
"""

import math
from collections import namedtuple
from typing import Dict, List

from atoms import AtomPrep, phaseonium, with_phase
from fock import mean_photon
from micromaser import EngineParams, mean_photon_steady, mu, steady_state

OraclePoint = namedtuple("OraclePoint", ["xi", "phase"])

# Injection regime: short interaction time, lambda tau sqrt(n) ~ 0.1
P_E = 0.3
COHERENCE = 0.02
LAMBDA_TAU = 0.045
LOSS_OVER_GAIN = 0.02
N_MAX = 60
TAIL_TOL = 1e-4
GAP_TOL = 0.03

ORACLE_GRID = [
    OraclePoint(xi, phase)
    for xi in (0.0, 0.5, 1.0)
    for phase in (0.0, math.pi / 2)
]


def oracle_params() -> EngineParams:
    """nu = r = tau = 1 in reduced units; kappa = LOSS_OVER_GAIN * mu."""
    base = EngineParams(nu=1.0, q_factor=math.inf, lamb=LAMBDA_TAU, tau=1.0, rate=1.0,
                        n_max=N_MAX, tail_tol=TAIL_TOL)
    kappa = LOSS_OVER_GAIN * mu(base)
    return EngineParams(nu=1.0, q_factor=1.0 / kappa, lamb=LAMBDA_TAU, tau=1.0, rate=1.0,
                        n_max=N_MAX, tail_tol=TAIL_TOL)


def oracle_prep(point: OraclePoint) -> AtomPrep:
    """p_e = P_E with |c1 c2| = COHERENCE, Arg(c1 c2*) = phase, dephasing xi."""
    s = 1.0 - P_E
    root = math.sqrt(s * s - 4.0 * COHERENCE ** 2)
    c1 = math.sqrt(0.5 * (s + root))
    c2 = math.sqrt(0.5 * (s - root))
    return with_phase(phaseonium(P_E, c1, c2, point.xi), point.phase)


def evaluate_point(point: OraclePoint, params: EngineParams = None) -> Dict[str, float]:
    """Numeric and closed-form stationary photon numbers at one grid point."""
    params = params or oracle_params()
    prep = oracle_prep(point)
    analytic = mean_photon_steady(params, prep)
    numeric = mean_photon(steady_state(params, prep))
    return {
        "numeric": numeric,
        "analytic": analytic,
        "gap": abs(numeric - analytic) / analytic,
    }


def evaluate_grid(grid: List[OraclePoint] = None) -> List[Dict[str, float]]:
    params = oracle_params()
    return [dict(evaluate_point(p, params), xi=p.xi, phase=p.phase) for p in (grid or ORACLE_GRID)]


def main():
    print("\n" + "=" * 70)
    print("MEAN-PHOTON ORACLE EVALUATION")
    print("=" * 70)
    print(f"p_e={P_E}  |c1 c2|={COHERENCE}  lambda*tau={LAMBDA_TAU}  "
          f"kappa/mu={LOSS_OVER_GAIN}  n_max={N_MAX}")

    results = evaluate_grid()
    passed = 0
    for r in results:
        ok = r["gap"] <= GAP_TOL
        passed += ok
        status = "OK" if ok else "FAIL"
        print(f"\n[{status}] xi={r['xi']:.2f} phase={r['phase']:.4f}")
        print(f"  numeric <n>:     {r['numeric']:.6f}")
        print(f"  closed form <n>: {r['analytic']:.6f}")
        print(f"  relative gap:    {r['gap']:.3e}")

    worst = max(r["gap"] for r in results)
    print("\n" + "=" * 70)
    print("SUMMARY")
    print("=" * 70)
    print(f"Points within {GAP_TOL:.0%}: {passed}/{len(results)}")
    print(f"Largest gap:        {worst:.3e}")
    print("=" * 70)


if __name__ == "__main__":
    main()
