"""
Physical constants and shared numerical tolerances.

SI values come from scipy.constants (exact in SI since 2019).
"""

from scipy import constants as _sc

HBAR = _sc.hbar          # J*s, 1.054571817e-34
K_B = _sc.Boltzmann      # J/K, 1.380649e-23

# Field-state tolerances
TRACE_TOL = 1e-12
HERMITIAN_TOL = 1e-12
POSITIVITY_TOL = -1e-10
TAIL_TOL = 1e-10
NORMALIZATION_TOL = 1e-9

# Largest truncation the auto-grow helper will try
N_MAX_CAP = 4096

# Below this corner photon number the high-temperature mapping n = kT/(hbar nu)
# is flagged as dubious.
HIGH_T_MIN_PHOTONS = 10.0
