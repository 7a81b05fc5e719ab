"""Physical constants (CODATA via scipy) used throughout the package."""

from scipy.constants import c, h, hbar, k as k_B, mu_0, physical_constants

mu_B = physical_constants["Bohr magneton"][0]
mu_N = physical_constants["nuclear magneton"][0]
atomic_mass = physical_constants["atomic mass constant"][0]

GAUSS = 1e-4  # Tesla per Gauss
CM = 1e-2     # m per cm

__all__ = [
    "c", "h", "hbar", "k_B", "mu_0", "mu_B", "mu_N", "atomic_mass",
    "GAUSS", "CM",
]
