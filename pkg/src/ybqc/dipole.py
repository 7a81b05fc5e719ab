"""Magnetic dipole-dipole couplings between lattice sites.

Only the secular (Ising) part of the dipole operator is retained: under
the strong bias field the flip-flop terms between m_F = -3/2 and +3/2
would change a single atom's m_F by 3 units and are non-secular.  For
moments aligned with the quantization axis z,

    E_dd / h = (mu_0 / 4 pi h) * m1 * m2 * (1 - 3 cos^2 theta) / r^3

with theta the angle between z and the separation vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import h, mu_0, mu_B
from .errors import PhysicsError
from .atomic import AtomParams, lande_g_F

_K_DD = mu_0 / (4 * math.pi * h)  # Hz per (J/T)^2 / m^3


@dataclass(frozen=True)
class DipoleSpec:
    """A point magnetic dipole: signed z-projection moment and position."""
    moment_j_per_t: float
    position_m: tuple[float, float, float]


@dataclass(frozen=True)
class PairLevels:
    spacing_m: float
    # energies (Hz) of the two-atom logical states, dipole shift included
    levels_hz: dict  # keys '00', '01', '10', '11'
    shift_10_11_vs_00_01_hz: float


def ddi_coupling(m1: float, m2: float, r: float, theta: float) -> float:
    """Secular dipole-dipole energy in Hz for z-aligned moments."""
    if r <= 0:
        raise PhysicsError("dipole pair requires strictly positive separation")
    return _K_DD * m1 * m2 * (1 - 3 * math.cos(theta) ** 2) / r ** 3


def ddi_energy(d1: DipoleSpec, d2: DipoleSpec) -> float:
    """Dipole-dipole energy (Hz) between two z-aligned moments."""
    dr = np.asarray(d2.position_m, float) - np.asarray(d1.position_m, float)
    r = float(np.linalg.norm(dr))
    if r == 0.0:
        raise PhysicsError("dipole pair requires distinct positions")
    cos_theta = dr[2] / r
    return _K_DD * d1.moment_j_per_t * d2.moment_j_per_t \
        * (1 - 3 * cos_theta ** 2) / r ** 3


def auxiliary_qubit_moments(params: AtomParams) -> tuple[float, float]:
    """z-moments (J/T) of logical 0 (m_F=-3/2) and 1 (m_F=+3/2).

    Low-field F=3/2 values: mu_z = -g_F m_F mu_B, i.e. +/-2.7 mu_B for the
    pure-LS g_J.  Note this is not the 3 mu_B of the stretched F=5/2 level.
    """
    gF = lande_g_F(params.g_J_3P2, 1.5, params.electronic_J_3P2,
                   params.nuclear_spin)
    m = gF * 1.5 * mu_B
    return (m, -m)


def pair_levels(spacing: float, theta: float,
                moments: tuple[float, float],
                zeeman_hz: tuple[float, float] = (0.0, 0.0)) -> PairLevels:
    """Two-atom logical levels |00>,|01>,|10>,|11> with the dipole shift.

    moments/zeeman_hz are indexed by logical value (0 -> m_F=-3/2,
    1 -> m_F=+3/2).  The conditional shift is
    [E(11)-E(10)] - [E(01)-E(00)].
    """
    m = moments
    z = zeeman_hz
    levels = {}
    for s1 in (0, 1):
        for s2 in (0, 1):
            dd = ddi_coupling(m[s1], m[s2], spacing, theta)
            levels[f"{s1}{s2}"] = z[s1] + z[s2] + dd
    shift = (levels["11"] - levels["10"]) - (levels["01"] - levels["00"])
    return PairLevels(spacing, levels, shift)


def cnot_shift(spacing: float, params: AtomParams | None = None,
               theta: float = 0.0) -> float:
    """Conditional shift (Hz) of the |10><->|11> line at the given spacing."""
    params = params or AtomParams()
    return pair_levels(spacing, theta,
                       auxiliary_qubit_moments(params)).shift_10_11_vs_00_01_hz
