"""Pulse-level state-vector simulation of the atom register.

Each active atom carries seven levels: the 1S0 nuclear-spin qubit
(g-, g+), the 3P2(F=3/2) manifold (e -3/2 .. e +3/2), and an absorbing
LOST label.  The register is the tensor product over active sites
(spectator sites are not represented).  Evolution is rotating-frame,
piecewise-constant-Hamiltonian, with per-site detunings from the
gradient-resolved resonances and the always-on secular dipole-dipole
diagonal.  3P2 decay and lattice photon scattering enter as a
norm-decaying anti-Hermitian term; the removed mass is tracked so that
||amplitudes||^2 + leaked = 1 at all times.

Frame convention: within each segment every undriven level co-rotates
with its own local resonance (zero diagonal); levels reached by a drive
leg carry the cumulative (local transition frequency - laser frequency)
detuning.  Frames may differ between segments, so only relative,
convention-stable phases are physical; all phases are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from .addressing import GradientConfig, LatticeGeometry, check_resolvable, site_field
from .atomic import (AtomParams, f32_energies, ground_qubit_splitting,
                     ground_state_energy, three_photon_detunings,
                     transition_frequency, aux_branch)
from .constants import h
from .dipole import ddi_coupling
from .errors import (ConfigError, GeometryError, IntegratorError,
                     ProtocolOrderError)

# Per-atom level indices
GM, GP, EM32, EM12, EP12, EP32, LOST = range(7)
NLEV = 7
LEVEL_NAMES = ("g-1/2", "g+1/2", "e-3/2", "e-1/2", "e+1/2", "e+3/2", "lost")
E_LEVELS = (EM32, EM12, EP12, EP32)
G_LEVELS = (GM, GP)
AUX = {0: EM32, 1: EP32}           # logical value -> auxiliary level
E_MF = {EM32: -1.5, EM12: -0.5, EP12: +0.5, EP32: +1.5}

UNITARITY_TOL = 1e-6


@dataclass(frozen=True)
class NoiseParams:
    lifetime_3P2_s: float = 15.0
    photon_scattering_rate_hz: float = 0.2
    branching_1P1_to_3D: float = 1e-7
    detection_time_s: float = 3e-3
    detection_scatter_rate_hz: float = 8e6

    def __post_init__(self):
        if self.lifetime_3P2_s <= 0 and not math.isinf(self.lifetime_3P2_s):
            raise ConfigError("3P2 lifetime must be positive")
        if self.photon_scattering_rate_hz < 0:
            raise ConfigError("scattering rate must be >= 0")
        if not 0 <= self.branching_1P1_to_3D <= 1:
            raise ConfigError("branching ratio must lie in [0, 1]")

    @classmethod
    def off(cls) -> "NoiseParams":
        return cls(lifetime_3P2_s=math.inf, photon_scattering_rate_hz=0.0,
                   branching_1P1_to_3D=0.0)


@dataclass(frozen=True)
class Pulse:
    """One timed drive segment.

    transition: 'optical_pair' (simultaneous pi-pulse legs on
    g+ <-> e+3/2 and g- <-> e-3/2), 'three_photon' (single drive through
    the F=3/2 ladder), 'rf' (ground-qubit NMR drive), 'aux_flip'
    (effective drive on the auxiliary e-3/2 <-> e+3/2 pair used by the
    CNOT), 'blow_away' (radiation-pressure removal of all 1S0
    population, no Hamiltonian), or 'measure'.
    """
    transition: str
    duration_s: float
    rabi_rad_s: float = 0.0
    detuning_rad_s: float = 0.0
    phase_rad: float = 0.0
    target: tuple = ("all",)
    compensate_light_shift: bool = True
    metastable_weight: float = 0.0  # annotation for the decoherence budget

    def __post_init__(self):
        if self.duration_s < 0:
            raise ConfigError("pulse duration must be >= 0")
        if self.rabi_rad_s < 0:
            raise ConfigError("Rabi frequency must be >= 0")


@dataclass(frozen=True)
class PulseSegment:
    config: GradientConfig
    pulse: Pulse


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple[PulseSegment, ...]
    n_atoms: int = 0

    @property
    def total_duration_s(self) -> float:
        return sum(s.pulse.duration_s for s in self.segments)


class RegisterState:
    """Amplitudes of the active atoms over the 7-level basis."""

    def __init__(self, params: AtomParams, geom: LatticeGeometry,
                 sites, amps: np.ndarray, leaked: float = 0.0):
        self.params = params
        self.geom = geom
        self.sites = tuple(tuple(s) for s in sites)
        if len(set(self.sites)) != len(self.sites):
            raise ConfigError("duplicate active sites")
        self.amps = np.asarray(amps, complex).reshape(-1)
        if self.amps.size != NLEV ** len(self.sites):
            raise ConfigError("amplitude vector size does not match sites")
        self.leaked = float(leaked)

    @classmethod
    def product(cls, params, geom, sites, levels) -> "RegisterState":
        sites = [tuple(s) for s in sites]
        amps = np.zeros(NLEV ** len(sites), complex)
        idx = 0
        for lv in levels:
            idx = idx * NLEV + lv
        amps[idx] = 1.0
        return cls(params, geom, sites, amps)

    # -- bookkeeping -------------------------------------------------
    @property
    def n_atoms(self) -> int:
        return len(self.sites)

    @property
    def survival(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def copy(self) -> "RegisterState":
        return RegisterState(self.params, self.geom, self.sites,
                             self.amps.copy(), self.leaked)

    def site_index(self, site) -> int:
        return self.sites.index(tuple(site))

    def _tensor(self) -> np.ndarray:
        return self.amps.reshape((NLEV,) * self.n_atoms)

    def reduced_density(self, site) -> np.ndarray:
        """Unnormalized 7x7 reduced density matrix of one atom."""
        a = np.moveaxis(self._tensor(), self.site_index(site), 0)
        m = a.reshape(NLEV, -1)
        return m @ m.conj().T

    def level_populations(self, site) -> np.ndarray:
        return np.diag(self.reduced_density(site)).real

    def population(self, site, level: int) -> float:
        return float(self.level_populations(site)[level])

    def check_accounting(self, tol: float = 1e-9) -> None:
        if abs(self.survival + self.leaked - 1.0) > tol:
            raise IntegratorError(
                f"norm accounting violated: survival {self.survival} "
                f"+ leaked {self.leaked} != 1")


# ---------------------------------------------------------------------------
# level data

def level_energy_hz(params: AtomParams, B: float, level: int) -> float:
    """Energy (Hz) of a register level at field B, per-manifold zero."""
    if level == GM:
        return ground_state_energy(params, B, -0.5)
    if level == GP:
        return ground_state_energy(params, B, +0.5)
    if level == LOST:
        return 0.0
    E = f32_energies(params, B)
    return float(E[(EM32, EM12, EP12, EP32).index(level)])


def level_moment_j_per_t(params: AtomParams, B: float, level: int,
                         dB: float = 1e-7) -> float:
    """z magnetic moment of a level: -h dE/dB by finite difference."""
    if level == LOST:
        return 0.0
    lo = max(B - dB, 1e-12)
    dE = level_energy_hz(params, B + dB, level) - level_energy_hz(params, lo, level)
    return -h * dE / (B + dB - lo)


# ---------------------------------------------------------------------------
# Hamiltonian construction

def light_shift_compensation(delta1: float, delta2: float,
                             rabi: float) -> float:
    """Drive-frequency offset cancelling the differential AC-Stark shift
    of the 3-photon ladder ends (fixed-point solution of the dressed
    resonance condition)."""
    eps = 0.0
    for _ in range(80):
        eps = (rabi ** 2 / 4) * (1 / (delta1 - eps) + 1 / (delta2 - eps)) / 3
    return eps


def _resolve_reference(reg: RegisterState, target: tuple):
    kind = target[0]
    if kind == "site":
        return tuple(target[1])
    if kind == "layer":
        return (0, 0, target[1])
    return reg.sites[0]


def _single_atom_hamiltonian(params, B, B_ref, pulse) -> np.ndarray:
    """7x7 rotating-frame block (rad/s) for one atom at local field B."""
    hmat = np.zeros((NLEV, NLEV), complex)
    om = pulse.rabi_rad_s
    ph = np.exp(1j * pulse.phase_rad)
    kind = pulse.transition
    if kind == "optical_pair":
        br = aux_branch(params)
        for glev, elev, mF in ((GP, EP32, 1.5), (GM, EM32, -1.5)):
            mi = 0.5 if glev == GP else -0.5
            f_here = transition_frequency(params, mi, (mF, br), B)
            f_ref = transition_frequency(params, mi, (mF, br), B_ref)
            wL = 2 * math.pi * f_ref + pulse.detuning_rad_s
            hmat[elev, elev] = 2 * math.pi * f_here - wL
            hmat[elev, glev] = om / 2 * ph
            hmat[glev, elev] = om / 2 * np.conj(ph)
    elif kind == "three_photon":
        det = three_photon_detunings(params, B_ref)
        eps = 0.0
        if pulse.compensate_light_shift and om > 0:
            eps = light_shift_compensation(det.delta1_rad_s,
                                           det.delta2_rad_s, om)
        wL = det.omega0_rad_s + eps + pulse.detuning_rad_s
        w = 2 * math.pi * f32_energies(params, B)
        ladder = (EM32, EM12, EP12, EP32)
        cum = 0.0
        for n in range(1, 4):
            cum += (w[n] - w[n - 1]) - wL
            hmat[ladder[n], ladder[n]] = cum
        for n in range(3):
            hmat[ladder[n + 1], ladder[n]] = om / 2 * ph
            hmat[ladder[n], ladder[n + 1]] = om / 2 * np.conj(ph)
    elif kind == "rf":
        wL = 2 * math.pi * ground_qubit_splitting(params, B_ref) \
            + pulse.detuning_rad_s
        hmat[GP, GP] = 2 * math.pi * ground_qubit_splitting(params, B) - wL
        hmat[GP, GM] = om / 2 * ph
        hmat[GM, GP] = om / 2 * np.conj(ph)
    elif kind == "aux_flip":
        def f_ad(Bv):
            E = f32_energies(params, Bv)
            return E[3] - E[0]
        wL = 2 * math.pi * f_ad(B_ref) + pulse.detuning_rad_s
        hmat[EP32, EP32] = 2 * math.pi * f_ad(B) - wL
        hmat[EP32, EM32] = om / 2 * ph
        hmat[EM32, EP32] = om / 2 * np.conj(ph)
    else:
        raise ConfigError(f"unknown pulse transition {kind!r}")
    return hmat


def segment_hamiltonian(reg: RegisterState, segment: PulseSegment,
                        dipole_scale: float = 1.0) -> np.ndarray:
    """Full register Hamiltonian (rad/s) for one schedule segment."""
    params, geom = reg.params, reg.geom
    config, pulse = segment.config, segment.pulse
    n = reg.n_atoms
    dim = NLEV ** n
    ref = _resolve_reference(reg, pulse.target)
    B_ref = site_field(geom, config, ref)
    fields = [site_field(geom, config, s) for s in reg.sites]

    H = np.zeros((dim, dim), complex)
    eye = [np.eye(NLEV)] * n
    for i, B in enumerate(fields):
        hi = _single_atom_hamiltonian(params, B, B_ref, pulse)
        ops = list(eye)
        ops[i] = hi
        block = ops[0]
        for op in ops[1:]:
            block = np.kron(block, op)
        H += block

    if dipole_scale != 0.0 and n > 1:
        H += np.diag(_dipole_diagonal(reg, config, dipole_scale))
    return H


def _dipole_diagonal(reg: RegisterState, config: GradientConfig,
                     dipole_scale: float) -> np.ndarray:
    """Always-on secular dipole-dipole diagonal (rad/s) over the basis."""
    params, geom = reg.params, reg.geom
    n = reg.n_atoms
    moments = np.array(
        [[level_moment_j_per_t(params, site_field(geom, config, s), lv)
          for lv in range(NLEV)] for s in reg.sites])
    labels = np.array(list(np.ndindex(*(NLEV,) * n)))
    dd = np.zeros(NLEV ** n)
    for i in range(n):
        for j in range(i + 1, n):
            dr = geom.position_m(reg.sites[j]) - geom.position_m(reg.sites[i])
            r = float(np.linalg.norm(dr))
            cos_t = dr[2] / r
            theta = math.acos(max(-1.0, min(1.0, cos_t)))
            coef = 2 * math.pi * dipole_scale \
                * ddi_coupling(1.0, 1.0, r, theta)
            dd += coef * moments[i][labels[:, i]] * moments[j][labels[:, j]]
    return dd


def _gamma_diagonal(reg: RegisterState, noise: NoiseParams) -> np.ndarray:
    """Per-basis-state norm-decay rates (1/s)."""
    n = reg.n_atoms
    decay = 0.0 if math.isinf(noise.lifetime_3P2_s) else 1 / noise.lifetime_3P2_s
    per_level = np.zeros(NLEV)
    for lv in E_LEVELS:
        per_level[lv] = decay + noise.photon_scattering_rate_hz
    for lv in G_LEVELS:
        per_level[lv] = noise.photon_scattering_rate_hz
    labels = np.array(list(np.ndindex(*(NLEV,) * n)))
    return per_level[labels].sum(axis=1)


def segment_propagator(reg: RegisterState, segment: PulseSegment,
                       noise: NoiseParams, dt: float,
                       dipole_scale: float = 1.0) -> np.ndarray:
    H = segment_hamiltonian(reg, segment, dipole_scale)
    gamma = _gamma_diagonal(reg, noise)
    M = H - 0.5j * np.diag(gamma)
    return expm(-1j * M * dt)


def apply_propagator(reg: RegisterState, U: np.ndarray,
                     noise_on: bool) -> RegisterState:
    before = reg.survival
    amps = U @ reg.amps
    after = float(np.vdot(amps, amps).real)
    if not noise_on and abs(after - before) > UNITARITY_TOL:
        raise IntegratorError(
            f"unitarity deviation {abs(after - before):.2e} per step "
            "exceeds 1e-6; use a smaller dt")
    out = RegisterState(reg.params, reg.geom, reg.sites, amps,
                        reg.leaked + (before - after))
    out.check_accounting()
    return out


def _noise_on(noise: NoiseParams) -> bool:
    return noise.photon_scattering_rate_hz > 0 \
        or not math.isinf(noise.lifetime_3P2_s)


def evolve(reg: RegisterState, segment: PulseSegment, noise: NoiseParams,
           dt: float, dipole_scale: float = 1.0) -> RegisterState:
    """Propagate through dt <= segment duration of the segment drive."""
    if dt <= 0:
        raise ConfigError("dt must be positive")
    if dt > segment.pulse.duration_s * (1 + 1e-12):
        raise ConfigError("dt exceeds the segment duration")
    U = segment_propagator(reg, segment, noise, dt, dipole_scale)
    return apply_propagator(reg, U, _noise_on(noise))


def apply_segment(reg: RegisterState, segment: PulseSegment,
                  noise: NoiseParams,
                  dipole_scale: float = 1.0) -> RegisterState:
    """Propagate through the whole segment (exact exponentiation)."""
    if segment.pulse.duration_s == 0.0:
        return reg.copy()
    return evolve(reg, segment, noise, segment.pulse.duration_s, dipole_scale)


def ground_basis_probability(reg: RegisterState, bits: dict) -> float:
    """Joint probability of finding each given site's qubit value in the
    ground manifold (0 -> g-, 1 -> g+); other sites are traced out."""
    n = reg.n_atoms
    labels = np.array(list(np.ndindex(*(NLEV,) * n)))
    mask = np.ones(NLEV ** n, bool)
    for site, bit in bits.items():
        want = GP if bit else GM
        mask &= labels[:, reg.site_index(site)] == want
    return float((np.abs(reg.amps) ** 2)[mask].sum())


# ---------------------------------------------------------------------------
# incoherent operations

def blow_away(reg: RegisterState) -> tuple[RegisterState, dict]:
    """Radiation-pressure removal of all remaining 1S0 population.

    Modeled as a perfect filter: every basis component with any atom in a
    ground level is removed and its mass booked as leaked.  Returns the
    filtered register and the per-site removed mass.
    """
    n = reg.n_atoms
    labels = np.array(list(np.ndindex(*(NLEV,) * n)))
    in_ground = np.isin(labels, G_LEVELS)
    removed = {}
    probs = np.abs(reg.amps) ** 2
    for i, site in enumerate(reg.sites):
        removed[site] = float(probs[in_ground[:, i]].sum())
    keep = ~in_ground.any(axis=1)
    amps = np.where(keep, reg.amps, 0.0)
    lost = reg.survival - float(np.vdot(amps, amps).real)
    out = RegisterState(reg.params, reg.geom, reg.sites, amps,
                        reg.leaked + lost)
    out.check_accounting()
    return out, removed
