"""Feasibility-module tests: intensity, lattice depth/tunneling,
scattering, bias field, and the decoherence budget."""

import math

import pytest

from ybqc.addressing import GradientConfig, LatticeGeometry
from ybqc.atomic import AtomParams
from ybqc.constants import GAUSS, h, k_B
from ybqc.engine import NoiseParams, Pulse, PulseSchedule, PulseSegment
from ybqc.errors import ConfigError
from ybqc.feasibility import (bias_field_check, build_feasibility_report,
                              decoherence_budget, lattice_depth_report,
                              lowest_band_width_recoils, pi_pulse_intensity,
                              recoil_energy_j, scattering_rate)

P = AtomParams()


def test_pi_pulse_intensity_closed_form():
    # independent arithmetic: I = 2 I_sat (Omega/Gamma)^2
    c = 299792458.0
    hh = 6.62607015e-34
    lam, gamma_hz, t_pi = 507e-9, 0.010, 100e-6
    gamma = 2 * math.pi * gamma_hz
    i_sat = math.pi * hh * c * gamma / (3 * lam ** 3)
    want = 2 * i_sat * (math.pi / t_pi / gamma) ** 2
    got = pi_pulse_intensity(t_pi, gamma_hz, lam)
    assert got == pytest.approx(want, rel=1e-10)
    assert got == pytest.approx(4.82e4, rel=0.20)
    # quadratic in 1/t_pi
    assert pi_pulse_intensity(t_pi / 2, gamma_hz, lam) \
        == pytest.approx(4 * got, rel=1e-12)
    with pytest.raises(ConfigError):
        pi_pulse_intensity(0.0, gamma_hz, lam)


def test_recoil_energy_and_depth():
    e_r = recoil_energy_j(P)
    want = h ** 2 / (2 * P.mass_kg * (532e-9) ** 2)
    assert e_r == pytest.approx(want, rel=1e-12)
    rep = lattice_depth_report(50.0, P)
    assert rep.depth_uk == pytest.approx(50 * e_r / k_B * 1e6, rel=1e-12)
    assert rep.depth_uk == pytest.approx(10.0, rel=0.15)


def test_tunneling_against_deep_lattice_asymptote():
    # J/E_r ~ (4/sqrt(pi)) s^(3/4) exp(-2 sqrt(s)) for deep lattices
    for s in (30.0, 50.0):
        width = lowest_band_width_recoils(s)
        J = width / 4
        asym = (4 / math.sqrt(math.pi)) * s ** 0.75 * math.exp(
            -2 * math.sqrt(s))
        assert J == pytest.approx(asym, rel=0.30)
    # free particle: lowest "band" spans a full recoil
    assert lowest_band_width_recoils(0.0) == pytest.approx(1.0, abs=1e-9)
    # monotone suppression with depth
    assert lowest_band_width_recoils(60.0) < lowest_band_width_recoils(40.0)


def test_hold_survival_at_operating_depth():
    rep = lattice_depth_report(50.0, P, hold_time_s=5.0)
    assert rep.tunneling_rate_hz < 1.0
    assert rep.hold_survival == pytest.approx(
        math.exp(-rep.tunneling_rate_hz * 5.0), rel=1e-12)
    assert rep.hold_survival > 0.5


def test_scattering_rate_reference():
    rep = lattice_depth_report(50.0, P)
    rate = scattering_rate(rep.depth_uk, P)
    assert 0.2 / 3 <= rate <= 0.2 * 3
    # linear in the depth
    assert scattering_rate(2 * rep.depth_uk, P) == pytest.approx(
        2 * rate, rel=1e-12)
    with pytest.raises(ConfigError):
        scattering_rate(0.0, P)


def test_bias_field_check():
    geom = LatticeGeometry(10, 10, 10)
    cfg = GradientConfig(100 * GAUSS, 10 * GAUSS / 1e-2, 100 * GAUSS / 1e-2,
                         100 * GAUSS / 1e-2)
    v = bias_field_check(geom, cfg)
    assert v.ok
    assert v.margin > 1.0
    weak = GradientConfig(0.001 * GAUSS, 10 * GAUSS / 1e-2,
                          100 * GAUSS / 1e-2, 100 * GAUSS / 1e-2)
    assert not bias_field_check(geom, weak).ok


def test_decoherence_budget_matches_engine_bookkeeping():
    noise = NoiseParams(lifetime_3P2_s=15.0, photon_scattering_rate_hz=0.2)
    cfg = GradientConfig(100 * GAUSS)
    segs = (
        PulseSegment(cfg, Pulse("rf", 0.1, 0.0, metastable_weight=0.0)),
        PulseSegment(cfg, Pulse("rf", 0.2, 0.0, metastable_weight=2.0)),
    )
    sched = PulseSchedule(segs, n_atoms=2)
    budget = decoherence_budget(sched, noise)
    assert budget.total_duration_s == pytest.approx(0.3)
    assert budget.metastable_atom_time_s == pytest.approx(0.4)
    assert budget.decay_survival == pytest.approx(math.exp(-0.4 / 15))
    assert budget.scattering_survival == pytest.approx(
        math.exp(-2 * 0.2 * 0.3))
    assert budget.survival == pytest.approx(
        budget.decay_survival * budget.scattering_survival, rel=1e-12)
    # noise off: no loss
    assert decoherence_budget(sched, NoiseParams.off()).survival == 1.0


def test_report_structure_and_verdicts():
    rep = build_feasibility_report(P)
    names = [it.quantity for it in rep.items]
    for want in ("pi_pulse_intensity_w_per_m2", "lattice_depth_uk",
                 "photon_scattering_rate_hz", "gradient_x_g_per_cm",
                 "gradient_y_g_per_cm", "bias_field_100g_sufficient"):
        assert want in names
    for it in rep.items:
        assert it.passed in (True, False, None)
        if it.tolerance_kind in ("relative", "factor"):
            assert it.paper_target is not None
    assert rep.all_passed
    # json round trip with the required field names
    import json
    payload = json.loads(rep.to_json())
    assert {"quantity", "computed", "paper_target", "tolerance",
            "pass"} <= set(payload[0])
