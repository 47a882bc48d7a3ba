import numpy as np

from rovib import units


def test_energy_round_trip_is_exact_to_1e12():
    rng = np.random.default_rng(7)
    for e in rng.uniform(1e-6, 1e5, size=200):
        back = units.au_to_cm(units.cm_to_au(e))
        assert abs(back - e) <= 1e-12 * e


def test_time_round_trip():
    rng = np.random.default_rng(8)
    for t in rng.uniform(1e-4, 1e4, size=50):
        assert abs(units.au_to_ps(units.ps_to_au(t)) - t) <= 1e-12 * t


def test_known_anchors():
    assert abs(units.cm_to_au(units.HARTREE_CM) - 1.0) < 1e-14
    # one ps is ~41341 atomic time units
    assert abs(units.PS_AU - 41341.373) < 0.01
    # rotational period for B = 0.0104 cm^-1 is close to 1.6 ns
    tau = units.rotational_period_ps(0.0104)
    assert abs(tau - 1603.7) < 0.1


def test_interaction_prefactor_sign_and_scale():
    # attractive dressing, half the intensity in atomic units
    pref = units.interaction_prefactor_au(units.AU_INTENSITY_WCM2)
    assert abs(pref + 0.5) < 1e-12
    assert units.interaction_prefactor_au(0.0) == 0.0


def test_mass_conversion():
    mu = units.amu_to_au(0.5 * units.MASS_RB87_AMU)
    assert abs(mu - 79212.9) < 0.2
