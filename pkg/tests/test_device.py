import math

import numpy as np
import pytest

from squidgates import device as dev
from squidgates.errors import DegenerateLandscapeError, ParameterError

PHI0 = 2.067833848e-15
HBAR = 1.054571817e-34


def test_omega_lc_frozen(consts):
    # 1/(2*pi*sqrt(L*C)) for L=100 pH, C=40 fF, evaluated by hand
    assert consts.f_LC_ghz == pytest.approx(79.57747154594767, rel=1e-12)
    # the 0.239*omega_LC control transition corresponds to 19.0 GHz
    assert 0.239 * consts.f_LC_ghz == pytest.approx(19.0, rel=0.01)


def test_ic_from_beta_l_frozen(device_params):
    # Ic = beta_L*Phi0/(2*pi*L), hand evaluated for beta_L=1.2, L=100 pH
    assert device_params.Ic == pytest.approx(3.9492717408232195e-06, rel=1e-12)
    assert device_params.Ic == pytest.approx(3.95e-6, rel=1e-3)


def test_beta_l_round_trip():
    a = dev.DeviceParams(L=100e-12, C=40e-15, beta_L=1.2, kappa=5e-4,
                         xe1=0.499, xe2=0.4998)
    b = dev.DeviceParams(L=100e-12, C=40e-15, Ic=a.Ic, kappa=5e-4,
                         xe1=0.499, xe2=0.4998)
    assert b.beta_L == pytest.approx(a.beta_L, rel=1e-14)


def test_kappa_mutual_round_trip():
    a = dev.DeviceParams(L=100e-12, C=40e-15, beta_L=1.2, kappa=5e-4,
                         xe1=0.499, xe2=0.4998)
    b = dev.DeviceParams(L=100e-12, C=40e-15, beta_L=1.2, M=a.M,
                         xe1=0.499, xe2=0.4998)
    assert b.kappa == pytest.approx(5e-4, rel=1e-14)
    assert a.M == pytest.approx(5e-4 * 100e-12 / 2.0, rel=1e-14)


@pytest.mark.parametrize("kwargs", [
    dict(L=-1e-12, C=40e-15, beta_L=1.2, kappa=0.0),
    dict(L=100e-12, C=0.0, beta_L=1.2, kappa=0.0),
    dict(L=100e-12, C=40e-15, beta_L=1.2, Ic=1e-6, kappa=0.0),
    dict(L=100e-12, C=40e-15, kappa=0.0),
    dict(L=100e-12, C=40e-15, beta_L=1.2, kappa=0.0, M=1e-12),
    dict(L=100e-12, C=40e-15, beta_L=1.2),
    dict(L=100e-12, C=40e-15, beta_L=-0.1, kappa=0.0),
    dict(L=100e-12, C=40e-15, beta_L=1.2, kappa=1.0),
])
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ParameterError):
        dev.DeviceParams(xe1=0.499, xe2=0.4998, **kwargs)


@pytest.mark.parametrize("xe1,xe2", [(0.0, 0.5), (0.5, 1.0), (-0.2, 0.5)])
def test_bias_range_rejected(xe1, xe2):
    with pytest.raises(ParameterError):
        dev.DeviceParams(L=100e-12, C=40e-15, beta_L=1.2, kappa=0.0,
                         xe1=xe1, xe2=xe2)


def test_derived_constants_identities(device_params, consts):
    assert consts.eta == pytest.approx(
        HBAR * math.sqrt(device_params.L / device_params.C) / PHI0**2, rel=1e-12)
    # E_J = Phi0*Ic/(2*pi) is an equivalent closed form
    assert consts.E_J == pytest.approx(PHI0 * device_params.Ic / (2 * math.pi),
                                       rel=1e-12)
    assert consts.m == pytest.approx(device_params.C * PHI0**2, rel=1e-12)


def _potential_si(p, x1, x2):
    # independent SI-unit evaluation used as the oracle
    omega = 1.0 / math.sqrt(p.L * p.C)
    m = p.C * PHI0**2
    e_j = m * omega**2 * p.beta_L / (4 * math.pi**2)
    u = 0.0
    for x, xe in ((x1, p.xe1), (x2, p.xe2)):
        u += 0.5 * m * omega**2 * (x - xe) ** 2 - e_j * math.cos(2 * math.pi * x)
    u += 0.5 * m * omega**2 * p.kappa * (x1 - p.xe1) * (x2 - p.xe2)
    return u


def test_dimensionless_matches_si(device_params, consts):
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.15, 0.85, size=(1000, 2))
    hbar_omega = HBAR * consts.omega_LC
    for x1, x2 in pts:
        expected = _potential_si(device_params, x1, x2) / hbar_omega
        got = float(dev.potential_2d(device_params, consts, x1, x2))
        assert got == pytest.approx(expected, rel=1e-12)


def test_trivial_potential_values(consts):
    p = dev.DeviceParams(L=100e-12, C=40e-15, beta_L=0.0, kappa=0.0,
                         xe1=0.5, xe2=0.5)
    d = dev.derive_constants(p)
    assert dev.potential_2d(p, d, 0.5, 0.5) == 0.0
    delta = 0.01
    assert float(dev.potential_2d(p, d, 0.5 + delta, 0.5)) == pytest.approx(
        delta**2 / (2 * d.eta), rel=1e-13)


def test_symmetry_at_half_flux():
    p = dev.DeviceParams(L=100e-12, C=40e-15, beta_L=1.2, kappa=0.0,
                         xe1=0.5, xe2=0.5)
    d = dev.derive_constants(p)
    rng = np.random.default_rng(11)
    for x1, x2 in rng.uniform(0.2, 0.8, size=(200, 2)):
        a = float(dev.potential_2d(p, d, x1, x2))
        b = float(dev.potential_2d(p, d, 1.0 - x1, 1.0 - x2))
        assert b == pytest.approx(a, rel=1e-12, abs=1e-12)


class TestFindWells:
    def test_device_params_have_four_labeled_wells(self, device_params, consts, wells):
        assert [w.label for w in wells] == ["00", "01", "10", "11"]
        for w in wells:
            g = dev.potential_gradient(device_params, consts, *w.location)
            assert np.linalg.norm(g) < 1e-10
            assert np.all(np.linalg.eigvalsh(
                dev.potential_hessian(device_params, consts, *w.location)) > 0)
        # the 00 well is the global minimum at these biases
        assert min(wells, key=lambda w: w.depth).label == "00"

    def test_monostable_raises(self):
        p = dev.DeviceParams(L=100e-12, C=40e-15, beta_L=0.5, kappa=5e-4,
                             xe1=0.499, xe2=0.4998)
        d = dev.derive_constants(p)
        with pytest.raises(DegenerateLandscapeError):
            dev.find_wells(p, d)

    def test_uncoupled_wells_are_cartesian_products(self):
        p = dev.DeviceParams(L=100e-12, C=40e-15, beta_L=1.2, kappa=0.0,
                             xe1=0.499, xe2=0.4998)
        d = dev.derive_constants(p)
        m1 = dev.minima_1d(p, d, 1)
        m2 = dev.minima_1d(p, d, 2)
        assert len(m1) == 2 and len(m2) == 2
        expected = [(a, b) for a in m1 for b in m2]
        got = [w.location for w in dev.find_wells(p, d)]
        for pt in expected:
            dist = min(math.hypot(pt[0] - g[0], pt[1] - g[1]) for g in got)
            assert dist < 1e-9


def test_quadrant_degeneracy_at_symmetric_bias():
    # kappa=0, both biases at 1/2: well pairs are degenerate
    p = dev.DeviceParams(L=100e-12, C=40e-15, beta_L=1.2, kappa=0.0,
                         xe1=0.5, xe2=0.5)
    d = dev.derive_constants(p)
    wells = dev.find_wells(p, d)
    depths = sorted(w.depth for w in wells)
    assert depths[-1] - depths[0] < 1e-12 * abs(depths[0])
