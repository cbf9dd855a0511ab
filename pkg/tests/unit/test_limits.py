"""
Unit tests for the asymptotic rate formulas
"""

import math

import pytest

from cavcool.amplitudes import delta_opt, rates_weak_drive
from cavcool.emission import EmissionPattern
from cavcool.errors import (
    DegenerateCoupling,
    ExpansionInvalid,
    GeometryViolation,
    HeatingRegion,
    RegimeMismatch,
)
from cavcool.geometry import derive_geometry
from cavcool.limits import (
    SMALL_KAPPA_CUTOFF,
    bad_cavity_shift,
    limit_bad_cavity,
    limit_heating_suppression,
    limit_interference_delta0,
    limit_sideband,
    rates_smallk_saturating,
    standing_wave_limit,
    standing_wave_rates,
)
from cavcool.models import DriveKind, SystemParams

QUARTER = math.pi / 4


def setup(**changes) -> SystemParams:
    """g̃ = 7 with all axes at π/4"""
    values = dict(g=7.0 / math.cos(QUARTER), phi=QUARTER, theta_l=QUARTER, theta_c=QUARTER)
    values.update(changes)
    return SystemParams(**values)


@pytest.fixture
def emission():
    return EmissionPattern()


class TestBadCavity:
    """Test the broad-cavity formula"""

    def test_shift_and_width(self):
        p = setup(g=20.0 / math.cos(QUARTER), kappa=40.0, delta_c=-200.0, delta=-3.0)
        shift, width = bad_cavity_shift(p)
        denominator = 400.0 + 197.0**2
        assert shift == pytest.approx(-400.0 * 197.0 / denominator)
        assert width == pytest.approx(400.0 * 40.0 / denominator)

    def test_pure_laser_channel(self, emission):
        p = setup(theta_c=math.pi / 2, gamma=0.0, kappa=40.0, delta_c=-200.0, delta=-3.0)
        shift, width = bad_cavity_shift(p)
        rates = limit_bad_cavity(p, emission)
        prefactor = width / ((p.delta - shift) ** 2 + width**2 / 4)
        ratio = abs(complex(p.delta - shift, width / 2) / complex(p.delta - shift + 1, width / 2))
        assert rates.a_minus == pytest.approx(prefactor * 0.5 * ratio**2)

    def test_matches_exact_rates_deep_in_regime(self, emission):
        p = setup(g=20.0 / math.cos(QUARTER), gamma=1e-4, kappa=40.0, delta_c=-200.0, delta=-3.0)
        approximate = limit_bad_cavity(p, emission)
        exact = rates_weak_drive(p, emission)
        assert approximate.a_minus == pytest.approx(exact.a_minus, rel=0.1)
        assert approximate.a_plus == pytest.approx(exact.a_plus, rel=0.1)

    def test_needs_cavity_loss(self, emission):
        with pytest.raises(RegimeMismatch):
            limit_bad_cavity(setup(kappa=0.0, delta_c=-3.0, delta=-3.0), emission)

    def test_needs_coupling(self, emission):
        with pytest.raises(DegenerateCoupling):
            limit_bad_cavity(setup(g=0.0, kappa=40.0, delta=0.0), emission)


class TestSideband:
    """Test the far-detuned formula"""

    def test_needs_detuning(self, emission):
        with pytest.raises(RegimeMismatch):
            limit_sideband(setup(delta=0.0), emission)

    def test_matches_exact_rates(self, emission):
        p = setup(delta=-1e4, delta_c=-1.0, gamma=10.0, kappa=0.5)
        limit = limit_sideband(p, emission)
        exact = rates_weak_drive(p, emission)
        assert limit.rates.a_minus == pytest.approx(exact.a_minus, rel=0.01)
        assert limit.rates.a_plus == pytest.approx(exact.a_plus, rel=0.01)
        assert limit.rates.n_st == pytest.approx(exact.n_st, rel=0.02)

    def test_minimum_formula(self, emission):
        p = setup(delta=-1e4, delta_c=-1.0, gamma=10.0, kappa=0.05)
        geometry = derive_geometry(p)
        limit = limit_sideband(p, emission)
        k2 = 0.05**2 / 16
        ratio = (0.4 + 0.5) / 1.0
        assert limit.n_min == pytest.approx(k2 + ratio / (4 * geometry.c1) * (1 + k2))

    def test_minimum_tends_to_cavity_linewidth_term(self, emission):
        p = setup(delta=-1e4, delta_c=-1.0, gamma=1e-6, kappa=0.05)
        assert limit_sideband(p, emission).n_min == pytest.approx(0.05**2 / 16, rel=1e-3)

    def test_general_occupation_only_red_of_cavity(self, emission):
        red = limit_sideband(setup(delta=-1e4, delta_c=-0.5), emission)
        blue = limit_sideband(setup(delta=-1e4, delta_c=0.5), emission)
        assert red.n_general is not None and red.n_general > 0
        assert blue.n_general is None

    def test_no_motional_coupling_never_cools(self, emission):
        p = setup(theta_l=math.pi / 2, theta_c=math.pi / 2, kappa=0.0, delta=-1e4, delta_c=-1.0)
        assert limit_sideband(p, emission).n_min == math.inf

    def test_error_shrinks_with_detuning(self, emission):
        errors = []
        for delta in (-1e3, -1e4, -1e5):
            p = setup(delta=delta, delta_c=-1.0, gamma=10.0, kappa=0.5)
            limit = limit_sideband(p, emission)
            exact = rates_weak_drive(p, emission)
            errors.append(abs(limit.rates.a_minus - exact.a_minus) / exact.a_minus)
        assert errors[0] > errors[1] > errors[2]

    def test_soft_check_logs(self, emission, caplog):
        limit_sideband(setup(delta=10.0, delta_c=-1.0), emission)
        assert "Sideband limit used" in caplog.text


class TestInterference:
    """Test the δc = 0 interference formulas"""

    def test_lossless_minimum(self, emission):
        p = setup(kappa=0.0, delta_c=0.0)
        p = p.replace(delta=delta_opt(0.0, p))
        limit = limit_interference_delta0(p, emission)
        assert limit.n0 == pytest.approx(limit.n0_opt, rel=1e-10)
        assert limit.n0 == pytest.approx(p.gamma**2 / (16 * p.delta**2), rel=1e-10)
        assert limit.f_correction == 0.0

    def test_lossless_matches_exact(self, emission):
        p = setup(kappa=0.0, delta_c=0.0, delta=30.0)
        limit = limit_interference_delta0(p, emission)
        assert limit.n0 == pytest.approx(rates_weak_drive(p, emission).n_st, rel=1e-9)

    def test_large_coupling_form(self, emission):
        p = setup(g=40.0 / math.cos(QUARTER), kappa=0.01, delta_c=0.0)
        p = p.replace(delta=delta_opt(0.0, p))
        limit = limit_interference_delta0(p, emission)
        assert limit.n_large_coupling == pytest.approx(limit.n_first_order_kappa, rel=0.05)

    def test_requires_cavity_resonance(self, emission):
        with pytest.raises(RegimeMismatch):
            limit_interference_delta0(setup(delta_c=0.2), emission)

    def test_heating_region(self, emission):
        with pytest.raises(HeatingRegion):
            limit_interference_delta0(setup(delta_c=0.0, delta=-20.0), emission)

    def test_uncoupled_atom(self, emission):
        limit = limit_interference_delta0(SystemParams(g=0.0, delta_c=0.0, delta=-5.0), emission)
        assert limit.n0 == pytest.approx((16.0 + 25.0) / 20.0)
        assert math.isfinite(limit.n_first_order_kappa)
        assert limit.n_large_coupling == math.inf

    def test_needs_spontaneous_emission(self, emission):
        p = SystemParams(gamma=0.0, g=0.5, delta_c=0.0, delta=-5.0)
        with pytest.raises(RegimeMismatch):
            limit_interference_delta0(p, emission)


class TestHeatingSuppression:
    """Test the δc = ν/2 formulas"""

    def _params(self, kappa):
        p = setup(theta_l=math.pi / 2, kappa=kappa, delta_c=0.5)
        return p.replace(delta=delta_opt(0.5, p))

    def test_lossless_optimum(self, emission):
        limit = limit_heating_suppression(self._params(0.0), emission)
        assert limit.n0 == pytest.approx(limit.n0_opt, rel=1e-10)

    def test_agrees_with_exact_rates(self, emission):
        p = self._params(0.01)
        limit = limit_heating_suppression(p, emission)
        assert limit.n_kappa == pytest.approx(rates_weak_drive(p, emission).n_st, rel=0.1)

    def test_requires_perpendicular_laser(self, emission):
        with pytest.raises(GeometryViolation):
            limit_heating_suppression(setup(delta_c=0.5), emission)

    def test_requires_half_trap_frequency(self, emission):
        with pytest.raises(RegimeMismatch):
            limit_heating_suppression(setup(theta_l=math.pi / 2, delta_c=0.0), emission)

    def test_needs_spontaneous_emission(self, emission):
        p = setup(theta_l=math.pi / 2, gamma=0.0, delta_c=0.5, delta=20.0)
        with pytest.raises(RegimeMismatch):
            limit_heating_suppression(p, emission)


class TestStandingWave:
    """Test the standing-wave drive at a laser node"""

    def _params(self, kappa):
        p = setup(drive=DriveKind.STANDING_WAVE, kappa=kappa, delta_c=1.0)
        return p.replace(delta=delta_opt(1.0, p))

    def test_heating_vanishes_without_loss(self, emission):
        rates = standing_wave_rates(self._params(0.0), emission)
        assert rates.a_plus == pytest.approx(0.0, abs=1e-12)
        assert rates.n_st == pytest.approx(0.0, abs=1e-12)

    def test_exact_cooling_rate(self, emission):
        p = self._params(0.0)
        rates = standing_wave_rates(p, emission)
        assert rates.w == pytest.approx(4 * p.eta**2 * p.omega**2 / p.gamma, rel=1e-10)
        assert rates.d == 0.0

    def test_cooperativity_limited_occupation(self, emission):
        p = self._params(0.01)
        c1 = derive_geometry(p).c1
        assert standing_wave_rates(p, emission).n_st == pytest.approx(1 / (4 * c1), rel=0.1)

    def test_small_loss_heating_estimate(self, emission):
        limit = standing_wave_limit(self._params(0.01), emission)
        assert limit.rates.a_plus == pytest.approx(limit.a_plus_small_kappa, rel=0.1)

    def test_lossless_closed_form(self, emission):
        limit = standing_wave_limit(self._params(0.0), emission)
        assert limit.a_minus_lossless == pytest.approx(limit.rates.a_minus, rel=1e-10)

    def test_small_loss_occupation_without_emission(self, emission):
        p = setup(drive=DriveKind.STANDING_WAVE, gamma=0.0, kappa=0.01, delta_c=1.0, delta=20.0)
        assert standing_wave_limit(p, emission).n_small_kappa == math.inf

    def test_requires_node(self, emission):
        with pytest.raises(GeometryViolation):
            standing_wave_rates(setup(delta_c=1.0), emission)
        with pytest.raises(GeometryViolation):
            standing_wave_rates(setup(drive="standing_wave", phi_l=0.3, delta_c=1.0), emission)


class TestSmallKappaSaturating:
    """Test the first-order small-κ rates at any drive"""

    def test_lossless_matches_exact(self, emission):
        p = setup(kappa=0.0, delta_c=0.0, delta=48.0)
        saturating = rates_smallk_saturating(p, emission)
        exact = rates_weak_drive(p, emission)
        assert saturating.a_plus == pytest.approx(exact.a_plus, rel=1e-10)
        assert saturating.a_minus == pytest.approx(exact.a_minus, rel=1e-10)

    def test_first_order_agrees_with_weak_drive(self, emission):
        p = setup(kappa=1e-4, delta_c=0.0, omega=0.1, delta=48.0)
        saturating = rates_smallk_saturating(p, emission)
        exact = rates_weak_drive(p, emission)
        assert saturating.a_minus == pytest.approx(exact.a_minus, rel=1e-3)

    def test_expansion_cutoff_at_narrow_linewidth(self, emission):
        # γ− = (γ/4)(1 − 48/50) = 0.1 at g̃ = 7, Δ = 48
        cutoff = SMALL_KAPPA_CUTOFF * 0.1
        rates_smallk_saturating(setup(kappa=0.999 * cutoff, delta_c=0.0, delta=48.0), emission)
        with pytest.raises(ExpansionInvalid):
            rates_smallk_saturating(setup(kappa=1.001 * cutoff, delta_c=0.0, delta=48.0), emission)

    def test_tighter_cutoff(self, emission):
        p = setup(kappa=0.05, delta_c=0.0, delta=48.0)
        rates_smallk_saturating(p, emission)
        with pytest.raises(ExpansionInvalid):
            rates_smallk_saturating(p, emission, expansion_threshold=0.2)

    def test_error_shrinks_with_kappa(self, emission):
        errors = []
        for kappa in (1e-2, 1e-3, 1e-4):
            p = setup(kappa=kappa, delta_c=0.0, omega=0.1, delta=48.0)
            saturating = rates_smallk_saturating(p, emission)
            errors.append(abs(saturating.a_minus - rates_weak_drive(p, emission).a_minus))
        assert errors[0] > errors[1] > errors[2]

    def test_needs_spontaneous_emission(self, emission):
        with pytest.raises(RegimeMismatch):
            rates_smallk_saturating(setup(gamma=0.0, delta_c=0.0, delta=48.0), emission)

    def test_expansion_rejected_for_large_kappa(self, emission):
        with pytest.raises(ExpansionInvalid):
            rates_smallk_saturating(setup(kappa=0.5, delta_c=0.0, delta=48.0), emission)

    def test_requires_cavity_resonance(self, emission):
        with pytest.raises(RegimeMismatch):
            rates_smallk_saturating(setup(delta_c=0.3), emission)
