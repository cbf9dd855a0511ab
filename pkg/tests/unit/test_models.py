"""
Unit tests for parameter models, rate results and error types
"""

import math

import pytest
from pydantic import ValidationError

from cavcool.errors import (
    CavcoolError,
    ConfigError,
    DegenerateCoupling,
    GridMismatch,
    HeatingRegime,
    PoleAtResonance,
    SingularResolvent,
    StepTooLarge,
    TruncationLeak,
)
from cavcool.models import DriveKind, RateResult, SystemParams, parse_angle


class TestSystemParams:
    """Test SystemParams validation and helpers"""

    def test_defaults_sit_on_optimum_line(self):
        p = SystemParams()
        assert p.nu == 1.0
        assert p.drive == DriveKind.TRAVELING_WAVE
        assert p.delta == pytest.approx(48.025)

    def test_delta_cav_is_derived(self):
        p = SystemParams(delta=10.0, delta_c=-2.5)
        assert p.delta_cav == 12.5

    def test_nu_is_fixed(self):
        with pytest.raises(ValidationError):
            SystemParams(nu=2.0)

    def test_negative_rates_rejected(self):
        with pytest.raises(ValidationError):
            SystemParams(gamma=-1.0)
        with pytest.raises(ValidationError):
            SystemParams(kappa=-0.1)

    def test_angle_range(self):
        with pytest.raises(ValidationError):
            SystemParams(theta_c=4.0)

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            SystemParams(delta=math.inf)

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            SystemParams(detuning=1.0)

    def test_alias_and_field_name(self):
        by_alias = SystemParams(theta_L=0.5, phi_L=0.2)
        by_name = SystemParams(theta_l=0.5, phi_l=0.2)
        assert by_alias == by_name

    def test_angles_written_with_pi(self):
        p = SystemParams(phi="pi/4", theta_l="pi/2", theta_c="3*pi/4")
        assert p.phi == pytest.approx(math.pi / 4)
        assert p.theta_l == pytest.approx(math.pi / 2)
        assert p.theta_c == pytest.approx(3 * math.pi / 4)

    def test_replace_validates_and_copies(self):
        p = SystemParams()
        q = p.replace(delta_c=0.5)
        assert q.delta_c == 0.5
        assert p.delta_c == 0.0
        with pytest.raises(ValidationError):
            p.replace(eta=-1.0)

    def test_record_round_trip(self):
        p = SystemParams(delta_c=-0.3, drive="standing_wave")
        record = p.to_record()
        assert "theta_L" in record
        assert SystemParams.model_validate(record) == p


class TestParseAngle:
    """Test the pi-expression parser"""

    def test_plain_pi(self):
        assert parse_angle("pi") == pytest.approx(math.pi)

    def test_numbers_pass_through(self):
        assert parse_angle(0.25) == 0.25

    def test_other_strings_pass_through(self):
        assert parse_angle("quarter") == "quarter"


class TestRateResult:
    """Test derived quantities of RateResult"""

    def test_cooling_rate_and_occupation(self):
        rates = RateResult(a_plus=0.5, a_minus=2.5, d=0.1, eta=0.1)
        assert rates.w == pytest.approx(0.01 * 2.0)
        assert rates.n_st == pytest.approx(0.25)
        assert not rates.is_heating

    def test_heating_has_no_steady_state(self):
        rates = RateResult(a_plus=2.0, a_minus=1.0, d=0.0, eta=0.1)
        assert rates.is_heating
        assert rates.n_st is None
        assert rates.as_dict()["heating"] is True

    def test_undriven(self):
        rates = RateResult(a_plus=0.0, a_minus=0.0, d=0.0, eta=0.1)
        assert rates.is_undriven
        assert rates.is_heating
        assert rates.w == 0.0


class TestErrors:
    """Test the error hierarchy"""

    def test_all_derive_from_base(self):
        for error_type in (DegenerateCoupling, TruncationLeak, GridMismatch, ConfigError):
            assert issubclass(error_type, CavcoolError)

    def test_builtin_bases(self):
        assert issubclass(DegenerateCoupling, ValueError)
        assert issubclass(PoleAtResonance, ArithmeticError)
        assert issubclass(SingularResolvent, ArithmeticError)
        assert issubclass(StepTooLarge, RuntimeError)

    def test_codes_are_distinct(self):
        codes = {
            error_type.code
            for error_type in (
                DegenerateCoupling,
                PoleAtResonance,
                TruncationLeak,
                HeatingRegime,
                GridMismatch,
                ConfigError,
            )
        }
        assert len(codes) == 6

    def test_pole_message_names_the_function(self):
        error = PoleAtResonance("f(0)", 1e-15 + 0j)
        assert error.which == "f(0)"
        assert "f(0)" in str(error)

    def test_heating_regime_carries_solution(self):
        error = HeatingRegime("grows", mean_n=3.5)
        assert error.mean_n == 3.5

    def test_config_error_line(self):
        assert ConfigError("bad", line=7).line == 7
