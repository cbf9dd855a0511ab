"""
Integration tests across engines

The closed forms, the liouvillian resolvent and the trajectory ensemble are
independent routes to the same rates; these tests hold them against each other.
"""

import math

import pytest

from cavcool.amplitudes import delta_opt, rates_weak_drive
from cavcool.emission import EmissionPattern
from cavcool.limits import rates_smallk_saturating, standing_wave_rates
from cavcool.liouvillian import InternalSpace, numerical_rates
from cavcool.models import DriveKind, SystemParams
from cavcool.validation import CRITERIA, run_validation


def setup(**changes) -> SystemParams:
    values = dict(g=7.0 / math.cos(math.pi / 4))
    values.update(changes)
    return SystemParams(**values)


class TestEngineAgreement:
    """Test the resolvent engine against closed forms"""

    def test_saturating_drive_small_kappa(self):
        emission = EmissionPattern()
        p = setup(kappa=0.01, omega=1.0, delta_c=0.0)
        p = p.replace(delta=delta_opt(0.0, p))
        numeric = numerical_rates(p, InternalSpace(6), emission)
        expansion = rates_smallk_saturating(p, emission)
        assert numeric.a_minus == pytest.approx(expansion.a_minus, rel=0.03)
        assert numeric.n_st == pytest.approx(expansion.n_st, rel=0.05)

    def test_weak_drive(self):
        emission = EmissionPattern()
        p = setup(kappa=1.0, delta_c=-2.0, delta=20.0, omega=0.05)
        numeric = numerical_rates(p, InternalSpace(4), emission)
        exact = rates_weak_drive(p, emission)
        assert numeric.a_plus == pytest.approx(exact.a_plus, rel=1e-3)
        assert numeric.a_minus == pytest.approx(exact.a_minus, rel=1e-3)

    def test_standing_wave(self):
        emission = EmissionPattern()
        p = setup(kappa=0.5, delta_c=1.0, drive=DriveKind.STANDING_WAVE, phi_l=math.pi / 2)
        p = p.replace(delta=delta_opt(1.0, p), omega=0.05)
        numeric = numerical_rates(p, InternalSpace(3), emission, variant=DriveKind.STANDING_WAVE)
        analytic = standing_wave_rates(p, emission)
        assert numeric.a_plus == pytest.approx(analytic.a_plus, rel=1e-3)
        assert numeric.a_minus == pytest.approx(analytic.a_minus, rel=1e-3)
        assert numeric.d == 0.0


class TestAcceptanceCriteria:
    """Test the acceptance criteria one at a time"""

    @pytest.mark.parametrize("number", [1, 2, 3, 4, 5, 7, 8])
    def test_quick_criterion(self, number):
        result = CRITERIA[number](True, 1)
        assert result.number == number
        assert result.passed, result.measured

    @pytest.mark.slow
    @pytest.mark.parametrize("number", [6, 9])
    def test_ensemble_criterion(self, number):
        report = run_validation([number], quick=True)
        assert report.passed, report.results[0].measured
