"""
Unit tests for geometry derivation and presets
"""

import math

import pytest

from cavcool.amplitudes import delta_opt
from cavcool.errors import DegenerateCoupling, NonPositiveInput
from cavcool.geometry import (
    GEOMETRY_PRESETS,
    MCWF_PANELS,
    apply_geometry_preset,
    derive_geometry,
    lamb_dicke_from_physical,
    mcwf_preset,
)
from cavcool.models import SystemParams


class TestDeriveGeometry:
    """Test g̃, φL, φc and C1"""

    def test_axes_along_trap(self):
        geometry = derive_geometry(SystemParams(phi=0.0, theta_l=0.0, theta_c=0.0, g=5.0))
        assert geometry.g_tilde == pytest.approx(5.0)
        assert geometry.phi_l_coef == pytest.approx(1.0)
        assert geometry.phi_c_coef == 0.0

    def test_quarter_angles(self):
        p = SystemParams(phi=math.pi / 4, theta_l=math.pi / 4, theta_c=math.pi / 4, g=10.0)
        geometry = derive_geometry(p)
        assert geometry.g_tilde == pytest.approx(10.0 / math.sqrt(2))
        assert geometry.phi_l_coef == pytest.approx(1 / math.sqrt(2))
        assert geometry.phi_c_coef == pytest.approx(1 / math.sqrt(2))

    def test_cooperativity(self):
        geometry = derive_geometry(SystemParams(g=7 * math.sqrt(2), gamma=10.0, kappa=0.01))
        assert geometry.g_tilde == pytest.approx(7.0)
        assert geometry.c1 == pytest.approx(490.0)

    def test_lossless_cooperativity_is_infinite(self):
        assert derive_geometry(SystemParams(kappa=0.0)).c1 == math.inf

    def test_cavity_node_with_cavity_force(self):
        with pytest.raises(DegenerateCoupling):
            derive_geometry(SystemParams(phi=math.pi / 2, theta_c=math.pi / 4))

    def test_cavity_node_without_cavity_force(self):
        geometry = derive_geometry(SystemParams(phi=math.pi / 2, theta_c=math.pi / 2))
        assert geometry.phi_c_coef == 0.0
        assert abs(geometry.g_tilde) < 1e-12

    def test_perpendicular_laser(self):
        assert derive_geometry(SystemParams(theta_l=math.pi / 2)).phi_l_coef == 0.0


class TestLambDicke:
    """Test the physical-units conversion"""

    def test_mass_scaling(self):
        light = lamb_dicke_from_physical(1e-25, 1e6, 1e7)
        heavy = lamb_dicke_from_physical(2e-25, 1e6, 1e7)
        assert heavy == pytest.approx(light / math.sqrt(2))

    def test_wavenumber_scaling(self):
        assert lamb_dicke_from_physical(1e-25, 1e6, 2e7) == pytest.approx(
            2 * lamb_dicke_from_physical(1e-25, 1e6, 1e7)
        )

    def test_calcium_order_of_magnitude(self):
        mass = 40 * 1.66053906660e-27
        eta = lamb_dicke_from_physical(mass, 2 * math.pi * 1e6, 2 * math.pi / 397e-9)
        assert 0.05 < eta < 0.5

    def test_non_positive_inputs(self):
        with pytest.raises(NonPositiveInput):
            lamb_dicke_from_physical(0.0, 1e6, 1e7)
        with pytest.raises(NonPositiveInput):
            lamb_dicke_from_physical(1e-25, -1.0, 1e7)


class TestPresets:
    """Test named geometries and Monte Carlo panels"""

    @pytest.mark.parametrize("name", sorted(GEOMETRY_PRESETS))
    def test_preset_keeps_coupling(self, name):
        p = apply_geometry_preset(SystemParams(), name, 7.0)
        assert derive_geometry(p).g_tilde == pytest.approx(7.0)

    def test_cavity_only_has_no_laser_force(self):
        p = apply_geometry_preset(SystemParams(), "cavity_only", 7.0)
        geometry = derive_geometry(p)
        assert geometry.phi_l_coef == 0.0
        assert geometry.phi_c_coef > 0

    def test_unknown_preset(self):
        with pytest.raises(KeyError):
            apply_geometry_preset(SystemParams(), "sideways", 7.0)

    def test_panels_sit_on_optimum_line(self):
        for g, delta_c in MCWF_PANELS.values():
            p = mcwf_preset(g, delta_c)
            assert p.kappa == 0.1
            assert p.gamma == 10.0
            assert p.eta == 0.1
            assert p.delta == pytest.approx(delta_opt(delta_c, p))
