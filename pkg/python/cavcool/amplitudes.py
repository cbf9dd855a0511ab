"""
Weak-drive transition amplitudes and rates

For a weakly driven atom coupled to a lossy cavity mode, the heating (+)
and cooling (−) rates follow from nine complex amplitudes: the carrier
amplitude T_S and, for each sideband, laser and cavity amplitudes decaying
through spontaneous emission (γ) or cavity loss (κ). All are built from the
characteristic function

    f(x) = (x + δc + iκ/2)(x + Δ + iγ/2) − g̃²

whose roots are the dressed atom-cavity resonances.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from cavcool.emission import EmissionPattern
from cavcool.errors import DegenerateCoupling, DivergentOptimum, PoleAtResonance
from cavcool.geometry import derive_geometry
from cavcool.models import Geometry, RateResult, SystemParams

logger = logging.getLogger(__name__)

DEFAULT_POLE_FLOOR = 1e-12


@dataclass(frozen=True)
class AmplitudeSet:
    """Carrier and sideband transition amplitudes (linear in Ω)"""

    t_s: complex
    t_l_gamma_plus: complex
    t_l_gamma_minus: complex
    t_l_kappa_plus: complex
    t_l_kappa_minus: complex
    t_c_gamma_plus: complex
    t_c_gamma_minus: complex
    t_c_kappa_plus: complex
    t_c_kappa_minus: complex


@dataclass(frozen=True)
class DressedStates:
    """Single-excitation eigenstates of the coupled atom and cavity.

    λ± are measured from the cavity frequency, so the laser is resonant with
    |±⟩ when δc = λ±, i.e. at the laser-atom detunings ``resonances``.
    """

    lambda_plus: float
    lambda_minus: float
    gamma_plus: float
    gamma_minus: float
    theta_mix: float
    delta_cav: float

    @property
    def resonances(self) -> tuple:
        """Δ values at which the excitation spectrum peaks (|+⟩, |−⟩)"""
        return (self.delta_cav + self.lambda_plus, self.delta_cav + self.lambda_minus)


def _f(x: float, p: SystemParams, g_tilde: float) -> complex:
    return (x + p.delta_c + 0.5j * p.kappa) * (x + p.delta + 0.5j * p.gamma) - g_tilde**2


def char_poly_f(x: float, p: SystemParams, geometry: Optional[Geometry] = None) -> complex:
    """f(x) = (x+δc+iκ/2)(x+Δ+iγ/2) − g̃²"""
    geometry = geometry or derive_geometry(p)
    return _f(x, p, geometry.g_tilde)


def _checked(value: complex, which: str, floor: float) -> complex:
    if abs(value) < floor:
        raise PoleAtResonance(which, value)
    return value


def _amplitude_set(
    p: SystemParams, g_tilde: float, nu: float, pole_floor: float = DEFAULT_POLE_FLOOR
) -> AmplitudeSet:
    omega = p.omega
    c = p.delta_c + 0.5j * p.kappa
    g2 = g_tilde**2
    f0 = _checked(_f(0.0, p, g_tilde), "f(0)", pole_floor)

    # The + label (heating) is evaluated at x = −ν and the − label at x = +ν.
    side = {}
    for label, x in (("plus", -nu), ("minus", nu)):
        fx = _checked(_f(x, p, g_tilde), f"f({x:+g})", pole_floor)
        side[f"t_l_gamma_{label}"] = 1j * omega * (c + x) / fx
        side[f"t_l_kappa_{label}"] = 1j * omega * g_tilde / fx
        side[f"t_c_gamma_{label}"] = -omega * g2 * (2.0 * p.delta_c + x + 1j * p.kappa) / (f0 * fx)
        side[f"t_c_kappa_{label}"] = (
            -omega * g_tilde * ((p.delta + x + 0.5j * p.gamma) * c + g2) / (f0 * fx)
        )

    return AmplitudeSet(t_s=omega * c / f0, **side)


def amplitudes(
    p: SystemParams,
    geometry: Optional[Geometry] = None,
    pole_floor: float = DEFAULT_POLE_FLOOR,
) -> AmplitudeSet:
    """
    Weak-drive transition amplitudes.

    Args:
        p: System parameters
        geometry: Precomputed geometry (derived from ``p`` when omitted)
        pole_floor: Smallest |f| accepted before declaring a pole

    Raises:
        PoleAtResonance: If f(0), f(−ν) or f(+ν) is below ``pole_floor``
    """
    geometry = geometry or derive_geometry(p)
    return _amplitude_set(p, geometry.g_tilde, p.nu, pole_floor)


def _rates_from_amplitudes(
    t: AmplitudeSet, p: SystemParams, geometry: Geometry, alpha: float
) -> RateResult:
    phi_l, phi_c = geometry.phi_l_coef, geometry.phi_c_coef
    carrier = p.gamma * alpha * abs(t.t_s) ** 2

    def rate(t_l_gamma, t_c_gamma, t_l_kappa, t_c_kappa) -> float:
        return (
            carrier
            + p.gamma * abs(phi_l * t_l_gamma + phi_c * t_c_gamma) ** 2
            + p.kappa * abs(phi_l * t_l_kappa + phi_c * t_c_kappa) ** 2
        )

    a_plus = rate(t.t_l_gamma_plus, t.t_c_gamma_plus, t.t_l_kappa_plus, t.t_c_kappa_plus)
    a_minus = rate(t.t_l_gamma_minus, t.t_c_gamma_minus, t.t_l_kappa_minus, t.t_c_kappa_minus)
    return RateResult(a_plus=a_plus, a_minus=a_minus, d=carrier / 2.0, eta=p.eta)


def rates_weak_drive(
    p: SystemParams,
    e: EmissionPattern,
    geometry: Optional[Geometry] = None,
    pole_floor: float = DEFAULT_POLE_FLOOR,
) -> RateResult:
    """
    Heating and cooling rates at weak drive.

    A± = γα|T_S|² + γ|φL T_L^γ± + φc T_c^γ±|² + κ|φL T_L^κ± + φc T_c^κ±|²
    and D = γα|T_S|²/2.
    """
    geometry = geometry or derive_geometry(p)
    t = _amplitude_set(p, geometry.g_tilde, p.nu, pole_floor)
    return _rates_from_amplitudes(t, p, geometry, e.alpha)


def delta_opt(delta_c: float, p: SystemParams, geometry: Optional[Geometry] = None) -> float:
    """
    Laser detuning that puts the cooling sideband on a dressed resonance.

    Δ_opt(δc) = (g̃² + γκ/4)/(δc + ν) − ν, the root of Re f(ν) = 0.

    Raises:
        DivergentOptimum: At δc = −ν
    """
    geometry = geometry or derive_geometry(p)
    denominator = delta_c + p.nu
    if abs(denominator) < 1e-12:
        raise DivergentOptimum(f"delta_opt diverges at delta_c = {delta_c} (= -nu)")
    return (geometry.g_tilde**2 + p.gamma * p.kappa / 4.0) / denominator - p.nu


def dressed_states(p: SystemParams, geometry: Optional[Geometry] = None) -> DressedStates:
    """
    Frequencies, linewidths and mixing angle of the dressed states |±⟩.

    Raises:
        DegenerateCoupling: If g̃ = 0 (the mixing angle is undefined)
    """
    geometry = geometry or derive_geometry(p)
    g_tilde = geometry.g_tilde
    if g_tilde == 0.0:
        raise DegenerateCoupling("dressed states need a nonzero coupling g_tilde")
    delta_cav = p.delta_cav
    root = math.sqrt(g_tilde**2 + delta_cav**2 / 4.0)
    theta = math.atan2(g_tilde, -delta_cav / 2.0 + root)
    sin2, cos2 = math.sin(theta) ** 2, math.cos(theta) ** 2
    return DressedStates(
        lambda_plus=-delta_cav / 2.0 + root,
        lambda_minus=-delta_cav / 2.0 - root,
        gamma_plus=p.kappa * sin2 + p.gamma * cos2,
        gamma_minus=p.kappa * cos2 + p.gamma * sin2,
        theta_mix=theta,
        delta_cav=delta_cav,
    )


def excitation_spectrum(
    p: SystemParams, delta_grid, geometry: Optional[Geometry] = None
) -> np.ndarray:
    """
    Weak-drive photon scattering rate as the laser detuning is scanned.

    The atom-cavity detuning Δc of ``p`` is held fixed while Δ runs over
    ``delta_grid`` (so δc = Δ − Δc). The rate is the spontaneous channel
    γ|T_S|² plus the cavity channel κ|Ωg̃/f(0)|².
    """
    geometry = geometry or derive_geometry(p)
    g_tilde = geometry.g_tilde
    delta = np.asarray(delta_grid, dtype=float)
    delta_c = delta - p.delta_cav
    f0 = (delta_c + 0.5j * p.kappa) * (delta + 0.5j * p.gamma) - g_tilde**2
    t_s = p.omega * (delta_c + 0.5j * p.kappa) / f0
    cavity = p.omega * g_tilde / f0
    return p.gamma * np.abs(t_s) ** 2 + p.kappa * np.abs(cavity) ** 2
