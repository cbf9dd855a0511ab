"""
Asymptotic rate formulas

Each function evaluates the closed-form expressions of one cooling regime
as printed, never substituting the exact weak-drive rates, so that the gap
to ``rates_weak_drive`` can be measured. Preconditions on the regime are
checked either strictly (the formula is meaningless otherwise) or softly
with a logged warning (the formula is merely less accurate).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

from cavcool.amplitudes import DEFAULT_POLE_FLOOR, _checked, _f
from cavcool.emission import EmissionPattern
from cavcool.errors import (
    DegenerateCoupling,
    ExpansionInvalid,
    GeometryViolation,
    HeatingRegion,
    RegimeMismatch,
)
from cavcool.geometry import derive_geometry
from cavcool.models import DriveKind, Geometry, RateResult, SystemParams

logger = logging.getLogger(__name__)

# Tolerance when checking that δc sits exactly at a required value.
_DETUNING_TOLERANCE = 1e-9

# Soft-check margin for "much larger than".
_SOFT_MARGIN = 10.0

# Small-κ expansion is rejected once κ reaches this multiple of γ−. The
# saturating-drive acceptance check runs κ up to γ−/2.
SMALL_KAPPA_CUTOFF = 1.0


def _require_delta_c(p: SystemParams, value: float, formula: str) -> None:
    if abs(p.delta_c - value) > _DETUNING_TOLERANCE:
        raise RegimeMismatch(f"{formula} needs delta_c = {value}, got {p.delta_c}")


def _require_emission(p: SystemParams, formula: str) -> None:
    # These expansions are taken in powers of 1/γ.
    if p.gamma <= 0.0:
        raise RegimeMismatch(f"{formula} needs gamma > 0, got {p.gamma}")


def bad_cavity_shift(p: SystemParams, geometry: Optional[Geometry] = None) -> tuple:
    """
    Cavity-induced shift δ̃ and broadening γ̃ of the atomic resonance.

    The shift is taken with the atom-cavity detuning ω0 − ωc = δc − Δ, so
    the effective atomic resonance sits at Δ = δ̃.
    """
    geometry = geometry or derive_geometry(p)
    g2 = geometry.g_tilde**2
    atom_cavity = p.delta_c - p.delta
    denominator = p.kappa**2 / 4.0 + atom_cavity**2
    return g2 * atom_cavity / denominator, g2 * p.kappa / denominator


def limit_bad_cavity(p: SystemParams, e: EmissionPattern) -> RateResult:
    """
    Rates when spontaneous emission is negligible and the cavity is broad.

    A± = Ω²γ̃/((Δ−δ̃)²+γ̃²/4)·|a±|² with the interference factor
    a± = φc[1 + 2(δ̃−iγ̃/2)/E±] − iφL(Δ−δ̃+iγ̃/2)/E±, E± = Δ−δ̃∓ν+iγ̃/2.

    Raises:
        RegimeMismatch: If κ = 0
        DegenerateCoupling: If g̃ = 0
    """
    if p.kappa <= 0.0:
        raise RegimeMismatch(f"bad-cavity limit needs kappa > 0, got {p.kappa}")
    geometry = derive_geometry(p)
    if geometry.g_tilde == 0.0:
        raise DegenerateCoupling("bad-cavity limit needs g_tilde != 0")
    shift, width = bad_cavity_shift(p, geometry)
    detuning = p.delta - shift
    prefactor = p.omega**2 * width / (detuning**2 + width**2 / 4.0)
    phi_l, phi_c = geometry.phi_l_coef, geometry.phi_c_coef

    def factor(x: float) -> complex:
        sideband = _checked(complex(detuning + x, width / 2.0), f"E({x:+g})", DEFAULT_POLE_FLOOR)
        return phi_c * (1.0 + 2.0 * complex(shift, -width / 2.0) / sideband) - 1j * phi_l * complex(
            detuning, width / 2.0
        ) / sideband

    a_plus = prefactor * abs(factor(-p.nu)) ** 2
    a_minus = prefactor * abs(factor(p.nu)) ** 2
    return RateResult(a_plus=a_plus, a_minus=a_minus, d=0.0, eta=p.eta)


@dataclass(frozen=True)
class SidebandLimit:
    """Leading order in 1/Δ of the far-detuned (sideband) regime"""

    rates: RateResult
    n_min: float
    w_min: float
    b_factor: float
    n_general: Optional[float]


def limit_sideband(p: SystemParams, e: EmissionPattern) -> SidebandLimit:
    """
    Far-detuned rates A± = Ω²/Δ²[(α+φL²)γ + g̃²κ(φL²+φc²)/(κ²/4+(δc∓ν)²)].

    Also returns the occupation n_general at the given δc with its factor
    B, the minimum over δc (reached at δc = −ν) and the rate at that
    minimum.
    """
    geometry = derive_geometry(p)
    g_tilde, phi_l, phi_c = geometry.g_tilde, geometry.phi_l_coef, geometry.phi_c_coef
    if p.delta == 0.0:
        raise RegimeMismatch("sideband limit needs a far-detuned laser, got delta = 0")
    alpha = e.alpha
    scale = max(p.gamma, p.g, p.kappa)
    if abs(p.delta) < _SOFT_MARGIN * scale:
        logger.warning(
            f"Sideband limit used at |delta| = {abs(p.delta):g}, less than "
            f"{_SOFT_MARGIN:g}x max(gamma, g, kappa) = {scale:g}"
        )

    strength = phi_l**2 + phi_c**2
    spontaneous = (alpha + phi_l**2) * p.gamma
    cavity = g_tilde**2 * p.kappa * strength
    lorentz_plus = p.kappa**2 / 4.0 + (p.delta_c - p.nu) ** 2
    lorentz_minus = p.kappa**2 / 4.0 + (p.delta_c + p.nu) ** 2
    drive = p.omega**2 / p.delta**2

    rates = RateResult(
        a_plus=drive * (spontaneous + cavity / lorentz_plus),
        a_minus=drive * (spontaneous + cavity / lorentz_minus),
        d=drive * p.gamma * alpha / 2.0,
        eta=p.eta,
    )

    ratio = (alpha + phi_l**2) / strength if strength > 0 else math.inf
    inv_c1 = 1.0 / geometry.c1 if geometry.c1 > 0 else math.inf
    k2 = p.kappa**2 / (16.0 * p.nu**2)
    # No motional coupling at all: nothing cools.
    n_min = k2 + inv_c1 / 4.0 * ratio * (1.0 + k2) if strength > 0 else math.inf
    w_min = (
        p.eta**2
        * 4.0
        * g_tilde**2
        / p.kappa
        * strength
        * drive
        * (1.0 - 1.0 / (1.0 + (4.0 * p.nu / p.kappa) ** 2))
        if p.kappa > 0
        else math.nan
    )

    b_factor = (
        p.gamma / (g_tilde**2 * p.kappa) * ratio * lorentz_plus
        if g_tilde > 0 and p.kappa > 0
        else math.inf
    )
    n_general = (
        lorentz_minus / (4.0 * (-p.delta_c) * p.nu) * (1.0 + b_factor) if p.delta_c < 0 else None
    )
    return SidebandLimit(
        rates=rates, n_min=n_min, w_min=w_min, b_factor=b_factor, n_general=n_general
    )


def _lossless_factor(p: SystemParams, g_tilde: float, sign: float) -> float:
    """𝒜± = ν²γ/([ν(ν∓Δ)−g̃²]² + ν²γ²/4) with sign = +1 for 𝒜+"""
    nu = p.nu
    return nu**2 * p.gamma / ((nu * (nu - sign * p.delta) - g_tilde**2) ** 2 + (nu * p.gamma) ** 2 / 4.0)


def _gamma_minus_estimate(p: SystemParams, g_tilde: float) -> float:
    return p.gamma / 4.0 * (1.0 - abs(p.delta) / math.sqrt(p.delta**2 + 4.0 * g_tilde**2))


@dataclass(frozen=True)
class InterferenceLimit:
    """Diffusion-suppressed cooling at δc = 0"""

    n0: float
    n0_opt: float
    w: float
    n_first_order_kappa: float
    f_correction: float
    n_large_coupling: float
    a_plus_factor: float
    a_minus_factor: float


def limit_interference_delta0(p: SystemParams, e: EmissionPattern) -> InterferenceLimit:
    """
    Cooling with the carrier suppressed by quantum interference (δc = 0).

    The lossless occupation at general Δ is
    n0 = ([ν(ν+Δ)−g̃²]² + γ²ν²/4)/(4νΔ(g̃²−ν²)), minimal at Δ_opt(0) where it
    equals γ²ν²/16(g̃²−ν²)². The first-order loss correction is
    n = n0(1+F). Without coupling (g̃ = 0) the large-coupling form is infinite.

    Raises:
        RegimeMismatch: If δc ≠ 0 or γ = 0
        HeatingRegion: Unless (Δ>0 and g̃>ν) or (Δ<0 and g̃<ν)
    """
    _require_delta_c(p, 0.0, "limit_interference_delta0")
    _require_emission(p, "limit_interference_delta0")
    geometry = derive_geometry(p)
    g_tilde, phi_l, phi_c = geometry.g_tilde, geometry.phi_l_coef, geometry.phi_c_coef
    nu, gamma, kappa = p.nu, p.gamma, p.kappa

    cooling = (p.delta > 0 and g_tilde > nu) or (p.delta < 0 and g_tilde < nu)
    if not cooling:
        raise HeatingRegion(
            f"delta = {p.delta:g}, g_tilde = {g_tilde:g}: interference cooling needs "
            "delta > 0 with g_tilde > nu, or delta < 0 with g_tilde < nu"
        )

    gamma_minus = _gamma_minus_estimate(p, g_tilde)
    if kappa > gamma_minus / _SOFT_MARGIN:
        logger.warning(
            f"kappa = {kappa:g} is not small against the narrow linewidth {gamma_minus:g}; "
            "first-order loss corrections may be inaccurate"
        )

    n0 = ((nu * (nu + p.delta) - g_tilde**2) ** 2 + gamma**2 * nu**2 / 4.0) / (
        4.0 * nu * p.delta * (g_tilde**2 - nu**2)
    )
    n0_opt = gamma**2 * nu**2 / (16.0 * (g_tilde**2 - nu**2) ** 2)
    delta_lossless = (g_tilde**2 - nu**2) / nu
    strength = phi_l**2 + phi_c**2
    w = (
        4.0
        * p.eta**2
        * strength
        * p.omega**2
        / gamma
        * (1.0 - 1.0 / (1.0 + (4.0 * delta_lossless / gamma) ** 2))
    )

    a_plus = _lossless_factor(p, g_tilde, 1.0)
    a_minus = _lossless_factor(p, g_tilde, -1.0)
    # κ²C1 = κg̃²/γ stays finite as κ → 0.
    kappa2_c1 = kappa * g_tilde**2 / gamma
    interference = phi_l * phi_c / strength if strength > 0 else 0.0
    f_correction = kappa2_c1 / nu**2 * (gamma / 2.0) * a_minus - 2.0 * (kappa / nu) * (
        a_minus / (a_minus - a_plus)
    ) * interference
    if g_tilde > 0:
        inv_c1 = gamma * kappa / g_tilde**2
        n_large_coupling = gamma**2 * nu**2 / (16.0 * g_tilde**4) + inv_c1 / 8.0
    else:
        n_large_coupling = math.inf

    return InterferenceLimit(
        n0=n0,
        n0_opt=n0_opt,
        w=w,
        n_first_order_kappa=n0 * (1.0 + f_correction),
        f_correction=f_correction,
        n_large_coupling=n_large_coupling,
        a_plus_factor=a_plus,
        a_minus_factor=a_minus,
    )


@dataclass(frozen=True)
class HeatingSuppressionLimit:
    """Cooling with the blue-sideband cavity channel suppressed (δc = ν/2)"""

    n0: float
    n0_opt: float
    w0: float
    n_kappa: float
    n_kappa_opt: float
    f_correction: float
    g_correction: float


def limit_heating_suppression(p: SystemParams, e: EmissionPattern) -> HeatingSuppressionLimit:
    """
    Cooling at δc = ν/2 with the laser perpendicular to the trap axis.

    Lossless occupation n0 = α(9γ²ν²/16 + [g̃² − 3ν(Δ+ν)/2]²)/(16g̃⁴φc²),
    its rate at Δ_opt(ν/2), and the first-order loss correction
    n = n0(1 + κF) + κG.

    Raises:
        GeometryViolation: If φL ≠ 0
        RegimeMismatch: If δc ≠ ν/2 or γ = 0
    """
    geometry = derive_geometry(p)
    if geometry.phi_l_coef != 0.0:
        raise GeometryViolation(
            f"heating suppression needs phi_L = 0 (theta_L = pi/2), got {geometry.phi_l_coef:g}"
        )
    _require_delta_c(p, p.nu / 2.0, "limit_heating_suppression")
    _require_emission(p, "limit_heating_suppression")
    g_tilde, phi_c = geometry.g_tilde, geometry.phi_c_coef
    if g_tilde == 0.0 or phi_c == 0.0:
        raise DegenerateCoupling("heating suppression needs g_tilde != 0 and phi_c != 0")

    alpha = e.alpha
    nu, gamma, kappa = p.nu, p.gamma, p.kappa
    g2 = g_tilde**2
    shifted = p.delta + nu
    resonance = 9.0 * gamma**2 * nu**2 / 16.0 + (g2 - 1.5 * nu * shifted) ** 2

    n0 = alpha * resonance / (16.0 * g2**2 * phi_c**2)
    n0_opt = 9.0 * alpha / (16.0 * phi_c**2) * gamma**2 * nu**2 / (16.0 * g2**2)
    w0 = (
        16.0
        * p.eta**2
        * p.omega**2
        / gamma
        * phi_c**2
        / ((1.0 + 3.0 * nu**2 / (4.0 * g2)) ** 2 + (3.0 * gamma * nu / (8.0 * g2)) ** 2)
    )

    f_correction = 0.5 * (
        g2 * gamma / resonance
        + (gamma**2 / 4.0 + shifted**2) / (g2 * gamma)
        - 2.0 * shifted / (gamma * nu)
    )
    g_correction = resonance / (4.0 * g2 * gamma * nu**2)
    inv_c1 = gamma * kappa / g2

    return HeatingSuppressionLimit(
        n0=n0,
        n0_opt=n0_opt,
        w0=w0,
        n_kappa=n0 * (1.0 + kappa * f_correction) + kappa * g_correction,
        n_kappa_opt=(1.0 + inv_c1 / 8.0) * n0_opt + (alpha / phi_c**2 + 9.0) * inv_c1 / 64.0,
        f_correction=f_correction,
        g_correction=g_correction,
    )


@dataclass(frozen=True)
class StandingWaveLimit:
    """Standing-wave drive with the trap at a laser node"""

    rates: RateResult
    a_plus_lossless: float
    a_minus_lossless: float
    n_small_kappa: float
    a_plus_small_kappa: float


def _require_standing_node(p: SystemParams) -> None:
    if p.drive != DriveKind.STANDING_WAVE or abs(p.phi_l - math.pi / 2) > 1e-12:
        raise GeometryViolation(
            "standing-wave rates need drive = standing_wave with phi_L = pi/2 "
            f"(got {p.drive.value}, phi_L = {p.phi_l:g})"
        )


def standing_wave_rates(
    p: SystemParams, e: EmissionPattern, pole_floor: float = DEFAULT_POLE_FLOOR
) -> RateResult:
    """
    Rates for a standing-wave drive with the atom at a node.

    A'± = γ|T_1L^γ±|² + κ|T_1L^κ±|² with T_1L^γ± = Ω(δc∓ν+iκ/2)/f(∓ν) and
    T_1L^κ± = Ωg̃/f(∓ν); D = 0. The laser force coefficient is taken as 1
    (laser axis along the trap).

    Raises:
        GeometryViolation: Unless drive is a standing wave with φL = π/2
        PoleAtResonance: If f(∓ν) vanishes
    """
    return standing_wave_limit(p, e, pole_floor).rates


def standing_wave_limit(
    p: SystemParams, e: EmissionPattern, pole_floor: float = DEFAULT_POLE_FLOOR
) -> StandingWaveLimit:
    """Standing-wave rates plus their lossless and small-loss closed forms"""
    _require_standing_node(p)
    g_tilde = derive_geometry(p).g_tilde
    nu, gamma, kappa = p.nu, p.gamma, p.kappa
    omega2 = p.omega**2

    def rate(x: float) -> float:
        fx = _checked(_f(x, p, g_tilde), f"f({x:+g})", pole_floor)
        t_gamma = p.omega * (p.delta_c + x + 0.5j * kappa) / fx
        t_kappa = p.omega * g_tilde / fx
        return gamma * abs(t_gamma) ** 2 + kappa * abs(t_kappa) ** 2

    def lossless(x: float) -> float:
        d = p.delta_c + x
        denominator = gamma**2 * d**2 / 4.0 + (d * (p.delta + x) - g_tilde**2) ** 2
        return omega2 * d**2 * gamma / denominator

    rates = RateResult(a_plus=rate(-nu), a_minus=rate(nu), d=0.0, eta=p.eta)
    if gamma > 0 and g_tilde > 0:
        n_small_kappa = (
            ((2.0 * nu * (p.delta + nu) - g_tilde**2) ** 2 + gamma**2 * nu**2)
            / (4.0 * nu**2 * gamma**2)
            * (gamma * kappa / g_tilde**2)
        )
    else:
        n_small_kappa = math.inf
    return StandingWaveLimit(
        rates=rates,
        a_plus_lossless=lossless(-nu),
        a_minus_lossless=lossless(nu),
        n_small_kappa=n_small_kappa,
        a_plus_small_kappa=kappa * omega2 / g_tilde**2 if g_tilde > 0 else math.inf,
    )


def rates_smallk_saturating(
    p: SystemParams, e: EmissionPattern, expansion_threshold: float = SMALL_KAPPA_CUTOFF
) -> RateResult:
    """
    Rates at δc = 0 to first order in κ, valid at any drive strength.

    A± = Ω²𝒜±(φL² + φc² + ξ±) with
    ξ± = (κ²/ν²)C1(1 − γ𝒜±/2)(φL²+φc²) − φc²/(2C1) + (κ/ν)(Δν/g̃² ∓ 1)φLφc.

    Args:
        p: System parameters (δc must be 0)
        e: Emission pattern (D vanishes at this order)
        expansion_threshold: The expansion is rejected once κ reaches
            ``expansion_threshold`` times the narrow linewidth γ−

    Raises:
        RegimeMismatch: If δc ≠ 0 or γ = 0
        DegenerateCoupling: If g̃ = 0
        ExpansionInvalid: If κ ≥ expansion_threshold·γ−
    """
    _require_delta_c(p, 0.0, "rates_smallk_saturating")
    _require_emission(p, "rates_smallk_saturating")
    geometry = derive_geometry(p)
    g_tilde, phi_l, phi_c = geometry.g_tilde, geometry.phi_l_coef, geometry.phi_c_coef
    if g_tilde == 0.0:
        raise DegenerateCoupling("small-kappa rates need g_tilde != 0")
    nu, gamma, kappa = p.nu, p.gamma, p.kappa

    gamma_minus = _gamma_minus_estimate(p, g_tilde)
    if kappa >= expansion_threshold * gamma_minus:
        raise ExpansionInvalid(
            f"kappa = {kappa:g} is not small against gamma_minus = {gamma_minus:g}"
        )

    strength = phi_l**2 + phi_c**2
    kappa2_c1 = kappa * g_tilde**2 / gamma
    inv_c1 = gamma * kappa / g_tilde**2

    def rate(sign: float) -> float:
        factor = _lossless_factor(p, g_tilde, sign)
        xi = (
            kappa2_c1 / nu**2 * (1.0 - gamma / 2.0 * factor) * strength
            - phi_c**2 * inv_c1 / 2.0
            + (kappa / nu) * (p.delta * nu / g_tilde**2 - sign) * phi_l * phi_c
        )
        return p.omega**2 * factor * (strength + xi)

    return RateResult(a_plus=rate(1.0), a_minus=rate(-1.0), d=0.0, eta=p.eta)
