"""
Setup geometry

Derives the zeroth-order coupling g̃ and the mechanical force coefficients
from the angles of the laser and cavity axes, converts physical trap data
into a Lamb-Dicke parameter, and holds the named parameter presets used by
the parameter maps and the Monte Carlo comparisons.
"""

import logging
import math
from typing import Dict

from scipy import constants

from cavcool.errors import DegenerateCoupling, NonPositiveInput
from cavcool.models import Geometry, SystemParams

logger = logging.getLogger(__name__)

# Below this |cos| an angle is treated as sitting exactly on a node.
_NODE_TOLERANCE = 1e-12


def derive_geometry(p: SystemParams) -> Geometry:
    """
    Compute g̃ = g cosφ, φL = cosθL, φc = cosθc tanφ and C1 = g̃²/(γκ).

    Args:
        p: System parameters

    Returns:
        Geometry with the derived couplings

    Raises:
        DegenerateCoupling: If cosφ = 0 while the cavity axis has a
            component along the trap (tanφ would be needed)
    """
    cos_phi = math.cos(p.phi)
    cos_theta_c = math.cos(p.theta_c)
    cos_theta_l = math.cos(p.theta_l)

    if abs(cos_theta_c) < _NODE_TOLERANCE:
        phi_c = 0.0
    elif abs(cos_phi) < _NODE_TOLERANCE:
        raise DegenerateCoupling(
            f"cos(phi) = {cos_phi:.1e}: the atom sits at a cavity node and the "
            "zeroth-order coupling vanishes"
        )
    else:
        phi_c = cos_theta_c * math.tan(p.phi)

    phi_l = 0.0 if abs(cos_theta_l) < _NODE_TOLERANCE else cos_theta_l
    g_tilde = p.g * cos_phi
    loss = p.gamma * p.kappa
    c1 = g_tilde**2 / loss if loss > 0 else math.inf

    return Geometry(g_tilde=g_tilde, phi_l_coef=phi_l, phi_c_coef=phi_c, c1=c1)


def lamb_dicke_from_physical(mass: float, trap_freq: float, wavenumber: float) -> float:
    """
    Lamb-Dicke parameter η = k·sqrt(ħ/(2Mν)).

    Args:
        mass: Atomic mass in kg
        trap_freq: Angular trap frequency in rad/s
        wavenumber: Optical wavenumber in 1/m

    Raises:
        NonPositiveInput: If any input is not strictly positive
    """
    for name, value in (("mass", mass), ("trap_freq", trap_freq), ("wavenumber", wavenumber)):
        if not value > 0:
            raise NonPositiveInput(f"{name} must be positive, got {value}")
    return wavenumber * math.sqrt(constants.hbar / (2.0 * mass * trap_freq))


GEOMETRY_PRESETS: Dict[str, Dict[str, float]] = {
    "both": {"theta_l": math.pi / 4, "theta_c": math.pi / 4},
    "cavity_only": {"theta_l": math.pi / 2, "theta_c": math.pi / 4},
    "laser_only": {"theta_l": math.pi / 4, "theta_c": math.pi / 2},
}


def apply_geometry_preset(p: SystemParams, name: str, g_tilde: float) -> SystemParams:
    """
    Set the axis angles of a named geometry, keeping g̃ fixed.

    The cavity phase is fixed at φ = π/4 and g is rescaled so that g·cosφ
    stays equal to ``g_tilde``.
    """
    if name not in GEOMETRY_PRESETS:
        raise KeyError(f"Unknown geometry preset: {name} (known: {', '.join(GEOMETRY_PRESETS)})")
    phi = math.pi / 4
    return p.replace(phi=phi, g=g_tilde / math.cos(phi), **GEOMETRY_PRESETS[name])


def mcwf_preset(g: float, delta_c: float) -> SystemParams:
    """
    Parameters of one Monte Carlo comparison panel.

    η = 0.1, θL = θc = φ = π/4, Ω = ν, γ = 10ν, κ = 0.1ν, and the laser
    detuning sits on the optimum line Δ_opt(δc).
    """
    from cavcool.amplitudes import delta_opt

    base = SystemParams(
        gamma=10.0,
        kappa=0.1,
        g=g,
        phi=math.pi / 4,
        omega=1.0,
        delta_c=delta_c,
        eta=0.1,
        theta_l=math.pi / 4,
        theta_c=math.pi / 4,
    )
    return base.replace(delta=delta_opt(delta_c, base))


MCWF_PANELS = {
    "a": (10.0, -1.1),
    "b": (10.0, 0.0),
    "c": (10.0, 0.5),
    "d": (50.0, -1.1),
    "e": (50.0, 0.0),
    "f": (50.0, 0.5),
}
