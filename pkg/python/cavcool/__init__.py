"""
cavcool - cavity-assisted ground-state cooling of a trapped atom

Heating and cooling rates of a harmonically trapped two-level atom driven
by a laser and coupled to a lossy cavity mode, from closed-form amplitudes,
from resolvent solves of the internal Liouvillian, and from full Monte
Carlo wavefunction trajectories including the motion.

Example:
    >>> import cavcool
    >>> p = cavcool.SystemParams(delta_c=0.0)
    >>> p = p.replace(delta=cavcool.delta_opt(0.0, p))
    >>> rates = cavcool.rates_weak_drive(p, cavcool.EmissionPattern())
    >>> rates.n_st < 0.05
    True
"""

__version__ = "0.1.0"
__author__ = "cavcool developers"

from cavcool.amplitudes import (
    amplitudes,
    char_poly_f,
    delta_opt,
    dressed_states,
    excitation_spectrum,
    rates_weak_drive,
)
from cavcool.config import CavcoolConfig
from cavcool.dynamics import PhononDistribution, evolve_pn, mean_n_closed_form
from cavcool.emission import EmissionPattern
from cavcool.errors import CavcoolError
from cavcool.geometry import derive_geometry
from cavcool.limits import (
    limit_bad_cavity,
    limit_heating_suppression,
    limit_interference_delta0,
    limit_sideband,
    rates_smallk_saturating,
    standing_wave_rates,
)
from cavcool.liouvillian import InternalSpace, build_l0i, numerical_rates, spectrum_s, steady_state
from cavcool.mcwf import FullSpace, ensemble_mean, run_trajectory
from cavcool.models import DriveKind, RateResult, SystemParams

__all__ = [
    "CavcoolConfig",
    "CavcoolError",
    "DriveKind",
    "EmissionPattern",
    "FullSpace",
    "InternalSpace",
    "PhononDistribution",
    "RateResult",
    "SystemParams",
    "amplitudes",
    "build_l0i",
    "char_poly_f",
    "delta_opt",
    "derive_geometry",
    "dressed_states",
    "ensemble_mean",
    "evolve_pn",
    "excitation_spectrum",
    "limit_bad_cavity",
    "limit_heating_suppression",
    "limit_interference_delta0",
    "limit_sideband",
    "mean_n_closed_form",
    "numerical_rates",
    "rates_smallk_saturating",
    "rates_weak_drive",
    "run_trajectory",
    "spectrum_s",
    "standing_wave_rates",
    "steady_state",
    "__version__",
    "__author__",
]
