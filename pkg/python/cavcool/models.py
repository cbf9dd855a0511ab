"""
Data models for cavcool

Physical parameters, derived geometry and cooling-rate results. All
frequencies and rates are in units of the trap frequency ν, with ħ = 1.
"""

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

_ANGLE_RE = re.compile(r"^\s*(?:([0-9]*\.?[0-9]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$")


def parse_angle(value: Any) -> Any:
    """Accept angles written as ``pi``, ``pi/4`` or ``3*pi/4`` in config files.

    Anything that is not such a string is handed back to pydantic unchanged.
    """
    if not isinstance(value, str):
        return value
    match = _ANGLE_RE.match(value)
    if match is None:
        return value
    factor = float(match.group(1)) if match.group(1) else 1.0
    divisor = float(match.group(2)) if match.group(2) else 1.0
    return factor * math.pi / divisor


class DriveKind(str, Enum):
    """Laser drive configuration"""

    TRAVELING_WAVE = "traveling_wave"
    STANDING_WAVE = "standing_wave"


class SystemParams(BaseModel):
    """Physical inputs of one atom, one cavity mode and one laser.

    ``nu`` is the unit anchor and is always 1. The cavity-laser and
    atom-laser detunings are independent; Δc = Δ − δc is derived.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    gamma: float = Field(10.0, ge=0, description="Dipole linewidth γ")
    kappa: float = Field(0.01, ge=0, description="Cavity decay rate κ")
    g: float = Field(7.0 * math.sqrt(2.0), ge=0, description="Vacuum Rabi coupling g")
    phi: float = Field(math.pi / 4, description="Standing-wave phase of the cavity mode at the trap")
    omega: float = Field(1.0, ge=0, description="Laser Rabi frequency Ω")
    delta: float = Field(48.025, description="Laser-atom detuning Δ")
    delta_c: float = Field(0.0, description="Laser-cavity detuning δc")
    nu: float = Field(1.0, description="Trap frequency (unit anchor, fixed to 1)")
    eta: float = Field(0.1, ge=0, description="Lamb-Dicke parameter η")
    theta_l: float = Field(
        math.pi / 4, ge=0, le=math.pi, alias="theta_L", description="Laser angle to the trap axis"
    )
    theta_c: float = Field(math.pi / 4, ge=0, le=math.pi, description="Cavity angle to the trap axis")
    drive: DriveKind = Field(DriveKind.TRAVELING_WAVE, description="Traveling or standing-wave drive")
    phi_l: float = Field(
        math.pi / 2, alias="phi_L", description="Phase of the laser standing wave at the trap"
    )

    @field_validator("phi", "theta_l", "theta_c", "phi_l", mode="before")
    @classmethod
    def _angles_may_use_pi(cls, value: Any) -> Any:
        return parse_angle(value)

    @field_validator("nu")
    @classmethod
    def _nu_is_unit(cls, value: float) -> float:
        if value != 1.0:
            raise ValueError("nu is the unit of frequency and must be exactly 1")
        return value

    @field_validator("*")
    @classmethod
    def _finite(cls, value: Any) -> Any:
        if isinstance(value, float) and not math.isfinite(value):
            raise ValueError("value must be finite")
        return value

    @property
    def delta_cav(self) -> float:
        """Δc = Δ − δc"""
        return self.delta - self.delta_c

    def replace(self, **changes: Any) -> "SystemParams":
        """Return a validated copy with some fields changed"""
        data = self.model_dump()
        data.update(changes)
        return SystemParams.model_validate(data)

    def to_record(self) -> dict:
        """Field values keyed by their external (config file) names"""
        return self.model_dump(mode="json", by_alias=True)


class Geometry(BaseModel):
    """Couplings derived from the setup geometry"""

    model_config = ConfigDict(frozen=True)

    g_tilde: float = Field(..., description="Zeroth-order coupling g·cosφ")
    phi_l_coef: float = Field(..., description="Laser force coefficient φL = cosθL")
    phi_c_coef: float = Field(..., description="Cavity force coefficient φc = cosθc·tanφ")
    c1: float = Field(..., description="Cooperativity g̃²/(γκ), infinite when γκ = 0")


@dataclass(frozen=True)
class RateResult:
    """Heating and cooling rates of the phonon rate equation"""

    a_plus: float
    a_minus: float
    d: float
    eta: float

    @property
    def w(self) -> float:
        """Cooling rate η²(A− − A+)"""
        return self.eta**2 * (self.a_minus - self.a_plus)

    @property
    def is_heating(self) -> bool:
        return self.a_minus <= self.a_plus

    @property
    def is_undriven(self) -> bool:
        return self.a_plus == 0.0 and self.a_minus == 0.0

    @property
    def n_st(self) -> Optional[float]:
        """Steady-state mean phonon number, None in the heating regime"""
        if self.is_heating:
            return None
        return self.a_plus / (self.a_minus - self.a_plus)

    def as_dict(self) -> dict:
        return {
            "a_plus": self.a_plus,
            "a_minus": self.a_minus,
            "d": self.d,
            "w": self.w,
            "n_st": self.n_st,
            "heating": self.is_heating,
        }
