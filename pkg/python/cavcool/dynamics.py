"""
Phonon rate equation

In the Lamb-Dicke regime the occupation probabilities p_n of the trap
levels obey

    dp_n/dt = η²[(n+1)A− p_{n+1} − ((n+1)A+ + nA−) p_n + nA+ p_{n−1}],

a linear equation with a tridiagonal generator. It is integrated exactly
through the action of the matrix exponential, with a reflecting truncation
at n_max whose top-level population is monitored.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from cavcool.errors import HeatingRegime, TruncationLeak
from cavcool.models import RateResult

logger = logging.getLogger(__name__)

DEFAULT_LEAK_BOUND = 1e-6


@dataclass
class PhononDistribution:
    """Occupation probabilities p_0 … p_{n_max} of the trap levels"""

    p: np.ndarray
    leak_bound: float = DEFAULT_LEAK_BOUND

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        if self.p.ndim != 1 or self.p.size < 2:
            raise ValueError("distribution needs at least two levels")
        if np.any(self.p < -1e-12):
            raise ValueError("occupation probabilities must be nonnegative")
        if abs(self.p.sum() - 1.0) > 1e-9:
            raise ValueError(f"occupation probabilities sum to {self.p.sum()!r}, not 1")

    @classmethod
    def fock(cls, n: int, n_max: int, **kwargs) -> "PhononDistribution":
        p = np.zeros(n_max + 1)
        p[n] = 1.0
        return cls(p, **kwargs)

    @property
    def n_max(self) -> int:
        return self.p.size - 1

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(self.p.size), self.p))

    @property
    def ground_population(self) -> float:
        return float(self.p[0])

    @property
    def purity(self) -> float:
        """Σ p_n²"""
        return float(np.dot(self.p, self.p))

    @property
    def tail(self) -> float:
        return float(self.p[-1])

    def check_leak(self) -> None:
        """Raise TruncationLeak if the top level holds too much population"""
        if self.tail >= self.leak_bound:
            raise TruncationLeak(
                f"p[{self.n_max}] = {self.tail:.3e} reached the leak bound {self.leak_bound:.1e}"
            )


@dataclass
class CoolingTrajectory:
    """Mean phonon number on a time grid"""

    times: np.ndarray
    mean_n: np.ndarray
    w: Optional[float]
    n_st: Optional[float]
    std_error: Optional[np.ndarray] = None
    ground_population: Optional[np.ndarray] = None
    purity: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)


def default_n_max(mean_n0: float, rates: RateResult) -> int:
    """10·max(⟨n⟩₀, n_st) + 20"""
    n_st = rates.n_st if rates.n_st is not None else 0.0
    return int(np.ceil(10.0 * max(mean_n0, n_st))) + 20


def thermal_distribution(mean_n: float, n_max: int, **kwargs) -> PhononDistribution:
    """Thermal occupation with the given mean, truncated and renormalized"""
    if mean_n <= 0:
        return PhononDistribution.fock(0, n_max, **kwargs)
    ratio = mean_n / (1.0 + mean_n)
    p = ratio ** np.arange(n_max + 1)
    return PhononDistribution(p / p.sum(), **kwargs)


def steady_distribution(rates: RateResult, n_max: int, **kwargs) -> PhononDistribution:
    """Detailed-balance fixed point p_{n+1}/p_n = A+/A− of the truncated chain"""
    if rates.a_minus <= 0:
        raise HeatingRegime("steady distribution needs a positive cooling rate A-")
    ratio = rates.a_plus / rates.a_minus
    p = ratio ** np.arange(n_max + 1)
    return PhononDistribution(p / p.sum(), **kwargs)


def rate_generator(rates: RateResult, eta: float, n_max: int) -> sparse.csr_matrix:
    """Tridiagonal generator G with dp/dt = G p and reflecting truncation"""
    n = np.arange(n_max + 1, dtype=float)
    up = n[:-1] + 1.0  # rate factor n → n+1 is (n+1)A+
    down = n[1:]  # rate factor n → n−1 is nA−
    loss = np.zeros(n_max + 1)
    loss[:-1] += up * rates.a_plus
    loss[1:] += down * rates.a_minus
    generator = sparse.diags(
        [down * rates.a_minus, -loss, up * rates.a_plus], offsets=[1, 0, -1], format="csr"
    )
    return eta**2 * generator


def evolve_pn(
    p0: PhononDistribution,
    rates: RateResult,
    eta: float,
    t_grid: Sequence[float],
) -> List[PhononDistribution]:
    """
    Integrate the rate equation and return the distribution at each time.

    Args:
        p0: Initial distribution (its length fixes the truncation)
        rates: Heating and cooling rates
        eta: Lamb-Dicke parameter
        t_grid: Nondecreasing output times, starting at or after 0

    Raises:
        TruncationLeak: If the top level exceeds the leak bound of ``p0``
    """
    if not (np.isfinite(rates.a_plus) and np.isfinite(rates.a_minus)):
        raise ValueError("rates must be finite")
    times = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
        raise ValueError("t_grid must be nondecreasing and start at t >= 0")

    generator = rate_generator(rates, eta, p0.n_max)
    current = p0.p.copy()
    previous_time = 0.0
    out: List[PhononDistribution] = []
    for t in times:
        step = t - previous_time
        if step > 0:
            current = expm_multiply(generator * step, current)
            current = np.where(np.abs(current) < 1e-15, 0.0, current)
        previous_time = t
        state = PhononDistribution(current.copy(), leak_bound=p0.leak_bound)
        state.check_leak()
        out.append(state)
    logger.debug(f"Evolved rate equation over {len(out)} steps with n_max={p0.n_max}")
    return out


def mean_n_closed_form(
    n0: float, rates: RateResult, eta: float, t, allow_heating: bool = False
):
    """
    ⟨n⟩(t) = ⟨n⟩₀e^{−Wt} + n_st(1 − e^{−Wt}).

    Args:
        n0: Initial mean phonon number
        rates: Heating and cooling rates
        eta: Lamb-Dicke parameter
        t: Time or array of times
        allow_heating: Return the growing solution instead of raising when
            A− ≤ A+

    Raises:
        HeatingRegime: If A− ≤ A+ and ``allow_heating`` is False; the
            growing solution is attached as ``mean_n``
    """
    t = np.asarray(t, dtype=float)
    w = eta**2 * (rates.a_minus - rates.a_plus)
    source = eta**2 * rates.a_plus
    if w == 0.0:
        value = n0 + source * t
    else:
        decay = np.exp(-w * t)
        value = n0 * decay + source / w * (1.0 - decay)
    if value.ndim == 0:
        value = float(value)
    if w <= 0.0 and not allow_heating:
        raise HeatingRegime(
            f"A- = {rates.a_minus:.4g} <= A+ = {rates.a_plus:.4g}: phonon number grows",
            mean_n=value,
        )
    return value


def trajectory_from_rates(
    n0: float, rates: RateResult, eta: float, times: Sequence[float]
) -> CoolingTrajectory:
    """Closed-form cooling curve on a time grid"""
    grid = np.asarray(times, dtype=float)
    mean_n = np.atleast_1d(mean_n_closed_form(n0, rates, eta, grid))
    return CoolingTrajectory(times=grid, mean_n=mean_n, w=rates.w, n_st=rates.n_st)


def trajectory_from_distributions(
    times: Sequence[float], states: Sequence[PhononDistribution], rates: RateResult
) -> CoolingTrajectory:
    """Tabulate ⟨n⟩, p_0 and purity of an evolved distribution"""
    return CoolingTrajectory(
        times=np.asarray(times, dtype=float),
        mean_n=np.array([s.mean for s in states]),
        w=rates.w,
        n_st=rates.n_st,
        ground_population=np.array([s.ground_population for s in states]),
        purity=np.array([s.purity for s in states]),
    )
