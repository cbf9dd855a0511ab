"""
Monte Carlo wavefunction simulation of atom, cavity and motion

Unravels the full master equation on atom ⊗ cavity ⊗ motion into pure-state
trajectories. Between jumps the state evolves under the non-Hermitian
H_eff = H − i(κa†a + γσ†σ)/2; a jump happens when the squared norm falls
below a uniformly drawn threshold. Cavity jumps apply a. Spontaneous jumps
apply exp(−iη u x̂)σ with u = cosθ0 drawn from the emission pattern, where
x̂ = b + b† is the trap position in units of the ground-state width.

The mode functions exp(iηL x̂) and cos(ηc x̂ + φ) are built exactly from the
spectral decomposition of x̂, with no Lamb-Dicke expansion.
"""

import logging
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.sparse.linalg import expm_multiply

from cavcool.dynamics import CoolingTrajectory, thermal_distribution
from cavcool.emission import EmissionPattern
from cavcool.errors import GridMismatch, StepTooLarge, TruncationLeak
from cavcool.liouvillian import InternalSpace, dissipator, spost, spre, unvec, vec
from cavcool.models import DriveKind, SystemParams

logger = logging.getLogger(__name__)

MAX_JUMP_PROBABILITY = 0.1
DEFAULT_LEAK_BOUND = 1e-4
_BISECTIONS = 30


class JumpChannel(IntEnum):
    """Decay channel of a quantum jump"""

    CAVITY = 0
    SPONTANEOUS = 1


@dataclass(frozen=True)
class Jump:
    time: float
    channel: JumpChannel
    cos_theta: float = float("nan")


@dataclass
class Trajectory:
    """One stochastic unraveling sampled on a time grid"""

    index: int
    seed: int
    times: np.ndarray
    jumps: List[Jump]
    phonons: np.ndarray
    excitation: np.ndarray
    photons: np.ndarray
    final_state: Optional[np.ndarray] = None

    @property
    def n_jumps(self) -> int:
        return len(self.jumps)


class FullSpace:
    """
    Atom ⊗ cavity ⊗ motion, truncated at n_cavity photons and n_motion
    phonons. Operators on the internal part come from InternalSpace and are
    extended by a Kronecker product with motional operators.
    """

    def __init__(self, n_cavity: int, n_motion: int, eta: float, theta_l: float, theta_c: float):
        if n_motion < 2:
            raise ValueError(f"n_motion must be at least 2, got {n_motion}")
        self.internal = InternalSpace(n_cavity)
        self.n_cavity = n_cavity
        self.n_motion = n_motion
        self.eta = eta
        self.eta_l = eta * np.cos(theta_l)
        self.eta_c = eta * np.cos(theta_c)

        self.b = np.diag(np.sqrt(np.arange(1, n_motion)), k=1).astype(complex)
        self.x = self.b + self.b.conj().T
        self._x_values, self._x_vectors = np.linalg.eigh(self.x)

    @classmethod
    def for_params(cls, p: SystemParams, n_cavity: int, n_motion: int) -> "FullSpace":
        return cls(n_cavity, n_motion, p.eta, p.theta_l, p.theta_c)

    @property
    def dim(self) -> int:
        return self.internal.dim * self.n_motion

    @property
    def shape(self) -> tuple:
        return (2, self.n_cavity, self.n_motion)

    def motion_function(self, values: np.ndarray) -> np.ndarray:
        """f(x̂) from f evaluated at the eigenvalues of x̂"""
        return (self._x_vectors * values) @ self._x_vectors.conj().T

    def laser_phase(self) -> np.ndarray:
        """exp(iηL x̂)"""
        return self.motion_function(np.exp(1j * self.eta_l * self._x_values))

    def cavity_mode(self, phi: float) -> np.ndarray:
        """cos(ηc x̂ + φ)"""
        return self.motion_function(np.cos(self.eta_c * self._x_values + phi))

    def laser_standing_mode(self, phi_l: float) -> np.ndarray:
        """cos(ηL x̂ + φL)"""
        return self.motion_function(np.cos(self.eta_l * self._x_values + phi_l))

    def recoil(self, cos_theta: float) -> np.ndarray:
        """exp(−iη cosθ0 x̂)"""
        return self.motion_function(np.exp(-1j * self.eta * cos_theta * self._x_values))

    def embed(self, internal: np.ndarray, motion: Optional[np.ndarray] = None) -> np.ndarray:
        motion = np.eye(self.n_motion) if motion is None else motion
        return np.kron(internal, motion)

    @cached_property
    def a(self) -> np.ndarray:
        return self.embed(self.internal.a)

    @cached_property
    def sigma(self) -> np.ndarray:
        return self.embed(self.internal.sigma)

    @cached_property
    def phonon_number(self) -> np.ndarray:
        return self.embed(np.eye(self.internal.dim), self.b.conj().T @ self.b)

    def basis_state(self, excited: bool, photons: int, phonons: int) -> np.ndarray:
        psi = np.zeros(self.shape, dtype=complex)
        psi[int(excited), photons, phonons] = 1.0
        return psi.reshape(-1)


def build_hamiltonian(p: SystemParams, s: FullSpace) -> np.ndarray:
    """
    Full Hamiltonian in the laser frame.

    H = νb†b − Δσ†σ − δc a†a + g(a†σ + aσ†)cos(ηc x̂ + φ) + H_L with
    H_L = Ω(σ†e^{iηL x̂} + h.c.) for a traveling wave and
    H_L = Ω cos(ηL x̂ + φL)(σ† + σ) for a standing wave.
    """
    internal = s.internal
    a, sigma = internal.a, internal.sigma
    a_dag, sigma_dag = a.conj().T, sigma.conj().T
    hamiltonian = (
        p.nu * s.phonon_number
        + s.embed(-p.delta * sigma_dag @ sigma - p.delta_c * a_dag @ a)
        + p.g * s.embed(a_dag @ sigma + a @ sigma_dag, s.cavity_mode(p.phi))
    )
    if p.drive == DriveKind.STANDING_WAVE:
        hamiltonian = hamiltonian + p.omega * s.embed(
            sigma_dag + sigma, s.laser_standing_mode(p.phi_l)
        )
    else:
        phase = s.laser_phase()
        hamiltonian = hamiltonian + p.omega * (
            s.embed(sigma_dag, phase) + s.embed(sigma, phase.conj().T)
        )
    return hamiltonian


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, trajectory index)"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


class TrajectoryContext:
    """Operators and the step propagator shared by every trajectory of a run"""

    def __init__(
        self,
        p: SystemParams,
        s: FullSpace,
        e: EmissionPattern,
        t_grid: Sequence[float],
        dt: Optional[float] = None,
        leak_bound: float = DEFAULT_LEAK_BOUND,
    ):
        self.params = p
        self.space = s
        self.emission = e
        self.leak_bound = leak_bound
        self.times = np.asarray(t_grid, dtype=float)
        if self.times.size < 2:
            raise ValueError("t_grid needs at least two points")
        spacing = np.diff(self.times)
        if np.any(spacing <= 0) or not np.allclose(spacing, spacing[0], rtol=1e-9, atol=0.0):
            raise ValueError("t_grid must be uniform and increasing")
        self.spacing = float(spacing[0])

        self.h_eff = build_hamiltonian(p, s) - 0.5j * (
            p.kappa * s.a.conj().T @ s.a + p.gamma * s.sigma.conj().T @ s.sigma
        )
        self.substeps, self.dt, self.propagator = self._choose_step(dt)
        cdf, abscissae = e.sampling_table()
        self._cdf, self._abscissae = cdf, abscissae

    def _max_jump_probability(self, propagator: np.ndarray) -> float:
        return float(1.0 - scipy.linalg.svdvals(propagator).min() ** 2)

    def _choose_step(self, dt: Optional[float]):
        if dt is not None:
            substeps = max(1, int(round(self.spacing / dt)))
            step = self.spacing / substeps
            propagator = scipy.linalg.expm(-1j * self.h_eff * step)
            probability = self._max_jump_probability(propagator)
            if probability > MAX_JUMP_PROBABILITY:
                raise StepTooLarge(
                    f"dt = {step:.3g} allows a jump probability of {probability:.3f} per step "
                    f"(bound {MAX_JUMP_PROBABILITY})"
                )
            return substeps, step, propagator

        substeps = 1
        while True:
            step = self.spacing / substeps
            propagator = scipy.linalg.expm(-1j * self.h_eff * step)
            if self._max_jump_probability(propagator) <= MAX_JUMP_PROBABILITY:
                logger.debug(f"MCWF step dt={step:.4g} ({substeps} per output interval)")
                return substeps, step, propagator
            substeps *= 2

    def evolve(self, psi: np.ndarray, tau: float) -> np.ndarray:
        return scipy.linalg.expm(-1j * self.h_eff * tau) @ psi

    def sample_cos_theta(self, rng: np.random.Generator) -> float:
        return float(np.interp(rng.random(), self._cdf, self._abscissae))


def _norm2(psi: np.ndarray) -> float:
    return float(np.vdot(psi, psi).real)


def _observables(psi: np.ndarray, s: FullSpace) -> tuple:
    populations = np.abs(psi.reshape(s.shape)) ** 2
    populations = populations / populations.sum()
    phonons = float(np.dot(populations.sum(axis=(0, 1)), np.arange(s.n_motion)))
    excitation = float(populations[1].sum())
    photons = float(np.dot(populations.sum(axis=(0, 2)), np.arange(s.n_cavity)))
    top = float(populations[:, :, -1].sum())
    return phonons, excitation, photons, top


def _apply_jump(
    psi: np.ndarray, t: float, ctx: TrajectoryContext, rng: np.random.Generator
) -> tuple:
    s, p = ctx.space, ctx.params
    via_cavity = s.a @ psi
    via_atom = s.sigma @ psi
    weight_cavity = p.kappa * _norm2(via_cavity)
    weight_atom = p.gamma * _norm2(via_atom)
    if rng.random() * (weight_cavity + weight_atom) < weight_cavity:
        jumped, record = via_cavity, Jump(t, JumpChannel.CAVITY)
    else:
        cos_theta = ctx.sample_cos_theta(rng)
        block = via_atom.reshape(s.internal.dim, s.n_motion)
        jumped = (block @ s.recoil(cos_theta).T).reshape(-1)
        record = Jump(t, JumpChannel.SPONTANEOUS, cos_theta)
    return jumped / np.sqrt(_norm2(jumped)), record


def _advance(
    psi: np.ndarray,
    t: float,
    threshold: float,
    ctx: TrajectoryContext,
    rng: np.random.Generator,
    jumps: List[Jump],
) -> tuple:
    """One fixed step, bisecting to the threshold crossing when a jump occurs"""
    remaining = ctx.dt
    while True:
        if remaining == ctx.dt:
            candidate = ctx.propagator @ psi
        else:
            candidate = ctx.evolve(psi, remaining)
        if _norm2(candidate) > threshold:
            return candidate, t + remaining, threshold

        low, high = 0.0, remaining
        for _ in range(_BISECTIONS):
            middle = 0.5 * (low + high)
            if _norm2(ctx.evolve(psi, middle)) > threshold:
                low = middle
            else:
                high = middle
        psi = ctx.evolve(psi, high)
        t += high
        remaining -= high
        psi, record = _apply_jump(psi, t, ctx, rng)
        jumps.append(record)
        threshold = rng.random()
        if remaining <= 0.0:
            return psi, t, threshold


def run_trajectory(
    p: SystemParams,
    s: FullSpace,
    e: EmissionPattern,
    psi0: np.ndarray,
    t_grid: Sequence[float],
    seed: int,
    index: int = 0,
    dt: Optional[float] = None,
    context: Optional[TrajectoryContext] = None,
    keep_state: bool = False,
) -> Trajectory:
    """
    Run one quantum-jump trajectory.

    Args:
        p: System parameters
        s: Full space
        e: Emission pattern for recoil sampling
        psi0: Normalized initial state
        t_grid: Uniform output grid
        seed: Ensemble seed
        index: Trajectory index (with ``seed`` it keys the random stream)
        dt: Integration step (chosen automatically when omitted)
        context: Precomputed propagators, shared across an ensemble
        keep_state: Store the normalized final state

    Raises:
        StepTooLarge: If ``dt`` allows a jump probability above 0.1 per step
        TruncationLeak: If the top phonon level exceeds the leak bound
    """
    ctx = context or TrajectoryContext(p, s, e, t_grid, dt)
    psi = np.asarray(psi0, dtype=complex).reshape(-1).copy()
    if abs(_norm2(psi) - 1.0) > 1e-10:
        raise ValueError("psi0 must be normalized")

    rng = trajectory_rng(seed, index)
    n_times = ctx.times.size
    phonons = np.empty(n_times)
    excitation = np.empty(n_times)
    photons = np.empty(n_times)
    jumps: List[Jump] = []

    def record(k: int) -> None:
        phonons[k], excitation[k], photons[k], top = _observables(psi, s)
        if top > ctx.leak_bound:
            raise TruncationLeak(
                f"trajectory {index}: top phonon level holds {top:.2e} at t = {ctx.times[k]:g}"
            )

    t = float(ctx.times[0])
    threshold = rng.random()
    record(0)
    for k in range(1, n_times):
        for _ in range(ctx.substeps):
            psi, t, threshold = _advance(psi, t, threshold, ctx, rng, jumps)
        record(k)

    final = psi / np.sqrt(_norm2(psi)) if keep_state else None
    return Trajectory(
        index=index,
        seed=seed,
        times=ctx.times.copy(),
        jumps=jumps,
        phonons=phonons,
        excitation=excitation,
        photons=photons,
        final_state=final,
    )


def _exponential(t, w, n_inf, n0):
    return n_inf + (n0 - n_inf) * np.exp(-w * t)


def fit_cooling_rate(times: np.ndarray, mean_n: np.ndarray) -> tuple:
    """Least-squares fit of n_inf + (n0 − n_inf)e^{−Wt} with n0 = mean_n[0]"""
    if np.ptp(mean_n) < 1e-12:
        return None, float(mean_n[-1])
    n0 = float(mean_n[0])
    span = float(times[-1] - times[0]) or 1.0
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            (w, n_inf), _ = curve_fit(
                lambda t, w, n_inf: _exponential(t - times[0], w, n_inf, n0),
                times,
                mean_n,
                p0=(1.0 / span, float(mean_n[-1])),
                maxfev=10000,
            )
    except (RuntimeError, ValueError) as e:
        logger.warning(f"Exponential fit failed: {e}")
        return None, float(mean_n[-1])
    return float(w), float(n_inf)


def ensemble_mean(trajectories: Sequence[Trajectory]) -> CoolingTrajectory:
    """
    Pointwise mean and standard error of ⟨b†b⟩ with a fitted cooling rate.

    Raises:
        GridMismatch: If the trajectories do not share a time grid
    """
    if len(trajectories) < 2:
        raise ValueError("ensemble_mean needs at least two trajectories")
    times = trajectories[0].times
    for trajectory in trajectories[1:]:
        if trajectory.times.shape != times.shape or not np.array_equal(trajectory.times, times):
            raise GridMismatch(f"trajectory {trajectory.index} uses a different time grid")

    phonons = np.vstack([tr.phonons for tr in trajectories])
    count = phonons.shape[0]
    mean = phonons.mean(axis=0)
    std_error = phonons.std(axis=0, ddof=1) / np.sqrt(count)
    w, n_inf = fit_cooling_rate(times, mean)
    return CoolingTrajectory(
        times=times.copy(),
        mean_n=mean,
        w=w,
        n_st=n_inf,
        std_error=std_error,
        extra={
            "n_trajectories": count,
            "excitation": np.mean([tr.excitation for tr in trajectories], axis=0),
            "photons": np.mean([tr.photons for tr in trajectories], axis=0),
            "total_jumps": int(sum(tr.n_jumps for tr in trajectories)),
        },
    )


@dataclass
class EnsembleSpec:
    """Everything a worker needs to run trajectories of one ensemble"""

    params: dict
    emission: dict
    n_cavity: int
    n_motion: int
    t_grid: List[float]
    seed: int
    initial_n: float = 2
    initial: str = "fock"
    dt: Optional[float] = None
    keep_state: bool = False
    leak_bound: float = DEFAULT_LEAK_BOUND


_WORKER_CONTEXT: Optional[TrajectoryContext] = None
_WORKER_SPEC: Optional[EnsembleSpec] = None


def _initial_state(spec: EnsembleSpec, space: FullSpace, index: int) -> np.ndarray:
    if spec.initial == "thermal":
        occupation = thermal_distribution(spec.initial_n, space.n_motion - 1).p
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([spec.seed, index, 1])))
        phonons = int(rng.choice(space.n_motion, p=occupation))
    else:
        phonons = int(round(spec.initial_n))
    return space.basis_state(False, 0, phonons)


def _worker_init(spec: EnsembleSpec) -> None:
    global _WORKER_CONTEXT, _WORKER_SPEC
    p = SystemParams.model_validate(spec.params)
    space = FullSpace.for_params(p, spec.n_cavity, spec.n_motion)
    emission = EmissionPattern.model_validate(spec.emission)
    _WORKER_CONTEXT = TrajectoryContext(p, space, emission, spec.t_grid, spec.dt, spec.leak_bound)
    _WORKER_SPEC = spec


def _run_indexed(index: int) -> Trajectory:
    ctx, spec = _WORKER_CONTEXT, _WORKER_SPEC
    psi0 = _initial_state(spec, ctx.space, index)
    return run_trajectory(
        ctx.params,
        ctx.space,
        ctx.emission,
        psi0,
        ctx.times,
        spec.seed,
        index=index,
        context=ctx,
        keep_state=spec.keep_state,
    )


def default_workers() -> int:
    """Worker count from CAVCOOL_WORKERS, else the CPU count"""
    value = os.environ.get("CAVCOOL_WORKERS")
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


def run_ensemble(
    spec: EnsembleSpec, n_trajectories: int, workers: Optional[int] = None
) -> List[Trajectory]:
    """
    Run trajectories 0 … n_trajectories−1 and return them in index order.

    Each trajectory draws from its own (seed, index) stream, so the result
    does not depend on the number of workers or completion order.
    """
    workers = workers or default_workers()
    indices = range(n_trajectories)
    report_every = max(1, n_trajectories // 10)
    results: List[Trajectory] = []
    logger.info(f"Running {n_trajectories} trajectories on {workers} worker(s)")

    if workers == 1:
        _worker_init(spec)
        iterator = map(_run_indexed, indices)
        executor = None
    else:
        executor = ProcessPoolExecutor(
            max_workers=workers, initializer=_worker_init, initargs=(spec,)
        )
        iterator = executor.map(_run_indexed, indices, chunksize=max(1, n_trajectories // (4 * workers)))
    try:
        for count, trajectory in enumerate(iterator, start=1):
            results.append(trajectory)
            if count % report_every == 0 or count == n_trajectories:
                logger.info(f"Trajectories: {count}/{n_trajectories} ({100 * count // n_trajectories}%)")
    finally:
        if executor is not None:
            executor.shutdown()
    return results


def master_equation_density(
    p: SystemParams,
    s: FullSpace,
    e: EmissionPattern,
    rho0: np.ndarray,
    t: float,
    n_quadrature: int = 32,
) -> np.ndarray:
    """
    Integrate the full master equation directly (small spaces only).

    Spontaneous emission is the recoil-averaged jump
    γ Σ_k w_k R(u_k)σ ρ σ†R(u_k)† with Gauss-Legendre nodes u_k weighted
    by the emission pattern.
    """
    hamiltonian = build_hamiltonian(p, s)
    sigma = s.sigma
    number = sigma.conj().T @ sigma
    nodes, weights = e.quadrature(n_quadrature)
    recoil_jumps = np.zeros((s.dim**2, s.dim**2), dtype=complex)
    for u, weight in zip(nodes, weights):
        jump = s.embed(np.eye(s.internal.dim), s.recoil(u)) @ sigma
        recoil_jumps += weight * spre(jump) @ spost(jump.conj().T)

    liouvillian = (
        -1j * (spre(hamiltonian) - spost(hamiltonian))
        + p.kappa * dissipator(s.a)
        + p.gamma * (recoil_jumps - 0.5 * (spre(number) + spost(number)))
    )
    evolved = expm_multiply(liouvillian * t, vec(np.asarray(rho0, dtype=complex)))
    return unvec(evolved, s.dim)


def ensemble_density(trajectories: Sequence[Trajectory]) -> np.ndarray:
    """Average of |ψ⟩⟨ψ| over stored final states"""
    states = [tr.final_state for tr in trajectories]
    if any(state is None for state in states):
        raise ValueError("trajectories were run without keep_state")
    stacked = np.vstack(states)
    return stacked.T @ stacked.conj() / len(states)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """½ Σ |eigenvalues of ρ − σ|"""
    difference = rho - sigma
    difference = 0.5 * (difference + difference.conj().T)
    return float(0.5 * np.abs(np.linalg.eigvalsh(difference)).sum())
