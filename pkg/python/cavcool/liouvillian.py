"""
Internal-state Liouvillian and force-fluctuation spectrum

Builds the zeroth-order (η = 0) Liouvillian of the driven atom coupled to
the cavity mode, finds its steady state and evaluates the spectrum of the
first-order mechanical coupling V₁,

    S(ν) = −Tr{V₁ (L + iν)⁻¹ V₁ ρ_St},

by linear solves. The heating and cooling rates are A± = 2Re[S(∓ν) + D]
with D = αγ/2·⟨σ†σ⟩. This works at any drive strength.

Operators are vectorized by column stacking: vec(AXB) = (Bᵀ ⊗ A) vec(X).
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, gmres, spilu, splu
from scipy.sparse.linalg import norm as sparse_norm

from cavcool.emission import EmissionPattern
from cavcool.errors import DegenerateKernel, SingularResolvent
from cavcool.geometry import derive_geometry
from cavcool.models import DriveKind, Geometry, RateResult, SystemParams

logger = logging.getLogger(__name__)

# Largest superoperator handled by dense LU; larger ones use sparse solvers.
DENSE_LIMIT = 4096
# Largest superoperator whose kernel is checked by a full SVD.
KERNEL_CHECK_LIMIT = 1024
ITERATIVE_RTOL = 1e-10


@dataclass(frozen=True)
class InternalSpace:
    """Atom ⊗ cavity Hilbert space, cavity truncated at n_cavity photons.

    Basis index = atom * n_cavity + photons with atom 0 = |g⟩, 1 = |e⟩.
    """

    n_cavity: int

    def __post_init__(self):
        if self.n_cavity < 2:
            raise ValueError(f"n_cavity must be at least 2, got {self.n_cavity}")

    @property
    def dim(self) -> int:
        return 2 * self.n_cavity

    @cached_property
    def a(self) -> np.ndarray:
        photons = np.diag(np.sqrt(np.arange(1, self.n_cavity)), k=1)
        return np.kron(np.eye(2), photons).astype(complex)

    @cached_property
    def sigma(self) -> np.ndarray:
        lowering = np.array([[0.0, 1.0], [0.0, 0.0]])
        return np.kron(lowering, np.eye(self.n_cavity)).astype(complex)

    def ground_projector(self) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def top_level_population(self, rho: np.ndarray) -> float:
        """Population of the highest photon number kept"""
        top = [self.n_cavity - 1, 2 * self.n_cavity - 1]
        return float(np.real(rho[top, top]).sum())


@dataclass
class Superoperator:
    """Matrix acting on column-stacked operators"""

    matrix: Union[np.ndarray, sparse.csr_matrix]
    space: InternalSpace

    @property
    def is_dense(self) -> bool:
        return isinstance(self.matrix, np.ndarray)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), rho.shape[0])


def vec(operator: np.ndarray) -> np.ndarray:
    return np.asarray(operator).reshape(-1, order="F")


def unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vector).reshape(dim, dim, order="F")


def spre(operator: np.ndarray) -> np.ndarray:
    """Left multiplication X ↦ A X"""
    return np.kron(np.eye(operator.shape[0]), operator)


def spost(operator: np.ndarray) -> np.ndarray:
    """Right multiplication X ↦ X B"""
    return np.kron(operator.T, np.eye(operator.shape[0]))


def dissipator(jump: np.ndarray) -> np.ndarray:
    """D[L]X = L X L† − ½{L†L, X}"""
    jump_dag = jump.conj().T
    number = jump_dag @ jump
    return spre(jump) @ spost(jump_dag) - 0.5 * (spre(number) + spost(number))


def internal_hamiltonian(
    p: SystemParams,
    s: InternalSpace,
    geometry: Optional[Geometry] = None,
    include_drive: bool = True,
) -> np.ndarray:
    """H = −Δσ†σ − δc a†a + g̃(a†σ + aσ†) + Ω(σ† + σ) in the laser frame"""
    geometry = geometry or derive_geometry(p)
    a, sigma = s.a, s.sigma
    a_dag, sigma_dag = a.conj().T, sigma.conj().T
    hamiltonian = (
        -p.delta * sigma_dag @ sigma
        - p.delta_c * a_dag @ a
        + geometry.g_tilde * (a_dag @ sigma + a @ sigma_dag)
    )
    if include_drive:
        hamiltonian = hamiltonian + p.omega * (sigma_dag + sigma)
    return hamiltonian


def build_l0i(
    p: SystemParams,
    s: InternalSpace,
    drop_drive: bool = False,
    geometry: Optional[Geometry] = None,
) -> Superoperator:
    """
    Zeroth-order Liouvillian −i[H, ·] + κD[a] + γD[σ].

    Args:
        p: System parameters
        s: Truncated internal space
        drop_drive: Leave out the laser term (standing wave with the atom
            at a laser node)
        geometry: Precomputed geometry
    """
    hamiltonian = internal_hamiltonian(p, s, geometry, include_drive=not drop_drive)
    matrix = (
        -1j * (spre(hamiltonian) - spost(hamiltonian))
        + p.kappa * dissipator(s.a)
        + p.gamma * dissipator(s.sigma)
    )
    if matrix.shape[0] > DENSE_LIMIT:
        return Superoperator(matrix=sparse.csr_matrix(matrix), space=s)
    return Superoperator(matrix=matrix, space=s)


def _check_kernel(matrix: np.ndarray) -> None:
    singular = scipy.linalg.svdvals(matrix)
    if singular[-2] < 1e-10 * singular[0]:
        raise DegenerateKernel(
            f"second-smallest singular value {singular[-2]:.3e} is below "
            f"1e-10 * ||L|| = {1e-10 * singular[0]:.3e}"
        )


def steady_state(
    L: Superoperator, max_iterations: int = 50, tolerance: float = 1e-12
) -> np.ndarray:
    """
    Unique null vector of L as a density operator.

    Found by inverse iteration with a small shift, seeded with |g,0⟩⟨g,0|.
    The result is Hermitian with unit trace.

    Raises:
        DegenerateKernel: If the kernel of L is more than one-dimensional
    """
    s = L.space
    size = L.matrix.shape[0]
    if L.is_dense:
        if size <= KERNEL_CHECK_LIMIT:
            _check_kernel(L.matrix)
        scale = np.linalg.norm(L.matrix, 1)
        shifted = scipy.linalg.lu_factor(L.matrix - 1e-9 * scale * np.eye(size))

        def solve(rhs):
            return scipy.linalg.lu_solve(shifted, rhs)

    else:
        scale = sparse_norm(L.matrix, 1)
        factor = splu((L.matrix - 1e-9 * scale * sparse.identity(size)).tocsc())
        solve = factor.solve

    current = vec(s.ground_projector())
    for iteration in range(max_iterations):
        update = solve(current)
        update = update / np.trace(unvec(update, s.dim))
        change = np.linalg.norm(update - current)
        current = update
        if change < tolerance:
            break
    else:
        logger.warning(f"Steady-state inverse iteration stopped after {max_iterations} steps")

    rho = unvec(current, s.dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    smallest = np.linalg.eigvalsh(rho).min()
    if smallest < -1e-10:
        logger.warning(f"Steady state has a negative eigenvalue {smallest:.3e}")
    return rho


class _Resolvent:
    """Solves (L + iν)X = B for several right-hand sides"""

    def __init__(self, L: Superoperator, nu: float):
        size = L.matrix.shape[0]
        self.dim = L.space.dim
        if L.is_dense:
            shifted = L.matrix + 1j * nu * np.eye(size)
            self._lu = scipy.linalg.lu_factor(shifted, check_finite=False)
            pivots = np.abs(np.diag(self._lu[0]))
            if pivots.min() <= 1e-13 * pivots.max():
                raise SingularResolvent(f"L + i*{nu:g} is numerically singular")
            self._operator = None
        else:
            self._lu = None
            self._operator = (L.matrix + 1j * nu * sparse.identity(size)).tocsc()
            ilu = spilu(self._operator)
            self._preconditioner = LinearOperator(self._operator.shape, ilu.solve)

    def solve(self, rhs_operator: np.ndarray) -> np.ndarray:
        rhs = vec(rhs_operator)
        if self._lu is not None:
            solution = scipy.linalg.lu_solve(self._lu, rhs)
        else:
            solution, info = gmres(
                self._operator, rhs, rtol=ITERATIVE_RTOL, atol=0.0, M=self._preconditioner
            )
            if info != 0:
                raise SingularResolvent(f"iterative resolvent solve did not converge (info={info})")
        return unvec(solution, self.dim)


def force_operators(
    p: SystemParams,
    s: InternalSpace,
    variant: DriveKind = DriveKind.TRAVELING_WAVE,
    geometry: Optional[Geometry] = None,
) -> tuple:
    """Laser and cavity force operators (V_L, V_c).

    Traveling wave: V_L = iΩ(σ† − σ). Standing wave at a laser node:
    V_L = −Ω(σ† + σ). In both cases V_c = −g̃(aσ† + a†σ).
    """
    geometry = geometry or derive_geometry(p)
    sigma, a = s.sigma, s.a
    sigma_dag, a_dag = sigma.conj().T, a.conj().T
    if variant == DriveKind.STANDING_WAVE:
        laser = -p.omega * (sigma_dag + sigma)
    else:
        laser = 1j * p.omega * (sigma_dag - sigma)
    cavity = -geometry.g_tilde * (a @ sigma_dag + a_dag @ sigma)
    return laser, cavity


def first_order_coupling(
    p: SystemParams,
    s: InternalSpace,
    variant: DriveKind = DriveKind.TRAVELING_WAVE,
    geometry: Optional[Geometry] = None,
) -> np.ndarray:
    """V₁ = φL V_L + φc V_c (standing wave: V₁ = V_L with φL = 1)"""
    geometry = geometry or derive_geometry(p)
    laser, cavity = force_operators(p, s, variant, geometry)
    if variant == DriveKind.STANDING_WAVE:
        return laser
    return geometry.phi_l_coef * laser + geometry.phi_c_coef * cavity


def _liouvillian_for(p, s, variant, geometry) -> Superoperator:
    return build_l0i(p, s, drop_drive=variant == DriveKind.STANDING_WAVE, geometry=geometry)


def spectrum_s(
    nu: float,
    p: SystemParams,
    s: InternalSpace,
    variant: DriveKind = DriveKind.TRAVELING_WAVE,
    rho: Optional[np.ndarray] = None,
) -> complex:
    """
    Force-fluctuation spectrum S(ν) = −Tr{V₁ (L + iν)⁻¹ V₁ ρ_St}.

    Raises:
        SingularResolvent: If L + iν is numerically singular
    """
    geometry = derive_geometry(p)
    L = _liouvillian_for(p, s, variant, geometry)
    rho = steady_state(L) if rho is None else rho
    coupling = first_order_coupling(p, s, variant, geometry)
    solution = _Resolvent(L, nu).solve(coupling @ rho)
    return complex(-np.trace(coupling @ solution))


@dataclass(frozen=True)
class SpectrumComponents:
    """Laser, cavity and cross contributions to S(ν)"""

    s_l: complex
    s_c: complex
    s_cl: complex

    def total(self, phi_l: float, phi_c: float) -> complex:
        return phi_l**2 * self.s_l + phi_c**2 * self.s_c + phi_l * phi_c * self.s_cl


def spectrum_components(
    nu: float, p: SystemParams, s: InternalSpace, rho: Optional[np.ndarray] = None
) -> SpectrumComponents:
    """
    Split S(ν) of the traveling-wave drive into S_L, S_c and S_cL.

    S = φL² S_L + φc² S_c + φL φc S_cL.
    """
    geometry = derive_geometry(p)
    L = build_l0i(p, s, geometry=geometry)
    rho = steady_state(L) if rho is None else rho
    laser, cavity = force_operators(p, s, DriveKind.TRAVELING_WAVE, geometry)
    resolvent = _Resolvent(L, nu)
    from_laser = resolvent.solve(laser @ rho)
    from_cavity = resolvent.solve(cavity @ rho)
    return SpectrumComponents(
        s_l=complex(-np.trace(laser @ from_laser)),
        s_c=complex(-np.trace(cavity @ from_cavity)),
        s_cl=complex(-np.trace(cavity @ from_laser) - np.trace(laser @ from_cavity)),
    )


def excited_population(rho: np.ndarray, s: InternalSpace) -> float:
    return float(np.real(np.trace(s.sigma.conj().T @ s.sigma @ rho)))


def diffusion_d(
    p: SystemParams,
    s: InternalSpace,
    e: EmissionPattern,
    rho: Optional[np.ndarray] = None,
    variant: DriveKind = DriveKind.TRAVELING_WAVE,
) -> float:
    """D = αγ/2·Tr{σ†σ ρ_St}"""
    if rho is None:
        rho = steady_state(_liouvillian_for(p, s, variant, None))
    return e.alpha * p.gamma / 2.0 * excited_population(rho, s)


def numerical_rates(
    p: SystemParams,
    s: InternalSpace,
    e: EmissionPattern,
    variant: DriveKind = DriveKind.TRAVELING_WAVE,
) -> RateResult:
    """
    A± = 2Re[S(∓ν) + D] from resolvent solves at the given drive strength.

    The standing-wave variant has D = 0.
    """
    geometry = derive_geometry(p)
    L = _liouvillian_for(p, s, variant, geometry)
    rho = steady_state(L)
    coupling = first_order_coupling(p, s, variant, geometry)
    driven = coupling @ rho

    def rate(x: float) -> float:
        solution = _Resolvent(L, x).solve(driven)
        value = complex(-np.trace(coupling @ solution))
        return 2.0 * value.real

    d = 0.0 if variant == DriveKind.STANDING_WAVE else diffusion_d(p, s, e, rho)
    top = s.top_level_population(rho)
    if top > 1e-8:
        logger.warning(f"Top cavity level holds {top:.2e} of the steady state (n_cavity={s.n_cavity})")
    return RateResult(a_plus=rate(-p.nu) + 2.0 * d, a_minus=rate(p.nu) + 2.0 * d, d=d, eta=p.eta)


def auto_truncation(
    p: SystemParams,
    start: int = 4,
    tolerance: float = 1e-6,
    top_bound: float = 1e-8,
    max_cavity: int = 30,
    variant: DriveKind = DriveKind.TRAVELING_WAVE,
) -> InternalSpace:
    """
    Smallest cavity truncation (growing by 2) whose steady state leaves the
    top level below ``top_bound`` and whose S(ν) is converged to
    ``tolerance`` relative.
    """
    n_cavity = max(start, 2)
    previous = None
    while n_cavity <= max_cavity:
        s = InternalSpace(n_cavity)
        rho = steady_state(_liouvillian_for(p, s, variant, None))
        value = spectrum_s(p.nu, p, s, variant, rho)
        top = s.top_level_population(rho)
        if previous is not None and top < top_bound:
            if abs(value - previous) <= tolerance * max(abs(value), 1e-300):
                logger.debug(f"Cavity truncation converged at n_cavity={n_cavity}")
                return InternalSpace(n_cavity - 2)
        previous = value
        n_cavity += 2
    logger.warning(f"Cavity truncation not converged up to n_cavity={max_cavity}")
    return InternalSpace(max_cavity)


def steady_state_diagnostics(
    p: SystemParams, s: InternalSpace, e: EmissionPattern
) -> dict:
    """Populations, S(±ν) and D for JSON dumps"""
    L = build_l0i(p, s)
    rho = steady_state(L)
    return {
        "n_cavity": s.n_cavity,
        "excited_population": excited_population(rho, s),
        "mean_photons": float(np.real(np.trace(s.a.conj().T @ s.a @ rho))),
        "top_level_population": s.top_level_population(rho),
        "purity": float(np.real(np.trace(rho @ rho))),
        "s_minus_nu": _complex_record(spectrum_s(-p.nu, p, s, rho=rho)),
        "s_plus_nu": _complex_record(spectrum_s(p.nu, p, s, rho=rho)),
        "d": diffusion_d(p, s, e, rho),
    }


def _complex_record(value: complex) -> dict:
    return {"re": value.real, "im": value.imag}
