"""Finite-section solver for ``u_tt - u_xx + nu(x, t) u_t + alpha(x, t) u = f``.

Unknowns are the cosine-basis coefficients of ``u`` flattened row-major:
mode ``(k, n)`` sits at row ``(k + K) * (N + 1) + n``. This ordering is part
of the exported matrix format and must not change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.signal

from .spectral import (
    Basis,
    BasisError,
    ProblemParams,
    SpectralError,
    SpectralField,
    dt,
    dx,
    sobolev_norm,
)
from .telegraph import SolveReport, _check_gamma, wave_symbol


class SizeError(SpectralError):
    """Galerkin matrix would exceed the configured size guard."""


class NumericalError(SpectralError):
    """Dense linear algebra failed."""


MAX_SIZE = 10_000


def mode_index(k: int, n: int, params: ProblemParams) -> int:
    return (k + params.K) * (params.N + 1) + n


def to_vector(f: SpectralField) -> np.ndarray:
    return f.coeffs.ravel().copy()


def from_vector(vec: np.ndarray, params: ProblemParams, basis: Basis | str = Basis.COSINE) -> SpectralField:
    return SpectralField(params, basis, np.asarray(vec).reshape(params.shape))


def _to_exponential(c: np.ndarray, basis: Basis) -> np.ndarray:
    """Coefficients over ``exp(i j pi x)``, ``j = -N..N``."""
    N = c.shape[1] - 1
    e = np.zeros((c.shape[0], 2 * N + 1), dtype=complex)
    if basis is Basis.COSINE:
        e[:, N] = c[:, 0]
        e[:, N + 1 :] = 0.5 * c[:, 1:]
        e[:, :N] = 0.5 * c[:, :0:-1]
    else:
        e[:, N + 1 :] = c[:, 1:] / 2j
        e[:, :N] = -c[:, :0:-1] / 2j
    return e


def _from_exponential(e: np.ndarray, basis: Basis) -> np.ndarray:
    N = (e.shape[1] - 1) // 2
    c = np.zeros((e.shape[0], N + 1), dtype=complex)
    pos = e[:, N + 1 :]
    neg = e[:, :N][:, ::-1]
    if basis is Basis.COSINE:
        c[:, 0] = e[:, N]
        c[:, 1:] = pos + neg
    else:
        c[:, 1:] = 1j * (pos - neg)
    return c


def product_result_basis(a: Basis, b: Basis) -> Basis:
    return Basis.COSINE if a is b else Basis.SINE


def field_product(a: SpectralField, b: SpectralField) -> tuple[SpectralField, float]:
    """Pointwise product truncated back to ``(K, N)``.

    Returns the truncated product and the ``H^{0,0}`` norm of the discarded
    high modes.
    """
    if a.params != b.params:
        raise SpectralError("fields have different parameters")
    p = a.params
    conv = scipy.signal.convolve2d(_to_exponential(a.coeffs, a.basis), _to_exponential(b.coeffs, b.basis))
    basis = product_result_basis(a.basis, b.basis)
    full = _from_exponential(conv, basis)  # shape (4K+1, 2N+1)
    K2 = 2 * p.K
    kept = full[K2 - p.K : K2 + p.K + 1, : p.N + 1]
    lost = full.copy()
    lost[K2 - p.K : K2 + p.K + 1, : p.N + 1] = 0.0
    xw = np.full(lost.shape[1], 0.5)
    xw[0] = 1.0 if basis is Basis.COSINE else 0.0
    loss = p.period * math.sqrt(float(np.sum(xw[None, :] * np.abs(lost) ** 2)))
    return SpectralField(p, basis, kept), loss


def multiplication_matrix(a: SpectralField) -> np.ndarray:
    """Matrix of ``u -> P(a u)`` on cosine fields, ``P`` the truncation.

    From ``cos(m pi x) cos(p pi x) = (cos((m+p) pi x) + cos((m-p) pi x)) / 2``,
    the coefficient of mode ``n`` picks up ``a[n-p]`` (for ``p <= n``),
    ``a[n+p]`` and ``a[p-n]`` (for ``p >= n > 0``), each halved.
    """
    if a.basis is not Basis.COSINE:
        raise BasisError("coefficient fields must be in the cosine basis")
    p = a.params
    K, N = p.K, p.N
    A = np.zeros((4 * K + 1, 2 * N + 1), dtype=complex)
    A[K : 3 * K + 1, : N + 1] = a.coeffs  # row q + 2K for temporal shift q
    k = np.arange(-K, K + 1)
    n = np.arange(N + 1)
    q = (k[:, None] - k[None, :]) + 2 * K  # (k, k')
    nn = n[:, None]
    pp = n[None, :]
    term1 = np.where(nn >= pp, 1.0, 0.0)
    term3 = np.where((pp >= nn) & (nn > 0), 1.0, 0.0)
    i1 = np.clip(nn - pp, 0, 2 * N)
    i2 = nn + pp
    i3 = np.clip(pp - nn, 0, 2 * N)
    Q = q[:, None, :, None]
    T = 0.5 * (
        A[Q, i1[None, :, None, :]] * term1[None, :, None, :]
        + A[Q, i2[None, :, None, :]]
        + A[Q, i3[None, :, None, :]] * term3[None, :, None, :]
    )
    M = (2 * K + 1) * (N + 1)
    return T.reshape(M, M)


@dataclass(frozen=True)
class PerturbationData:
    """Variable damping ``nu`` and zero-order coefficient ``alpha`` (both cosine basis)."""

    nu: SpectralField
    alpha_coef: SpectralField
    base_mu: float

    def __post_init__(self):
        if self.nu.basis is not Basis.COSINE or self.alpha_coef.basis is not Basis.COSINE:
            raise BasisError("perturbation coefficients must be cosine-basis fields")

    @classmethod
    def trivial(cls, params: ProblemParams) -> "PerturbationData":
        return cls(
            SpectralField.constant(params, 2.0 * params.mu),
            SpectralField.zeros(params),
            params.mu,
        )

    @property
    def nu_size(self) -> float:
        return sobolev_norm(self.nu - SpectralField.constant(self.nu.params, 2.0 * self.base_mu), 0, 0)

    @property
    def alpha_size(self) -> float:
        return sobolev_norm(self.alpha_coef, 0, 0)


def apply_perturbed(u: SpectralField, pert: PerturbationData) -> SpectralField:
    """Operator applied through calculus and truncated products (no matrix)."""
    if u.basis is not Basis.COSINE:
        raise BasisError("u must be a cosine-basis field")
    damping, _ = field_product(pert.nu, dt(u))
    zeroth, _ = field_product(pert.alpha_coef, u)
    return dt(dt(u)) - dx(dx(u)) + damping + zeroth


@dataclass
class GalerkinSystem:
    matrix: np.ndarray = field(repr=False)
    rhs: np.ndarray | None = field(repr=False)
    params: ProblemParams = None
    mode_order: str = "row = (k + K) * (N + 1) + n"

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def export(self, path) -> None:
        """Write the matrix in MatrixMarket array format."""
        comment = (
            f" telegraph Galerkin matrix; omega={self.params.omega!r} mu={self.params.mu!r} "
            f"K={self.params.K} N={self.params.N}; {self.mode_order}"
        )
        scipy.io.mmwrite(str(path), self.matrix, comment=comment, precision=17)


def assemble(
    pert: PerturbationData, params: ProblemParams | None = None, f: SpectralField | None = None, max_size: int = MAX_SIZE
) -> GalerkinSystem:
    """Dense matrix of the perturbed operator in the cosine double basis.

    With ``nu = 2 mu`` and ``alpha = 0`` the result is exactly ``diag(lambda)``.
    """
    params = params or pert.nu.params
    M = (2 * params.K + 1) * (params.N + 1)
    if M > max_size:
        raise SizeError(f"Galerkin system of size {M} exceeds guard {max_size}")
    nu = pert.nu.with_params(params)
    alpha = pert.alpha_coef.with_params(params)
    d_t = (1j * (params.k * params.omega) * np.ones(params.shape)).ravel()
    wave = np.broadcast_to(wave_symbol(params.k, params.n, params.omega), params.shape).ravel()
    A = multiplication_matrix(nu) * d_t[None, :] + multiplication_matrix(alpha)
    A[np.diag_indices(M)] += wave
    rhs = None if f is None else to_vector(f.with_params(params))
    return GalerkinSystem(A, rhs, params)


@dataclass
class FredholmDiagnostics:
    kernel_dim: int
    cokernel_dim: int
    sigma_max: float
    sigma_min_complement: float
    kernel: np.ndarray = field(repr=False)
    cokernel: np.ndarray = field(repr=False)

    @property
    def index(self) -> int:
        return self.kernel_dim - self.cokernel_dim

    def as_dict(self) -> dict:
        return {
            "kernel_dim": self.kernel_dim,
            "cokernel_dim": self.cokernel_dim,
            "index": self.index,
            "sigma_max": self.sigma_max,
            "sigma_min_complement": self.sigma_min_complement,
        }


def _svd(matrix):
    try:
        return np.linalg.svd(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}") from exc


def fredholm_diagnostics(sys: GalerkinSystem, svd_tol: float | None = None) -> FredholmDiagnostics:
    """Numerical kernel and cokernel from the singular value decomposition.

    Singular values at or below ``svd_tol * sigma_max`` count as zero. The
    kernel is spanned by the matching right singular vectors (columns of
    ``kernel``), the cokernel by the left ones.
    """
    tol = sys.params.svd_tol if svd_tol is None else svd_tol
    U, s, Vh = _svd(sys.matrix)
    smax = float(s[0])
    rank = int(np.sum(s > tol * smax))
    n_rows, n_cols = sys.matrix.shape
    kernel = np.conj(Vh[rank:]).T
    cokernel = U[:, rank:]
    return FredholmDiagnostics(
        kernel_dim=n_cols - rank,
        cokernel_dim=n_rows - rank,
        sigma_max=smax,
        sigma_min_complement=float(s[rank - 1]) if rank else 0.0,
        kernel=kernel,
        cokernel=cokernel,
    )


def _real_field(vec: np.ndarray, params: ProblemParams) -> SpectralField:
    c = vec.reshape(params.shape)
    # rounding leaves tiny conjugate asymmetry; project onto real fields
    c = 0.5 * (c + np.conj(c[::-1, :]))
    return SpectralField(params, Basis.COSINE, c)


def real_kernel_field(vec: np.ndarray, params: ProblemParams) -> SpectralField:
    """Real field spanned by a (phase-arbitrary) singular vector, unit coefficient norm."""
    best = max((_real_field(ph * vec, params) for ph in (1.0, 1j)), key=lambda f: np.linalg.norm(f.coeffs))
    return best / np.linalg.norm(best.coeffs)


def solve_perturbed(
    f: SpectralField, pert: PerturbationData, params: ProblemParams | None = None, gamma: float = 2.0
) -> SolveReport:
    """Minimal-norm least-squares solve off the numerical kernel.

    The defect is the ``H^{0,0}`` norm of the part of ``f`` lying in the
    numerical cokernel; the residual re-applies the operator without the matrix.
    """
    if f.basis is not Basis.COSINE:
        raise BasisError("forcing must be a cosine-basis field")
    _check_gamma(gamma)
    params = params or f.params
    f = f.with_params(params)
    sys = assemble(pert, params, f)
    U, s, Vh = _svd(sys.matrix)
    rank = int(np.sum(s > params.svd_tol * s[0]))
    proj = U[:, :rank].conj().T @ sys.rhs
    u = _real_field(np.conj(Vh[:rank]).T @ (proj / s[:rank]), params)
    co = U[:, rank:]
    unreachable = _real_field(co @ (co.conj().T @ sys.rhs), params)
    defect = sobolev_norm(unreachable, 0, 0)
    residual = sobolev_norm(apply_perturbed(u, pert) - f, 0, gamma - 1)
    M = sys.size
    kernel = [real_kernel_field(v, params) for v in np.conj(Vh[rank:])]
    return SolveReport(
        solution=u,
        kernel_dim=M - rank,
        cokernel_dim=M - rank,
        solvability_defect=defect,
        residual=residual,
        gamma=gamma,
        defect_tol=params.svd_tol * max(sobolev_norm(f, 0, 0.0), 1.0),
        kernel=kernel,
    )
