"""Diagonal spectral solver for the periodic-Neumann damped wave equation.

In the cosine basis the operator ``u -> u_tt - u_xx + 2 mu u_t`` acts on the
mode ``exp(i k omega t) cos(n pi x)`` by the scalar

    lambda(k, n) = n^2 pi^2 - k^2 omega^2 + 2 i mu k omega,

and the formal adjoint ``u -> u_tt - u_xx - 2 mu u_t`` by its conjugate.
For ``mu != 0`` the only zero is ``(k, n) = (0, 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .spectral import (
    Basis,
    BasisError,
    ParameterError,
    ProblemParams,
    SpectralError,
    SpectralField,
    dt,
    dx,
    inner,
    sobolev_norm,
)

Operator = Literal["LTE", "LTE_tilde"]


class DefectError(SpectralError):
    """Right-hand side violates the solvability condition where one is required."""


def wave_symbol(k, n, omega: float):
    """Real part ``n^2 pi^2 - k^2 omega^2`` shared by every assembly path."""
    return (np.multiply(n, np.pi)) ** 2 - (np.multiply(k, omega)) ** 2


def multiplier(k: int, n: int, params: ProblemParams, tilde: bool = False) -> complex:
    sign = -1.0 if tilde else 1.0
    return complex(wave_symbol(k, n, params.omega) + 1j * (sign * 2.0 * params.mu * (k * params.omega)))


def multiplier_array(params: ProblemParams, tilde: bool = False) -> np.ndarray:
    """``lambda(k, n)`` over the full truncation, indexed ``[k + K, n]``."""
    k, n = params.k, params.n
    sign = -1.0 if tilde else 1.0
    return wave_symbol(k, n, params.omega) + 1j * (sign * 2.0 * params.mu * (k * params.omega))


def singular_mask(params: ProblemParams, tilde: bool = False) -> np.ndarray:
    lam = np.abs(multiplier_array(params, tilde))
    return lam <= params.svd_tol * lam.max()


def resonant_modes(params: ProblemParams, tilde: bool = False) -> list[tuple[int, int]]:
    """All ``(k, n)`` in the truncation with numerically vanishing multiplier."""
    ki, ni = np.nonzero(singular_mask(params, tilde))
    return [(int(i) - params.K, int(j)) for i, j in zip(ki, ni)]


def _require_cosine(u: SpectralField):
    if u.basis is not Basis.COSINE:
        raise BasisError("the telegraph operator acts on cosine-basis (Neumann) fields")


def apply_LTE(u: SpectralField) -> SpectralField:
    _require_cosine(u)
    return SpectralField(u.params, Basis.COSINE, multiplier_array(u.params) * u.coeffs)


def apply_LTE_tilde(u: SpectralField) -> SpectralField:
    _require_cosine(u)
    return SpectralField(u.params, Basis.COSINE, multiplier_array(u.params, tilde=True) * u.coeffs)


def apply_LTE_calculus(u: SpectralField, tilde: bool = False) -> SpectralField:
    """Same operator assembled from ``dt`` and ``dx`` rather than the multiplier."""
    _require_cosine(u)
    damping = dt(u) * (2.0 * u.params.mu)
    wave = dt(dt(u)) - dx(dx(u))
    return wave - damping if tilde else wave + damping


def mean_square_norm(f: SpectralField) -> float:
    """``sqrt((1/T) int int f^2)``; the normalisation used for kernel elements."""
    return math.sqrt(inner(f, f) / f.params.period)


def kernel_basis(params: ProblemParams, operator: Operator = "LTE") -> list[SpectralField]:
    """Real fields spanning the numerical kernel, each of unit mean-square norm.

    A vanishing multiplier at ``(k, n)`` with ``k > 0`` (and its partner at
    ``-k``) contributes the two fields ``cos(k omega t) cos(n pi x)`` and
    ``sin(k omega t) cos(n pi x)``.
    """
    if operator not in ("LTE", "LTE_tilde"):
        raise ParameterError(f"unknown operator {operator!r}")
    out = []
    for k, n in resonant_modes(params, tilde=operator == "LTE_tilde"):
        if k < 0:
            continue
        if k == 0:
            fields = [SpectralField.from_modes(params, Basis.COSINE, {(0, n): 1.0})]
        else:
            fields = [
                SpectralField.from_modes(params, Basis.COSINE, {(k, n): 0.5}),
                SpectralField.from_modes(params, Basis.COSINE, {(k, n): -0.5j}),
            ]
        out.extend(f / mean_square_norm(f) for f in fields)
    return out


def solvability_check(f: SpectralField, params: ProblemParams | None = None) -> float:
    """Largest ``|int int f u|`` over unit kernel elements ``u`` of the adjoint.

    Zero exactly when ``f`` lies in the image of the operator.
    """
    _require_cosine(f)
    params = params or f.params
    f = f.with_params(params)
    return max((abs(inner(f, u)) for u in kernel_basis(params, "LTE_tilde")), default=0.0)


@dataclass
class SolveReport:
    """Outcome of a Fredholm-alternative solve.

    ``solution`` is the minimal-norm solution: every component on the
    numerical kernel is set to zero. ``solvability_defect`` is the
    ``H^{0,0}`` norm of the part of the right-hand side that no solution can
    reach; ``residual`` is the ``H^{0, gamma-1}`` norm of ``L u - f``.
    """

    solution: object
    kernel_dim: int
    cokernel_dim: int
    solvability_defect: float
    residual: float
    gamma: float
    defect_tol: float
    kernel: list = field(default_factory=list, repr=False)
    resonant_modes: list = field(default_factory=list)
    degenerate_modes: list = field(default_factory=list)

    @property
    def index(self) -> int:
        return self.kernel_dim - self.cokernel_dim

    @property
    def solvable(self) -> bool:
        return self.solvability_defect <= self.defect_tol

    def summary(self) -> dict:
        out = {
            "kernel_dim": self.kernel_dim,
            "cokernel_dim": self.cokernel_dim,
            "index": self.index,
            "solvability_defect": self.solvability_defect,
            "residual": self.residual,
            "gamma": self.gamma,
            "solvable": self.solvable,
            "resonant_modes": [list(m) for m in self.resonant_modes],
        }
        if self.degenerate_modes:
            out["degenerate_modes"] = [list(m) for m in self.degenerate_modes]
        return out


def _check_gamma(gamma: float):
    if gamma < 1:
        raise ParameterError(f"solvers measure residuals in H^(0, gamma-1) and need gamma >= 1, got {gamma}")


def solve_LTE(f: SpectralField, params: ProblemParams | None = None, gamma: float = 2.0) -> SolveReport:
    """Solve ``u_tt - u_xx + 2 mu u_t = f`` with periodic-Neumann conditions.

    Never raises on an unsolvable right-hand side; the obstruction is
    reported as ``solvability_defect``.
    """
    _require_cosine(f)
    _check_gamma(gamma)
    params = params or f.params
    f = f.with_params(params)
    lam = multiplier_array(params)
    sing = np.abs(lam) <= params.svd_tol * np.abs(lam).max()
    safe = np.where(sing, 1.0, lam)
    u_coeffs = np.where(sing, 0.0, f.coeffs / safe)
    u = SpectralField(params, Basis.COSINE, u_coeffs)
    unreachable = SpectralField(params, Basis.COSINE, np.where(sing, f.coeffs, 0.0))
    defect = sobolev_norm(unreachable, 0, 0.0)
    residual = sobolev_norm(apply_LTE(u) - f, 0, gamma - 1)
    kernel = kernel_basis(params, "LTE")
    cokernel = kernel_basis(params, "LTE_tilde")
    return SolveReport(
        solution=u,
        kernel_dim=len(kernel),
        cokernel_dim=len(cokernel),
        solvability_defect=defect,
        residual=residual,
        gamma=gamma,
        defect_tol=params.svd_tol * max(sobolev_norm(f, 0, 0.0), 1.0),
        kernel=kernel,
        resonant_modes=resonant_modes(params),
    )


def multiplier_lower_bound(params: ProblemParams) -> float:
    """``min |lambda(k, n)| / (1 + |k|)`` over all modes with ``k != 0``."""
    lam = np.abs(multiplier_array(params))
    k = np.abs(params.k)
    ratio = lam / (1.0 + k)
    return float(ratio[params.k[:, 0] != 0].min())


@dataclass
class SmoothingReport:
    norm_f: float
    norm_u: float
    bound_constant: float
    gain_constant: float
    gain_verified: bool
    gamma: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def smoothing_report(f: SpectralField, gamma: float, params: ProblemParams | None = None) -> SmoothingReport:
    """Check ``||u||_{H^{0,gamma}} <= C ||f||_{H^{0,gamma-1}}`` for the solution of ``L u = f``.

    Mode by mode the ratio of weights is ``(1 + k^2) / |lambda|^2``; it is at
    most ``1 / c^2`` for ``k != 0`` (``c`` the multiplier lower bound) and at
    most ``1 / pi^4`` for ``k = 0, n >= 1``. So ``C = max(1/c, 1/pi^2)``.
    """
    params = params or f.params
    if params.mu == 0:
        raise ParameterError("smoothing needs mu != 0")
    _check_gamma(gamma)
    f = f.with_params(params)
    defect = solvability_check(f, params)
    if defect > params.svd_tol * max(sobolev_norm(f, 0, 0.0), 1.0):
        raise DefectError(f"right-hand side is not in the image (defect {defect:.3e})")
    u = solve_LTE(f, params, gamma).solution
    c = multiplier_lower_bound(params)
    if c <= 0:
        raise ParameterError("multiplier lower bound vanished")
    C = max(1.0 / c, 1.0 / math.pi**2)
    norm_f = sobolev_norm(f, 0, gamma - 1)
    norm_u = sobolev_norm(u, 0, gamma)
    return SmoothingReport(
        norm_f=norm_f,
        norm_u=norm_u,
        bound_constant=c,
        gain_constant=C,
        gain_verified=bool(norm_u <= C * norm_f * (1 + 1e-12)),
        gamma=gamma,
    )
