"""Correlated random walk operators in the density-flux representation.

Right/left mover densities ``(v, w)`` are stored through ``u = (v + w)/2``
(cosine basis) and ``z = (v - w)/2`` (sine basis). The reflection condition
``v = w`` at ``x = 0, 1`` is then the vanishing of ``z`` at the walls, which
the sine basis satisfies term by term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    Basis,
    BasisError,
    GridField,
    ProblemParams,
    SpectralError,
    SpectralField,
    dt,
    dx,
    evaluate,
    inner,
    sobolev_norm,
    trace_x,
)
from .telegraph import SolveReport, _check_gamma, multiplier_array


class BoundaryError(SpectralError):
    """Pair cannot satisfy the reflection boundary conditions."""


@dataclass(frozen=True)
class MixedField:
    """Sum of a cosine-basis and a sine-basis field.

    Cosine and sine modes are not orthogonal on (0, 1), so :meth:`norm`
    is the equivalent norm ``sqrt(|cos part|^2 + |sin part|^2)``, not the
    ``L^2`` norm of the sum.
    """

    cos: SpectralField
    sin: SpectralField

    def __post_init__(self):
        if self.cos.basis is not Basis.COSINE or self.sin.basis is not Basis.SINE:
            raise BasisError("MixedField needs a cosine part and a sine part")
        if self.cos.params != self.sin.params:
            raise SpectralError("parts have different parameters")

    @classmethod
    def of(cls, f: SpectralField) -> "MixedField":
        zero = SpectralField.zeros(f.params, f.basis.other)
        return cls(f, zero) if f.basis is Basis.COSINE else cls(zero, f)

    @property
    def params(self) -> ProblemParams:
        return self.cos.params

    def __add__(self, other: "MixedField") -> "MixedField":
        return MixedField(self.cos + other.cos, self.sin + other.sin)

    def __sub__(self, other: "MixedField") -> "MixedField":
        return MixedField(self.cos - other.cos, self.sin - other.sin)

    def __neg__(self) -> "MixedField":
        return MixedField(-self.cos, -self.sin)

    def __mul__(self, scalar: float) -> "MixedField":
        return MixedField(self.cos * scalar, self.sin * scalar)

    __rmul__ = __mul__

    def dt(self) -> "MixedField":
        return MixedField(dt(self.cos), dt(self.sin))

    def dx(self) -> "MixedField":
        return MixedField(dx(self.sin), dx(self.cos))

    def evaluate(self, x, t) -> np.ndarray:
        return evaluate(self.cos, x, t) + evaluate(self.sin, x, t)

    def norm(self, gamma: float = 0.0) -> float:
        return math.hypot(sobolev_norm(self.cos, 0, gamma), sobolev_norm(self.sin, 0, gamma))


@dataclass(frozen=True)
class UZField:
    """Density ``u`` (cosine) and flux ``z`` (sine)."""

    u: SpectralField
    z: SpectralField

    def __post_init__(self):
        if self.u.basis is not Basis.COSINE:
            raise BasisError("density u must be in the cosine basis")
        if self.z.basis is not Basis.SINE:
            raise BasisError("flux z must be in the sine basis")
        if self.u.params != self.z.params:
            raise SpectralError("u and z have different parameters")

    @property
    def params(self) -> ProblemParams:
        return self.u.params


@dataclass(frozen=True)
class VWField:
    """Right/left mover densities, held as the equivalent :class:`UZField`."""

    uz: UZField

    @classmethod
    def from_uz(cls, u: SpectralField, z: SpectralField) -> "VWField":
        return cls(UZField(u, z))

    @classmethod
    def from_vw(cls, v: MixedField, w: MixedField) -> "VWField":
        """Build from explicit densities; rejects pairs violating ``v = w`` at the walls."""
        u = (v + w) * 0.5
        z = (v - w) * 0.5
        scale = max(v.norm(), w.norm(), 1e-300)
        if u.sin.max_abs() > 1e-12 * scale or z.cos.max_abs() > 1e-12 * scale:
            raise BoundaryError("(v, w) does not satisfy v = w at x = 0 and x = 1")
        return cls(UZField(u.cos, z.sin))

    @property
    def params(self) -> ProblemParams:
        return self.uz.params

    @property
    def v(self) -> MixedField:
        return MixedField(self.uz.u, self.uz.z)

    @property
    def w(self) -> MixedField:
        return MixedField(self.uz.u, -self.uz.z)


def apply_LWS(vw: VWField) -> tuple[MixedField, MixedField]:
    """``(v_t + v_x - mu (w - v), w_t - w_x - mu (v - w))``."""
    mu = vw.params.mu
    v, w = vw.v, vw.w
    return (
        v.dt() + v.dx() - (w - v) * mu,
        w.dt() - w.dx() - (v - w) * mu,
    )


def apply_LWS_tilde(vw: VWField) -> tuple[MixedField, MixedField]:
    """``(-v_t - v_x - mu (w - v), -w_t + w_x - mu (v - w))``."""
    mu = vw.params.mu
    v, w = vw.v, vw.w
    return (
        -v.dt() - v.dx() - (w - v) * mu,
        -w.dt() + w.dx() - (v - w) * mu,
    )


def apply_LWS_prime(uz: UZField) -> tuple[SpectralField, SpectralField]:
    """``(u_t + z_x, z_t + u_x + 2 mu z)``; cosine then sine."""
    return dt(uz.u) + dx(uz.z), dt(uz.z) + dx(uz.u) + uz.z * (2.0 * uz.params.mu)


def walk_u_multiplier(params: ProblemParams) -> np.ndarray:
    """Scalar acting on ``u`` once ``z`` is eliminated: ``lambda / (i k omega + 2 mu)``.

    Entries where ``i k omega + 2 mu`` vanishes are NaN.
    """
    damp = 1j * (params.k * params.omega) + 2.0 * params.mu
    damp = np.broadcast_to(damp, params.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(damp == 0, np.nan, multiplier_array(params) / np.where(damp == 0, 1.0, damp))


def _mode_matrix(k: int, n: int, params: ProblemParams, tilde: bool) -> np.ndarray:
    """Per-mode system in ``(u, z)``; for ``n = 0`` only the density equation exists."""
    iko = 1j * k * params.omega
    if n == 0:
        return np.array([[iko]])
    if tilde:
        # kernel of the adjoint walk operator: u_t + z_x = 0, z_t + u_x - 2 mu z = 0
        return np.array([[iko, n * np.pi], [-n * np.pi, iko - 2.0 * params.mu]])
    return np.array([[iko, n * np.pi], [-n * np.pi, iko + 2.0 * params.mu]])


def walk_kernel(params: ProblemParams, tilde: bool = False) -> list[UZField]:
    """Real kernel elements of ``L_WS`` (or its adjoint partner) in ``(u, z)`` form.

    Each element is scaled so that ``v + w = 2 u`` has unit mean-square norm.
    """
    lam = np.abs(multiplier_array(params, tilde=tilde))
    sing = lam <= params.svd_tol * lam.max()
    out = []
    for i, n in zip(*np.nonzero(sing)):
        k = int(i) - params.K
        n = int(n)
        if k < 0:
            continue
        _, _, vh = np.linalg.svd(_mode_matrix(k, n, params, tilde))
        null = np.conj(vh[-1])
        null = null / null[0]
        phases = [1.0] if k == 0 else [1.0, -1j]
        for ph in phases:
            cu = complex(null[0] * ph) * (1.0 if k == 0 else 0.5)
            u = SpectralField.from_modes(params, Basis.COSINE, {(k, n): cu})
            if n == 0:
                z = SpectralField.zeros(params, Basis.SINE)
            else:
                cz = complex(null[1] * ph) * (1.0 if k == 0 else 0.5)
                z = SpectralField.from_modes(params, Basis.SINE, {(k, n): cz})
            scale = math.sqrt(inner(u * 2.0, u * 2.0) / params.period)
            out.append(UZField(u / scale, z / scale))
    return out


def solve_walk(g: SpectralField, params: ProblemParams | None = None, gamma: float = 2.0) -> SolveReport:
    """Solve ``u_t + z_x = g``, ``z_t + u_x + 2 mu z = 0`` with ``z = 0`` at the walls.

    Per mode the 2x2 determinant is the telegraph multiplier, so by Cramer's
    rule ``u = (i k omega + 2 mu) g / lambda`` and ``z = n pi g / lambda``.
    Modes with ``i k omega + 2 mu = 0`` (``k = 0`` when ``mu = 0``) are listed in
    ``degenerate_modes``; the Cramer form does not divide by that factor.
    """
    if g.basis is not Basis.COSINE:
        raise BasisError("walk forcing g must be a cosine-basis field")
    _check_gamma(gamma)
    params = params or g.params
    g = g.with_params(params)
    lam = multiplier_array(params)
    sing = np.abs(lam) <= params.svd_tol * np.abs(lam).max()
    safe = np.where(sing, 1.0, lam)
    damp = 1j * (params.k * params.omega) + 2.0 * params.mu
    npi = params.n * np.pi
    u = SpectralField(params, Basis.COSINE, np.where(sing, 0.0, damp * g.coeffs / safe))
    zc = np.where(sing, 0.0, npi * g.coeffs / safe)
    zc[:, 0] = 0.0
    z = SpectralField(params, Basis.SINE, zc)
    sol = UZField(u, z)

    kernel = walk_kernel(params)
    cokernel = walk_kernel(params, tilde=True)
    defect = max((abs(inner(g, c.u * 2.0)) for c in cokernel), default=0.0)
    a, b = apply_LWS_prime(sol)
    residual = math.hypot(sobolev_norm(a - g, 0, gamma), sobolev_norm(b, 0, gamma))
    degenerate = []
    if params.mu == 0:
        degenerate = [(0, n) for n in range(params.N + 1)]
    ki, ni = np.nonzero(sing)
    return SolveReport(
        solution=sol,
        kernel_dim=len(kernel),
        cokernel_dim=len(cokernel),
        solvability_defect=defect,
        residual=residual,
        gamma=gamma,
        defect_tol=params.svd_tol * max(sobolev_norm(g, 0, 0.0), 1.0),
        kernel=kernel,
        resonant_modes=[(int(i) - params.K, int(j)) for i, j in zip(ki, ni)],
        degenerate_modes=degenerate,
    )


def boundary_residual(field) -> float:
    """``L^2(0, T)`` size of the reflection-condition violation at both walls.

    Accepts a :class:`UZField`, a :class:`VWField`, or a :class:`GridField`
    holding flux samples ``z(x_i, t_j)``.
    """
    if isinstance(field, GridField):
        # rectangle rule is exact for trigonometric polynomials on a periodic grid
        h = field.params.period / field.nt
        return math.sqrt(h * float(np.sum(field.values[0] ** 2) + np.sum(field.values[-1] ** 2)))
    if isinstance(field, VWField):
        p = field.params
        diff = field.v - field.w
        tr = [trace_x(diff.cos, x) + trace_x(diff.sin, x) for x in (0.0, 1.0)]
        return math.sqrt(p.period * sum(float(np.sum(np.abs(c) ** 2)) for c in tr))
    if isinstance(field, UZField):
        p = field.params
        tr = [trace_x(field.z, x) for x in (0.0, 1.0)]
        return math.sqrt(p.period * sum(float(np.sum(np.abs(c) ** 2)) for c in tr))
    raise TypeError(f"unsupported field type {type(field).__name__}")
