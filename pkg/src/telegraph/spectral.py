"""Double trigonometric representation of time-periodic fields on (0, 1).

A field is stored as a complex coefficient array ``c[k + K, n]`` for
``|k| <= K`` and ``0 <= n <= N`` in one of two bases::

    cosine:  f(x, t) = sum_{k,n} c[k, n] exp(i k omega t) cos(n pi x)
    sine:    f(x, t) = sum_{k,n} c[k, n] exp(i k omega t) sin(n pi x)

Temporal coefficients are period-normalised, i.e.
``c_k = (omega / 2 pi) * int_0^T f exp(-i k omega t) dt`` with ``T = 2 pi / omega``,
so a constant field has coefficient equal to its value. The weighted norms
below use the unnormalised time integral and multiply by ``T**2`` internally.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft


class SpectralError(ValueError):
    """Base class for invalid field operations."""


class ResolutionError(SpectralError):
    """Grid too coarse for the requested truncation."""


class ConjugateSymmetryError(SpectralError):
    """Coefficients do not describe a real-valued field."""


class BasisError(SpectralError):
    """Operands live in incompatible spatial bases."""


class ParameterError(SpectralError):
    """Invalid numerical parameter."""


class Basis(str, enum.Enum):
    COSINE = "cosine"
    SINE = "sine"

    @property
    def other(self) -> "Basis":
        return Basis.SINE if self is Basis.COSINE else Basis.COSINE


@dataclass(frozen=True)
class ProblemParams:
    """Physical constants and truncation shared by every field of a problem.

    Parameters
    ----------
    omega : float
        Temporal frequency; the period is ``2 pi / omega``.
    mu : float
        Damping (turning) rate.
    K, N : int
        Temporal and spatial truncation.
    svd_tol : float
        Relative threshold below which a multiplier or singular value counts as zero.
    quad_tol : float
        Acceptance tolerance for quadrature-based cross checks.
    """

    omega: float
    mu: float
    K: int = 32
    N: int = 32
    svd_tol: float = 1e-10
    quad_tol: float = 1e-8

    def __post_init__(self):
        if not self.omega > 0:
            raise ParameterError(f"omega must be positive, got {self.omega}")
        if not math.isfinite(self.mu) or not math.isfinite(self.omega):
            raise ParameterError("omega and mu must be finite")
        if self.K < 1 or self.N < 1:
            raise ParameterError(f"truncation must satisfy K, N >= 1, got K={self.K}, N={self.N}")
        if not 0 < self.svd_tol < 1:
            raise ParameterError(f"svd_tol must lie in (0, 1), got {self.svd_tol}")
        if not self.quad_tol > 0:
            raise ParameterError(f"quad_tol must be positive, got {self.quad_tol}")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def shape(self) -> tuple[int, int]:
        return (2 * self.K + 1, self.N + 1)

    @property
    def k(self) -> np.ndarray:
        """Temporal indices ``-K..K`` as a column vector."""
        return np.arange(-self.K, self.K + 1)[:, None]

    @property
    def n(self) -> np.ndarray:
        """Spatial indices ``0..N`` as a row vector."""
        return np.arange(self.N + 1)[None, :]

    def replace(self, **changes) -> "ProblemParams":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return ProblemParams(**values)


def _conjugate_flip(c: np.ndarray) -> np.ndarray:
    """Return the array ``conj(c[-k, n])``."""
    return np.conj(c[::-1, :])


class SpectralField:
    """Immutable real field in the cosine or sine double basis.

    The reality invariant ``c[-k, n] == conj(c[k, n])`` is checked on
    construction and then enforced exactly by symmetrisation. Sine fields
    carry an identically zero ``n = 0`` column.
    """

    __slots__ = ("params", "basis", "_coeffs")

    def __init__(self, params: ProblemParams, basis: Basis | str, coeffs, *, rtol: float = 1e-10):
        basis = Basis(basis)
        c = np.array(coeffs, dtype=complex)
        if c.shape != params.shape:
            raise SpectralError(f"coefficient array must have shape {params.shape}, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise SpectralError("coefficients must be finite")
        scale = np.max(np.abs(c)) if c.size else 0.0
        mismatch = np.max(np.abs(c - _conjugate_flip(c)))
        if mismatch > rtol * scale:
            raise ConjugateSymmetryError(
                f"coefficients violate c[-k,n] = conj(c[k,n]) (mismatch {mismatch:.3e}, scale {scale:.3e})"
            )
        c = 0.5 * (c + _conjugate_flip(c))
        if basis is Basis.SINE:
            if np.max(np.abs(c[:, 0])) > rtol * max(scale, 1e-300):
                raise BasisError("sine-basis field cannot carry an n = 0 mode")
            c[:, 0] = 0.0
        c.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "_coeffs", c)

    @classmethod
    def _exact(cls, params: ProblemParams, basis: Basis, c: np.ndarray) -> "SpectralField":
        # for results of operations that keep the invariant exactly (sums, real scalings, derivatives)
        self = object.__new__(cls)
        c.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "_coeffs", c)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("SpectralField is immutable")

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @classmethod
    def zeros(cls, params: ProblemParams, basis: Basis | str = Basis.COSINE) -> "SpectralField":
        return cls(params, basis, np.zeros(params.shape, dtype=complex))

    @classmethod
    def constant(cls, params: ProblemParams, value: float) -> "SpectralField":
        c = np.zeros(params.shape, dtype=complex)
        c[params.K, 0] = value
        return cls(params, Basis.COSINE, c)

    @classmethod
    def from_modes(cls, params: ProblemParams, basis: Basis | str, modes: dict) -> "SpectralField":
        """Build a field from ``{(k, n): value}``, completing conjugate partners.

        Listing both ``(k, n)`` and ``(-k, n)`` is allowed only if the values
        are conjugate.
        """
        c = np.zeros(params.shape, dtype=complex)
        given = np.zeros(params.shape, dtype=bool)
        for (k, n), value in modes.items():
            if abs(k) > params.K or not 0 <= n <= params.N:
                raise SpectralError(f"mode ({k}, {n}) outside truncation K={params.K}, N={params.N}")
            value = complex(value)
            for kk, vv in ((k, value), (-k, value.conjugate())):
                i = kk + params.K
                if given[i, n] and not np.isclose(c[i, n], vv, rtol=1e-12, atol=1e-14):
                    raise ConjugateSymmetryError(f"conflicting values for mode ({kk}, {n}) and its conjugate")
                c[i, n] = vv
                given[i, n] = True
        return cls(params, basis, c)

    def coeff(self, k: int, n: int) -> complex:
        return complex(self._coeffs[k + self.params.K, n])

    def _check_compatible(self, other: "SpectralField"):
        if not isinstance(other, SpectralField):
            raise TypeError(f"expected SpectralField, got {type(other).__name__}")
        if other.params != self.params:
            raise SpectralError("fields have different parameters")
        if other.basis is not self.basis:
            raise BasisError(f"basis mismatch: {self.basis.value} vs {other.basis.value}")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_compatible(other)
        return SpectralField._exact(self.params, self.basis, self._coeffs + other._coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_compatible(other)
        return SpectralField._exact(self.params, self.basis, self._coeffs - other._coeffs)

    def __neg__(self) -> "SpectralField":
        return SpectralField._exact(self.params, self.basis, -self._coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        if isinstance(scalar, complex) or np.iscomplexobj(scalar):
            raise TypeError("only real scalars preserve the reality invariant")
        scalar = float(scalar)
        if not math.isfinite(scalar):
            raise SpectralError("scalar must be finite")
        return SpectralField._exact(self.params, self.basis, scalar * self._coeffs)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "SpectralField":
        return self * (1.0 / float(scalar))

    def with_params(self, params: ProblemParams) -> "SpectralField":
        """Same coefficients under different constants (truncation must match)."""
        return SpectralField(params, self.basis, self._coeffs)

    def retruncate(self, params: ProblemParams) -> "SpectralField":
        """Zero-pad or crop to the truncation of ``params`` (same frequency)."""
        if params.omega != self.params.omega:
            raise ParameterError("retruncation cannot change omega")
        c = np.zeros(params.shape, dtype=complex)
        K, N = min(params.K, self.params.K), min(params.N, self.params.N)
        c[params.K - K : params.K + K + 1, : N + 1] = self._coeffs[self.params.K - K : self.params.K + K + 1, : N + 1]
        return SpectralField(params, self.basis, c)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._coeffs)))

    def __repr__(self):
        nz = int(np.count_nonzero(self._coeffs))
        return f"SpectralField(basis={self.basis.value}, K={self.params.K}, N={self.params.N}, nonzero={nz})"


@dataclass(frozen=True)
class GridField:
    """Real samples on ``x_i = i / (nx - 1)`` (endpoints included) and
    ``t_j = j T / nt`` (period endpoint excluded)."""

    params: ProblemParams
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise SpectralError(f"grid values must be a 2-d array with nx, nt >= 2, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def nt(self) -> int:
        return self.values.shape[1]

    @property
    def x(self) -> np.ndarray:
        return grid_x(self.nx)

    @property
    def t(self) -> np.ndarray:
        return grid_t(self.nt, self.params.period)

    @classmethod
    def from_function(cls, params: ProblemParams, func, nx: int, nt: int) -> "GridField":
        """Sample ``func(x, t)`` (broadcasting) on the uniform grid."""
        x = grid_x(nx)[:, None]
        t = grid_t(nt, params.period)[None, :]
        return cls(params, np.broadcast_to(func(x, t), (nx, nt)))


def grid_x(nx: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, nx)


def grid_t(nt: int, period: float) -> np.ndarray:
    return np.arange(nt) * (period / nt)


def _spatial_basis(basis: Basis, n: np.ndarray, x: np.ndarray) -> np.ndarray:
    arg = np.pi * np.multiply.outer(np.asarray(x, dtype=float), n)
    return np.cos(arg) if basis is Basis.COSINE else np.sin(arg)


def _spatial_weights(basis: Basis, N: int) -> np.ndarray:
    """``int_0^1 phi_n(x)^2 dx`` for ``n = 0..N``."""
    w = np.full(N + 1, 0.5)
    w[0] = 1.0 if basis is Basis.COSINE else 0.0
    return w


def analyze(g: GridField, basis: Basis | str) -> SpectralField:
    """Coefficients of grid samples at the truncation of ``g.params``.

    Exact (up to rounding) for band-limited data when ``nt >= 2K + 2`` and
    ``nx >= N + 2``. The sine transform uses interior samples only.
    """
    basis = Basis(basis)
    p = g.params
    if g.nt < 2 * p.K + 2 or g.nx < p.N + 2:
        raise ResolutionError(
            f"grid {g.nx}x{g.nt} too coarse for K={p.K}, N={p.N} (need nx >= {p.N + 2}, nt >= {2 * p.K + 2})"
        )
    ct = np.fft.fft(g.values, axis=1) / g.nt
    ks = np.arange(-p.K, p.K + 1)
    ct = ct[:, ks % g.nt]  # (nx, 2K+1)
    m = g.nx - 1
    if basis is Basis.COSINE:
        a = scipy.fft.dct(ct.real, type=1, axis=0) + 1j * scipy.fft.dct(ct.imag, type=1, axis=0)
        a = a / m
        a[0] *= 0.5
        a[m] *= 0.5
        c = a[: p.N + 1]
    else:
        inner = ct[1:-1]
        b = scipy.fft.dst(inner.real, type=1, axis=0) + 1j * scipy.fft.dst(inner.imag, type=1, axis=0)
        b = b / m
        c = np.zeros((p.N + 1, ct.shape[1]), dtype=complex)
        c[1:] = b[: p.N]
    return SpectralField(p, basis, c.T)


def evaluate(f: SpectralField, x, t) -> np.ndarray:
    """Real values of ``f`` on the tensor grid ``x`` by ``t`` (shape ``(len(x), len(t))``)."""
    p = f.params
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    phi = _spatial_basis(f.basis, np.arange(p.N + 1), x)  # (nx, N+1)
    et = np.exp(1j * p.omega * np.multiply.outer(np.arange(-p.K, p.K + 1), t))  # (2K+1, nt)
    vals = phi @ f.coeffs.T @ et
    scale = np.sum(np.abs(f.coeffs))
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-12 * max(scale, 1e-300):
        raise ConjugateSymmetryError("synthesized values have a non-negligible imaginary part")
    return vals.real


def synthesize(f: SpectralField, nx: int, nt: int) -> GridField:
    """Evaluate the truncated series on the uniform ``nx`` by ``nt`` grid."""
    if nx < 2 or nt < 2:
        raise ResolutionError(f"need nx, nt >= 2, got {nx}, {nt}")
    return GridField(f.params, evaluate(f, grid_x(nx), grid_t(nt, f.params.period)))


def dt(f: SpectralField) -> SpectralField:
    p = f.params
    return SpectralField._exact(p, f.basis, (1j * (p.k * p.omega)) * f.coeffs)


def dx(f: SpectralField) -> SpectralField:
    """Spatial derivative; maps cosine to sine and sine to cosine."""
    p = f.params
    npi = p.n * np.pi
    if f.basis is Basis.COSINE:
        c = -npi * f.coeffs
        c[:, 0] = 0.0
        return SpectralField._exact(p, Basis.SINE, c)
    return SpectralField._exact(p, Basis.COSINE, npi * f.coeffs)


def _weighted_sq(f: SpectralField, gamma: float) -> float:
    p = f.params
    tw = (1.0 + p.k.astype(float) ** 2) ** gamma
    xw = _spatial_weights(f.basis, p.N)[None, :]
    return float(p.period**2 * np.sum(tw * xw * np.abs(f.coeffs) ** 2))


def sobolev_norm(f: SpectralField, l: int = 0, gamma: float = 0.0) -> float:
    """The weighted norm ``H^{l, gamma}`` evaluated exactly from coefficients.

    Sums ``(1 + k^2)^gamma`` times the squared ``L^2(0, 1)`` norm of the
    unnormalised time-Fourier coefficient of each x-derivative up to order ``l``.
    """
    if l not in (0, 1, 2):
        raise ParameterError(f"l must be 0, 1 or 2, got {l}")
    if gamma < 0:
        raise ParameterError(f"gamma must be non-negative, got {gamma}")
    total = 0.0
    g = f
    for m in range(l + 1):
        if m:
            g = dx(g)
        total += _weighted_sq(g, gamma)
    return math.sqrt(total)


def inner(f: SpectralField, g: SpectralField) -> float:
    """``int_0^T int_0^1 f g dx dt`` via Parseval."""
    f._check_compatible(g)
    p = f.params
    xw = _spatial_weights(f.basis, p.N)[None, :]
    return float(p.period * np.sum(xw * f.coeffs * np.conj(g.coeffs)).real)


def trace_x(f: SpectralField, x: float) -> np.ndarray:
    """Temporal coefficients (``k = -K..K``) of ``t -> f(x, t)``."""
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"x must lie in [0, 1], got {x}")
    phi = _spatial_basis(f.basis, np.arange(f.params.N + 1), np.array([x]))[0]
    return f.coeffs @ phi


def _require_gamma_ge_one(gamma: float):
    if gamma < 1:
        raise ParameterError(f"composite norms need gamma >= 1, got {gamma}")


def norm_U(u: SpectralField, gamma: float) -> float:
    """``||u||_U^2 = ||u||_{0,g}^2 + ||u_x||_{0,g-1}^2 + ||u_tt - u_xx||_{0,g-1}^2``."""
    _require_gamma_ge_one(gamma)
    if u.basis is not Basis.COSINE:
        raise BasisError("U-norm expects a cosine-basis field")
    wave = dt(dt(u)) - dx(dx(u))
    return math.sqrt(
        sobolev_norm(u, 0, gamma) ** 2
        + sobolev_norm(dx(u), 0, gamma - 1) ** 2
        + sobolev_norm(wave, 0, gamma - 1) ** 2
    )


def norm_W(g: SpectralField, f: SpectralField, gamma: float) -> float:
    return math.sqrt(sobolev_norm(g, 0, gamma) ** 2 + sobolev_norm(f, 0, gamma) ** 2)


def norm_Z(u: SpectralField, z: SpectralField, gamma: float) -> float:
    """Density-flux norm; ``u`` cosine, ``z`` sine."""
    if u.basis is not Basis.COSINE or z.basis is not Basis.SINE:
        raise BasisError("Z-norm expects u in the cosine basis and z in the sine basis")
    if gamma < 0:
        raise ParameterError(f"gamma must be non-negative, got {gamma}")
    return math.sqrt(norm_W(u, z, gamma) ** 2 + norm_W(dt(u) + dx(z), dt(z) + dx(u), gamma) ** 2)


def norm_V(u: SpectralField, z: SpectralField, gamma: float) -> float:
    """Norm of ``(v, w) = (u + z, u - z)``.

    Both the field pair and the transport pair ``(v_t + v_x, w_t - w_x)`` are
    sum/difference pairs, so the parallelogram law gives ``||(v,w)||_V^2 = 2 ||(u,z)||_Z^2``.
    """
    return math.sqrt(2.0) * norm_Z(u, z, gamma)


def random_field(
    params: ProblemParams, basis: Basis | str = Basis.COSINE, rng=None, decay: float = 0.0, mean_zero: bool = False
) -> SpectralField:
    """Random real band-limited field with coefficients damped by ``((1+k^2)(1+n^2))^(-decay/2)``."""
    basis = Basis(basis)
    rng = np.random.default_rng(rng)
    c = rng.standard_normal(params.shape) + 1j * rng.standard_normal(params.shape)
    c = 0.5 * (c + _conjugate_flip(c))
    c *= ((1.0 + params.k**2) * (1.0 + params.n**2)) ** (-0.5 * decay)
    if basis is Basis.SINE:
        c[:, 0] = 0.0
    if mean_zero:
        c[params.K, 0] = 0.0
    return SpectralField(params, basis, c)
