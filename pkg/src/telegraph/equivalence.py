"""Isomorphisms linking the walk, density-flux and telegraph formulations.

    (v, w) --alpha1--> (u, z) --alpha2--> u
    L_WS               L'_WS              L_TE
    (g, g) --beta1---> (g, 0) --beta2---> g_t + 2 mu g

The inverses of ``beta2`` and ``alpha2`` solve the periodic ODE
``y_t + 2 mu y = h``. Each is available as a spectral multiplier and as a
quadrature of the closed-form periodic solution

    y(t) = exp(-2 mu (t + T)) / (1 - exp(-2 mu T)) * int_0^T exp(2 mu s) h(s) ds
           + int_0^t exp(2 mu (s - t)) h(s) ds,

so that the two routes check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .spectral import (
    Basis,
    ParameterError,
    ProblemParams,
    SpectralError,
    SpectralField,
    dt,
    dx,
    sobolev_norm,
)
from .telegraph import apply_LTE
from .walk import MixedField, UZField, VWField, apply_LWS, apply_LWS_prime

Method = Literal["multiplier", "quadrature"]


class DomainError(SpectralError):
    """Argument lies outside the domain of an inverse map."""


class SingularMapError(SpectralError):
    """Inverse requested where the map is not invertible (``mu = 0``)."""


def alpha1(vw: VWField) -> UZField:
    v, w = vw.v, vw.w
    u = (v + w) * 0.5
    z = (v - w) * 0.5
    return UZField(u.cos, z.sin)


def alpha1_inv(uz: UZField) -> VWField:
    return VWField.from_vw(MixedField.of(uz.u) + MixedField.of(uz.z), MixedField.of(uz.u) - MixedField.of(uz.z))


def beta1(g: SpectralField) -> tuple[SpectralField, SpectralField]:
    """Diagonal pair ``(g, g)`` to ``(g, 0)``."""
    return g, SpectralField.zeros(g.params, g.basis)


def beta1_inv(pair: tuple[SpectralField, SpectralField]) -> SpectralField:
    """``(g, 0)`` back to the diagonal pair, returned as its common entry ``g``."""
    g, second = pair
    if second.max_abs() > 0:
        raise DomainError("beta1 inverse is defined only on pairs with a zero second slot")
    return g


def beta1_extended(a: MixedField, b: MixedField) -> tuple[MixedField, MixedField]:
    """Half-sum/half-difference; agrees with ``beta1`` on diagonal pairs."""
    return (a + b) * 0.5, (a - b) * 0.5


def alpha2(uz: UZField) -> SpectralField:
    return uz.u


def _require_mu(params: ProblemParams):
    if params.mu == 0:
        raise SingularMapError("the periodic ODE y_t + 2 mu y = h is not uniquely solvable for mu = 0")


def ode_multiplier(params: ProblemParams) -> np.ndarray:
    """``i k omega + 2 mu`` per temporal index, broadcast over the truncation."""
    return np.broadcast_to(1j * (params.k * params.omega) + 2.0 * params.mu, params.shape)


def beta2(g: SpectralField) -> SpectralField:
    return dt(g) + g * (2.0 * g.params.mu)


def beta2_extended(g: SpectralField, h: SpectralField) -> SpectralField:
    """``g_t + 2 mu g - h_x``; agrees with ``beta2`` when ``h = 0``."""
    return beta2(g) - dx(h)


def _ode_quad_rule(nodes_per_panel: int, panels: int):
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return s, ws


def periodic_ode_quadrature(h: SpectralField, nt: int | None = None, nodes_per_panel: int = 12) -> SpectralField:
    """Periodic solution of ``y_t + 2 mu y = h`` from the closed-form integral.

    Each integral is split at ``s = t`` and evaluated with composite
    Gauss-Legendre rules whose panels resolve one temporal oscillation each.
    For ``mu < 0`` the two terms are regrouped so that every exponent is
    non-positive; the naive form cancels catastrophically when ``|mu| T`` is large.
    The values at ``nt`` equispaced times are transformed back to coefficients.
    """
    p = h.params
    _require_mu(p)
    mu, T = p.mu, p.period
    nt = nt or 8 * (p.K + 1)
    if nt < 2 * p.K + 2:
        raise ParameterError(f"need nt >= {2 * p.K + 2}, got {nt}")
    ref, wref = _ode_quad_rule(nodes_per_panel, p.K + 1)
    ks = np.arange(-p.K, p.K + 1)

    # real field: only k >= 0 is needed, with the k > 0 terms doubled
    half_coeffs = h.coeffs[p.K :].copy()
    half_coeffs[1:] *= 2.0

    def h_at(s):
        # s: (..., q) times -> (..., q, N+1) real spatial-mode values
        base = np.exp(1j * p.omega * s)[..., None]
        e = np.concatenate([np.ones_like(base), np.cumprod(np.broadcast_to(base, s.shape + (p.K,)), axis=-1)], axis=-1)
        return (e @ half_coeffs).real

    t = np.arange(nt) * (T / nt)
    # left piece on [0, t], right piece on [t, T]
    s_left = t[:, None] * ref[None, :]
    w_left = t[:, None] * wref[None, :]
    s_right = t[:, None] + (T - t)[:, None] * ref[None, :]
    w_right = (T - t)[:, None] * wref[None, :]
    hl = h_at(s_left)
    hr = h_at(s_right)
    tt = t[:, None]
    if mu > 0:
        denom = -math.expm1(-2.0 * mu * T)
        # first term: exp(-2 mu t) / denom * int_0^T exp(2 mu (s - T)) h ds
        full = np.einsum("jq,jqn->jn", w_left * np.exp(2 * mu * (s_left - T)), hl) + np.einsum(
            "jq,jqn->jn", w_right * np.exp(2 * mu * (s_right - T)), hr
        )
        first = np.exp(-2.0 * mu * tt) / denom * full
        second = np.einsum("jq,jqn->jn", w_left * np.exp(2 * mu * (s_left - tt)), hl)
        y = first + second
    else:
        denom = math.expm1(2.0 * mu * T)  # exp(2 mu T) - 1, negative
        right = np.einsum("jq,jqn->jn", w_right * np.exp(2 * mu * (s_right - tt)), hr) / denom
        left = np.einsum("jq,jqn->jn", w_left * np.exp(2 * mu * (s_left - tt + T)), hl) / denom
        y = right + left
    c = np.fft.fft(y, axis=0) / nt
    return SpectralField(p, h.basis, c[ks % nt, :])


def beta2_inv(f: SpectralField, params: ProblemParams | None = None, method: Method = "multiplier") -> SpectralField:
    """Periodic ``g`` with ``g_t + 2 mu g = f``."""
    params = params or f.params
    f = f.with_params(params)
    _require_mu(params)
    if method == "quadrature":
        return periodic_ode_quadrature(f)
    if method != "multiplier":
        raise ParameterError(f"unknown method {method!r}")
    return SpectralField(params, f.basis, f.coeffs / ode_multiplier(params))


def alpha2_inv(u: SpectralField, params: ProblemParams | None = None, method: Method = "multiplier") -> UZField:
    """``(u, z)`` with ``z`` the periodic solution of ``z_t + 2 mu z = u_x``."""
    params = params or u.params
    u = u.with_params(params)
    _require_mu(params)
    return UZField(u, beta2_inv(dx(u), params, method))


def boundary_flux(u: SpectralField, params: ProblemParams | None = None, method: Method = "multiplier") -> UZField:
    """``(u, z)`` with ``z`` the periodic solution of ``z_t + 2 mu z = -u_x``.

    This is the flux that satisfies the second density-flux equation, so
    ``alpha2`` restricted to such pairs is inverted by this map. It differs
    from :func:`alpha2_inv` only in the sign of ``z``.
    """
    params = params or u.params
    u = u.with_params(params)
    _require_mu(params)
    return UZField(u, -beta2_inv(dx(u), params, method))


def _rel(diff: float, ref: float) -> float:
    return diff / ref if ref > 0 else diff


@dataclass
class EquivalenceReport:
    """Residuals of the commutative diagram on one test field.

    Residuals are relative to the size of the right-hand side (absolute if
    that is zero). ``offdiagonal`` measures how far ``L_WS`` of the test
    field is from the diagonal subspace; it vanishes exactly when the
    unextended ``beta1`` and ``beta2`` apply.
    """

    commutation_residual_upper: float
    commutation_residual_lower: float
    commutation_residual_full: float
    offdiagonal: float
    roundtrip_residuals: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "commutation_residual_upper": self.commutation_residual_upper,
            "commutation_residual_lower": self.commutation_residual_lower,
            "commutation_residual_full": self.commutation_residual_full,
            "offdiagonal": self.offdiagonal,
            "roundtrip_residuals": dict(sorted(self.roundtrip_residuals.items())),
        }

    @property
    def max_residual(self) -> float:
        vals = [self.commutation_residual_upper, self.commutation_residual_lower, self.commutation_residual_full]
        return max(vals + list(self.roundtrip_residuals.values()))


def commutation_check(test_field: VWField, params: ProblemParams | None = None) -> EquivalenceReport:
    """Evaluate both rows of the diagram and the round trips of every map."""
    params = params or test_field.params
    _require_mu(params)
    if params != test_field.params:
        test_field = VWField.from_uz(test_field.uz.u.with_params(params), test_field.uz.z.with_params(params))
    mu = params.mu

    lv, lw = apply_LWS(test_field)
    top_a, top_b = beta1_extended(lv, lw)
    uz = alpha1(test_field)
    mid_a, mid_b = apply_LWS_prime(uz)
    upper = (top_a - MixedField.of(mid_a)).norm() + (top_b - MixedField.of(mid_b)).norm()
    upper = _rel(upper, MixedField.of(mid_a).norm() + MixedField.of(mid_b).norm())

    bottom_left = beta2_extended(mid_a, mid_b)
    bottom_right = apply_LTE(alpha2(uz))
    lower = _rel(sobolev_norm(bottom_left - bottom_right, 0, 0), sobolev_norm(bottom_right, 0, 0))

    # beta = beta2 o beta1 against L_TE o alpha with alpha = alpha2 o alpha1, from the walk side
    full_left = beta2_extended(top_a.cos, top_b.sin)
    full = _rel(sobolev_norm(full_left - apply_LTE(alpha2(alpha1(test_field))), 0, 0), sobolev_norm(bottom_right, 0, 0))
    offdiag = _rel(top_b.norm(), top_a.norm())

    rt = {}
    back = alpha1_inv(uz)
    scale = max(test_field.v.norm(), 1e-300)
    rt["alpha1_inv.alpha1"] = ((back.v - test_field.v).norm() + (back.w - test_field.w).norm()) / scale
    again = alpha1(back)
    rt["alpha1.alpha1_inv"] = _coef_rel(again.u, uz.u) + _coef_rel(again.z, uz.z)
    g = mid_a
    rt["beta1_inv.beta1"] = _coef_rel(beta1_inv(beta1(g)), g)
    rt["beta2.beta2_inv"] = _coef_rel(beta2(beta2_inv(bottom_right)), bottom_right)
    rt["beta2_inv.beta2"] = _coef_rel(beta2_inv(beta2(g)), g)
    rt["alpha2.alpha2_inv"] = _coef_rel(alpha2(alpha2_inv(uz.u)), uz.u)
    constrained = boundary_flux(uz.u)
    rt["boundary_flux.alpha2(constrained)"] = _coef_rel(boundary_flux(alpha2(constrained)).z, constrained.z)
    return EquivalenceReport(
        commutation_residual_upper=upper,
        commutation_residual_lower=lower,
        commutation_residual_full=full,
        offdiagonal=offdiag,
        roundtrip_residuals=rt,
    )


def _coef_rel(a: SpectralField, b: SpectralField) -> float:
    scale = b.max_abs()
    d = float(np.max(np.abs(a.coeffs - b.coeffs)))
    return d / scale if scale > 0 else d


def constrained_field(u: SpectralField, params: ProblemParams | None = None) -> VWField:
    """Walk densities whose flux solves ``z_t + u_x + 2 mu z = 0``.

    On such fields ``L_WS`` lands in the diagonal subspace and ``L'_WS`` in
    pairs with a zero second slot, so the unextended ``beta`` maps apply.
    """
    return VWField(boundary_flux(u, params))


def mean_integral_identity(uz: UZField, g: SpectralField) -> float:
    """``|int int (u_t + z_x - g) dx dt|``."""
    a, _ = apply_LWS_prime(uz)
    return abs((a - g).coeff(0, 0).real) * uz.params.period


def dual_path_discrepancy(h: SpectralField) -> float:
    """Max coefficient gap between the multiplier and quadrature periodic-ODE solvers,
    relative to the largest coefficient of the multiplier result."""
    a = beta2_inv(h, method="multiplier")
    b = beta2_inv(h, method="quadrature")
    return _coef_rel(b, a)

