"""Heterogeneous double-well potentials with moving wells.

A well specification bundles the two well branches a(x) < b(x), the
potential W(x, u) >= 0 vanishing exactly on the branches, and analytic
partial derivatives. Positions are arrays whose last axis is the spatial
dimension; a bare scalar is accepted as a 1-d point. All derived scalar
quantities of the sharp-interface theory live here:

    gamma(x)        = b(x) - a(x)                      (well separation)
    W_n(x, v)       = W(x, a(x) + gamma(x) v)          (normalized well)
    sigma(x)        = int_a^b sqrt(2 W(x, s)) ds       (surface tension)
    sigma_n(x)      = int_0^1 sqrt(2 W_n(x, s)) ds     = sigma / gamma
    d_n(x, v)       = int_0^v sqrt(2 W_n(x, s)) ds     (geodesic distance)

together with the one-dimensional transition profile solving
v' = sqrt(2 W_n(x, v)), v(0) = 1/2, with x frozen.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, NumericError
from .quadrature import adaptive_gauss_legendre

Scalar = Callable[[np.ndarray], np.ndarray]
Vector = Callable[[np.ndarray], np.ndarray]


def as_points(x) -> np.ndarray:
    """Normalize a position argument: last axis is the spatial dimension."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    return x


@dataclass(frozen=True)
class WellSpec:
    """Double-well data with moving wells and analytic derivatives.

    ``a``, ``b`` map positions (..., d) -> (...); ``grad_a``, ``grad_b``
    map (..., d) -> (..., d). ``W`` and ``dW_du`` map (positions, u) to
    (...); ``dW_dx`` to (..., d). ``delta_sep`` is a strict lower bound
    on b - a. ``bounds`` (d, 2), when given, is the domain closure used
    for position checks.
    """

    a: Scalar
    b: Scalar
    grad_a: Vector
    grad_b: Vector
    W: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dW_du: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dW_dx: Callable[[np.ndarray, np.ndarray], np.ndarray]
    delta_sep: float
    bounds: Optional[np.ndarray] = None

    def check_position(self, x: np.ndarray) -> None:
        if self.bounds is None:
            return
        lo = self.bounds[:, 0] - 1e-12
        hi = self.bounds[:, 1] + 1e-12
        if np.any(x < lo) or np.any(x > hi):
            raise DomainError("position outside the domain closure")


def gamma(spec: WellSpec, x) -> np.ndarray:
    """Well separation b(x) - a(x); always >= delta_sep."""
    x = as_points(x)
    spec.check_position(x)
    return spec.b(x) - spec.a(x)


def grad_gamma(spec: WellSpec, x) -> np.ndarray:
    x = as_points(x)
    return spec.grad_b(x) - spec.grad_a(x)


def normalized_well(spec: WellSpec, x, v) -> np.ndarray:
    """W_n(x, v) = W(x, a(x) + gamma(x) v); vanishes at v = 0 and v = 1."""
    x = as_points(x)
    v = np.asarray(v, dtype=float)
    u = spec.a(x) + (spec.b(x) - spec.a(x)) * v
    return spec.W(x, u)


def normalized_well_dx(spec: WellSpec, x, v) -> np.ndarray:
    """Spatial partial of the normalized well at frozen v, shape (..., d).

    partial_x W_n = dW_dx(x, u) + dW_du(x, u) (grad_a + v grad_gamma)
    with u = a + gamma v.
    """
    x = as_points(x)
    v = np.asarray(v, dtype=float)
    u = spec.a(x) + (spec.b(x) - spec.a(x)) * v
    drift = spec.grad_a(x) + v[..., None] * grad_gamma(spec, x)
    return spec.dW_dx(x, u) + spec.dW_du(x, u)[..., None] * drift


def surface_tension(spec: WellSpec, x, tol: float = 1e-10) -> np.ndarray:
    """sigma(x) = int_{a(x)}^{b(x)} sqrt(2 W(x, s)) ds by adaptive quadrature.

    Vectorized over a batch of positions (the u-interval is rescaled to a
    common reference interval, which is exact for the affine substitution).
    """
    x = as_points(x)
    spec.check_position(x)
    ax = np.atleast_1d(spec.a(x))
    gax = np.atleast_1d(spec.b(x) - spec.a(x))
    pts = x.reshape(-1, x.shape[-1])
    a_flat = ax.reshape(-1)
    g_flat = gax.reshape(-1)

    def integrand(t):
        # s = a + gamma t, ds = gamma dt; evaluates W itself, not W_n
        u = a_flat[None, :] + g_flat[None, :] * t[:, None]
        w = spec.W(pts[None, :, :].repeat(len(t), axis=0), u)
        return g_flat[None, :] * np.sqrt(np.maximum(2.0 * w, 0.0))

    val, _ = adaptive_gauss_legendre(integrand, 0.0, 1.0, tol=tol)
    val = np.asarray(val).reshape(ax.shape)
    if np.asarray(spec.a(x)).ndim == 0:
        return float(val.reshape(()))
    return val


def sigma_n(spec: WellSpec, x, tol: float = 1e-10) -> np.ndarray:
    """Normalized surface tension int_0^1 sqrt(2 W_n(x, s)) ds = sigma/gamma."""
    x = as_points(x)
    spec.check_position(x)
    shape = np.atleast_1d(spec.a(x)).shape
    pts = x.reshape(-1, x.shape[-1])

    def integrand(t):
        wn = normalized_well(spec, pts[None, :, :].repeat(len(t), axis=0),
                             t[:, None] * np.ones(len(pts))[None, :])
        return np.sqrt(np.maximum(2.0 * wn, 0.0))

    val, _ = adaptive_gauss_legendre(integrand, 0.0, 1.0, tol=tol)
    val = np.asarray(val).reshape(shape)
    if np.asarray(spec.a(x)).ndim == 0:
        return float(val.reshape(()))
    return val


def geodesic_distance(spec: WellSpec, x, v: float, tol: float = 1e-10) -> float:
    """d_n(x, v) = int_0^v sqrt(2 W_n(x, s)) ds (signed for v < 0)."""
    x = as_points(x)
    spec.check_position(x)

    def integrand(t):
        return np.sqrt(np.maximum(2.0 * normalized_well(spec, x, t), 0.0))

    val, _ = adaptive_gauss_legendre(integrand, 0.0, float(v), tol=tol)
    return float(val)


# ---------------------------------------------------------------------------
# transition profile
# ---------------------------------------------------------------------------

_TAIL = 1e-12


def optimal_profile(spec: WellSpec, x, s, atol: float = 1e-10):
    """Transition profile v(s) solving v' = sqrt(2 W_n(x, v))/gamma(x),
    v(0) = 1/2, with x frozen.

    This is the normalized form of du/ds = sqrt(2 W(x, u)), the profile
    that equipartitions the energy pointwise, so u = a + gamma v recovers
    the surface tension exactly in 1-d. Integration is an adaptive
    embedded Runge-Kutta pair; values beyond the window where the tails
    are below 1e-12 clamp to 0/1. For the quartic family the result is
    the logistic profile with rate sqrt(2 m) gamma.
    """
    x = as_points(x)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    gam = float(spec.b(x) - spec.a(x))

    def rhs(_, v):
        wn = normalized_well(spec, x, float(v[0]))
        return [np.sqrt(max(2.0 * float(wn), 0.0)) / gam]

    def hit_upper(_, v):
        return v[0] - (1.0 - _TAIL)

    def hit_lower(_, v):
        return v[0] - _TAIL

    hit_upper.terminal = True
    hit_lower.terminal = True

    out = np.empty_like(s_arr)
    pos = s_arr > 0
    neg = s_arr < 0
    out[~pos & ~neg] = 0.5

    for mask, span, event, clamp in (
        (pos, (0.0, 1e6), hit_upper, 1.0),
        (neg, (0.0, -1e6), hit_lower, 0.0),
    ):
        if not np.any(mask):
            continue
        sol = solve_ivp(rhs, span, [0.5], method="RK45", events=[event],
                        dense_output=True, atol=atol, rtol=1e-10)
        if not sol.success:
            raise NumericError("profile integration failed: " + sol.message)
        s_edge = sol.t[-1]
        ss = s_arr[mask]
        inside = np.abs(ss) <= abs(s_edge)
        vals = np.full(ss.shape, clamp)
        if np.any(inside):
            vals[inside] = sol.sol(ss[inside])[0]
        out[mask] = np.clip(vals, 0.0, 1.0)

    if np.asarray(s, dtype=float).ndim == 0:
        return float(out[0])
    return out


def optimal_profile_grid(spec: WellSpec, points: np.ndarray, s: np.ndarray,
                         dtau: float = 0.1, tau_stop: float = 34.0):
    """Frozen-x profile values v(x_i, s_i) for many points at once.

    Marches the substituted variable tau with v = 1/(1 + exp(-tau)), where
    ds/dtau = gamma v(1-v)/sqrt(2 W_n(x, v)) is bounded and smooth,
    accumulating s(tau) per point (Simpson per step) and inverting the
    local cubic Hermite at each point's target arclength. Exact up to
    roundoff for the quartic family, where ds/dtau is constant in tau;
    O(dtau^4) otherwise. Targets beyond the marching window (tails below
    1e-14) clamp to 0/1.

    Agrees with optimal_profile to solver tolerance; kept vectorized so
    diffuse states can be built on large grids.
    """
    points = as_points(points)
    s = np.asarray(s, dtype=float)
    flat_pts = points.reshape(-1, points.shape[-1])
    flat_s = s.reshape(-1)
    out = np.full(flat_s.shape, 0.5)

    a_all = spec.a(flat_pts)
    g_all = spec.b(flat_pts) - spec.a(flat_pts)

    def phi(idx, tau):
        v = 1.0 / (1.0 + np.exp(-tau))
        u = a_all[idx] + g_all[idx] * v
        wn = spec.W(flat_pts[idx], u)
        return g_all[idx] * v * (1.0 - v) \
            / np.sqrt(np.maximum(2.0 * wn, 1e-300))

    for sgn in (1.0, -1.0):
        active = np.flatnonzero(sgn * flat_s > 0)
        if active.size == 0:
            continue
        targets = sgn * flat_s[active]
        s_lo = np.zeros(active.size)
        phi_lo = phi(active, 0.0)
        tau = 0.0
        step = abs(dtau)
        while active.size and tau < tau_stop:
            tau_hi = min(tau + step, tau_stop)
            h = tau_hi - tau
            phi_mid = phi(active, sgn * (tau + 0.5 * h))
            phi_hi = phi(active, sgn * tau_hi)
            s_hi = s_lo + (h / 6.0) * (phi_lo + 4.0 * phi_mid + phi_hi)
            crossed = targets <= s_hi
            if np.any(crossed):
                t = np.clip((targets[crossed] - s_lo[crossed])
                            / np.maximum(s_hi[crossed] - s_lo[crossed], 1e-300),
                            0.0, 1.0)
                p0, p1 = s_lo[crossed], s_hi[crossed]
                m0, m1 = h * phi_lo[crossed], h * phi_hi[crossed]
                for _ in range(4):
                    h00 = (1 + 2 * t) * (1 - t) ** 2
                    h10 = t * (1 - t) ** 2
                    h01 = t * t * (3 - 2 * t)
                    h11 = t * t * (t - 1)
                    val = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1
                    d00 = 6 * t * (t - 1)
                    d10 = (1 - t) * (1 - 3 * t)
                    d01 = -d00
                    d11 = t * (3 * t - 2)
                    der = d00 * p0 + d10 * m0 + d01 * p1 + d11 * m1
                    t = np.clip(t - (val - targets[crossed])
                                / np.maximum(der, 1e-300), 0.0, 1.0)
                tau_star = sgn * (tau + t * h)
                out[active[crossed]] = 1.0 / (1.0 + np.exp(-tau_star))
                keep = ~crossed
                active = active[keep]
                targets = targets[keep]
                s_lo = s_hi[keep]
                phi_lo = phi_hi[keep]
            else:
                s_lo = s_hi
                phi_lo = phi_hi
            tau = tau_hi
        out[active] = 1.0 if sgn > 0 else 0.0

    return out.reshape(s.shape)


# ---------------------------------------------------------------------------
# structural assumptions
# ---------------------------------------------------------------------------

@dataclass
class AssumptionReport:
    """Empirical constants for the growth and derivative-control bounds."""

    c1_quadratic: float
    c2_quadratic: float
    c_coercive: float
    c_derivative_control: float
    n_samples: int
    n_derivative_samples: int
    violations: list = field(default_factory=list)

    def ok(self) -> bool:
        return not self.violations


def validate_assumptions(spec: WellSpec, positions, u_values,
                         fd_step: float = 1e-5, wn_floor: float = 1e-12,
                         blowup: float = 1e6) -> AssumptionReport:
    """Probe the structural bounds on a sample lattice (report-only).

    Checks, empirically over positions x u_values:
      * W >= 0 and W = 0 exactly on the wells, b - a >= delta_sep;
      * quadratic growth near the wells: C1 d^2 <= W <= C2 d^2 where
        d = min(|u-a|, |u-b|) < 1;
      * L2 coercivity W >= |u|^2/C - C (smallest pointwise C reported);
      * derivative control |partial_x sqrt(W_n)| <= C sqrt(W_n), via
        centered differences in x, only where W_n > wn_floor.
    A sampled ratio above ``blowup`` is flagged as a violation.
    """
    pts = as_points(positions).reshape(-1, np.shape(as_points(positions))[-1])
    us = np.asarray(u_values, dtype=float).reshape(-1)
    violations = []

    av = spec.a(pts)
    bv = spec.b(pts)
    gv = bv - av
    if np.any(gv < spec.delta_sep - 1e-12):
        violations.append("b - a drops below delta_sep")
    w_at_a = spec.W(pts, av)
    w_at_b = spec.W(pts, bv)
    if np.max(np.abs(w_at_a)) > 1e-12 or np.max(np.abs(w_at_b)) > 1e-12:
        violations.append("W does not vanish on the wells")

    X = np.repeat(pts, len(us), axis=0)
    U = np.tile(us, len(pts))
    Wv = spec.W(X, U)
    if np.min(Wv) < -1e-12:
        violations.append("W takes negative values")

    A = np.repeat(av, len(us))
    B = np.repeat(bv, len(us))
    d = np.minimum(np.abs(U - A), np.abs(U - B))
    near = (d > 1e-6) & (d < 1.0)
    if np.any(near):
        ratio = Wv[near] / d[near] ** 2
        c1, c2 = float(np.min(ratio)), float(np.max(ratio))
    else:
        c1 = c2 = float("nan")
    if np.isfinite(c2) and c2 > blowup:
        violations.append("quadratic-growth ratio exceeds blow-up threshold")

    c_coer = float(np.max((-Wv + np.sqrt(Wv ** 2 + 4.0 * U ** 2)) / 2.0))

    # derivative control on the normalized well, frozen v = (u - a) / gamma
    V = (U - A) / (B - A)
    wn = normalized_well(spec, X, V)
    mask = wn > wn_floor
    n_deriv = int(np.count_nonzero(mask))
    if n_deriv:
        Xm, Vm = X[mask], V[mask]
        sq = np.sqrt(wn[mask])
        dim = pts.shape[-1]
        grad = np.zeros((n_deriv, dim))
        for ax in range(dim):
            shift = np.zeros(dim)
            shift[ax] = fd_step
            wp = normalized_well(spec, Xm + shift, Vm)
            wm = normalized_well(spec, Xm - shift, Vm)
            grad[:, ax] = (np.sqrt(np.maximum(wp, 0.0))
                           - np.sqrt(np.maximum(wm, 0.0))) / (2.0 * fd_step)
        ratio = np.linalg.norm(grad, axis=1) / sq
        c_deriv = float(np.max(ratio))
        if c_deriv > blowup:
            violations.append("derivative-control ratio exceeds blow-up "
                              "threshold")
    else:
        c_deriv = float("nan")

    return AssumptionReport(c1, c2, c_coer, c_deriv, len(Wv), n_deriv,
                            violations)


# ---------------------------------------------------------------------------
# quartic family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuarticWellSpec(WellSpec):
    """W(x, u) = m(x) |u - a(x)|^2 |u - b(x)|^2 with closed forms attached.

    m is a positive amplitude (m = 1 recovers the canonical quartic);
    sigma = sqrt(2 m) gamma^3 / 6 and the equipartitioned profile is
    logistic with rate sqrt(2 m) gamma.
    """

    amplitude: Scalar = None
    grad_amplitude: Vector = None

    def sigma_exact(self, x) -> np.ndarray:
        x = as_points(x)
        g = self.b(x) - self.a(x)
        return np.sqrt(2.0 * self.amplitude(x)) * g ** 3 / 6.0

    def sigma_n_exact(self, x) -> np.ndarray:
        x = as_points(x)
        g = self.b(x) - self.a(x)
        return np.sqrt(2.0 * self.amplitude(x)) * g ** 2 / 6.0

    def normalized_well_exact(self, x, v) -> np.ndarray:
        x = as_points(x)
        v = np.asarray(v, dtype=float)
        g = self.b(x) - self.a(x)
        return self.amplitude(x) * g ** 4 * v ** 2 * (1.0 - v) ** 2

    def profile_rate(self, x) -> np.ndarray:
        x = as_points(x)
        g = self.b(x) - self.a(x)
        return np.sqrt(2.0 * self.amplitude(x)) * g

    def profile_exact(self, x, s) -> np.ndarray:
        rate = self.profile_rate(x)
        return 1.0 / (1.0 + np.exp(-rate * np.asarray(s, dtype=float)))


def canonical_quartic(a, grad_a, b, grad_b, delta_sep,
                      amplitude=None, grad_amplitude=None,
                      bounds=None) -> QuarticWellSpec:
    """Quartic double well with moving wells and optional amplitude m(x)."""
    if amplitude is None:
        amplitude = lambda x: np.ones(np.shape(x)[:-1])
        grad_amplitude = lambda x: np.zeros(np.shape(x))
    if grad_amplitude is None:
        raise ValueError("grad_amplitude required when amplitude is given")

    def W(x, u):
        return amplitude(x) * (u - a(x)) ** 2 * (u - b(x)) ** 2

    def dW_du(x, u):
        da, db = u - a(x), u - b(x)
        return amplitude(x) * 2.0 * da * db * (da + db)

    def dW_dx(x, u):
        da, db = u - a(x), u - b(x)
        well = -2.0 * (da * db ** 2)[..., None] * grad_a(x) \
               - 2.0 * (da ** 2 * db)[..., None] * grad_b(x)
        return (da ** 2 * db ** 2)[..., None] * grad_amplitude(x) \
            + amplitude(x)[..., None] * well

    return QuarticWellSpec(a=a, b=b, grad_a=grad_a, grad_b=grad_b,
                           W=W, dW_du=dW_du, dW_dx=dW_dx,
                           delta_sep=delta_sep, bounds=bounds,
                           amplitude=amplitude,
                           grad_amplitude=grad_amplitude)


def constant_quartic(a0: float = 0.0, b0: float = 1.0,
                     amplitude: float = 1.0, bounds=None) -> QuarticWellSpec:
    """Canonical quartic with constant wells (and constant amplitude)."""
    return canonical_quartic(
        a=lambda x: a0 * np.ones(np.shape(x)[:-1]),
        grad_a=lambda x: np.zeros(np.shape(x)),
        b=lambda x: b0 * np.ones(np.shape(x)[:-1]),
        grad_b=lambda x: np.zeros(np.shape(x)),
        delta_sep=b0 - a0,
        amplitude=lambda x: amplitude * np.ones(np.shape(x)[:-1]),
        grad_amplitude=lambda x: np.zeros(np.shape(x)),
        bounds=bounds,
    )


def affine_scaled_quartic(offset: float = 1.0, slope: float = 1.0,
                          axis: int = 0, a0: float = 0.0, b0: float = 1.0,
                          bounds=None) -> QuarticWellSpec:
    """Quartic with amplitude m(x) = offset + slope * x_axis.

    Gives the heterogeneous surface tension
    sigma(x) = sqrt(2 (offset + slope x_axis)) (b0-a0)^3 / 6.
    """
    def m(x):
        return offset + slope * x[..., axis]

    def grad_m(x):
        g = np.zeros(np.shape(x))
        g[..., axis] = slope
        return g

    return canonical_quartic(
        a=lambda x: a0 * np.ones(np.shape(x)[:-1]),
        grad_a=lambda x: np.zeros(np.shape(x)),
        b=lambda x: b0 * np.ones(np.shape(x)[:-1]),
        grad_b=lambda x: np.zeros(np.shape(x)),
        delta_sep=b0 - a0, amplitude=m, grad_amplitude=grad_m,
        bounds=bounds,
    )


def exp_scaled_quartic(kappa: float, axis: int = 0, a0: float = 0.0,
                       b0: float = 1.0, bounds=None) -> QuarticWellSpec:
    """Quartic with amplitude m(x) = exp(2 kappa x_axis).

    sigma(x) = (sqrt(2)/6) (b0-a0)^3 exp(kappa x_axis), so a flat 1-d
    interface drifts with exact speed -kappa (sigma'/sigma = kappa).
    """
    def m(x):
        return np.exp(2.0 * kappa * x[..., axis])

    def grad_m(x):
        g = np.zeros(np.shape(x))
        g[..., axis] = 2.0 * kappa * np.exp(2.0 * kappa * x[..., axis])
        return g

    return canonical_quartic(
        a=lambda x: a0 * np.ones(np.shape(x)[:-1]),
        grad_a=lambda x: np.zeros(np.shape(x)),
        b=lambda x: b0 * np.ones(np.shape(x)[:-1]),
        grad_b=lambda x: np.zeros(np.shape(x)),
        delta_sep=b0 - a0, amplitude=m, grad_amplitude=grad_m,
        bounds=bounds,
    )


def linear_wells_quartic(a0: float, a_slope: float, b0: float,
                         b_slope: float, axis: int = 0, delta_sep=None,
                         bounds=None) -> QuarticWellSpec:
    """Canonical quartic whose wells move linearly along one axis."""
    if delta_sep is None:
        if bounds is None:
            raise ValueError("delta_sep or bounds required for moving wells")
        lo, hi = bounds[axis]
        delta_sep = min((b0 - a0) + (b_slope - a_slope) * lo,
                        (b0 - a0) + (b_slope - a_slope) * hi)
        if delta_sep <= 0:
            raise ValueError("wells touch inside the given bounds")

    def mk_grad(slope):
        def grad(x):
            g = np.zeros(np.shape(x))
            g[..., axis] = slope
            return g
        return grad

    return canonical_quartic(
        a=lambda x: a0 + a_slope * x[..., axis],
        grad_a=mk_grad(a_slope),
        b=lambda x: b0 + b_slope * x[..., axis],
        grad_b=mk_grad(b_slope),
        delta_sep=delta_sep, bounds=bounds,
    )
