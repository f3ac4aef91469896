"""Sharp-interface references for weighted mean curvature flow.

Sign conventions, fixed here once and imported everywhere:

  * the b-phase A carries the inner normal n_A (pointing into A);
  * H_A = -div n_A, so H = (N-1)/R for a ball;
  * V is the normal speed in the direction n_A, so V = -dR/dt for a
    shrinking ball and V = dp/dt for a 1-d point with the b-phase on the
    right (orientation +1).

With these conventions the flow sigma V = sigma H_A - grad sigma . n_A
reads, for radial sigma(rho) about the ball center,

    dR/dt = -(N-1)/R - sigma'(R)/sigma(R)

and for a 1-d point interface dp/dt = -sigma'(p)/sigma(p).
"""

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericError
from .quadrature import adaptive_gauss_legendre
from .wells import WellSpec, as_points, normalized_well_dx, surface_tension


# ---------------------------------------------------------------------------
# surface tension as an evaluable field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceTension:
    """sigma and grad sigma as position callables ((..., d) -> ... )."""

    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]


def constant_sigma(c: float) -> SurfaceTension:
    return SurfaceTension(
        value=lambda x: c * np.ones(np.shape(x)[:-1]),
        grad=lambda x: np.zeros(np.shape(x)),
    )


def sigma_from_well(spec: WellSpec, tol: float = 1e-10) -> SurfaceTension:
    """sigma by adaptive quadrature of the well; grad sigma by quadrature of
    the spatial partial (the endpoint terms vanish since W = 0 on the wells).
    """
    def value(x):
        return surface_tension(spec, x, tol=tol)

    def grad(x):
        x = as_points(x)
        pts = x.reshape(-1, x.shape[-1])
        dim = x.shape[-1]

        def integrand(t):
            # d/dx sqrt(2 W_n) * gamma = partial_x W_n / sqrt(2 W_n) * gamma
            P = pts[None, :, :].repeat(len(t), axis=0)
            V = t[:, None] * np.ones(len(pts))[None, :]
            wn = np.maximum(
                spec.W(P, spec.a(P) + (spec.b(P) - spec.a(P)) * V), 1e-300)
            dwn = normalized_well_dx(spec, P, V)
            g = (spec.b(pts) - spec.a(pts))[None, :, None]
            vals = g * dwn / np.sqrt(2.0 * wn)[..., None]
            return vals.reshape(len(t), -1)

        val, _ = adaptive_gauss_legendre(integrand, 0.0, 1.0, tol=tol)
        # grad sigma = grad(gamma sigma_n) = sigma_n grad gamma + gamma grad sigma_n;
        # integrating gamma * d/dx sqrt(2 W_n) gives gamma grad sigma_n only,
        # so add the separation part.
        from .wells import grad_gamma, sigma_n as sn
        g1 = np.asarray(val).reshape(pts.shape)
        g2 = np.asarray(sn(spec, pts, tol=tol)).reshape(len(pts), 1) \
            * grad_gamma(spec, pts)
        out = (g1 + g2).reshape(x.shape)
        return out

    return SurfaceTension(value=value, grad=grad)


def sigma_field_of(spec: WellSpec, tol: float = 1e-10) -> SurfaceTension:
    """Surface tension of a well: closed form for the quartic family
    (sigma = sqrt(2 m) gamma^3 / 6), adaptive quadrature otherwise."""
    from .wells import QuarticWellSpec, grad_gamma

    if not isinstance(spec, QuarticWellSpec):
        return sigma_from_well(spec, tol=tol)

    def value(x):
        return spec.sigma_exact(x)

    def grad(x):
        x = as_points(x)
        m = spec.amplitude(x)
        g = spec.b(x) - spec.a(x)
        dm = spec.grad_amplitude(x)
        dg = grad_gamma(spec, x)
        return (g ** 3 / (6.0 * np.sqrt(2.0 * m)))[..., None] * dm \
            + (np.sqrt(2.0 * m) * g ** 2 / 2.0)[..., None] * dg

    return SurfaceTension(value=value, grad=grad)


@dataclass(frozen=True)
class ScalarSigma:
    """sigma of one scalar variable (radius or 1-d position)."""

    value: Callable[[float], float]
    deriv: Callable[[float], float]

    def about(self, center) -> SurfaceTension:
        """Lift a radial profile to a SurfaceTension about ``center``."""
        c = np.asarray(center, dtype=float)

        def val(x):
            rho = np.linalg.norm(np.asarray(x) - c, axis=-1)
            return self.value(rho)

        def grad(x):
            dx = np.asarray(x, dtype=float) - c
            rho = np.maximum(np.linalg.norm(dx, axis=-1), 1e-300)
            return (self.deriv(rho) / rho)[..., None] * dx

        return SurfaceTension(value=val, grad=grad)

    def along_axis(self, axis: int = 0, dim: int = 1) -> SurfaceTension:
        def val(x):
            return self.value(np.asarray(x)[..., axis])

        def grad(x):
            g = np.zeros(np.shape(x))
            g[..., axis] = self.deriv(np.asarray(x)[..., axis])
            return g

        return SurfaceTension(value=val, grad=grad)


def constant_scalar_sigma(c: float) -> ScalarSigma:
    return ScalarSigma(value=lambda r: c * np.ones_like(np.asarray(r, float)),
                       deriv=lambda r: np.zeros_like(np.asarray(r, float)))


def exponential_scalar_sigma(kappa: float, scale: float = 1.0) -> ScalarSigma:
    return ScalarSigma(value=lambda r: scale * np.exp(kappa * np.asarray(r, float)),
                       deriv=lambda r: scale * kappa * np.exp(kappa * np.asarray(r, float)))


# ---------------------------------------------------------------------------
# parametrized interfaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Point1D:
    """1-d point interface; orientation +1 puts the b-phase on the right."""

    p: float
    orientation: int = 1

    @property
    def dim(self) -> int:
        return 1

    def signed_distance(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        val = x[..., 0] if x.shape and x.shape[-1] == 1 else x
        return self.orientation * (val - self.p)

    def inner_normal(self) -> float:
        return float(self.orientation)

    def curvature(self) -> float:
        return 0.0

    def boundary_nodes(self, n: int = 1):
        pts = np.array([[self.p]])
        weights = np.array([1.0])
        normals = np.array([[float(self.orientation)]])
        return pts, weights, normals


@dataclass(frozen=True)
class Sphere:
    """Ball-shaped b-phase A; the inner normal points toward the center."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center",
                           tuple(float(c) for c in self.center))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    def signed_distance(self, x) -> np.ndarray:
        dx = np.asarray(x, dtype=float) - np.array(self.center)
        return self.radius - np.linalg.norm(dx, axis=-1)

    def curvature(self) -> float:
        return (self.dim - 1) / self.radius

    def boundary_nodes(self, n: int = 1024):
        """Uniform angular nodes with trapezoid weights (2-d spheres)."""
        if self.dim != 2:
            raise NotImplementedError("boundary quadrature implemented in 2-d")
        theta = 2.0 * np.pi * np.arange(n) / n
        e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        pts = np.array(self.center) + self.radius * e
        weights = np.full(n, 2.0 * np.pi * self.radius / n)
        normals = -e
        return pts, weights, normals


def indicator(interface, x) -> np.ndarray:
    return (interface.signed_distance(x) > 0).astype(float)


def weighted_perimeter(interface, sigma: SurfaceTension,
                       n_nodes: int = 1024) -> float:
    """E = int_{boundary} sigma dH^{N-1}; sigma(p) for a 1-d point."""
    pts, weights, _ = interface.boundary_nodes(n_nodes)
    return float(np.sum(weights * sigma.value(pts)))


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class SharpTrajectory:
    """Time-sampled interface with a dense position evaluator.

    ``positions`` holds R(t) for spheres or p(t) for 1-d points;
    ``velocities`` holds V in the n_A convention at the sample times.
    """

    kind: str                      # "sphere" | "point1d"
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    center: Optional[tuple] = None
    orientation: int = 1
    truncated: bool = False
    _dense: Optional[Callable] = None
    _vel: Optional[Callable] = None

    def position(self, t):
        t = np.asarray(t, dtype=float)
        if self._dense is not None:
            return self._dense(t)
        return np.interp(t, self.times, self.positions)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        if self._vel is not None:
            return self._vel(t)
        return np.interp(t, self.times, self.velocities)

    def interface_at(self, t):
        pos = float(self.position(t))
        if self.kind == "sphere":
            return Sphere(self.center, pos)
        return Point1D(pos, self.orientation)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])


def evolve_radial(r0: float, sigma: ScalarSigma, t_end: float,
                  tol: float = 1e-10, ndim: int = 2, center=(0.0, 0.0),
                  r_min: float = 1e-3, n_samples: int = 257) -> SharpTrajectory:
    """Integrate dR/dt = -(N-1)/R - sigma'(R)/sigma(R) from R(0) = r0.

    Stops (and flags truncation) if R reaches ``r_min`` before ``t_end``.
    For constant sigma the closed form is R(t) = sqrt(r0^2 - 2(N-1)t).
    """
    if r0 <= 0:
        raise ValueError("r0 must be positive")

    def rhs(_, y):
        r = y[0]
        return [-(ndim - 1) / r - float(sigma.deriv(r)) / float(sigma.value(r))]

    def extinction(_, y):
        return y[0] - r_min

    extinction.terminal = True

    sol = solve_ivp(rhs, (0.0, t_end), [r0], method="RK45", rtol=tol,
                    atol=tol, dense_output=True, events=[extinction])
    if not sol.success:
        raise NumericError("radial flow integration failed: " + sol.message)
    truncated = sol.status == 1
    t_stop = sol.t[-1]
    ts = np.linspace(0.0, t_stop, n_samples)
    rs = sol.sol(ts)[0]
    vel = np.array([-rhs(t, [r])[0] for t, r in zip(ts, rs)])  # V = -dR/dt

    def dense(t):
        tt = np.clip(np.asarray(t, dtype=float), 0.0, t_stop)
        return sol.sol(np.atleast_1d(tt))[0].reshape(np.shape(t))

    def vel_dense(t):
        r = dense(t)
        return (ndim - 1) / r + sigma.deriv(r) / sigma.value(r)

    return SharpTrajectory(kind="sphere", times=ts, positions=rs,
                           velocities=vel, center=tuple(center),
                           truncated=truncated, _dense=dense, _vel=vel_dense)


def evolve_point1d(p0: float, sigma: ScalarSigma, t_end: float,
                   tol: float = 1e-10, orientation: int = 1,
                   domain=(0.0, 1.0), margin: float = 0.0,
                   n_samples: int = 257) -> SharpTrajectory:
    """Integrate dp/dt = -sigma'(p)/sigma(p); the point slides toward
    lower sigma. Truncates if p leaves the domain margin."""

    lo, hi = domain

    def rhs(_, y):
        p = y[0]
        return [-float(sigma.deriv(p)) / float(sigma.value(p))]

    def exit_low(_, y):
        return y[0] - (lo + margin)

    def exit_high(_, y):
        return (hi - margin) - y[0]

    exit_low.terminal = True
    exit_high.terminal = True

    sol = solve_ivp(rhs, (0.0, t_end), [p0], method="RK45", rtol=tol,
                    atol=tol, dense_output=True, events=[exit_low, exit_high])
    if not sol.success:
        raise NumericError("point flow integration failed: " + sol.message)
    truncated = sol.status == 1
    t_stop = sol.t[-1]
    ts = np.linspace(0.0, t_stop, n_samples)
    ps = sol.sol(ts)[0]
    vel = np.array([orientation * rhs(t, [p])[0] for t, p in zip(ts, ps)])

    def dense(t):
        tt = np.clip(np.asarray(t, dtype=float), 0.0, t_stop)
        return sol.sol(np.atleast_1d(tt))[0].reshape(np.shape(t))

    def vel_dense(t):
        p = dense(t)
        return -orientation * sigma.deriv(p) / sigma.value(p)

    return SharpTrajectory(kind="point1d", times=ts, positions=ps,
                           velocities=vel, orientation=orientation,
                           truncated=truncated, _dense=dense, _vel=vel_dense)


# ---------------------------------------------------------------------------
# BV-solution residuals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpaceTimeTest:
    """Scalar space-time test function with analytic time derivative."""

    value: Callable[[np.ndarray, float], np.ndarray]
    dt: Callable[[np.ndarray, float], np.ndarray]


def _bulk_integral(traj: SharpTrajectory, fn, t: float, n_r: int = 64,
                   n_ang: int = 128, domain=None) -> float:
    """int_{A(t)} fn(x) dx for the parametrized phase."""
    if traj.kind == "sphere":
        R = float(traj.position(t))
        gl_nodes, gl_w = np.polynomial.legendre.leggauss(n_r)
        r = 0.5 * R * (gl_nodes + 1.0)
        wr = 0.5 * R * gl_w
        theta = 2.0 * np.pi * np.arange(n_ang) / n_ang
        wt = 2.0 * np.pi / n_ang
        e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        pts = np.array(traj.center) + r[:, None, None] * e[None, :, :]
        vals = fn(pts)
        return float(np.sum(vals * r[:, None] * wr[:, None] * wt))
    # point1d: A is the half-interval on the orientation side
    lo, hi = domain
    p = float(traj.position(t))
    a, b = (p, hi) if traj.orientation > 0 else (lo, p)
    gl_nodes, gl_w = np.polynomial.legendre.leggauss(n_r)
    x = 0.5 * (b - a) * (gl_nodes + 1.0) + a
    w = 0.5 * (b - a) * gl_w
    vals = fn(x[:, None])
    return float(np.sum(vals * w))


def transport_residual(traj: SharpTrajectory, zeta: SpaceTimeTest,
                       t_prime: float, n_t: int = 512,
                       n_boundary: int = 256, domain=None) -> float:
    """LHS - RHS of the distributional normal-velocity identity.

    LHS: int_{A(T')} zeta(., T') - int_{A(0)} zeta(., 0)
    RHS: int_0^T' int_{A(t)} dt_zeta dx dt
         - int_0^T' int_{boundary} V zeta dH dt

    Time quadrature is the trapezoid rule on ``n_t`` intervals (second
    order under step halving).
    """
    lhs = (_bulk_integral(traj, lambda x: zeta.value(x, t_prime), t_prime,
                          domain=domain)
           - _bulk_integral(traj, lambda x: zeta.value(x, 0.0), 0.0,
                            domain=domain))

    ts = np.linspace(0.0, t_prime, n_t + 1)

    def integrand(t):
        bulk = _bulk_integral(traj, lambda x: zeta.dt(x, t), t, domain=domain)
        iface = traj.interface_at(t)
        pts, w, _ = iface.boundary_nodes(n_boundary)
        v = float(traj.velocity(t))
        surf = float(np.sum(w * v * zeta.value(pts, t)))
        return bulk - surf

    vals = np.array([integrand(t) for t in ts])
    rhs = float(np.trapezoid(vals, ts))
    return lhs - rhs


def motion_law_residual(interface, V, sigma: SurfaceTension, psi,
                        n_nodes: int = 1024) -> float:
    """Boundary quadrature of
       int sigma V (psi . n) + int sigma (Id - n x n):grad psi
       + int grad sigma . psi,
    which vanishes for true solutions of the weighted flow."""
    pts, w, normals = interface.boundary_nodes(n_nodes)
    V = np.broadcast_to(np.asarray(V, dtype=float), w.shape)
    sig = sigma.value(pts)
    psi_vals = psi.psi(pts)
    jac = psi.jac(pts)
    tr = np.trace(jac, axis1=-2, axis2=-1)
    n_jn = np.einsum("...i,...ij,...j->...", normals, jac, normals)
    term_v = np.sum(w * sig * V * np.sum(psi_vals * normals, axis=-1))
    term_curv = np.sum(w * sig * (tr - n_jn))
    term_grad = np.sum(w * np.sum(sigma.grad(pts) * psi_vals, axis=-1))
    return float(term_v + term_curv + term_grad)


@dataclass(frozen=True)
class DissipationCheck:
    lhs: float      # E[T'] + int_0^T' int sigma V^2
    rhs: float      # E[0]
    slack: float    # rhs - lhs, >= -tol for admissible flows


def dissipation_check(traj: SharpTrajectory, sigma: SurfaceTension,
                      t_prime: float, n_t: int = 1024,
                      n_boundary: int = 512,
                      velocity_scale: float = 1.0) -> DissipationCheck:
    """Optimal-dissipation comparison E[T'] + int sigma V^2 vs E[0].

    ``velocity_scale`` rescales V inside the dissipation integral only
    (used to demonstrate that inflated velocities violate the inequality).
    """
    ts = np.linspace(0.0, t_prime, n_t + 1)

    def diss(t):
        iface = traj.interface_at(t)
        pts, w, _ = iface.boundary_nodes(n_boundary)
        v = velocity_scale * float(traj.velocity(t))
        return float(np.sum(w * sigma.value(pts) * v * v))

    vals = np.array([diss(t) for t in ts])
    integral = float(np.trapezoid(vals, ts))
    e_end = weighted_perimeter(traj.interface_at(t_prime), sigma, n_boundary)
    e_start = weighted_perimeter(traj.interface_at(0.0), sigma, n_boundary)
    lhs = e_end + integral
    return DissipationCheck(lhs=lhs, rhs=e_start, slack=e_start - lhs)


def trajectory_to_csv(traj: SharpTrajectory, sigma: SurfaceTension,
                      path) -> None:
    """CSV export: t,R_or_p,V,energy at the sample times."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "R_or_p", "V", "energy"])
        for t, p, v in zip(traj.times, traj.positions, traj.velocities):
            e = weighted_perimeter(traj.interface_at(t), sigma)
            writer.writerow([repr(float(t)), repr(float(p)), repr(float(v)),
                             repr(float(e))])


def trajectory_from_samples(kind: str, times, positions, center=None,
                            orientation: int = 1) -> SharpTrajectory:
    """Build a trajectory from sampled data (e.g. extracted interfaces);
    velocities come from centered difference quotients."""
    times = np.asarray(times, dtype=float)
    positions = np.asarray(positions, dtype=float)
    dpdt = np.gradient(positions, times)
    vel = -dpdt if kind == "sphere" else orientation * dpdt
    return SharpTrajectory(kind=kind, times=times, positions=positions,
                           velocities=vel, center=center,
                           orientation=orientation)
