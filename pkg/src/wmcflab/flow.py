"""Time integration of the heterogeneous Allen-Cahn equation.

Two interchangeable schemes advance du/dt = Lap u - dW_du(x, u)/eps^2 with
zero-flux boundaries:

  * semi-implicit splitting (diffusion implicit, reaction explicit),
    stable for dt <= eps^2 / L where L bounds |d2W/du2| on the invariant
    box;
  * minimizing movements: each step minimizes
        (1/eps) E[u] + 1/(2 dt) ||u - u_prev||_L2^2,
    which gives exact per-step energy decay and, for wells monotone
    outside a box, a maximum principle via clamp comparison.

The inner solvers work with the face-difference quadrature of the
gradient energy, whose exact L2-gradient is the compact 3/5-point Neumann
Laplacian; the public ``energy`` diagnostic uses the centered-difference
quadrature. The two agree to O(h^2) and the ledger inequalities are exact
for the face form.
"""

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericError
from .grid import Field, Grid, gradient_neumann, integrate, laplacian_neumann
from .wells import WellSpec


@dataclass(frozen=True)
class PhaseState:
    """Order parameter snapshot: field, interface width, simulation time."""

    u: Field
    eps: float
    time: float = 0.0

    def replace(self, values: np.ndarray, time: Optional[float] = None) -> "PhaseState":
        return PhaseState(Field(self.u.grid, values), self.eps,
                          self.time if time is None else time)


def energy(state: PhaseState, spec: WellSpec) -> float:
    """E = int W(x, u)/eps + (eps/2) |grad u|^2 (centered-difference form)."""
    pts = state.u.grid.points()
    w = spec.W(pts, state.u.values)
    grad = gradient_neumann(state.u)
    dens = w / state.eps + 0.5 * state.eps * grad.norm() ** 2
    return integrate(Field(state.u.grid, dens))


def _lap(values: np.ndarray, grid: Grid) -> np.ndarray:
    return laplacian_neumann(Field(grid, values)).values


def energy_face(values: np.ndarray, grid: Grid, eps: float,
                spec: WellSpec, pts=None) -> float:
    """Discrete energy with face-difference gradient quadrature."""
    if pts is None:
        pts = grid.points()
    w = spec.W(pts, values)
    total = float(np.sum(w)) / eps
    h = grid.spacing
    if grid.dim == 1:
        total += 0.5 * eps * float(np.sum(np.diff(values) ** 2)) / h[0] ** 2
    else:
        total += 0.5 * eps * float(np.sum(np.diff(values, axis=0) ** 2)) / h[0] ** 2
        total += 0.5 * eps * float(np.sum(np.diff(values, axis=1) ** 2)) / h[1] ** 2
    return total * grid.cell_volume


def reaction_lipschitz(spec: WellSpec, grid: Grid, box, n_u: int = 41,
                       max_pts: int = 4096) -> float:
    """Estimate max |d2W/du2| over grid x box by differencing dW_du."""
    pts = grid.points().reshape(-1, grid.dim)
    if len(pts) > max_pts:
        stride = int(np.ceil(len(pts) / max_pts))
        pts = pts[::stride]
    us = np.linspace(box[0], box[1], n_u)
    delta = 1e-5 * max(1.0, box[1] - box[0])
    X = np.repeat(pts, n_u, axis=0)
    U = np.tile(us, len(pts))
    d2 = (spec.dW_du(X, U + delta) - spec.dW_du(X, U - delta)) / (2 * delta)
    return float(np.max(np.abs(d2)))


def stability_timestep(state: PhaseState, spec: WellSpec,
                       box=None, safety: float = 1.0) -> float:
    """Largest admissible semi-implicit step eps^2 / L_W on the value box."""
    if box is None:
        lo, hi = float(np.min(state.u.values)), float(np.max(state.u.values))
        pad = 0.05 * max(hi - lo, 1.0)
        box = (lo - pad, hi + pad)
    lw = reaction_lipschitz(spec, state.u.grid, box)
    return safety * state.eps ** 2 / max(lw, 1e-30)


def _dct_eigenvalues(grid: Grid):
    """Eigenvalues of the mirrored-ghost Laplacian in the cosine basis."""
    h = grid.spacing
    lams = []
    for ax, n in enumerate(grid.cells):
        k = np.arange(n)
        lams.append(-4.0 * np.sin(np.pi * k / (2 * n)) ** 2 / h[ax] ** 2)
    if grid.dim == 1:
        return lams[0]
    return lams[0][:, None] + lams[1][None, :]


def _spectral_solve(grid: Grid, dt: float, rhs: np.ndarray) -> np.ndarray:
    """Direct solve of (I - dt Lap) u = rhs; the mirrored Neumann stencil
    diagonalizes exactly in the DCT-II basis."""
    from scipy.fft import dctn, idctn
    lam = _dct_eigenvalues(grid)
    coeff = dctn(rhs, type=2, norm="ortho")
    return idctn(coeff / (1.0 - dt * lam), type=2, norm="ortho")


def _cg(apply_op, rhs, tol: float = 1e-10, max_iter: int = 20000):
    """Plain conjugate gradient on arrays; returns (solution, residual)."""
    x = rhs.copy()
    r = rhs - apply_op(x)
    p = r.copy()
    rr = float(np.sum(r * r))
    target = max(tol, 1e-14 * np.sqrt(float(np.sum(rhs * rhs))))
    for _ in range(max_iter):
        if np.sqrt(rr) <= target:
            return x, float(np.sqrt(rr))
        ap = apply_op(p)
        alpha = rr / float(np.sum(p * ap))
        x = x + alpha * p
        r = r - alpha * ap
        rr_new = float(np.sum(r * r))
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise NumericError("conjugate gradient did not reach the residual target",
                       achieved=float(np.sqrt(rr)), last_iterate=x)


def _semiimplicit(state: PhaseState, spec: WellSpec, dt: float,
                  pts=None, cg_tol: float = 1e-10, solver: str = "cg"):
    grid = state.u.grid
    if pts is None:
        pts = grid.points()
    u = state.u.values
    rhs = u - (dt / state.eps ** 2) * spec.dW_du(pts, u)
    if solver == "spectral":
        sol = _spectral_solve(grid, dt, rhs)
        resid = float(np.sqrt(np.sum((sol - dt * _lap(sol, grid) - rhs) ** 2)))
    elif solver == "cg":
        sol, resid = _cg(lambda v: v - dt * _lap(v, grid), rhs, tol=cg_tol)
    else:
        raise ValueError(f"unknown solver: {solver}")
    return sol, resid


def step_semiimplicit(state: PhaseState, spec: WellSpec, dt: float,
                      lw_bound: Optional[float] = None,
                      cg_tol: float = 1e-10,
                      solver: str = "cg") -> PhaseState:
    """One step of (I - dt Lap) u_new = u_old - (dt/eps^2) dW_du(x, u_old).

    Rejects dt above the stability bound eps^2 / L_W (pass ``lw_bound`` to
    reuse a precomputed Lipschitz estimate). The implicit system is solved
    by conjugate gradients to residual ``cg_tol``; solver="spectral"
    solves the same system directly in the cosine basis (the two agree to
    the CG tolerance; the direct route is there for long fine-step runs).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if lw_bound is None:
        bound = stability_timestep(state, spec)
    else:
        bound = state.eps ** 2 / lw_bound
    if dt > bound * (1 + 1e-9):
        raise ValueError(f"dt={dt} exceeds the stability bound {bound}")
    sol, _ = _semiimplicit(state, spec, dt, cg_tol=cg_tol, solver=solver)
    return state.replace(sol, time=state.time + dt)


# ---------------------------------------------------------------------------
# minimizing movements
# ---------------------------------------------------------------------------

@dataclass
class MinMovRecord:
    time: float
    energy: float            # face-form E after the step
    movement_sq: float       # ||u_i - u_{i-1}||_{L2}^2
    slack: float             # E_prev - E_new - (eps/2h)||du||^2, >= 0
    inner_residual: float
    iterations: int


def _bb_descent(objective, gradient, u0, alpha0, max_iter, grid,
                obj_tol=1e-12, grad_tol=1e-9, project=None,
                history: int = 10):
    """Barzilai-Borwein descent with nonmonotone Armijo backtracking.

    ``project`` (if given) restores the constraint after every trial step.
    Returns (u, J, grad_norm, iterations).
    """
    vol = grid.cell_volume
    u = u0.copy()
    if project is not None:
        u = project(u)
    J = objective(u)
    g = gradient(u)
    recent = [J]
    alpha = alpha0
    u_prev = None
    g_prev = None
    for it in range(max_iter):
        if project is not None:
            d = -(g - np.mean(g))
        else:
            d = -g
        gd = float(np.sum(g * d)) * vol
        gnorm = np.sqrt(float(np.sum(d * d)) * vol)
        if gnorm <= grad_tol:
            return u, J, gnorm, it
        # Barzilai-Borwein step from the previous displacement pair
        if u_prev is not None:
            s = u - u_prev
            y = g - g_prev
            sy = float(np.sum(s * y)) * vol
            ss = float(np.sum(s * s)) * vol
            if sy > 1e-300:
                alpha = min(max(ss / sy, 1e-6 * alpha0), 1e6 * alpha0)
        ref = max(recent)
        step = alpha
        for _ in range(60):
            trial = u + step * d
            if project is not None:
                trial = project(trial)
            J_trial = objective(trial)
            if J_trial <= ref + 1e-4 * step * gd:
                break
            step *= 0.5
        else:
            return u, J, gnorm, it
        u_prev, g_prev = u, g
        u, J_new = trial, J_trial
        g = gradient(u)
        recent.append(J_new)
        if len(recent) > history:
            recent.pop(0)
        if abs(J - J_new) <= obj_tol * max(1.0, abs(J_new)):
            return u, J_new, np.sqrt(float(np.sum(g * g)) * vol), it + 1
        J = J_new
    raise NumericError("descent did not converge within the iteration budget",
                       last_iterate=u)


def step_minmov(state: PhaseState, spec: WellSpec, h_step: float,
                trunc: Optional[float] = None, max_iter: int = 2000):
    """One minimizing-movements step.

    Returns (new_state, MinMovRecord). The record's slack certifies the
    exact minimality comparison against the previous iterate; with
    ``trunc`` = C0 given (wells monotone outside [-C0, C0]) the clamped
    candidate is taken whenever it does not increase the objective, which
    enforces the maximum principle exactly.
    """
    if h_step <= 0:
        raise ValueError("h_step must be positive")
    grid = state.u.grid
    pts = grid.points()
    eps = state.eps
    u_prev = state.u.values
    vol = grid.cell_volume

    def objective(u):
        move = float(np.sum((u - u_prev) ** 2)) * vol
        return energy_face(u, grid, eps, spec, pts) / eps + move / (2 * h_step)

    def gradient(u):
        return (spec.dW_du(pts, u) / eps - eps * _lap(u, grid)) / eps \
            + (u - u_prev) / h_step

    lw = reaction_lipschitz(spec, grid,
                            (float(np.min(u_prev)) - 0.5,
                             float(np.max(u_prev)) + 0.5))
    lip = lw / eps ** 2 + 4 * grid.dim / float(np.min(grid.spacing)) ** 2 \
        + 1.0 / h_step
    u, J, gnorm, iters = _bb_descent(objective, gradient, u_prev,
                                     alpha0=1.0 / lip, max_iter=max_iter,
                                     grid=grid)
    J_prev = objective(u_prev)
    if J > J_prev:
        u, J = u_prev.copy(), J_prev
    if trunc is not None:
        clamped = np.clip(u, -trunc, trunc)
        J_clamped = objective(clamped)
        if J_clamped <= J:
            u, J = clamped, J_clamped
    move_sq = float(np.sum((u - u_prev) ** 2)) * vol
    slack = eps * (J_prev - J)  # = E_prev - E_new - (eps/2h)||du||^2 exactly
    e_new = energy_face(u, grid, eps, spec, pts)
    record = MinMovRecord(time=state.time + h_step, energy=e_new,
                          movement_sq=move_sq, slack=slack,
                          inner_residual=gnorm, iterations=iters)
    return state.replace(u, time=state.time + h_step), record


# ---------------------------------------------------------------------------
# runs and dissipation bookkeeping
# ---------------------------------------------------------------------------

@dataclass
class DissipationLedger:
    """Per-step energy and dissipation records of a gradient-flow run.

    ``defect`` tracks |E(0) - E(t) - sum of eps ||du/dt||^2 dt|, the
    discrete residue of the optimal dissipation identity; it vanishes at
    first order in dt for consistent schemes.
    """

    e_initial: float
    steps: list = field(default_factory=list)
    times: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    dissipation_increments: list = field(default_factory=list)
    defects: list = field(default_factory=list)
    inner_residuals: list = field(default_factory=list)
    minimality_slacks: list = field(default_factory=list)

    def append(self, step, time, energy_val, increment, residual, slack=None):
        self.steps.append(step)
        self.times.append(time)
        self.energies.append(energy_val)
        self.dissipation_increments.append(increment)
        total = float(np.sum(self.dissipation_increments))
        self.defects.append(abs(self.e_initial - energy_val - total))
        self.inner_residuals.append(residual)
        self.minimality_slacks.append(slack)

    @property
    def final_defect(self) -> float:
        return self.defects[-1] if self.defects else 0.0

    def energy_nonincreasing(self, tol: float = 0.0) -> bool:
        es = [self.e_initial] + self.energies
        return all(e1 <= e0 + tol for e0, e1 in zip(es, es[1:]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "time", "energy",
                             "dissipation_increment", "defect",
                             "inner_residual"])
            for row in zip(self.steps, self.times, self.energies,
                           self.dissipation_increments, self.defects,
                           self.inner_residuals):
                writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def run(state: PhaseState, spec: WellSpec, scheme: str, dt: float,
        t_end: float, trunc: Optional[float] = None,
        snapshot_times=(), cg_tol: float = 1e-10, solver: str = "cg"):
    """Advance to t_end recording the dissipation ledger.

    scheme is "semi_implicit" or "minimizing_movements". Returns
    (final_state, ledger) or (final_state, ledger, snapshots) when
    ``snapshot_times`` is nonempty; snapshots are the states right after
    the first step reaching each requested time.
    """
    if t_end <= state.time:
        raise ValueError("t_end must exceed the current time")
    grid = state.u.grid
    pts = grid.points()
    eps = state.eps
    n_steps = int(round((t_end - state.time) / dt))
    if abs(n_steps * dt - (t_end - state.time)) > 1e-9 * dt:
        n_steps = int(np.ceil((t_end - state.time) / dt))
    ledger = DissipationLedger(e_initial=energy_face(state.u.values, grid,
                                                     eps, spec, pts))
    lw = None
    if scheme == "semi_implicit":
        lo, hi = float(np.min(state.u.values)), float(np.max(state.u.values))
        pad = 0.05 * max(hi - lo, 1.0)
        lw = reaction_lipschitz(spec, grid, (lo - pad, hi + pad))
        if dt > eps ** 2 / lw * (1 + 1e-9):
            raise ValueError(f"dt={dt} exceeds the stability bound "
                             f"{eps ** 2 / lw}")
    snapshots = []
    want = sorted(snapshot_times)
    for k in range(1, n_steps + 1):
        u_old = state.u.values
        if scheme == "semi_implicit":
            sol, resid = _semiimplicit(state, spec, dt, pts=pts,
                                       cg_tol=cg_tol, solver=solver)
            state = state.replace(sol, time=state.time + dt)
            e_now = energy_face(sol, grid, eps, spec, pts)
            slack = None
        elif scheme == "minimizing_movements":
            state, rec = step_minmov(state, spec, dt, trunc=trunc)
            e_now, resid, slack = rec.energy, rec.inner_residual, rec.slack
        else:
            raise ValueError(f"unknown scheme: {scheme}")
        increment = eps / dt * float(np.sum((state.u.values - u_old) ** 2)) \
            * grid.cell_volume
        ledger.append(k, state.time, e_now, increment, resid, slack)
        while want and state.time >= want[0] - 1e-12:
            snapshots.append(state)
            want.pop(0)
    if snapshot_times:
        return state, ledger, snapshots
    return state, ledger


# ---------------------------------------------------------------------------
# mass-constrained minimization
# ---------------------------------------------------------------------------

@dataclass
class ConstrainedMinimum:
    state: PhaseState
    lam: float          # Lagrange multiplier: mean of eps Lap u - dW_du/eps
    residual: float     # pointwise std of the same field (stationarity)
    iterations: int


def minimize_constrained(spec: WellSpec, grid: Grid, eps: float, mass: float,
                         init: Field, tol_residual: float = 2e-4,
                         max_iter: int = 60000) -> ConstrainedMinimum:
    """Projected-gradient minimization of E_eps subject to mean(u) = mass.

    Each descent step is followed by an exact additive mean correction.
    The multiplier is the spatial mean of eps Lap u - dW_du(x, u)/eps and
    the returned residual (its standard deviation) certifies pointwise
    stationarity of the constrained first-order conditions.
    """
    pts = grid.points()
    mean_a = float(np.mean(spec.a(pts)))
    mean_b = float(np.mean(spec.b(pts)))
    if not (min(mean_a, mean_b) - 1e-12 <= mass <= max(mean_a, mean_b) + 1e-12):
        raise ValueError(f"mass {mass} outside the admissible range "
                         f"[{mean_a}, {mean_b}]")

    def project(u):
        return u + (mass - float(np.mean(u)))

    def objective(u):
        return energy_face(u, grid, eps, spec, pts)

    def gradient(u):
        return spec.dW_du(pts, u) / eps - eps * _lap(u, grid)

    lw = reaction_lipschitz(spec, grid, (float(np.min(init.values)) - 0.5,
                                         float(np.max(init.values)) + 0.5))
    lip = lw / eps + eps * 4 * grid.dim / float(np.min(grid.spacing)) ** 2
    u = project(init.values.copy())
    alpha0 = 1.0 / lip
    vol = grid.cell_volume
    alpha = alpha0
    J = objective(u)
    g = gradient(u)
    recent = [J]
    u_prev = g_prev = None
    for it in range(max_iter):
        lam_field = -g
        resid = float(np.std(lam_field))
        if resid <= tol_residual:
            state = PhaseState(Field(grid, u), eps)
            return ConstrainedMinimum(state=state,
                                      lam=float(np.mean(lam_field)),
                                      residual=resid, iterations=it)
        d = -(g - np.mean(g))
        gd = float(np.sum(g * d)) * vol
        if u_prev is not None:
            s = u - u_prev
            y = g - g_prev
            sy = float(np.sum(s * y)) * vol
            ss = float(np.sum(s * s)) * vol
            if sy > 1e-300:
                alpha = min(max(ss / sy, 1e-6 * alpha0), 1e6 * alpha0)
        ref = max(recent)
        step = alpha
        for _ in range(60):
            trial = project(u + step * d)
            J_trial = objective(trial)
            if J_trial <= ref + 1e-4 * step * gd:
                break
            step *= 0.5
        u_prev, g_prev = u, g
        u, J = trial, J_trial
        g = gradient(u)
        recent.append(J)
        if len(recent) > 10:
            recent.pop(0)
    raise NumericError("constrained minimization did not reach the "
                       "stationarity tolerance",
                       last_iterate=PhaseState(Field(grid, u), eps))
