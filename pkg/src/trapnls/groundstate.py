"""Stationary states: shooting classification, bisection and Newton polish.

The radial profile solves  -L phi + (1 + r^2) phi = r^mu g(phi)  (focusing
sign).  Shooting integrates the equivalent ODE
    phi'' + phi'/r = (1 + r^2) phi - r^mu g(phi)
from the regular series start phi(r) = a (1 + r^2/4) and classifies the
trajectory; bisection on a squeezes the separatrix, and a damped Newton
iteration on the grid removes the remaining O(h_ode^4) shooting error.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.interpolate import PchipInterpolator

from . import functionals, nonlin
from .grid import RadialGrid, RadialField, apply_laplacian, build_grid, weighted_norm, write_field_csv
from .nonlin import NonlinearitySpec, SaturationError


class GroundStateError(RuntimeError):
    """Solver failure; carries whatever trace was accumulated."""

    def __init__(self, message, trace=None, last_iterate=None):
        super().__init__(message)
        self.trace = trace or {}
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class OdeParams:
    r_max: float
    h_ode: float
    phi_cap_factor: float = 10.0
    decay_tol: float = 1e-10

    @staticmethod
    def for_grid(grid: RadialGrid) -> "OdeParams":
        return OdeParams(r_max=1.5 * grid.R, h_ode=grid.h / 4.0)


@dataclass
class ShootOutcome:
    kind: str  # "diverges" | "crosses" | "decays"
    r_event: float
    trajectory: tuple | None = None  # (r array, phi array) when requested


POHOZAEV_PAIRS = ((1, 0), (0, 1), (1, -1), (2, -1), (1, 1))


@dataclass
class GroundStateResult:
    phi: RadialField
    a_star: float
    residual: float
    pohozaev: dict
    m: float
    instability_index: float
    method_trace: dict = field(default_factory=dict)

    def pohozaev_scaled(self) -> dict:
        """Each |K_{a,b}(phi)| relative to sigma2(phi)."""
        from .grid import norms

        s2 = norms(self.phi.grid, self.phi)["sigma2"]
        return {k: abs(v) / s2 for k, v in self.pohozaev.items()}


def shoot(spec: NonlinearitySpec, a: float, ode: OdeParams,
          keep_trajectory: bool = False) -> ShootOutcome:
    """Classify the RK4 trajectory started at phi(0) = a.

    A saturated nonlinearity while phi > 0 is classified as a crossing: the
    restoring force at that amplitude exceeds anything the linear terms can
    supply, so the sign change is certain even though the step cannot resolve it.
    """
    if a <= 0:
        raise ValueError("shooting amplitude must be > 0")
    g = nonlin.make_scalar_g(spec)
    mu = spec.mu
    h = ode.h_ode
    if h <= 0 or not math.isfinite(h):
        raise ValueError("step size underflow")
    cap = ode.phi_cap_factor * a
    r = 2.0 * h
    # series start: phi''(0) = a/2 plus the leading nonlinear correction
    # -g(a) r^{2+mu} / (2+mu)^2 (matters when mu is small)
    try:
        c_nl = -g(a) / (2.0 + mu) ** 2
    except SaturationError:
        return ShootOutcome("crosses", r, None)
    phi = a * (1.0 + r * r / 4.0) + c_nl * r ** (2.0 + mu)
    psi = a * r / 2.0 + c_nl * (2.0 + mu) * r ** (1.0 + mu)
    rs = [0.0, r] if keep_trajectory else None
    vs = [a, phi] if keep_trajectory else None

    n = int(round((ode.r_max - r) / h))
    saturated = False

    def rhs(rr, ph, ps):
        nonlocal saturated
        try:
            gv = g(ph)
        except SaturationError:
            saturated = True
            return 0.0, 0.0
        return ps, -ps / rr + (1.0 + rr * rr) * ph - rr**mu * gv

    for _ in range(n):
        k1p, k1s = rhs(r, phi, psi)
        k2p, k2s = rhs(r + h / 2, phi + h / 2 * k1p, psi + h / 2 * k1s)
        k3p, k3s = rhs(r + h / 2, phi + h / 2 * k2p, psi + h / 2 * k2s)
        k4p, k4s = rhs(r + h, phi + h * k3p, psi + h * k3s)
        if saturated:
            traj = (np.array(rs), np.array(vs)) if keep_trajectory else None
            return ShootOutcome("crosses", r, traj)
        phi += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        psi += h / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)
        r += h
        if keep_trajectory:
            rs.append(r)
            vs.append(phi)
        if phi > cap and psi > 0:
            return ShootOutcome("diverges", r,
                                (np.array(rs), np.array(vs)) if keep_trajectory else None)
        if phi < 0:
            return ShootOutcome("crosses", r,
                                (np.array(rs), np.array(vs)) if keep_trajectory else None)
        if abs(phi) < ode.decay_tol and abs(psi) < ode.decay_tol:
            return ShootOutcome("decays", r,
                                (np.array(rs), np.array(vs)) if keep_trajectory else None)
    # reached r_max still positive and below cap: growth is underway
    return ShootOutcome("diverges", r,
                        (np.array(rs), np.array(vs)) if keep_trajectory else None)


def bisect_amplitude(spec: NonlinearitySpec, ode: OdeParams,
                     a_lo: float = 1e-6, a_hi: float = 1e6,
                     scan_points: int = 60, max_iter: int = 80) -> tuple[float, dict]:
    """Locate the separatrix amplitude between diverging and crossing runs.

    Returns (a_star, trace).  The first diverges->non-diverges transition of
    the log scan brackets the nodeless profile; interior-zero trajectories
    live beyond later transitions and are never polished.
    """
    grid_a = np.logspace(math.log10(a_lo), math.log10(a_hi), scan_points)
    trace = {"scan": [], "bisection": []}
    prev = None
    bracket = None
    for a in grid_a:
        out = shoot(spec, float(a), ode)
        trace["scan"].append((float(a), out.kind))
        if prev is not None and prev[1] == "diverges" and out.kind != "diverges":
            bracket = (prev[0], float(a), out.kind)
            break
        prev = (float(a), out.kind)
    if bracket is None:
        raise GroundStateError(
            f"no diverges->crosses bracket found for a in [{a_lo:g}, {a_hi:g}]",
            trace=trace,
        )
    lo, hi, first_kind = bracket
    if first_kind == "decays":
        return hi, trace
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        out = shoot(spec, mid, ode)
        trace["bisection"].append((mid, out.kind))
        if out.kind == "decays":
            return mid, trace
        if out.kind == "diverges":
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * hi:
            break
    # polish from the diverging side: trajectory stays positive
    return lo, trace


def profile_from_trajectory(traj: tuple, grid: RadialGrid) -> np.ndarray:
    """Interpolate a shooting trajectory onto the grid, clipping the garbage tail."""
    rt, vt = traj
    # drop the tail once it falls six decades below the peak: past that point
    # the bisection slack is exponentially amplified and the samples are junk
    floor = 1e-6 * float(np.max(vt))
    cut = len(vt)
    for i in range(1, len(vt)):
        if vt[i] <= floor or (rt[i] > 1.0 and vt[i] > vt[i - 1] and vt[i - 1] < 1e-4):
            cut = i
            break
    interp = PchipInterpolator(rt[:cut], vt[:cut], extrapolate=False)
    phi = interp(grid.r)
    phi = np.where(np.isfinite(phi), phi, 0.0)
    return np.maximum(phi, 0.0)


def stationary_residual(grid: RadialGrid, spec: NonlinearitySpec, phi: np.ndarray) -> np.ndarray:
    """F(phi) = -L phi + (1 + r^2) phi - r^mu g(phi)."""
    return (-apply_laplacian(grid, phi) + (1.0 + grid.r**2) * phi
            - grid.r**spec.mu * nonlin.eval_g_field(spec, phi).real)


def newton_polish(grid: RadialGrid, spec: NonlinearitySpec, initial: np.ndarray,
                  tol: float = 1e-10, max_steps: int = 50) -> tuple[np.ndarray, float, dict]:
    """Damped Newton on the discrete stationary equation.

    Converges when ||F||_w <= tol (1 + ||phi||_w) or the residual reaches the
    roundoff floor of the tridiagonal operator (the line search stalls there).
    """
    phi = np.asarray(initial, dtype=float).copy()
    trace = {"residuals": []}
    res = weighted_norm(grid, stationary_residual(grid, spec, phi))
    for it in range(max_steps):
        trace["residuals"].append(res)
        if res <= tol * (1.0 + weighted_norm(grid, phi)):
            return phi, res, trace
        F = stationary_residual(grid, spec, phi)
        dmain = (-grid.lap_diag + (1.0 + grid.r**2)
                 - grid.r**spec.mu * nonlin.eval_g_deriv(spec, np.abs(phi)))
        ab = np.zeros((3, grid.N))
        ab[0, 1:] = -grid.lap_upper[: grid.N - 1]
        ab[1] = dmain
        ab[2, :-1] = -grid.lap_lower
        try:
            delta = sla.solve_banded((1, 1), ab, -F)
        except np.linalg.LinAlgError as err:
            raise GroundStateError(f"singular Jacobian: {err}", trace=trace,
                                   last_iterate=phi) from err
        s = 1.0
        new_res = None
        while s > 1e-8:
            cand = phi + s * delta
            cand_res = weighted_norm(grid, stationary_residual(grid, spec, cand))
            if cand_res < res:
                phi, res, new_res = cand, cand_res, cand_res
                break
            s *= 0.5
        if new_res is None:
            # no descent direction left: residual sits at the roundoff floor
            return phi, res, trace
    if res <= 100 * tol * (1.0 + weighted_norm(grid, phi)):
        return phi, res, trace
    raise GroundStateError(
        f"Newton did not converge in {max_steps} damped steps (residual {res:.3e})",
        trace=trace, last_iterate=phi,
    )


def _assemble_result(grid: RadialGrid, spec: NonlinearitySpec, phi: np.ndarray,
                     a_star: float, residual: float, trace: dict) -> GroundStateResult:
    if not np.all(phi[phi != 0] > 0) or phi.max() <= 0:
        raise GroundStateError("polished profile is not positive", trace=trace,
                               last_iterate=phi)
    field_ = RadialField(grid, phi.astype(complex), t=0.0, label="ground_state")
    mom = functionals.moments(grid, spec, field_)
    poh = {
        pair: functionals.K(grid, spec, field_, *pair, mom)["total"]
        for pair in POHOZAEV_PAIRS
    }
    m = functionals.action(grid, spec, field_, mom)
    if m <= 0:
        raise GroundStateError(f"nonpositive action m = {m:g}", trace=trace,
                               last_iterate=phi)
    idx = functionals.instability_index(grid, spec, field_)
    return GroundStateResult(phi=field_, a_star=a_star, residual=residual,
                             pohozaev=poh, m=m, instability_index=idx,
                             method_trace=trace)


def ground_state(spec: NonlinearitySpec, grid: RadialGrid,
                 ode: OdeParams | None = None,
                 check: bool = True) -> GroundStateResult:
    """Shooting bisection followed by Newton polish on the grid."""
    if spec.epsilon != 1:
        raise GroundStateError("no ground state in defocusing sign")
    if spec.zero_g:
        raise GroundStateError("no ground state with the nonlinear coupling suppressed")
    if check:
        rep = nonlin.check_conditions(spec)
        if not rep.satisfies_f:
            warnings.warn(
                f"spec {spec.label()} fails the sampled ground-state conditions "
                f"(q_g_ok={rep.q_g_ok}, violations={len(rep.violation_points)}); "
                "solving anyway",
                RuntimeWarning,
            )
    ode = ode or OdeParams.for_grid(grid)
    a_star, trace = bisect_amplitude(spec, ode)
    out = shoot(spec, a_star, ode, keep_trajectory=True)
    seed = profile_from_trajectory(out.trajectory, grid)
    trace["seed_kind"] = out.kind
    phi, residual, newton_trace = newton_polish(grid, spec, seed)
    trace["newton_residuals"] = newton_trace["residuals"]
    trace["seed_distance"] = weighted_norm(grid, phi - seed)
    return _assemble_result(grid, spec, phi, a_star, residual, trace)


def refine(result: GroundStateResult, spec: NonlinearitySpec,
           N_new: int) -> GroundStateResult:
    """Re-polish on a finer grid, seeding from the converged coarse profile."""
    coarse = result.phi.grid
    fine = build_grid(N_new, coarse.R)
    vals = result.phi.values.real
    interp = PchipInterpolator(np.concatenate([[0.0], coarse.r]),
                               np.concatenate([[vals[0]], vals]),
                               extrapolate=False)
    seed = interp(fine.r)
    seed = np.where(np.isfinite(seed), seed, 0.0)
    phi, residual, newton_trace = newton_polish(fine, spec, np.maximum(seed, 0.0))
    trace = {"refined_from": coarse.N, "newton_residuals": newton_trace["residuals"]}
    return _assemble_result(fine, spec, phi, result.a_star, residual, trace)


def write_outputs(result: GroundStateResult, spec: NonlinearitySpec, outdir) -> dict:
    """phi.csv (field snapshot) and groundstate.json next to it."""
    import os

    os.makedirs(outdir, exist_ok=True)
    phi_path = os.path.join(outdir, "phi.csv")
    write_field_csv(phi_path, result.phi.grid, result.phi,
                    header_extra=f" spec={spec.label()}")
    payload = {
        "spec": spec.label(),
        "a_star": result.a_star,
        "m": result.m,
        "residual": result.residual,
        "pohozaev": {f"K_{a}_{b}".replace("-", "m"): v
                     for (a, b), v in result.pohozaev.items()},
        "instability_index": result.instability_index,
        "N": result.phi.grid.N,
        "R": result.phi.grid.R,
    }
    json_path = os.path.join(outdir, "groundstate.json")
    with open(json_path, "w") as f:
        json.dump(payload, f, indent=1)
    return {"phi": phi_path, "json": json_path}
