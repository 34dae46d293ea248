"""Variational quantities evaluated on radial fields.

Everything is built from five moments of the field: mass, grad2, variance and
the two weighted nonlinear integrals int r^mu G(|u|^2) and int r^mu (DG)(|u|^2)
(the latter equals int r^mu |u| g(|u|) for the Hamiltonian form g = u G').
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import nonlin
from .grid import RadialGrid, as_values, norms, sigma_inner
from .nonlin import NonlinearitySpec


def moments(grid: RadialGrid, spec: NonlinearitySpec, u) -> dict:
    """The shared integrals behind all functionals of one field."""
    vals = as_values(u)
    base = norms(grid, vals)
    s2 = np.abs(vals) ** 2
    if spec.zero_g:
        intG = 0.0
        intDG = 0.0
    else:
        wmu = grid.w * grid.r**spec.mu
        intG = float(np.sum(wmu * nonlin.eval_G(spec, s2)))
        intDG = float(np.sum(wmu * nonlin.eval_DG(spec, s2, 1)))
    base["intG"] = intG
    base["intDG"] = intDG
    return base


def mass(grid: RadialGrid, u) -> float:
    return norms(grid, u)["mass"]


def energy(grid: RadialGrid, spec: NonlinearitySpec, u, mom: dict | None = None) -> float:
    m = mom or moments(grid, spec, u)
    return m["grad2"] + m["variance"] - spec.epsilon * m["intG"]


def action(grid: RadialGrid, spec: NonlinearitySpec, u, mom: dict | None = None) -> float:
    m = mom or moments(grid, spec, u)
    return energy(grid, spec, u, m) + m["mass"]


def K(grid: RadialGrid, spec: NonlinearitySpec, u, alpha: float, beta: float,
      mom: dict | None = None) -> dict:
    """Scaling functional K_{alpha,beta}: quadratic + nonlinear split."""
    m = mom or moments(grid, spec, u)
    quad = 2.0 * (alpha * m["grad2"] + (alpha + beta) * m["mass"]
                  + (alpha + 2.0 * beta) * m["variance"])
    nl = -2.0 * (alpha * m["intDG"] + beta * (1.0 + spec.mu / 2.0) * m["intG"])
    return {"total": quad + nl, "quadratic": quad, "nonlinear": nl}


def P_functional(grid: RadialGrid, spec: NonlinearitySpec, u, mom: dict | None = None) -> float:
    """P = K_{1,-1} / 2, the virial drive of the focusing problem."""
    m = mom or moments(grid, spec, u)
    return 0.5 * K(grid, spec, u, 1.0, -1.0, m)["total"]


def T_functional(grid: RadialGrid, spec: NonlinearitySpec, u, mom: dict | None = None) -> float:
    """T = S - K_{1,-1}/2."""
    m = mom or moments(grid, spec, u)
    return action(grid, spec, u, m) - P_functional(grid, spec, u, m)


def H_functional(grid: RadialGrid, spec: NonlinearitySpec, u, alpha: float, beta: float,
                 mom: dict | None = None) -> float:
    """H_{alpha,beta} = S - K_{alpha,beta} / (2 (alpha + 2 beta)); needs alpha+2beta != 0."""
    if alpha + 2.0 * beta == 0.0:
        raise ValueError("H is undefined for alpha + 2 beta = 0; use T instead")
    m = mom or moments(grid, spec, u)
    return action(grid, spec, u, m) - K(grid, spec, u, alpha, beta, m)["total"] / (
        2.0 * (alpha + 2.0 * beta)
    )


def virial_rhs(grid: RadialGrid, spec: NonlinearitySpec, u, mom: dict | None = None) -> float:
    """One eighth of the second time derivative of the variance.

    grad2 - variance - eps * int r^mu [(DG)(|u|^2) - (1+mu/2) G(|u|^2)];
    coincides with P when eps = +1.
    """
    m = mom or moments(grid, spec, u)
    return (m["grad2"] - m["variance"]
            - spec.epsilon * (m["intDG"] - (1.0 + spec.mu / 2.0) * m["intG"]))


@dataclass
class FunctionalReport:
    mass: float
    energy: float
    action: float
    K_1_0: float
    K_0_1: float
    K_1_m1: float
    H_1_0: float
    H_0_1: float
    T: float
    P: float
    virial_rhs: float

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def full_report(grid: RadialGrid, spec: NonlinearitySpec, u) -> FunctionalReport:
    m = moments(grid, spec, u)
    return FunctionalReport(
        mass=m["mass"],
        energy=energy(grid, spec, u, m),
        action=action(grid, spec, u, m),
        K_1_0=K(grid, spec, u, 1.0, 0.0, m)["total"],
        K_0_1=K(grid, spec, u, 0.0, 1.0, m)["total"],
        K_1_m1=K(grid, spec, u, 1.0, -1.0, m)["total"],
        H_1_0=H_functional(grid, spec, u, 1.0, 0.0, m),
        H_0_1=H_functional(grid, spec, u, 0.0, 1.0, m),
        T=T_functional(grid, spec, u, m),
        P=P_functional(grid, spec, u, m),
        virial_rhs=virial_rhs(grid, spec, u, m),
    )


def scaling_derivatives(grid: RadialGrid, spec: NonlinearitySpec, u) -> dict:
    """Energy along the mass-invariant dilation v_lam = lam v(lam .).

    E_of_lambda is the closed form (no resampling).  dE is the full first
    lambda-derivative at lam = 1 (equals 2 P, asserted for the focusing sign);
    d2E is half the second derivative at lam = 1, so that on a stationary
    state d2E = -instability_index.
    """
    vals = as_values(u)
    m = moments(grid, spec, u)
    A, B = m["grad2"], m["variance"]
    eps, mu = float(spec.epsilon), spec.mu
    wmu = grid.w * grid.r**mu
    s2_1 = np.abs(vals) ** 2
    rho = np.abs(vals)

    def E_of_lambda(lam: float) -> float:
        lam = float(lam)
        s2 = lam * lam * s2_1
        if spec.zero_g:
            intG = 0.0
        else:
            intG = float(np.sum(wmu * nonlin.eval_G(spec, s2)))
        return lam**2 * A + lam**-2 * B - eps * lam ** (-2.0 - mu) * intG

    dE = 2.0 * A - 2.0 * B - 2.0 * eps * (m["intDG"] - (1.0 + mu / 2.0) * m["intG"])
    if spec.zero_g:
        int_gp = 0.0
    else:
        int_gp = float(np.sum(wmu * rho**2 * nonlin.eval_g_deriv(spec, rho)))
    d2E = A + 3.0 * B - eps * (
        int_gp - (4.0 + 2.0 * mu) * m["intDG"]
        + (1.0 + mu / 2.0) * (3.0 + mu) * m["intG"]
    )
    if spec.epsilon == 1:
        p_val = P_functional(grid, spec, u, m)
        if abs(dE - 2.0 * p_val) > 1e-9 * (1.0 + abs(dE)):
            raise AssertionError(
                f"scaling derivative dE={dE!r} disagrees with 2P={2*p_val!r}"
            )
    return {"E_of_lambda": E_of_lambda, "dE": dE, "d2E": d2E}


def instability_index(grid: RadialGrid, spec: NonlinearitySpec, u) -> float:
    """2||u||^2 + int r^mu [rho^2 g'(rho) - (5+2mu) rho g(rho) + (2+mu)(1+mu/2) G(rho^2)].

    Positive on a stationary state signals an unstable standing wave; equals
    minus the d2E of scaling_derivatives there (focusing convention).
    """
    vals = as_values(u)
    m = moments(grid, spec, u)
    mu = spec.mu
    if spec.zero_g:
        return 2.0 * m["mass"]
    rho = np.abs(vals)
    wmu = grid.w * grid.r**mu
    int_gp = float(np.sum(wmu * rho**2 * nonlin.eval_g_deriv(spec, rho)))
    return 2.0 * m["mass"] + (
        int_gp - (5.0 + 2.0 * mu) * m["intDG"]
        + (2.0 + mu) * (1.0 + mu / 2.0) * m["intG"]
    )


def orbit_distance(grid: RadialGrid, u, phi) -> dict:
    """Distance from u to the phase orbit {e^{i theta} phi} in the sigma norm.

    theta_star is the phase making e^{i theta} phi closest to u.
    """
    uu, pp = as_values(u), as_values(phi)
    a = sigma_inner(grid, uu, uu).real
    b = sigma_inner(grid, pp, pp).real
    c = sigma_inner(grid, pp, uu)
    d2 = a + b - 2.0 * abs(c)
    return {"distance": math.sqrt(max(d2, 0.0)), "theta_star": float(np.angle(c))}


def mt_functional(grid: RadialGrid, u, alpha_mt: float) -> float:
    """int (e^{alpha |u|^2} - 1) dx, the 2D critical-embedding integrand."""
    if alpha_mt <= 0:
        raise ValueError("alpha_mt must be > 0")
    vals = as_values(u)
    arg = alpha_mt * np.abs(vals) ** 2
    if np.any(arg > nonlin.SAT_LIMIT):
        raise nonlin.SaturationError(arg)
    return float(np.sum(grid.w * np.expm1(arg)))
