"""Nonlinearity families G and numerical audits of the structural conditions.

Three built-in families, all with G(0) = 0 and g(rho) = rho * G'(rho^2):

  exp_truncated(K):  G(s) = e^s - sum_{k<=K} s^k/k!          (g ~ rho^{2K+1} near 0)
  exp_subcritical:   G(s) = e^{sqrt(1+s)} - (e/2) s - e      (g ~ (e/16) rho^5 near 0)
  monomial(p):       G(s) = 2/(p+1) s^{(p+1)/2}              (g = rho^p)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Exponential arguments past this would overflow a double; evaluators raise
# instead of propagating inf into quadratures.
SAT_LIMIT = 700.0

# Below this the truncated-exponential forms cancel catastrophically and the
# Taylor tail (three nonvanishing terms) is used instead.
SERIES_CUT = 1e-3

_E = math.e


class SaturationError(FloatingPointError):
    """An exponential evaluation exceeded the overflow guard."""

    def __init__(self, s):
        self.s = float(np.max(s))
        super().__init__(
            f"exponential argument {self.s:.6g} exceeds overflow guard {SAT_LIMIT:g}"
        )


@dataclass(frozen=True)
class NonlinearitySpec:
    """A concrete G family plus inhomogeneity power and focusing sign.

    zero_g is a test hook that suppresses the nonlinear coupling entirely,
    exposing the bare harmonic oscillator to the rest of the code.
    """

    family: str  # "exp_truncated" | "exp_subcritical" | "monomial"
    mu: float
    epsilon: int = 1
    K: int | None = None
    p: float | None = None
    zero_g: bool = False

    def __post_init__(self):
        if self.family not in ("exp_truncated", "exp_subcritical", "monomial"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.mu <= 0:
            raise ValueError("mu must be > 0")
        if self.epsilon not in (-1, 1):
            raise ValueError("epsilon must be +1 or -1")
        if self.family == "exp_truncated":
            if self.K is None or self.K < 2:
                raise ValueError("exp_truncated requires integer K >= 2")
        if self.family == "monomial":
            if self.p is None or self.p <= 1:
                raise ValueError("monomial requires p > 1")

    @property
    def alpha_g(self) -> float | None:
        """Exponential growth rate of G''' (critical class only)."""
        return 1.0 if self.family == "exp_truncated" else None

    @property
    def growth_class(self) -> str:
        return "critical" if self.family == "exp_truncated" else "subcritical"

    @property
    def q_g(self) -> float:
        """Power of g near zero (exact, from the family)."""
        if self.family == "exp_truncated":
            return 2 * self.K + 1
        if self.family == "exp_subcritical":
            return 5.0
        return self.p

    def label(self) -> str:
        if self.family == "exp_truncated":
            par = f"K = {self.K}"
        elif self.family == "monomial":
            par = f"p = {self.p:g}"
        else:
            par = ""
        par = par + ", " if par else ""
        return (
            f'{{family = "{self.family}", {par}mu = {self.mu:g}, '
            f"epsilon = {self.epsilon:d}}}"
        )


def _as_float_array(s):
    a = np.asarray(s, dtype=float)
    if np.any(a < 0):
        raise ValueError("nonlinearity arguments must be >= 0")
    return a


def _guard_exp(arg):
    if np.any(arg > SAT_LIMIT):
        raise SaturationError(arg)


def _ret(out, scalar):
    return float(out) if scalar else out


def _exp_trunc_deriv(s, K, order):
    # d^order/ds^order [e^s - sum_{k<=K} s^k/k!] = e^s - sum_{k<=K-order} s^k/k!
    _guard_exp(s)
    kmax = K - order
    if kmax < 0:
        return np.exp(s)
    out = np.exp(s)
    for k in range(kmax + 1):
        out = out - s**k / math.factorial(k)
    tail0 = kmax + 1
    # series branch: first three nonvanishing tail terms
    small = s < SERIES_CUT
    if np.any(small):
        ss = np.where(small, s, 0.0)
        ser = sum(ss**k / math.factorial(k) for k in range(tail0, tail0 + 3))
        out = np.where(small, ser, out)
    return out


def _exp_sub_G(s):
    t = np.sqrt(1.0 + s)
    _guard_exp(t)
    x = s / (1.0 + t)  # t - 1, computed without cancellation
    out = _E * (np.expm1(x) - 0.5 * s)
    small = s < SERIES_CUT
    if np.any(small):
        ss = np.where(small, s, 0.0)
        ser = _E * (ss**3 / 48.0 - 5.0 * ss**4 / 384.0 + 3.0 * ss**5 / 320.0)
        out = np.where(small, ser, out)
    return out


def _exp_sub_deriv(s, order):
    t = np.sqrt(1.0 + s)
    _guard_exp(t)
    if order == 1:
        out = np.exp(t) / (2.0 * t) - 0.5 * _E
        small = s < SERIES_CUT
        if np.any(small):
            ss = np.where(small, s, 0.0)
            ser = _E * (ss**2 / 16.0 - 5.0 * ss**3 / 96.0 + 3.0 * ss**4 / 64.0)
            out = np.where(small, ser, out)
        return out
    if order == 2:
        x = s / (1.0 + t)  # t - 1; no cancellation in this form
        return np.exp(t) * x / (4.0 * t**3)
    # order 3; t^2 - 3t + 3 has no real roots, no cancellation
    return np.exp(t) * (t * t - 3.0 * t + 3.0) / (8.0 * t**5)


def eval_G(spec: NonlinearitySpec, s) -> float | np.ndarray:
    """G(s) for s >= 0, stable near zero, guarded against overflow."""
    a = _as_float_array(s)
    scalar = np.ndim(s) == 0
    if spec.family == "monomial":
        return _ret(2.0 / (spec.p + 1.0) * a ** ((spec.p + 1.0) / 2.0), scalar)
    if spec.family == "exp_truncated":
        return _ret(_exp_trunc_deriv(a, spec.K, 0), scalar)
    return _ret(_exp_sub_G(a), scalar)


def eval_G_deriv(spec: NonlinearitySpec, s, order: int = 1) -> float | np.ndarray:
    """d^order G / ds^order, order in {1, 2, 3}, closed form per family."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    a = _as_float_array(s)
    scalar = np.ndim(s) == 0
    if spec.family == "exp_truncated":
        return _ret(_exp_trunc_deriv(a, spec.K, order), scalar)
    if spec.family == "exp_subcritical":
        return _ret(_exp_sub_deriv(a, order), scalar)
    p = spec.p
    # k-th derivative of 2/(p+1) s^{(p+1)/2}
    coef = 2.0 / (p + 1.0)
    expo = (p + 1.0) / 2.0
    for _ in range(order):
        coef *= expo
        expo -= 1.0
    with np.errstate(divide="ignore"):
        out = coef * np.where(a > 0, a, 1.0) ** expo
        out = np.where(a > 0, out, coef * 0.0**expo if expo > 0 else np.inf)
        if expo == 0:
            out = np.full_like(a, coef)
    return _ret(out, scalar)


def eval_g(spec: NonlinearitySpec, rho) -> float | np.ndarray:
    """g(rho) = rho * G'(rho^2) for rho >= 0."""
    a = _as_float_array(rho)
    scalar = np.ndim(rho) == 0
    if spec.zero_g:
        return _ret(np.zeros_like(a), scalar)
    return _ret(a * eval_G_deriv(spec, a * a, 1), scalar)


def eval_g_deriv(spec: NonlinearitySpec, rho) -> float | np.ndarray:
    """g'(rho) = G'(rho^2) + 2 rho^2 G''(rho^2)."""
    a = _as_float_array(rho)
    scalar = np.ndim(rho) == 0
    if spec.zero_g:
        return _ret(np.zeros_like(a), scalar)
    s = a * a
    return _ret(eval_G_deriv(spec, s, 1) + 2.0 * s * eval_G_deriv(spec, s, 2), scalar)


def eval_g_field(spec: NonlinearitySpec, u) -> np.ndarray:
    """g applied to a complex (or signed real) field: u * G'(|u|^2)."""
    u = np.asarray(u)
    if spec.zero_g:
        return np.zeros_like(u)
    return u * eval_G_deriv(spec, np.abs(u) ** 2, 1)


def eval_DG(spec: NonlinearitySpec, s, order: int = 1) -> float | np.ndarray:
    """(DG)(s) = s G'(s) for order 1; (D(DG))(s) = s(G'(s) + s G''(s)) for order 2."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    a = _as_float_array(s)
    scalar = np.ndim(s) == 0
    g1 = eval_G_deriv(spec, a, 1)
    if order == 1:
        return _ret(a * g1, scalar)
    return _ret(a * (g1 + a * eval_G_deriv(spec, a, 2)), scalar)


def _D_poly(spec, s, c):
    """(D - c) G evaluated at s."""
    return eval_DG(spec, s, 1) - c * eval_G(spec, s)


def _DD_poly(spec, s, a, b):
    """(D - a)(D - b) G = s^2 G'' + (1 - a - b) s G' + a b G."""
    g0 = eval_G(spec, s)
    g1 = eval_G_deriv(spec, s, 1)
    g2 = eval_G_deriv(spec, s, 2)
    return s * s * g2 + (1.0 - a - b) * s * g1 + a * b * g0


DEFAULT_EPS_CANDIDATES = (0.5, 0.25, 0.1, 0.05, 0.01)


@dataclass
class ConditionReport:
    """Sampled audit of the structural conditions on G.

    The two clauses mu > 2 and q_g > 3 + 2 mu are surfaced separately
    (mu_gt_2, q_g_ok); satisfies_f / satisfies_strong_4 cover the pointwise
    D-operator inequalities together with the q_g clause, since the built-in
    desk-scale parameter sets deliberately run at small mu.
    """

    spec: NonlinearitySpec
    q_g_estimated: float
    q_g_exact: float
    q_g_ok: bool  # q_g > 3 + 2 mu
    mu_gt_2: bool
    satisfies_f: bool
    satisfies_strong_4: bool
    eps_g: float | None
    growth_class: str
    alpha_g: float | None
    sample: np.ndarray = field(repr=False)
    violation_points: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "spec": self.spec.label(),
            "q_g_estimated": self.q_g_estimated,
            "q_g_exact": self.q_g_exact,
            "q_g_ok": self.q_g_ok,
            "mu_gt_2": self.mu_gt_2,
            "satisfies_f": self.satisfies_f,
            "satisfies_strong_4": self.satisfies_strong_4,
            "eps_g": self.eps_g,
            "growth_class": self.growth_class,
            "alpha_g": self.alpha_g,
            "n_sample": int(len(self.sample)),
            "violation_points": [
                (float(r), cid, float(v)) for (r, cid, v) in self.violation_points
            ],
        }


def estimate_q_g(spec: NonlinearitySpec, rho_lo: float = 1e-4, rho_hi: float = 1e-2) -> float:
    """Log-log slope of g over [rho_lo, rho_hi]."""
    rho = np.logspace(math.log10(rho_lo), math.log10(rho_hi), 12)
    gv = eval_g(spec, rho)
    coef = np.polyfit(np.log(rho), np.log(gv), 1)
    return float(coef[0])


def check_conditions(
    spec: NonlinearitySpec,
    sample: np.ndarray | None = None,
    eps_candidates=DEFAULT_EPS_CANDIDATES,
) -> ConditionReport:
    """Audit the ground-state conditions on a log-spaced sample of (0, r_hi].

    Pointwise inequalities are checked by dense sampling only; every failed
    sample lands in violation_points tagged with a condition id.
    """
    if sample is None:
        sample = np.logspace(-4, 1, 400)
    sample = np.asarray(sample, dtype=float)
    if sample.size == 0 or sample.min() <= 0:
        raise ValueError("sample must be nonempty with positive entries")
    mu = spec.mu
    viol = []

    def audit(vals, cid):
        bad = vals <= 0
        for rr, vv in zip(sample[bad], vals[bad]):
            viol.append((rr, cid, vv))
        return not bad.any()

    d1 = audit(_D_poly(spec, sample, 1.0), "(D-1)G")
    d2 = audit(
        sample**2 * eval_G_deriv(spec, sample, 2)
        - sample * eval_G_deriv(spec, sample, 1)
        + eval_G(spec, sample),
        "(D-1)^2G",
    )
    strong_cross = audit(
        _DD_poly(spec, sample, 2.0 + mu / 2.0, 1.0 + mu / 2.0),
        "(D-2-mu/2)(D-1-mu/2)G",
    )
    eps_g = None
    for eps in sorted(eps_candidates, reverse=True):
        vals = _D_poly(spec, sample, 2.0 + mu / 2.0 + eps)
        if (vals > 0).all():
            eps_g = float(eps)
            break
    if eps_g is None:
        vals = _D_poly(spec, sample, 2.0 + mu / 2.0 + min(eps_candidates))
        audit(vals, "(D-2-mu/2-eps)G")

    q_est = estimate_q_g(spec)
    q_ok = spec.q_g > 3.0 + 2.0 * mu
    return ConditionReport(
        spec=spec,
        q_g_estimated=q_est,
        q_g_exact=float(spec.q_g),
        q_g_ok=q_ok,
        mu_gt_2=mu > 2.0,
        satisfies_f=q_ok and d1 and d2,
        satisfies_strong_4=q_ok and (eps_g is not None) and strong_cross,
        eps_g=eps_g,
        growth_class=spec.growth_class,
        alpha_g=spec.alpha_g,
        sample=sample,
        violation_points=viol,
    )


def make_scalar_g(spec: NonlinearitySpec):
    """Fast scalar g for tight ODE loops (math ops only, same guard/series)."""
    if spec.zero_g:
        return lambda phi: 0.0
    if spec.family == "monomial":
        pm1 = (spec.p - 1.0) / 2.0

        def g_mono(phi):
            return phi * (phi * phi) ** pm1

        return g_mono
    if spec.family == "exp_truncated":
        K = spec.K
        facts = [math.factorial(k) for k in range(K + 3)]

        def g_trunc(phi):
            s = phi * phi
            if s > SAT_LIMIT:
                raise SaturationError(s)
            if s < SERIES_CUT:
                gp = s**K / facts[K] + s ** (K + 1) / facts[K + 1] + s ** (K + 2) / facts[K + 2]
            else:
                gp = math.exp(s)
                for k in range(K):
                    gp -= s**k / facts[k]
            return phi * gp

        return g_trunc

    def g_sub(phi):
        s = phi * phi
        t = math.sqrt(1.0 + s)
        if t > SAT_LIMIT:
            raise SaturationError(s)
        if s < SERIES_CUT:
            gp = _E * (s * s / 16.0 - 5.0 * s**3 / 96.0 + 3.0 * s**4 / 64.0)
        else:
            gp = math.exp(t) / (2.0 * t) - 0.5 * _E
        return phi * gp

    return g_sub


def spec_from_mapping(cfg: dict) -> NonlinearitySpec:
    """Build a spec from flat config keys (family, K, p, mu, epsilon)."""
    kwargs = dict(
        family=cfg["family"],
        mu=float(cfg["mu"]),
        epsilon=int(cfg.get("epsilon", 1)),
    )
    if "K" in cfg and cfg["K"] is not None:
        kwargs["K"] = int(cfg["K"])
    if "p" in cfg and cfg["p"] is not None:
        kwargs["p"] = float(cfg["p"])
    if cfg.get("zero_g"):
        kwargs["zero_g"] = True
    return NonlinearitySpec(**kwargs)
