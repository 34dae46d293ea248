"""Staggered radial mesh on the disk of radius R with quadrature and operators.

Nodes sit at r_j = (j + 1/2) h, so nothing is evaluated at the coordinate
singularity; the discrete Laplacian is the conservative flux form
(L u)_j = [r_{j+1/2}(u_{j+1}-u_j) - r_{j-1/2}(u_j-u_{j-1})] / (r_j h^2)
with zero flux through r = 0 and a Dirichlet wall at r = R.  It is symmetric
and negative semidefinite in the weighted inner product <u,v>_w = sum w_j
conj(u_j) v_j, w_j = 2 pi r_j h.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator


@dataclass(frozen=True)
class RadialGrid:
    N: int
    R: float
    h: float
    r: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    r_half: np.ndarray = field(repr=False)  # cell faces j*h, j = 0..N
    lap_lower: np.ndarray = field(repr=False)  # coefficient of u_{j-1}, rows 1..N-1
    lap_diag: np.ndarray = field(repr=False)
    lap_upper: np.ndarray = field(repr=False)  # coefficient of u_{j+1}, rows 0..N-2

    @property
    def potential(self) -> np.ndarray:
        return self.r * self.r


def build_grid(N: int, R: float) -> RadialGrid:
    """Mesh, quadrature weights and tridiagonal Laplacian for the disk."""
    if N < 16:
        raise ValueError("N must be >= 16")
    if R <= 0:
        raise ValueError("R must be > 0")
    h = R / N
    r = (np.arange(N) + 0.5) * h
    w = 2.0 * np.pi * r * h
    r_half = np.arange(N + 1) * h
    lower = r_half[1:N] / (r[1:] * h * h)
    upper = r_half[1:N] / (r[:-1] * h * h)
    diag = -(r_half[:N] + r_half[1 : N + 1]) / (r * h * h)
    return RadialGrid(N=N, R=R, h=h, r=r, w=w, r_half=r_half,
                      lap_lower=lower, lap_diag=diag, lap_upper=upper)


def apply_laplacian(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    """L u with the implicit boundary values u_{-1} ghost-free, u_N = 0."""
    out = grid.lap_diag * u
    out[1:] += grid.lap_lower * u[:-1]
    out[:-1] += grid.lap_upper * u[1:]
    return out


def weighted_inner(grid: RadialGrid, u: np.ndarray, v: np.ndarray) -> complex:
    return complex(np.sum(grid.w * np.conj(u) * v))


def weighted_norm(grid: RadialGrid, u: np.ndarray) -> float:
    return float(np.sqrt(np.sum(grid.w * np.abs(u) ** 2)))


def integrate(grid: RadialGrid, samples: np.ndarray) -> float:
    """sum_j w_j f_j, the disk integral of a radial profile."""
    samples = np.asarray(samples)
    if samples.shape != (grid.N,):
        raise ValueError(f"expected {grid.N} samples, got {samples.shape}")
    return float(np.sum(grid.w * samples).real)


@dataclass
class RadialField:
    """Complex samples of u(r) at the grid nodes, with a time stamp."""

    grid: RadialGrid
    values: np.ndarray
    t: float = 0.0
    label: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.N,):
            raise ValueError(f"field length {vals.shape} does not match grid N={self.grid.N}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        self.values = vals

    def copy(self, t: float | None = None, label: str | None = None) -> "RadialField":
        return RadialField(self.grid, self.values.copy(),
                           self.t if t is None else t,
                           self.label if label is None else label)


def as_values(u) -> np.ndarray:
    return u.values if isinstance(u, RadialField) else np.asarray(u, dtype=complex)


def norms(grid: RadialGrid, u) -> dict:
    """mass, grad2 = <-L u, u>_w, variance, sup and their sum sigma2.

    sigma2 = mass + grad2 + variance is this code's convention for the
    squared conformal-space norm.
    """
    vals = as_values(u)
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite field")
    absv = np.abs(vals)
    sup = float(absv.max()) if vals.size else 0.0
    if sup > 0 and absv[-1] > 1e-8 * sup:
        warnings.warn("field reaches the domain wall: |u(R)| > 1e-8 sup|u|",
                      RuntimeWarning)
    dens = absv**2
    mass = float(np.sum(grid.w * dens))
    grad2 = float(-np.sum(grid.w * np.conj(vals) * apply_laplacian(grid, vals)).real)
    variance = float(np.sum(grid.w * grid.r**2 * dens))
    return {
        "mass": mass,
        "grad2": grad2,
        "variance": variance,
        "sup": sup,
        "sigma2": mass + grad2 + variance,
    }


def sigma_inner(grid: RadialGrid, u, v) -> complex:
    """<u,v>_w + <-L u, v>_w + <r^2 u, v>_w (conformal-space pairing)."""
    uu, vv = as_values(u), as_values(v)
    return (
        weighted_inner(grid, uu, vv)
        + weighted_inner(grid, -apply_laplacian(grid, uu), vv)
        + complex(np.sum(grid.w * grid.r**2 * np.conj(uu) * vv))
    )


def resample_lambda(grid: RadialGrid, u, lam: float):
    """lam * u(lam r) by monotone cubic interpolation, zero beyond R."""
    if not 0.25 <= lam <= 4.0:
        raise ValueError("lambda must lie in [0.25, 4]")
    vals = as_values(u)
    # even extension through r = 0: flat value at the origin
    knots = np.concatenate([[0.0], grid.r])
    target = lam * grid.r
    out = np.zeros(grid.N, dtype=complex)
    inside = target <= grid.r[-1]
    for part, comp in ((vals.real, 1.0), (vals.imag, 1.0j)):
        interp = PchipInterpolator(knots, np.concatenate([[part[0]], part]),
                                   extrapolate=False)
        got = interp(target[inside])
        out[inside] += comp * np.nan_to_num(got)
    field = lam * out
    if isinstance(u, RadialField):
        return RadialField(grid, field, t=u.t, label=u.label)
    return field


FIELD_COLUMNS = "r,re,im"


def write_field_csv(path, grid: RadialGrid, u, t: float | None = None,
                    header_extra: str = "") -> None:
    """Field snapshot: `# t=<t> N=<N> R=<R>` then r,re,im rows at 17 digits."""
    vals = as_values(u)
    tt = t if t is not None else (u.t if isinstance(u, RadialField) else 0.0)
    with open(path, "w") as f:
        f.write(f"# t={tt:.17g} N={grid.N} R={grid.R:.17g}{header_extra}\n")
        f.write(FIELD_COLUMNS + "\n")
        for rr, vv in zip(grid.r, vals):
            f.write(f"{rr:.17g},{vv.real:.17g},{vv.imag:.17g}\n")


def read_field_csv(path) -> tuple[RadialGrid, RadialField]:
    """Rebuild the grid from the header and load the samples."""
    with open(path) as f:
        header = f.readline().strip()
        cols = f.readline().strip()
        if not header.startswith("#") or cols.split(",")[:3] != ["r", "re", "im"]:
            raise ValueError(f"{path}: not a field snapshot")
        meta = dict(tok.split("=", 1) for tok in header[1:].split() if "=" in tok)
        grid = build_grid(int(meta["N"]), float(meta["R"]))
        data = np.loadtxt(f, delimiter=",").reshape(-1, 3)
    vals = data[:, 1] + 1j * data[:, 2]
    return grid, RadialField(grid, vals, t=float(meta.get("t", 0.0)))
