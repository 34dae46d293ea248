import math

import numpy as np
import pytest
import scipy.linalg as sla

from trapnls.grid import (FIELD_COLUMNS, RadialField, apply_laplacian, build_grid,
                          integrate, norms, read_field_csv, resample_lambda,
                          weighted_inner, write_field_csv)

from conftest import random_fields


def test_build_grid_validation():
    with pytest.raises(ValueError):
        build_grid(8, 12.0)
    with pytest.raises(ValueError):
        build_grid(64, -1.0)


def test_node_and_weight_formulas():
    g = build_grid(16, 8.0)
    assert g.r[0] == pytest.approx(0.25, rel=1e-15)
    assert g.w[0] == pytest.approx(2 * np.pi * 0.25 * 0.5, rel=1e-15)


def test_weights_integrate_unity_exactly(grid1024):
    total = grid1024.w.sum()
    assert abs(total - np.pi * grid1024.R**2) <= 1e-12 * np.pi * grid1024.R**2


def test_laplacian_of_constant_vanishes_interior(grid1024):
    u = np.ones(grid1024.N, dtype=complex)
    Lu = apply_laplacian(grid1024, u)
    # boundary row sees the Dirichlet wall and differs
    np.testing.assert_allclose(Lu[:-1], 0.0, atol=1e-11)
    assert Lu[-1] != 0.0


def test_laplacian_weighted_symmetry(grid1024):
    fields = random_fields(grid1024, n=100, seed=3)
    for u, v in zip(fields[::2], fields[1::2]):
        lhs = weighted_inner(grid1024, apply_laplacian(grid1024, u), v)
        rhs = weighted_inner(grid1024, u, apply_laplacian(grid1024, v))
        scale = math.sqrt(norms(grid1024, u)["mass"] * norms(grid1024, v)["mass"])
        assert abs(lhs - rhs) <= 1e-12 * scale


def test_laplacian_negative_semidefinite(grid1024):
    for u in random_fields(grid1024, n=20, seed=4):
        q = -weighted_inner(grid1024, apply_laplacian(grid1024, u), u).real
        assert q >= -1e-12


def _symmetrized_tridiag(grid, with_potential=True):
    main = -grid.lap_diag + (grid.r**2 if with_potential else 0.0)
    sw = np.sqrt(grid.w)
    off = -grid.lap_upper[: grid.N - 1] * sw[:-1] / sw[1:]
    return main, off


def test_oscillator_eigenvalue_tridiagonal(grid1024):
    main, off = _symmetrized_tridiag(grid1024)
    evs = sla.eigh_tridiagonal(main, off, select="i", select_range=(0, 1))[0]
    assert evs[0] == pytest.approx(2.0, abs=1e-3)
    assert evs[1] == pytest.approx(6.0, abs=6e-3)


def test_oscillator_eigenvalue_dense_oracle_small_grid():
    g = build_grid(128, 12.0)
    main, off = _symmetrized_tridiag(g)
    tri = sla.eigh_tridiagonal(main, off, select="i", select_range=(0, 0))[0][0]
    dense = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
    ev = np.linalg.eigvalsh(dense)[0]
    assert tri == pytest.approx(ev, abs=1e-10)
    assert tri == pytest.approx(2.0, abs=5e-2)


def test_integrate_closed_forms(grid1024):
    assert integrate(grid1024, np.zeros(grid1024.N)) == 0.0
    # midpoint weights carry a pi h^2 f(0)/12 boundary defect, about 1.1e-5
    # relative here, so the Gaussian cannot do better than that
    got = integrate(grid1024, np.exp(-grid1024.r**2))
    assert got == pytest.approx(np.pi, rel=2e-5)
    assert abs(got / np.pi - 1) > 1e-6  # the defect is real, not accidental
    got2 = integrate(grid1024, grid1024.r**2 * np.exp(-grid1024.r**2))
    assert got2 == pytest.approx(np.pi, rel=1e-6)


def test_integrate_length_check(grid1024):
    with pytest.raises(ValueError):
        integrate(grid1024, np.zeros(10))


def test_norms_gaussian(grid1024):
    u = np.exp(-grid1024.r**2 / 2).astype(complex)
    n = norms(grid1024, u)
    assert n["mass"] == pytest.approx(np.pi, rel=1e-3)
    assert n["grad2"] == pytest.approx(np.pi, rel=1e-3)
    assert n["variance"] == pytest.approx(np.pi, rel=1e-3)
    assert n["sup"] == pytest.approx(1.0, rel=1e-4)
    assert n["sigma2"] == pytest.approx(n["mass"] + n["grad2"] + n["variance"])


def test_norms_zero_and_phase_invariance(grid1024):
    z = norms(grid1024, np.zeros(grid1024.N, dtype=complex))
    assert all(v == 0.0 for v in z.values())
    u = random_fields(grid1024, n=1, seed=5)[0]
    a = norms(grid1024, u)
    b = norms(grid1024, np.exp(0.7j) * u)
    for key in a:
        assert b[key] == pytest.approx(a[key], rel=5e-14)


def test_norms_rejects_nonfinite(grid1024):
    u = np.zeros(grid1024.N, dtype=complex)
    u[3] = np.nan
    with pytest.raises(ValueError):
        norms(grid1024, u)


def test_grad2_second_order_convergence():
    errs = []
    for N in (256, 512, 1024):
        g = build_grid(N, 12.0)
        u = np.exp(-g.r**2 / 2).astype(complex)
        errs.append(abs(norms(g, u)["grad2"] - np.pi))
    assert 3.0 < errs[0] / errs[1] < 5.0
    assert 3.0 < errs[1] / errs[2] < 5.0


def test_resample_identity(grid1024):
    u = random_fields(grid1024, n=1, seed=6)[0]
    v = resample_lambda(grid1024, u, 1.0)
    np.testing.assert_allclose(v, u, rtol=1e-12, atol=1e-14)


def test_resample_mass_invariance_and_variance_scaling(grid1024):
    u = np.exp(-grid1024.r**2 / 2).astype(complex)
    n0 = norms(grid1024, u)
    for lam in (0.8, 1.01, 1.25):
        v = resample_lambda(grid1024, u, lam)
        nv = norms(grid1024, v)
        assert nv["mass"] == pytest.approx(n0["mass"], rel=1e-4)
        assert nv["variance"] == pytest.approx(n0["variance"] / lam**2, rel=1e-3)


def test_resample_range_check(grid1024):
    u = np.zeros(grid1024.N, dtype=complex)
    with pytest.raises(ValueError):
        resample_lambda(grid1024, u, 0.1)
    with pytest.raises(ValueError):
        resample_lambda(grid1024, u, 5.0)


def test_field_validation(grid1024):
    with pytest.raises(ValueError):
        RadialField(grid1024, np.zeros(7))
    bad = np.zeros(grid1024.N)
    bad[0] = np.inf
    with pytest.raises(ValueError):
        RadialField(grid1024, bad)


def test_field_csv_round_trip(tmp_path, grid1024):
    u = random_fields(grid1024, n=1, seed=7)[0]
    fld = RadialField(grid1024, u, t=1.25, label="x")
    path = tmp_path / "snap.csv"
    write_field_csv(path, grid1024, fld)
    with open(path) as f:
        head = f.readline()
        assert head.startswith("# t=1.25 N=1024 R=12")
        assert f.readline().strip() == FIELD_COLUMNS
    g2, fld2 = read_field_csv(path)
    assert g2.N == grid1024.N and g2.R == grid1024.R
    assert fld2.t == 1.25
    np.testing.assert_array_equal(fld2.values, u)  # 17 digits round-trips exactly


def test_field_csv_rejects_other_files(tmp_path):
    path = tmp_path / "junk.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_field_csv(path)
