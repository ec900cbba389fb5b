import math

import numpy as np
import pytest

import ilradmm as il


def test_operator_adjoint_and_norm():
    rng = np.random.default_rng(0)
    d = il.LinearOperator.difference_2d(5, 4)
    x = rng.standard_normal(d.in_dim)
    p = rng.standard_normal(d.out_dim)
    assert abs(d.apply(x) @ p - x @ d.adjoint(p)) < 1e-12
    dense = d.to_dense()
    assert il.operator_norm(d) == pytest.approx(np.linalg.norm(dense, 2), rel=1e-9)
    assert d.kind == "difference-2d"


def test_penalty_and_prox():
    g = il.ConcaveOuter.power(0.5, 0.0)
    assert il.outer_value(g, 4.0) == pytest.approx(2.0)
    assert il.prox_weighted_inner(il.InnerConvex.abs(), 1.0, 2.0, 3.0) == pytest.approx(2.5)
    assert il.scalar_prox_composite(g, il.InnerConvex.abs(), 1.0, 0.0) == 0.0
    w = il.compute_weights(il.ConcaveOuter.power(0.5, 1e-2), il.InnerConvex.abs(), np.ones(3))
    assert np.allclose(w, 0.5 / math.sqrt(1.01))
    with pytest.raises(il.DomainError):
        il.outer_value(g, -1.0)


def test_solve_dense_instance():
    pr = il.dense_instance(n=20, m=20, seed=7)
    x0 = il.least_squares_minimizer(pr)
    out = il.solve(pr, "ilr", alpha0=1e3, alpha_max=1e3, max_iter=2000, tol=1e-9, x0=x0)
    assert out["converged"]
    trace = out["trace"]
    assert trace.shape == (out["iterations"], 12)
    lag = trace[:, 3]
    assert np.all(np.diff(lag) <= 1e-10 * (1 + np.abs(lag[:-1])))
    assert il.kkt_residual(out["x"], out["y"], out["p"], pr) < 1e-6
    assert out["csv"].splitlines()[0] == il.TRACE_COLUMNS
    k = il.constants(pr)
    assert k["theta"] > 0 and k["descent_condition"] is not None


def test_baselines_and_errors():
    pr = il.dense_instance(n=10, m=10, seed=3)
    for algo in ("direct", "inloop"):
        out = il.solve(pr, algo, max_iter=30)
        assert out["iterations"] == 30
        assert np.all(np.isfinite(out["x"]))
    with pytest.raises(il.ParameterError):
        il.solve(pr, "fista")
    with pytest.raises(il.DimensionError):
        il.LinearOperator.identity(3).apply(np.ones(4))


def test_deblur_roundtrip(tmp_path):
    img = il.phantom_image(24, 24, 1)
    assert img.shape == (24, 24) and img.min() >= 0 and img.max() <= 1
    path = str(tmp_path / "x.pgm")
    il.save_pgm(img, path)
    assert np.max(np.abs(il.load_pgm(path) - img)) <= 0.5 / 255 + 1e-12
    noisy = il.add_noise(img, 0.05, 2)
    assert math.isfinite(il.snr(noisy, img))
    rep = il.deblur(phantom="24x24", kernel_size=5, max_iter=15, noise_std=0.01)
    run = rep["runs"][0]
    assert run["restored"].shape == (24, 24)
    assert run["snr_restored"] > run["snr_degraded"]
    assert len(rep["mean_snr"]) == 15
    with pytest.raises(il.ParameterError):
        il.deblur(kernel_size=4)
