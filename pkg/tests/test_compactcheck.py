import csv
import math
import pathlib

import numpy as np
import pytest

import bandlab as bl


def _ones_kernel(s, t):
    return np.ones(np.broadcast_shapes(np.shape(s), np.shape(t)))


def _small_family(space, count, p):
    return bl.dyadic_indicator_family(space, count, p, widest=2, per_scale=2)


def test_dyadic_family_shape(interval64):
    fam = _small_family(interval64, 8, 2)
    assert len(fam) == 8
    for f in fam:
        assert f.norm() == pytest.approx(1.0, abs=1e-12)
    for i in range(8):
        for j in range(i + 1, 8):
            assert bl.disjoint(fam[i], fam[j])


def test_dyadic_family_resolution_guard():
    sp = bl.uniform_interval(16)
    with pytest.raises(bl.InvalidDiscretization):
        bl.dyadic_indicator_family(sp, 64, 2)


def test_order_bound_rank_one_averaging(interval64):
    K = bl.kernel_operator(interval64, _ones_kernel, 2)
    fam = _small_family(interval64, 8, 2)
    cert = bl.order_bound_witness(K, fam, 4)
    assert len(cert.selected) == 4
    assert cert.selected == sorted(cert.selected)
    for d, b in zip(cert.distances, cert.budgets):
        assert d < b
    assert cert.max_pointwise_excess <= 1e-12
    assert np.all(cert.bound.values >= 0)


def test_order_bound_constant_sequence(interval64):
    K = bl.kernel_operator(interval64, _ones_kernel, 2)
    fam = _small_family(interval64, 6, 2)
    seq = [fam[0]] * 6
    cert = bl.order_bound_witness(K, seq, 5)
    assert np.max(np.abs(cert.bound.values)) == 0.0
    img = K.apply(fam[0].abs())
    assert np.allclose(cert.limit.values, img.values)


def test_order_bound_zero_operator(interval64):
    K = bl.LinearOperator(interval64, np.zeros((64, 64)), 2)
    fam = _small_family(interval64, 6, 2)
    cert = bl.order_bound_witness(K, fam, 4)
    assert np.max(np.abs(cert.limit.values)) == 0.0
    assert cert.max_pointwise_excess <= 0.0


def test_order_bound_requires_positive_operator(interval64):
    m = np.zeros((64, 64))
    m[0, 0] = -1.0
    K = bl.LinearOperator(interval64, m, 2)
    with pytest.raises(bl.PreconditionError):
        bl.order_bound_witness(K, _small_family(interval64, 4, 2), 2)


def test_order_bound_no_cluster_point(interval64):
    # spread the images far apart: no subsequence can meet the halving budgets
    scale = bl.LpFunction(interval64, 1.0 + 60.0 * interval64.centers, math.inf)
    K = bl.multiplication(scale, 2).modulus()
    fam = _small_family(interval64, 6, 2)
    with pytest.raises(bl.NoClusterPoint):
        bl.order_bound_witness(K, fam, 6)


def test_domination_bounds_image_norms(interval64):
    rng = np.random.default_rng(12)
    K = bl.LinearOperator(interval64, np.abs(rng.standard_normal((64, 64))), 2)
    shrink = rng.random((64, 64)) * rng.choice([-1.0, 1.0], size=(64, 64))
    A = bl.LinearOperator(interval64, K.matrix * shrink, 2)
    assert bl.dominates(K, A)
    for _ in range(50):
        e = bl.LpFunction(interval64, rng.standard_normal(64), 2)
        assert A.apply(e).norm() <= K.apply(e.abs()).norm() + 1e-12


def test_disjoint_decay_gaussian(interval1024):
    K = bl.kernel_operator(interval1024, bl.gaussian_kernel(0.02), 2)
    fam = bl.dyadic_indicator_family(interval1024, 40, 2)
    report = bl.disjoint_decay(K, K, fam)
    assert all(v > 0 for v in report.norms)
    assert report.tail_max < report.head_max
    assert report.verdict == (report.tail_max < 0.25 * report.head_max)


def test_disjoint_decay_multiplication_escapes(interval1024):
    phi = bl.make_multiplier(interval1024, "identity")
    A = bl.multiplication(phi, 2)
    fam = bl.dyadic_indicator_family(interval1024, 16, 2, lo=0.5, hi=1.0)
    report = bl.disjoint_decay(A, A.modulus(), fam)
    assert not report.verdict
    assert min(report.norms) >= 0.5


def test_disjoint_decay_rejects_overlap(interval64):
    K = bl.kernel_operator(interval64, _ones_kernel, 2)
    fam = _small_family(interval64, 4, 2)
    with pytest.raises(bl.NotDisjointImages):
        bl.disjoint_decay(K, K, [fam[0]] * 4)


def test_disjoint_decay_requires_domination(interval64):
    K = bl.kernel_operator(interval64, _ones_kernel, 2)
    A = bl.LinearOperator(interval64, 2.0 * K.matrix, 2)
    with pytest.raises(bl.PreconditionError):
        bl.disjoint_decay(A, K, _small_family(interval64, 4, 2))


def test_frozen_oracle_matches_library():
    # the decay thresholds were frozen from one analytic (erf) oracle run;
    # the discretized norms must stay on top of the recorded values
    path = pathlib.Path(__file__).parent / "data" / "gaussian_decay_oracle.csv"
    with open(path) as fh:
        oracle = [float(row["image_norm"]) for row in csv.DictReader(fh)]
    assert len(oracle) == 64

    sp = bl.uniform_interval(4096)
    K = bl.kernel_operator(sp, bl.gaussian_kernel(0.02), 2)
    fam = bl.dyadic_indicator_family(sp, 64, 2)
    lib = [K.apply(e).norm() for e in fam]
    for a, b in zip(lib, oracle):
        assert a == pytest.approx(b, rel=2e-3)

    q = 64 // 4
    assert max(oracle[-q:]) < 0.25 * max(oracle[:q])
