import math

import numpy as np
import pytest

import bandlab as bl

from conftest import pnorm_oracle, random_function


def test_constant_has_unit_norm_for_every_p(interval64):
    for p in (1, 2, 3, 7, math.inf):
        assert bl.constant(interval64, 1.0, p).norm() == pytest.approx(1.0)


def test_indicator_norm_p1(interval64):
    E = interval64.set_from_mask(interval64.centers < 0.5)
    f = 2.0 * bl.indicator(E, 1)
    assert f.norm() == pytest.approx(1.0)


def test_pythagorean_two_atoms():
    sp = bl.MeasureSpace([1.0, 1.0])
    f = bl.LpFunction(sp, [3.0, 4.0], 2)
    assert f.norm() == pytest.approx(5.0)


def test_restrict_full_empty(interval64):
    rng = np.random.default_rng(0)
    f = random_function(interval64, 2, rng)
    assert np.array_equal(f.restrict(interval64.full_set()).values, f.values)
    assert not f.restrict(interval64.empty_set()).values.any()


def test_p_additivity_random(interval64):
    rng = np.random.default_rng(3)
    for p in (1, 2, 3, 7):
        for _ in range(200):
            f = random_function(interval64, p, rng)
            E = interval64.set_from_mask(rng.random(64) < rng.random())
            lhs = f.restrict(E).norm() ** p + f.restrict(E.complement()).norm() ** p
            assert lhs == pytest.approx(f.norm() ** p, rel=1e-10)


def test_norm_matches_plain_oracle(interval64):
    rng = np.random.default_rng(11)
    for p in (1, 2, 3, math.inf):
        f = random_function(interval64, p, rng)
        assert f.norm() == pytest.approx(
            pnorm_oracle(f.values, interval64.weights, p), rel=1e-12)


def test_homogeneity_and_triangle(interval64):
    rng = np.random.default_rng(4)
    for _ in range(200):
        p = rng.choice([1.0, 2.0, 3.0])
        f = random_function(interval64, p, rng)
        g = random_function(interval64, p, rng)
        lam = float(rng.standard_normal())
        assert (lam * f).norm() == pytest.approx(abs(lam) * f.norm(), rel=1e-10)
        assert (f + g).norm() <= f.norm() + g.norm() + 1e-10


def test_support_semantics(interval64):
    zero = bl.constant(interval64, 0.0, 2)
    assert zero.support(0.0).is_empty

    E = interval64.set_from_mask(interval64.centers < 0.3)
    assert bl.indicator(E, 2).support(0.0) == E

    vals = np.zeros(64)
    vals[5] = 1e-15
    tiny = bl.LpFunction(interval64, vals, 2)
    assert tiny.support(1e-12).is_empty
    assert not tiny.support(0.0).is_empty


def test_support_of_restriction_inside_set(interval64):
    rng = np.random.default_rng(9)
    for _ in range(100):
        f = random_function(interval64, 2, rng)
        E = interval64.set_from_mask(rng.random(64) < 0.5)
        assert f.restrict(E).support(0.0).subset_of(E)


def test_disjointness(interval64):
    E = interval64.set_from_mask(interval64.centers < 0.5)
    f = bl.indicator(E, 2)
    g = bl.indicator(E.complement(), 2)
    assert bl.disjoint(f, g)
    assert not bl.disjoint(f, f)


def test_binary_ops_require_matching_exponent(interval64):
    f = bl.constant(interval64, 1.0, 2)
    g = bl.constant(interval64, 1.0, 3)
    with pytest.raises(bl.SpaceMismatch):
        f + g
    other = bl.uniform_interval(64)
    with pytest.raises(bl.SpaceMismatch):
        f + bl.constant(other, 1.0, 2)


def test_modulate_keeps_exponent(interval64):
    f = bl.constant(interval64, 2.0, 3)
    phi = bl.make_multiplier(interval64, "identity")
    g = bl.modulate(f, phi)
    assert g.p == 3
    assert np.allclose(g.values, 2.0 * interval64.centers)


def test_csv_roundtrip(tmp_path, interval64):
    rng = np.random.default_rng(21)
    f = random_function(interval64, 3, rng)
    path = tmp_path / "values.csv"
    bl.save_values_csv(f, path)
    g = bl.load_values_csv(path, interval64)
    assert g.p == 3
    assert np.array_equal(g.values, f.values)

    with pytest.raises(bl.SpaceMismatch):
        bl.load_values_csv(path, bl.uniform_interval(128))
