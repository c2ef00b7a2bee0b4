import logging

import numpy as np
import pytest

from l1potts.signals import (CANONICAL_H_MAX, CANONICAL_H_MIN, Grid, NoiseSpec, add_noise,
                             alternating_grid, canonical_bounds, canonical_l_min,
                             canonical_step_signal, load_kernel_file, make_kernel, nested_grids,
                             sample_integral, sample_point)


class TestCanonical:
    def test_n256(self):
        g = canonical_step_signal(256)
        assert g.segments == 6 and g.jumps == 5
        assert g.levels.min() >= 0 and g.levels.max() <= 1
        assert np.diff(g.boundaries).min() >= 256 / 8
        jumps = np.abs(np.diff(g.levels))
        assert jumps.min() == CANONICAL_H_MIN and jumps.max() == CANONICAL_H_MAX

    def test_small_n_same_shape(self):
        a, b = canonical_step_signal(16), canonical_step_signal(256)
        assert np.array_equal(a.levels, b.levels)
        assert a.n == 16 and a.jumps == 5

    def test_plateau_lengths(self):
        for n in range(16, 600):
            lengths = np.diff(canonical_step_signal(n).boundaries)
            assert lengths.min() >= (n // 8 if n == 17 else n / 8)

    def test_too_short(self):
        with pytest.raises(ValueError):
            canonical_step_signal(15)

    def test_bounds(self):
        b = canonical_bounds(256, make_kernel("box:3"))
        assert b.l_min == canonical_l_min(256) == 40 / 256
        assert b.kappa == 1 / 256 and b.eta == 1 / 256


class TestNoise:
    g = np.linspace(0, 1, 50)

    def test_none_is_identity(self):
        assert np.array_equal(add_noise(self.g, NoiseSpec()), self.g)

    @pytest.mark.parametrize("spec", [NoiseSpec("gaussian", 0.1, seed=4),
                                      NoiseSpec("laplacian", 0.1, seed=4),
                                      NoiseSpec("salt_pepper", frac=0.3, seed=4)])
    def test_deterministic(self, spec):
        a, b = add_noise(self.g, spec), add_noise(self.g, spec)
        assert a.tobytes() == b.tobytes()
        other = NoiseSpec(spec.kind, spec.sigma, spec.frac, seed=5)
        assert not np.array_equal(a, add_noise(self.g, other))

    def test_laplacian_moment(self):
        x = add_noise(np.zeros(100_000), NoiseSpec("laplacian", 0.1, seed=11))
        m = np.abs(x).mean()
        se = np.abs(x).std() / np.sqrt(x.size)
        assert abs(m - 0.1 / np.sqrt(2)) <= 3 * se
        assert x.std() == pytest.approx(0.1, rel=0.02)

    def test_salt_pepper_fraction(self):
        x = add_noise(np.full(20_000, 2.0), NoiseSpec("salt_pepper", frac=0.25, seed=2))
        hit = x != 2.0
        assert abs(hit.mean() - 0.25) < 3 * np.sqrt(0.25 * 0.75 / x.size)
        assert x[hit].min() >= 0 and x[hit].max() <= 1

    def test_invalid(self):
        for kw in ({"kind": "poisson"}, {"kind": "gaussian", "sigma": -1}, {"frac": 1.5}):
            with pytest.raises(ValueError):
                NoiseSpec(**kw)


class TestKernels:
    def test_box(self):
        assert np.array_equal(make_kernel("box:1").taps, [1.0])
        assert np.allclose(make_kernel("box:3").taps, 1 / 3)

    def test_gauss(self):
        t = make_kernel("gauss:0.2:31").taps
        assert t.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.array_equal(t, t[::-1])
        assert np.all(np.diff(t[:16]) > 0)
        x = np.arange(31) - 15
        raw = np.exp(-(0.2 * x) ** 2)
        assert np.allclose(t, raw / raw.sum())

    @pytest.mark.parametrize("spec", ["box:4", "box:0", "gauss:0.2:10", "tri:3", "box", "gauss:1"])
    def test_bad_specs(self, spec):
        with pytest.raises(ValueError):
            make_kernel(spec)

    def test_file_is_normalized_with_warning(self, tmp_path, caplog):
        p = tmp_path / "k.csv"
        p.write_text("# taps\n1\n2\n1\n")
        with caplog.at_level(logging.WARNING):
            K = make_kernel(f"file:{p}")
        assert np.allclose(K.taps, [0.25, 0.5, 0.25])
        assert "normalizing" in caplog.text

    def test_file_asymmetric(self, tmp_path):
        p = tmp_path / "k.csv"
        p.write_text("0.2\n0.5\n0.3\n")
        with pytest.raises(ValueError):
            load_kernel_file(p)


class TestGrids:
    def test_uniform(self):
        g = Grid.uniform(8)
        assert g.n == 8 and np.allclose(g.lengths, 1 / 8) and g.eta == pytest.approx(1 / 8)

    def test_invalid(self):
        for pts in ([0.0], [0.0, 0.5, 0.5], [-0.1, 1.0], [0.0, 1.2]):
            with pytest.raises(ValueError):
                Grid(np.array(pts))

    def test_nested_schedule(self):
        grids = nested_grids(16, 4)
        assert [g.n for g in grids] == [16, 32, 64, 128]
        for a, b in zip(grids, grids[1:]):
            assert np.all(np.isin(a.points, b.points))
        for g in grids:
            assert g.lengths.max() / g.lengths.min() <= 4 + 1e-12
        assert alternating_grid(4).lengths == pytest.approx([1 / 6, 1 / 3, 1 / 6, 1 / 3])


class TestSampling:
    def test_constant(self):
        f = np.full(64, 0.3)
        grid = alternating_grid(4)
        s = sample_integral(np.full(96, 0.3), grid)
        assert np.allclose(s.values, 0.3) and np.allclose(s.weights, grid.lengths)
        p = sample_point(f, Grid.uniform(4))
        assert np.allclose(p.values, 0.3) and np.allclose(p.weights, 0.25)

    def test_two_interval_step(self):
        f = np.where(np.arange(64) < 32, 0.0, 1.0)
        s = sample_integral(f, Grid(np.array([0.0, 0.25, 1.0])))
        assert np.allclose(s.values, [0.0, 2 / 3])
        assert np.allclose(s.weights, [0.25, 0.75])

    def test_point_sampling_midpoints(self):
        f = np.arange(64, dtype=float)
        p = sample_point(f, Grid.uniform(4))
        assert list(p.values) == [8.0, 24.0, 40.0, 56.0]

    def test_incompatible(self):
        with pytest.raises(ValueError):
            sample_integral(np.zeros(64), Grid.uniform(5))
        with pytest.raises(ValueError):
            sample_integral(np.zeros(64), Grid.uniform(8))
        with pytest.raises(ValueError):
            sample_point(np.zeros(64), Grid(np.array([0.0, 0.5])))
