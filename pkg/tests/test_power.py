import numpy as np
import pytest

from paneltest import (
    GeneratorSpec,
    KernelConfig,
    ParameterError,
    SamplePanel,
    SearchGrid,
    SplitError,
    generate,
    hsic_power_criterion,
    median_scaled_grid,
    mmd_power_criterion,
    paper_grid,
    select_bandwidth,
    split_train_test,
)


def test_split_partitions_everything():
    train, test = split_train_test(8, 0.5, seed=1)
    assert len(train) == 4 and len(test) == 4
    assert sorted(np.concatenate([train, test])) == list(range(8))
    assert set(train).isdisjoint(test)


def test_split_deterministic():
    a = split_train_test(100, 0.5, seed=7)
    b = split_train_test(100, 0.5, seed=7)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    c = split_train_test(100, 0.5, seed=8)
    assert not np.array_equal(a[0], c[0])


def test_split_equal_ratio_100():
    train, test = split_train_test(100, 0.5, seed=0)
    assert len(train) == 50 and len(test) == 50


def test_split_too_small():
    with pytest.raises(SplitError):
        split_train_test(7, 0.5, seed=0)
    with pytest.raises(SplitError):
        split_train_test(20, 0.1, seed=0)


def test_mmd_criterion_zero_for_constant_panels():
    x = SamplePanel(np.ones((8, 3)))
    y = SamplePanel(np.ones((8, 3)))
    assert mmd_power_criterion(x, y, 1.0) == 0.0


def test_hsic_criterion_zero_for_constant_panels():
    x = SamplePanel(np.ones((8, 3)))
    y = SamplePanel(np.ones((8, 3)))
    assert hsic_power_criterion(x, y, 1.0, 1.0) == pytest.approx(0.0, abs=1e-10)


def test_mmd_criterion_scale_invariance():
    # scaling the data and the bandwidth together leaves the criterion fixed
    rng = np.random.default_rng(0)
    x = rng.normal(size=(10, 4))
    y = rng.normal(size=(10, 4)) + 1.0
    base = mmd_power_criterion(SamplePanel(x), SamplePanel(y), 2.0)
    scaled = mmd_power_criterion(SamplePanel(5 * x), SamplePanel(5 * y), 10.0)
    assert scaled == pytest.approx(base, abs=1e-10)


def test_mmd_criterion_larger_under_shift():
    wins = 0
    for seed in range(100):
        null = generate(GeneratorSpec("meanshift", m=16, n=16, t=10, delta_mu=0.0, seed=seed))
        shifted = generate(GeneratorSpec("meanshift", m=16, n=16, t=10, delta_mu=3.0, seed=seed))
        c0 = mmd_power_criterion(null[0], null[1], 7.0)
        c1 = mmd_power_criterion(shifted[0], shifted[1], 7.0)
        wins += c1 > c0
    assert wins >= 95


def test_hsic_criterion_larger_under_rotation():
    wins = 0
    for seed in range(100):
        indep = generate(
            GeneratorSpec("rotation", m=100, t=10, theta=0.0, coeff_dist="uniform", seed=seed)
        )
        mixed = generate(
            GeneratorSpec("rotation", m=100, t=10, theta=np.pi / 4, coeff_dist="uniform", seed=seed)
        )
        c0 = hsic_power_criterion(indep[0], indep[1], 10.0, 10.0)
        c1 = hsic_power_criterion(mixed[0], mixed[1], 10.0, 10.0)
        wins += c1 > c0
    assert wins >= 95


def test_hsic_criterion_permutation_invariance():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(10, 3))
    y = x + rng.normal(size=(10, 3))
    base = hsic_power_criterion(SamplePanel(x), SamplePanel(y), 2.0, 2.0)
    perm = rng.permutation(10)
    moved = hsic_power_criterion(SamplePanel(x[perm]), SamplePanel(y[perm]), 2.0, 2.0)
    assert moved == pytest.approx(base, abs=1e-10)


def test_select_single_point_grid():
    x, y = generate(GeneratorSpec("meanshift", m=12, n=12, t=5, delta_mu=1.0, seed=0))
    grid = SearchGrid(np.array([3.0]))
    result = select_bandwidth(x, y, grid, "mmd")
    assert result.selected == 3.0
    assert result.criterion.shape == (1,)


def test_selected_always_in_grid():
    grid = SearchGrid(np.linspace(1.0, 20.0, 20))
    for seed in range(5):
        x, y = generate(GeneratorSpec("meanshift", m=12, n=12, t=5, delta_mu=2.0, seed=seed))
        result = select_bandwidth(x, y, grid, "mmd")
        assert result.selected in grid.values


def test_select_deterministic_and_order_free():
    x, y = generate(GeneratorSpec("meanshift", m=16, n=16, t=5, delta_mu=2.0, seed=3))
    grid = SearchGrid(np.array([1.0, 4.0, 9.0, 16.0]))
    r1 = select_bandwidth(x, y, grid, "mmd", seed=5)
    r2 = select_bandwidth(x, y, grid, "mmd", seed=5)
    assert r1.selected == r2.selected
    assert np.array_equal(r1.criterion, r2.criterion)
    # criterion per point equals the standalone criterion (order independence)
    for sigma, value in zip(grid.values, r1.criterion):
        assert mmd_power_criterion(x, y, sigma, seed=5) == pytest.approx(value, abs=1e-12)


def test_select_hsic_pair_and_tie_breaking():
    x, y = generate(GeneratorSpec("sharedcoeff", m=16, t=5, seed=4))
    grid = SearchGrid(np.array([2.0, 5.0]))
    result = select_bandwidth(x, y, grid, "hsic")
    assert result.criterion.shape == (2, 2)
    i, j = np.unravel_index(result.criterion.argmax(), (2, 2))
    assert result.selected == (grid.values[i], grid.values[j])
    # exact ties resolve to the smallest pair in row-major order
    flat = SearchGrid(np.array([1.0, 2.0]))
    constant = SamplePanel(np.ones((8, 3)))
    tie = select_bandwidth(constant, constant, flat, "hsic")
    assert tie.selected == (1.0, 1.0)


def test_truncation_equalises_sizes():
    rng = np.random.default_rng(5)
    x = SamplePanel(rng.normal(size=(12, 4)))
    y = SamplePanel(rng.normal(size=(9, 4)))
    value = mmd_power_criterion(x, y, 2.0, seed=11)
    assert np.isfinite(value)
    # deterministic given the seed
    assert mmd_power_criterion(x, y, 2.0, seed=11) == value


def test_paper_grid_meanshift_buckets():
    assert np.array_equal(paper_grid("meanshift", 1.5).values, np.arange(1.0, 22.0, 2.0))
    assert np.array_equal(paper_grid("meanshift", 2.5).values, np.arange(6.0, 27.0, 2.0))
    assert np.array_equal(paper_grid("meanshift", 4.0).values, np.arange(11.0, 32.0, 2.0))
    assert np.array_equal(paper_grid("meanshift", 7.0).values, np.arange(16.0, 37.0, 2.0))


def test_paper_grid_varshift_buckets():
    assert np.array_equal(paper_grid("varshift", 2.0).values, np.arange(10.0, 31.0, 2.0))
    assert np.array_equal(paper_grid("varshift", 9.0).values, np.arange(20.0, 41.0, 2.0))
    assert np.array_equal(paper_grid("varshift", 20.0).values, np.arange(30.0, 51.0, 2.0))


def test_paper_grid_rotation_presets():
    student = paper_grid("rotation_student")
    assert len(student) == 20
    assert student.values[0] == 1.0 and student.values[-1] == 20.0
    uniform = paper_grid("rotation_uniform")
    assert len(uniform) == 40
    assert uniform.values[0] == 1.0 and uniform.values[-1] == 40.0
    assert np.allclose(np.diff(uniform.values), 1.0)


def test_paper_grid_fallback_outside_range():
    x, y = generate(GeneratorSpec("meanshift", m=10, n=10, t=5, delta_mu=9.5, seed=0))
    grid = paper_grid("meanshift", 9.5, x, y)
    assert grid.provenance == "median_scaled"
    assert len(grid) == 11
    with pytest.raises(ParameterError):
        paper_grid("meanshift", 9.5)  # no panels for the fallback


def test_median_scaled_grid_spans_two_octaves():
    rng = np.random.default_rng(6)
    p = SamplePanel(rng.normal(size=(10, 3)))
    grid = median_scaled_grid(p)
    centre = grid.values[5]
    assert grid.values[0] == pytest.approx(centre / 4)
    assert grid.values[-1] == pytest.approx(centre * 4)


def test_grid_validation():
    with pytest.raises(ParameterError):
        SearchGrid(np.array([]))
    with pytest.raises(ParameterError):
        SearchGrid(np.array([1.0, 1.0]))
    with pytest.raises(ParameterError):
        SearchGrid(np.array([0.0, 1.0]))
