import math

import numpy as np
import pytest

from paneltest import (
    DegenerateBandwidthError,
    DimensionError,
    KernelConfig,
    ParameterError,
    SamplePanel,
    cross_gram,
    gaussian_kernel,
    gram,
    median_heuristic,
)


def test_gaussian_identical_inputs():
    assert gaussian_kernel([1.0, -2.0, 0.5], [1.0, -2.0, 0.5], 3.0) == 1.0


def test_gaussian_unit_distance_ratio():
    # squared distance equal to sigma^2 gives exp(-1)
    assert gaussian_kernel([0.0], [2.0], 2.0) == pytest.approx(math.exp(-1.0), abs=1e-15)


def test_gaussian_formula_hand_value():
    # ||x-y||^2 = 9 + 16 = 25, sigma = 5
    assert gaussian_kernel([0.0, 0.0], [3.0, 4.0], 5.0) == pytest.approx(math.exp(-1.0))


def test_gaussian_symmetry_exact():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y = rng.normal(size=(2, 6))
        s = float(rng.uniform(0.5, 4.0))
        assert gaussian_kernel(x, y, s) == gaussian_kernel(y, x, s)


def test_gaussian_errors():
    with pytest.raises(DimensionError):
        gaussian_kernel([1.0], [1.0, 2.0], 1.0)
    with pytest.raises(ParameterError):
        gaussian_kernel([1.0], [2.0], 0.0)
    with pytest.raises(ParameterError):
        gaussian_kernel([1.0], [2.0], -1.0)


def test_gram_single_row():
    k = gram(SamplePanel(np.array([[1.0, 2.0]])), KernelConfig.fixed(1.0))
    assert np.array_equal(k, [[1.0]])


def test_gram_identical_rows_all_ones():
    p = SamplePanel(np.ones((4, 3)))
    k = gram(p, KernelConfig.fixed(2.0))
    assert np.array_equal(k, np.ones((4, 4)))


def test_gram_hand_example():
    p = SamplePanel(np.array([[0.0], [1.0], [3.0]]))
    k = gram(p, KernelConfig.fixed(1.0))
    e = math.exp
    want = np.array(
        [[1.0, e(-1.0), e(-9.0)], [e(-1.0), 1.0, e(-4.0)], [e(-9.0), e(-4.0), 1.0]]
    )
    assert np.allclose(k, want, atol=1e-15)


def test_gram_unit_diagonal_and_symmetry():
    rng = np.random.default_rng(1)
    p = SamplePanel(rng.normal(size=(20, 5)))
    k = gram(p, KernelConfig.fixed(1.7))
    assert np.all(np.diag(k) == 1.0)
    assert np.max(np.abs(k - k.T)) < 1e-12
    assert np.all(k > 0.0) and np.all(k <= 1.0)


def test_gram_positive_semidefinite():
    rng = np.random.default_rng(2)
    for m in (5, 20, 50):
        p = SamplePanel(rng.normal(size=(m, 4)))
        k = gram(p, KernelConfig.fixed(1.0))
        assert np.linalg.eigvalsh(k).min() >= -1e-8


def test_cross_gram_matches_gram_on_same_panel():
    rng = np.random.default_rng(3)
    p = SamplePanel(rng.normal(size=(6, 4)))
    kc = KernelConfig.fixed(2.0)
    assert np.allclose(cross_gram(p, p, kc), gram(p, kc), atol=1e-12)


def test_cross_gram_hand_value():
    x = SamplePanel(np.array([[0.0]]))
    y = SamplePanel(np.array([[2.0]]))
    k = cross_gram(x, y, KernelConfig.fixed(2.0))
    assert k.shape == (1, 1)
    assert k[0, 0] == pytest.approx(math.exp(-1.0))


def test_cross_gram_transpose_identity():
    rng = np.random.default_rng(4)
    x = SamplePanel(rng.normal(size=(5, 3)))
    y = SamplePanel(rng.normal(size=(7, 3)))
    kc = KernelConfig.fixed(1.3)
    assert np.max(np.abs(cross_gram(x, y, kc).T - cross_gram(y, x, kc))) < 1e-12


def test_cross_gram_grid_mismatch():
    x = SamplePanel(np.zeros((2, 3)))
    y = SamplePanel(np.zeros((2, 4)))
    with pytest.raises(DimensionError):
        cross_gram(x, y, KernelConfig.fixed(1.0))


def test_median_heuristic_three_points():
    # pairwise distances {1, 2, 3} -> median 2
    p = SamplePanel(np.array([[0.0], [1.0], [3.0]]))
    assert median_heuristic(p) == 2.0


def test_median_heuristic_two_rows():
    p = SamplePanel(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert median_heuristic(p) == 5.0


def test_median_heuristic_keeps_zero_distances():
    # distances {0, 1, 1} -> median 1
    p = SamplePanel(np.array([[0.0], [0.0], [1.0]]))
    assert median_heuristic(p) == 1.0


def test_median_heuristic_degenerate():
    p = SamplePanel(np.zeros((3, 2)))
    with pytest.raises(DegenerateBandwidthError):
        median_heuristic(p)


def test_median_heuristic_row_permutation_invariant():
    rng = np.random.default_rng(5)
    rows = rng.normal(size=(9, 4))
    base = median_heuristic(SamplePanel(rows))
    for _ in range(5):
        shuffled = rows[rng.permutation(9)]
        assert median_heuristic(SamplePanel(shuffled)) == base


def test_median_heuristic_aggregates_two_panels():
    x = SamplePanel(np.array([[0.0], [1.0]]))
    y = SamplePanel(np.array([[3.0]]))
    # pooled rows 0, 1, 3 -> distances {1, 2, 3} -> median 2
    assert median_heuristic(x, y) == 2.0


def test_kernel_config_validation():
    with pytest.raises(ParameterError):
        KernelConfig.fixed(0.0)
    with pytest.raises(ParameterError):
        KernelConfig(bandwidth=None, rule="fixed")
    with pytest.raises(ParameterError):
        KernelConfig(rule="nope")


def test_kernel_config_resolution():
    p = SamplePanel(np.array([[0.0], [1.0], [3.0]]))
    assert KernelConfig.fixed(4.0).resolve(p) == 4.0
    assert KernelConfig.median_per_sample().resolve(p) == 2.0
    q = SamplePanel(np.array([[10.0], [11.0], [13.0]]))
    # per-sample ignores extra panels, aggregated pools them
    assert KernelConfig.median_per_sample().resolve(p, q) == 2.0
    assert KernelConfig.median_aggregated().resolve(p, q) > 2.0
