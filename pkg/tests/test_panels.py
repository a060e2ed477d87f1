import numpy as np
import pytest

from paneltest import DimensionError, InputError, SamplePanel


def test_default_grid():
    p = SamplePanel(np.zeros((3, 4)))
    assert np.array_equal(p.grid, [0.0, 1.0, 2.0, 3.0])
    assert p.m == 3 and p.n_times == 4


def test_one_dim_input_becomes_single_row():
    p = SamplePanel(np.array([1.0, 2.0, 3.0]))
    assert p.values.shape == (1, 3)


def test_rejects_non_finite():
    with pytest.raises(InputError):
        SamplePanel(np.array([[1.0, np.nan]]))
    with pytest.raises(InputError):
        SamplePanel(np.array([[1.0, np.inf]]))


def test_rejects_bad_grid():
    with pytest.raises(DimensionError):
        SamplePanel(np.zeros((2, 3)), grid=[0.0, 1.0])
    with pytest.raises(InputError):
        SamplePanel(np.zeros((2, 3)), grid=[0.0, 2.0, 1.0])


def test_take_preserves_grid():
    p = SamplePanel(np.arange(12.0).reshape(4, 3), grid=[0.0, 0.5, 1.0])
    sub = p.take([2, 0])
    assert np.array_equal(sub.values, [[6.0, 7.0, 8.0], [0.0, 1.0, 2.0]])
    assert np.array_equal(sub.grid, p.grid)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    p = SamplePanel(rng.normal(size=(5, 7)), grid=np.linspace(0, 1, 7))
    path = tmp_path / "panel.csv"
    p.to_csv(path)
    q = SamplePanel.from_csv(path)
    assert np.array_equal(p.values, q.values)
    assert np.array_equal(p.grid, q.grid)


def test_from_csv_rejects_garbage(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0.0,1.0\n1.0,abc\n")
    with pytest.raises(InputError):
        SamplePanel.from_csv(path)
