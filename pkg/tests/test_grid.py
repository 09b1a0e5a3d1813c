import numpy as np
import pytest

from levy_schrodinger.errors import ValidationError
from levy_schrodinger.grid import Grid, GridFunction, derivative, extend, fit_tail, sample


def test_grid_layout():
    g = Grid.symmetric(10.0, 64)
    assert g.h == pytest.approx(20.0 / 64)
    assert g.x[0] == -10.0 and g.x[32] == 0.0
    assert g.index_of(0.0) == 32


@pytest.mark.parametrize("n", [7, 100, 0])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValidationError):
        Grid.symmetric(1.0, n)


def test_csv_roundtrip(tmp_path):
    g = Grid.symmetric(3.0, 32)
    f = GridFunction(g, np.exp(-g.x**2) * (1 + 0.5j))
    f.to_csv(tmp_path / "f.csv")
    back = GridFunction.from_csv(tmp_path / "f.csv")
    assert back.grid.n == g.n and back.grid.x_min == pytest.approx(g.x_min)
    assert np.array_equal(back.values, f.values)


def test_json_roundtrip(tmp_path):
    g = Grid.symmetric(3.0, 16)
    f = GridFunction(g, np.cos(g.x))
    back = GridFunction.from_json(f.to_json())
    assert np.array_equal(back.values, f.values)


def test_csv_rejects_nonuniform(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,re,im\n0,1,0\n1,1,0\n3,1,0\n")
    with pytest.raises(ValidationError):
        GridFunction.from_csv(p)


def test_fit_tail_recovers_power_law():
    x = np.linspace(50, 100, 200)
    tail = fit_tail(x, 3.0 * x**-2.0, center=0.0, side="right", fraction=1.0)
    assert tail.power == pytest.approx(2.0, abs=1e-10)
    assert tail.coef == pytest.approx(3.0, rel=1e-9)


def test_extension_continues_algebraic_tail():
    g = Grid.symmetric(40.0, 1024)
    f = sample(g, lambda x: 1.0 / (1.0 + x * x))
    ext = extend(f, 256)
    xe = ext.x[:256]
    assert np.allclose(ext.values[:256], 1.0 / (1.0 + xe**2), rtol=1e-3)


@pytest.mark.parametrize("order", [1, 2])
def test_eighth_order_derivative(order):
    g = Grid.symmetric(8.0, 512)
    f = sample(g, lambda x: np.exp(-x * x))
    d = derivative(extend(f, 8), order)
    exact = -2 * g.x * np.exp(-g.x**2) if order == 1 else (4 * g.x**2 - 2) * np.exp(-g.x**2)
    assert np.max(np.abs(d - exact)) < 1e-8
