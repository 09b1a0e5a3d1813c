import numpy as np
import pytest

from levy_schrodinger.cauchy_examples import gaussian_oscillator
from levy_schrodinger.dirichlet import (beurling_deny_extract, bump, duality_suite, form_doob,
                                        form_levy, invariance_residual, refinement_delta,
                                        write_report)
from levy_schrodinger.errors import ValidationError
from levy_schrodinger.grid import Grid, GridFunction
from levy_schrodinger.levy_core import gaussian_triplet


def test_jump_density_student3(s3, cauchy):
    bd = beurling_deny_extract(s3.ground_state(), cauchy)
    assert float(bd.jump_density(0.0, 1.0)) == pytest.approx(1.0 / (2.0 * np.pi**2), rel=1e-12)
    assert float(bd.killing_density(0.3)) == 0.0
    assert float(bd.diffusion_density(0.3)) == 0.0
    with pytest.raises(ValidationError):
        bd.jump_density(1.0, 1.0)


def test_diffusion_density_gaussian():
    grid = Grid.symmetric(10.0, 512)
    g0 = gaussian_oscillator(grid)
    bd = beurling_deny_extract(g0, gaussian_triplet(1.0))
    x = np.array([0.0, 0.7])
    assert np.allclose(bd.diffusion_density(x), 0.5 * np.exp(-x**2) / np.sqrt(np.pi))


def _torus_gap(f, g, grid):
    # torus minus line form, leading order: -(int f)(int g) sum_{m != 0} nu(m L)
    L = grid.x_max - grid.x_min
    return -grid.h**2 * np.sum(f.values) * np.sum(g.values) * np.pi / (3 * L * L)


def test_levy_form_against_fourier(cauchy):
    # torus form (1/2pi) sum |u| |f^(u)|^2 du, corrected for the periodic images
    grid = Grid.symmetric(40.0, 4096)
    f = GridFunction(grid, bump(0.0, 2.0)(grid.x))
    fh = np.fft.fft(f.values) * grid.h
    u = grid.frequencies()
    torus = float(np.sum(np.abs(u) * np.abs(fh) ** 2) * (u[1] - u[0]) / (2 * np.pi))
    line = form_levy(f, f, cauchy)
    assert abs(torus - _torus_gap(f, f, grid) - line) < 1e-6 * line
    assert torus < line


def test_periodic_levy_form_matches_direct(cauchy):
    grid = Grid.symmetric(40.0, 2048)
    f = GridFunction(grid, bump(0.5, 1.5)(grid.x))
    g = GridFunction(grid, bump(-0.5, 1.0)(grid.x))
    torus = form_levy(f, g, cauchy, periodic=True)
    assert torus - _torus_gap(f, g, grid) == pytest.approx(form_levy(f, g, cauchy), rel=1e-5)


def test_form_requires_compact_support(cauchy):
    grid = Grid.symmetric(5.0, 256)
    f = GridFunction(grid, 1.0 / (1.0 + grid.x**2))
    with pytest.raises(ValidationError, match="jump part diverges"):
        form_levy(f, f, cauchy)


@pytest.mark.parametrize("backend", ["numba", "numpy"])
def test_doob_form_backends(s3_ground, cauchy, backend):
    grid = s3_ground.grid
    f = GridFunction(grid, bump(0.3, 1.2)(grid.x))
    g = GridFunction(grid, bump(-0.5, 0.8, 2.0)(grid.x))
    ref = form_doob(f, g, s3_ground, cauchy, backend="numpy")
    assert form_doob(f, g, s3_ground, cauchy, backend=backend) == pytest.approx(ref, rel=1e-11)
    assert form_doob(g, f, s3_ground, cauchy, backend=backend) == form_doob(
        f, g, s3_ground, cauchy, backend=backend)


def test_duality_levy(cauchy):
    r = duality_suite(None, cauchy, Grid.symmetric(40.0, 4096), n_pairs=5, seed=2)
    assert r["max_relative_residual"] < 1e-3
    assert r["max_symmetry_defect"] == 0.0
    assert r["positive_semidefinite"] and r["cauchy_schwarz"]


@pytest.mark.parametrize("preset", ["s3", "c1"])
def test_duality_transformed(preset, cauchy, request):
    ex = request.getfixturevalue(preset)
    r = duality_suite(ex.ground_state(), cauchy, ex.grid(), n_pairs=5, seed=3)
    assert r["max_relative_residual"] < 1e-3
    assert r["max_symmetry_defect"] == 0.0
    assert r["positive_semidefinite"] and r["cauchy_schwarz"]


def test_duality_gaussian():
    grid = Grid.symmetric(10.0, 1024)
    r = duality_suite(gaussian_oscillator(grid), gaussian_triplet(1.0), grid, n_pairs=5, seed=1)
    assert r["max_relative_residual"] < 1e-6


@pytest.mark.parametrize("preset", ["s3", "c1"])
def test_mu_invariance(preset, cauchy, request):
    ex = request.getfixturevalue(preset)
    g0 = ex.ground_state()
    for c in (-1.0, 0.0, 2.5):
        f = GridFunction(g0.grid, bump(c, 1.5)(g0.grid.x))
        assert invariance_residual(f, g0, cauchy) < 1e-6


def test_refinement_converges(s3, cauchy):
    r = refinement_delta(bump(0.0, 1.5), s3.ground_state, cauchy, s3.grid(20.0, 1024))
    assert r["relative_change"] < 1e-4


def test_report_is_json(tmp_path, cauchy):
    r = duality_suite(None, cauchy, Grid.symmetric(20.0, 512), n_pairs=2)
    write_report(r, tmp_path / "r.json")
    import json
    assert json.loads((tmp_path / "r.json").read_text())["n_pairs"] == 2
