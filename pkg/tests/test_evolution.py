import hashlib
import json

import numpy as np
import pytest

from levy_schrodinger.errors import BlowUpError, ValidationError
from levy_schrodinger.evolution import EvolutionConfig, evolve, stationarity_residual, write_bundle
from levy_schrodinger.grid import Grid, GridFunction
from levy_schrodinger.levy_core import spectral_symbol

# Cauchy tails are algebraic, so small test grids always carry some edge mass
pytestmark = pytest.mark.filterwarnings("ignore:.*wraparound:RuntimeWarning")


@pytest.fixture(scope="module")
def packet():
    grid = Grid.symmetric(40.0, 2048)
    psi0 = GridFunction(grid, np.exp(-(grid.x - 1.0) ** 2 + 0.5j * grid.x) / (np.pi / 2) ** 0.25)
    V = GridFunction(grid, 0.1 * grid.x**2 / (1 + 0.01 * grid.x**2))
    return psi0, V


def _final(psi0, V, sym, dt, t=1.0):
    return evolve(psi0, V, sym, EvolutionConfig(dt=dt, t_final=t, record_every=10**9))[-1].values


def test_config_validation():
    with pytest.raises(ValidationError):
        EvolutionConfig(dt=0.0, t_final=1.0)
    with pytest.raises(ValidationError):
        EvolutionConfig(dt=2.0, t_final=1.0)
    assert EvolutionConfig(dt=0.01, t_final=5.0).steps == 500


def test_norm_is_conserved(packet, cauchy):
    psi0, V = packet
    snaps = evolve(psi0, V, spectral_symbol(cauchy), EvolutionConfig(dt=0.01, t_final=2.0,
                                                                     record_every=20))
    assert snaps.norm_drift < 1e-12
    assert len(snaps) == 11 and snaps.times[-1] == pytest.approx(2.0)


def test_strang_is_second_order(packet, cauchy):
    psi0, V = packet
    sym = spectral_symbol(cauchy)
    ref = _final(psi0, V, sym, 1 / 1024)
    h = psi0.grid.h
    errs = [np.sqrt(h * np.sum(np.abs(_final(psi0, V, sym, dt) - ref) ** 2))
            for dt in (0.1, 0.05, 0.025)]
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5)), ratios


def test_stationary_state_student3(s3, cauchy):
    grid = s3.evolution_grid()
    psi0 = GridFunction(grid, s3.phi(grid.x))
    V = GridFunction(grid, s3.V(grid.x))
    with pytest.warns(RuntimeWarning, match="wraparound"):
        snaps = evolve(psi0, V, spectral_symbol(cauchy), EvolutionConfig(0.01, 1.0, 10))
    assert stationarity_residual(psi0, s3.energy, snaps) < 1e-3


def test_zero_time_gives_zero_residual(s3, cauchy):
    grid = s3.grid()
    psi0 = GridFunction(grid, s3.phi(grid.x))
    snaps = evolve(psi0, GridFunction(grid, s3.V(grid.x)), spectral_symbol(cauchy),
                   EvolutionConfig(0.01, 0.0))
    assert len(snaps) == 1
    assert stationarity_residual(psi0, s3.energy, snaps) == 0.0


def test_wrong_energy_shows_phase_mismatch(s3, cauchy):
    # reference phase off by 1: at t = pi the two states are opposite, distance 2 ||psi0||
    grid = s3.evolution_grid()
    psi0 = GridFunction(grid, s3.phi(grid.x))
    with pytest.warns(RuntimeWarning):
        snaps = evolve(psi0, GridFunction(grid, s3.V(grid.x)), spectral_symbol(cauchy),
                       EvolutionConfig(np.pi / 300, np.pi, 300))
    final = GridFunction(grid, snaps[-1].values)
    res = np.sqrt(grid.h * np.sum(np.abs(final.values - np.exp(-1j * (s3.energy + 1.0) * np.pi)
                                         * psi0.values) ** 2))
    assert res == pytest.approx(2.0 * psi0.norm(), abs=2e-3)


def test_blow_up_raises():
    # a non-unitary symbol amplifies high modes until the state overflows
    grid = Grid.symmetric(10.0, 128)
    psi0 = GridFunction(grid, np.exp(-grid.x**2))
    V = GridFunction(grid, np.zeros(grid.n))
    with np.errstate(all="ignore"), pytest.raises(BlowUpError, match="step"):
        evolve(psi0, V, lambda k: -1e4j * np.abs(k), EvolutionConfig(0.1, 5.0, 1))


def test_bundle_digests(tmp_path, packet, cauchy):
    psi0, V = packet
    snaps = evolve(psi0, V, spectral_symbol(cauchy), EvolutionConfig(0.05, 0.2, 2))
    path = write_bundle(tmp_path, psi0, 0.0, snaps, {"note": "test"})
    doc = json.loads(path.read_text())
    assert len(doc["snapshots"]) == len(snaps) == 3
    for e in doc["snapshots"]:
        assert hashlib.sha256((tmp_path / e["file"]).read_bytes()).hexdigest() == e["sha256"]
    assert doc["note"] == "test"
    assert doc["snapshots"][0]["residual"] == 0.0
