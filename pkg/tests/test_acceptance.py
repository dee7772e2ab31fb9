"""Exit criteria, one marked test per checkable clause.

The terminal summary prints a PASS/FAIL line per criterion number.
"""

import json
import os
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adtc.cli import main, manifest_path
from adtc.config import config_from_manifest
from adtc.experiments import (
    NORMAL,
    TIME_CRYSTAL,
    ExperimentSpec,
    FIXED_N,
    default_ratios,
    length_sweep,
    omega_sweep,
)
from adtc.model import SystemParams, assemble_hamiltonian, make_initial_state
from adtc.observables import (
    loschmidt_echo,
    photon_variance_a1,
    return_probability,
    window_mean,
)
from adtc.propagator import TimeGrid, component_series, diagonalize, evolve_on_grid, evolve_times, evolve_to

from conftest import rel_err
from oracles import integrate_schrodinger, rabi_population

BASE = SystemParams()
TB = BASE.round_trip_time
LATE = (200.0, 400.0)
WORKERS = min(4, os.cpu_count() or 1)

criterion = pytest.mark.criterion


# 1. propagator oracles ---------------------------------------------------


@criterion(1)
@pytest.mark.parametrize("omega", [1e-4, 1e-3, 5e-3])
def test_c1_rabi_oracle(omega):
    p = replace(BASE, Omega=omega, g=0.0)
    eig = diagonalize(assemble_hamiltonian(p))
    t = TimeGrid.span(10.0, 0.001, unit=TB).times
    y = np.abs(component_series(eig, make_initial_state("special", 50), t, 0)) ** 2
    err = np.max(np.abs(y - rabi_population(omega, t)))
    print(f"rabi Omega={omega:g}: max error {err:.2e}")
    assert err <= 1e-8


@criterion(1)
@pytest.mark.parametrize("initial", ["special", "cavity2", "superposition"])
def test_c1_ode_oracle_n4(initial):
    p = replace(BASE, n_modes=4)
    h = assemble_hamiltonian(p)
    psi0 = make_initial_state(initial, 4)
    t = TimeGrid.span(10.0, 0.01, unit=TB).times
    ref = integrate_schrodinger(h, psi0, t)
    err = np.max(np.abs(evolve_times(diagonalize(h), psi0, t) - ref))
    print(f"ODE oracle ({initial}): max error {err:.2e}")
    assert err <= 1e-8


# 2. conservation over 1000 T_B ---------------------------------------------


@pytest.fixture(scope="module")
def long_run():
    h = assemble_hamiltonian(BASE)
    eig = diagonalize(h)
    psi0 = make_initial_state("superposition", 50)
    traj = evolve_on_grid(eig, psi0, TimeGrid.span(1000.0, 0.01, unit=TB))
    return h, eig, psi0, traj


@criterion(2)
def test_c2_norm_drift(long_run):
    _, _, _, traj = long_run
    drift = np.max(np.abs(traj.norms() - 1.0))
    print(f"norm drift {drift:.2e}")
    assert drift <= 1e-10


@criterion(2)
def test_c2_energy_drift(long_run):
    h, _, psi0, traj = long_run
    e0 = np.real(np.vdot(psi0, h @ psi0))
    energies = np.real(np.einsum("ij,ij->i", traj.states.conj(), traj.states @ h.T))
    drift = np.max(np.abs(energies - e0))
    print(f"energy drift {drift:.2e}")
    assert drift <= 1e-10


@criterion(2)
def test_c2_semigroup(long_run):
    _, eig, psi0, _ = long_run
    for t1, t2 in [(0.37 * TB, 999.63 * TB), (500.0 * TB, 500.0 * TB), (123.4 * TB, 0.0)]:
        err = np.max(np.abs(evolve_to(eig, evolve_to(eig, psi0, t1), t2) - evolve_to(eig, psi0, t1 + t2)))
        assert err <= 1e-8


@criterion(2)
def test_c2_time_reversal(long_run):
    _, eig, psi0, _ = long_run
    for t in (1.0 * TB, 333.3 * TB, 1000.0 * TB):
        back = evolve_to(eig, np.conj(evolve_to(eig, psi0, t)), t)
        assert np.max(np.abs(back - np.conj(psi0))) <= 1e-8


# 3. echo contrast at the default parameters -----------------------------------


def late_echo(echo_run, ratio, initial="special"):
    echo, _, _ = echo_run(ratio, initial)
    value = window_mean(echo, *LATE)
    print(f"late echo mean Omega={ratio} Omega_TC, {initial}: {value:.4f}")
    return value


@criterion(3)
def test_c3_time_crystal_echo_stays_high(echo_run):
    assert late_echo(echo_run, 0.5) >= 0.5


@criterion(3)
def test_c3_normal_echo_is_small(echo_run):
    assert late_echo(echo_run, 10.0) <= 0.1


@criterion(3)
def test_c3_contrast_ratio(echo_run):
    ratio = late_echo(echo_run, 0.5) / late_echo(echo_run, 10.0)
    print(f"contrast ratio {ratio:.3f}")
    assert ratio >= 5


@criterion(3)
def test_c3_orthogonal_state_echo_is_order_inverse_n(echo_run):
    assert late_echo(echo_run, 0.5, "cavity2") < 0.15


@criterion(3)
def test_c3_superposition_lies_between(echo_run):
    special = late_echo(echo_run, 0.5, "special")
    orthogonal = late_echo(echo_run, 0.5, "cavity2")
    mixed = late_echo(echo_run, 0.5, "superposition")
    assert min(special, orthogonal) < mixed < max(special, orthogonal)


# 4. period doubling --------------------------------------------------------


@criterion(4)
def test_c4_doubled_period_below_transition(return_run):
    _, period, _ = return_run(0.5)
    print(f"period at 0.5 Omega_TC: {period.period:.3f} T_B")
    assert abs(period.period - 2.0) <= 0.2


@criterion(4)
def test_c4_single_period_above_transition(return_run):
    _, period, _ = return_run(10.0)
    print(f"period at 10 Omega_TC: {period.period:.3f} T_B")
    assert abs(period.period - 1.0) <= 0.1


@criterion(4)
def test_c4_early_decay_rate_matches_gamma(return_run):
    gamma_tb = BASE.with_omega_ratio(0.5).gamma * TB
    assert gamma_tb == pytest.approx(0.5, rel=1e-14)
    _, _, rate = return_run(0.5)
    print(f"fitted rate {rate:.4f} / T_B vs gamma T_B = {gamma_tb}")
    assert rel_err(rate, gamma_tb) <= 0.3


# 5. variance maximum -------------------------------------------------------


@pytest.fixture(scope="module")
def variance_sweeps():
    return {
        kind: omega_sweep(ExperimentSpec(initial=kind), default_ratios(), workers=WORKERS)
        for kind in ("special", "cavity2")
    }


@criterion(5)
def test_c5_special_argmax_near_transition(variance_sweeps):
    sweep = variance_sweeps["special"]
    print(f"argmax Omega/Omega_TC = {sweep.argmax_variance}, peak {sweep.variance.max():.4f}")
    assert 0.5 <= sweep.argmax_variance <= 1.5


@criterion(5)
def test_c5_special_endpoints_below_peak(variance_sweeps):
    v = variance_sweeps["special"].variance
    assert v[0] < v.max() and v[-1] < v.max()
    assert variance_sweeps["special"].has_interior_peak()


@criterion(5)
def test_c5_orthogonal_state_has_no_peak(variance_sweeps):
    assert not variance_sweeps["cavity2"].has_interior_peak()


# 6. length-driven transition -----------------------------------------------


@pytest.fixture(scope="module")
def length_pair():
    spec = ExperimentSpec(epsilon_override=1e-3, length=250.0)
    return length_sweep(spec, [250.0, 10.0], omega_absolute=1e-2, n_mode_policy=FIXED_N)


def _at(sweep, length):
    return next(pt for pt in sweep.points if pt.axis_value == length)


@criterion(6)
def test_c6_long_resonator_is_normal(length_pair):
    pt = _at(length_pair, 250.0)
    print(f"250 lambda0: echo {pt.echo_mean:.4f}, period {pt.period:.3f}, {pt.regime.kind}")
    assert pt.echo_mean <= 0.2
    assert pt.regime.kind == NORMAL


@criterion(6)
def test_c6_short_resonator_echo_stays_high(length_pair):
    pt = _at(length_pair, 10.0)
    print(f"10 lambda0: echo {pt.echo_mean:.4f}")
    assert pt.echo_mean >= 0.5


@criterion(6)
def test_c6_short_resonator_is_time_crystal(length_pair):
    pt = _at(length_pair, 10.0)
    print(f"10 lambda0: period {pt.period:.3f} T_B, {pt.regime.kind}")
    assert abs(pt.period - 2.0) <= 0.2
    assert pt.regime.kind == TIME_CRYSTAL


@criterion(6)
def test_c6_gamma_independent_of_length(length_pair):
    g250, g10 = (_at(length_pair, x).gamma for x in (250.0, 10.0))
    assert abs(g250 - g10) <= 2 * np.finfo(float).eps * g250


# 7. observable bounds ------------------------------------------------------


@criterion(7)
@settings(max_examples=120, deadline=None)
@given(
    ratio=st.floats(0.0, 10.0),
    g=st.floats(1e-3, 0.05),
    dw=st.floats(1e-3, 0.1),
    half=st.integers(1, 12),
    eps=st.floats(-1e-2, 1e-2),
    seed=st.integers(0, 2**32 - 1),
)
def test_c7_observable_bounds(ratio, g, dw, half, eps, seed):
    p = SystemParams(g=g, delta_omega=dw, n_modes=2 * half, epsilon=eps).with_omega_ratio(ratio)
    rng = np.random.default_rng(seed)
    psi0 = make_initial_state(rng.normal(size=p.dim) + 1j * rng.normal(size=p.dim), p.n_modes)
    grid = TimeGrid.span(30.0, 0.1, unit=p.round_trip_time)
    a = evolve_on_grid(diagonalize(assemble_hamiltonian(p)), psi0, grid)
    b = evolve_on_grid(diagonalize(assemble_hamiltonian(p, use_epsilon=True)), psi0, grid)
    echo = loschmidt_echo(a, b).values
    ret = return_probability(a, psi0).values
    var = photon_variance_a1(a).values
    assert np.all((echo >= 0) & (echo <= 1))
    assert np.all((ret >= 0) & (ret <= 1))
    assert np.all((var >= 0) & (var <= 0.25))
    assert echo[0] == pytest.approx(1.0, abs=1e-12)
    assert ret[0] == pytest.approx(1.0, abs=1e-12)
    same = loschmidt_echo(a, a).values
    assert np.max(np.abs(same - 1.0)) <= 1e-12


# 8. reproducibility --------------------------------------------------------


def _run_twice(argv, out):
    """Run the same command line twice; return both (data, manifest) pairs."""
    runs = []
    for _ in range(2):
        assert main([*argv, "--out", str(out)]) == 0
        data = out.read_bytes()
        side = manifest_path(out)
        manifest = json.loads(side.read_text()) if side.exists() else None
        runs.append((data, manifest))
    return runs


@criterion(8)
@pytest.mark.parametrize(
    "argv",
    [
        ["echo", "--omega-ratio", "0.5", "--t-max", "30"],
        ["return", "--omega-ratio", "0.5,10", "--t-max", "30"],
        ["omega-sweep", "--initial", "special", "--t-max", "300", "--dt", "0.05"],
    ],
    ids=["echo", "return", "omega-sweep"],
)
def test_c8_identical_invocations_identical_csv(tmp_path, argv):
    if argv[0] == "omega-sweep":
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("t0 = 100\nm = 200\nlate_lo = 100\nlate_hi = 300\nratio_start = 0.5\nratio_stop = 1.5\nratio_step = 0.25\n")
        argv = [*argv, "--config", str(cfg)]
    (d1, m1), (d2, m2) = _run_twice(argv, tmp_path / "run.csv")
    assert d1 == d2
    m1.pop("wall_clock_s"), m2.pop("wall_clock_s")
    assert m1 == m2


@criterion(8)
def test_c8_identical_invocations_identical_json(tmp_path):
    (d1, _), (d2, _) = _run_twice(["echo", "--t-max", "25", "--format", "json"], tmp_path / "run.json")
    docs = [json.loads(d) for d in (d1, d2)]
    for doc in docs:
        doc["manifest"].pop("wall_clock_s")
    assert docs[0] == docs[1]


@criterion(8)
def test_c8_manifest_round_trips(tmp_path):
    out = tmp_path / "r.csv"
    argv = ["length-sweep", "--epsilon", "1e-3", "--lengths", "250,10", "--t-max", "40", "--out", str(out)]
    assert main(argv) == 0
    manifest = json.loads(manifest_path(out).read_text())
    cfg = config_from_manifest(manifest)
    assert cfg.kind == "length-sweep"
    assert cfg.lengths == (250.0, 10.0)
    assert cfg.to_dict() == manifest["config"]
    for key in ("T_B", "Omega_TC", "gamma", "D"):
        assert key in manifest["derived"]
