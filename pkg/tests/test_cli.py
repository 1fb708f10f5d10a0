import csv
import json
import math

import numpy as np
import pytest

from riccati_dyn.analytic import cubic_solution
from riccati_dyn.cli import main
from riccati_dyn.conserved import energy, energy_2d, ixw, k_functions, kij_constant
from riccati_dyn.integrate import integrate
from riccati_dyn.model import CubicRiccati, NonlinearOscillator, Product2D, State
from riccati_dyn.report import read_csv


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def _json(text):
    return json.loads(text)


# --- simulate ----------------------------------------------------------------------------


def test_simulate_cubic_energy_level(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, text, _ = _run(capsys, "simulate", "--system", "cubic", "--k", 1, "--E", -1, "--t-end", 10, "--out", out)
    assert code == 0 and _json(text)["status"] == "Completed"
    header, data = read_csv(out)
    assert header == ["t", "x", "v"]
    i = int(np.argmin(np.abs(data[:, 0] - 1.0)))
    assert data[i, 1] == pytest.approx(cubic_solution(1.0, -1.0, data[i, 0]), abs=1e-8)
    assert np.max(np.abs(data[:, 1] - [cubic_solution(1.0, -1.0, t) for t in data[:, 0]])) <= 1e-8


def test_simulate_resampled_hits_t_equal_one(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, _, _ = _run(capsys, "simulate", "--E", -1, "--t-end", 10, "--samples", 11, "--out", out)
    assert code == 0
    _, data = read_csv(out)
    np.testing.assert_allclose(data[:, 0], np.arange(11.0))
    assert data[1, 1] == pytest.approx(1.0, abs=1e-8)


def _fundamental_power_fraction(x):
    F = np.abs(np.fft.rfft(x - x.mean())) ** 2
    return F[np.argmax(F)] / F.sum()


def test_simulate_oscillator_near_sine(tmp_path, capsys):
    # one full period sampled uniformly; the fundamental dominates at E = 0.2 and
    # the nonlinearity shows up as harmonics at E = 0.8
    fractions = {}
    for E in (0.2, 0.8):
        out = tmp_path / f"o{E}.csv"
        code, _, _ = _run(capsys, "simulate", "--system", "oscillator", "--k", 1, "--w", 1, "--E", E,
                          "--t-end", 20, "--samples", 4001, "--out", out)
        assert code == 0
        _, data = read_csv(out)
        assert np.max(np.abs([ixw(1.0, 1.0, a, b) - E for a, b in data[:, 1:]])) <= 1e-8
        one_period = data[:, 0] < 2 * math.pi
        fractions[E] = _fundamental_power_fraction(data[one_period, 1])
    assert fractions[0.2] >= 0.9
    assert fractions[0.8] <= 0.7


def test_simulate_singular_exit(tmp_path, capsys):
    code, text, _ = _run(capsys, "simulate", "--system", "cubic", "--k", 1, "--E", 1, "--t-end", 2,
                         "--out", tmp_path / "s.csv")
    assert code == 2
    rep = _json(text)
    assert rep["status"] == "Singular" and rep["t_event"] == pytest.approx(1.0, abs=1e-4)


def test_simulate_usage_errors(tmp_path, capsys):
    code, _, err = _run(capsys, "simulate", "--system", "cubic", "--out", tmp_path / "u.csv")
    assert code == 1 and "energy" in err
    code, _, _ = _run(capsys, "simulate", "--system", "nope")
    assert code == 1
    code, _, err = _run(capsys, "simulate", "--E", 0, "--out", tmp_path / "z.csv")
    assert code == 1 and err


def test_simulate_csv_round_trip_is_bit_faithful(tmp_path, capsys):
    out = tmp_path / "rt.csv"
    code, _, _ = _run(capsys, "simulate", "--system", "oscillator", "--x0", 0.3, "--v0", -0.1,
                      "--t-end", 3, "--out", out)
    assert code == 0
    traj = integrate(NonlinearOscillator(1.0, 1.0), State.one(0.3, -0.1), 3.0)
    _, data = read_csv(out)
    np.testing.assert_array_equal(data[:, 0], traj.t)
    np.testing.assert_array_equal(data[:, 1:], traj.y)
    # re-evaluated conserved quantity from the file alone
    E = [energy(NonlinearOscillator(1.0, 1.0), State.one(x, v)) for x, v in data[:, 1:]]
    assert np.max(np.abs(np.array(E) - E[0])) <= 1e-8


def test_simulate_2d_and_figures(tmp_path, capsys):
    out = tmp_path / "two.csv"
    code, _, _ = _run(capsys, "simulate", "--system", "2d-cubic", "--E1", -1, "--E2", -5, "--t-end", 5,
                      "--svg", "--plot", "--out", out)
    assert code == 0
    header, data = read_csv(out)
    assert header == ["t", "x", "v", "y", "vy"]
    spec = Product2D(CubicRiccati(1.0), CubicRiccati(1.0))
    I = np.array([energy_2d(spec, State.two(*row[1:])) for row in data])
    assert np.max(np.abs(I - I[0])) <= 1e-8
    assert (tmp_path / "two.svg").read_text().startswith("<svg")
    assert (tmp_path / "two.png").stat().st_size > 1000


# --- verify ------------------------------------------------------------------------------------


@pytest.mark.parametrize("argv", [
    ("--suite", "superint-oscillator", "--n1", 1, "--n2", 2),
    ("--suite", "linearization"),
    ("--suite", "hamiltonian"),
    ("--suite", "alt-lagrangian"),
])
def test_verify_suites_pass(tmp_path, capsys, argv):
    out = tmp_path / "r.json"
    code, text, _ = _run(capsys, "verify", *argv, "--out", out)
    rep = _json(text)
    assert code == 0
    assert rep["suite"] == argv[1] and rep["checks"]
    assert all(c["pass"] for c in rep["checks"])
    assert set(rep["checks"][0]) == {"name", "value", "tolerance", "pass"}
    assert _json(out.read_text()) == rep


def test_verify_oscillator_checks_are_named(capsys):
    _, text, _ = _run(capsys, "verify", "--suite", "superint-oscillator", "--n1", 1, "--n2", 2)
    names = [c["name"] for c in _json(text)["checks"]]
    assert any("I3" in n for n in names) and any("I4" in n for n in names)


def test_verify_hamiltonian_check_names(capsys):
    _, text, _ = _run(capsys, "verify", "--suite", "hamiltonian")
    names = " ".join(c["name"] for c in _json(text)["checks"])
    assert "{Q,P}" in names and "(P^2 + w^2 Q^2)/2" in names


def test_verify_failed_check_exits_2(capsys):
    # a tolerance too tight for the figure-eight tails makes the run fail deterministically
    code, text, _ = _run(capsys, "verify", "--suite", "superint-dissipative", "--rtol", 1e-4, "--atol", 1e-6)
    assert code == 2
    assert not all(c["pass"] for c in _json(text)["checks"])


def test_verify_unknown_suite(capsys):
    code, _, err = _run(capsys, "verify", "--suite", "bogus")
    assert code == 1 and "bogus" in err
    code, _, _ = _run(capsys, "verify", "--suite", "superint-oscillator", "--n1", 1)
    assert code == 1


def test_verify_env_seed(monkeypatch, capsys):
    monkeypatch.setenv("RICCATI_DYN_SEED", "11")
    _, a, _ = _run(capsys, "verify", "--suite", "hamiltonian")
    _, b, _ = _run(capsys, "verify", "--suite", "hamiltonian")
    monkeypatch.setenv("RICCATI_DYN_SEED", "12")
    _, c, _ = _run(capsys, "verify", "--suite", "hamiltonian")
    assert a == b and a != c
    monkeypatch.setenv("RICCATI_DYN_SEED", "x")
    assert _run(capsys, "verify", "--suite", "hamiltonian")[0] == 1


# --- portrait ----------------------------------------------------------------------------------


def _index(path):
    with path.open() as fh:
        return list(csv.DictReader(fh))


def test_portrait_cubic_approaches_origin(tmp_path, capsys):
    out = tmp_path / "p"
    code, _, _ = _run(capsys, "portrait", "--system", "cubic", "--x-min", 0.1, "--x-max", 0.5,
                      "--v-min", 0.2, "--v-max", 0.6, "--density", 3, "--t-end", 20, "--plot", "--out", out)
    assert code == 0
    rows = _index(out / "index.csv")
    assert len(rows) == 9
    for r in rows:
        _, data = read_csv(out / r["file"])
        assert r["status"] == "Completed"
        assert abs(data[-1, 1]) < abs(data[0, 1])
        assert float(r["abs_x_final"]) == abs(data[-1, 1])
    assert (out / "portrait.png").exists()


def test_portrait_oscillator_closes(tmp_path, capsys):
    out = tmp_path / "po"
    code, _, _ = _run(capsys, "portrait", "--system", "oscillator", "--energies", 0.2, 0.5, "--out", out)
    assert code == 0
    rows = _index(out / "index.csv")
    assert len(rows) == 2
    assert all(float(r["closure_gap"]) <= 1e-4 for r in rows)
    assert float(rows[0]["t_final"]) == pytest.approx(2 * math.pi)


def test_portrait_empty_grid(tmp_path, capsys):
    out = tmp_path / "e"
    code, _, _ = _run(capsys, "portrait", "--density", 0, "--out", out)
    assert code == 0
    assert _index(out / "index.csv") == []
    code, _, _ = _run(capsys, "portrait", "--system", "2d-cubic", "--out", out)
    assert code == 1


# --- lissajous ---------------------------------------------------------------------------------


def test_lissajous_figure_eight(tmp_path, capsys):
    out = tmp_path / "f8.csv"
    code, text, _ = _run(capsys, "lissajous", "--system", "2d-cubic", "--k1", 1, "--k2", 1, "--E1", -1,
                         "--E2", -5, "--T", 100, "--svg", "--out", out)
    assert code == 0
    rep = _json(text)
    assert rep["window"] == [-100, 100]
    _, data = read_csv(out)
    assert data[0, 0] == -100 and data[-1, 0] == 100
    for row in (data[0], data[-1]):
        assert abs(row[1]) < 0.05 and abs(row[3]) < 0.05
    assert np.max(np.abs(data[:, [1, 3]])) < 10
    assert (tmp_path / "f8.svg").exists()


def test_lissajous_oscillator_closed(tmp_path, capsys):
    out = tmp_path / "l11.csv"
    code, text, _ = _run(capsys, "lissajous", "--system", "2d-oscillator", "--n1", 1, "--n2", 1,
                         "--E1", 0.2, "--E2", 0.2, "--phi2", 0.7, "--out", out)
    assert code == 0 and _json(text)["closure_gap"] <= 1e-4


def test_lissajous_phase_changes_shape(tmp_path, capsys):
    shapes = []
    for phi in (0.0, 0.8):
        out = tmp_path / f"l12_{phi}.csv"
        code, text, _ = _run(capsys, "lissajous", "--system", "2d-oscillator", "--n1", 1, "--n2", 2,
                             "--E1", 0.2, "--E2", 0.2, "--phi2", phi, "--samples", 400, "--out", out)
        assert code == 0 and _json(text)["closure_gap"] <= 1e-4
        _, data = read_csv(out)
        spec = Product2D(NonlinearOscillator(1.0, 1.0), NonlinearOscillator(1.0, 2.0))
        K = np.array([kij_constant(*k_functions(spec, State.two(*r[1:]), 1, 2), 1, 2) for r in data])
        assert np.max(np.abs(K - K[0])) <= 1e-8
        shapes.append(data[:, [1, 3]])
    assert np.max(np.abs(shapes[0] - shapes[1])) > 1e-2


def test_lissajous_needs_2d(capsys):
    assert _run(capsys, "lissajous", "--system", "cubic", "--E", -1)[0] == 1
