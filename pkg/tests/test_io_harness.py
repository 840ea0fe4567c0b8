import io

import numpy as np
import pytest
from conftest import random_state
from hypothesis import given, settings, strategies as st

from tcm import cli, harness
from tcm.diagnostics import hs_sum
from tcm.harness import (
    AssertionFailure,
    ConfigError,
    RunConfig,
    build_config,
    commutator_rows,
    ic_library,
    judge,
    parse_config_text,
    run_simulation,
    smalldata_sweep,
    sweep_point,
)
from tcm.io import (
    FormatError,
    load_field,
    load_snapshot,
    parse_snapshot,
    read_csv,
    read_field,
    save_field,
    save_snapshot,
    snapshot_bytes,
    write_csv,
)
from tcm.commutators import CorpusSpec
from tcm.solver import Params, State
from tcm.spectral import divergence

N = 32


# -- field and snapshot I/O ------------------------------------------------------------

@given(st.integers(0, 10**6))
@settings(max_examples=10, deadline=None)
def test_field_round_trip(seed):
    x = random_state(N, seed)
    for f in (x.u, x.theta):
        buf = io.BytesIO()
        from tcm.io import write_field
        write_field(buf, f)
        buf.seek(0)
        assert np.array_equal(read_field(buf), f)


def test_field_files(tmp_path):
    f = random_state(N, 1).v
    save_field(tmp_path / "v.tcmf", f)
    assert np.array_equal(load_field(tmp_path / "v.tcmf"), f)
    assert (tmp_path / "v.tcmf").read_bytes().startswith(b"TCMF v1 n=32 kind=vector\n")


def test_bad_field_inputs():
    with pytest.raises(FormatError):
        read_field(io.BytesIO(b"TCMF v2 n=4 kind=real\n" + bytes(128)))
    with pytest.raises(FormatError):
        read_field(io.BytesIO(b"TCMF v1 n=4 kind=real\n" + bytes(10)))
    with pytest.raises(ValueError):
        from tcm.io import write_field
        write_field(io.BytesIO(), np.zeros((3, 4, 4)))


def test_snapshot_round_trip(tmp_path):
    x = random_state(N, 2)
    x.t = 0.125
    p = Params(n=N, alpha=0.3, eta=1.7, dt=2.5e-3, scheme="imex_euler")
    save_snapshot(tmp_path / "s.tcmf", x, p)
    y, meta = load_snapshot(tmp_path / "s.tcmf")
    assert meta == {"t": 0.125, "alpha": 0.3, "eta": 1.7, "n": N, "dt": 2.5e-3, "scheme": "imex_euler"}
    assert np.array_equal(y.u, x.u) and np.array_equal(y.v, x.v) and np.array_equal(y.theta, x.theta)
    assert y.t == x.t
    data = snapshot_bytes(x, p)
    with pytest.raises(FormatError):
        parse_snapshot(data[: data.rindex(b"META")])


def test_csv_determinism(tmp_path):
    rows = [{"a": 0.1, "b": True, "c": None}, {"a": 1 / 3, "b": False, "d": 2}]
    write_csv(tmp_path / "x.csv", rows)
    write_csv(tmp_path / "y.csv", rows)
    assert (tmp_path / "x.csv").read_bytes() == (tmp_path / "y.csv").read_bytes()
    back = read_csv(tmp_path / "x.csv")
    assert list(back[0]) == ["a", "b", "c", "d"]
    assert float(back[1]["a"]) == 1 / 3 and back[0]["b"] == "true" and back[0]["c"] == ""


# -- configuration --------------------------------------------------------------------

def test_config_parsing(tmp_path):
    assert parse_config_text("# c\nalpha = 2 # damping\n\nt-end=3\n") == {"alpha": "2", "t_end": "3"}
    with pytest.raises(ConfigError):
        parse_config_text("alpha 2")
    path = tmp_path / "c.cfg"
    path.write_text("alpha = 0.5\nn = 32\ns_list = 0.5, 2\nnonlinear = false\n")
    cfg = build_config("simulate", str(path), {"alpha": "0.25", "t-end": "1"})
    assert cfg.alpha == 0.25 and cfg.n == 32 and cfg.s_list == (0.5, 2.0)
    assert cfg.nonlinear is False and cfg.t_end == 1.0
    assert "alpha = 0.25" in cfg.echo()


@pytest.mark.parametrize("over", [{"bogus": "1"}, {"alpha": "x"}, {"eta": "0"}, {"n": "30"},
                                  {"nonlinear": "maybe"}, {"ic": "vortex"}, {"scheme": "euler"},
                                  {"ic": "snapshot", "snapshot": "/nope"}])
def test_config_errors(over):
    with pytest.raises(ConfigError):
        build_config("simulate", None, over)


def test_config_errors_misc():
    with pytest.raises(ConfigError):
        build_config("simulate", None, {"n": "16"})
    with pytest.raises(ConfigError):
        build_config("simulate", "/no/such/file")
    with pytest.raises(ConfigError):
        build_config("nonsense")
    with pytest.raises(ConfigError):
        build_config("smalldata-sweep", None, {"eps_lo": "1", "eps_hi": "0.5"})


# -- initial conditions -------------------------------------------------------------

@pytest.mark.parametrize("name", ["taylor-green", "shear", "random-band"])
@pytest.mark.parametrize("amp", [1e-3, 0.5])
def test_ic_normalization(name, amp):
    x = ic_library(name, amp, 3, N, 2.5)
    assert abs(hs_sum(x, 2.5) - amp) <= 1e-10 * amp
    assert np.abs(divergence(x.u)).max() <= 1e-12


def test_ic_zero_amplitude_and_errors():
    for name in ("taylor-green", "zero"):
        x = ic_library(name, 0.0 if name != "zero" else 1.0, 0, N)
        assert not x.u.any() and not x.v.any() and not x.theta.any()
    with pytest.raises(ConfigError):
        ic_library("shear", -1.0)


def test_ic_seeded():
    a, b = ic_library("random-band", 0.1, 4, N), ic_library("random-band", 0.1, 4, N)
    c = ic_library("random-band", 0.1, 5, N)
    assert np.array_equal(a.v, b.v) and not np.array_equal(a.v, c.v)


# -- sweep ----------------------------------------------------------------------------

def _sweep_cfg(**kw):
    base = dict(experiment="smalldata-sweep", n=32, dt=1e-2, t_end=0.5, cadence=0.1)
    base.update(kw)
    return RunConfig(**base)


def test_sweep_zero_amplitude_is_bounded():
    v = sweep_point(_sweep_cfg(), 0.0)
    assert v.bounded and v.sup_ratio == 0.0


def test_judge_rules():
    assert not judge(0.1, None, 2.0).bounded
    x = ic_library("random-band", 1e-3, 0, 32)
    sim = run_simulation(x, Params(n=32, dt=1e-2, t_end=0.5), 0.1)
    v = judge(1e-3, sim, 2.0)
    assert v.bounded and v.sup_ratio <= 1.0 + 1e-12 and v.lyap_final < v.lyap_initial
    assert not judge(1e-3, sim, 0.5).bounded


def test_sweep_list_and_bisection(monkeypatch):
    cfg = _sweep_cfg(eps_list=(0.0, 1e-3))
    verdicts, thr = smalldata_sweep(cfg)
    assert [v.epsilon for v in verdicts] == [0.0, 1e-3] and thr == 1e-3

    # bisection logic against a synthetic verdict with a known cut at eps = 0.05
    fake = lambda cfg, eps: harness.SweepVerdict(eps, eps <= 0.05)
    monkeypatch.setattr(harness, "sweep_point", fake)
    verdicts, thr = smalldata_sweep(_sweep_cfg(eps_lo=1e-3, eps_hi=10.0, bisect_steps=12))
    assert thr <= 0.05 and thr > 0.05 * 0.99
    assert [v.epsilon for v in verdicts] == sorted(v.epsilon for v in verdicts)
    verdicts, thr = smalldata_sweep(_sweep_cfg(eps_lo=0.1, eps_hi=10.0))
    assert thr is None and len(verdicts) == 2


def test_simulation_instability_is_recorded():
    x = ic_library("random-band", 1.0, 0, 32)
    sim = run_simulation(x, Params(n=32, dt=0.5, t_end=50.0, scheme="rk4_explicit"), 0.5)
    assert not sim.completed and sim.blow_time > 0 and sim.final is None


def test_commutator_rows_per_seed():
    corpus = CorpusSpec(seeds=(0,), k_hi=4)
    rows = commutator_rows(32, 0, (0.5, 1.0), (0.0,), (2.0, 4.0), corpus)
    names = [r["estimate"] for r in rows]
    assert len(rows) == 2 + 1 + 1 + 2 + 1 + 1 + 1
    assert names.count("bony_recombination") == 1
    assert all(np.isfinite(r["ratio"]) for r in rows)


# -- CLI ------------------------------------------------------------------------------

def test_cli_zero_ic_simulation(tmp_path):
    code = cli.main(["simulate", "-q", "--n", "32", "--dt", "1e-2", "--t_end", "0.3", "--ic", "zero",
                     "--output_dir", str(tmp_path)])
    assert code == 0
    rows = read_csv(tmp_path / "series.csv")
    assert len(rows) == 4
    for r in rows:
        for k, val in r.items():
            if k != "t":
                assert float(val) == 0.0
    man = (tmp_path / "manifest.txt").read_text()
    assert "experiment = simulate" in man and "lyapunov_final = 0.0" in man
    assert (tmp_path / "snapshots" / "final.tcmf").is_file()


def test_cli_restart_from_snapshot(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    common = ["-q", "--n", "32", "--dt", "1e-2", "--t_end", "0.2", "--amplitude", "0.1"]
    assert cli.main(["simulate", *common, "--output_dir", str(a)]) == 0
    snap = a / "snapshots" / "initial.tcmf"
    assert cli.main(["simulate", *common, "--ic", "snapshot", "--snapshot", str(snap),
                     "--output_dir", str(b)]) == 0
    assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()


def test_cli_exit_codes(tmp_path, monkeypatch):
    assert cli.main(["simulate", "-q", "--bogus", "1"]) == 2
    assert cli.main(["simulate", "-q", "--alpha"]) == 2
    assert cli.main(["simulate", "-q", "--n", "32", "--dt", "0.5", "--t_end", "50", "--amplitude", "1",
                     "--scheme", "rk4_explicit", "--output_dir", str(tmp_path / "blow")]) == 3
    assert "instability_at" in (tmp_path / "blow" / "manifest.txt").read_text()

    def failing(cfg, out):
        raise AssertionFailure("synthetic")
    monkeypatch.setitem(harness.RUNNERS, "lp-audit", failing)
    assert cli.main(["lp-audit", "-q", "--output_dir", str(tmp_path / "f")]) == 4
    assert "assertion_failure = synthetic" in (tmp_path / "f" / "manifest.txt").read_text()


def test_cli_audits(tmp_path):
    for exp, extra in (("operators-audit", ["--count", "2"]),
                       ("lp-audit", ["--count", "2", "--n", "32"]),
                       ("linear-verify", ["--n", "32", "--alpha", "0.5", "--eta", "2", "--t_end", "1",
                                          "--dt", "1e-2"]),
                       ("energy-audit", ["--n", "32", "--t_end", "0.05", "--dt", "1e-2",
                                         "--cadence", "1e-2", "--amplitude", "0.1"])):
        out = tmp_path / exp
        assert cli.main([exp, "-q", "--output_dir", str(out), *extra]) == 0, exp
        assert (out / "manifest.txt").is_file()
        assert any(out.glob("*.csv"))
