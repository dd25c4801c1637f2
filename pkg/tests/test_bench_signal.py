import os

import numpy as np
import pytest

from conftest import SMALL_SOLVER_YAML
from quotient_regularization.baselines import l1_solve
from quotient_regularization.bench_signal import (
    TRIAL_HEADER,
    MethodOutcome,
    SignalTrialRunner,
    TrialOutcome,
    build_signal_instance,
    cmd_bench_table1,
    cmd_bench_table2,
    cmd_recover_signal,
    mean_and_se,
    parse_method,
    table_header,
    table_rows,
    theorem1_rows,
)
from quotient_regularization.config import Config
from quotient_regularization.custom_types import RunOptions, SolveResult, Status
from quotient_regularization.errors import ArgumentError
from quotient_regularization.qrm import qrm_solve
from quotient_regularization.regularizer_l1l2 import L1OverL2
from quotient_regularization.regularizer_l1sk import L1OverSK
from quotient_regularization.storage import Storage

SMALL_SIGNAL_YAML = (
    SMALL_SOLVER_YAML
    + """
recover_signal:
  n: 48
  s: 4
  m: 24
  sigma: 0.01
  method: qrm_l1_sk
  solver:
    K: 4
bench_table1:
  n: 48
  s: 4
  sigma: 0.01
  m_values: [20, 28]
  K_values: [2, 4]
  trials: 2
bench_table2:
  n: 48
  s: 4
  sigma: 0.01
  m_values: [24]
  trials: 2
  solver:
    K: 4
"""
)


def outcome(m, trial, oracle, mses):
    methods = {name: MethodOutcome(name, SolveResult(np.zeros(3), [], Status.CONVERGED), value, 1.0, None) for name, value in mses.items()}
    return TrialOutcome(m, trial, oracle, methods)


def test_parse_method():
    assert parse_method("l1") == ("l1", None, None)
    assert parse_method("qrm_l1_l2") == ("qrm", "l1_l2", None)
    assert parse_method("dca_l1_sk") == ("dca", "l1_sk", None)
    assert parse_method("qrm_l1_linf") == ("qrm", "l1_linf", None)
    assert parse_method("qrm_l1_sk_K100") == ("qrm", "l1_sk", 100)


@pytest.mark.parametrize("name", ["", "qrm", "ista_l1_l2", "qrm_l2_l1", "qrm_l1_sk_Kx", "qrm_l1_sk_K"])
def test_parse_method_rejects(name):
    with pytest.raises(ArgumentError):
        parse_method(name)


def test_mean_and_se():
    assert mean_and_se([2.0]) == (2.0, 0.0)
    mean, se = mean_and_se([1.0, 2.0, 3.0, 4.0])
    assert mean == pytest.approx(2.5)
    assert se == pytest.approx(np.std([1.0, 2.0, 3.0, 4.0], ddof=1) / 2.0)


def test_table_layout():
    outcomes = [
        outcome(10, 0, 0.1, {"l1": 1.0}),
        outcome(10, 1, 0.3, {"l1": 3.0}),
        outcome(20, 0, 0.05, {"l1": 0.5}),
    ]
    assert table_header([10, 20]) == ["method", "m=10", "m=10_se", "m=20", "m=20_se"]
    rows = table_rows(outcomes, [("baseline", "l1"), ("oracle", "oracle")], [10, 20])
    assert rows[0][0] == "baseline"
    assert rows[0][1] == pytest.approx(2.0) and rows[0][3] == pytest.approx(0.5) and rows[0][4] == 0.0
    assert rows[1][1] == pytest.approx(0.2)


def test_theorem1_rows_skip_baseline():
    o = outcome(10, 0, 0.1, {"l1": 1.0})
    o.methods["qrm_l1_l2"] = MethodOutcome("qrm_l1_l2", SolveResult(np.array([0.0, 1.0]), [], Status.CONVERGED), 0.2, 5.0, 2.0)
    assert theorem1_rows([o]) == [[10, 0, "qrm_l1_l2", 5.0, 2.0, 1, 1]]


def test_build_signal_instance_is_seeded():
    a = build_signal_instance(32, 3, 16, 0.05, seed=4)
    b = build_signal_instance(32, 3, 16, 0.05, seed=4)
    np.testing.assert_array_equal(a.problem.f, b.problem.f)
    assert a.support.size == 3
    assert a.oracle() > 0.0


def test_runner_shares_l1_start(write_config, mocker):
    write_config(SMALL_SIGNAL_YAML)
    instance = build_signal_instance(48, 4, 24, 0.01, seed=1)
    methods = ["l1", "qrm_l1_l2", "qrm_l1_sk"]
    settings = {m: Config.get_solver_settings("bench_table2", m) for m in methods}
    spy = mocker.patch("quotient_regularization.bench_signal.l1_solve", wraps=l1_solve)
    runner = SignalTrialRunner(instance, "bench_table2", settings)
    outcomes = {m: runner.run(m) for m in methods}
    assert spy.call_count == 1
    assert outcomes["l1"].threshold is None
    assert outcomes["qrm_l1_l2"].threshold is not None
    assert isinstance(runner.regularizer_for("qrm_l1_sk", runner.config_for("qrm_l1_sk")), L1OverSK)
    assert isinstance(runner.regularizer_for("qrm_l1_l2", runner.config_for("qrm_l1_l2")), L1OverL2)
    assert runner.regularizer_for("l1", runner.config_for("l1")) is None


def test_cmd_recover_signal(write_config, tmp_path):
    write_config(SMALL_SIGNAL_YAML)
    assert cmd_recover_signal(RunOptions(out_dir=str(tmp_path), jobs=1)) == 0
    out = tmp_path / "recover_signal"
    for name in ("metrics.csv", "trial_000/truth.csv", "trial_000/solution.csv", "trial_000/trace.csv"):
        assert os.path.isfile(out / name)
    header, rows = Storage.read_csv(str(out / "metrics.csv"))
    assert header[:3] == ["trial", "method", "mse"]
    assert rows[0][1] == "qrm_l1_sk"


def test_cmd_bench_table1(write_config, tmp_path):
    write_config(SMALL_SIGNAL_YAML)
    assert cmd_bench_table1(RunOptions(out_dir=str(tmp_path), jobs=2)) == 0
    header, rows = Storage.read_csv(str(tmp_path / "bench_table1" / "table1.csv"))
    assert header == table_header([20, 28])
    assert [r[0] for r in rows] == ["baseline", "K=2", "K=4", "K=n", "oracle"]
    trial_header, trials = Storage.read_csv(str(tmp_path / "bench_table1" / "trials.csv"))
    assert trial_header == TRIAL_HEADER
    # 2 m values x 2 trials x (4 methods + oracle)
    assert len(trials) == 20


def test_cmd_bench_table2_is_deterministic(write_config, tmp_path):
    write_config(SMALL_SIGNAL_YAML)
    assert cmd_bench_table2(RunOptions(out_dir=str(tmp_path / "a"), jobs=1, seed=3)) == 0
    assert cmd_bench_table2(RunOptions(out_dir=str(tmp_path / "b"), jobs=2, seed=3)) == 0
    first = (tmp_path / "a" / "bench_table2" / "table2.csv").read_text()
    second = (tmp_path / "b" / "bench_table2" / "table2.csv").read_text()
    assert first == second
    _, rows = Storage.read_csv(str(tmp_path / "a" / "bench_table2" / "table2.csv"))
    assert [r[0] for r in rows] == ["l1", "dca_l1_l2", "dca_l1_sk", "qrm_l1_l2", "qrm_l1_sk", "oracle"]
    assert os.path.isfile(tmp_path / "a" / "bench_table2" / "theorem1.csv")


def test_cmd_bench_table2_needs_k(write_config, tmp_path):
    write_config(SMALL_SIGNAL_YAML.replace("  solver:\n    K: 4\n", ""))
    with pytest.raises(SystemExit):
        cmd_bench_table2(RunOptions(out_dir=str(tmp_path)))


def test_bad_m_values(write_config, tmp_path):
    write_config(SMALL_SIGNAL_YAML.replace("m_values: [20, 28]", "m_values: [0, 28]"))
    with pytest.raises(SystemExit):
        cmd_bench_table1(RunOptions(out_dir=str(tmp_path)))


def test_flows_start_from_the_l1_method_solution(write_config, mocker):
    write_config(SMALL_SIGNAL_YAML + "  method_solver:\n    qrm_l1_sk:\n      lambda_scale: 12.0\n      mu: 0.5\n")
    instance = build_signal_instance(48, 4, 24, 0.01, seed=2)
    l1_spy = mocker.patch("quotient_regularization.bench_signal.l1_solve", wraps=l1_solve)
    qrm_spy = mocker.patch("quotient_regularization.bench_signal.qrm_solve", wraps=qrm_solve)
    runner = SignalTrialRunner(instance, "bench_table2", {})
    flow = runner.run("qrm_l1_sk")
    baseline = runner.run("l1")
    assert l1_spy.call_count == 1
    start_config = l1_spy.call_args.args[1]
    assert start_config.lam == pytest.approx(60.0 / instance.problem.f_norm**2)
    assert start_config.mu == pytest.approx(0.1)
    np.testing.assert_array_equal(qrm_spy.call_args.kwargs["u0"], baseline.result.u_star)
    assert flow.lam == pytest.approx(12.0 / instance.problem.f_norm**2)
