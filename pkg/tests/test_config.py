import pytest

from conftest import SMALL_SOLVER_YAML
from quotient_regularization.config import CONFIG_EXIT_CODE, Config


def test_get_config_no_file(mocker):
    mocker.patch.object(Config, "config_filename", "does-not-exist.yaml")
    with pytest.raises(SystemExit) as exc:
        Config.get_config()
    assert exc.value.code == CONFIG_EXIT_CODE


def test_get_config_invalid_yaml_reports_line(write_config, caplog):
    write_config("solver:\n  beta: 1.0\n  rho: [1.0\n")
    with pytest.raises(SystemExit) as exc:
        Config.get_config()
    assert exc.value.code == CONFIG_EXIT_CODE
    assert "test.yaml:" in caplog.text
    assert "error parsing YAML" in caplog.text


def test_get_config_top_level_must_be_mapping(write_config):
    write_config("- solver\n- bench\n")
    with pytest.raises(SystemExit):
        Config.get_config()


def test_empty_file_is_empty_config(write_config):
    write_config("")
    assert Config.get_config() == {}
    assert Config.get_section("bench_table1") == {}


def test_get_value(write_config):
    write_config(SMALL_SOLVER_YAML + "bench_table1:\n  n: 64\n  sigma: 0.01\n")
    assert Config.get_value("bench_table1", "n", kind=int) == 64
    assert Config.get_value("bench_table1", "trials", 3, kind=int) == 3


def test_get_value_missing_required_key(write_config, caplog):
    write_config(SMALL_SOLVER_YAML + "bench_table1:\n  n: 64\n")
    with pytest.raises(SystemExit):
        Config.get_value("bench_table1", "sigma", kind=float)
    assert "missing required key 'sigma'" in caplog.text


def test_get_value_wrong_type_points_at_line(write_config, caplog):
    write_config("bench_table1:\n  n: 64\n  s: many\n")
    with pytest.raises(SystemExit):
        Config.get_value("bench_table1", "s", kind=int)
    assert "test.yaml:3:" in caplog.text


def test_solver_settings_defaults_and_auto_lambda(write_config):
    write_config(SMALL_SOLVER_YAML)
    settings = Config.get_solver_settings("bench_table1")
    assert settings["lambda"] == "auto"
    assert settings["lambda_scale"] == 60.0
    assert settings["K"] is None
    assert settings["inner_eps"] is None


def test_solver_settings_override_order(write_config):
    write_config(
        SMALL_SOLVER_YAML
        + """
bench_table2:
  solver:
    K: 10
    mu: 0.5
  method_solver:
    qrm_l1_sk:
      lambda_scale: 12.0
"""
    )
    section = Config.get_solver_settings("bench_table2")
    assert section["K"] == 10 and section["mu"] == 0.5 and section["lambda_scale"] == 60.0
    method = Config.get_solver_settings("bench_table2", "qrm_l1_sk")
    assert method["K"] == 10 and method["lambda_scale"] == 12.0
    assert Config.get_solver_settings("bench_table2", "dca_l1_sk")["lambda_scale"] == 60.0


def test_solver_settings_missing_lambda(write_config, caplog):
    write_config("solver:\n  beta: 1.0\n  rho: 1.0\n  eps: 1.0e-6\n  k_max: 10\n  j_max: 10\n")
    with pytest.raises(SystemExit) as exc:
        Config.get_solver_settings("bench_table1")
    assert exc.value.code == CONFIG_EXIT_CODE
    assert "missing required key 'lambda'" in caplog.text


def test_solver_settings_unknown_key(write_config, caplog):
    write_config(SMALL_SOLVER_YAML + "bench_table1:\n  solver:\n    gamma: 3\n")
    with pytest.raises(SystemExit):
        Config.get_solver_settings("bench_table1")
    assert "unknown solver key 'gamma'" in caplog.text


def test_solver_settings_integer_keys(write_config, caplog):
    write_config(SMALL_SOLVER_YAML + "bench_table1:\n  solver:\n    k_max: 2.5\n")
    with pytest.raises(SystemExit):
        Config.get_solver_settings("bench_table1")
    assert "must be an integer" in caplog.text


def test_solver_settings_rejects_non_numeric_lambda(write_config):
    write_config(SMALL_SOLVER_YAML + "bench_table1:\n  solver:\n    lambda: large\n")
    with pytest.raises(SystemExit):
        Config.get_solver_settings("bench_table1")


def test_line_of(write_config):
    write_config(SMALL_SOLVER_YAML)
    # SMALL_SOLVER_YAML starts with an empty line
    assert Config.line_of("solver") == 3
    assert Config.line_of("solver", "rho") == 4
    assert Config.line_of("solver", "missing") is None


@pytest.mark.parametrize(
    "section, method, K",
    [
        ("bench_table2", "qrm_l1_sk", 100),
        ("bench_table2", "dca_l1_sk", 100),
        ("recover_signal", "qrm_l1_sk", 100),
        ("verify_theory", "qrm_l1_sk", 100),
        ("bench_table1", "qrm_l1_sk_K10", 10),
        ("bench_table1", "qrm_l1_sk_K100", 100),
        ("bench_table1", "qrm_l1_sk_K150", 150),
    ],
)
def test_shipped_l1_sk_settings_clear_the_nonzero_bound(mocker, section, method, K):
    mocker.patch.object(Config, "config_filename", "default.yaml")
    settings = Config.get_solver_settings(section, method)
    n = Config.get_value(section, "n", kind=int)
    # lambda = lambda_scale / ||f||^2 must exceed 2 M / ||f||^2 with M = sqrt(n / K)
    assert settings["lambda"] == "auto"
    assert settings["lambda_scale"] > 2 * (n / K) ** 0.5
    assert settings["rho"] > 0 and settings["beta"] > 0


def test_shipped_signal_sections_share_the_l1_start(mocker):
    mocker.patch.object(Config, "config_filename", "default.yaml")
    starts = [Config.get_solver_settings(section, "l1") for section in ("bench_table1", "bench_table2", "recover_signal", "verify_theory")]
    keys = ("lambda", "lambda_scale", "mu", "rho", "l1_j_max")
    assert all({k: s[k] for k in keys} == {k: starts[0][k] for k in keys} for s in starts)
