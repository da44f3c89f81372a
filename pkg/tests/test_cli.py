import pytest

import dplhom.cli as cli
from dplhom.config import ConfigError, parse_config_text
from dplhom.records import load_json, verify_record


LOG_POWER_LINES = [
    "problem.p = 2.0",
    "problem.lambda = 1.0",
    "problem.half_width = 30",
    "problem.coeff.kind = polynomial",
    "problem.coeff.exponent = 2.0",
    "problem.nonlinearity.kind = log_power",
    "problem.nonlinearity.mu = 2.0",
    "problem.nonlinearity.nu = 2.0",
]

PURE_POWER_LINES = [
    "problem.p = 2.0",
    "problem.lambda = 1.0",
    "problem.half_width = 10",
    "problem.coeff.kind = constant",
    "problem.nonlinearity.kind = pure_power",
    "problem.nonlinearity.q = 4.0",
]


def write_config(tmp_path, lines, name="run.cfg"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def run_cli(command, config, out, extra=()):
    return cli.run([command, "--config", config, "--out", str(out),
                    "--quiet", *extra])


# ---- config parsing ----------------------------------------------------------

def test_parse_rejects_bad_line():
    with pytest.raises(ConfigError) as err:
        parse_config_text("problem.p 2.0\n")
    assert "line 1" in str(err.value)


def test_parse_rejects_duplicate_key():
    with pytest.raises(ConfigError) as err:
        parse_config_text("a.b = 1\na.b = 2\n")
    assert "line 2" in str(err.value)


def test_parse_comments_and_quotes():
    cfg = parse_config_text('x.kind = "log_power"  # inline note\n\n# full line\n')
    assert cfg.get_str("x.kind") == "log_power"


def test_typed_accessor_errors_carry_key():
    cfg = parse_config_text("problem.p = banana\n")
    with pytest.raises(ConfigError) as err:
        cfg.get_float("problem.p")
    assert "problem.p" in str(err.value)


def test_validation_bounds():
    cfg = parse_config_text("\n".join([
        "problem.p = 0.5", "problem.half_width = 10",
        "problem.nonlinearity.kind = pure_power", "problem.nonlinearity.q = 4.0"]))
    with pytest.raises(ConfigError):
        cfg.build_problem()


def test_cli_usage_error_exit_code(tmp_path):
    assert cli.run(["check"]) == cli.EXIT_USAGE            # missing --config
    assert cli.run(["bogus", "--config", "x"]) == cli.EXIT_USAGE
    assert run_cli("check", str(tmp_path / "missing.cfg"), tmp_path) == cli.EXIT_USAGE


def test_cli_type_invariant_violation_exit_code(tmp_path):
    cfg = write_config(tmp_path, PURE_POWER_LINES + [
        "solver.line_search.shrink = 2.0"])
    assert run_cli("solve", cfg, tmp_path / "out") == cli.EXIT_USAGE


def test_cli_malformed_config_exit_code(tmp_path):
    cfg = write_config(tmp_path, ["problem.p = 2.0", "problem.half_width = zero",
                                  "problem.nonlinearity.kind = pure_power",
                                  "problem.nonlinearity.q = 4.0"])
    assert run_cli("check", cfg, tmp_path / "out") == cli.EXIT_USAGE


# ---- check -------------------------------------------------------------------

def test_check_log_power_main_conditions(tmp_path):
    cfg = write_config(tmp_path, LOG_POWER_LINES + [
        "check.required = H1,H2,H3,H4,H5",
        "check.k_max = 60",
    ])
    out = tmp_path / "out"
    assert run_cli("check", cfg, out) == cli.EXIT_OK
    report = load_json(out / "check_report.json")
    for name in ("H1", "H2", "H3", "H4", "H5"):
        assert report["reports"][name]["verdict"] == "satisfied_on_samples"
    h4p = report["reports"]["H4p"]
    assert h4p["verdict"] == "refuted"
    assert abs(h4p["witness"][0]) >= 3


def test_check_pure_power_kong_set_refuted(tmp_path):
    cfg = write_config(tmp_path, PURE_POWER_LINES + ["check.required = H3p,H4p"])
    assert run_cli("check", cfg, tmp_path / "out") == cli.EXIT_REFUTED


def test_check_empty_required_exits_zero(tmp_path):
    cfg = write_config(tmp_path, PURE_POWER_LINES)
    out = tmp_path / "out"
    assert run_cli("check", cfg, out) == cli.EXIT_OK
    assert (out / "check_report.json").exists()


def test_check_inconclusive_only_exit_code(tmp_path):
    # constant b: the floor holds but growth is invisible, so B is undecided
    cfg = write_config(tmp_path, PURE_POWER_LINES + ["check.required = B"])
    assert run_cli("check", cfg, tmp_path / "out") == cli.EXIT_INCONCLUSIVE


def test_check_unknown_required_condition(tmp_path):
    cfg = write_config(tmp_path, PURE_POWER_LINES + ["check.required = H7"])
    assert run_cli("check", cfg, tmp_path / "out") == cli.EXIT_USAGE


# ---- demo-inconsistency ---------------------------------------------------------

def test_demo_pure_power_exact_average(tmp_path):
    cfg = write_config(tmp_path, PURE_POWER_LINES + [
        "demo.T = 2.0", "demo.T1 = 1.0", "demo.K_list = 10,100,1000"])
    out = tmp_path / "out"
    assert run_cli("demo-inconsistency", cfg, out) == cli.EXIT_OK
    table = load_json(out / "inconsistency_table.json")
    assert [row["K"] for row in table["rows"]] == [10, 100, 1000]
    for row in table["rows"]:
        assert abs(row["average"] - 4.0) <= 1e-12
        assert row["lower_bound"] == pytest.approx((2 * row["K"] + 1) * 0.75)


def test_demo_log_power_precondition_witness(tmp_path):
    cfg = write_config(tmp_path, LOG_POWER_LINES + [
        "demo.T = 2.0", "demo.T1 = 1.0", "demo.K_list = 10,100"])
    out = tmp_path / "out"
    assert run_cli("demo-inconsistency", cfg, out) == cli.EXIT_REFUTED
    table = load_json(out / "inconsistency_table.json")
    assert abs(table["witness"][0]) >= 10


# ---- solve / sequence -------------------------------------------------------------

def test_solve_zeros_trivial(tmp_path):
    cfg = write_config(tmp_path, LOG_POWER_LINES + ["solve.start = zeros"])
    out = tmp_path / "out"
    assert run_cli("solve", cfg, out) == cli.EXIT_OK
    rec = load_json(out / "solution.json")
    assert rec["scalars"]["converged"] is True
    assert rec["scalars"]["energy"] == 0.0


SEQ_LINES = [
    "problem.p = 2.0",
    "problem.lambda = 1.0",
    "problem.half_width = 12",
    "problem.coeff.kind = polynomial",
    "problem.coeff.exponent = 2.0",
    "problem.nonlinearity.kind = log_power",
    "problem.nonlinearity.mu = 2.0",
    "problem.nonlinearity.nu = 2.0",
    "sequence.n_target = 2",
    "solver.seed = 5",
    "check.k_max = 30",
]


def test_sequence_records_roundtrip(tmp_path):
    cfg = write_config(tmp_path, SEQ_LINES)
    out = tmp_path / "out"
    assert run_cli("sequence", cfg, out) == cli.EXIT_OK
    summary = (out / "sequence_summary.csv").read_text().strip().splitlines()
    assert summary[0] == "n,energy,residual_inf,cerami,tail_mass,drift"
    assert len(summary) == 3  # header + 2 solutions
    rec = load_json(out / "solution_000.json")
    drifts = verify_record(rec)
    assert drifts["energy"] <= 1e-12
    assert drifts["residual_inf_norm"] <= 1e-12
    plot = (out / "solution_000.csv").read_text().splitlines()
    assert plot[0] == "k,u"
    assert len(plot) == 1 + 25  # window 2K+1 rows


def test_sequence_zero_target(tmp_path):
    cfg = write_config(tmp_path, SEQ_LINES + ["x.unused = 0"], name="z.cfg")
    cfgtext = (tmp_path / "z.cfg").read_text().replace("sequence.n_target = 2",
                                                       "sequence.n_target = 0")
    (tmp_path / "z.cfg").write_text(cfgtext)
    out = tmp_path / "out0"
    assert run_cli("sequence", str(tmp_path / "z.cfg"), out) == cli.EXIT_OK
    summary = (out / "sequence_summary.csv").read_text().strip().splitlines()
    assert len(summary) == 1


def test_sequence_gate_refuses_refuted_drive(tmp_path, monkeypatch):
    from dplhom.hypotheses import HypothesisReport
    cfg = write_config(tmp_path, SEQ_LINES)

    def fake_check_all(nl, plan, coeffs=None, conditions=()):
        return {"H5": HypothesisReport("H5", "refuted", witness=(0, 1.0))}

    monkeypatch.setattr(cli, "check_all", fake_check_all)
    assert run_cli("sequence", cfg, tmp_path / "out") == cli.EXIT_REFUTED


def test_sequence_determinism_byte_identical(tmp_path):
    cfg = write_config(tmp_path, SEQ_LINES)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run_cli("sequence", cfg, out_a) == cli.EXIT_OK
    assert run_cli("sequence", cfg, out_b) == cli.EXIT_OK
    for name in ("sequence_summary.csv", "solution_000.json", "solution_000.csv",
                 "solution_001.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path, SEQ_LINES)
    out = tmp_path / "s"
    assert run_cli("sequence", cfg, out, extra=["--seed", "9"]) == cli.EXIT_OK
    rec = load_json(out / "solution_000.json")
    assert rec["seed"] == 9


# ---- fountain ----------------------------------------------------------------------

def test_fountain_small_table(tmp_path):
    cfg = write_config(tmp_path, SEQ_LINES + [
        "fountain.n_list = 1:4", "fountain.samples = 200"])
    out = tmp_path / "out"
    assert run_cli("fountain", cfg, out) == cli.EXIT_OK
    table = load_json(out / "fountain_table.json")
    rows = table["rows"]
    assert [r["n"] for r in rows] == [1, 2, 3, 4]
    bp = [r["beta_p"] for r in rows]
    assert all(b <= a + 1e-9 for a, b in zip(bp, bp[1:]))
    assert all(r["z_violations"] == 0 for r in rows if r["feasible"])
    csv_lines = (out / "fountain_table.csv").read_text().splitlines()
    assert csv_lines[0].startswith("n,beta_p,beta_q,feasible")
    assert len(csv_lines) == 5


def test_fountain_bad_n_list(tmp_path):
    cfg = write_config(tmp_path, SEQ_LINES + ["fountain.n_list = 90:95"])
    assert run_cli("fountain", cfg, tmp_path / "out") == cli.EXIT_USAGE


# ---- sweep -------------------------------------------------------------------------

def test_sweep_over_lambda_emits_table_per_value(tmp_path):
    cfg = write_config(tmp_path, PURE_POWER_LINES + [
        "sweep.values = 0.1,1,10", "sweep.task = fountain",
        "fountain.n_list = 1,2", "fountain.samples = 100"])
    out = tmp_path / "out"
    # large lambda shrinks the feasibility margin to nothing, which is a
    # legitimate partial result; each value still gets its table
    assert run_cli("sweep", cfg, out) in (cli.EXIT_OK, cli.EXIT_PARTIAL)
    for lam in ("0.1", "1", "10"):
        table = load_json(out / f"lambda_{lam}" / "fountain_table.json")
        assert table["config"]["problem.lambda"] == repr(float(lam))
        assert len(table["rows"]) == 2
    feasible01 = [r["feasible"] for r in
                  load_json(out / "lambda_0.1" / "fountain_table.json")["rows"]]
    assert all(feasible01)


def test_sweep_over_lambda_check_task(tmp_path):
    cfg = write_config(tmp_path, PURE_POWER_LINES + [
        "sweep.values = 0.5,2", "sweep.task = check"])
    out = tmp_path / "out"
    assert run_cli("sweep", cfg, out) == cli.EXIT_OK
    for lam in ("0.5", "2"):
        report = load_json(out / f"lambda_{lam}" / "check_report.json")
        assert report["config"]["problem.lambda"] == repr(float(lam))
