import pytest

from diracsoc.cli import main
from diracsoc.config import ConfigError, RunConfig, parse_config_text
from diracsoc.report import jsonl_dumps, read_jsonl

FAST_IDENTITY = """
# small grid keeps this suite quick
grid.points = 64,64
identity.n_fields = 2
identity.max_mode = 4
identity.gauge_fields = 2
"""

FAST_SIMULATE = """
simulate.n_paths = 5000
simulate.variance_paths = 5000
simulate.variance_steps = 8
simulate.repro_paths = 64
simulate.repro_steps = 8
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- config -------------------------------------------------------------------

def test_parse_config_text():
    m = parse_config_text("a.b = 1 # comment\n\n# full comment\nc = x\n")
    assert m == {"a.b": "1", "c": "x"}
    with pytest.raises(ConfigError):
        parse_config_text("just a line\n")
    with pytest.raises(ConfigError):
        parse_config_text("a = 1\na = 2\n")


def test_config_defaults_and_overrides():
    cfg = RunConfig.from_sources()
    assert cfg.constants().hbar == 1.0
    assert cfg.grid().points == (256, 256)
    cfg2 = RunConfig.from_sources({"constants.epsilon": "-1"}, {"seed": "7"})
    assert cfg2.constants().epsilon == -1
    assert cfg2.int("seed") == 7
    assert cfg.hash() != cfg2.hash()
    assert cfg.hash() == RunConfig.from_sources().hash()


def test_config_rejects_unknown_and_invalid():
    with pytest.raises(ConfigError):
        RunConfig.from_sources({"nope": "1"})
    with pytest.raises(ConfigError):
        RunConfig.from_sources({"constants.epsilon": "2"})
    with pytest.raises(ConfigError):
        RunConfig.from_sources({"backend": "banana"})
    with pytest.raises(ConfigError):
        RunConfig.from_sources({"grid.points": "100,100"})
    with pytest.raises(ConfigError):
        RunConfig.from_sources({"identity.tolerance": "-1"})


def test_jsonl_formatting_17_digits():
    line = jsonl_dumps({"x": 0.1, "n": 3, "ok": True, "c": 1 + 2j, "s": "hi"})
    assert '"x":0.10000000000000001' in line
    assert '"c":{"re":1,"im":2}' in line
    assert '"ok":true' in line


# -- verify-clifford ----------------------------------------------------------

def test_verify_clifford_pass_and_record_count(tmp_path):
    out = tmp_path / "out"
    assert main(["verify-clifford", "--out", str(out)]) == 0
    records = read_jsonl(out / "clifford.jsonl")
    anti = [r for r in records if r["check"] == "anticommutator"]
    assert len(anti) == 16
    assert all(r["pass"] for r in records)
    assert (out / "clifford_meta.json").exists()


def test_verify_clifford_corrupted_fails(tmp_path):
    out = tmp_path / "out"
    assert main(["verify-clifford", "--out", str(out), "--corrupt-gamma"]) == 1
    records = read_jsonl(out / "clifford.jsonl")
    assert any(not r["pass"] for r in records)


def test_missing_config_file_exit_2(tmp_path):
    assert main(["verify-clifford", "--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path / "o")]) == 2


def test_unknown_config_key_exit_2(tmp_path):
    cfg = write_cfg(tmp_path, "bogus.key = 1\n")
    assert main(["dispersion", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


# -- verify-identity ----------------------------------------------------------

def test_verify_identity_records(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, FAST_IDENTITY)
    assert main(["verify-identity", "--config", cfg, "--out", str(out)]) == 0
    records = read_jsonl(out / "identity.jsonl")
    equiv = [r for r in records if r["check"] == "factored_vs_fock"]
    gauge = [r for r in records if r["check"] == "gauge_discrepancy_law"]
    assert len(equiv) == 4 * 2
    assert {r["potential"] for r in equiv} == {
        "free", "constant_A", "em_wave_lightlike", "em_wave_spacelike"}
    assert len(gauge) == 2
    assert all(r["potential"] == "negative-gauge" for r in gauge)
    assert all(r["pass"] for r in records)


def test_verify_identity_tolerance_override_fails(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, FAST_IDENTITY + "identity.tolerance = 1e-15\n")
    assert main(["verify-identity", "--config", cfg, "--out", str(out)]) == 1


# -- dispersion / evolve -------------------------------------------------------

def test_dispersion_suite(tmp_path):
    out = tmp_path / "out"
    assert main(["dispersion", "--out", str(out)]) == 0
    records = read_jsonl(out / "dispersion.jsonl")
    assert len(records) == 64  # 32 sweep points, two roots each
    csv_lines = (out / "dispersion.csv").read_text().strip().splitlines()
    assert csv_lines[0] == "k1,k0,delta,det_abs,pass"
    assert len(csv_lines) == 65


def test_evolve_suite_flags_only_on_shell(tmp_path):
    out = tmp_path / "out"
    assert main(["evolve", "--out", str(out)]) == 0
    records = read_jsonl(out / "evolve.jsonl")
    assert all(r["pass"] for r in records)
    stationary = [r for r in records if r["stationary"]]
    assert len(stationary) == 1
    assert abs(stationary[0]["delta"]) <= 1e-12
    csv_lines = (out / "evolve_sweep.csv").read_text().strip().splitlines()
    assert csv_lines[0] == "k0,k1,delta,measured_frequency,stationary"
    assert len(csv_lines) == len(records) + 1


# -- simulate ------------------------------------------------------------------

def test_simulate_suite_and_dump(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, FAST_SIMULATE + "simulate.dump_paths = true\n"
                    "simulate.dump_max_paths = 3\n")
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    records = read_jsonl(out / "simulate.jsonl")
    by_check = {r["check"] for r in records}
    assert {"diffusion_squares", "generator", "straight_line_bitwise",
            "fixed_seed_bitwise", "reim_correlation_signs", "diffusion_variance",
            "action_constant_onshell", "configured_ensemble"} <= by_check
    gen = [r for r in records if r["check"] == "generator"]
    assert len(gen) == 6
    assert all("stderr" in r for r in gen)
    lines = (out / "paths.csv").read_text().strip().splitlines()
    assert lines[0].startswith("path,step,s,z0_re,z0_im")
    assert len(lines) == 1 + 3 * 9  # 3 paths, 8 steps + initial point


def test_simulate_blowup_exit_3(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, FAST_SIMULATE +
                    "simulate.control = constant\n"
                    "simulate.control_w = 1e308,0,0,0\n"
                    "simulate.ds = 10\n")
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 3


def test_epsilon_flag_changes_constants(tmp_path):
    out = tmp_path / "out"
    assert main(["dispersion", "--out", str(out), "--epsilon", "-1"]) == 0
    rec = read_jsonl(out / "dispersion.jsonl")[0]
    assert rec["constants"]["epsilon"] == -1


# -- report --------------------------------------------------------------------

def test_report_aggregates_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["verify-clifford", "--out", str(out)]) == 0
    assert main(["dispersion", "--out", str(out)]) == 0
    assert main(["report", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "overall: PASS" in text
    summary = read_jsonl(out / "summary.jsonl")
    suites = {r["suite"]: r for r in summary}
    assert suites["verify-clifford"]["failed"] == 0
    assert suites["dispersion"]["total"] == 64


def test_report_no_inputs_exit_2(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["report", "--out", str(empty)]) == 2


def test_report_counts_failures(tmp_path):
    out = tmp_path / "out"
    assert main(["verify-clifford", "--out", str(out), "--corrupt-gamma"]) == 1
    assert main(["report", "--out", str(out)]) == 1


# -- determinism ----------------------------------------------------------------

def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["verify-clifford", "--out", str(out)]) == 0
        assert main(["dispersion", "--out", str(out)]) == 0
        assert main(["evolve", "--out", str(out)]) == 0
    for name in ("clifford.jsonl", "dispersion.jsonl", "dispersion.csv",
                 "evolve.jsonl", "evolve_sweep.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_simulate_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = write_cfg(tmp_path, FAST_SIMULATE)
    for out in (a, b):
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    assert (a / "simulate.jsonl").read_bytes() == (b / "simulate.jsonl").read_bytes()


# -- configured potential --------------------------------------------------------

def test_configured_potential_single_sweep(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, """
grid.points = 64,64
identity.n_fields = 3
identity.max_mode = 4
potential.name = em_plane_wave
potential.eps2 = 0.5
potential.k0 = 1
potential.k1 = 1
potential.eps0 = 0
potential.eps1 = 0
potential.eps3 = 0
potential.k2 = 0
potential.k3 = 0
""")
    assert main(["verify-identity", "--config", cfg, "--out", str(out)]) == 0
    records = read_jsonl(out / "identity.jsonl")
    assert len(records) == 3
    assert all(r["check"] == "factored_vs_fock" for r in records)
    assert all(r["potential"] == "em_plane_wave" for r in records)


def test_configured_gauge_violating_potential_uses_discrepancy_law(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, """
grid.points = 64,64
identity.gauge_fields = 2
identity.max_mode = 4
potential.name = custom_wave
potential.eps0 = 0.3
potential.k0 = 1
potential.eps1 = 0
potential.eps2 = 0
potential.eps3 = 0
potential.k1 = 0
potential.k2 = 0
potential.k3 = 0
""")
    assert main(["verify-identity", "--config", cfg, "--out", str(out)]) == 0
    records = read_jsonl(out / "identity.jsonl")
    assert len(records) == 2
    assert all(r["check"] == "gauge_discrepancy_law" for r in records)


def test_configured_potential_bad_params_exit_2(tmp_path):
    cfg = write_cfg(tmp_path, "potential.name = em_plane_wave\n")  # missing eps/k
    assert main(["verify-identity", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_configured_potential_inactive_axis_exit_2(tmp_path):
    # the symmetric-gauge magnetic entry varies along z^2, unrepresentable in 1+1
    cfg = write_cfg(tmp_path, "potential.name = constant_magnetic\npotential.B = 1.0\n"
                    "identity.n_fields = 1\n")
    assert main(["verify-identity", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
