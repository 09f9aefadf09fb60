"""Configuration parsing, scenario dispatch, report files, determinism."""

import json

import pytest

from stripspec import cli
from stripspec.cli import ConfigError


def write_config(tmp_path, text, name="scenarios.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


MINIMAL = """
[[scenario]]
id = "minimal"
theorem = "T2"
"""

TINY_SUITE = """
[[scenario]]
id = "tiny-flat"
theorem = "T1"
[scenario.grid]
half_length = 10.0
n_s = 400
n_t = 20
[scenario.params]
levels = 2

[[scenario]]
id = "tiny-robin"
theorem = "LA1"
[scenario.params]
instances = 10
seed = 1
resolution = 64

[[scenario]]
id = "tiny-well"
theorem = "TA2"
[scenario.params]
mu_list = [100.0, 1000.0, 10000.0]
resolution = 1500
"""


def test_minimal_scenario_gets_spec_defaults(tmp_path):
    cfg = cli.parse_config(write_config(tmp_path, MINIMAL))[0]
    assert cfg.epsilons == [0.1]
    assert cfg.profile_spec == {"family": "zero"}
    policy = cfg.grid_policy()
    assert policy.half_length == 10.0
    grid = policy.grid_for(0.1)
    assert (grid.n_s, grid.n_t) == (400, 20)


def test_sweep_scenarios_default_to_auto_nt(tmp_path):
    cfg = cli.parse_config(write_config(tmp_path, """
[[scenario]]
id = "sweep"
theorem = "T5"
epsilons = [0.2, 0.1]
"""))[0]
    pol = cfg.grid_policy()
    assert pol.grid_for(0.2).n_t == 40
    assert pol.grid_for(0.1).n_t == 80


@pytest.mark.parametrize("snippet,complaint", [
    ("[[scenario]]\nid = 'a'\ntheorem = 'T1'\nbogus = 1\n", "unknown key"),
    ("[[scenario]]\nid = 'a'\ntheorem = 'T99'\n", "unknown theorem"),
    ("[[scenario]]\ntheorem = 'T1'\n", "missing required key 'id'"),
    ("[[scenario]]\nid = 'a'\ntheorem = 'T1'\nepsilons = [-0.1]\n",
     "'epsilons'"),
    ("[[scenario]]\nid = 'a'\ntheorem = 'T1'\nepsilons = []\n", "epsilons"),
    ("[[scenario]]\nid = 'a'\ntheorem = 'T1'\n[scenario.grid]\nfoo = 2\n",
     "unknown key"),
    ("[[scenario]]\nid = 'a'\ntheorem = 'T1'\n[scenario.params]\nfoo = 2\n",
     "unknown key"),
    ("[[scenario]]\nid = 'a'\ntheorem = 'T1'\n[scenario.profile]\nwidth = 1.0\n",
     "family"),
    ("top_level_junk = true\n[[scenario]]\nid = 'a'\ntheorem = 'T1'\n",
     "unknown key"),
])
def test_bad_configs_rejected(tmp_path, snippet, complaint):
    with pytest.raises(ConfigError, match=complaint):
        cli.parse_config(write_config(tmp_path, snippet))


def test_duplicate_ids_rejected(tmp_path):
    text = MINIMAL + MINIMAL
    with pytest.raises(ConfigError, match="duplicate scenario id"):
        cli.parse_config(write_config(tmp_path, text))


def test_syntax_error_reports_line(tmp_path):
    with pytest.raises(ConfigError, match="line"):
        cli.parse_config(write_config(tmp_path, "[[scenario]\nid = 'x'\n"))


def test_empty_config_rejected(tmp_path):
    with pytest.raises(ConfigError, match="no \\[\\[scenario\\]\\]"):
        cli.parse_config(write_config(tmp_path, "schema_version = 1\n"))


def test_shipped_acceptance_config_parses():
    configs = cli.parse_config(cli.default_config_path())
    ids = [c.id for c in configs]
    assert len(ids) == len(set(ids))
    assert {c.theorem for c in configs} == {
        "T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", "LA1", "TA2"}


def test_run_writes_reports_and_exit_code(tmp_path):
    configs = cli.parse_config(write_config(tmp_path, TINY_SUITE))
    out = tmp_path / "out"
    lines = []
    code = cli.run(configs, out, echo=lines.append)
    assert code == 0
    for cfg in configs:
        assert (out / f"{cfg.id}.json").exists()
        assert (out / f"{cfg.id}.csv").exists()
        assert (out / f"{cfg.id}.svg").exists()
    doc = json.loads((out / "tiny-flat.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["verdict"] is True
    assert doc["records"]
    header = (out / "tiny-robin.csv").read_text().splitlines()[0]
    assert header.startswith("instance,alpha1,alpha2,E1,E2")
    assert all(line.startswith(("PASS", "FAIL")) for line in lines)


def test_violated_hypothesis_gives_nonzero_exit(tmp_path):
    config = write_config(tmp_path, """
[[scenario]]
id = "too-wide"
theorem = "T5"
epsilons = [3.0]
[scenario.profile]
family = "constant"
amplitude = 0.5
[scenario.grid]
n_s = 60
n_t = 12
""")
    configs = cli.parse_config(config)
    code = cli.run(configs, tmp_path / "out", no_svg=True,
                   echo=lambda *a: None)
    assert code == 1


def test_rerun_is_byte_identical(tmp_path):
    configs = cli.parse_config(write_config(tmp_path, TINY_SUITE))
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    cli.run(configs, out1, echo=lambda *a: None)
    cli.run(configs, out2, echo=lambda *a: None)
    for f in sorted(out1.iterdir()):
        assert f.read_bytes() == (out2 / f.name).read_bytes(), f.name


def test_jobs_parallelism_matches_serial(tmp_path):
    configs = cli.parse_config(write_config(tmp_path, TINY_SUITE))
    out1, out2 = tmp_path / "serial", tmp_path / "par"
    cli.run(configs, out1, jobs=1, no_svg=True, echo=lambda *a: None)
    cli.run(configs, out2, jobs=3, no_svg=True, echo=lambda *a: None)
    for f in sorted(out1.iterdir()):
        assert f.read_bytes() == (out2 / f.name).read_bytes(), f.name


def test_validate_subcommand(tmp_path):
    good = write_config(tmp_path, MINIMAL)
    assert cli.run_validate(cli.parse_config(good), echo=lambda *a: None) == 0
    bad = write_config(tmp_path, """
[[scenario]]
id = "hard-reject"
theorem = "T5"
epsilons = [3.0]
[scenario.profile]
family = "constant"
amplitude = 0.5
""", name="bad.toml")
    assert cli.run_validate(cli.parse_config(bad), echo=lambda *a: None) == 1


def test_transverse_subcommand(tmp_path):
    config = write_config(tmp_path, """
[[scenario]]
id = "bent"
theorem = "T3"
epsilons = [0.1]
[scenario.profile]
family = "gaussian_bump"
amplitude = 5.0
width = 1.0
[scenario.grid]
half_length = 5.0
""")
    out = tmp_path / "out"
    assert cli.run_transverse(cli.parse_config(config), out,
                              echo=lambda *a: None) == 0
    lines = (out / "bent-transverse.csv").read_text().splitlines()
    assert lines[0] == "s,alpha,nu0,lambda0,beta,gap"
    assert len(lines) == 102
    mid = lines[51].split(",")          # s = 0: the bump peak
    assert float(mid[1]) == pytest.approx(0.5 / (2 * 0.5), rel=1e-6)
    assert float(mid[5]) > 0.0


def test_embed_subcommand(tmp_path):
    config = write_config(tmp_path, """
[[scenario]]
id = "twisted"
theorem = "T2"
epsilons = [0.1]
[scenario.profile]
family = "gaussian_twist"
amplitude = 1.0
width = 1.0
[scenario.grid]
half_length = 4.0
""")
    out = tmp_path / "out"
    messages = []
    assert cli.run_embed(cli.parse_config(config), out, echo=messages.append) == 0
    xyz = out / "twisted.xyz"
    assert xyz.exists()
    n_lines = len(xyz.read_text().splitlines())
    assert n_lines == 801 * 17          # s-steps x t-nodes
    assert "deviation" in messages[0]


def test_main_entry_point(tmp_path):
    config = write_config(tmp_path, TINY_SUITE)
    out = tmp_path / "cli-out"
    code = cli.main(["all", "--config", str(config), "--out", str(out),
                     "--no-svg"])
    assert code == 0
    assert (out / "tiny-flat.json").exists()
    assert not (out / "tiny-flat.svg").exists()
    assert cli.main(["spectrum", "--config", str(config), "--out",
                     str(out)]) == 0
    missing = tmp_path / "missing.toml"
    assert cli.main(["all", "--config", str(missing), "--out", str(out)]) == 2
    bad = write_config(tmp_path, "[[scenario]\n", name="bad.toml")
    assert cli.main(["all", "--config", str(bad), "--out", str(out)]) == 2
    hardy_only = write_config(tmp_path, MINIMAL, name="t2only.toml")
    assert cli.main(["hardy", "--config", str(hardy_only),
                     "--out", str(out)]) == 2
