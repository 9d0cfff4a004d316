import csv
import io
import json
import math
import re
import subprocess
import sys

import pytest

from mixtrace import ConfigError
from mixtrace import config as config_mod
from mixtrace.cli import build_parser, main
from mixtrace.config import RunConfig
from mixtrace.reports import REPORT_FIELDS

SMALL_RUN = """
checks = ["hardy", "extension-limit"]

[[matrix]]
q = [2.0]
alpha = [0.0]
p_vecs = [[2.0]]

[families]
limit = [{ kind = "hat" }, { kind = "constant" }]

[hardy]
q = [2.0]
sigma = [0.0]
a = [1.0]
shapes = ["sqrt", "near-extremal"]
"""


def test_defaults_round_trip():
    cfg = RunConfig()
    assert config_mod.loads(cfg.dumps()) == cfg


def test_shipped_file_matches_defaults():
    assert config_mod.load(config_mod.default_config_path()) == RunConfig()


def test_partial_file_keeps_other_defaults():
    cfg = config_mod.loads(SMALL_RUN)
    assert cfg.checks == ("hardy", "extension-limit")
    assert cfg.quadrature == RunConfig().quadrature
    assert cfg.ceiling_map() == RunConfig().ceiling_map()
    assert [c.key() for c in cfg.exponent_matrix()] == [c.key() for c in cfg.matrix[0].configs()]


def test_matrix_edge_gap_adds_near_endpoint_alpha():
    alphas = sorted({c.alpha for c in RunConfig().exponent_matrix() if c.q == 3.0})
    assert alphas == [-0.5, 0.0, 1.9]


def test_seed_override():
    assert RunConfig().with_seed(7).quadrature.seed == 7


@pytest.mark.parametrize("text", [
    "colour = 1",
    "[quadrature]\npanels = 3",
    "[[matrix]]\nq = [2.0]\nbeta = [0.0]",
    "[ceilings]\nhardy = 2.0",
    "checks = ['sideways']",
    "[families]\nboundary = [{ kind = 'nope' }]",
    "[extension]\nk_min = 2",
    "not toml [",
])
def test_bad_config_rejected(text):
    with pytest.raises(ConfigError):
        config_mod.loads(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        config_mod.load(tmp_path / "absent.toml")


def _help_entries(text):
    """Option blocks of an argparse help page, keyed by their first flag."""
    entries, current = {}, None
    for line in text.splitlines():
        m = re.match(r"^  (-[-\w]+)", line)
        if m:
            current = m.group(1)
            entries[current] = line
        elif current and line.startswith("    "):
            entries[current] += " " + line.strip()
        else:
            current = None
    return entries


def _subparsers():
    parser = build_parser()
    action = next(a for a in parser._actions if a.dest == "command")
    return action.choices


@pytest.mark.parametrize("name", ["norm", "hardy", "besov", "extend", "trace", "verify", "refine"])
def test_help_documents_every_default(name):
    sub = _subparsers()[name]
    entries = _help_entries(sub.format_help())
    flags = {a.option_strings[0] for a in sub._actions if a.option_strings} - {"-h"}
    assert flags <= set(entries)
    for flag in flags:
        assert "default" in entries[flag], entries[flag]


def test_top_level_help_names_every_subcommand(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    for name in ("norm", "hardy", "besov", "extend", "trace", "verify", "refine"):
        assert name in out
    assert "MIXTRACE_WORKERS" in out


def test_norm_of_hat_is_its_area(capsys):
    assert main(["norm", "--family", "hat", "--d", "1", "--p", "1", "--kind", "lp"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-12)


TRUNCATED_GAUSS = math.sqrt(2 * math.pi) * math.erf(0.5 / math.sqrt(2))


def test_box_radius_flag_truncates_unbounded_support(capsys):
    assert main(["norm", "--family", "gaussian-bump", "--p", "1", "--box-radius", "0.5"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(TRUNCATED_GAUSS, rel=1e-10)


def test_spec_flags_accepted_before_the_subcommand(capsys):
    assert main(["--box-radius", "0.5", "norm", "--family", "gaussian-bump", "--p", "1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(TRUNCATED_GAUSS, rel=1e-10)


def test_compact_support_ignores_box_radius(capsys):
    assert main(["norm", "--family", "hat", "--p", "1", "--box-radius", "0.5"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-12)


def test_hardy_near_extremal(capsys):
    code = main(["hardy", "--q", "2", "--sigma", "0", "--family", "near-extremal", "--eps", "0.01"])
    assert code == 0
    lines = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
    assert float(lines["lhs/rhs"]) == pytest.approx(1 / 0.51, rel=1e-6)
    assert lines["status"] == "PASS"


def test_besov_prints_three_variants(capsys):
    assert main(["besov", "--family", "gaussian-bump"]) == 0
    out = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
    assert float(out["ell"]) == 0.5
    assert {"direct", "integral:1.0", "dyadic", "worst"} <= set(out)
    assert 1.0 <= float(out["worst"]) <= 50.0


def test_extend_emits_slice_csv(tmp_path):
    path = tmp_path / "slices.csv"
    assert main(["extend", "--family", "hat", "--emit-slices", str(path), "--seed", "3"]) == 0
    rows = list(csv.DictReader(path.open()))
    assert list(rows[0]) == ["y", "raw", "scaled"]
    assert [float(r["y"]) for r in rows] == [2.0**-s for s in range(4, 10)]
    for r in rows:
        assert float(r["scaled"]) == pytest.approx(float(r["raw"]) * float(r["y"]) ** -0.5, rel=1e-12)


def test_extend_to_stdout(capsys):
    assert main(["extend", "--family", "constant", "--s-min", "4", "--s-max", "5"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["y", "raw", "scaled"] and len(rows) == 3


def test_trace_fail_exits_one(capsys):
    assert main(["trace", "--ceiling", "1e-3"]) == 1
    assert "status FAIL" in capsys.readouterr().out


def test_trace_pass_exits_zero(capsys):
    assert main(["trace"]) == 0
    assert "status PASS" in capsys.readouterr().out


def test_refine_hardy(capsys):
    assert main(["refine", "--kind", "hardy", "--family", "sqrt", "--levels", "2"]) == 0
    assert capsys.readouterr().out.strip().endswith("status PASS")


def test_domain_error_exits_two(capsys):
    assert main(["hardy", "--q", "2", "--sigma", "0.7"]) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand_exits_two():
    assert main(["plot"]) == 2


def test_verify_writes_reports(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(SMALL_RUN)
    out, summary = tmp_path / "r.jsonl", tmp_path / "s.csv"
    assert main(["verify", "--config", str(cfg), "--out", str(out), "--summary", str(summary)]) == 0
    reports = [json.loads(line) for line in out.read_text().splitlines()]
    assert reports and all(set(r) == set(REPORT_FIELDS) for r in reports)
    assert {r["check_id"] for r in reports} == {"hardy", "extension-limit"}
    kinds = [row["kind"] for row in csv.DictReader(summary.open())]
    assert kinds == ["hardy", "extension-limit"]
    assert "hardy:" in capsys.readouterr().out


def test_verify_seed_flag(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(SMALL_RUN)
    out = tmp_path / "r.jsonl"
    assert main(["verify", "--config", str(cfg), "--out", str(out), "--summary", "-", "--seed", "7"]) == 0
    first = json.loads(out.read_text().splitlines()[0])
    assert first["params"]["spec"]["seed"] == 7


def test_verify_config_error_exits_two(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[quadrature]\npanels = 3\n")
    assert main(["verify", "--config", str(cfg)]) == 2


def test_verify_fail_exits_one(tmp_path):
    cfg = tmp_path / "tight.toml"
    cfg.write_text('checks = ["hardy-polar"]\n[ceilings]\nhardy-polar = 0.1\n'
                   '[hardy_polar]\ntheta = [2.0]\nbeta = [0.0]\na = [1.0]\n')
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "r.jsonl"), "--summary", "-"]) == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mixtrace", "norm", "--family", "hat", "--p", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(1.0)
