import csv
import json
import math

import pytest

from mixtrace import DomainError, ExponentConfig, HardyParams, ell_independence_check, refinement_study, run_campaign
from mixtrace.hardy import CAMPAIGN_SHAPES
from mixtrace.harness import CheckKind, Instance, read_jsonl, write_jsonl, write_summary_csv
from mixtrace.reports import FAIL, INCONCLUSIVE, PASS, REPORT_FIELDS, CampaignFailure

CFG1 = ExponentConfig(1, (2.0,), 2.0, 0.0)
MATRIX = [CFG1, ExponentConfig(1, (1.5,), 3.0, -0.5)]
HAT = {"kind": "hat"}
GAUSS = {"kind": "gaussian-bump"}
BUMP = {"kind": "bump"}
INDICATOR = {"kind": "indicator"}
RAMP = {"kind": "ramp-cutoff", "params": {"eta": HAT}}


def test_convolution_campaign_passes_with_unit_constant():
    result = run_campaign("convolution", [HAT, GAUSS], [CFG1], options={"deltas": [0.5, 0.125]})
    assert len(result) == 8
    smoothing = [r for r in result if r.check_id == "convolution/smoothing"]
    assert all(r.status == PASS and r.constant == 1.0 for r in smoothing)
    assert result.summary.failed == 0
    assert math.isfinite(result.summary.empirical_constant)


def test_besov_trace_campaign_on_ramp():
    result = run_campaign("besov-trace", [RAMP], [CFG1])
    (rep,) = result
    assert rep.status == PASS
    assert 0 < rep.lhs / rep.rhs < math.inf
    assert rep.params["check"]["ell"] == 0.5


def test_vanishing_trace_campaign():
    cfg = ExponentConfig(1, (2.0,), 2.0, -1.0)
    (rep,) = run_campaign("vanishing-trace", [{"kind": "log-decay"}], [cfg])
    slices = rep.params["check"]["slices"]
    assert rep.status == PASS
    assert all(b < a for a, b in zip(slices, slices[1:]))
    assert rep.lhs < 0.05 * rep.rhs


def test_gradient_kinds_record_exclusions():
    result = run_campaign("extension-bound", [HAT, INDICATOR], [CFG1])
    assert len(result) == 1
    (key, reason), = result.excluded
    assert "indicator" in key and reason
    assert result.summary.excluded == 1


def test_window_exclusion_for_trace_kinds():
    outside = ExponentConfig(1, (2.0,), 2.0, -1.0)
    result = run_campaign("lp-trace", [RAMP], [CFG1, outside])
    assert len(result) == 1
    assert "alpha" in result.excluded[0][1]


def test_failure_aborts_with_offending_report():
    with pytest.raises(CampaignFailure) as info:
        run_campaign("besov-equivalence", [HAT], [CFG1], ceilings={"besov-equivalence": 1.0})
    assert info.value.report.status == FAIL
    assert "besov-equivalence" in str(info.value)


def test_non_strict_campaign_keeps_failures():
    result = run_campaign("besov-equivalence", [HAT], [CFG1], ceilings={"besov-equivalence": 1.0},
                          strict=False)
    assert result.summary.failed == 1


def test_empty_inputs_rejected():
    with pytest.raises(DomainError):
        run_campaign("hardy", [], [HardyParams(2, 0)])
    with pytest.raises(DomainError):
        run_campaign("besov-equivalence", [HAT], [])


def test_empirical_constant_monotone_under_family_growth():
    small = run_campaign("besov-equivalence", [GAUSS], MATRIX)
    large = run_campaign("besov-equivalence", [GAUSS, HAT, BUMP], MATRIX)
    assert large.summary.empirical_constant >= small.summary.empirical_constant
    larger = run_campaign("besov-equivalence", [GAUSS, HAT, BUMP, INDICATOR], MATRIX)
    assert larger.summary.empirical_constant >= large.summary.empirical_constant


def test_reports_are_byte_identical_across_runs(tmp_path):
    args = ("extension-limit", [HAT, {"kind": "constant"}], MATRIX)
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_jsonl(run_campaign(*args).reports, a)
    write_jsonl(run_campaign(*args).reports, b)
    assert a.read_bytes() == b.read_bytes()


def test_inconclusive_instances_are_rare_and_annotated():
    params = [HardyParams(q, s, a) for q in (1.5, 2.0) for s in (-0.5, 0.0) for a in (1.0, math.inf)]
    result = run_campaign("hardy", list(CAMPAIGN_SHAPES), params)
    inconclusive = [r for r in result if r.status == INCONCLUSIVE]
    assert len(inconclusive) <= 0.05 * len(result)
    assert all(r.params["check"].get("reason") for r in inconclusive)


def test_constant_on_half_line_is_inconclusive_not_pass():
    (rep,) = run_campaign("hardy", ["constant"], [HardyParams(2, 0, math.inf)])
    assert rep.status == INCONCLUSIVE
    assert rep.params["check"]["reason"]


def test_polar_divergence_is_excluded_with_reason():
    fam = {"kind": "radial-power", "params": {"d": 2, "exponent": -1.5, "radius": 1.0}}
    result = run_campaign("hardy-polar", [fam], [HardyParams.polar(1, 0, 2)])
    assert len(result) == 0
    assert "diverges" in result.excluded[0][1]


def test_refinement_of_hardy_closed_form():
    inst = Instance(CheckKind.HARDY, "sqrt", HardyParams(2, 0, 1.0))
    rep = refinement_study("hardy", inst)
    assert rep.status == PASS
    assert max(rep.params["check"]["drifts"].values()) <= 1e-8


def test_refinement_of_hat_besov_equivalence():
    inst = Instance(CheckKind.BESOV_EQUIVALENCE, HAT, CFG1)
    rep = refinement_study("besov-equivalence", inst)
    assert rep.status == PASS
    assert rep.lhs <= 0.02


def test_refinement_of_constant_extension_limit():
    inst = Instance(CheckKind.EXTENSION_LIMIT, {"kind": "constant"}, CFG1)
    rep = refinement_study("extension-limit", inst, levels=3)
    assert rep.status == PASS
    assert rep.params["check"]["statuses"] == [PASS]


@pytest.mark.parametrize("levels", [1, 5])
def test_refinement_levels_bounded(levels):
    with pytest.raises(DomainError):
        refinement_study("hardy", Instance(CheckKind.HARDY, "sqrt", HardyParams(2, 0)), levels)


def test_refinement_kind_must_match():
    with pytest.raises(DomainError):
        refinement_study("besov-equivalence", Instance(CheckKind.HARDY, "sqrt", HardyParams(2, 0)))


def test_single_ell_serves_every_p_vec():
    g = {"kind": "gaussian-bump", "params": {"d": 2}}
    rep = ell_independence_check(g, 2.0, 0.0, [(1, 1), (2, 3), (4, 2)])
    assert rep.status == PASS
    runs = rep.params["check"]["runs"]
    assert rep.params["check"]["ell"] == 0.5
    assert len(runs) == 6
    assert all(r["status"] == PASS and math.isfinite(r["ratio"]) for r in runs)


def test_singleton_p_list_reduces_to_besov_trace():
    rep = ell_independence_check(GAUSS, 2.0, 0.0, [(2,)])
    ids = [r["check_id"] for r in rep.params["check"]["runs"]]
    assert ids == ["besov-trace", "extension-bound"]
    assert rep.status == PASS


def test_mixed_q_rejected():
    cfgs = [ExponentConfig(1, (2.0,), 2.0, 0.0), ExponentConfig(1, (2.0,), 3.0, 0.0)]
    with pytest.raises(DomainError):
        ell_independence_check(GAUSS, 2.0, 0.0, cfgs)


def test_jsonl_schema_and_round_trip(tmp_path):
    result = run_campaign("lp-trace", [RAMP], MATRIX)
    path = tmp_path / "r.jsonl"
    write_jsonl(result.reports, path)
    lines = path.read_text().splitlines()
    assert len(lines) == len(result)
    for line in lines:
        assert tuple(sorted(json.loads(line))) == tuple(sorted(REPORT_FIELDS))
    back = read_jsonl(path)
    assert [r.to_json() for r in back] == lines


def test_summary_csv(tmp_path):
    result = run_campaign("lp-trace", [RAMP], MATRIX)
    path = tmp_path / "s.csv"
    write_summary_csv([result.summary], path)
    (row,) = list(csv.DictReader(path.open()))
    assert row["kind"] == "lp-trace"
    assert int(row["passed"]) == len(result)
    assert float(row["ceiling"]) == 20.0
