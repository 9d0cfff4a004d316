"""Run every campaign named in a :class:`RunConfig`."""

from __future__ import annotations

from dataclasses import dataclass

from .config import RunConfig
from .exponents import ExponentConfig
from .harness import CampaignSummary, CheckKind, run_campaign, summarize
from .reports import CLOSED_FORM_TOL, FAIL, INCONCLUSIVE, PASS, ComparisonReport


@dataclass
class SuiteResult:
    reports: list[ComparisonReport]
    summaries: list[CampaignSummary]

    @property
    def failed(self) -> list[ComparisonReport]:
        return [r for r in self.reports if r.status == FAIL]

    @property
    def inconclusive_fraction(self) -> float:
        if not self.reports:
            return 0.0
        return sum(r.status == INCONCLUSIVE for r in self.reports) / len(self.reports)


def _convolution_matrix(cfg: RunConfig) -> list[ExponentConfig]:
    seen = {}
    for c in cfg.exponent_matrix():
        seen.setdefault(c.p_vec, ExponentConfig(c.d, c.p_vec, 2.0, 0.0))
    return list(seen.values())


def campaign_inputs(cfg: RunConfig, kind: CheckKind):
    """``(family_set, cfg_matrix, options)`` for one kind."""
    fam = cfg.families
    matrix = cfg.exponent_matrix()
    if kind == CheckKind.HARDY:
        return list(cfg.hardy.shapes), cfg.hardy.params(), {"eps": cfg.hardy.eps}
    if kind == CheckKind.HARDY_POLAR:
        return list(fam.polar), cfg.hardy_polar.params(), None
    if kind == CheckKind.CONVOLUTION:
        return list(fam.boundary), _convolution_matrix(cfg), {"deltas": list(cfg.deltas)}
    if kind in (CheckKind.BESOV_EQUIVALENCE,):
        return list(fam.boundary), matrix, None
    if kind == CheckKind.EXTENSION_BOUND:
        return list(fam.boundary), matrix, {"k_max": cfg.k_max}
    if kind == CheckKind.EXTENSION_LIMIT:
        return list(fam.limit), matrix, {"k_max": cfg.k_max}
    if kind in (CheckKind.LP_TRACE, CheckKind.BESOV_TRACE):
        return list(fam.halfspace), matrix, None
    if kind == CheckKind.VANISHING_TRACE:
        return list(fam.vanishing), cfg.vanishing.configs(), None
    raise ValueError(kind)


def retolerate(report: ComparisonReport, cfg: RunConfig) -> ComparisonReport:
    """Re-judge a ratio-decided report under the configured tolerances."""
    check = report.check
    if report.status == INCONCLUSIVE or "reason" in check:
        return report
    closed = check.get("tol") == CLOSED_FORM_TOL
    tol = cfg.tolerance.closed_form if closed else cfg.tolerance.quadrature
    if report.check_id == "extension-limit" or report.check_id == "vanishing-trace":
        tol = check.get("tol", 0.0)
    check["tol"] = tol
    report.status = PASS if report.ratio <= 1.0 + tol else FAIL
    return report


def run_suite(cfg: RunConfig, strict: bool = False) -> SuiteResult:
    reports: list[ComparisonReport] = []
    summaries: list[CampaignSummary] = []
    ceilings = cfg.ceiling_map()
    for name in cfg.checks:
        kind = CheckKind(name)
        families, matrix, options = campaign_inputs(cfg, kind)
        if kind == CheckKind.EXTENSION_LIMIT:
            options = {**(options or {}), "s_range": tuple(cfg.s_range)}
        result = run_campaign(kind, families, matrix, cfg.quadrature, ceilings, options, strict=strict)
        judged = [retolerate(r, cfg) for r in result.reports]
        reports.extend(judged)
        summaries.append(summarize(kind, judged, result.excluded, ceilings))
    return SuiteResult(reports, summaries)
