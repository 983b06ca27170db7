import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from src.models.schema import Conclusion
from src.sampling.hilbert_sampler import SampleTable
from src.sampling.polynomial_fitter import FitReport

logger = logging.getLogger(__name__)

SPREAD_NOTE = (
    "l_M(I) is read as the analytic spread of the image of I in R/ann(M), "
    "computed from the fiber cone of the Rees algebra"
)


@dataclass
class TheoremReport:
    """Outcome of one theorem check.

    Args:
        theorem: task id such as 'theorem6'.
        conclusion: CONFIRMED, REFUTED or INCONCLUSIVE.
        hypotheses: (name, holds) pairs in the order they were checked.
        prediction: what the algebraic criterion predicts, when it applies.
        fit: empirical verdict from the fitter.
        criteria: criterion values, e.g. radical membership per generator.
        fixture: description of i, I, J, M, N and the ring.
        budgets: grid ranges, degrees and search budgets used.
        identity_residuals: residual grid for exact identities.
        notes: free-form remarks carried into the explanation.
        engine_disagreement: two criteria that must agree did not.
    """

    theorem: str
    conclusion: Conclusion
    hypotheses: List[Tuple[str, bool]] = field(default_factory=list)
    prediction: Optional[bool] = None
    fit: Optional[FitReport] = None
    criteria: Dict[str, Any] = field(default_factory=dict)
    fixture: Dict[str, Any] = field(default_factory=dict)
    budgets: Dict[str, Any] = field(default_factory=dict)
    identity_residuals: Optional[SampleTable] = None
    table: Optional[SampleTable] = None
    notes: List[str] = field(default_factory=list)
    engine_disagreement: bool = False

    @property
    def failed_hypotheses(self):
        return [name for name, holds in self.hypotheses if not holds]

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "conclusion": self.conclusion.value,
            "hypotheses": [{"name": name, "holds": holds} for name, holds in self.hypotheses],
            "prediction": self.prediction,
            "fit": self.fit.to_dict() if self.fit else None,
            "criteria": self.criteria,
            "fixture": self.fixture,
            "budgets": self.budgets,
            "identity_residuals": self.identity_residuals.to_dict() if self.identity_residuals is not None else None,
            "table": self.table.to_dict() if self.table is not None else None,
            "notes": list(self.notes),
            "engine_disagreement": self.engine_disagreement,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _fit_lines(fit: Dict[str, Any]) -> List[str]:
    lines = [f"Fitter verdict: {fit['verdict']} (degree cap {fit['max_degree']})"]
    poly = fit.get("polynomial")
    if poly:
        lines.append(f"  polynomial: {poly['expression']} (onset {tuple(poly['onset'])}, degree {poly['degree']})")
    elif fit.get("onset"):
        lines.append(f"  best onset {tuple(fit['onset'])} leaves {len(fit.get('residuals') or [])} nonzero residuals")
    evidence = fit.get("region_evidence")
    if evidence:
        lines.append(f"  region dependence across the line {evidence['line']} (cells n, m >= {evidence['corner']}):")
        lines.append(f"    on one side: {evidence['above']['expression']}")
        lines.append(f"    on the other: {evidence['below']['expression']}")
    return lines


def _prop5_text(report):
    lines = [f"Five conditions on Tor_{report['i']} (budget {report['budget']}): "
             + ("agree" if report["agree"] else "DISAGREE")]
    for key in sorted(report["conditions"]):
        lines.append(f"  ({key}) {report['conditions'][key]}")
    return "\n".join(lines) + "\n"


def explain(report) -> str:
    """Human-readable narrative of a TheoremReport, a FitReport, or their JSON dicts."""
    if hasattr(report, "to_dict"):
        report = report.to_dict()
    if "conditions" in report:
        return _prop5_text(report)
    if "verdict" in report:
        return "\n".join(_fit_lines(report)) + "\n"
    if "theorem" not in report:
        raise ValueError(f"Not a report: keys {sorted(report)}")
    lines = [f"{report['theorem']}: {report['conclusion']}"]
    fixture = report.get("fixture") or {}
    if fixture:
        described = ", ".join(f"{k}={fixture[k]}" for k in sorted(fixture))
        lines.append(f"Fixture: {described}")
    hypotheses = report.get("hypotheses") or []
    for hyp in hypotheses:
        lines.append(f"Hypothesis {hyp['name']}: {'holds' if hyp['holds'] else 'FAILS'}")
    failed = [h["name"] for h in hypotheses if not h["holds"]]
    if report["conclusion"] == Conclusion.INCONCLUSIVE.value and failed:
        lines.append(f"Inconclusive because the hypothesis '{failed[0]}' fails.")
    criteria = report.get("criteria") or {}
    radical = criteria.get("radical_membership")
    if radical:
        for j, members in sorted(radical.items()):
            missing = [g for g, ok in members.items() if not ok]
            if missing:
                lines.append(f"Generators of I outside rad ann Tor_{j}: {', '.join(missing)}")
            else:
                lines.append(f"Every generator of I lies in rad ann Tor_{j}")
    for key in sorted(k for k in criteria if k != "radical_membership"):
        lines.append(f"{key}: {criteria[key]}")
    if report.get("prediction") is not None:
        lines.append(f"Prediction: {'polynomial' if report['prediction'] else 'not polynomial'}")
    if report.get("fit"):
        lines.extend(_fit_lines(report["fit"]))
    budgets = report.get("budgets") or {}
    if budgets:
        lines.append("Budgets: " + ", ".join(f"{k}={budgets[k]}" for k in sorted(budgets)))
    if report.get("engine_disagreement"):
        lines.append("WARNING: criteria that must agree disagree; this indicates an engine defect.")
    lines.extend(report.get("notes") or [])
    return "\n".join(lines) + "\n"
