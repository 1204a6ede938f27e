"""Text and JSON rendering of estimation and refutation results.

The text layout mirrors the reporting convention of causal-analysis
tooling: an identified-estimand header, the realized regression-style
formula, and the estimate. Floats are printed with Python's repr, the
shortest decimal string that round-trips a 64-bit float.
"""

from __future__ import annotations

import json
from typing import Sequence

from .dataset import EstimatorKind
from .estimators import Estimate
from .graph import Estimand
from .refuters import RefutationResult, RefuterKind

REFUTER_TITLES = {
    RefuterKind.RANDOM_COMMON_CAUSE: "Add a random common cause",
    RefuterKind.PLACEBO_TREATMENT: "Use a placebo treatment",
    RefuterKind.DATA_SUBSET: "Use a subset of data",
    RefuterKind.BOOTSTRAP_SAMPLE: "Bootstrap Sample Dataset",
}


def _expression(estimand: Estimand) -> str:
    if estimand.adjustment_set:
        given = ",".join(estimand.adjustment_set)
        return f"d/d[{estimand.treatment}] E[{estimand.outcome}|{given}]"
    return f"d/d[{estimand.treatment}] E[{estimand.outcome}]"


def _realized(estimand: Estimand) -> str:
    terms = "+".join([estimand.treatment, *estimand.adjustment_set])
    return f"b: {estimand.outcome}~{terms}"


def render_text_report(estimand: Estimand, estimate: Estimate) -> str:
    """The fixed-layout causal-estimate report."""
    lines = [
        "*** Causal Estimate ***",
        "## Identified estimand",
        "Estimand type: nonparametric-ate",
        "### Estimand : 1",
        "Estimand name: backdoor",
        "Estimand expression:",
        _expression(estimand),
        f"Estimand assumption 1, Unconfoundedness: {estimand.assumption_text}",
        "## Realized estimand",
        _realized(estimand),
        f"Target units: {estimate.target_units}",
        "## Estimate",
        f"Mean value: {estimate.ate!r}",
        f"Causal Estimate is: {estimate.ate!r}",
    ]
    if estimate.ci is not None:
        lower, upper, level = estimate.ci
        lines.append(
            f"Confidence interval (level {level!r}): [{lower!r}, {upper!r}]"
        )
    return "\n".join(lines) + "\n"


def render_interpretation(estimand: Estimand, estimate: Estimate) -> str:
    """One-sentence reading of the estimate, emitted after the report."""
    return (
        f"Interpretation: increasing {estimand.treatment} from 0 to 1 changes "
        f"the expected value of {estimand.outcome} by {estimate.ate!r}.\n"
    )


def render_refutation_block(
    estimator: EstimatorKind, result: RefutationResult
) -> str:
    """One refutation block in the classic rebuttal layout."""
    title = REFUTER_TITLES[RefuterKind(result.method)]
    lines = [
        "*** Class Name ***",
        f"backdoor.{EstimatorKind(estimator).value}",
        f"Refute: {title}",
        f"Estimated effect: {result.estimated_effect!r}",
        f"New effect: {result.new_effect!r}",
        f"p-value: {result.p_value!r}",
    ]
    return "\n".join(lines) + "\n"


def render_json(
    estimand: Estimand,
    estimate: Estimate,
    refutations: Sequence[RefutationResult] = (),
) -> str:
    """Single JSON object with estimand, estimate, and refutations."""
    estimate_obj: dict = {
        "method": EstimatorKind(estimate.method).value,
        "ate": estimate.ate,
        "n_treated": estimate.n_treated,
        "n_control": estimate.n_control,
    }
    if estimate.ci is not None:
        lower, upper, level = estimate.ci
        estimate_obj["ci"] = {"lower": lower, "upper": upper, "level": level}
    payload = {
        "estimand": {
            "treatment": estimand.treatment,
            "outcome": estimand.outcome,
            "adjustment_set": list(estimand.adjustment_set),
        },
        "estimate": estimate_obj,
        "refutations": [
            {
                "method": RefuterKind(r.method).value,
                "estimated_effect": r.estimated_effect,
                "new_effect": r.new_effect,
                "p_value": r.p_value,
                "n_simulations": r.n_simulations,
            }
            for r in refutations
        ],
    }
    return json.dumps(payload, indent=2) + "\n"
