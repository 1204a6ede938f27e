"""Average-treatment-effect estimators under a backdoor estimand.

All four methods share the same contract: binary treatment, numeric
outcome, adjustment over the estimand's set. The matching estimators pair
each unit with its single nearest opposite-arm neighbour (with
replacement, ties broken toward the smallest row index) and blend the
treated and control averages into an ATE.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import AnalysisSpec, EstimatorKind, Table, standardize_columns
from .errors import (
    AllStrataDroppedError,
    EmptyTreatmentArmError,
    NonBinaryVariableError,
    RankDeficientDesignError,
    ResampleExhaustedError,
)
from .graph import Estimand
from .propensity import fit_logistic, predict_propensity

_MATCH_BLOCK = 256  # treated rows per distance block, bounds memory

# Five strata (the textbook choice) leave too much residual confounding on
# strongly confounded cohorts; twenty keeps strata well-populated at the
# sample sizes this package targets while cutting the residual below the
# matching estimators' noise floor.
DEFAULT_N_STRATA = 20


@dataclass(frozen=True)
class Estimate:
    """An ATE with its method tag and, optionally, a bootstrap CI."""

    ate: float
    method: EstimatorKind
    n_treated: int
    n_control: int
    target_units: str = "ate"
    ci: tuple[float, float, float] | None = None  # (lower, upper, level)


def _split_arms(t: Table, spec: AnalysisSpec) -> tuple[np.ndarray, np.ndarray]:
    treatment = t.column(spec.treatment)
    if not np.all((treatment == 0.0) | (treatment == 1.0)):
        raise NonBinaryVariableError(
            f"treatment column {spec.treatment!r} must contain only 0 and 1"
        )
    treated = np.flatnonzero(treatment == 1.0)
    control = np.flatnonzero(treatment == 0.0)
    if treated.size == 0 or control.size == 0:
        raise EmptyTreatmentArmError(
            f"treatment column {spec.treatment!r} has an empty arm"
        )
    return treated, control


def _nearest_rows(queries: np.ndarray, pool: np.ndarray) -> np.ndarray:
    """Index into `pool` of each query's nearest neighbour.

    Works on (n, d) coordinate arrays; ties resolve to the smallest pool
    index because argmin returns the first minimum.
    """
    out = np.empty(queries.shape[0], dtype=np.intp)
    for start in range(0, queries.shape[0], _MATCH_BLOCK):
        block = queries[start : start + _MATCH_BLOCK]
        diff = block[:, None, :] - pool[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        out[start : start + _MATCH_BLOCK] = np.argmin(dist, axis=1)
    return out


def _matching_ate(
    t: Table,
    spec: AnalysisSpec,
    coords: np.ndarray,
    method: EstimatorKind,
) -> Estimate:
    treated, control = _split_arms(t, spec)
    y = t.column(spec.outcome)

    treated_match = _nearest_rows(coords[treated], coords[control])
    att = float(np.mean(y[treated] - y[control[treated_match]]))
    control_match = _nearest_rows(coords[control], coords[treated])
    atc = float(np.mean(y[treated[control_match]] - y[control]))

    n_t, n_c = treated.size, control.size
    ate = (n_t * att + n_c * atc) / (n_t + n_c)
    return Estimate(ate=ate, method=method, n_treated=n_t, n_control=n_c)


def psm_ate(t: Table, spec: AnalysisSpec, estimand: Estimand) -> Estimate:
    """Nearest-neighbour matching on the fitted propensity score."""
    _split_arms(t, spec)  # arm/binary validation before the model fit
    model = fit_logistic(t, spec.treatment, estimand.adjustment_set)
    scores = predict_propensity(model, t)
    return _matching_ate(
        t, spec, scores[:, None], EstimatorKind.PROPENSITY_SCORE_MATCHING
    )


def distance_matching_ate(t: Table, spec: AnalysisSpec, estimand: Estimand) -> Estimate:
    """Nearest-neighbour matching by Euclidean distance on standardized covariates."""
    adj = list(estimand.adjustment_set)
    if adj:
        std = standardize_columns(t, adj)
        coords = np.column_stack([std.column(name) for name in adj])
    else:
        coords = np.zeros((t.n_rows, 1))
    return _matching_ate(t, spec, coords, EstimatorKind.DISTANCE_MATCHING)


def stratification_ate(
    t: Table, spec: AnalysisSpec, estimand: Estimand, n_strata: int = DEFAULT_N_STRATA
) -> Estimate:
    """Propensity-stratified difference in means.

    Rows are sorted by propensity (stable, so ties keep row order) and cut
    into contiguous near-equal strata; remainder rows go to the earliest
    strata. Strata missing an arm are dropped and the rest reweighted by
    their row counts.
    """
    if n_strata < 1:
        raise ValueError("n_strata must be >= 1")
    treated_idx, _ = _split_arms(t, spec)
    y = t.column(spec.outcome)
    treatment = t.column(spec.treatment)

    model = fit_logistic(t, spec.treatment, estimand.adjustment_set)
    scores = predict_propensity(model, t)
    order = np.argsort(scores, kind="stable")

    n = t.n_rows
    base, remainder = divmod(n, n_strata)
    total = 0.0
    used_rows = 0
    pos = 0
    for s in range(n_strata):
        size = base + (1 if s < remainder else 0)
        rows = order[pos : pos + size]
        pos += size
        if size == 0:
            continue
        is_treated = treatment[rows] == 1.0
        n_t = int(is_treated.sum())
        if n_t == 0 or n_t == size:
            continue  # stratum lacks one arm
        diff = float(y[rows[is_treated]].mean() - y[rows[~is_treated]].mean())
        total += size * diff
        used_rows += size
    if used_rows == 0:
        raise AllStrataDroppedError(
            "every stratum lacked a treated or a control unit"
        )
    ate = total / used_rows
    return Estimate(
        ate=ate,
        method=EstimatorKind.STRATIFICATION,
        n_treated=int(treated_idx.size),
        n_control=int(n - treated_idx.size),
    )


def linear_regression_ate(t: Table, spec: AnalysisSpec, estimand: Estimand) -> Estimate:
    """OLS of the outcome on [1, treatment, adjustment set]; ATE is the
    treatment coefficient. Solved by SVD-based least squares, not normal
    equations."""
    treated_idx, control_idx = _split_arms(t, spec)
    y = t.column(spec.outcome)
    design = np.column_stack(
        [np.ones(t.n_rows), t.column(spec.treatment)]
        + [t.column(name) for name in estimand.adjustment_set]
    )
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise RankDeficientDesignError(
            f"design matrix rank {rank} < {design.shape[1]} columns"
        )
    return Estimate(
        ate=float(coef[1]),
        method=EstimatorKind.LINEAR_REGRESSION,
        n_treated=int(treated_idx.size),
        n_control=int(control_idx.size),
    )


_ESTIMATORS = {
    EstimatorKind.PROPENSITY_SCORE_MATCHING: psm_ate,
    EstimatorKind.DISTANCE_MATCHING: distance_matching_ate,
    EstimatorKind.STRATIFICATION: stratification_ate,
    EstimatorKind.LINEAR_REGRESSION: linear_regression_ate,
}


def estimate_ate(
    t: Table, spec: AnalysisSpec, estimand: Estimand, n_strata: int = DEFAULT_N_STRATA
) -> Estimate:
    """Dispatch to the estimator named by the spec."""
    kind = EstimatorKind(spec.estimator)
    if kind is EstimatorKind.STRATIFICATION:
        return stratification_ate(t, spec, estimand, n_strata=n_strata)
    return _ESTIMATORS[kind](t, spec, estimand)


def _resample_rows(rng: np.random.Generator, t: Table, treatment: str) -> Table | None:
    """One bootstrap resample, or None when it lost an arm."""
    idx = rng.integers(0, t.n_rows, size=t.n_rows)
    drawn = t.column(treatment)[idx]
    if np.all(drawn == drawn[0]):
        return None
    return t.take(idx)


def bootstrap_ci(
    t: Table,
    spec: AnalysisSpec,
    estimand: Estimand,
    n_boot: int = 200,
    level: float = 0.95,
    n_strata: int = DEFAULT_N_STRATA,
    n_jobs: int = 1,
) -> Estimate:
    """Percentile bootstrap CI around the full-sample estimate.

    Replicate k draws rows with replacement using seed ``spec.seed + k + 1``;
    resamples that lose a treatment arm are redrawn from the same stream,
    with at most 10 * n_boot draws overall. Replicates may run on a thread
    pool (n_jobs > 1); results are combined in replicate order, so the
    output is identical either way.
    """
    if not 0.0 <= level < 1.0:
        raise ValueError("level must be in [0, 1)")
    point = estimate_ate(t, spec, estimand, n_strata=n_strata)

    budget = 10 * n_boot
    attempts = np.zeros(n_boot, dtype=int)

    def one_replicate(k: int) -> float:
        rng = np.random.default_rng(spec.seed + k + 1)
        while True:
            attempts[k] += 1
            resampled = _resample_rows(rng, t, spec.treatment)
            if resampled is not None:
                return estimate_ate(resampled, spec, estimand, n_strata=n_strata).ate
            if attempts.sum() >= budget:
                raise ResampleExhaustedError(
                    f"gave up after {budget} resampling attempts"
                )

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            effects = list(pool.map(one_replicate, range(n_boot)))
    else:
        effects = [one_replicate(k) for k in range(n_boot)]

    alpha = (1.0 - level) / 2.0
    lower = float(np.percentile(effects, 100.0 * alpha))
    upper = float(np.percentile(effects, 100.0 * (1.0 - alpha)))
    return Estimate(
        ate=point.ate,
        method=point.method,
        n_treated=point.n_treated,
        n_control=point.n_control,
        ci=(lower, upper, level),
    )
