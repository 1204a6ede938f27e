"""Refutation procedures that stress-test a causal estimate.

Each refuter perturbs the data (or the adjustment set), re-estimates the
effect once per replicate, and reports the replicate mean together with a
two-sided normal-approximation p-value against a method-specific
reference: zero for the placebo test (the effect should vanish), the
original estimate otherwise (the effect should not move).
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dataset import AnalysisSpec, Table
from .errors import DegenerateSubsetError, EmptyReplicatesError
from .estimators import DEFAULT_N_STRATA, estimate_ate
from .graph import Estimand

DEGENERATE_EPS = 1e-12
MAX_REDRAWS = 10


class RefuterKind(str, enum.Enum):
    RANDOM_COMMON_CAUSE = "random_common_cause"
    PLACEBO_TREATMENT = "placebo_treatment"
    DATA_SUBSET = "data_subset"
    BOOTSTRAP_SAMPLE = "bootstrap_sample"


@dataclass(frozen=True)
class RefutationResult:
    method: RefuterKind
    estimated_effect: float
    new_effect: float
    p_value: float
    n_simulations: int
    replicate_effects: tuple[float, ...]


def refutation_p_value(replicates: Sequence[float], reference: float) -> float:
    """Two-sided p-value for `reference` against the replicate distribution.

    Degenerate spread (sample std below 1e-12, or a single replicate)
    gives exactly 1.0 when the mean equals the reference and 0.0 otherwise;
    this reproduces the constant-replicate case. Otherwise
    p = 2 * (1 - Phi(|z|)) with z = (reference - mean) / std, evaluated
    through the complementary error function.
    """
    if len(replicates) == 0:
        raise EmptyReplicatesError("no replicate effects to compare against")
    values = np.asarray(replicates, dtype=np.float64)
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    if std < DEGENERATE_EPS:
        return 1.0 if abs(mean - reference) < DEGENERATE_EPS else 0.0
    z = (reference - mean) / std
    return math.erfc(abs(z) / math.sqrt(2.0))


def _unused_column_name(t: Table, base: str) -> str:
    name = base
    suffix = 1
    while name in t:
        name = f"{base}_{suffix}"
        suffix += 1
    return name


def _run_replicates(
    replicate: Callable[[int], float],
    n_sims: int,
    n_jobs: int,
) -> list[float]:
    """Evaluate replicates 0..n_sims-1, optionally on a thread pool.

    Results are gathered in replicate order either way, so the output does
    not depend on scheduling.
    """
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(replicate, range(n_sims)))
    return [replicate(k) for k in range(n_sims)]


def _result(
    method: RefuterKind,
    original: float,
    effects: Sequence[float],
    reference: float,
) -> RefutationResult:
    effects = [float(e) for e in effects]
    return RefutationResult(
        method=method,
        estimated_effect=original,
        new_effect=float(np.mean(effects)),
        p_value=refutation_p_value(effects, reference),
        n_simulations=len(effects),
        replicate_effects=tuple(effects),
    )


def refute_random_common_cause(
    t: Table,
    spec: AnalysisSpec,
    estimand: Estimand,
    n_sims: int = 100,
    n_jobs: int = 1,
    n_strata: int = DEFAULT_N_STRATA,
) -> RefutationResult:
    """Add a fresh standard-normal covariate to the adjustment set and
    re-estimate. A trustworthy estimate should barely move."""
    original = estimate_ate(t, spec, estimand, n_strata=n_strata).ate
    extra = _unused_column_name(t, "random_common_cause")
    augmented = Estimand(
        treatment=estimand.treatment,
        outcome=estimand.outcome,
        adjustment_set=list(estimand.adjustment_set) + [extra],
        assumption_text=estimand.assumption_text,
    )

    def replicate(k: int) -> float:
        rng = np.random.default_rng(spec.seed + k + 1)
        noisy = t.with_column(extra, rng.standard_normal(t.n_rows))
        return estimate_ate(noisy, spec, augmented, n_strata=n_strata).ate

    effects = _run_replicates(replicate, n_sims, n_jobs)
    return _result(RefuterKind.RANDOM_COMMON_CAUSE, original, effects, original)


def refute_placebo_treatment(
    t: Table,
    spec: AnalysisSpec,
    estimand: Estimand,
    n_sims: int = 100,
    n_jobs: int = 1,
    n_strata: int = DEFAULT_N_STRATA,
) -> RefutationResult:
    """Permute the treatment column and re-estimate. The permutation keeps
    the marginal treatment rate but severs any causal link, so the
    replicate effects should collapse to zero."""
    original = estimate_ate(t, spec, estimand, n_strata=n_strata).ate
    treatment_values = t.column(spec.treatment)

    def replicate(k: int) -> float:
        rng = np.random.default_rng(spec.seed + k + 1)
        shuffled = treatment_values[rng.permutation(t.n_rows)]
        placebo = t.replace_column(spec.treatment, shuffled)
        return estimate_ate(placebo, spec, estimand, n_strata=n_strata).ate

    effects = _run_replicates(replicate, n_sims, n_jobs)
    return _result(RefuterKind.PLACEBO_TREATMENT, original, effects, 0.0)


def refute_data_subset(
    t: Table,
    spec: AnalysisSpec,
    estimand: Estimand,
    fraction: float = 0.8,
    n_sims: int = 100,
    n_jobs: int = 1,
    n_strata: int = DEFAULT_N_STRATA,
) -> RefutationResult:
    """Re-estimate on row subsets of the given fraction (drawn without
    replacement). Stable estimates vary little across subsets."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    original = estimate_ate(t, spec, estimand, n_strata=n_strata).ate
    size = int(fraction * t.n_rows)
    treatment_values = t.column(spec.treatment)

    def replicate(k: int) -> float:
        rng = np.random.default_rng(spec.seed + k + 1)
        for _ in range(MAX_REDRAWS):
            rows = np.sort(rng.choice(t.n_rows, size=size, replace=False))
            drawn = treatment_values[rows]
            if drawn.size and not np.all(drawn == drawn[0]):
                return estimate_ate(t.take(rows), spec, estimand, n_strata=n_strata).ate
        raise DegenerateSubsetError(
            f"subset of {size} rows kept losing a treatment arm"
        )

    effects = _run_replicates(replicate, n_sims, n_jobs)
    return _result(RefuterKind.DATA_SUBSET, original, effects, original)


def refute_bootstrap(
    t: Table,
    spec: AnalysisSpec,
    estimand: Estimand,
    n_sims: int = 100,
    n_jobs: int = 1,
    n_strata: int = DEFAULT_N_STRATA,
) -> RefutationResult:
    """Re-estimate on full-size resamples drawn with replacement."""
    original = estimate_ate(t, spec, estimand, n_strata=n_strata).ate
    treatment_values = t.column(spec.treatment)

    def replicate(k: int) -> float:
        rng = np.random.default_rng(spec.seed + k + 1)
        for _ in range(MAX_REDRAWS):
            rows = rng.integers(0, t.n_rows, size=t.n_rows)
            drawn = treatment_values[rows]
            if not np.all(drawn == drawn[0]):
                return estimate_ate(t.take(rows), spec, estimand, n_strata=n_strata).ate
        raise DegenerateSubsetError("bootstrap resamples kept losing a treatment arm")

    effects = _run_replicates(replicate, n_sims, n_jobs)
    return _result(RefuterKind.BOOTSTRAP_SAMPLE, original, effects, original)


_REFUTERS = {
    RefuterKind.RANDOM_COMMON_CAUSE: refute_random_common_cause,
    RefuterKind.PLACEBO_TREATMENT: refute_placebo_treatment,
    RefuterKind.DATA_SUBSET: refute_data_subset,
    RefuterKind.BOOTSTRAP_SAMPLE: refute_bootstrap,
}


def run_refuter(
    kind: RefuterKind | str,
    t: Table,
    spec: AnalysisSpec,
    estimand: Estimand,
    n_sims: int = 100,
    fraction: float = 0.8,
    n_jobs: int = 1,
    n_strata: int = DEFAULT_N_STRATA,
) -> RefutationResult:
    """Dispatch by refuter name."""
    kind = RefuterKind(kind)
    if kind is RefuterKind.DATA_SUBSET:
        return refute_data_subset(
            t, spec, estimand, fraction=fraction, n_sims=n_sims,
            n_jobs=n_jobs, n_strata=n_strata,
        )
    return _REFUTERS[kind](
        t, spec, estimand, n_sims=n_sims, n_jobs=n_jobs, n_strata=n_strata
    )
