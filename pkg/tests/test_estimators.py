import numpy as np
import pytest

from causalkit.dataset import AnalysisSpec, EstimatorKind, Table
from causalkit.errors import (
    AllStrataDroppedError,
    EmptyTreatmentArmError,
    NonBinaryVariableError,
    RankDeficientDesignError,
)
from causalkit.estimators import (
    bootstrap_ci,
    distance_matching_ate,
    estimate_ate,
    linear_regression_ate,
    psm_ate,
    stratification_ate,
)
from causalkit.graph import Estimand

from conftest import TRUE_ATE, scenario_spec

ALL_ESTIMATORS = [
    psm_ate,
    distance_matching_ate,
    stratification_ate,
    linear_regression_ate,
]


def simple_table(rng, n=400, effect=1.0):
    z = rng.normal(size=n)
    t = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-z))).astype(float)
    y = effect * t + 0.8 * z + rng.normal(scale=0.3, size=n)
    return Table([("Z", z), ("T", t), ("Y", y)])


# -- matching on trivial data ---------------------------------------------------

def test_psm_outcome_equals_treatment():
    rng = np.random.default_rng(1)
    z = rng.normal(size=60)
    t = (rng.uniform(size=60) < 0.5).astype(float)
    table = Table([("Z", z), ("T", t), ("Y", t.copy())])
    est = psm_ate(table, scenario_spec(), Estimand("T", "Y", ["Z"]))
    assert est.ate == 1.0  # every matched difference is exactly one
    assert est.n_treated + est.n_control == 60
    assert est.target_units == "ate"


def test_psm_constant_outcome():
    rng = np.random.default_rng(2)
    z = rng.normal(size=50)
    t = (rng.uniform(size=50) < 0.5).astype(float)
    table = Table([("Z", z), ("T", t), ("Y", np.full(50, 3.25))])
    assert psm_ate(table, scenario_spec(), Estimand("T", "Y", ["Z"])).ate == 0.0


def test_psm_recovers_scenario_ate(scenario_table, scenario_estimand):
    est = psm_ate(scenario_table, scenario_spec(), scenario_estimand)
    assert est.ate == pytest.approx(TRUE_ATE, abs=0.07)


def test_distance_matching_hand_example():
    # exhaustive 1-NN matching done by hand:
    #   treated (Z=0,Y=3) ~ control (Z=0,Y=1); treated (Z=1,Y=5) ~ control (Z=1,Y=4)
    #   ATT = ((3-1) + (5-4)) / 2 = 1.5, symmetric pairs give ATC = 1.5
    table = Table(
        [
            ("Z", [0.0, 1.0, 0.0, 1.0]),
            ("T", [1.0, 1.0, 0.0, 0.0]),
            ("Y", [3.0, 5.0, 1.0, 4.0]),
        ]
    )
    est = distance_matching_ate(table, scenario_spec(), Estimand("T", "Y", ["Z"]))
    assert est.ate == 1.5


def test_distance_matching_duplicate_rows_zero_effect():
    table = Table(
        [
            ("Z", [0.3, 1.4, 0.3, 1.4]),
            ("T", [1.0, 1.0, 0.0, 0.0]),
            ("Y", [2.0, 7.0, 2.0, 7.0]),
        ]
    )
    assert distance_matching_ate(table, scenario_spec(), Estimand("T", "Y", ["Z"])).ate == 0.0


def test_distance_matching_recovers_scenario_ate(scenario_table, scenario_estimand):
    est = distance_matching_ate(scenario_table, scenario_spec(), scenario_estimand)
    assert est.ate == pytest.approx(TRUE_ATE, abs=0.08)


def test_matching_estimators_agree_on_single_binary_confounder():
    rng = np.random.default_rng(33)
    n = 200
    z = (rng.uniform(size=n) < 0.5).astype(float)
    t = (rng.uniform(size=n) < 0.3 + 0.4 * z).astype(float)
    y = 2.0 * t + z + rng.normal(size=n)
    # both arms present at both z levels
    for zv in (0.0, 1.0):
        for tv in (0.0, 1.0):
            assert np.any((z == zv) & (t == tv))
    table = Table([("Z", z), ("T", t), ("Y", y)])
    estimand = Estimand("T", "Y", ["Z"])
    a = psm_ate(table, scenario_spec(), estimand).ate
    b = distance_matching_ate(table, scenario_spec(), estimand).ate
    assert a == b


# -- stratification -------------------------------------------------------------

def test_stratification_single_stratum_is_difference_in_means():
    rng = np.random.default_rng(4)
    table = simple_table(rng)
    est = stratification_ate(table, scenario_spec(), Estimand("T", "Y", ["Z"]), n_strata=1)
    y, t = table.column("Y"), table.column("T")
    naive = y[t == 1.0].mean() - y[t == 0.0].mean()
    assert est.ate == pytest.approx(naive, abs=1e-12)


def test_stratification_constant_within_stratum_effect():
    # two covariate cells, each balanced, with the same effect delta=2
    z = np.array([0.0] * 10 + [1.0] * 10)
    t = np.array(([0.0] * 5 + [1.0] * 5) * 2)
    y = 2.0 * t + 3.0 * z
    table = Table([("Z", z), ("T", t), ("Y", y)])
    est = stratification_ate(table, scenario_spec(), Estimand("T", "Y", ["Z"]), n_strata=2)
    assert est.ate == pytest.approx(2.0, abs=1e-12)


def test_stratification_recovers_scenario_ate(scenario_table, scenario_estimand):
    est = stratification_ate(scenario_table, scenario_spec(), scenario_estimand)
    assert est.ate == pytest.approx(TRUE_ATE, abs=0.08)


def test_stratification_all_strata_dropped():
    # propensity orders rows by Z; T is a step function of Z, so every
    # stratum that the cuts produce is single-arm
    z = np.linspace(-2, 2, 12)
    t = (z > 0).astype(float)
    y = np.ones(12)
    table = Table([("Z", z), ("T", t), ("Y", y)])
    with pytest.raises(AllStrataDroppedError):
        stratification_ate(table, scenario_spec(), Estimand("T", "Y", ["Z"]), n_strata=6)


def test_empty_arm_raises():
    table = Table([("Z", [0.1, 0.2]), ("T", [1.0, 1.0]), ("Y", [1.0, 2.0])])
    for fn in ALL_ESTIMATORS:
        with pytest.raises(EmptyTreatmentArmError):
            fn(table, scenario_spec(), Estimand("T", "Y", ["Z"]))


def test_non_binary_treatment_raises():
    table = Table([("Z", [0.1, 0.2]), ("T", [0.0, 2.0]), ("Y", [1.0, 2.0])])
    for fn in ALL_ESTIMATORS:
        with pytest.raises(NonBinaryVariableError):
            fn(table, scenario_spec(), Estimand("T", "Y", ["Z"]))


# -- linear regression -----------------------------------------------------------

def test_linear_regression_exact_noiseless():
    rng = np.random.default_rng(6)
    n = 80
    z = rng.normal(size=n)
    t = (rng.uniform(size=n) < 0.5).astype(float)
    y = 2.0 * t + 1.0 * z
    table = Table([("Z", z), ("T", t), ("Y", y)])
    est = linear_regression_ate(table, scenario_spec(), Estimand("T", "Y", ["Z"]))
    assert est.ate == pytest.approx(2.0, abs=1e-10)


def test_linear_regression_constant_outcome():
    rng = np.random.default_rng(7)
    n = 40
    z = rng.normal(size=n)
    t = (rng.uniform(size=n) < 0.5).astype(float)
    table = Table([("Z", z), ("T", t), ("Y", np.full(n, 5.0))])
    est = linear_regression_ate(table, scenario_spec(), Estimand("T", "Y", ["Z"]))
    assert est.ate == pytest.approx(0.0, abs=1e-10)


def test_linear_regression_matches_normal_equations_oracle():
    rng = np.random.default_rng(8)
    for _ in range(10):
        n = 150
        z1 = rng.normal(size=n)
        z2 = rng.normal(size=n)
        t = (rng.uniform(size=n) < 0.5).astype(float)
        y = 1.3 * t - 0.7 * z1 + 0.2 * z2 + rng.normal(size=n)
        table = Table([("Z1", z1), ("Z2", z2), ("T", t), ("Y", y)])
        spec = AnalysisSpec("T", "Y", ["Z1", "Z2"], EstimatorKind.LINEAR_REGRESSION, 0)
        est = linear_regression_ate(table, spec, Estimand("T", "Y", ["Z1", "Z2"]))
        x = np.column_stack([np.ones(n), t, z1, z2])
        oracle = np.linalg.solve(x.T @ x, x.T @ y)
        assert est.ate == pytest.approx(oracle[1], abs=1e-8)


def test_linear_regression_rank_deficient():
    z = np.array([1.0, 2.0, 3.0, 4.0])
    t = np.array([0.0, 1.0, 0.0, 1.0])
    table = Table([("Z", z), ("Z2", 2 * z), ("T", t), ("Y", z)])
    spec = AnalysisSpec("T", "Y", ["Z", "Z2"], EstimatorKind.LINEAR_REGRESSION, 0)
    with pytest.raises(RankDeficientDesignError):
        linear_regression_ate(table, spec, Estimand("T", "Y", ["Z", "Z2"]))


def test_scenario_linear_regression_tight(scenario_table, scenario_estimand):
    est = linear_regression_ate(scenario_table, scenario_spec(), scenario_estimand)
    assert est.ate == pytest.approx(TRUE_ATE, abs=0.03)


# -- shared invariants -----------------------------------------------------------

def test_outcome_shift_invariance():
    rng = np.random.default_rng(9)
    table = simple_table(rng, n=300)
    shifted = table.replace_column("Y", table.column("Y") + 13.7)
    estimand = Estimand("T", "Y", ["Z"])
    for fn in ALL_ESTIMATORS:
        a = fn(table, scenario_spec(), estimand).ate
        b = fn(shifted, scenario_spec(), estimand).ate
        assert abs(a - b) <= 1e-9


def test_outcome_scale_equivariance():
    rng = np.random.default_rng(10)
    table = simple_table(rng, n=300)
    k = -2.5
    scaled = table.replace_column("Y", k * table.column("Y"))
    estimand = Estimand("T", "Y", ["Z"])
    for fn in ALL_ESTIMATORS:
        a = fn(table, scenario_spec(), estimand).ate
        b = fn(scaled, scenario_spec(), estimand).ate
        assert abs(b - k * a) <= 1e-9 * max(1.0, abs(k * a))


def test_estimates_are_deterministic(scenario_table, scenario_estimand):
    for kind in EstimatorKind:
        spec = scenario_spec(kind)
        a = estimate_ate(scenario_table, spec, scenario_estimand)
        b = estimate_ate(scenario_table, spec, scenario_estimand)
        assert a == b  # bit-identical dataclasses


# -- bootstrap CI -----------------------------------------------------------------

def test_bootstrap_degenerate_zero_width_ci():
    rng = np.random.default_rng(12)
    z = rng.normal(size=40)
    t = (rng.uniform(size=40) < 0.5).astype(float)
    table = Table([("Z", z), ("T", t), ("Y", t.copy())])
    est = bootstrap_ci(table, scenario_spec(), Estimand("T", "Y", ["Z"]), n_boot=50)
    lower, upper, level = est.ci
    assert lower == upper == 1.0 and level == 0.95


def test_bootstrap_level_zero_is_median():
    rng = np.random.default_rng(13)
    table = simple_table(rng, n=200)
    estimand = Estimand("T", "Y", ["Z"])
    spec = scenario_spec(EstimatorKind.LINEAR_REGRESSION)
    est = bootstrap_ci(table, spec, estimand, n_boot=30, level=0.0)
    # recompute the replicate effects with the same seeds as the oracle
    effects = []
    for k in range(30):
        rng_k = np.random.default_rng(spec.seed + k + 1)
        idx = rng_k.integers(0, table.n_rows, size=table.n_rows)
        effects.append(
            linear_regression_ate(table.take(idx), spec, estimand).ate
        )
    median = float(np.percentile(effects, 50.0))
    lower, upper, _ = est.ci
    assert lower == upper == median


def test_bootstrap_ci_brackets_scenario_ate(scenario_table, scenario_estimand):
    spec = scenario_spec(EstimatorKind.LINEAR_REGRESSION)
    est = bootstrap_ci(scenario_table, spec, scenario_estimand, n_boot=200)
    lower, upper, _ = est.ci
    assert lower <= TRUE_ATE <= upper
    assert lower <= upper


def test_bootstrap_parallel_matches_serial(scenario_table, scenario_estimand):
    spec = scenario_spec(EstimatorKind.LINEAR_REGRESSION)
    a = bootstrap_ci(scenario_table, spec, scenario_estimand, n_boot=40, n_jobs=1)
    b = bootstrap_ci(scenario_table, spec, scenario_estimand, n_boot=40, n_jobs=4)
    assert a == b


def test_bootstrap_coverage_repeated_runs():
    # repeated-simulation coverage: fresh scenario draw + fresh bootstrap
    # per run; the 95% CI should contain the true effect in >= 90 of 100
    from causalkit.scm import sample_dataset
    from conftest import linear_scenario_scm

    scm = linear_scenario_scm()
    hits = 0
    runs = 100
    for run in range(runs):
        table = sample_dataset(scm, 400, seed=1000 + run)
        spec = AnalysisSpec("T", "Y", ["Z"], EstimatorKind.LINEAR_REGRESSION, seed=run)
        est = bootstrap_ci(table, spec, Estimand("T", "Y", ["Z"]), n_boot=200)
        lower, upper, _ = est.ci
        if lower <= TRUE_ATE <= upper:
            hits += 1
    assert hits >= 90
