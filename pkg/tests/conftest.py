import numpy as np
import pytest

from causalkit.dataset import AnalysisSpec, EstimatorKind
from causalkit.graph import CausalGraph, Estimand
from causalkit.scm import ScmSpec, ScmVariable, sample_dataset


def linear_scenario_scm() -> ScmSpec:
    """Z ~ N(0,1); T ~ Bernoulli(sigmoid(0.8 Z)); Y = 0.7 T + 1.2 Z + N(0, 0.5).

    The true ATE is the direct weight, 0.7, because Y is linear in T.
    """
    return ScmSpec(
        (
            ScmVariable("Z", "linear", 0.0, (), (), 1.0),
            ScmVariable("T", "logistic-binary", 0.0, ("Z",), (0.8,)),
            ScmVariable("Y", "linear", 0.0, ("T", "Z"), (0.7, 1.2), 0.5),
        )
    )


TRUE_ATE = 0.7


@pytest.fixture(scope="session")
def scenario_table():
    return sample_dataset(linear_scenario_scm(), 5000, 42)


@pytest.fixture
def scenario_estimand():
    return Estimand("T", "Y", ["Z"])


def scenario_spec(estimator=EstimatorKind.PROPENSITY_SCORE_MATCHING, seed=42):
    return AnalysisSpec("T", "Y", ["Z"], estimator, seed)


def random_dag(rng: np.random.Generator, n_nodes: int, p_edge: float = 0.4) -> CausalGraph:
    """A random DAG over letter names; edges only point forward in a random
    node permutation, so acyclicity holds by construction."""
    names = [f"N{i}" for i in range(n_nodes)]
    order = rng.permutation(n_nodes)
    edges = []
    for a in range(n_nodes):
        for b in range(a + 1, n_nodes):
            if rng.uniform() < p_edge:
                edges.append((names[order[a]], names[order[b]]))
    return CausalGraph(names, edges)
