"""Structural causal models with known ground truth.

Variables are declared in topological order; each is either a linear
function of its parents plus Gaussian noise, or a Bernoulli draw with a
logistic link. Because the model is explicit, the true average treatment
effect can be computed by intervening (do-operator) on the same noise
draws, which is the oracle the estimator tests compare against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Table
from .errors import ScmSpecError, UnknownVariableError

LINK_LINEAR = "linear"
LINK_LOGISTIC_BINARY = "logistic-binary"


@dataclass(frozen=True)
class ScmVariable:
    """One structural equation: parents, link, and weights."""

    name: str
    link: str
    intercept: float = 0.0
    parents: tuple[str, ...] = ()
    weights: tuple[float, ...] = ()
    noise_std: float = 0.0  # linear link only; ignored for logistic-binary


@dataclass(frozen=True)
class ScmSpec:
    """A complete model: variables in sampling order."""

    variables: tuple[ScmVariable, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for var in self.variables:
            if var.name in seen:
                raise ScmSpecError(f"variable declared twice: {var.name!r}")
            if var.link not in (LINK_LINEAR, LINK_LOGISTIC_BINARY):
                raise ScmSpecError(f"unknown link {var.link!r} on {var.name!r}")
            if len(var.parents) != len(var.weights):
                raise ScmSpecError(
                    f"{var.name!r}: {len(var.parents)} parents but "
                    f"{len(var.weights)} weights"
                )
            for parent in var.parents:
                if parent not in seen:
                    raise ScmSpecError(
                        f"{var.name!r} references {parent!r} before its declaration"
                    )
            if var.noise_std < 0:
                raise ScmSpecError(f"{var.name!r}: negative noise_std")
            seen.add(var.name)

    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def index_of(self, name: str) -> int:
        for i, var in enumerate(self.variables):
            if var.name == name:
                return i
        raise UnknownVariableError(f"unknown variable: {name!r}")


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _draw_noise(scm: ScmSpec, n: int, rng: np.random.Generator) -> list[np.ndarray]:
    """One exogenous draw per variable: Gaussian noise for linear links,
    uniforms (thresholded later) for logistic-binary links."""
    noise = []
    for var in scm.variables:
        if var.link == LINK_LINEAR:
            noise.append(rng.normal(0.0, var.noise_std, size=n))
        else:
            noise.append(rng.uniform(size=n))
    return noise


def _evaluate(
    scm: ScmSpec,
    noise: list[np.ndarray],
    intervene: dict[str, float] | None = None,
) -> dict[str, np.ndarray]:
    """Ancestral evaluation given fixed exogenous noise; interventions
    overwrite a variable and ignore its own equation."""
    values: dict[str, np.ndarray] = {}
    n = noise[0].shape[0] if noise else 0
    for var, eps in zip(scm.variables, noise):
        if intervene and var.name in intervene:
            values[var.name] = np.full(n, float(intervene[var.name]))
            continue
        eta = var.intercept
        for parent, weight in zip(var.parents, var.weights):
            eta = eta + weight * values[parent]
        if np.isscalar(eta):
            eta = np.full(n, float(eta))
        if var.link == LINK_LINEAR:
            values[var.name] = eta + eps
        else:
            values[var.name] = (eps < _sigmoid(eta)).astype(np.float64)
    return values


def sample_dataset(scm: ScmSpec, n: int, seed: int) -> Table:
    """Draw n rows by ancestral sampling; deterministic given the seed."""
    rng = np.random.default_rng(seed)
    values = _evaluate(scm, _draw_noise(scm, n, rng))
    return Table((name, values[name]) for name in scm.names())


def true_ate_mc(
    scm: ScmSpec,
    treatment: str,
    outcome: str,
    n_mc: int = 1_000_000,
    seed: int = 0,
) -> float:
    """Ground-truth ATE by Monte Carlo over a single exogenous draw.

    The outcome is evaluated under do(treatment=1) and do(treatment=0) on
    the same noise, so the difference is free of between-arm sampling
    variance.
    """
    it = scm.index_of(treatment)
    io = scm.index_of(outcome)
    if it >= io:
        raise ScmSpecError(
            f"treatment {treatment!r} must precede outcome {outcome!r}"
        )
    rng = np.random.default_rng(seed)
    noise = _draw_noise(scm, n_mc, rng)
    y1 = _evaluate(scm, noise, {treatment: 1.0})[outcome]
    y0 = _evaluate(scm, noise, {treatment: 0.0})[outcome]
    return float(np.mean(y1 - y0))


# -- student cohort generator -------------------------------------------------

TREATMENT_THRESHOLD = 6.0  # accumulated regular subjects
OUTCOME_THRESHOLD = 2.0  # years to clear the first-year modules


@dataclass(frozen=True)
class CohortConfig:
    n_students: int = 1343
    seed: int = 42
    confounding_strength: float = 1.0

    def __post_init__(self) -> None:
        if self.n_students < 1:
            raise ValueError("n_students must be >= 1")


def student_cohort_spec(cfg: CohortConfig) -> ScmSpec:
    """The structural model behind the synthetic cohort.

    Three independent confounders drive both a binary treatment (more than
    six accumulated regular subjects) and a continuous outcome (years to
    pass the first-year modules); the direct treatment effect on the
    outcome is 1.0 year. Confounder weights scale with
    cfg.confounding_strength, so strength 0 gives a randomized cohort.
    """
    c = cfg.confounding_strength
    return ScmSpec(
        (
            ScmVariable("Age", LINK_LINEAR, intercept=19.5, noise_std=2.0),
            ScmVariable("AvgGrade", LINK_LINEAR, intercept=6.0, noise_std=1.2),
            ScmVariable("ExamsTaken", LINK_LINEAR, intercept=10.0, noise_std=3.0),
            ScmVariable(
                "MaxRegAcumMayor6",
                LINK_LOGISTIC_BINARY,
                intercept=-(0.25 * 19.5 - 0.9 * 6.0 + 0.12 * 10.0) * c,
                parents=("Age", "AvgGrade", "ExamsTaken"),
                weights=(0.25 * c, -0.9 * c, 0.12 * c),
            ),
            ScmVariable(
                "ApprovalTimeM12",
                LINK_LINEAR,
                intercept=2.0 - (0.07 * 19.5 - 0.25 * 6.0 + 0.035 * 10.0) * c,
                parents=("MaxRegAcumMayor6", "Age", "AvgGrade", "ExamsTaken"),
                weights=(1.0, 0.07 * c, -0.25 * c, 0.035 * c),
                noise_std=0.4,
            ),
        )
    )


def student_cohort_generator(cfg: CohortConfig) -> tuple[Table, ScmSpec]:
    """Synthetic student cohort with the paper-shaped schema.

    Returns the table plus the generating model, so true_ate_mc() gives
    the ground truth for treatment "MaxRegAcumMayor6" on outcome
    "ApprovalTimeM12". The accumulated-subjects count column is drawn
    conditionally on the treatment indicator (above or below six after
    rounding), so re-thresholding it reproduces the indicator exactly.
    """
    scm = student_cohort_spec(cfg)
    rng = np.random.default_rng(cfg.seed)
    values = _evaluate(scm, _draw_noise(scm, cfg.n_students, rng))

    treated = values["MaxRegAcumMayor6"] == 1.0
    # companion count: >6 after rounding iff treated
    latent = np.where(
        treated,
        rng.uniform(6.6, 14.4, size=cfg.n_students),
        rng.uniform(-0.4, 6.4, size=cfg.n_students),
    )
    max_reg = np.maximum(0.0, np.rint(latent))

    approval_time = values["ApprovalTimeM12"]
    table = Table(
        [
            ("Age", values["Age"]),
            ("AvgGrade", values["AvgGrade"]),
            ("ExamsTaken", values["ExamsTaken"]),
            ("MaxRegAcum", max_reg),
            ("ApprovalTimeM12", approval_time),
            ("MaxRegAcumMayor6", (max_reg > TREATMENT_THRESHOLD).astype(np.float64)),
            (
                "ApprovalTimeM12Mayor2",
                (approval_time > OUTCOME_THRESHOLD).astype(np.float64),
            ),
        ]
    )
    return table, scm


# -- text serialization --------------------------------------------------------

def render_scm_spec(scm: ScmSpec) -> str:
    """One line per variable:
    ``name ~ linear(intercept; parent:weight, ...; noise_std)`` or
    ``name ~ logistic-binary(intercept; parent:weight, ...)``."""
    lines = []
    for var in scm.variables:
        parents = ", ".join(
            f"{p}:{w!r}" for p, w in zip(var.parents, var.weights)
        )
        if var.link == LINK_LINEAR:
            lines.append(
                f"{var.name} ~ linear({var.intercept!r}; {parents}; {var.noise_std!r})"
            )
        else:
            lines.append(f"{var.name} ~ logistic-binary({var.intercept!r}; {parents})")
    return "\n".join(lines) + "\n"


def parse_scm_spec(text: str) -> ScmSpec:
    """Inverse of render_scm_spec(); '#' comments and blank lines allowed."""
    variables: list[ScmVariable] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            name, rhs = (part.strip() for part in line.split("~", 1))
            link, args = rhs.split("(", 1)
            link = link.strip()
            args = args.rstrip()
            if not args.endswith(")"):
                raise ValueError("missing closing parenthesis")
            fields = [f.strip() for f in args[:-1].split(";")]
            intercept = float(fields[0])
            parents: list[str] = []
            weights: list[float] = []
            if len(fields) > 1 and fields[1]:
                for item in fields[1].split(","):
                    parent, weight = item.split(":")
                    parents.append(parent.strip())
                    weights.append(float(weight))
            if link == LINK_LINEAR:
                noise_std = float(fields[2]) if len(fields) > 2 else 0.0
            elif link == LINK_LOGISTIC_BINARY:
                if len(fields) > 2:
                    raise ValueError("logistic-binary takes no noise field")
                noise_std = 0.0
            else:
                raise ValueError(f"unknown link {link!r}")
        except (ValueError, IndexError) as exc:
            raise ScmSpecError(f"line {lineno}: {exc}") from None
        variables.append(
            ScmVariable(
                name=name,
                link=link,
                intercept=intercept,
                parents=tuple(parents),
                weights=tuple(weights),
                noise_std=noise_std,
            )
        )
    return ScmSpec(tuple(variables))
