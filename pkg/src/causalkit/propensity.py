"""Logistic propensity model P(T=1 | Z) fit by Newton's method.

The objective is the ridge-penalized log-likelihood
    sum_i [y_i log p_i + (1 - y_i) log(1 - p_i)] - (lam/2) ||beta||^2,
maximized in its 1/n scaling (so gradients and the convergence threshold
are per-observation quantities). The ridge keeps the optimum finite on
separable data while perturbing identifiable fits far below test
tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Table
from .errors import (
    DimensionMismatchError,
    NonBinaryTargetError,
    SingularHessianError,
)

RIDGE_LAMBDA = 1e-8
MAX_ITERATIONS = 100
GRADIENT_TOLERANCE = 1e-10
MAX_STEP_HALVINGS = 20
PROPENSITY_CLAMP = 1e-12


@dataclass(frozen=True)
class LogisticModel:
    """A fitted logistic model: intercept plus one coefficient per covariate."""

    intercept: float
    coefficients: tuple[tuple[str, float], ...]
    converged: bool
    iterations: int
    final_gradient_norm: float
    ll_trace: tuple[float, ...] = ()

    @property
    def covariates(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.coefficients)


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    exp_eta = np.exp(eta[~pos])
    out[~pos] = exp_eta / (1.0 + exp_eta)
    return out


def _design(t: Table, covariates: Sequence[str]) -> np.ndarray:
    cols = [np.ones(t.n_rows)]
    cols.extend(t.column(name) for name in covariates)
    return np.column_stack(cols)


def _check_binary(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all((values == 0.0) | (values == 1.0)):
        raise NonBinaryTargetError(f"{what} must contain only 0 and 1")
    return values


def _penalized_ll(x: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    n = x.shape[0]
    eta = x @ beta
    # log(1 + e^eta) computed stably
    ll = float(np.mean(y * eta - np.logaddexp(0.0, eta)))
    return ll - 0.5 * (RIDGE_LAMBDA / n) * float(beta @ beta)


def _penalized_gradient(x: np.ndarray, y: np.ndarray, beta: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    p = _sigmoid(x @ beta)
    return x.T @ (y - p) / n - (RIDGE_LAMBDA / n) * beta


def logistic_gradient(
    t: Table, target: str, covariates: Sequence[str], beta: Sequence[float]
) -> np.ndarray:
    """Gradient of the penalized mean log-likelihood at beta.

    beta is ordered [intercept, covariates...]. Raises
    DimensionMismatchError when the length disagrees or the table is empty.
    """
    y = _check_binary(t.column(target), f"target column {target!r}")
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (1 + len(covariates),):
        raise DimensionMismatchError(
            f"beta has length {beta.size}, expected {1 + len(covariates)}"
        )
    if t.n_rows == 0:
        raise DimensionMismatchError("table has no rows")
    return _penalized_gradient(_design(t, covariates), y, beta)


def fit_logistic(
    t: Table,
    target: str,
    covariates: Sequence[str] = (),
    *,
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = GRADIENT_TOLERANCE,
) -> LogisticModel:
    """Fit by Newton iterations from a zero start.

    A step is halved (up to MAX_STEP_HALVINGS times) whenever it would
    decrease the penalized log-likelihood, so the recorded ll_trace is
    non-decreasing. Convergence means the gradient's infinity norm dropped
    to `tolerance`.
    """
    y = _check_binary(t.column(target), f"target column {target!r}")
    x = _design(t, covariates)
    n, k = x.shape
    if n < k:
        raise DimensionMismatchError(
            f"{n} rows cannot identify {k} parameters"
        )

    beta = np.zeros(k)
    ll = _penalized_ll(x, y, beta)
    trace = [ll]
    grad = _penalized_gradient(x, y, beta)
    grad_norm = float(np.max(np.abs(grad)))
    iterations = 0
    converged = grad_norm <= tolerance

    while not converged and iterations < max_iterations:
        p = _sigmoid(x @ beta)
        w = p * (1.0 - p)
        hessian = (x.T * w) @ x / n + (RIDGE_LAMBDA / n) * np.eye(k)
        try:
            direction = np.linalg.solve(hessian, grad)
        except np.linalg.LinAlgError:
            raise SingularHessianError(
                "Newton system is singular despite the ridge term; "
                "check for duplicated covariates"
            ) from None

        step = 1.0
        improved = False
        for _ in range(MAX_STEP_HALVINGS + 1):
            candidate = beta + step * direction
            candidate_ll = _penalized_ll(x, y, candidate)
            if candidate_ll >= ll:
                improved = True
                break
            step *= 0.5
        if not improved:
            break  # no ascent direction left at float precision
        beta = candidate
        ll = candidate_ll
        trace.append(ll)
        iterations += 1
        grad = _penalized_gradient(x, y, beta)
        grad_norm = float(np.max(np.abs(grad)))
        converged = grad_norm <= tolerance

    return LogisticModel(
        intercept=float(beta[0]),
        coefficients=tuple((name, float(b)) for name, b in zip(covariates, beta[1:])),
        converged=converged,
        iterations=iterations,
        final_gradient_norm=grad_norm,
        ll_trace=tuple(trace),
    )


def predict_propensity(model: LogisticModel, t: Table) -> np.ndarray:
    """Per-row P(T=1 | covariates), clamped into (0, 1).

    The clamp to [PROPENSITY_CLAMP, 1 - PROPENSITY_CLAMP] avoids degenerate
    matching distances from saturated scores.
    """
    eta = np.full(t.n_rows, model.intercept)
    for name, coef in model.coefficients:
        eta = eta + coef * t.column(name)
    return np.clip(_sigmoid(eta), PROPENSITY_CLAMP, 1.0 - PROPENSITY_CLAMP)
