"""Weight fitting: negative log-likelihood, analytic gradient, L-BFGS.

The dataset is compiled once into per-path score matrices so that repeated
objective evaluations are plain dense algebra.  Paths covered only by the
persistence default contribute a weight-independent constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .law_lang import LawDef
from .mixture import (
    MISSING, build_predictions, candidate_domain, extract_observables,
    make_model, uniform_weights,
)
from .state_core import WorldState

DEFAULT_MAX_ITER = 200
DEFAULT_GRAD_TOL = 1e-6
DEFAULT_HISTORY = 10
ARMIJO_C1 = 1e-4
BACKTRACK_FACTOR = 0.5
MAX_BACKTRACKS = 30
CURVATURE_FLOOR = 1e-10

Transition = tuple[WorldState, str, WorldState]


# ---------------------------------------------------------------------------
# Dataset compilation.

@dataclass(frozen=True)
class PathCase:
    law_indices: np.ndarray
    log_phi: np.ndarray
    truth_col: int


@dataclass(frozen=True)
class CompiledDataset:
    law_names: tuple[str, ...]
    cases: tuple[PathCase, ...]
    persistence_log_prob: float
    activation_counts: dict[str, int]
    prediction_counts: dict[str, int]
    skipped_counts: dict[str, int]
    transition_count: int

    @property
    def size(self) -> int:
        return len(self.law_names)


def compile_dataset(library, transitions: list[Transition],
                    epsilon: float | None = None,
                    delta: float | None = None) -> CompiledDataset:
    kwargs = {}
    if epsilon is not None:
        kwargs["epsilon"] = epsilon
    if delta is not None:
        kwargs["delta"] = delta
    probe = make_model(library, **kwargs)
    names = tuple(law.name for law in probe.library)
    index = {name: i for i, name in enumerate(names)}
    activation = dict.fromkeys(names, 0)
    predictions = dict.fromkeys(names, 0)
    skipped = dict.fromkeys(names, 0)
    log_stay = math.log(1.0 - probe.delta)
    log_jump = math.log(probe.delta)
    persistence = 0.0
    cases: list[PathCase] = []
    for state, action, next_state in transitions:
        cur = extract_observables(state)
        nxt = extract_observables(next_state)
        table = build_predictions(probe, state, action)
        for name in table.active:
            activation[name] += 1
        for name in table.skipped:
            skipped[name] += 1
        for path, value in nxt.items():
            predictors = table.paths.get(path)
            current = cur.get(path, MISSING)
            if not predictors:
                same = current is not MISSING and (
                    type(current) is type(value) and current == value)
                persistence += log_stay if same else log_jump
                continue
            domain = candidate_domain(predictors, current, value)
            truth_col = next(
                i for i, v in enumerate(domain)
                if type(v) is type(value) and v == value)
            off = math.log(probe.epsilon / len(domain))
            rows = []
            idx = []
            for name, support in predictors.items():
                on = math.log((1.0 - probe.epsilon) / len(support))
                rows.append([
                    on if any(type(u) is type(v) and u == v for u in support)
                    else off
                    for v in domain])
                idx.append(index[name])
                predictions[name] += 1
            cases.append(PathCase(
                law_indices=np.asarray(idx, dtype=np.intp),
                log_phi=np.asarray(rows, dtype=np.float64),
                truth_col=truth_col,
            ))
    return CompiledDataset(
        law_names=names,
        cases=tuple(cases),
        persistence_log_prob=persistence,
        activation_counts=activation,
        prediction_counts=predictions,
        skipped_counts=skipped,
        transition_count=len(transitions),
    )


def nll_and_grad(compiled: CompiledDataset,
                 theta: np.ndarray) -> tuple[float, np.ndarray]:
    """Dataset negative log-likelihood and its gradient in the weights.

    Per path the gradient of the loss is the expected per-law log score
    under the model minus the score at the observed value; laws never
    active over the dataset receive an exact 0.0 component.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (len(compiled.law_names),):
        raise ValueError(
            f"theta has shape {theta.shape}, expected "
            f"({len(compiled.law_names)},)")
    nll = -compiled.persistence_log_prob
    grad = np.zeros_like(theta)
    for case in compiled.cases:
        scores = theta[case.law_indices] @ case.log_phi
        top = scores.max()
        shifted = np.exp(scores - top)
        z = shifted.sum()
        nll += (top + math.log(z)) - scores[case.truth_col]
        p = shifted / z
        grad[case.law_indices] += case.log_phi @ p \
            - case.log_phi[:, case.truth_col]
    return float(nll), grad


# ---------------------------------------------------------------------------
# L-BFGS with Armijo backtracking.

@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    reason: str
    trace: tuple[float, ...]


def _two_loop(grad, s_list, y_list, rho_list):
    q = grad.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_list), reversed(y_list),
                         reversed(rho_list)):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        gamma = float(s @ y) / float(y @ y)
        q *= gamma
    for (s, y, rho), a in zip(zip(s_list, y_list, rho_list),
                              reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return q


def lbfgs_minimize(objective, x0, *, max_iter: int = DEFAULT_MAX_ITER,
                   grad_tol: float = DEFAULT_GRAD_TOL,
                   history: int = DEFAULT_HISTORY) -> MinimizeResult:
    """Minimizes a smooth objective given (value, gradient) callbacks.

    Every accepted step satisfies the Armijo sufficient-decrease test, so
    the value trace is strictly decreasing.  Non-finite trial points are
    treated as failed steps and backtracked past; if no acceptable step
    remains the last good iterate is returned with a line-search-failure
    reason.
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    f, g = objective(x)
    g = np.asarray(g, dtype=np.float64).copy()
    if not (math.isfinite(f) and np.all(np.isfinite(g))):
        raise ValueError("objective is not finite at the starting point")
    trace = [f]
    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    rho_list: list[float] = []
    steps = 0
    reason = "max-iter"
    while steps < max_iter:
        if float(np.max(np.abs(g))) <= grad_tol:
            reason = "gradient-tol"
            break
        d = -_two_loop(g, s_list, y_list, rho_list)
        descent = float(d @ g)
        if not np.all(np.isfinite(d)) or descent >= 0.0:
            d = -g
            descent = float(d @ g)
        step = 1.0
        accepted = False
        for _ in range(MAX_BACKTRACKS + 1):
            x_new = x + step * d
            f_new, g_new = objective(x_new)
            g_new = np.asarray(g_new, dtype=np.float64)
            if (math.isfinite(f_new) and np.all(np.isfinite(g_new))
                    and f_new <= f + ARMIJO_C1 * step * descent):
                accepted = True
                break
            step *= BACKTRACK_FACTOR
        if not accepted:
            reason = "line-search-failure"
            break
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > CURVATURE_FLOOR:
            s_list.append(s)
            y_list.append(y)
            rho_list.append(1.0 / sy)
            if len(s_list) > history:
                s_list.pop(0)
                y_list.pop(0)
                rho_list.pop(0)
        else:
            # a non-positive-curvature pair means the stored model is
            # stale; restart the memory rather than loop on it
            s_list.clear()
            y_list.clear()
            rho_list.clear()
        x, f, g = x_new, f_new, g_new.copy()
        trace.append(f)
        steps += 1
    if reason == "max-iter" and float(np.max(np.abs(g))) <= grad_tol:
        reason = "gradient-tol"
    return MinimizeResult(x=x, fun=f, grad=g, iterations=steps,
                          reason=reason, trace=tuple(trace))


# ---------------------------------------------------------------------------
# Fitting.

@dataclass(frozen=True)
class FitResult:
    weights: dict[str, float]
    nll_initial: float
    nll_final: float
    iterations: int
    reason: str
    nll_trace: tuple[float, ...]
    activation_counts: dict[str, int]
    prediction_counts: dict[str, int]
    skipped_counts: dict[str, int]
    transition_count: int

    def to_json(self) -> dict:
        return {
            "weights": dict(self.weights),
            "nll_initial": self.nll_initial,
            "nll_final": self.nll_final,
            "iterations": self.iterations,
            "reason": self.reason,
            "nll_trace": list(self.nll_trace),
            "activation_counts": dict(self.activation_counts),
            "prediction_counts": dict(self.prediction_counts),
            "skipped_counts": dict(self.skipped_counts),
            "transition_count": self.transition_count,
        }


def fit_weights(library, transitions: list[Transition], *,
                epsilon: float | None = None, delta: float | None = None,
                l2: float = 0.0, max_iter: int = DEFAULT_MAX_ITER,
                grad_tol: float = DEFAULT_GRAD_TOL,
                initial: float = 1.0) -> FitResult:
    compiled = compile_dataset(library, transitions, epsilon, delta)

    if l2 > 0.0:
        def objective(theta):
            value, grad = nll_and_grad(compiled, theta)
            return value + 0.5 * l2 * float(theta @ theta), \
                grad + l2 * theta
    else:
        def objective(theta):
            return nll_and_grad(compiled, theta)

    x0 = np.full(compiled.size, float(initial))
    result = lbfgs_minimize(objective, x0, max_iter=max_iter,
                            grad_tol=grad_tol)
    weights = {name: float(v)
               for name, v in zip(compiled.law_names, result.x)}
    return FitResult(
        weights=weights,
        nll_initial=result.trace[0],
        nll_final=result.fun,
        iterations=result.iterations,
        reason=result.reason,
        nll_trace=result.trace,
        activation_counts=compiled.activation_counts,
        prediction_counts=compiled.prediction_counts,
        skipped_counts=compiled.skipped_counts,
        transition_count=compiled.transition_count,
    )


__all__ = [
    "CompiledDataset", "FitResult", "MinimizeResult", "PathCase",
    "compile_dataset", "fit_weights", "lbfgs_minimize", "nll_and_grad",
]
