"""Product-of-experts world model over canonical-document observables.

Each active law contributes a smoothed per-path distribution; combined
scores are the weight-scaled sum of per-law log scores, normalized with a
log-softmax over a finite candidate domain.  Paths no active law predicts
fall back to a near-delta persistence default.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .law_lang import LawDef, LawEvalError, eval_effect, eval_precondition
from .state_core import (
    WorldState, canonicalize, from_canonical, states_equal, validate_state,
)

Primitive = int | float | bool | str

DEFAULT_EPSILON = 1e-3
DEFAULT_DELTA = 1e-6

# Marks a path that does not exist in the current state (entity births).
MISSING = object()


class SchemaMismatchError(ValueError):
    """States disagree on document structure where they must not."""

    def __init__(self, paths: list[str]):
        self.paths = paths
        shown = ", ".join(paths[:6]) + ("..." if len(paths) > 6 else "")
        super().__init__(f"document schema mismatch at: {shown}")


class ReconstructionError(ValueError):
    """A sampled document violated state invariants.

    Carries the offending state so callers can decide: evaluation scores it
    as-is, planning resamples once and then accepts.
    """

    def __init__(self, state: WorldState, violations: list[str]):
        self.state = state
        self.violations = violations
        super().__init__("reconstructed state violates invariants: "
                         + "; ".join(violations[:4]))


@dataclass(frozen=True)
class WorldModel:
    library: tuple[LawDef, ...]
    weights: dict[str, float]
    epsilon: float = DEFAULT_EPSILON
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 0.1:
            raise ValueError(f"epsilon {self.epsilon} outside (0, 0.1]")
        if not 0.0 < self.delta <= 1e-3:
            raise ValueError(f"delta {self.delta} outside (0, 1e-3]")
        names = {law.name for law in self.library}
        missing = names - self.weights.keys()
        extra = self.weights.keys() - names
        if missing or extra:
            raise ValueError(
                f"weights do not match library (missing {sorted(missing)}, "
                f"extra {sorted(extra)})")
        for name, value in self.weights.items():
            if not math.isfinite(value):
                raise ValueError(f"weight for {name!r} is not finite")


def uniform_weights(library: list[LawDef] | tuple[LawDef, ...],
                    value: float = 1.0) -> dict[str, float]:
    return {law.name: value for law in library}


def make_model(library, weights=None, epsilon=DEFAULT_EPSILON,
               delta=DEFAULT_DELTA) -> WorldModel:
    lib = tuple(library)
    if weights is None:
        weights = uniform_weights(lib)
    return WorldModel(lib, dict(weights), epsilon, delta)


# ---------------------------------------------------------------------------
# Observables.

def _flatten(node, prefix: str, out: dict[str, Primitive]) -> None:
    if isinstance(node, dict):
        for key, value in node.items():
            _flatten(value, f"{prefix}{key}/", out)
    elif isinstance(node, list):
        for idx, value in enumerate(node):
            _flatten(value, f"{prefix}{idx}/", out)
    else:
        out[prefix[:-1]] = node


def extract_observables(state: WorldState) -> dict[str, Primitive]:
    """Flattens the canonical document into path -> primitive leaf.

    Empty containers have no primitive leaves, so they contribute nothing.
    """
    out: dict[str, Primitive] = {}
    _flatten(canonicalize(state), "", out)
    return out


# ---------------------------------------------------------------------------
# Active-law routing.

@dataclass(frozen=True)
class PredictionTable:
    active: tuple[str, ...]
    paths: dict[str, dict[str, tuple[Primitive, ...]]]
    skipped: tuple[str, ...] = ()


def build_predictions(model: WorldModel, state: WorldState,
                      action: str) -> PredictionTable:
    active: list[str] = []
    skipped: list[str] = []
    paths: dict[str, dict[str, tuple[Primitive, ...]]] = {}
    for law in model.library:
        if not eval_precondition(law, state, action):
            continue
        try:
            effect = eval_effect(law, state, action)
        except LawEvalError:
            # A law whose writes collide on this state steps aside for the
            # transition instead of poisoning the whole model.
            skipped.append(law.name)
            continue
        active.append(law.name)
        for path, support in effect.items():
            paths.setdefault(path, {})[law.name] = support
    return PredictionTable(tuple(active), paths, tuple(skipped))


# ---------------------------------------------------------------------------
# Scoring.

def _same_value(a: Primitive, b: Primitive) -> bool:
    # Canonical JSON tells 5 from 5.0 and true from 1, and so does scoring.
    return type(a) is type(b) and a == b


def _in_domain(domain: list[Primitive], value: Primitive) -> bool:
    return any(_same_value(v, value) for v in domain)


def candidate_domain(predictors: dict[str, tuple[Primitive, ...]],
                     current: Primitive,
                     value: Primitive = MISSING) -> list[Primitive]:
    """Union of predictor supports plus current and queried values,
    deduplicated in first-seen order."""
    domain: list[Primitive] = []
    for support in predictors.values():
        for v in support:
            if not _in_domain(domain, v):
                domain.append(v)
    for v in (current, value):
        if v is not MISSING and not _in_domain(domain, v):
            domain.append(v)
    return domain


def _combined_scores(model: WorldModel,
                     predictors: dict[str, tuple[Primitive, ...]],
                     domain: list[Primitive]) -> list[float]:
    off_mass = model.epsilon / len(domain)
    scores = []
    for v in domain:
        total = 0.0
        for name, support in predictors.items():
            if any(_same_value(s, v) for s in support):
                phi = (1.0 - model.epsilon) / len(support)
            else:
                phi = off_mass
            total += model.weights[name] * math.log(phi)
        scores.append(total)
    return scores


def _log_softmax_at(scores: list[float], index: int) -> float:
    top = max(scores)
    log_z = top + math.log(math.fsum(math.exp(s - top) for s in scores))
    return scores[index] - log_z


def observable_log_prob(model: WorldModel, table: PredictionTable,
                        path: str, value: Primitive,
                        current: Primitive) -> float:
    """Log-probability of one observable taking `value` next step.

    `current` is the path's value in the pre-state, or MISSING for paths
    that do not exist yet (entity births score as off-current).
    """
    predictors = table.paths.get(path)
    if not predictors:
        if current is not MISSING and _same_value(value, current):
            return math.log(1.0 - model.delta)
        return math.log(model.delta)
    domain = candidate_domain(predictors, current, value)
    scores = _combined_scores(model, predictors, domain)
    index = next(i for i, v in enumerate(domain) if _same_value(v, value))
    return _log_softmax_at(scores, index)


def _check_schema(cur: dict[str, Primitive], nxt: dict[str, Primitive]) -> None:
    # Entity births and deaths are legitimate (scored under persistence);
    # the fixed world geometry is not allowed to change shape.
    fixed_prefixes = ("materials/", "size/")
    bad = sorted(
        p for p in (cur.keys() ^ nxt.keys())
        if p.startswith(fixed_prefixes))
    if bad:
        raise SchemaMismatchError(bad)


def transition_log_prob(model: WorldModel, state: WorldState, action: str,
                        next_state: WorldState) -> float:
    cur = extract_observables(state)
    nxt = extract_observables(next_state)
    _check_schema(cur, nxt)
    table = build_predictions(model, state, action)
    total = 0.0
    for path, value in nxt.items():
        total += observable_log_prob(model, table, path, value,
                                     cur.get(path, MISSING))
    return total


# ---------------------------------------------------------------------------
# Sampling and reconstruction.

def sample_next_state(model: WorldModel, state: WorldState, action: str,
                      rng: random.Random) -> WorldState:
    """Samples every observable from its per-path distribution and
    reassembles a full state.  Raises ReconstructionError when the sampled
    document breaks state invariants."""
    cur = extract_observables(state)
    table = build_predictions(model, state, action)
    sampled: dict[str, Primitive] = {}
    for path, current in cur.items():
        predictors = table.paths.get(path)
        if not predictors:
            sampled[path] = current
            continue
        domain = candidate_domain(predictors, current)
        scores = _combined_scores(model, predictors, domain)
        top = max(scores)
        weights = [math.exp(s - top) for s in scores]
        total = math.fsum(weights)
        draw = rng.random() * total
        acc = 0.0
        choice = domain[-1]
        for v, w in zip(domain, weights):
            acc += w
            if draw < acc:
                choice = v
                break
        sampled[path] = choice
    return reconstruct(state, sampled)


def reconstruct(state: WorldState,
                sampled: dict[str, Primitive]) -> WorldState:
    """Writes sampled leaves back into a copy of the state's document.

    Violated invariants raise (with the built state attached) rather than
    being silently repaired.
    """
    doc = canonicalize(state)
    for path, value in sampled.items():
        _write_leaf(doc, path, value)
    rebuilt = from_canonical(doc, rng_state=state.rng_state,
                             event_log=list(state.event_log))
    violations = validate_state(rebuilt)
    if violations:
        raise ReconstructionError(rebuilt, violations)
    return rebuilt


def _write_leaf(doc, path: str, value: Primitive) -> None:
    parts = path.split("/")
    node = doc
    try:
        for part in parts[:-1]:
            node = node[int(part)] if isinstance(node, list) else node[part]
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            if last not in node:
                raise KeyError(last)
            node[last] = value
    except (KeyError, IndexError, TypeError, ValueError):
        raise KeyError(f"sampled path not present in document: {path}")


__all__ = [
    "DEFAULT_DELTA", "DEFAULT_EPSILON", "MISSING",
    "PredictionTable", "ReconstructionError", "SchemaMismatchError",
    "WorldModel",
    "build_predictions", "candidate_domain", "extract_observables",
    "make_model", "observable_log_prob", "reconstruct", "sample_next_state",
    "states_equal", "transition_log_prob", "uniform_weights",
]
