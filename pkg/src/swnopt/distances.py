"""Divergences between stochastic languages.

* ``log_likelihood_divergence``: negative expected log model probability
  under the target distribution (natural log).  Minimizing it is maximum
  likelihood estimation; its floor is the target's empirical entropy.  Model
  probabilities are clamped at ``P_CLAMP`` before the log so a missed trace
  yields a large finite penalty instead of an infinite one.
* ``emd``: earth mover's distance as an exact transportation linear program
  (solved with HiGHS); with normalized Levenshtein costs the value lies in
  [0, 1] and is interpretable as "how much probability must move how far".
* ``restricted_emd``: EMD after restricting the model language to the
  target's support and renormalizing; cheap enough to drive optimization.
* ``truncated_emd``: EMD after unfolding the model up to a probability
  coverage threshold; used for evaluation, not optimization.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import ComputationError
from .logs import StochasticLanguage, Trace
from .semantics import AnnotatedRG
from .unfolding import DEFAULT_PROB_FLOOR, UnfoldResult, unfold_language

#: Model probabilities are clamped here before taking the log.
P_CLAMP = 1e-12

#: Below this restricted-model mass the net is considered unable to produce the log.
MASS_FLOOR = 1e-12

_MARGINAL_TOL = 1e-9


class InfeasibleMarginals(ComputationError):
    """The two distributions do not carry matching total mass."""


class ZeroModelMass(ComputationError):
    """The model assigns (almost) no probability to any observed trace."""


def levenshtein(t1: Trace, t2: Trace) -> int:
    """Minimum number of single-symbol insertions, deletions or substitutions."""
    if len(t1) < len(t2):
        t1, t2 = t2, t1
    if not t2:
        return len(t1)
    previous = list(range(len(t2) + 1))
    for i, a in enumerate(t1, start=1):
        current = [i]
        append = current.append
        diagonal = i - 1  # previous[j-1]
        left = i  # current[j-1]
        for up, b in zip(previous[1:], t2):
            value = diagonal if a == b else diagonal + 1
            if up + 1 < value:
                value = up + 1
            if left + 1 < value:
                value = left + 1
            append(value)
            left = value
            diagonal = up
        previous = current
    return previous[-1]


def normalized_levenshtein(t1: Trace, t2: Trace) -> float:
    """Edit distance scaled to [0, 1] by the longer trace; 0 for two empty traces."""
    longest = max(len(t1), len(t2))
    if longest == 0:
        return 0.0
    return levenshtein(t1, t2) / longest


@dataclass(frozen=True)
class CostMatrix:
    """Pairwise trace costs; ``cost[i, j]`` moves mass from rows[i] to cols[j].

    Costs must be non-negative and zero exactly on equal traces, and the
    matrix must be symmetric when rows and cols coincide.  Matrices built
    with :func:`levenshtein_cost_matrix` additionally stay within [0, 1].
    """

    rows: tuple[Trace, ...]
    cols: tuple[Trace, ...]
    cost: np.ndarray

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=np.float64)
        if cost.shape != (len(self.rows), len(self.cols)):
            raise ValueError(f"cost shape {cost.shape} does not match {len(self.rows)}x{len(self.cols)} traces")
        if not np.all(np.isfinite(cost)) or np.any(cost < 0.0):
            raise ValueError("costs must be finite and non-negative")
        for i, r in enumerate(self.rows):
            for j, c in enumerate(self.cols):
                if (cost[i, j] == 0.0) != (r == c):
                    raise ValueError(f"cost must be zero exactly on equal traces, violated at ({r!r}, {c!r})")
        if self.rows == self.cols and not np.array_equal(cost, cost.T):
            raise ValueError("cost matrix must be symmetric when rows == cols")
        object.__setattr__(self, "cost", cost)


def levenshtein_cost_matrix(rows: tuple[Trace, ...], cols: tuple[Trace, ...]) -> CostMatrix:
    cost = np.empty((len(rows), len(cols)))
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            cost[i, j] = normalized_levenshtein(r, c)
    return CostMatrix(rows=tuple(rows), cols=tuple(cols), cost=cost)


@dataclass(frozen=True)
class TransportPlan:
    """Optimal coupling: ``plan[i, j]`` is the mass moved from row i to col j."""

    plan: np.ndarray
    cost: float


def emd(p: StochasticLanguage, q: StochasticLanguage, cost: CostMatrix) -> TransportPlan:
    """Exact earth mover's distance between two complete stochastic languages.

    Solves the transportation linear program: minimize the total moving cost
    over all couplings whose row sums reproduce ``p`` and column sums ``q``.
    """
    if abs(p.mass() - 1.0) > _MARGINAL_TOL or abs(q.mass() - 1.0) > _MARGINAL_TOL:
        raise InfeasibleMarginals(
            f"languages must be complete: masses {p.mass()}, {q.mass()}"
        )
    row_idx = {t: i for i, t in enumerate(cost.rows)}
    col_idx = {t: j for j, t in enumerate(cost.cols)}
    missing = [t for t in p.probs if t not in row_idx] + [t for t in q.probs if t not in col_idx]
    if missing:
        raise ValueError(f"cost matrix does not cover {missing[:3]}")

    n, m = len(cost.rows), len(cost.cols)
    a = np.zeros(n)
    b = np.zeros(m)
    for t, prob in p.probs.items():
        a[row_idx[t]] = prob
    for t, prob in q.probs.items():
        b[col_idx[t]] = prob

    # marginal constraints: row sums = a, column sums = b
    ij = np.arange(n * m)
    row_of = ij // m
    col_of = ij % m
    data = np.ones(2 * n * m)
    rows = np.concatenate([row_of, n + col_of])
    cols = np.concatenate([ij, ij])
    a_eq = sparse.coo_matrix((data, (rows, cols)), shape=(n + m, n * m))
    b_eq = np.concatenate([a, b])

    res = linprog(cost.cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        # HiGHS presolve wrongly rejects systems whose marginals contain
        # entries below its feasibility tolerance (~1e-7); retry without it
        res = linprog(
            cost.cost.ravel(),
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=(0, None),
            method="highs",
            options={"presolve": False},
        )
    if res.status != 0:
        raise InfeasibleMarginals(f"transportation LP failed: {res.message}")
    plan = np.maximum(res.x.reshape(n, m), 0.0)
    return TransportPlan(plan=plan, cost=float(res.fun))


def language_emd(p: StochasticLanguage, q: StochasticLanguage) -> TransportPlan:
    """EMD with normalized-Levenshtein costs over the two supports."""
    rows = tuple(p.probs)
    cols = tuple(q.probs)
    return emd(p, q, levenshtein_cost_matrix(rows, cols))


@dataclass(frozen=True)
class DistanceReport:
    """One measured divergence; ``kind`` is "lh", "remd" or "temd".

    ``model_mass_on_log`` (rEMD) is the model probability found on the
    target's support before renormalization; ``coverage_used`` (tEMD) is the
    probability mass the truncated unfolding actually reached — a value
    below the requested coverage flags a partial result.
    """

    kind: str
    value: float
    model_mass_on_log: float | None = None
    coverage_used: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "model_mass_on_log": self.model_mass_on_log,
            "coverage_used": self.coverage_used,
        }


def log_likelihood_divergence(target: StochasticLanguage, model_probs: UnfoldResult | dict) -> float:
    """Negative expected log model probability under the target (natural log)."""
    if not target.is_complete:
        raise ValueError("target language must be complete")
    probs = model_probs.probs if isinstance(model_probs, UnfoldResult) else model_probs
    total = 0.0
    for trace, p_target in target.probs.items():
        total -= p_target * np.log(max(probs.get(trace, 0.0), P_CLAMP))
    return float(total)


def restricted_emd(target: StochasticLanguage, model_probs: UnfoldResult | dict) -> DistanceReport:
    """EMD between the target and the model restricted to the target's support.

    The restriction is usually defective; it is renormalized to mass one
    before the transportation problem is solved.  Raises
    :class:`ZeroModelMass` when the model puts essentially no probability on
    any observed trace.
    """
    if not target.is_complete:
        raise ValueError("target language must be complete")
    probs = model_probs.probs if isinstance(model_probs, UnfoldResult) else model_probs
    support = tuple(target.probs)
    restricted = {t: probs.get(t, 0.0) for t in support}
    mass = sum(restricted.values())
    if mass < MASS_FLOOR:
        raise ZeroModelMass(f"model mass on the log support is {mass}")
    model_lang = StochasticLanguage({t: v / mass for t, v in restricted.items()}, 0.0)
    plan = emd(target, model_lang, levenshtein_cost_matrix(support, support))
    value = min(max(plan.cost, 0.0), 1.0)
    return DistanceReport(kind="remd", value=value, model_mass_on_log=mass)


def truncated_emd(
    target: StochasticLanguage,
    model: AnnotatedRG,
    coverage: float,
    max_trace_len: int | None = None,
    max_level: int | None = None,
    prob_floor: float = DEFAULT_PROB_FLOOR,
) -> DistanceReport:
    """EMD against the model language unfolded up to a coverage threshold.

    Both sides are renormalized to mass one before the LP.  When the level,
    length or floor budgets bind before the coverage is reached, the partial
    result is still returned, flagged by ``coverage_used < coverage``.
    """
    model_lang = unfold_language(
        model, coverage=coverage, max_trace_len=max_trace_len, max_level=max_level, prob_floor=prob_floor
    )
    mass = model_lang.mass()
    if mass < MASS_FLOOR:
        raise ZeroModelMass(f"truncated unfolding reached mass {mass}")
    plan = language_emd(target.normalized(), model_lang.normalized())
    value = min(max(plan.cost, 0.0), 1.0)
    return DistanceReport(kind="temd", value=value, coverage_used=mass)
