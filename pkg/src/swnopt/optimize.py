"""Weight estimation: pick the best of n0 random starting vectors, then run a
bounded local minimization of the chosen divergence.

The objective is a pure function of the weight vector: annotate the
reachability graph, unfold the trace probabilities over the target's
support, measure the divergence (negative log likelihood, or EMD restricted
to the log's support).  Weights enter only through ratios, so the surface is
scale invariant; optimization happens in log-weight space, which keeps the
weights positive without constraint machinery, and the reported weights are
rescaled so the largest equals one.

Two local methods are provided:

* ``fd-quasi-newton`` — BFGS-style inverse-Hessian updates fed by central
  finite differences, with a backtracking (Armijo) line search.  Suited to
  the smooth likelihood objective.
* ``derivative-free`` — cyclic coordinate sweeps, each coordinate minimized
  by a coarse scan followed by golden-section refinement.  Suited to the
  kinked EMD objective.

Both stop after ``max_iter`` accepted iterations, when the relative
decrement of the objective falls below ``delta``, or when no improving step
exists.  Every accepted iteration appends to the convergence trace, which is
therefore non-increasing.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ComputationError
from .distances import ZeroModelMass, log_likelihood_divergence, restricted_emd
from .logs import StochasticLanguage
from .nets import WeightVector, WorkflowNet
from .semantics import ReachabilityGraph, annotate, build_rg
from .unfolding import DEFAULT_PROB_FLOOR, PrefixIndex, trace_probabilities

MEASURES = ("lh", "remd")
METHODS = ("fd-quasi-newton", "derivative-free", "auto")
STOP_MAX_ITER = "MaxIter"
STOP_DELTA = "DeltaConverged"
STOP_NO_IMPROVEMENT = "NoImprovement"

#: Value standing in for a start the rEMD objective cannot score (zero model mass).
INVALID_OBJECTIVE = 1e12

#: Random starting weights are drawn uniformly from (INIT_LOW, 1] per transition.
INIT_LOW = 1e-3

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class AllStartsInvalid(ComputationError):
    """Every random start had zero model mass on the log support."""


@dataclass(frozen=True)
class ObjectiveSpec:
    """What to minimize: a divergence between a net's language and a target."""

    measure: str
    wn: WorkflowNet
    rg: ReachabilityGraph
    target: StochasticLanguage
    max_level: int | None = None
    prob_floor: float = DEFAULT_PROB_FLOOR
    _targets: PrefixIndex = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}, got {self.measure!r}")
        if not self.target.is_complete:
            raise ValueError("target language must be complete")
        object.__setattr__(self, "_targets", PrefixIndex(self.target.probs))

    @classmethod
    def for_net(cls, measure: str, wn: WorkflowNet, target: StochasticLanguage, **kwargs) -> "ObjectiveSpec":
        return cls(measure=measure, wn=wn, rg=build_rg(wn), target=target, **kwargs)

    @property
    def n_weights(self) -> int:
        return len(self.wn.net.transitions)


@dataclass(frozen=True)
class OptimizerConfig:
    n0: int = 10
    max_iter: int = 50
    delta: float = 1e-3
    seed: int = 0
    bounds: tuple[float, float] = (1e-9, 1e9)
    method: str = "auto"

    def __post_init__(self):
        if self.n0 < 1:
            raise ValueError("n0 must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not (self.delta > 0.0):
            raise ValueError("delta must be positive")
        lo, hi = self.bounds
        if not (0.0 < lo < hi):
            raise ValueError("bounds must satisfy 0 < low < high")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")

    def resolved_method(self, measure: str) -> str:
        if self.method != "auto":
            return self.method
        return "fd-quasi-newton" if measure == "lh" else "derivative-free"


@dataclass(frozen=True)
class OptimizationResult:
    """Weights (rescaled so max(w) == 1), final objective value, and the
    per-iteration convergence trace (non-increasing)."""

    weights: WeightVector
    final_value: float
    iterations: int
    stop_reason: str
    trace: tuple[tuple[int, float], ...]

    def trace_csv(self) -> str:
        lines = ["iteration,value"]
        lines += [f"{i},{v!r}" for i, v in self.trace]
        return "\n".join(lines) + "\n"


def evaluate_objective(spec: ObjectiveSpec, weights: WeightVector | np.ndarray) -> float:
    """Divergence of the net under the given weights; pure in ``weights``."""
    annotated = annotate(spec.rg, weights)
    unfolded = trace_probabilities(
        annotated, spec._targets, max_level=spec.max_level, prob_floor=spec.prob_floor
    )
    if spec.measure == "lh":
        return log_likelihood_divergence(spec.target, unfolded)
    return restricted_emd(spec.target, unfolded).value


def _guarded(spec: ObjectiveSpec):
    """Objective over log-weights; zero-model-mass points score INVALID_OBJECTIVE."""

    def f(x: np.ndarray) -> float:
        try:
            return evaluate_objective(spec, np.exp(x))
        except ZeroModelMass:
            return INVALID_OBJECTIVE

    return f


def draw_starts(spec: ObjectiveSpec, config: OptimizerConfig) -> np.ndarray:
    """The n0 random starting vectors for a seed, one per row."""
    rng = np.random.default_rng(config.seed)
    return rng.uniform(INIT_LOW, 1.0, size=(config.n0, spec.n_weights))


def select_start(spec: ObjectiveSpec, config: OptimizerConfig, workers: int = 1) -> WeightVector:
    """Best of n0 seeded random draws; ties broken by earliest draw.

    The draws are fixed up front, so evaluating them concurrently (``workers``
    > 1) returns the same winner as a sequential pass.
    """
    starts = draw_starts(spec, config)

    def score(row: np.ndarray) -> float:
        try:
            return evaluate_objective(spec, row)
        except ZeroModelMass:
            return INVALID_OBJECTIVE

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(score, starts))
    else:
        values = [score(row) for row in starts]

    best = min(range(len(values)), key=lambda i: (values[i], i))
    if values[best] >= INVALID_OBJECTIVE:
        raise AllStartsInvalid(f"all {config.n0} starts had zero model mass on the log")
    return WeightVector(tuple(float(v) for v in starts[best]))


def _central_gradient(f, x: np.ndarray, fallback: float) -> np.ndarray:
    grad = np.empty_like(x)
    for i in range(len(x)):
        h = 1e-6 * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fp, fm = f(xp), f(xm)
        if fp >= INVALID_OBJECTIVE or fm >= INVALID_OBJECTIVE:
            grad[i] = fallback
        else:
            grad[i] = (fp - fm) / (2.0 * h)
    return grad


def _fd_quasi_newton(f, x0, fx0, lo, hi, max_iter, delta):
    n = len(x0)
    x, fx = x0.copy(), fx0
    trace = [(0, fx)]
    h_inv = np.eye(n)
    identity = np.eye(n)
    grad = _central_gradient(f, x, 0.0)
    stop = STOP_MAX_ITER

    for it in range(1, max_iter + 1):
        direction = -h_inv @ grad
        slope = float(grad @ direction)
        if slope >= 0.0:
            h_inv = identity.copy()
            direction = -grad
            slope = float(grad @ direction)
        if slope == 0.0:
            stop = STOP_NO_IMPROVEMENT
            break

        step = 1.0
        x_new = f_new = None
        for _ in range(40):
            cand = np.clip(x + step * direction, lo, hi)
            f_cand = f(cand)
            if f_cand < fx + 1e-4 * step * slope or f_cand < fx:
                x_new, f_new = cand, f_cand
                break
            step *= 0.5
        if x_new is None:
            stop = STOP_NO_IMPROVEMENT
            break

        grad_new = _central_gradient(f, x_new, 0.0)
        s = x_new - x
        y = grad_new - grad
        sy = float(s @ y)
        if sy > 1e-12:
            rho = 1.0 / sy
            left = identity - rho * np.outer(s, y)
            h_inv = left @ h_inv @ left.T + rho * np.outer(s, s)

        prev, x, fx, grad = fx, x_new, f_new, grad_new
        trace.append((it, fx))
        if fx == 0.0 or (fx > 0.0 and abs(fx - prev) / fx < delta):
            stop = STOP_DELTA
            break

    return x, fx, stop, trace


def _golden_section(g, a, b, tol=1e-6):
    """Golden-section minimum of g on [a, b]; returns (x, g(x))."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    g1, g2 = g(x1), g(x2)
    while b - a > tol:
        if g1 <= g2:
            b, x2, g2 = x2, x1, g1
            x1 = b - _GOLDEN * (b - a)
            g1 = g(x1)
        else:
            a, x1, g1 = x1, x2, g2
            x2 = a + _GOLDEN * (b - a)
            g2 = g(x2)
    return (x1, g1) if g1 <= g2 else (x2, g2)


def _coordinate_descent(f, x0, fx0, lo, hi, max_iter, delta, scan_points=12):
    x, fx = x0.copy(), fx0
    trace = [(0, fx)]
    stop = STOP_MAX_ITER

    for it in range(1, max_iter + 1):
        improved = False
        for i in range(len(x)):

            def g(v, i=i):
                xi = x.copy()
                xi[i] = v
                return f(xi)

            # coarse scan picks the bracket; golden section refines inside it
            grid = np.linspace(lo[i], hi[i], scan_points)
            values = [g(v) for v in grid]
            k = int(np.argmin(values))
            a = grid[max(k - 1, 0)]
            b = grid[min(k + 1, scan_points - 1)]
            v_best, g_best = _golden_section(g, a, b)
            if values[k] < g_best:
                v_best, g_best = grid[k], values[k]
            if g_best < fx:
                x[i] = v_best
                fx = g_best
                improved = True

        if not improved:
            stop = STOP_NO_IMPROVEMENT
            break
        prev = trace[-1][1]
        trace.append((it, fx))
        if fx == 0.0 or (fx > 0.0 and abs(fx - prev) / fx < delta):
            stop = STOP_DELTA
            break

    return x, fx, stop, trace


def minimize(spec: ObjectiveSpec, w0: WeightVector, config: OptimizerConfig) -> OptimizationResult:
    """Local minimization from ``w0`` in log-weight space within the bounds."""
    f = _guarded(spec)
    lo = np.full(spec.n_weights, math.log(config.bounds[0]))
    hi = np.full(spec.n_weights, math.log(config.bounds[1]))
    x0 = np.clip(np.log(np.asarray(w0.values, dtype=np.float64)), lo, hi)
    fx0 = f(x0)

    method = config.resolved_method(spec.measure)
    if method == "fd-quasi-newton":
        x, fx, stop, trace = _fd_quasi_newton(f, x0, fx0, lo, hi, config.max_iter, config.delta)
    else:
        x, fx, stop, trace = _coordinate_descent(f, x0, fx0, lo, hi, config.max_iter, config.delta)

    weights = np.exp(x)
    weights = weights / weights.max()  # gauge: report with max weight 1
    return OptimizationResult(
        weights=WeightVector(tuple(float(v) for v in weights)),
        final_value=fx,
        iterations=len(trace) - 1,
        stop_reason=stop,
        trace=tuple(trace),
    )


def optimized_weights(spec: ObjectiveSpec, config: OptimizerConfig, workers: int = 1) -> OptimizationResult:
    """Best-of-n0 start selection followed by local minimization."""
    w0 = select_start(spec, config, workers=workers)
    return minimize(spec, w0, config)
