"""Breadth-first unfolding of an annotated reachability graph.

Computes exact trace probabilities by expanding the graph level by level
(one level = one arc traversal).  Queue keys are (state, level, trace)
triples; the level matters because silent transitions extend the path
without extending the trace, so the same (state, trace) pair can be reached
by paths of different lengths.  Keys are kept in per-level buckets, which
makes the central correctness property structural: when a bucket is
expanded, every key in it already holds its final probability, because all
of its in-arcs come from the previous bucket.

Two entry points:

* :func:`trace_probabilities` restricts the unfolding to a target trace set
  (a path is abandoned as soon as its trace is no longer a prefix of any
  target) and reports the probability of each target.
* :func:`unfold_language` explores freely and stops once the completed
  probability mass reaches a coverage threshold or a budget binds, returning
  a possibly defective stochastic language.

Traces are interned in a trie; queue keys hold node ids, not tuples.
Silent cycles would otherwise unfold forever, so both entry points bound the
level count and drop per-key probabilities below ``prob_floor``; everything
discarded this way is accounted for (``dropped_mass`` / ``residual``).
"""

from dataclasses import dataclass
from typing import Callable, Iterable

from .logs import StochasticLanguage, Trace
from .semantics import AnnotatedRG

DEFAULT_PROB_FLOOR = 1e-12

#: hook signature: (destination level, (state, trie node), added probability, key is new)
MergeHook = Callable[[int, tuple[int, int], float, bool], None]


class _Trie:
    """Append-only trie; node 0 is the root (empty trace)."""

    __slots__ = ("parent", "symbol", "depth", "children")

    def __init__(self):
        self.parent = [-1]
        self.symbol: list[str | None] = [None]
        self.depth = [0]
        self.children: list[dict[str, int]] = [{}]

    def __len__(self):
        return len(self.parent)

    def add(self, node: int, symbol: str) -> int:
        child = self.children[node].get(symbol)
        if child is None:
            child = len(self.parent)
            self.parent.append(node)
            self.symbol.append(symbol)
            self.depth.append(self.depth[node] + 1)
            self.children.append({})
            self.children[node][symbol] = child
        return child

    def step(self, node: int, symbol: str) -> int | None:
        return self.children[node].get(symbol)

    def insert(self, trace: Trace) -> int:
        node = 0
        for symbol in trace:
            node = self.add(node, symbol)
        return node

    def walk(self, trace: Trace) -> int | None:
        node = 0
        for symbol in trace:
            node = self.children[node].get(symbol)
            if node is None:
                return None
        return node

    def trace_of(self, node: int) -> Trace:
        parts = []
        while node > 0:
            parts.append(self.symbol[node])
            node = self.parent[node]
        return tuple(reversed(parts))


class PrefixIndex:
    """Trie over a target trace set, answering prefix and membership queries."""

    def __init__(self, traces: Iterable[Trace]):
        self._trie = _Trie()
        self._member: set[int] = set()
        for trace in traces:
            self._member.add(self._trie.insert(tuple(trace)))
        if not self._member:
            raise ValueError("target trace set must be non-empty")
        self.max_trace_len = max(self._trie.depth)

    def __len__(self):
        return len(self._member)

    def is_prefix(self, trace: Trace) -> bool:
        return self._trie.walk(trace) is not None

    def is_member(self, trace: Trace) -> bool:
        node = self._trie.walk(trace)
        return node is not None and node in self._member

    def traces(self) -> tuple[Trace, ...]:
        return tuple(self._trie.trace_of(n) for n in sorted(self._member))


@dataclass(frozen=True)
class UnfoldResult:
    """Trace probabilities plus the mass discarded by level/floor cutoffs."""

    probs: dict[Trace, float]
    dropped_mass: float
    levels_explored: int


def _arcs_by_state(arg: AnnotatedRG) -> list[list[tuple[int, str | None, float]]]:
    rg = arg.rg
    labeling = rg.wn.net.labeling
    transitions = rg.wn.net.transitions
    arcs: list[list[tuple[int, str | None, float]]] = []
    for s in range(rg.n_states):
        lo, hi = rg.out_start[s], rg.out_start[s + 1]
        arcs.append(
            [
                (int(rg.arc_dst[a]), labeling[transitions[rg.arc_tid[a]]], float(arg.arc_prob[a]))
                for a in range(lo, hi)
            ]
        )
    return arcs


def default_max_level(n_states: int, longest_trace: int) -> int:
    """Level budget that lets every target complete even through silent detours."""
    return (1 + longest_trace) * n_states


def trace_probabilities(
    arg: AnnotatedRG,
    targets: PrefixIndex,
    max_level: int | None = None,
    prob_floor: float = DEFAULT_PROB_FLOOR,
    on_merge: MergeHook | None = None,
) -> UnfoldResult:
    """Exact probability of each target trace under the annotated graph.

    The expansion is restricted to paths whose emitted trace is a prefix of
    some target; a path reaching the sink contributes if and only if its
    trace is a target.  Queue keys beyond ``max_level`` or whose aggregated
    probability falls below ``prob_floor`` are moved to ``dropped_mass``
    (so a silent cycle turns into quantified truncation, not a hang).
    """
    rg = arg.rg
    if max_level is None:
        max_level = default_max_level(rg.n_states, targets.max_trace_len)
    if max_level <= 0 or prob_floor < 0:
        raise ValueError("limits must be positive")

    trie = targets._trie
    member = targets._member
    arcs = _arcs_by_state(arg)
    sink = rg.sink_state

    collected: dict[int, float] = {}
    current: dict[tuple[int, int], float] = {(rg.initial, 0): 1.0}
    dropped = 0.0
    level = 0
    while current:
        nxt: dict[tuple[int, int], float] = {}
        for (state, node), pr in current.items():
            for dst, symbol, arc_p in arcs[state]:
                if symbol is None:
                    new_node = node
                else:
                    new_node = trie.step(node, symbol)
                    if new_node is None:
                        continue  # no longer a prefix of any target
                new_pr = pr * arc_p
                if dst == sink:
                    if new_node in member:
                        collected[new_node] = collected.get(new_node, 0.0) + new_pr
                elif level + 1 > max_level:
                    dropped += new_pr
                else:
                    key = (dst, new_node)
                    if key in nxt:
                        nxt[key] += new_pr
                        if on_merge:
                            on_merge(level + 1, key, new_pr, False)
                    else:
                        nxt[key] = new_pr
                        if on_merge:
                            on_merge(level + 1, key, new_pr, True)
        if prob_floor > 0.0 and nxt:
            kept = {}
            for key, pr in nxt.items():
                if pr < prob_floor:
                    dropped += pr
                else:
                    kept[key] = pr
            nxt = kept
        current = nxt
        level += 1

    probs = {trie.trace_of(node): pr for node, pr in collected.items()}
    return UnfoldResult(probs=probs, dropped_mass=dropped, levels_explored=level)


def unfold_language(
    arg: AnnotatedRG,
    coverage: float = 1.0,
    max_trace_len: int | None = None,
    max_level: int | None = None,
    prob_floor: float = DEFAULT_PROB_FLOOR,
) -> StochasticLanguage:
    """Unrestricted unfolding, stopped once completed mass reaches ``coverage``.

    The coverage check runs between levels, so each level is always fully
    merged before its keys are expanded.  The result has
    ``residual = 1 - sum(probs)``; a residual above ``1 - coverage`` means a
    budget (trace length, level count, probability floor) bound first.
    """
    if not (0.0 < coverage <= 1.0):
        raise ValueError("coverage must be in (0, 1]")
    if max_trace_len is not None and max_trace_len < 1:
        raise ValueError("max_trace_len must be >= 1")
    rg = arg.rg
    if max_level is None:
        max_level = default_max_level(rg.n_states, max_trace_len if max_trace_len is not None else rg.n_states)
    if max_level <= 0 or prob_floor < 0:
        raise ValueError("limits must be positive")

    trie = _Trie()
    arcs = _arcs_by_state(arg)
    sink = rg.sink_state

    collected: dict[int, float] = {}
    collected_mass = 0.0
    current: dict[tuple[int, int], float] = {(rg.initial, 0): 1.0}
    level = 0
    while current and collected_mass < coverage:
        nxt: dict[tuple[int, int], float] = {}
        for (state, node), pr in current.items():
            for dst, symbol, arc_p in arcs[state]:
                if symbol is None:
                    new_node = node
                else:
                    if max_trace_len is not None and trie.depth[node] >= max_trace_len:
                        continue  # length budget binds; mass stays in the residual
                    new_node = trie.add(node, symbol)
                new_pr = pr * arc_p
                if dst == sink:
                    collected[new_node] = collected.get(new_node, 0.0) + new_pr
                    collected_mass += new_pr
                elif level + 1 <= max_level:
                    key = (dst, new_node)
                    nxt[key] = nxt.get(key, 0.0) + new_pr
        if prob_floor > 0.0 and nxt:
            nxt = {key: pr for key, pr in nxt.items() if pr >= prob_floor}
        current = nxt
        level += 1

    probs = {trie.trace_of(node): pr for node, pr in collected.items()}
    residual = max(0.0, 1.0 - sum(probs.values()))
    return StochasticLanguage(probs=probs, residual=residual)
