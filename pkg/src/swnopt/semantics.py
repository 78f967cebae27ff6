"""Token-game semantics and reachability graphs for 1-safe workflow nets.

Markings of a 1-safe net are sets of marked places; internally the graph
builder encodes them as integer bitmasks over the place order.  The
reachability graph enumerates all markings reachable from the initial one,
breadth first, with deterministic state numbering (discovery order, with
transitions tried in declaration order), so state indices and arc order are
reproducible across runs.

Annotating the graph with a weight vector turns each state's outgoing arcs
into a probability distribution: arc (M, M', t) gets weight(t) divided by the
total weight of all transitions enabled at M.  Scaling every weight by the
same factor leaves all arc probabilities unchanged.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ComputationError, InputError
from .nets import LabeledPetriNet, WeightVector, WorkflowNet

Marking = frozenset[str]


class NotEnabled(ComputationError):
    """The transition is not enabled in the given marking."""


class NotOneSafe(InputError):
    """Firing would put a second token on a place; the net is not 1-safe."""


class StateCapExceeded(ComputationError):
    """Reachability exploration hit the state cap."""


DEFAULT_STATE_CAP = 1_000_000


def _lpn(net) -> LabeledPetriNet:
    return net.net if isinstance(net, WorkflowNet) else net


def _pre_post(net: LabeledPetriNet, transition: str) -> tuple[set[str], set[str]]:
    pre, post = set(), set()
    for (src, dst), mult in net.flow.items():
        if dst == transition:
            if mult != 1:
                raise ValueError("token-game semantics require unit arc multiplicities")
            pre.add(src)
        elif src == transition:
            if mult != 1:
                raise ValueError("token-game semantics require unit arc multiplicities")
            post.add(dst)
    return pre, post


def enabled(marking: Marking, net) -> set[str]:
    """Transitions whose input places are all marked."""
    lpn = _lpn(net)
    result = set()
    for t in lpn.transitions:
        pre, _ = _pre_post(lpn, t)
        if pre <= marking:
            result.add(t)
    return result


def fire(marking: Marking, transition: str, net) -> Marking:
    """Fire an enabled transition: unmark its inputs, mark its outputs."""
    lpn = _lpn(net)
    if transition not in lpn.transitions:
        raise NotEnabled(f"unknown transition {transition!r}")
    pre, post = _pre_post(lpn, transition)
    if not pre <= marking:
        raise NotEnabled(f"{transition!r} is not enabled in {sorted(marking)}")
    remaining = marking - pre
    clash = remaining & post
    if clash:
        raise NotOneSafe(f"firing {transition!r} would put a second token on {sorted(clash)}")
    return frozenset(remaining | post)


@dataclass(frozen=True)
class ReachabilityGraph:
    """Marking graph of a workflow net.

    ``states`` holds one bitmask per marking (bit i = place ``i`` in the
    net's place order); state 0 is the initial marking.  Arcs are stored as
    parallel arrays sorted by source state, with ``out_start`` giving the
    CSR-style slice ``out_start[s]:out_start[s+1]`` of arcs leaving state
    ``s``.  ``arc_tid`` indexes into the net's transition order.
    ``sink_state`` is the index of the marking {sink}, or None if the sink
    marking is unreachable.
    """

    wn: WorkflowNet
    states: tuple[int, ...]
    arc_src: np.ndarray
    arc_dst: np.ndarray
    arc_tid: np.ndarray
    out_start: np.ndarray
    sink_state: int | None

    initial: int = 0

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_arcs(self) -> int:
        return len(self.arc_src)

    def marking_of(self, state: int) -> Marking:
        mask = self.states[state]
        places = self.wn.net.places
        return frozenset(places[i] for i in range(len(places)) if mask >> i & 1)

    def state_label(self, state: int) -> str:
        """Marked place names concatenated in place order."""
        mask = self.states[state]
        places = self.wn.net.places
        return "".join(places[i] for i in range(len(places)) if mask >> i & 1)


def build_rg(wn: WorkflowNet, state_cap: int = DEFAULT_STATE_CAP) -> ReachabilityGraph:
    """Breadth-first reachability exploration of a 1-safe workflow net."""
    if state_cap <= 0:
        raise ValueError("state_cap must be positive")
    net = wn.net
    place_idx = {p: i for i, p in enumerate(net.places)}

    pre_masks, post_masks = [], []
    for t in net.transitions:
        pre, post = _pre_post(net, t)
        pre_masks.append(sum(1 << place_idx[p] for p in pre))
        post_masks.append(sum(1 << place_idx[p] for p in post))

    initial = sum(1 << place_idx[p] for p, n in net.initial_marking.items() if n > 0)
    state_index: dict[int, int] = {initial: 0}
    states: list[int] = [initial]
    arc_src: list[int] = []
    arc_dst: list[int] = []
    arc_tid: list[int] = []
    out_start: list[int] = [0]

    queue = deque([0])
    while queue:
        src = queue.popleft()
        mask = states[src]
        for tid, (pre, post) in enumerate(zip(pre_masks, post_masks)):
            if mask & pre != pre:
                continue
            left = mask & ~pre
            if left & post:
                clash = [net.places[i] for i in range(len(net.places)) if (left & post) >> i & 1]
                raise NotOneSafe(
                    f"firing {net.transitions[tid]!r} in marking "
                    f"{sorted(frozenset(net.places[i] for i in range(len(net.places)) if mask >> i & 1))} "
                    f"would put a second token on {clash}"
                )
            new_mask = left | post
            dst = state_index.get(new_mask)
            if dst is None:
                if len(states) >= state_cap:
                    raise StateCapExceeded(f"more than {state_cap} reachable markings")
                dst = len(states)
                state_index[new_mask] = dst
                states.append(new_mask)
                queue.append(dst)
            arc_src.append(src)
            arc_dst.append(dst)
            arc_tid.append(tid)
        out_start.append(len(arc_src))

    sink_mask = 1 << place_idx[wn.sink]
    sink_state = state_index.get(sink_mask)

    def _frozen(values, dtype=np.int64):
        arr = np.asarray(values, dtype=dtype)
        arr.flags.writeable = False
        return arr

    return ReachabilityGraph(
        wn=wn,
        states=tuple(states),
        arc_src=_frozen(arc_src),
        arc_dst=_frozen(arc_dst),
        arc_tid=_frozen(arc_tid),
        out_start=_frozen(out_start),
        sink_state=sink_state,
    )


@dataclass(frozen=True)
class AnnotatedRG:
    """Reachability graph with one firing probability per arc."""

    rg: ReachabilityGraph
    arc_prob: np.ndarray


def annotate(rg: ReachabilityGraph, weights: WeightVector | np.ndarray) -> AnnotatedRG:
    """Attach firing probabilities: weight(t) over the enabled total per state."""
    values = np.asarray(weights.values if isinstance(weights, WeightVector) else weights, dtype=np.float64)
    if values.shape != (len(rg.wn.net.transitions),):
        raise ValueError(f"expected {len(rg.wn.net.transitions)} weights, got {values.shape}")
    if not np.all(values > 0.0):
        raise ValueError("weights must be strictly positive")
    arc_w = values[rg.arc_tid]
    state_sums = np.bincount(rg.arc_src, weights=arc_w, minlength=rg.n_states)
    arc_prob = arc_w / state_sums[rg.arc_src]
    arc_prob.flags.writeable = False
    return AnnotatedRG(rg=rg, arc_prob=arc_prob)


def rg_to_dot(rg: ReachabilityGraph, arc_prob: np.ndarray | None = None) -> str:
    """GraphViz dump; state labels concatenate the marked place names."""
    lines = ["digraph rg {"]
    for s in range(rg.n_states):
        shape = "doublecircle" if s == rg.sink_state else "circle"
        lines.append(f'  s{s} [label="{rg.state_label(s)}" shape={shape}];')
    transitions = rg.wn.net.transitions
    labeling = rg.wn.net.labeling
    for a in range(rg.n_arcs):
        t = transitions[rg.arc_tid[a]]
        label = labeling[t] or "τ"
        if arc_prob is not None:
            label += f" {arc_prob[a]:.4g}"
        lines.append(f'  s{rg.arc_src[a]} -> s{rg.arc_dst[a]} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
