"""
Consistency-based diagnosis: conflict sets from alarmed sensor pairs and
minimal hitting sets computed with the HS-DAG algorithm (Reiter's hitting-set
tree as corrected by Greiner, Smith and Wilkerson).
"""
import itertools
from collections import deque

import numpy as np


def _key(component):
    return str(component)


def canonical(diagnoses):
    """Sort a collection of component sets by size, then element-wise."""
    return sorted((frozenset(d) for d in diagnoses), key=lambda d: (len(d), sorted(map(_key, d))))


def conflicts_at(alarmed_pairs):
    """One two-element conflict set per alarmed pair, duplicates removed.

    Order of first report is preserved.
    """
    seen = []
    for pair in alarmed_pairs:
        conflict = frozenset(pair)
        if not conflict:
            raise ValueError("empty pair")
        if conflict not in seen:
            seen.append(conflict)
    return seen


def _check_conflicts(conflicts):
    out = []
    for c in conflicts:
        c = frozenset(c)
        if not c:
            raise ValueError("conflict sets must be non-empty")
        out.append(c)
    return out


class _Node:
    __slots__ = ("path", "label", "status", "children", "parents", "depth")

    def __init__(self, path):
        self.path = path
        self.label = None
        self.status = "open"  # open | labeled | hs | closed | removed
        self.children = {}
        self.parents = set()
        self.depth = len(path)


def hs_dag(conflicts, max_cardinality=2):
    """All minimal hitting sets of ``conflicts`` with at most ``max_cardinality`` elements.

    The DAG is built breadth-first. A node is labeled with the first conflict
    (in input order) disjoint from its path, or marked as a hitting set when
    none remains. Nodes whose path contains a known hitting set are closed,
    nodes with an identical path are reused, and when a label turns out to be
    a proper superset of another label it is relabeled and the surplus
    branches are pruned.

    :returns: list of frozensets in canonical order.
    """
    if max_cardinality < 1:
        raise ValueError(f"max_cardinality must be >= 1, got {max_cardinality}")
    collection = _check_conflicts(conflicts)

    root = _Node(frozenset())
    by_path = {root.path: root}
    labeled = []
    hitting = []
    queue = deque([root])

    def remove_subtree(node):
        stack = [node]
        while stack:
            n = stack.pop()
            if n.status == "removed" or n.parents:
                continue
            n.status = "removed"
            by_path.pop(n.path, None)
            for child in n.children.values():
                child.parents.discard(n)
                stack.append(child)
            n.children = {}

    def prune(label):
        for other in list(labeled):
            if other.status != "labeled" or not label < other.label:
                continue
            for comp in other.label - label:
                child = other.children.pop(comp, None)
                if child is not None:
                    child.parents.discard(other)
                    remove_subtree(child)
            other.label = label
        collection[:] = [c for c in collection if not label < c]

    while queue:
        node = queue.popleft()
        if node.status != "open":
            continue
        if any(h.path <= node.path for h in hitting if h.status == "hs"):
            node.status = "closed"
            continue
        label = next((c for c in collection if not (c & node.path)), None)
        if label is None:
            node.status = "hs"
            hitting.append(node)
            continue
        node.label = label
        node.status = "labeled"
        labeled.append(node)
        prune(label)
        if node.status == "removed":
            continue
        if node.depth >= max_cardinality:
            continue
        for comp in sorted(node.label, key=_key):
            path = node.path | {comp}
            child = by_path.get(path)
            if child is None:
                child = _Node(path)
                by_path[path] = child
                queue.append(child)
            node.children[comp] = child
            child.parents.add(node)

    return canonical(h.path for h in hitting if h.status == "hs")


def brute_force_hitting_sets(conflicts, max_cardinality=2, max_universe=20):
    """Reference enumeration of all minimal hitting sets up to ``max_cardinality``."""
    collection = _check_conflicts(conflicts)
    universe = sorted(set().union(*collection) if collection else set(), key=_key)
    if len(universe) > max_universe:
        raise ValueError(f"universe of {len(universe)} components exceeds {max_universe}")
    found = []
    for size in range(0, max_cardinality + 1):
        for combo in itertools.combinations(universe, size):
            cand = frozenset(combo)
            if any(f <= cand for f in found):
                continue
            if all(cand & c for c in collection):
                found.append(cand)
    return canonical(found)


def is_hitting_set(candidate, conflicts):
    candidate = frozenset(candidate)
    return all(candidate & frozenset(c) for c in conflicts)


def alarmed_pairs_at(traces, position):
    """Pairs alarming at trace position ``position`` (traces share one timeline)."""
    return [tr.pair for tr in traces if tr.alarms[position]]


def alarmed_pairs_between(traces, t_start, t_end):
    """Pairs alarming at any time stamp in ``[t_start, t_end]``."""
    out = []
    for tr in traces:
        sel = (tr.timestamps >= t_start) & (tr.timestamps <= t_end)
        if np.any(tr.alarms[sel]):
            out.append(tr.pair)
    return out


def persistent_state(traces, min_duration):
    """The alarm state that dominates the run, ignoring transient ones.

    An alarm state is the set of pairs alarming at one trace position. Only
    non-empty states holding for at least ``min_duration`` consecutive
    positions qualify; among those, the state occupying the most positions
    wins (earliest first occurrence on ties).

    :returns: ``(position, pairs)`` for the first position of the winner's
        longest run, or None.
    """
    if not traces:
        return None
    alarms = np.array([tr.alarms for tr in traces])
    states = [tuple(np.flatnonzero(col)) for col in alarms.T]
    counts = {}
    runs = {}
    run_start = 0
    for pos, state in enumerate(states):
        if pos and state != states[pos - 1]:
            run_start = pos
        if not state:
            continue
        counts[state] = counts.get(state, 0) + 1
        length = pos - run_start + 1
        best = runs.get(state)
        if best is None or length > best[1]:
            runs[state] = (run_start, length)
    qualified = [st for st, (_, length) in runs.items() if length >= min_duration]
    if not qualified:
        return None
    first_seen = {st: states.index(st) for st in qualified}
    winner = min(qualified, key=lambda st: (-counts[st], first_seen[st]))
    return runs[winner][0], [traces[i].pair for i in winner]


def diagnose_traces(traces, max_cardinality=2, at=None, interval=None, min_duration=1):
    """Diagnosis record for a set of alarm traces sharing one timeline.

    ``interval=(t0, t1)`` unions the pairs alarming anywhere in the interval;
    ``at=t`` takes the alarm state at the last trace time stamp not after
    ``t``; otherwise the state chosen by :func:`persistent_state` is used.

    :returns: dict with keys mode, time, conflicts, diagnoses, max_cardinality.
    """
    traces = list(traces)
    if interval is not None:
        mode = "interval"
        t0, t1 = interval
        pairs = alarmed_pairs_between(traces, t0, t1)
        time = [float(t0), float(t1)]
    elif at is not None:
        mode = "snapshot"
        pairs, time = [], float(at)
        if traces:
            pos = int(np.searchsorted(traces[0].timestamps, at, side="right")) - 1
            if pos < 0:
                raise ValueError(f"time {at} precedes the first residual")
            pairs = alarmed_pairs_at(traces, pos)
            time = float(traces[0].timestamps[pos])
    else:
        mode = "persistent"
        found = persistent_state(traces, min_duration)
        if found is None:
            pairs, time = [], None
        else:
            pos, pairs = found
            time = float(traces[0].timestamps[pos])
    conflicts = conflicts_at(pairs)
    diagnoses = hs_dag(conflicts, max_cardinality) if conflicts else []
    return {
        "mode": mode,
        "time": time,
        "conflicts": [sorted(c, key=_key) for c in conflicts],
        "diagnoses": [sorted(d, key=_key) for d in diagnoses],
        "max_cardinality": max_cardinality,
    }
