"""Pomset-labelled transition systems and their event-level unfoldings.

A Plts is a finite reachable fragment: indexed states (optionally carrying
their originating closed terms), pomset-labelled transitions, unary state
predicates, an initial state, and a truncation flag.

``unfold`` produces a tree-shaped configuration structure: nodes are
configurations (executed-event posets paired with the underlying state) and
edges execute one transition's worth of events.  Cross-transition order is
either strict (every earlier event below every later one) or granular
(adjacent primitive transitions that commute via a diamond in the Plts leave
their events unordered).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import pomset as pm
from . import term as tm
from .pomset import Pomset
from .term import Term


class PltsError(ValueError):
    """Malformed transition system or configuration query."""


@dataclass(frozen=True)
class Plts:
    num_states: int
    transitions: frozenset  # of (src, Pomset, dst)
    predicates: frozenset  # of (state, name)
    initial: int
    terms: tuple = ()  # optional originating closed terms (or None entries)
    truncated: bool = False

    def __post_init__(self):
        for s, _, d in self.transitions:
            if not (0 <= s < self.num_states and 0 <= d < self.num_states):
                raise PltsError("transition endpoint is not a declared state")
        for s, _ in self.predicates:
            if not 0 <= s < self.num_states:
                raise PltsError("predicate subject is not a declared state")
        if self.num_states and not 0 <= self.initial < self.num_states:
            raise PltsError("initial state is not declared")

    def states(self) -> range:
        return range(self.num_states)

    def out(self, s: int) -> list[tuple[Pomset, int]]:
        return sorted(((lab, dst) for src, lab, dst in self.transitions if src == s),
                      key=lambda e: (e[0].sort_key(), e[1]))

    def preds_of(self, s: int) -> frozenset:
        return frozenset(name for st, name in self.predicates if st == s)

    def enabled(self, s: int, steps_only: bool = False) -> frozenset:
        labs = {lab for src, lab, _ in self.transitions if src == s}
        if steps_only:
            labs = {lab for lab in labs if lab.is_step()}
        return frozenset(labs)

    def labels(self) -> frozenset:
        return frozenset(lab for _, lab, _ in self.transitions)

    def pred_names(self) -> frozenset:
        return frozenset(name for _, name in self.predicates)


@dataclass(frozen=True)
class InitialSet:
    pomsets: frozenset
    predicates: frozenset

    def is_empty(self) -> bool:
        return not self.pomsets and not self.predicates

    def as_key(self) -> frozenset:
        return frozenset((("pom", p) for p in self.pomsets)) | frozenset(
            ("pred", n) for n in self.predicates)


def initial_set(p: Plts, s: int) -> InitialSet:
    if not 0 <= s < p.num_states:
        raise PltsError(f"unknown state {s}")
    return InitialSet(pomsets=p.enabled(s), predicates=p.preds_of(s))


@dataclass(frozen=True)
class FinitenessReport:
    finitely_branching: bool
    regular: bool
    finite: bool
    exact: bool  # False when the input was truncated: results are lower bounds


def finiteness(p: Plts) -> FinitenessReport:
    """Finiteness of the materialized fragment; acyclicity decides finiteness."""
    succ = {s: set() for s in p.states()}
    for src, _, dst in p.transitions:
        succ[src].add(dst)
    color = {}

    def cyclic(s: int) -> bool:
        color[s] = 1
        for d in succ[s]:
            c = color.get(d)
            if c == 1 or (c is None and cyclic(d)):
                return True
        color[s] = 2
        return False

    acyclic = not any(cyclic(s) for s in p.states() if s not in color)
    return FinitenessReport(
        finitely_branching=True,
        regular=True,
        finite=acyclic,
        exact=not p.truncated,
    )


def reachable(p: Plts, start: Optional[int] = None) -> list[int]:
    start = p.initial if start is None else start
    seen = {start}
    todo = [start]
    while todo:
        s = todo.pop()
        for _, d in p.out(s):
            if d not in seen:
                seen.add(d)
                todo.append(d)
    return sorted(seen)


def is_acyclic(p: Plts) -> bool:
    return finiteness(p).finite


def acyclic_depth(p: Plts) -> int:
    """Longest path length from the initial state (acyclic systems only)."""
    if not is_acyclic(p):
        raise PltsError("depth of a cyclic system is unbounded")
    memo: dict[int, int] = {}

    def d(s: int) -> int:
        if s not in memo:
            memo[s] = max((1 + d(t) for _, t in p.out(s)), default=0)
        return memo[s]

    return d(p.initial)


# -- configuration structures --------------------------------------------------


@dataclass(frozen=True)
class ConfigNode:
    nid: int
    events: frozenset  # event ids
    order: frozenset  # strict causal order on events, transitively closed
    state: int
    parent: Optional[int]
    depth: int


@dataclass(frozen=True)
class ConfigTransition:
    src: int
    chunk: tuple  # event ids executed by this transition, canonical order
    label: Pomset
    dst: int


@dataclass(frozen=True)
class ConfigStructure:
    plts: Plts
    mode: str  # "strict" | "granular"
    nodes: tuple
    transitions: tuple
    event_labels: tuple  # label of event i
    truncated: bool

    @property
    def root(self) -> int:
        return 0

    def out(self, nid: int) -> list[ConfigTransition]:
        return [t for t in self.transitions if t.src == nid]

    def node(self, nid: int) -> ConfigNode:
        return self.nodes[nid]

    def preds_of(self, nid: int) -> frozenset:
        return self.plts.preds_of(self.nodes[nid].state)

    def enabled(self, nid: int) -> frozenset:
        return frozenset(t.label for t in self.out(nid))

    def label_of(self, event: int) -> str:
        return self.event_labels[event]

    def introduced_at(self, event: int) -> int:
        """The node created by the transition that introduced this event."""
        for t in self.transitions:
            if event in t.chunk:
                return t.dst
        raise PltsError(f"unknown event {event}")

    def subtree_events(self, nid: int) -> list[int]:
        """Events introduced strictly below the given node."""
        out = []
        todo = [nid]
        while todo:
            n = todo.pop()
            for t in self.out(n):
                out.extend(t.chunk)
                todo.append(t.dst)
        return sorted(out)

    def ancestors(self, nid: int) -> list[int]:
        """Path from the root to the node, inclusive."""
        path = [nid]
        while self.nodes[path[-1]].parent is not None:
            path.append(self.nodes[path[-1]].parent)
        return list(reversed(path))

    def config_pomset(self, nid: int) -> Pomset:
        node = self.nodes[nid]
        return pm.of({e: self.event_labels[e] for e in node.events},
                     [p for p in node.order])

    def alphabet(self) -> frozenset:
        return frozenset(self.event_labels)


def _commutes(p: Plts, s: int, u: Pomset, mid: int, v: Pomset, t: int) -> bool:
    """Diamond test: s -u-> mid -v-> t also admits s -v-> ? -u-> t."""
    for lab1, m2 in p.out(s):
        if lab1 != v:
            continue
        for lab2, end in p.out(m2):
            if lab2 == u and end == t:
                return True
    return False


def unfold(p: Plts, depth: int, mode: str = "strict") -> ConfigStructure:
    """Tree-shaped unfolding of the reachable fragment to the given depth."""
    if mode not in ("strict", "granular"):
        raise PltsError(f"unknown unfolding mode {mode!r}")
    nodes = [ConfigNode(0, frozenset(), frozenset(), p.initial, None, 0)]
    transitions: list[ConfigTransition] = []
    event_labels: list[str] = []
    # last chunk executed on the path to each node, with its label
    last_chunk: dict[int, tuple[tuple, Pomset, int]] = {}
    truncated = p.truncated
    todo = [0]
    while todo:
        nid = todo.pop(0)
        node = nodes[nid]
        if node.depth >= depth:
            if p.out(node.state):
                truncated = True
            continue
        for lab, dst in p.out(node.state):
            fresh = list(range(len(event_labels), len(event_labels) + len(lab.labels)))
            event_labels.extend(lab.labels)
            chunk_order = {(fresh[a], fresh[b]) for a, b in lab.order}
            cross = {(e, f) for e in node.events for f in fresh}
            if mode == "granular" and nid in last_chunk and lab.is_primitive():
                prev_chunk, prev_lab, prev_src_state = last_chunk[nid]
                if prev_lab.is_primitive() and _commutes(
                        p, prev_src_state, prev_lab, node.state, lab, dst):
                    cross -= {(e, f) for e in prev_chunk for f in fresh}
            order = pm.transitive_closure(
                node.order | chunk_order | cross,
                node.events | frozenset(fresh))
            new = ConfigNode(len(nodes), node.events | frozenset(fresh), order,
                             dst, nid, node.depth + 1)
            nodes.append(new)
            transitions.append(ConfigTransition(nid, tuple(fresh), lab, new.nid))
            last_chunk[new.nid] = (tuple(fresh), lab, node.state)
            todo.append(new.nid)
    return ConfigStructure(plts=p, mode=mode, nodes=tuple(nodes),
                           transitions=tuple(transitions),
                           event_labels=tuple(event_labels), truncated=truncated)


# -- serialization ----------------------------------------------------------------


def to_json(p: Plts) -> dict:
    states = []
    for s in p.states():
        entry: dict = {"id": s}
        if s < len(p.terms) and p.terms[s] is not None:
            entry["term"] = tm.render(p.terms[s])
        states.append(entry)
    out = {
        "states": states,
        "initial": p.initial,
        "transitions": [
            {"from": src, "pomset": pm.to_json(lab), "to": dst}
            for src, lab, dst in sorted(
                p.transitions, key=lambda e: (e[0], e[1].sort_key(), e[2]))
        ],
        "predicates": [
            {"state": s, "name": n} for s, n in sorted(p.predicates)
        ],
    }
    if p.truncated:
        out["truncated"] = True
    return out


def dumps(p: Plts) -> str:
    return json.dumps(to_json(p), indent=2, sort_keys=True)


def from_json(obj: dict) -> Plts:
    ids = [s["id"] for s in obj["states"]]
    if sorted(ids) != list(range(len(ids))):
        raise PltsError("state ids must be 0..n-1")
    transitions = frozenset(
        (t["from"], pm.from_json(t["pomset"]), t["to"]) for t in obj.get("transitions", []))
    predicates = frozenset((q["state"], q["name"]) for q in obj.get("predicates", []))
    return Plts(
        num_states=len(ids),
        transitions=transitions,
        predicates=predicates,
        initial=obj["initial"],
        terms=(),
        truncated=bool(obj.get("truncated", False)),
    )


def loads(text: str) -> Plts:
    return from_json(json.loads(text))


def to_dot(p: Plts) -> str:
    lines = ["digraph plts {", "  rankdir=LR;"]
    for s in p.states():
        preds = sorted(p.preds_of(s))
        label = str(s)
        if s < len(p.terms) and p.terms[s] is not None:
            label = f"{s}: {tm.render(p.terms[s])}"
        if preds:
            label += "\\n[" + ", ".join(preds) + "]"
        shape = "doublecircle" if preds else "circle"
        init = ", style=bold" if s == p.initial else ""
        lines.append(f'  n{s} [label="{label}", shape={shape}{init}];')
    for src, lab, dst in sorted(p.transitions,
                                key=lambda e: (e[0], e[1].sort_key(), e[2])):
        lines.append(f'  n{src} -> n{dst} [label="{pm.render(lab)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def union(p1: Plts, p2: Plts) -> tuple[Plts, int]:
    """Disjoint union; returns the combined system and p2's state offset."""
    off = p1.num_states
    transitions = set(p1.transitions) | {(s + off, lab, d + off)
                                         for s, lab, d in p2.transitions}
    predicates = set(p1.predicates) | {(s + off, n) for s, n in p2.predicates}
    terms = tuple(p1.terms) + tuple(None for _ in range(off - len(p1.terms)))
    terms2 = tuple(p2.terms) + tuple(None for _ in range(p2.num_states - len(p2.terms)))
    return Plts(
        num_states=p1.num_states + p2.num_states,
        transitions=frozenset(transitions),
        predicates=frozenset(predicates),
        initial=p1.initial,
        terms=terms + terms2,
        truncated=p1.truncated or p2.truncated,
    ), off
