"""Finite labelled partial orders and their canonical isomorphism classes.

A pomset is the isomorphism class of a finite poset whose elements are
occurrences of actions.  This module stores the *strict* order (irreflexive,
transitively closed); the reflexive order is its reflexive closure.  Every
``Pomset`` value is the canonical representative of its class: events are
numbered ``0..n-1`` sorted by ``(label, order-theoretic rank)`` with ties
broken by a minimal-encoding search, so equal pomsets compare and hash equal
and the printed form is byte-stable across runs.

The two reserved action names are ``tau`` (silent step) and ``sigma`` (time
tick).  ``sigma`` may never occur inside a pomset used as a process constant;
it only arises as a transition label of delay rules.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

TAU = "tau"
SIGMA = "sigma"
RESERVED_ACTIONS = frozenset({TAU, SIGMA})

_ACTION_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


class PomsetError(ValueError):
    """Malformed poset or pomset construction."""


def check_action(name: str) -> str:
    """Validate an action token: nonempty identifier, no punctuation."""
    if not _ACTION_RE.match(name):
        raise PomsetError(f"invalid action token: {name!r}")
    return name


def transitive_closure(pairs: Iterable[tuple], elements: Iterable) -> frozenset:
    """Transitive closure of a relation restricted to the given elements."""
    elems = list(elements)
    succ = {e: set() for e in elems}
    for a, b in pairs:
        if a not in succ or b not in succ:
            raise PomsetError(f"order pair {(a, b)!r} mentions unknown event")
        succ[a].add(b)
    changed = True
    while changed:
        changed = False
        for a in elems:
            extra = set()
            for b in succ[a]:
                extra |= succ[b] - succ[a]
            if extra:
                succ[a] |= extra
                changed = True
    return frozenset((a, b) for a in elems for b in succ[a])


@dataclass(frozen=True)
class Poset:
    """A concrete labelled poset with opaque event identities.

    ``order`` is strict and transitively closed; use :func:`Poset.make` to
    build one from arbitrary (acyclic) pairs.
    """

    events: frozenset
    labels: tuple  # sorted tuple of (event, label) pairs; see label_of()
    order: frozenset

    @staticmethod
    def make(labels: Mapping, pairs: Iterable[tuple] = ()) -> "Poset":
        events = frozenset(labels)
        for lab in labels.values():
            check_action(lab)
        closed = transitive_closure(pairs, events)
        for a, b in closed:
            if a == b or (b, a) in closed:
                raise PomsetError("order must be irreflexive and antisymmetric (cycle found)")
        label_items = tuple(sorted(labels.items(), key=lambda kv: repr(kv[0])))
        return Poset(events=events, labels=label_items, order=closed)

    def label_of(self, event) -> str:
        for e, lab in self.labels:
            if e == event:
                return lab
        raise KeyError(event)

    def label_map(self) -> dict:
        return dict(self.labels)


@dataclass(frozen=True, order=True)
class Pomset:
    """Canonical representative: events ``0..n-1``, strict closed order."""

    labels: tuple[str, ...]
    order: frozenset

    def __post_init__(self):
        object.__setattr__(self, "order", frozenset(self.order))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def actions(self) -> frozenset:
        return frozenset(self.labels)

    def is_empty(self) -> bool:
        return not self.labels

    def is_primitive(self) -> bool:
        return len(self.labels) == 1

    def is_step(self) -> bool:
        """Events pairwise concurrent: no internal order at all."""
        return not self.order

    def is_silent(self) -> bool:
        """Nonempty and every event is labelled tau."""
        return bool(self.labels) and all(lab == TAU for lab in self.labels)

    def below(self, i: int) -> frozenset:
        return frozenset(a for a, b in self.order if b == i)

    def sort_key(self) -> tuple:
        return (len(self.labels), self.labels, tuple(sorted(self.order)))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Pomset({render(self)!r})"


EMPTY = Pomset(labels=(), order=frozenset())


def primitive(action: str) -> Pomset:
    check_action(action)
    return Pomset(labels=(action,), order=frozenset())


def _heights(n: int, order: frozenset) -> list[int]:
    h = [0] * n
    # order is transitively closed, so height = max over direct predecessors
    changed = True
    while changed:
        changed = False
        for a, b in order:
            if h[b] < h[a] + 1:
                h[b] = h[a] + 1
                changed = True
    return h


def _refine_colors(labels: Sequence[str], order: frozenset) -> list[str]:
    """Iterated invariant refinement; color strings sort by (label, height) first."""
    n = len(labels)
    heights = _heights(n, order)
    colors = [f"{labels[i]}|{heights[i]:04d}" for i in range(n)]
    preds = {i: [a for a, b in order if b == i] for i in range(n)}
    succs = {i: [b for a, b in order if a == i] for i in range(n)}
    for _ in range(n):
        nxt = [
            colors[i]
            + "<" + ",".join(sorted(colors[j] for j in preds[i]))
            + ">" + ",".join(sorted(colors[j] for j in succs[i]))
            for i in range(n)
        ]
        if len(set(nxt)) == len(set(colors)):
            colors = nxt
            break
        colors = nxt
    return colors


def _canonical_positions(labels: Sequence[str], order: frozenset) -> list[int]:
    """Position of each event in the canonical numbering.

    Events are grouped by an iso-invariant color whose leading components are
    (label, height); within a color group all placements are tried and the
    one minimising the encoded order relation wins.
    """
    n = len(labels)
    colors = _refine_colors(labels, order)
    groups: dict[str, list[int]] = {}
    for i in range(n):
        groups.setdefault(colors[i], []).append(i)
    ordered_groups = [groups[c] for c in sorted(groups)]
    base = 0
    slot_ranges = []
    for g in ordered_groups:
        slot_ranges.append((g, base))
        base += len(g)

    best_pairs: Optional[tuple] = None
    best_pos: Optional[list[int]] = None
    perms_per_group = [itertools.permutations(g) for g, _ in slot_ranges]
    for combo in itertools.product(*perms_per_group):
        pos = [0] * n
        for (g, start), perm in zip(slot_ranges, combo):
            for offset, event in enumerate(perm):
                pos[event] = start + offset
        pairs = tuple(sorted((pos[a], pos[b]) for a, b in order))
        if best_pairs is None or pairs < best_pairs:
            best_pairs = pairs
            best_pos = pos
    assert best_pos is not None
    return best_pos


def canonicalize(poset: Poset) -> Pomset:
    """Canonical representative; isomorphic posets map to equal pomsets."""
    events = sorted(poset.events, key=repr)
    lmap = poset.label_map()
    labels = [lmap[e] for e in events]
    index = {e: i for i, e in enumerate(events)}
    order = frozenset((index[a], index[b]) for a, b in poset.order)
    pos = _canonical_positions(labels, order)
    out_labels = [""] * len(events)
    for i, p in enumerate(pos):
        out_labels[p] = labels[i]
    out_order = frozenset((pos[a], pos[b]) for a, b in order)
    return Pomset(labels=tuple(out_labels), order=out_order)


def canonical_event_map(poset: Poset) -> dict:
    """Map from the poset's events to their canonical positions."""
    events = sorted(poset.events, key=repr)
    lmap = poset.label_map()
    labels = [lmap[e] for e in events]
    index = {e: i for i, e in enumerate(events)}
    order = frozenset((index[a], index[b]) for a, b in poset.order)
    pos = _canonical_positions(labels, order)
    return {e: pos[index[e]] for e in events}


def of(labels: Mapping, pairs: Iterable[tuple] = ()) -> Pomset:
    """Build a canonical pomset straight from labels and order pairs."""
    return canonicalize(Poset.make(labels, pairs))


def as_poset(p: Pomset) -> Poset:
    return Poset.make({i: lab for i, lab in enumerate(p.labels)}, p.order)


def iso(p: Poset, q: Poset) -> Optional[dict]:
    """A label- and order-preserving bijection p -> q, or None."""
    cp, cq = canonicalize(p), canonicalize(q)
    if cp != cq:
        return None
    mp = canonical_event_map(p)
    mq_inv = {pos: e for e, pos in canonical_event_map(q).items()}
    return {e: mq_inv[pos] for e, pos in mp.items()}


def par(u: Pomset, v: Pomset) -> Pomset:
    """Parallel composition: disjoint union of carriers and orders."""
    n = len(u.labels)
    labels = u.labels + v.labels
    order = set(u.order) | {(a + n, b + n) for a, b in v.order}
    pos = _canonical_positions(labels, frozenset(order))
    out = [""] * len(labels)
    for i, p in enumerate(pos):
        out[p] = labels[i]
    return Pomset(tuple(out), frozenset((pos[a], pos[b]) for a, b in order))


def seq(u: Pomset, v: Pomset) -> Pomset:
    """Sequential composition: union plus all cross pairs."""
    n = len(u.labels)
    labels = u.labels + v.labels
    order = set(u.order) | {(a + n, b + n) for a, b in v.order}
    order |= {(a, b + n) for a in range(n) for b in range(len(v.labels))}
    pos = _canonical_positions(labels, frozenset(order))
    out = [""] * len(labels)
    for i, p in enumerate(pos):
        out[p] = labels[i]
    return Pomset(tuple(out), frozenset((pos[a], pos[b]) for a, b in order))


def par_all(parts: Iterable[Pomset]) -> Pomset:
    acc = EMPTY
    for p in parts:
        acc = par(acc, p)
    return acc


def seq_all(parts: Iterable[Pomset]) -> Pomset:
    acc = EMPTY
    for p in parts:
        acc = seq(acc, p)
    return acc


def _components(n: int, edges: set[tuple[int, int]]) -> list[list[int]]:
    """Connected components (as sorted lists) of an undirected graph on 0..n-1."""
    adj = {i: set() for i in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen: set[int] = set()
    comps = []
    for start in range(n):
        if start in seen:
            continue
        todo = [start]
        comp = []
        while todo:
            x = todo.pop()
            if x in seen:
                continue
            seen.add(x)
            comp.append(x)
            todo.extend(adj[x] - seen)
        comps.append(sorted(comp))
    return comps


def _induced(p: Pomset, events: Sequence[int]) -> Pomset:
    idx = {e: i for i, e in enumerate(events)}
    labels = {i: p.labels[e] for e, i in idx.items()}
    pairs = [(idx[a], idx[b]) for a, b in p.order if a in idx and b in idx]
    return of(labels, pairs)


def seq_factorize(p: Pomset) -> list[Pomset]:
    """Unique factorization into nonempty non-sequential factors.

    The factors are the connected components of the incomparability graph,
    linearly ordered by the pomset order.
    """
    if p.is_empty():
        raise PomsetError("empty pomset has no sequential factorization")
    n = len(p.labels)
    comparable = set(p.order) | {(b, a) for a, b in p.order}
    incomp = {(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in comparable}
    comps = _components(n, incomp)

    def rank(comp: list[int]) -> int:
        # components carry full cross order, so the number of predecessors
        # outside the component is the total size of all earlier components
        inside = set(comp)
        return sum(1 for a, b in p.order if b == comp[0] and a not in inside)

    comps.sort(key=rank)
    return [_induced(p, c) for c in comps]


def par_factorize(p: Pomset) -> tuple[Pomset, ...]:
    """Unique multiset of nonempty non-parallel factors.

    The factors are the connected components of the comparability graph,
    returned as a canonically sorted tuple.
    """
    if p.is_empty():
        raise PomsetError("empty pomset has no parallel factorization")
    comps = _components(len(p.labels), {(a, b) for a, b in p.order})
    factors = [_induced(p, c) for c in comps]
    factors.sort(key=Pomset.sort_key)
    return tuple(factors)


def classify(p: Pomset) -> str:
    """One of: empty, primitive, sequential, parallel, prime-compound."""
    if p.is_empty():
        return "empty"
    if p.is_primitive():
        return "primitive"
    if len(seq_factorize(p)) >= 2:
        return "sequential"
    if len(par_factorize(p)) >= 2:
        return "parallel"
    return "prime-compound"


def first_step(p: Pomset) -> tuple[Pomset, Pomset, bool]:
    """Split off the minimal layer.

    Returns ``(step, rest, layered)``: the induced sub-pomset on order-minimal
    events (always a step), the induced sub-pomset on the remaining events,
    and whether iterating this split and recomposing with ``seq`` rebuilds the
    original pomset (false exactly for non-layered pomsets such as the N).
    """
    if p.is_empty():
        raise PomsetError("empty pomset has no first step")
    n = len(p.labels)
    minimal = [i for i in range(n) if not p.below(i)]
    rest_events = [i for i in range(n) if i not in minimal]
    step = _induced(p, minimal)
    rest = _induced(p, rest_events)
    layers = [step]
    r = rest
    while not r.is_empty():
        s2, r, _ = _split_min(r)
        layers.append(s2)
    layered = seq_all(layers) == p
    return step, rest, layered


def _split_min(p: Pomset) -> tuple[Pomset, Pomset, bool]:
    n = len(p.labels)
    minimal = [i for i in range(n) if not p.below(i)]
    rest_events = [i for i in range(n) if i not in minimal]
    return _induced(p, minimal), _induced(p, rest_events), True


def step_of(p: Pomset) -> Pomset:
    """The minimal layer of p (used to interpret negative premises)."""
    return first_step(p)[0]


def render(p: Pomset) -> str:
    """Canonical literal text: ``{}``, a bare token, or ``{e0:a, ... | e0<e1}``."""
    if p.is_empty():
        return "{}"
    if p.is_primitive():
        return p.labels[0]
    evs = ", ".join(f"e{i}:{lab}" for i, lab in enumerate(p.labels))
    pairs = sorted(p.order)
    if pairs:
        rel = ", ".join(f"e{a}<e{b}" for a, b in pairs)
        return "{" + evs + " | " + rel + "}"
    return "{" + evs + "}"


def to_json(p: Pomset) -> dict:
    return {
        "events": [{"id": f"e{i}", "label": lab} for i, lab in enumerate(p.labels)],
        "order": [[f"e{a}", f"e{b}"] for a, b in sorted(p.order)],
    }


def from_json(obj: dict) -> Pomset:
    labels = {ev["id"]: ev["label"] for ev in obj.get("events", [])}
    pairs = [tuple(pair) for pair in obj.get("order", [])]
    return of(labels, pairs)
