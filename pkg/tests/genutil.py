"""Shared random-object generators and brute-force oracles for the test suite.

Everything is driven by an explicit random.Random so runs are reproducible.
"""

from __future__ import annotations

import itertools
import random
from typing import Optional

from pomsetsos import pomset
from pomsetsos.pomset import Pomset, Poset


def random_poset(rng: random.Random, max_events: int, alphabet: str = "abc",
                 edge_prob: float = 0.35, min_events: int = 0) -> Poset:
    n = rng.randint(min_events, max_events)
    ids = [f"v{i}" for i in range(n)]
    rng.shuffle(ids)
    labels = {e: rng.choice(alphabet) for e in ids}
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                pairs.append((ids[i], ids[j]))
    return Poset.make(labels, pairs)


def random_pomset(rng: random.Random, max_events: int, alphabet: str = "abc",
                  edge_prob: float = 0.35, min_events: int = 0) -> Pomset:
    return pomset.canonicalize(
        random_poset(rng, max_events, alphabet, edge_prob, min_events))


def brute_iso(p: Poset, q: Poset) -> Optional[dict]:
    """Exhaustive search for a label- and order-preserving bijection."""
    pe, qe = sorted(p.events, key=repr), sorted(q.events, key=repr)
    if len(pe) != len(qe):
        return None
    pl, ql = p.label_map(), q.label_map()
    for perm in itertools.permutations(qe):
        m = dict(zip(pe, perm))
        if any(pl[e] != ql[m[e]] for e in pe):
            continue
        fwd = all(((m[a], m[b]) in q.order) == ((a, b) in p.order)
                  for a in pe for b in pe)
        if fwd:
            return m
    return None


def _events(p: Pomset) -> list[int]:
    return list(range(len(p.labels)))


def _induced(p: Pomset, keep: list[int]) -> Pomset:
    return pomset.of({i: p.labels[e] for i, e in enumerate(keep)},
                     [(keep.index(a), keep.index(b)) for a, b in p.order
                      if a in keep and b in keep])


def brute_seq_splits(p: Pomset) -> list[tuple[list[int], list[int]]]:
    """All bipartitions (A, B) with full cross order A x B."""
    evs = _events(p)
    out = []
    for r in range(1, len(evs)):
        for a_set in itertools.combinations(evs, r):
            a, b = list(a_set), [e for e in evs if e not in a_set]
            if all((x, y) in p.order for x in a for y in b):
                out.append((a, b))
    return out


def brute_par_splits(p: Pomset) -> list[tuple[list[int], list[int]]]:
    """All bipartitions (A, B) with no order between A and B."""
    evs = _events(p)
    out = []
    for r in range(1, len(evs)):
        for a_set in itertools.combinations(evs, r):
            a, b = list(a_set), [e for e in evs if e not in a_set]
            clash = any((x, y) in p.order or (y, x) in p.order
                        for x in a for y in b)
            if not clash:
                out.append((a, b))
    return out


def brute_seq_factorize(p: Pomset) -> list[Pomset]:
    """Independent factorization oracle: repeatedly take the smallest cut prefix."""
    if p.is_empty():
        raise ValueError("empty")
    splits = brute_seq_splits(p)
    if not splits:
        return [p]
    a, b = min(splits, key=lambda ab: len(ab[0]))
    return [_induced(p, a)] + brute_seq_factorize(_induced(p, b))


def brute_par_factorize(p: Pomset) -> list[Pomset]:
    if p.is_empty():
        raise ValueError("empty")
    splits = brute_par_splits(p)
    if not splits:
        return [p]
    a, b = min(splits, key=lambda ab: len(ab[0]))
    return sorted([_induced(p, a)] + brute_par_factorize(_induced(p, b)),
                  key=Pomset.sort_key)
