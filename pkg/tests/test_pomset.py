"""Pomset algebra tests.

Claims covered:
    - canonicalization is relabelling-invariant and idempotent
    - iso agrees with an exhaustive bijection search
    - par/seq obey unit, commutativity and associativity laws
    - factorizations recompose, are unique, and match brute-force split oracles
    - classification is exclusive and consistent with factor counts
    - first_step splits the minimal layer and flags non-layered pomsets
"""

import itertools
import random

import pytest

from pomsetsos import pomset
from pomsetsos.pomset import EMPTY, Pomset, Poset, PomsetError, primitive

import genutil


def P(*args, **kwargs):
    return pomset.of(*args, **kwargs)


A, B, C = primitive("a"), primitive("b"), primitive("c")
AB_SEQ = pomset.seq(A, B)
AB_PAR = pomset.par(A, B)
N_POMSET = P({1: "a", 2: "b", 3: "c", 4: "d"}, [(1, 3), (2, 3), (2, 4)])


def test_singleton_relabelling():
    assert pomset.canonicalize(Poset.make({"e7": "a"})) == primitive("a")


def test_isomorphic_chains_equal():
    p = P({"x": "a", "y": "b"}, [("x", "y")])
    q = P({"p": "a", "q": "b"}, [("p", "q")])
    assert p == q == AB_SEQ


def test_same_label_chain_permutation_independent():
    posets = [
        Poset.make({"x": "a", "y": "a"}, [("x", "y")]),
        Poset.make({"y": "a", "x": "a"}, [("y", "x")]),
    ]
    canon = {pomset.canonicalize(p) for p in posets}
    assert len(canon) == 1


def test_canonicalize_relabelling_invariant_random():
    rng = random.Random(7)
    for _ in range(60):
        p = genutil.random_poset(rng, 6)
        base = pomset.canonicalize(p)
        # shuffle event identities a few times
        for k in range(3):
            ids = sorted(p.events, key=repr)
            new = [f"w{k}_{i}" for i in range(len(ids))]
            rng.shuffle(new)
            m = dict(zip(ids, new))
            q = Poset.make({m[e]: p.label_of(e) for e in ids},
                           [(m[a], m[b]) for a, b in p.order])
            assert pomset.canonicalize(q) == base
        # idempotence: canonical form canonicalizes to itself
        assert pomset.canonicalize(pomset.as_poset(base)) == base


def test_iso_examples():
    pa = Poset.make({"x": "a"})
    assert pomset.iso(pa, pa) == {"x": "x"}
    seq_p = Poset.make({"x": "a", "y": "b"}, [("x", "y")])
    par_p = Poset.make({"x": "a", "y": "b"})
    assert pomset.iso(seq_p, par_p) is None
    p = Poset.make({"x": "a", "y": "a"}, [("x", "y")])
    q = Poset.make({"u": "a", "v": "a"}, [("u", "v")])
    got = pomset.iso(p, q)
    assert got == {"x": "u", "y": "v"}  # the only order-preserving bijection


def test_iso_matches_brute_force_random():
    rng = random.Random(11)
    for _ in range(60):
        p = genutil.random_poset(rng, 4)
        q = genutil.random_poset(rng, 4)
        got = pomset.iso(p, q)
        ref = genutil.brute_iso(p, q)
        assert (got is None) == (ref is None)
        if got is not None:
            # returned bijection preserves labels and order both ways
            assert all(p.label_of(e) == q.label_of(got[e]) for e in p.events)
            inv = {v: k for k, v in got.items()}
            assert all(((got[a], got[b]) in q.order) == ((a, b) in p.order)
                       for a in p.events for b in p.events)
            assert len(inv) == len(got)


def test_iso_with_own_canonical_rep():
    rng = random.Random(13)
    for _ in range(40):
        p = genutil.random_poset(rng, 6)
        rep = pomset.as_poset(pomset.canonicalize(p))
        assert pomset.iso(p, rep) is not None


def test_par_examples():
    assert pomset.par(EMPTY, AB_SEQ) == AB_SEQ
    assert pomset.par(A, B) == P({1: "a", 2: "b"})
    got = pomset.par(AB_SEQ, A)
    assert len(got) == 3 and len(got.order) == 1


def test_seq_examples():
    assert pomset.seq(EMPTY, AB_PAR) == AB_PAR
    assert pomset.seq(AB_PAR, EMPTY) == AB_PAR
    assert pomset.seq(A, B) == P({1: "a", 2: "b"}, [(1, 2)])
    got = pomset.seq(AB_PAR, C)
    # both a<c and b<c
    assert len(got.order) == 2
    assert all(got.labels[b] == "c" for _, b in got.order)


def test_algebraic_laws_random():
    rng = random.Random(17)
    for _ in range(50):
        u = genutil.random_pomset(rng, 4)
        v = genutil.random_pomset(rng, 4)
        w = genutil.random_pomset(rng, 3)
        assert pomset.par(u, v) == pomset.par(v, u)
        assert pomset.par(pomset.par(u, v), w) == pomset.par(u, pomset.par(v, w))
        assert pomset.seq(pomset.seq(u, v), w) == pomset.seq(u, pomset.seq(v, w))
        assert pomset.par(EMPTY, u) == u
        assert pomset.seq(EMPTY, u) == u == pomset.seq(u, EMPTY)


def test_classify_examples():
    assert pomset.classify(EMPTY) == "empty"
    assert pomset.classify(A) == "primitive"
    assert pomset.classify(AB_SEQ) == "sequential"
    assert pomset.classify(AB_PAR) == "parallel"
    assert pomset.classify(N_POMSET) == "prime-compound"
    # brute force: the N pomset admits no seq or par bipartition
    assert genutil.brute_seq_splits(N_POMSET) == []
    assert genutil.brute_par_splits(N_POMSET) == []


def test_seq_factorize_examples():
    abc = pomset.seq_all([A, B, C])
    assert pomset.seq_factorize(abc) == [A, B, C]
    assert pomset.seq_factorize(AB_PAR) == [AB_PAR]
    got = pomset.seq_factorize(pomset.seq(AB_PAR, C))
    assert got == [AB_PAR, C]
    with pytest.raises(PomsetError):
        pomset.seq_factorize(EMPTY)


def test_par_factorize_examples():
    abc_par = pomset.par_all([A, B, C])
    assert pomset.par_factorize(abc_par) == (A, B, C)
    assert pomset.par_factorize(AB_SEQ) == (AB_SEQ,)
    assert pomset.par_factorize(pomset.par(AB_SEQ, C)) == tuple(
        sorted([AB_SEQ, C], key=Pomset.sort_key))
    with pytest.raises(PomsetError):
        pomset.par_factorize(EMPTY)


def test_factorizations_random_vs_oracle():
    rng = random.Random(23)
    for _ in range(80):
        p = genutil.random_pomset(rng, 6, min_events=1)
        sf = pomset.seq_factorize(p)
        pf = pomset.par_factorize(p)
        assert pomset.seq_all(sf) == p
        assert pomset.par_all(pf) == p
        assert all(not f.is_empty() for f in sf + list(pf))
        assert all(not genutil.brute_seq_splits(f) for f in sf)
        assert all(not genutil.brute_par_splits(f) for f in pf)
        assert sf == genutil.brute_seq_factorize(p)
        assert list(pf) == genutil.brute_par_factorize(p)
        # classification consistency
        cls = pomset.classify(p)
        assert (cls == "sequential") == (len(sf) >= 2)
        assert (cls == "parallel") == (len(pf) >= 2)


def test_first_step_examples():
    step, rest, layered = pomset.first_step(AB_SEQ)
    assert (step, rest, layered) == (A, B, True)
    step, rest, layered = pomset.first_step(AB_PAR)
    assert (step, rest, layered) == (AB_PAR, EMPTY, True)
    step, rest, layered = pomset.first_step(N_POMSET)
    assert step == AB_PAR
    assert rest == pomset.par(primitive("c"), primitive("d"))
    assert layered is False
    with pytest.raises(PomsetError):
        pomset.first_step(EMPTY)


def test_is_step_iff_first_step_rest_empty():
    rng = random.Random(29)
    for _ in range(60):
        p = genutil.random_pomset(rng, 5, min_events=1)
        assert p.is_step() == pomset.first_step(p)[1].is_empty()


def test_render_roundtrip_stable():
    assert pomset.render(EMPTY) == "{}"
    assert pomset.render(A) == "a"
    assert pomset.render(AB_SEQ) == "{e0:a, e1:b | e0<e1}"
    # canonical print of the same pomset built two ways is identical
    p1 = P({"x": "b", "y": "a"}, [("y", "x")])
    p2 = P({9: "a", 3: "b"}, [(9, 3)])
    assert pomset.render(p1) == pomset.render(p2)


def test_json_roundtrip():
    rng = random.Random(31)
    for _ in range(30):
        p = genutil.random_pomset(rng, 5)
        assert pomset.from_json(pomset.to_json(p)) == p


def test_invalid_inputs():
    with pytest.raises(PomsetError):
        Poset.make({"x": "a"}, [("x", "x")])
    with pytest.raises(PomsetError):
        Poset.make({"x": "a", "y": "a"}, [("x", "y"), ("y", "x")])
    with pytest.raises(PomsetError):
        Poset.make({"x": "bad token"})
    with pytest.raises(PomsetError):
        Poset.make({"x": "a"}, [("x", "z")])
