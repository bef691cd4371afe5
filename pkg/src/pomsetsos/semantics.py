"""Proof-theoretic derivation: stable models, provability, stratification.

Transitions of closed terms are computed as the least three-valued stable
model of the rule system over the reachable ground universe, by alternating
fixpoint.  For positive systems this degenerates to the ordinary proof
closure.  Negative premises follow first-step semantics (a term refuses a
pomset exactly when it refuses the pomset's minimal layer).

Every exploration is bounded; hitting a bound sets a truncation flag that
downstream verdicts surface as unknown-due-to-bounds rather than a wrong
answer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from . import plts as pl
from . import pomset as pm
from . import rules as rl
from . import term as tm
from .pomset import Pomset
from .rules import (ClosedInstance, GNegPred, GNegTrans, GNegTransTo, GPos,
                    GPred, GroundLit, Ptss, Rule)
from .term import Term


@dataclass(frozen=True)
class ExploreBounds:
    max_states: int = 10_000
    max_depth: int = 64
    max_pomset_size: int = 64

    def __post_init__(self):
        if min(self.max_states, self.max_depth, self.max_pomset_size) <= 0:
            raise ValueError("bounds must be positive")


DEFAULT_BOUNDS = ExploreBounds()


class _Index:
    """Positive ground literals indexed by subject."""

    def __init__(self):
        self.trans: dict[Term, list[tuple[Pomset, Term]]] = {}
        self.preds: dict[Term, set[str]] = {}
        self.all: set = set()

    def add(self, lit) -> bool:
        if lit in self.all:
            return False
        self.all.add(lit)
        if isinstance(lit, GPos):
            self.trans.setdefault(lit.subject, []).append((lit.label, lit.target))
        else:
            self.preds.setdefault(lit.subject, set()).add(lit.name)
        return True

    def has_trans(self, subject: Term, label: Pomset,
                  target: Optional[Term] = None) -> bool:
        for lab, tgt in self.trans.get(subject, ()):
            if lab == label and (target is None or tgt == target):
                return True
        return False

    def has_pred(self, subject: Term, name: str) -> bool:
        return name in self.preds.get(subject, ())


def neg_holds(neg: GroundLit, idx: _Index) -> bool:
    """Whether a negative literal holds against a set of positive literals."""
    if isinstance(neg, GNegTrans):
        return not idx.has_trans(neg.subject, pm.step_of(neg.label))
    if isinstance(neg, GNegTransTo):
        return not idx.has_trans(neg.subject, pm.step_of(neg.label), neg.target)
    if isinstance(neg, GNegPred):
        return not idx.has_pred(neg.subject, neg.name)
    raise rl.RuleError(f"not a negative literal: {neg!r}")


@dataclass(frozen=True)
class ProofNode:
    literal: GroundLit
    rule_name: str
    children: tuple = ()
    negatives: tuple = ()


def render_proof(node: ProofNode, indent: int = 0) -> str:
    pad = "  " * indent
    lines = [f"{pad}{rl.render_ground(node.literal)}   [{node.rule_name}]"]
    for neg in node.negatives:
        lines.append(f"{pad}  {rl.render_ground(neg)}   [holds: no denying transition]")
    for child in node.children:
        lines.append(render_proof(child, indent + 1))
    return "\n".join(lines)


@dataclass
class ThreeValuedModel:
    c: frozenset
    v: frozenset
    universe: frozenset
    terms: tuple
    truncated: bool
    provenance: dict = field(default_factory=dict, repr=False)

    @property
    def positive_after_reduction(self) -> bool:
        return not self.v

    def transitions_of(self, t: Term) -> frozenset:
        return frozenset(lit for lit in self.c if lit.subject == t)

    def proof(self, lit) -> ProofNode:
        if lit not in self.c:
            raise rl.RuleError(f"literal not in the model: {rl.render_ground(lit)}")
        rule_name, positives, negatives = self.provenance[lit]
        return ProofNode(
            literal=lit,
            rule_name=rule_name,
            children=tuple(self.proof(p) for p in positives),
            negatives=negatives,
        )


class Derivation:
    """One bounded evaluation of a rule system from a set of root terms."""

    def __init__(self, ptss: Ptss, bounds: ExploreBounds = DEFAULT_BOUNDS):
        self.ptss = ptss
        self.bounds = bounds
        self.depth: dict[Term, int] = {}
        self.terms: list[Term] = []
        self.truncated = False
        self._frozen = False
        self._label_universe: set = set()

    # -- term bookkeeping ----------------------------------------------------

    def _register(self, t: Term, depth: int) -> bool:
        if t in self.depth:
            if depth < self.depth[t]:
                self.depth[t] = depth
            return True
        if self._frozen:
            return False
        if depth > self.bounds.max_depth or len(self.terms) >= self.bounds.max_states:
            self.truncated = True
            return False
        self.depth[t] = depth
        self.terms.append(t)
        for u in self._label_seeds(t):
            self._label_universe.add(u)
        return True

    def _label_seeds(self, t: Term) -> frozenset:
        return tm.pomset_constants_in(t)

    def label_universe(self) -> frozenset:
        return frozenset(self._label_universe) | self.ptss.rule_label_constants() \
            | self.ptss.priority_elements() | {pm.primitive(pm.TAU), rl.SIGMA_POMSET}

    # -- rule instantiation ----------------------------------------------------

    def _match_source(self, source: Term, t: Term):
        if isinstance(source, tm.AnyPomset):
            if isinstance(t, tm.PomsetConst):
                return {}, {source.label_var: t.pomset}
            return None
        sub = tm.match(source, t)
        if sub is None:
            return None
        return sub, {}

    def _premise_solutions(self, rule: Rule, t: Term, idx: _Index
                           ) -> Iterator[tuple[dict, dict]]:
        """All (term substitution, label assignment) pairs closing the positives."""
        base = self._match_source(rule.source, t)
        if base is None:
            return
        sub0, assign0 = base

        def solve(sub: dict, assign: dict, pending: list) -> Iterator[tuple[dict, dict]]:
            if not pending:
                yield sub, assign
                return
            ready_at = None
            for k, prem in enumerate(pending):
                subj = tm.substitute(prem.subject, sub)
                if tm.is_closed(subj):
                    ready_at = (k, prem, subj)
                    break
            if ready_at is None:
                return  # not source-dependent enough to make progress
            k, prem, subj = ready_at
            self._register(subj, self.depth.get(t, 0) + 1)
            rest = pending[:k] + pending[k + 1:]
            if isinstance(prem, rl.Pred):
                if idx.has_pred(subj, prem.name):
                    yield from solve(sub, assign, rest)
                return
            for label, target in idx.trans.get(subj, ()):
                for assign2 in rl.match_label(prem.label, label, assign):
                    sub2 = tm.match(prem.target, target, dict(sub))
                    if sub2 is None:
                        continue
                    yield from solve(sub2, assign2, rest)

        yield from solve(dict(sub0), dict(assign0), list(rule.positives()))

    def _instances_for(self, t: Term, idx: _Index) -> Iterator[ClosedInstance]:
        universe = self.label_universe()
        for rule in self.ptss.rules:
            for sub, assign in self._premise_solutions(rule, t, idx):
                try:
                    inst = rl.instantiate(rule, self.ptss, sub, assign, universe)
                except rl.GuardFailure:
                    continue
                except rl.UncoveredVariable:
                    continue
                if isinstance(inst.conclusion, GPos) and \
                        len(inst.conclusion.label) > self.bounds.max_pomset_size:
                    self.truncated = True
                    continue
                yield inst
        if self.ptss.signature.fix_enabled and isinstance(t, tm.Fix):
            unfolded = tm.unfold_fix(t)
            if self._register(unfolded, self.depth.get(t, 0) + 1):
                for label, target in idx.trans.get(unfolded, ()):
                    yield ClosedInstance(
                        rule_name="fix-unfold",
                        positives=(GPos(unfolded, label, target),),
                        negatives=(),
                        conclusion=GPos(t, label, target),
                    )

    # -- saturation -------------------------------------------------------------

    def _gamma(self, against: Optional[_Index]) -> tuple[dict, _Index]:
        """Least positive closure with negatives checked against a fixed set.

        ``against=None`` is the most permissive run (all negatives hold): it
        doubles as universe exploration when terms are not yet frozen.
        """
        lits: dict = {}
        idx = _Index()
        while True:
            changed = False
            terms_before = len(self.terms)
            i = 0
            while i < len(self.terms):
                t = self.terms[i]
                i += 1
                for inst in self._instances_for(t, idx):
                    if inst.conclusion in lits:
                        continue
                    if against is not None and not all(
                            neg_holds(n, against) for n in inst.negatives):
                        continue
                    lits[inst.conclusion] = (inst.rule_name, inst.positives,
                                             inst.negatives)
                    idx.add(inst.conclusion)
                    if isinstance(inst.conclusion, GPos):
                        self._register(inst.conclusion.target,
                                       self.depth.get(t, 0) + 1)
                    changed = True
            if not changed and len(self.terms) == terms_before:
                break
        return lits, idx

    def stable_model(self, roots: Iterable[Term]) -> ThreeValuedModel:
        for r in roots:
            if not tm.is_closed(r):
                raise tm.TermError(f"root term is not closed: {tm.render(r)}")
            tm.check_wf(r, self.ptss.signature)
            self._register(r, 0)
        upper_lits, upper_idx = self._gamma(None)  # universe exploration
        self._frozen = True
        universe = frozenset(upper_lits)

        prev_c: Optional[set] = None
        while True:
            c_lits, c_idx = self._gamma(upper_idx)
            new_upper, new_upper_idx = self._gamma(c_idx)
            stable = prev_c is not None and set(c_lits) == prev_c \
                and set(new_upper) == set(upper_lits)
            prev_c = set(c_lits)
            upper_lits, upper_idx = new_upper, new_upper_idx
            if stable:
                break
        c = frozenset(c_lits)
        cv = frozenset(upper_lits)
        return ThreeValuedModel(
            c=c,
            v=cv - c,
            universe=universe,
            terms=tuple(self.terms),
            truncated=self.truncated,
            provenance=c_lits,
        )


def stable_model(ptss: Ptss, roots: Iterable[Term],
                 bounds: ExploreBounds = DEFAULT_BOUNDS) -> ThreeValuedModel:
    """Least three-valued stable model over the reachable ground universe."""
    return Derivation(ptss, bounds).stable_model(list(roots))


@dataclass(frozen=True)
class DeriveResult:
    literals: frozenset
    truncated: bool
    model: ThreeValuedModel

    def labels(self) -> frozenset:
        return frozenset(l.label for l in self.literals if isinstance(l, GPos))


def derive_transitions(ptss: Ptss, t: Term,
                       bounds: ExploreBounds = DEFAULT_BOUNDS) -> DeriveResult:
    """All provable literals with the given subject (stable-model delegation)."""
    model = stable_model(ptss, [t], bounds)
    return DeriveResult(
        literals=frozenset(l for l in model.c if l.subject == t),
        truncated=model.truncated,
        model=model,
    )


def ws_provable(ptss: Ptss, lit: GroundLit,
                bounds: ExploreBounds = DEFAULT_BOUNDS) -> bool:
    """Well-supported provability via the least stable model.

    Positive literals are ws-provable iff they are true (in C); a negative
    literal is ws-provable iff the literals it denies are all false (outside
    C union V).
    """
    model = stable_model(ptss, [lit.subject], bounds)
    cv = _Index()
    for x in model.c | model.v:
        cv.add(x)
    if isinstance(lit, (GPos, GPred)):
        return lit in model.c
    return neg_holds(lit, cv)


def verify_stable_model(ptss: Ptss, model: ThreeValuedModel,
                        bounds: ExploreBounds = DEFAULT_BOUNDS) -> tuple[bool, str]:
    """Re-check both stable-model conditions directly on the result.

    Independent of the alternating fixpoint: recomputes, for each of the two
    condition sets, the provable literals by plain saturation and compares.
    """
    deriv = Derivation(ptss, bounds)
    for t in model.terms:
        deriv._register(t, 0)
    deriv._frozen = True

    cv_idx = _Index()
    for x in model.c | model.v:
        cv_idx.add(x)
    c_idx = _Index()
    for x in model.c:
        c_idx.add(x)

    cond1, _ = deriv._gamma(cv_idx)
    if frozenset(cond1) != model.c:
        return False, "condition 1 failed: C is not the set provable against C|V"
    cond2, _ = deriv._gamma(c_idx)
    if frozenset(cond2) != model.c | model.v:
        return False, "condition 2 failed: C|V is not the set provable against C"
    if model.c & model.v:
        return False, "C and V are not disjoint"
    return True, "both stable-model conditions hold"


def build_plts(ptss: Ptss, t0: Term,
               bounds: ExploreBounds = DEFAULT_BOUNDS) -> pl.Plts:
    """Reachable pomset-labelled transition system from a closed root term."""
    model = stable_model(ptss, [t0], bounds)
    trans_of: dict[Term, list[tuple[Pomset, Term]]] = {}
    preds_of: dict[Term, set[str]] = {}
    for lit in model.c:
        if isinstance(lit, GPos):
            trans_of.setdefault(lit.subject, []).append((lit.label, lit.target))
        else:
            preds_of.setdefault(lit.subject, set()).add(lit.name)
    index: dict[Term, int] = {t0: 0}
    order: list[Term] = [t0]
    queue = [t0]
    while queue:
        t = queue.pop(0)
        for lab, tgt in sorted(trans_of.get(t, ()),
                               key=lambda e: (e[0].sort_key(), tm.render(e[1]))):
            if tgt not in index:
                index[tgt] = len(order)
                order.append(tgt)
                queue.append(tgt)
    transitions = frozenset(
        (index[t], lab, index[tgt])
        for t in order for lab, tgt in trans_of.get(t, ()))
    predicates = frozenset(
        (index[t], name) for t in order for name in preds_of.get(t, ()))
    return pl.Plts(
        num_states=len(order),
        transitions=transitions,
        predicates=predicates,
        initial=0,
        terms=tuple(order),
        truncated=model.truncated,
    )


# -- stratification ---------------------------------------------------------------


@dataclass(frozen=True)
class Measure:
    """Weight of a ground positive literal; depends on the subject term only."""

    name: str
    fn: Callable[[GroundLit], tuple]

    @staticmethod
    def source_size() -> "Measure":
        return Measure("source-size", lambda lit: (tm.size(lit.subject),))

    @staticmethod
    def symbol_count(sym: str) -> "Measure":
        return Measure(f"symbol-count({sym})",
                       lambda lit: (tm.symbol_count(lit.subject, sym),))

    @staticmethod
    def lex(*parts: "Measure") -> "Measure":
        name = "lex(" + ", ".join(p.name for p in parts) + ")"
        return Measure(name, lambda lit: tuple(
            x for p in parts for x in p.fn(lit)))


def parse_measure(spec: str) -> Measure:
    spec = spec.strip()
    if spec == "source-size":
        return Measure.source_size()
    if spec.startswith("symbol-count:"):
        return Measure.symbol_count(spec.split(":", 1)[1])
    if spec.startswith("lex:"):
        parts = [parse_measure(s) for s in spec.split(":", 1)[1].split(";")]
        return Measure.lex(*parts)
    raise ValueError(f"unknown measure {spec!r}")


@dataclass(frozen=True)
class StratificationReport:
    measure: str
    verified_bound: str
    certificate: bool
    counterexample: Optional[tuple] = None  # (rule name, instance text, reason)


def _closed_term_pool(ptss: Ptss, depth: int, cap: int) -> list[Term]:
    sig = ptss.signature
    declared = [p for p in sorted(ptss.rule_label_constants() | ptss.priority_elements(),
                                  key=Pomset.sort_key)
                if pm.SIGMA not in p.actions() and not p.is_empty()]
    pomsets = sorted(set(declared[:6]) | {pm.primitive("a"), pm.primitive("b")},
                     key=Pomset.sort_key)
    pool: list[Term] = []
    if sig.pomset_constants:
        pool.extend(tm.PomsetConst(p) for p in pomsets if not p.is_empty())
    pool.extend(tm.Fun(s) for s, ar in sig.functions if ar == 0)
    seen = set(pool)
    for _ in range(depth):
        frontier = []
        for s, ar in sig.functions:
            if ar == 0:
                continue
            for args in itertools.product(pool, repeat=ar):
                t = tm.Fun(s, args)
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
                if len(pool) + len(frontier) >= cap:
                    break
            if len(pool) + len(frontier) >= cap:
                break
        pool.extend(frontier)
        if len(pool) >= cap:
            pool = pool[:cap]
            break
    return pool


def check_stratification(ptss: Ptss, measure: Measure,
                         bounds: ExploreBounds = DEFAULT_BOUNDS,
                         term_depth: int = 1, term_cap: int = 12,
                         instance_cap: int = 60_000) -> StratificationReport:
    """Check the two stratification conditions on bounded closed instances.

    Condition 1: positive premises weigh no more than the conclusion.
    Condition 2: the transitions denied by negative premises weigh strictly
    less than the conclusion.  A certificate means no instance up to the
    budget violates either; otherwise the first violating instance is
    reported.
    """
    pool = _closed_term_pool(ptss, term_depth, term_cap)
    label_pool = sorted(
        {p for p in ptss.rule_label_constants() | ptss.priority_elements()
         if pm.SIGMA not in p.actions()}
        | {pm.primitive("a"), pm.primitive("b"), pm.par(pm.primitive("a"), pm.primitive("b"))},
        key=Pomset.sort_key)
    universe = set(label_pool) | ptss.priority_elements() | {rl.SIGMA_POMSET}
    checked = 0
    bound_desc = f"closed terms to depth {term_depth} (pool {len(pool)}), labels {len(label_pool)}"
    for rule in ptss.rules:
        if isinstance(rule.source, tm.AnyPomset):
            # the axiom schema has no premises; nothing to check
            continue
        tvars = sorted(rule.variables())
        lvar_set: set = set()
        if isinstance(rule.conclusion, rl.PosTrans):
            lvar_set |= rl.label_vars(rule.conclusion.label)
        for p in rule.positives():
            lvar_set |= rl.literal_label_vars(p)
        lvars = sorted(lvar_set)
        for term_combo in itertools.product(pool, repeat=len(tvars)):
            sub = dict(zip(tvars, term_combo))
            for label_combo in itertools.product(label_pool, repeat=len(lvars)):
                assign = dict(zip(lvars, label_combo))
                checked += 1
                if checked > instance_cap:
                    return StratificationReport(
                        measure.name, bound_desc + " (instance cap hit)", True, None)
                try:
                    inst = rl.instantiate(rule, ptss, sub, assign, universe)
                except (rl.GuardFailure, rl.UncoveredVariable):
                    continue
                w = measure.fn(inst.conclusion)
                for p in inst.positives:
                    if measure.fn(p) > w:
                        return StratificationReport(
                            measure.name, bound_desc, False,
                            (rule.name, rl.render_ground(p), "positive premise weighs more than the conclusion"))
                for n in inst.negatives:
                    if measure.fn(n) >= w:
                        return StratificationReport(
                            measure.name, bound_desc, False,
                            (rule.name, rl.render_ground(n), "negative premise does not weigh strictly less than the conclusion"))
    return StratificationReport(measure.name, bound_desc, True, None)
