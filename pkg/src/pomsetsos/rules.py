"""Rule schemas over terms and pomset label expressions, and whole rule systems.

A rule has positive/negative premises over open terms, label expressions with
pomset metavariables, guards (priority comparisons, step tests, label
equations), and a positive conclusion.  A Ptss bundles a signature, rules and
a finite strict priority order on pomsets.

Negative transition premises follow first-step semantics: ``t -/U->`` denies
exactly the transitions labelled with the minimal layer of U.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

from . import pomset as pm
from . import term as tm
from .pomset import Pomset
from .term import Term


class RuleError(ValueError):
    """Malformed rule or rule-system construction."""


class GuardFailure(RuleError):
    """A rule guard evaluated to false during instantiation."""


class UncoveredVariable(RuleError):
    """Instantiation left a term or label variable unbound."""


# -- label expressions --------------------------------------------------------


class LabelExpr:
    __slots__ = ()


@dataclass(frozen=True)
class LVar(LabelExpr):
    name: str


@dataclass(frozen=True)
class LConst(LabelExpr):
    pomset: Pomset


@dataclass(frozen=True)
class LPar(LabelExpr):
    left: LabelExpr
    right: LabelExpr


@dataclass(frozen=True)
class LSeq(LabelExpr):
    left: LabelExpr
    right: LabelExpr


TAU_LABEL = LConst(pm.primitive(pm.TAU))
SIGMA_POMSET = Pomset(labels=(pm.SIGMA,), order=frozenset())
SIGMA_LABEL = LConst(SIGMA_POMSET)


def label_vars(e: LabelExpr) -> frozenset:
    if isinstance(e, LVar):
        return frozenset({e.name})
    if isinstance(e, (LPar, LSeq)):
        return label_vars(e.left) | label_vars(e.right)
    return frozenset()


def eval_label(e: LabelExpr, assign: Mapping[str, Pomset]) -> Pomset:
    if isinstance(e, LVar):
        if e.name not in assign:
            raise UncoveredVariable(f"label variable {e.name!r} unbound")
        return assign[e.name]
    if isinstance(e, LConst):
        return e.pomset
    if isinstance(e, LPar):
        return pm.par(eval_label(e.left, assign), eval_label(e.right, assign))
    if isinstance(e, LSeq):
        return pm.seq(eval_label(e.left, assign), eval_label(e.right, assign))
    raise RuleError(f"bad label expression {e!r}")


def _splits_par(p: Pomset) -> Iterator[tuple[Pomset, Pomset]]:
    """All ways to write p as par(u, v), including empty parts."""
    import itertools
    n = len(p.labels)
    evs = list(range(n))
    for r in range(n + 1):
        for left in itertools.combinations(evs, r):
            lset = set(left)
            rset = [e for e in evs if e not in lset]
            if any((a, b) in p.order or (b, a) in p.order
                   for a in lset for b in rset):
                continue
            yield _induced(p, sorted(lset)), _induced(p, rset)


def _splits_seq(p: Pomset) -> Iterator[tuple[Pomset, Pomset]]:
    import itertools
    n = len(p.labels)
    evs = list(range(n))
    for r in range(n + 1):
        for left in itertools.combinations(evs, r):
            lset = set(left)
            rset = [e for e in evs if e not in lset]
            if all((a, b) in p.order for a in lset for b in rset):
                yield _induced(p, sorted(lset)), _induced(p, rset)


def _induced(p: Pomset, keep: list[int]) -> Pomset:
    idx = {e: i for i, e in enumerate(keep)}
    return pm.of({i: p.labels[e] for e, i in idx.items()},
                 [(idx[a], idx[b]) for a, b in p.order if a in idx and b in idx])


def match_label(e: LabelExpr, p: Pomset,
                assign: Optional[dict] = None) -> Iterator[dict]:
    """All assignments extending ``assign`` under which e evaluates to p."""
    if assign is None:
        assign = {}
    if isinstance(e, LVar):
        if pm.SIGMA in p.actions():
            return  # the time tick is never captured by a label metavariable
        if e.name in assign:
            if assign[e.name] == p:
                yield dict(assign)
            return
        out = dict(assign)
        out[e.name] = p
        yield out
        return
    if isinstance(e, LConst):
        if e.pomset == p:
            yield dict(assign)
        return
    if isinstance(e, LPar):
        for u, v in _splits_par(p):
            for a1 in match_label(e.left, u, assign):
                yield from match_label(e.right, v, a1)
        return
    if isinstance(e, LSeq):
        for u, v in _splits_seq(p):
            for a1 in match_label(e.left, u, assign):
                yield from match_label(e.right, v, a1)
        return
    raise RuleError(f"bad label expression {e!r}")


# -- literals ------------------------------------------------------------------


class Literal:
    __slots__ = ()


@dataclass(frozen=True)
class PosTrans(Literal):
    subject: Term
    label: LabelExpr
    target: Term


@dataclass(frozen=True)
class Pred(Literal):
    subject: Term
    name: str


@dataclass(frozen=True)
class NegTrans(Literal):
    subject: Term
    label: LabelExpr


@dataclass(frozen=True)
class NegTransTo(Literal):
    subject: Term
    label: LabelExpr
    target: Term


@dataclass(frozen=True)
class NegPred(Literal):
    subject: Term
    name: str


POSITIVE_KINDS = (PosTrans, Pred)
NEGATIVE_KINDS = (NegTrans, NegTransTo, NegPred)


def literal_terms(lit: Literal) -> tuple[Term, ...]:
    if isinstance(lit, (PosTrans, NegTransTo)):
        return (lit.subject, lit.target)
    return (lit.subject,)


def literal_label_vars(lit: Literal) -> frozenset:
    if isinstance(lit, (PosTrans, NegTrans, NegTransTo)):
        return label_vars(lit.label)
    return frozenset()


def literal_term_vars(lit: Literal) -> frozenset:
    out = frozenset()
    for t in literal_terms(lit):
        out |= tm.free_vars(t)
    return out


# -- ground literals -----------------------------------------------------------


class GroundLit:
    __slots__ = ()


@dataclass(frozen=True)
class GPos(GroundLit):
    subject: Term
    label: Pomset
    target: Term


@dataclass(frozen=True)
class GPred(GroundLit):
    subject: Term
    name: str


@dataclass(frozen=True)
class GNegTrans(GroundLit):
    subject: Term
    label: Pomset


@dataclass(frozen=True)
class GNegTransTo(GroundLit):
    subject: Term
    label: Pomset
    target: Term


@dataclass(frozen=True)
class GNegPred(GroundLit):
    subject: Term
    name: str


GroundPositive = Union[GPos, GPred]


def denies(l1: GroundLit, l2: GroundLit) -> bool:
    """Whether two closed literals deny each other.

    Three shapes: transition vs same-target negative transition, transition
    vs negative transition whose label's first step matches, and predicate vs
    negated predicate.  Symmetric by construction.
    """
    def one(a, b):
        if isinstance(a, GPos) and isinstance(b, GNegTransTo):
            return (a.subject == b.subject and a.target == b.target
                    and a.label == pm.step_of(b.label))
        if isinstance(a, GPos) and isinstance(b, GNegTrans):
            return a.subject == b.subject and a.label == pm.step_of(b.label)
        if isinstance(a, GPred) and isinstance(b, GNegPred):
            return a.subject == b.subject and a.name == b.name
        return False

    return one(l1, l2) or one(l2, l1)


def render_ground(lit: GroundLit) -> str:
    if isinstance(lit, GPos):
        return f"{tm.render(lit.subject)} -{pm.render(lit.label)}-> {tm.render(lit.target)}"
    if isinstance(lit, GPred):
        return f"{tm.render(lit.subject)} : {lit.name}"
    if isinstance(lit, GNegTrans):
        return f"{tm.render(lit.subject)} -/{pm.render(lit.label)}->"
    if isinstance(lit, GNegTransTo):
        return f"{tm.render(lit.subject)} -/{pm.render(lit.label)}-> {tm.render(lit.target)}"
    if isinstance(lit, GNegPred):
        return f"{tm.render(lit.subject)} !: {lit.name}"
    raise RuleError(f"bad ground literal {lit!r}")


# -- guards ---------------------------------------------------------------------


class Guard:
    __slots__ = ()


@dataclass(frozen=True)
class PriorityLt(Guard):
    low: LabelExpr
    high: LabelExpr


@dataclass(frozen=True)
class IsStep(Guard):
    expr: LabelExpr


@dataclass(frozen=True)
class LabelEq(Guard):
    left: LabelExpr
    right: LabelExpr


def guard_label_vars(g: Guard) -> frozenset:
    if isinstance(g, PriorityLt):
        return label_vars(g.low) | label_vars(g.high)
    if isinstance(g, IsStep):
        return label_vars(g.expr)
    if isinstance(g, LabelEq):
        return label_vars(g.left) | label_vars(g.right)
    raise RuleError(f"bad guard {g!r}")


# -- rules and systems -----------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    name: str
    premises: tuple = ()
    guards: tuple = ()
    conclusion: Literal = None  # type: ignore[assignment]

    def __post_init__(self):
        if not isinstance(self.conclusion, (PosTrans, Pred)):
            raise RuleError(f"rule {self.name!r}: conclusion must be positive")
        object.__setattr__(self, "premises", tuple(self.premises))
        object.__setattr__(self, "guards", tuple(self.guards))

    @property
    def source(self) -> Term:
        return self.conclusion.subject

    @property
    def target(self) -> Optional[Term]:
        return self.conclusion.target if isinstance(self.conclusion, PosTrans) else None

    def positives(self) -> tuple:
        return tuple(p for p in self.premises if isinstance(p, POSITIVE_KINDS))

    def negatives(self) -> tuple:
        return tuple(p for p in self.premises if isinstance(p, NEGATIVE_KINDS))

    def is_positive(self) -> bool:
        return not self.negatives()

    def variables(self) -> frozenset:
        out = literal_term_vars(self.conclusion)
        for p in self.premises:
            out |= literal_term_vars(p)
        return out

    def body_key(self):
        return (frozenset(self.premises), frozenset(self.guards), self.conclusion)


POMSET_AXIOM_RULE = Rule(
    name="pomset-axiom",
    premises=(),
    guards=(),
    conclusion=PosTrans(tm.AnyPomset("U"), LVar("U"), tm.EPS),
)


@dataclass(frozen=True)
class Ptss:
    """A pomset transition system specification."""

    signature: tm.Signature
    rules: tuple
    priority: frozenset = frozenset()
    pomset_axiom: bool = False
    name: str = ""

    @staticmethod
    def make(signature: tm.Signature, rules: Iterable[Rule],
             priority: Iterable[tuple[Pomset, Pomset]] = (),
             pomset_axiom: bool = False, name: str = "") -> "Ptss":
        rules = list(rules)
        if pomset_axiom and POMSET_AXIOM_RULE not in rules:
            rules = [POMSET_AXIOM_RULE] + rules
        if pomset_axiom and signature.arity("eps") != 0:
            raise RuleError("pomset axiom requires a constant 'eps' in the signature")
        pr = set()
        elems = set()
        for low, high in priority:
            pr.add((low, high))
            elems |= {low, high}
        closed = pm.transitive_closure(pr, elems)
        for a, b in closed:
            if a == b or (b, a) in closed:
                raise RuleError("priority order must be a strict partial order")
        ptss = Ptss(signature=signature, rules=tuple(rules),
                    priority=frozenset(closed), pomset_axiom=pomset_axiom, name=name)
        ptss.validate()
        return ptss

    def validate(self) -> None:
        for rule in self.rules:
            for lit in (*rule.premises, rule.conclusion):
                if isinstance(lit, (Pred, NegPred)) and lit.name not in self.signature.predicates:
                    raise RuleError(
                        f"rule {rule.name!r}: predicate {lit.name!r} not declared")

    def priority_above(self, p: Pomset) -> frozenset:
        return frozenset(high for low, high in self.priority if low == p)

    def priority_elements(self) -> frozenset:
        out = set()
        for low, high in self.priority:
            out |= {low, high}
        return frozenset(out)

    def rule_label_constants(self) -> frozenset:
        """All constant pomsets mentioned in rule label expressions."""
        out: set[Pomset] = set()

        def walk(e: LabelExpr):
            if isinstance(e, LConst):
                out.add(e.pomset)
            elif isinstance(e, (LPar, LSeq)):
                walk(e.left)
                walk(e.right)

        for rule in self.rules:
            for lit in (*rule.premises, rule.conclusion):
                if isinstance(lit, (PosTrans, NegTrans, NegTransTo)):
                    walk(lit.label)
        return frozenset(out)

    def merge(self, other: "Ptss", name: str = "") -> "Ptss":
        """The sum: merged signatures, union of rules."""
        sig = self.signature.merge(other.signature)
        rules = list(self.rules)
        for r in other.rules:
            if r not in rules:
                rules.append(r)
        return Ptss.make(sig, rules,
                         priority=self.priority | other.priority,
                         pomset_axiom=self.pomset_axiom or other.pomset_axiom,
                         name=name or f"{self.name}+{other.name}")


def check_guard(g: Guard, assign: Mapping[str, Pomset], priority: frozenset) -> bool:
    if isinstance(g, PriorityLt):
        return (eval_label(g.low, assign), eval_label(g.high, assign)) in priority
    if isinstance(g, IsStep):
        return eval_label(g.expr, assign).is_step()
    if isinstance(g, LabelEq):
        return eval_label(g.left, assign) == eval_label(g.right, assign)
    raise RuleError(f"bad guard {g!r}")


@dataclass(frozen=True)
class ClosedInstance:
    """A fully instantiated rule: ground premises and conclusion."""

    rule_name: str
    positives: tuple
    negatives: tuple
    conclusion: GroundPositive


def ground_literal(lit: Literal, sub: Mapping[str, Term],
                   assign: Mapping[str, Pomset]) -> GroundLit:
    subject = tm.substitute(lit.subject, sub)
    if not tm.is_closed(subject):
        raise UncoveredVariable(f"subject not closed: {tm.render(subject)}")
    if isinstance(lit, PosTrans):
        target = tm.substitute(lit.target, sub)
        if not tm.is_closed(target):
            raise UncoveredVariable(f"target not closed: {tm.render(target)}")
        return GPos(subject, eval_label(lit.label, assign), target)
    if isinstance(lit, Pred):
        return GPred(subject, lit.name)
    if isinstance(lit, NegTrans):
        return GNegTrans(subject, eval_label(lit.label, assign))
    if isinstance(lit, NegTransTo):
        target = tm.substitute(lit.target, sub)
        return GNegTransTo(subject, eval_label(lit.label, assign), target)
    if isinstance(lit, NegPred):
        return GNegPred(subject, lit.name)
    raise RuleError(f"bad literal {lit!r}")


def instantiate(rule: Rule, ptss: Ptss, sub: Mapping[str, Term],
                assign: Mapping[str, Pomset],
                label_universe: Iterable[Pomset] = ()) -> ClosedInstance:
    """Close a rule under explicit substitutions.

    Guards must hold (GuardFailure otherwise); every variable must be covered
    (UncoveredVariable otherwise).  Label variables that occur only in
    negative premises are expanded universally over the guard-satisfying
    pomsets, mirroring the priority-operator semantics.
    """
    bound = set(assign)
    positive_vars = label_vars(rule.conclusion.label) if isinstance(
        rule.conclusion, PosTrans) else frozenset()
    for p in rule.positives():
        positive_vars |= literal_label_vars(p)
    neg_only = set()
    for n in rule.negatives():
        neg_only |= literal_label_vars(n) - positive_vars - bound

    closed_guards = [g for g in rule.guards if not (guard_label_vars(g) & neg_only)]
    open_guards = [g for g in rule.guards if guard_label_vars(g) & neg_only]

    for g in closed_guards:
        if not check_guard(g, assign, ptss.priority):
            raise GuardFailure(f"rule {rule.name!r}: guard failed")

    import itertools

    universe = sorted(set(label_universe) | ptss.priority_elements(),
                      key=Pomset.sort_key)
    neg_list = sorted(neg_only)
    joint: list[dict] = []
    for combo in itertools.product(universe, repeat=len(neg_list)):
        trial = dict(assign)
        trial.update(zip(neg_list, combo))
        if all(check_guard(g, trial, ptss.priority) for g in open_guards):
            joint.append(trial)

    positives = tuple(ground_literal(p, sub, assign) for p in rule.positives())
    negatives = []
    for n in rule.negatives():
        nvars = literal_label_vars(n) & neg_only
        if not nvars:
            negatives.append(ground_literal(n, sub, assign))
            continue
        seen = set()
        for trial in joint:
            g = ground_literal(n, sub, trial)
            if g not in seen:
                seen.add(g)
                negatives.append(g)
    conclusion = ground_literal(rule.conclusion, sub, assign)
    if not isinstance(conclusion, (GPos, GPred)):
        raise RuleError("conclusion must be positive")
    return ClosedInstance(rule.name, positives, tuple(negatives), conclusion)
