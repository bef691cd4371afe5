"""Signatures, open and closed terms, substitution, matching, and contexts.

States of derived transition systems are closed terms, so terms compare
structurally with pomset constants compared by canonical pomset equality.
``fix`` is a binding construct over recursion variables; unfolding is an
explicit helper and never happens implicitly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

from . import pomset as pm
from .pomset import Pomset

RESERVED_WORDS = frozenset({"fix", "rule", "true", "eps", "tau", "sigma", "step"})


class TermError(ValueError):
    """Malformed signature, term, or context operation."""


@dataclass(frozen=True)
class Signature:
    """Function symbols with arities, predicate names, and term-formation flags."""

    functions: tuple[tuple[str, int], ...]
    predicates: frozenset
    pomset_constants: bool = True
    fix_enabled: bool = False

    @staticmethod
    def make(functions: Mapping[str, int], predicates=(), *,
             pomset_constants: bool = True, fix_enabled: bool = False) -> "Signature":
        for sym in functions:
            if sym in RESERVED_WORDS and sym != "eps":
                raise TermError(f"function symbol clashes with reserved word: {sym!r}")
        return Signature(
            functions=tuple(sorted(functions.items())),
            predicates=frozenset(predicates),
            pomset_constants=pomset_constants,
            fix_enabled=fix_enabled,
        )

    def arity(self, sym: str) -> Optional[int]:
        for s, a in self.functions:
            if s == sym:
                return a
        return None

    def symbols(self) -> frozenset:
        return frozenset(s for s, _ in self.functions)

    def merge(self, other: "Signature") -> "Signature":
        mine = dict(self.functions)
        for s, a in other.functions:
            if s in mine and mine[s] != a:
                raise TermError(f"incompatible arities for {s!r}: {mine[s]} vs {a}")
            mine[s] = a
        return Signature.make(
            mine,
            self.predicates | other.predicates,
            pomset_constants=self.pomset_constants or other.pomset_constants,
            fix_enabled=self.fix_enabled or other.fix_enabled,
        )


class Term:
    """Base class; concrete terms are Var, Fun, PomsetConst, Fix, AnyPomset."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Fun(Term):
    sym: str
    args: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class PomsetConst(Term):
    pomset: Pomset

    def __post_init__(self):
        if self.pomset.is_empty():
            raise TermError("the empty pomset is not a process constant; use eps")
        if pm.SIGMA in self.pomset.actions():
            raise TermError("sigma is reserved and cannot occur in a pomset constant")


@dataclass(frozen=True)
class Fix(Term):
    var: str
    body: Term


@dataclass(frozen=True)
class AnyPomset(Term):
    """Pattern matching any pomset constant, binding its pomset to a label variable.

    Only valid as (part of) a rule source; never a closed term.
    """

    label_var: str


EPS = Fun("eps")


def is_closed(t: Term, bound: frozenset = frozenset()) -> bool:
    if isinstance(t, Var):
        return t.name in bound
    if isinstance(t, Fun):
        return all(is_closed(a, bound) for a in t.args)
    if isinstance(t, PomsetConst):
        return True
    if isinstance(t, Fix):
        return is_closed(t.body, bound | {t.var})
    return False  # AnyPomset is a pattern, never closed


def free_vars(t: Term, bound: frozenset = frozenset()) -> frozenset:
    if isinstance(t, Var):
        return frozenset() if t.name in bound else frozenset({t.name})
    if isinstance(t, Fun):
        out = frozenset()
        for a in t.args:
            out |= free_vars(a, bound)
        return out
    if isinstance(t, Fix):
        return free_vars(t.body, bound | {t.var})
    return frozenset()


def size(t: Term) -> int:
    """Node count, with pomset constants counting one."""
    if isinstance(t, Fun):
        return 1 + sum(size(a) for a in t.args)
    if isinstance(t, Fix):
        return 1 + size(t.body)
    return 1


def symbols(t: Term) -> frozenset:
    if isinstance(t, Fun):
        out = frozenset({t.sym})
        for a in t.args:
            out |= symbols(a)
        return out
    if isinstance(t, Fix):
        return symbols(t.body)
    return frozenset()


def symbol_count(t: Term, sym: str) -> int:
    if isinstance(t, Fun):
        return (t.sym == sym) + sum(symbol_count(a, sym) for a in t.args)
    if isinstance(t, Fix):
        return symbol_count(t.body, sym)
    return 0


def pomset_constants_in(t: Term) -> frozenset:
    if isinstance(t, PomsetConst):
        return frozenset({t.pomset})
    if isinstance(t, Fun):
        out = frozenset()
        for a in t.args:
            out |= pomset_constants_in(a)
        return out
    if isinstance(t, Fix):
        return pomset_constants_in(t.body)
    return frozenset()


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Fun):
        for a in t.args:
            yield from subterms(a)
    elif isinstance(t, Fix):
        yield from subterms(t.body)


def check_wf(t: Term, sig: Signature) -> None:
    """Arity, pomset-constant, and fix gating against a signature."""
    if isinstance(t, Fun):
        ar = sig.arity(t.sym)
        if ar is None:
            raise TermError(f"unknown function symbol: {t.sym!r}")
        if ar != len(t.args):
            raise TermError(f"{t.sym!r} expects {ar} arguments, got {len(t.args)}")
        for a in t.args:
            check_wf(a, sig)
    elif isinstance(t, PomsetConst):
        if not sig.pomset_constants:
            raise TermError("pomset constants are not enabled by this signature")
    elif isinstance(t, Fix):
        if not sig.fix_enabled:
            raise TermError("fix terms are not enabled by this signature")
        check_wf(t.body, sig)


_fresh_counter = itertools.count()


def _fresh(base: str) -> str:
    return f"{base}#{next(_fresh_counter)}"


def substitute(t: Term, sub: Mapping[str, Term]) -> Term:
    """Apply a substitution; fix-bound recursion variables are never captured."""
    if isinstance(t, Var):
        return sub.get(t.name, t)
    if isinstance(t, Fun):
        return Fun(t.sym, tuple(substitute(a, sub) for a in t.args))
    if isinstance(t, Fix):
        inner = {k: v for k, v in sub.items() if k != t.var}
        if not inner:
            return t
        clash = any(t.var in free_vars(v) for v in inner.values())
        if clash:
            new = _fresh(t.var)
            body = substitute(t.body, {t.var: Var(new)})
            return Fix(new, substitute(body, inner))
        return Fix(t.var, substitute(t.body, inner))
    return t


def unfold_fix(t: Fix) -> Term:
    """One unfolding: the body with the fix term substituted for its variable."""
    if not isinstance(t, Fix):
        raise TermError("unfold_fix expects a fix term")
    return substitute(t.body, {t.var: t})


def match(pattern: Term, subject: Term,
          sub: Optional[dict] = None) -> Optional[dict]:
    """Least substitution s with substitute(pattern, s) == subject, or None.

    Non-linear patterns require syntactically equal bindings.  AnyPomset
    patterns match any pomset constant (the label binding is handled by the
    rule engine, not here).
    """
    if sub is None:
        sub = {}
    if isinstance(pattern, Var):
        seen = sub.get(pattern.name)
        if seen is None:
            sub[pattern.name] = subject
            return sub
        return sub if seen == subject else None
    if isinstance(pattern, AnyPomset):
        return sub if isinstance(subject, PomsetConst) else None
    if isinstance(pattern, Fun):
        if not isinstance(subject, Fun) or pattern.sym != subject.sym:
            return None
        if len(pattern.args) != len(subject.args):
            return None
        for pa, sa in zip(pattern.args, subject.args):
            if match(pa, sa, sub) is None:
                return None
        return sub
    if isinstance(pattern, PomsetConst):
        return sub if pattern == subject else None
    if isinstance(pattern, Fix):
        if not isinstance(subject, Fix) or pattern.var != subject.var:
            return None
        return match(pattern.body, subject.body, sub)
    return None


def var_occurrences(t: Term, name: str) -> int:
    if isinstance(t, Var):
        return int(t.name == name)
    if isinstance(t, Fun):
        return sum(var_occurrences(a, name) for a in t.args)
    if isinstance(t, Fix):
        return 0 if t.var == name else var_occurrences(t.body, name)
    return 0


@dataclass(frozen=True)
class Context:
    """A term in which at most the declared hole variables occur free."""

    holes: tuple[str, ...]
    body: Term

    def __post_init__(self):
        extra = free_vars(self.body) - set(self.holes)
        if extra:
            raise TermError(f"context body has undeclared free variables: {sorted(extra)}")

    @staticmethod
    def single(body: Term, hole: str = "[]") -> "Context":
        if var_occurrences(body, hole) != 1:
            raise TermError("single-hole context must use its hole exactly once")
        return Context((hole,), body)

    def plug(self, fillers: list[Term]) -> Term:
        if len(fillers) != len(self.holes):
            raise TermError(
                f"context expects {len(self.holes)} fillers, got {len(fillers)}")
        return substitute(self.body, dict(zip(self.holes, fillers)))


def plug(c: Context, fillers: list[Term]) -> Term:
    return c.plug(fillers)


# -- rendering ---------------------------------------------------------------

INFIX = {"alt": ("+", 1), "par": ("||", 2), "seq": (".", 3)}


def render(t: Term, prec: int = 0) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, AnyPomset):
        return f"<any-pomset:{t.label_var}>"
    if isinstance(t, PomsetConst):
        return pm.render(t.pomset)
    if isinstance(t, Fix):
        body = render(t.body, 0)
        s = f"fix {t.var} . {body}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, Fun):
        if t.sym in INFIX and len(t.args) == 2:
            tok, p = INFIX[t.sym]
            lhs = render(t.args[0], p)
            rhs = render(t.args[1], p + 1)  # left associative
            s = f"{lhs} {tok} {rhs}"
            return f"({s})" if p < prec else s
        if not t.args:
            return t.sym
        return f"{t.sym}(" + ", ".join(render(a, 0) for a in t.args) + ")"
    raise TermError(f"cannot render {t!r}")
