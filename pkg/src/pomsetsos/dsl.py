"""Text syntax for pomsets, terms, label expressions, rules, systems, formulas.

Term syntax uses infix ``+``, ``.``, ``||`` (precedence ``.`` > ``||`` > ``+``,
all left associative) mapped to the symbols ``alt``, ``seq``, ``par``.  Other
functions use call syntax (``theta(t)``, ``sigma_d(t)``).  ``eps`` is the
empty process, ``fix X . t`` binds recursion, a bare lowercase token is a
primitive pomset constant in closed position, and ``{x:a, y:b | x<y}`` is a
pomset literal.  In rule files, identifiers that are not declared symbols are
term variables, and capitalised identifiers in label position are label
variables.

A rule line is ``rule name: premise, ... | guard, ... |- conclusion;`` with
premises ``t -U-> t'``, ``t -/U->``, ``t -/U-> t'``, ``t : P``, ``t !: P``
and guards ``U1 <p U2``, ``step(U)``, ``U1 == U2``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import pomset as pm
from . import rules as rl
from . import term as tm
from .pomset import Pomset
from .term import Signature, Term


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+|\#[^\n]*)
      | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
      | (?P<num>\d+)
      | (?P<op>-/|->|\|\||\|-|<<|>>|==|!:|[{}()\[\],:;<>.+\-!&*~/|=])
    """,
    re.VERBOSE,
)

INFIX_SYMBOLS = {"+": "alt", "||": "par", ".": "seq"}


@dataclass
class Token:
    kind: str  # name | num | op | eof
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    out = []
    line, col, pos = 1, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        text = m.group(0)
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class Parser:
    def __init__(self, src: str, signature: Optional[Signature] = None,
                 closed: bool = False):
        self.toks = tokenize(src)
        self.i = 0
        self.sig = signature
        self.closed = closed

    # -- token plumbing ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("op", "name")

    def eat(self, text: str) -> Token:
        t = self.peek()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}",
                             t.line, t.col)
        return self.next()

    def eat_name(self) -> Token:
        t = self.peek()
        if t.kind != "name":
            raise ParseError(f"expected identifier, found {t.text!r}", t.line, t.col)
        return self.next()

    def err(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    # -- pomsets ---------------------------------------------------------------

    def pomset_literal(self) -> Pomset:
        self.eat("{")
        labels: dict[str, str] = {}
        pairs: list[tuple[str, str]] = []
        if not self.at("}"):
            while True:
                ev = self.eat_name().text
                self.eat(":")
                lab = self.eat_name().text
                if lab == pm.SIGMA:
                    self.err("sigma is reserved and cannot label a pomset literal event")
                if ev in labels:
                    self.err(f"duplicate event name {ev!r}")
                labels[ev] = lab
                if self.at(","):
                    self.next()
                    continue
                break
            if self.at("|"):
                self.next()
                while True:
                    a = self.eat_name().text
                    self.eat("<")
                    b = self.eat_name().text
                    pairs.append((a, b))
                    if self.at(","):
                        self.next()
                        continue
                    break
        self.eat("}")
        try:
            return pm.of(labels, pairs)
        except pm.PomsetError as e:
            self.err(str(e))

    # -- terms -------------------------------------------------------------------

    def term(self) -> Term:
        t = self.term_par()
        while self.at("+"):
            self.next()
            t = tm.Fun("alt", (t, self.term_par()))
        return t

    def term_par(self) -> Term:
        t = self.term_seq()
        while self.at("||"):
            self.next()
            t = tm.Fun("par", (t, self.term_seq()))
        return t

    def term_seq(self) -> Term:
        t = self.term_atom()
        while self.at("."):
            self.next()
            t = tm.Fun("seq", (t, self.term_atom()))
        return t

    def term_atom(self) -> Term:
        t = self.peek()
        if t.text == "(":
            self.next()
            inner = self.term()
            self.eat(")")
            return inner
        if t.text == "{":
            return tm.PomsetConst(self.pomset_literal())
        if t.text == "fix":
            self.next()
            var = self.eat_name().text
            self.eat(".")
            body = self.term()
            return tm.Fix(var, body)
        if t.kind != "name":
            self.err(f"expected a term, found {t.text!r}")
        name = self.next().text
        arity = self.sig.arity(name) if self.sig else None
        if self.at("("):
            self.next()
            args = []
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.next()
                    args.append(self.term())
            self.eat(")")
            if arity is not None and arity != len(args):
                self.err(f"{name!r} expects {arity} arguments, got {len(args)}")
            if arity is None:
                self.err(f"unknown function symbol {name!r}")
            return tm.Fun(name, tuple(args))
        if arity == 0:
            return tm.Fun(name)
        if arity is not None and arity > 0:
            self.err(f"{name!r} expects {arity} arguments")
        if self.closed:
            if name in (pm.SIGMA,):
                self.err("sigma is reserved and is not a process")
            return tm.PomsetConst(pm.primitive(name))
        return tm.Var(name)

    # -- label expressions ---------------------------------------------------------

    def label_expr(self) -> rl.LabelExpr:
        e = self.label_seq()
        while self.at("||"):
            self.next()
            e = rl.LPar(e, self.label_seq())
        return e

    def label_seq(self) -> rl.LabelExpr:
        e = self.label_atom()
        while self.at("."):
            self.next()
            e = rl.LSeq(e, self.label_atom())
        return e

    def label_atom(self) -> rl.LabelExpr:
        t = self.peek()
        if t.text == "(":
            self.next()
            inner = self.label_expr()
            self.eat(")")
            return inner
        if t.text == "{":
            return rl.LConst(self.pomset_literal())
        if t.kind != "name":
            self.err(f"expected a label, found {t.text!r}")
        name = self.next().text
        if name == pm.SIGMA:
            return rl.SIGMA_LABEL
        if name == pm.TAU:
            return rl.TAU_LABEL
        if name[0].isupper():
            return rl.LVar(name)
        return rl.LConst(pm.primitive(name))

    # -- rules ------------------------------------------------------------------------

    def literal(self, *, positive_only: bool = False) -> rl.Literal:
        subject = self.term()
        t = self.peek()
        if t.text == "-":
            self.next()
            label = self.label_expr()
            self.eat("->")
            target = self.term()
            return rl.PosTrans(subject, label, target)
        if t.text == "-/":
            if positive_only:
                self.err("conclusion must be positive")
            self.next()
            label = self.label_expr()
            self.eat("->")
            if self.peek().text in ("(", "{", "fix") or self.peek().kind == "name":
                return rl.NegTransTo(subject, label, self.term())
            return rl.NegTrans(subject, label)
        if t.text == ":":
            self.next()
            return rl.Pred(subject, self.eat_name().text)
        if t.text == "!:":
            if positive_only:
                self.err("conclusion must be positive")
            self.next()
            return rl.NegPred(subject, self.eat_name().text)
        self.err("expected a literal")

    def guard(self) -> rl.Guard:
        if self.peek().text == "step" and self.peek(1).text == "(":
            self.next()
            self.next()
            e = self.label_expr()
            self.eat(")")
            return rl.IsStep(e)
        left = self.label_expr()
        t = self.peek()
        if t.text == "<":
            self.next()
            marker = self.eat_name().text
            if marker != "p":
                self.err("priority guard is written U1 <p U2")
            return rl.PriorityLt(left, self.label_expr())
        if t.text == "==":
            self.next()
            return rl.LabelEq(left, self.label_expr())
        self.err("expected a guard")

    def rule(self) -> rl.Rule:
        self.eat("rule")
        name = self.eat_name().text
        self.eat(":")
        premises: list[rl.Literal] = []
        guards: list[rl.Guard] = []
        if not self.at("|-"):
            premises.append(self.literal())
            while self.at(","):
                self.next()
                premises.append(self.literal())
            if self.at("|"):
                self.next()
                guards.append(self.guard())
                while self.at(","):
                    self.next()
                    guards.append(self.guard())
        self.eat("|-")
        conclusion = self.literal(positive_only=True)
        self.eat(";")
        return rl.Rule(name=name, premises=tuple(premises),
                       guards=tuple(guards), conclusion=conclusion)

    # -- whole systems ------------------------------------------------------------------

    def ptss_file(self) -> rl.Ptss:
        name = ""
        functions: dict[str, int] = {}
        predicates: set[str] = set()
        pomset_constants = True
        fix_enabled = False
        pomset_axiom = False
        priority: list[tuple[Pomset, Pomset]] = []
        pending_rules: list[tuple[int, int]] = []  # token spans, parsed after signature

        while self.peek().kind != "eof":
            t = self.peek()
            if t.text == "ptss":
                self.next()
                name = self.eat_name().text
                self.eat(";")
            elif t.text == "functions":
                self.next()
                while True:
                    sym = self.eat_name().text
                    self.eat("/")
                    ar = self.peek()
                    if ar.kind != "num":
                        self.err("expected an arity")
                    self.next()
                    functions[sym] = int(ar.text)
                    if self.at(","):
                        self.next()
                        continue
                    break
                self.eat(";")
            elif t.text == "predicates":
                self.next()
                predicates.add(self.eat_name().text)
                while self.at(","):
                    self.next()
                    predicates.add(self.eat_name().text)
                self.eat(";")
            elif t.text == "pomset_axiom":
                self.next()
                pomset_axiom = self.eat_name().text == "on"
                self.eat(";")
            elif t.text == "pomset_constants":
                self.next()
                pomset_constants = self.eat_name().text == "on"
                self.eat(";")
            elif t.text == "fix_terms":
                self.next()
                fix_enabled = self.eat_name().text == "on"
                self.eat(";")
            elif t.text == "priority":
                self.next()
                while True:
                    low = self.priority_pomset()
                    self.eat("<")
                    marker = self.eat_name().text
                    if marker != "p":
                        self.err("priority pairs are written U <p V")
                    high = self.priority_pomset()
                    priority.append((low, high))
                    if self.at(","):
                        self.next()
                        continue
                    break
                self.eat(";")
            elif t.text == "rule":
                start = self.i
                self.skip_rule()
                pending_rules.append((start, self.i))
            else:
                self.err(f"unexpected {t.text!r} at top level")

        self.sig = Signature.make(functions, predicates,
                                  pomset_constants=pomset_constants,
                                  fix_enabled=fix_enabled)
        parsed_rules: list[rl.Rule] = []
        for start, end in pending_rules:
            self.i = start
            parsed_rules.append(self.rule())
        return rl.Ptss.make(self.sig, parsed_rules, priority=priority,
                            pomset_axiom=pomset_axiom, name=name)

    def priority_pomset(self) -> Pomset:
        if self.at("{"):
            return self.pomset_literal()
        t = self.eat_name()
        if t.text == pm.SIGMA:
            return rl.SIGMA_POMSET
        if t.text[0].isupper():
            self.err("priority elements are concrete pomsets, not variables")
        return pm.primitive(t.text)

    def skip_rule(self) -> None:
        self.eat("rule")
        while self.peek().kind != "eof" and not self.at(";"):
            self.next()
        self.eat(";")


# -- module-level helpers ---------------------------------------------------------


def parse_pomset(src: str) -> Pomset:
    p = Parser(src)
    if p.at("{"):
        out = p.pomset_literal()
    else:
        tok = p.eat_name()
        if tok.text == pm.SIGMA:
            p.err("sigma is reserved")
        out = pm.primitive(tok.text)
    if p.peek().kind != "eof":
        p.err("trailing input after pomset")
    return out


def parse_term(src: str, signature: Signature, *, closed: bool = True) -> Term:
    p = Parser(src, signature, closed=closed)
    out = p.term()
    if p.peek().kind != "eof":
        p.err("trailing input after term")
    tm.check_wf(out, signature)
    if closed and not tm.is_closed(out):
        p.err("term is not closed")
    return out


def parse_rule(src: str, signature: Signature) -> rl.Rule:
    p = Parser(src, signature)
    out = p.rule()
    if p.peek().kind != "eof":
        p.err("trailing input after rule")
    return out


def parse_ptss(src: str) -> rl.Ptss:
    return Parser(src).ptss_file()
