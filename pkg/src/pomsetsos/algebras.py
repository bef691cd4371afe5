"""Built-in rule systems: basic process algebra with empty process, its
parallel, priority, and discrete-time extensions, and the recursion add-on.

Each builtin is constructed programmatically here and also ships as a rule
DSL file under ``data/``; the test suite parses the files and compares them
against these constructors.
"""

from __future__ import annotations

from importlib import resources
from typing import Iterable, Optional

from . import pomset as pm
from . import rules as rl
from . import term as tm
from .pomset import Pomset
from .rules import (LVar, NegTrans, Pred, PosTrans, Ptss, Rule, SIGMA_LABEL)
from .term import Fun, Signature, Var

BUILTIN_NAMES = ("bpa_eps", "aptc", "bpa_eps_theta", "bpa_eps_dt")

_x, _y, _x2, _y2 = Var("x"), Var("y"), Var("x'"), Var("y'")
_U, _U1, _U2 = LVar("U"), LVar("U1"), LVar("U2")

DEFAULT_PRIORITY = ((pm.primitive("a"), pm.primitive("b")),)


def _alt(a, b):
    return Fun("alt", (a, b))


def _seq(a, b):
    return Fun("seq", (a, b))


def _par(a, b):
    return Fun("par", (a, b))


def bpa_eps_rules() -> list[Rule]:
    return [
        Rule("eps_sqrt", (), (), Pred(tm.EPS, "sqrt")),
        Rule("alt_sqrt_l", (Pred(_x, "sqrt"),), (), Pred(_alt(_x, _y), "sqrt")),
        Rule("alt_step_l", (PosTrans(_x, _U, _x2),), (),
             PosTrans(_alt(_x, _y), _U, _x2)),
        Rule("alt_sqrt_r", (Pred(_y, "sqrt"),), (), Pred(_alt(_x, _y), "sqrt")),
        Rule("alt_step_r", (PosTrans(_y, _U, _y2),), (),
             PosTrans(_alt(_x, _y), _U, _y2)),
        Rule("seq_sqrt", (Pred(_x, "sqrt"), Pred(_y, "sqrt")), (),
             Pred(_seq(_x, _y), "sqrt")),
        Rule("seq_step_r", (Pred(_x, "sqrt"), PosTrans(_y, _U, _y2)), (),
             PosTrans(_seq(_x, _y), _U, _y2)),
        Rule("seq_step_l", (PosTrans(_x, _U, _x2),), (),
             PosTrans(_seq(_x, _y), _U, _seq(_x2, _y))),
    ]


def aptc_par_rules() -> list[Rule]:
    return [
        Rule("par_sqrt", (Pred(_x, "sqrt"), Pred(_y, "sqrt")), (),
             Pred(_par(_x, _y), "sqrt")),
        Rule("par_step_l", (PosTrans(_x, _U, _x2), Pred(_y, "sqrt")), (),
             PosTrans(_par(_x, _y), _U, _x2)),
        Rule("par_step_r", (Pred(_x, "sqrt"), PosTrans(_y, _U, _y2)), (),
             PosTrans(_par(_x, _y), _U, _y2)),
        Rule("par_step_both", (PosTrans(_x, _U1, _x2), PosTrans(_y, _U2, _y2)), (),
             PosTrans(_par(_x, _y), rl.LPar(_U1, _U2), _par(_x2, _y2))),
    ]


def theta_rules() -> list[Rule]:
    return [
        Rule("theta_sqrt", (Pred(_x, "sqrt"),), (), Pred(Fun("theta", (_x,)), "sqrt")),
        Rule("theta_step",
             (PosTrans(_x, _U1, _x2), NegTrans(_x, _U2)),
             (rl.PriorityLt(_U1, _U2),),
             PosTrans(Fun("theta", (_x,)), _U1, Fun("theta", (_x2,)))),
    ]


def dt_rules() -> list[Rule]:
    sd = lambda t: Fun("sigma_d", (t,))
    return [
        Rule("dt_tick", (), (), PosTrans(sd(_x), SIGMA_LABEL, _x)),
        Rule("dt_alt_l", (PosTrans(_x, SIGMA_LABEL, _x2), NegTrans(_y, SIGMA_LABEL)),
             (), PosTrans(_alt(_x, _y), SIGMA_LABEL, _x2)),
        Rule("dt_alt_r", (PosTrans(_y, SIGMA_LABEL, _y2), NegTrans(_x, SIGMA_LABEL)),
             (), PosTrans(_alt(_x, _y), SIGMA_LABEL, _y2)),
        Rule("dt_alt_sync",
             (PosTrans(_x, SIGMA_LABEL, _x2), PosTrans(_y, SIGMA_LABEL, _y2)),
             (), PosTrans(_alt(_x, _y), SIGMA_LABEL, _alt(_x2, _y2))),
        Rule("dt_seq_r", (Pred(_x, "sqrt"), PosTrans(_y, SIGMA_LABEL, _y2)),
             (), PosTrans(_seq(_x, _y), SIGMA_LABEL, _y2)),
        Rule("dt_seq_l", (PosTrans(_x, SIGMA_LABEL, _x2),),
             (), PosTrans(_seq(_x, _y), SIGMA_LABEL, _seq(_x2, _y))),
    ]


_BASE_FUNCTIONS = {"alt": 2, "seq": 2, "eps": 0}


def builtin(name: str,
            priority: Optional[Iterable[tuple[Pomset, Pomset]]] = None) -> Ptss:
    """A built-in rule system by name.

    ``bpa_eps_theta`` takes the finite strict priority order as data; when
    omitted, the fixture order a <p b is used.
    """
    if name == "bpa_eps":
        sig = Signature.make(_BASE_FUNCTIONS, {"sqrt"})
        return Ptss.make(sig, bpa_eps_rules(), pomset_axiom=True, name="bpa_eps")
    if name == "aptc":
        sig = Signature.make({**_BASE_FUNCTIONS, "par": 2}, {"sqrt"})
        return Ptss.make(sig, bpa_eps_rules() + aptc_par_rules(),
                         pomset_axiom=True, name="aptc")
    if name == "bpa_eps_theta":
        sig = Signature.make({**_BASE_FUNCTIONS, "theta": 1}, {"sqrt"})
        return Ptss.make(sig, bpa_eps_rules() + theta_rules(),
                         priority=DEFAULT_PRIORITY if priority is None else priority,
                         pomset_axiom=True, name="bpa_eps_theta")
    if name == "bpa_eps_dt":
        sig = Signature.make({**_BASE_FUNCTIONS, "sigma_d": 1}, {"sqrt"})
        return Ptss.make(sig, bpa_eps_rules() + dt_rules(),
                         pomset_axiom=True, name="bpa_eps_dt")
    raise ValueError(f"unknown builtin {name!r}; expected one of {BUILTIN_NAMES}")


def with_recursion(base: Ptss) -> Ptss:
    """The De Simone style recursion add-on: enables fix terms.

    The unfolding rule (premise on t[fix(X=t)/X], conclusion on fix(X=t)) is
    an engine-level schema applied to every fix term within the depth budget.
    """
    sig = base.signature
    new_sig = Signature(functions=sig.functions, predicates=sig.predicates,
                        pomset_constants=sig.pomset_constants, fix_enabled=True)
    return Ptss(signature=new_sig, rules=base.rules, priority=base.priority,
                pomset_axiom=base.pomset_axiom, name=base.name + "+fix")


def extension_rules(name: str) -> list[Rule]:
    """Just the rules a named builtin adds on top of bpa_eps."""
    if name == "aptc":
        return aptc_par_rules()
    if name == "bpa_eps_theta":
        return theta_rules()
    if name == "bpa_eps_dt":
        return dt_rules()
    raise ValueError(f"{name!r} is not an extension of bpa_eps")


def builtin_source(name: str) -> str:
    """The shipped DSL text of a builtin."""
    return resources.files("pomsetsos.data").joinpath(f"{name}.ptss").read_text()
