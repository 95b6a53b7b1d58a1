"""Fixtures and independent reference oracles shared by the test modules.

The oracles re-derive semantics directly from the definitions (truth tables,
subset enumeration, literal quantifier expansion) without calling the
package's own evaluators for terms or macros.
"""
from __future__ import annotations

import itertools
from typing import Iterable

from hypothesis import strategies as st

from dream.core import ComponentType, Configuration, MotifState, Port, Transition, VarDecl, instantiate
from dream.expr import BinOp, evaluate, lit, var
from dream.maps import explicit_map
from dream.ops import Assign
from dream.pil import And, Const, Idle, Not, Or, PortLit, Pred
from dream.pilops import AndTerm, OrTerm, Rule


def loop_type(name: str, ports=("p",), variables=(("x", "int"),)) -> ComponentType:
    """Single-location type whose ports are all self-loops."""
    return ComponentType(
        name,
        ("s",),
        "s",
        tuple(VarDecl(v, t) for v, t in variables),
        tuple(ports),
        tuple(Transition("s", p, "s") for p in ports),
    )


def config(types: Iterable[ComponentType], layout: dict, nodes=(0,)) -> Configuration:
    """``layout`` maps motif name to a list of ``(type name, overrides)`` in id order."""
    types = {t.name: t for t in types}
    motifs = {}
    cid = 1
    for m, entries in layout.items():
        insts = {}
        for tname, overrides in entries:
            insts[cid] = instantiate(types[tname], cid, overrides=overrides)
            cid += 1
        motifs[m] = MotifState(insts, explicit_map(nodes), {c: nodes[0] for c in insts})
    return Configuration(types, motifs, cid)


def universe_of(cfg: Configuration) -> list[Port]:
    return [Port(c, p) for c in cfg.instance_ids() for p in cfg.instance(c).type.ports]


def subsets(universe) -> list[frozenset]:
    """Every interaction over ``universe``: any subset with at most one port per instance."""
    ports = sorted(set(universe))
    out = []
    for r in range(len(ports) + 1):
        for combo in itertools.combinations(ports, r):
            owners = [p.instance for p in combo]
            if len(set(owners)) == len(owners):
                out.append(frozenset(combo))
    return out


# -- reference semantics ----------------------------------------------------------------------


def ref_formula(a: frozenset, cfg, f) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, PortLit):
        return f.port in a
    if isinstance(f, Pred):
        return evaluate(f.expr, cfg) is True
    if isinstance(f, Not):
        return not ref_formula(a, cfg, f.operand)
    if isinstance(f, And):
        return all(ref_formula(a, cfg, x) for x in f.items)
    if isinstance(f, Or):
        return any(ref_formula(a, cfg, x) for x in f.items)
    if isinstance(f, Idle):
        return not any(p.instance == f.instance for p in a)
    raise TypeError(f)


def ref_term(a: frozenset, cfg, t) -> tuple[bool, frozenset]:
    """Satisfaction and operation set straight from the definition of ``ops``."""
    if isinstance(t, Rule):
        ok = ref_formula(a, cfg, t.guard)
        return ok, (t.ops if ok else frozenset())
    results = [ref_term(a, cfg, x) for x in t.items]
    if isinstance(t, AndTerm):
        ok = all(r[0] for r in results)
        return ok, (frozenset().union(*(r[1] for r in results)) if ok else frozenset())
    if isinstance(t, OrTerm):
        return any(r[0] for r in results), frozenset().union(*(r[1] for r in results))
    raise TypeError(t)


def ref_equivalent(t1, t2, universe, configs) -> bool:
    return all(ref_term(a, cfg, t1) == ref_term(a, cfg, t2) for cfg in configs for a in subsets(universe))


# -- strategies ---------------------------------------------------------------------------------

GUARD_TYPE = loop_type("T", ports=("p",), variables=(("x", "int"),))


def guard_configs() -> list[Configuration]:
    """Four instances of ``T`` under two valuations, so state predicates vary."""
    return [
        config([GUARD_TYPE], {"m": [("T", {"x": v}) for v in (0, 1, 2, 3)]}),
        config([GUARD_TYPE], {"m": [("T", {"x": v}) for v in (1, 0, 0, 5)]}),
    ]


PREDICATES = [
    Pred(BinOp(">", var(1, "x"), lit(0))),
    Pred(BinOp("=", var(2, "x"), lit(0))),
    Pred(BinOp("<", var(4, "x"), var(1, "x"))),
]
OP_POOL = [Assign(var(i, "x"), lit(v)) for i in (1, 2) for v in (1, 2)]


def formulas(universe: list[Port], with_preds: bool = True):
    leaves = [st.sampled_from([Const(True), Const(False)]), st.sampled_from([PortLit(p) for p in universe])]
    if with_preds:
        leaves.append(st.sampled_from(PREDICATES))
    base = st.one_of(*leaves)

    def extend(children):
        return st.one_of(
            children.map(Not),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: And(tuple(xs))),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: Or(tuple(xs))),
        )

    return st.recursive(base, extend, max_leaves=6)


def opsets():
    return st.frozensets(st.sampled_from(OP_POOL), max_size=2)


def rules(universe):
    return st.builds(Rule, formulas(universe), opsets())


def terms(universe):
    def extend(children):
        return st.one_of(
            st.lists(children, min_size=2, max_size=3).map(lambda xs: AndTerm(tuple(xs))),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: OrTerm(tuple(xs))),
        )

    return st.recursive(rules(universe), extend, max_leaves=4)


@st.composite
def universes(draw, max_size: int = 4):
    n = draw(st.integers(1, max_size))
    return [Port(i, "p") for i in range(1, n + 1)]
