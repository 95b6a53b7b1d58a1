"""Motifs: a coordination term bound to a map, and their single-motif steps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .core import Configuration, MotifState, Port, check_interaction
from .errors import FiringError, ModelError
from .expr import substitute
from .foil import CoordTerm, Lifted, expand
from .maps import Map, grid_map, lattice_positions, torus_map  # noqa: F401  (re-exported)
from .ops import Action, Operation, apply_action, apply_actions, resolve
from .pilops import NEUTRAL, Term, ops_of, satisfies


@dataclass(frozen=True)
class Motif:
    name: str
    term: CoordTerm = Lifted(NEUTRAL)

    def expand(self, cfg: Configuration) -> Term:
        return expand(self.term, cfg, self.name)


def apply_reconfig(op: Operation, cfg: Configuration, motif: str | None = None, strict: bool = True) -> Configuration:
    """Apply a single operation on its own (reads and writes on the same state)."""
    for act in resolve([op], cfg, motif):
        cfg = apply_action(cfg, act, strict=strict)
    return cfg


def local_ops(cfg: Configuration, a: Iterable[Port]) -> frozenset:
    """Port-local operations of every participant, with ``self`` bound to its owner."""
    out = set()
    for p in a:
        inst = cfg.instance(p.instance)
        body = inst.type.port_ops.get(p.name)
        if body:
            out |= substitute(body, {"self": p.instance})
    return frozenset(out)


def step_actions(cfg: Configuration, term: Term, a: frozenset, motif: str) -> list[Action]:
    """Resolved operations of one motif step, read from the pre-state ``cfg``."""
    opset = ops_of(a, cfg, term, motif) | local_ops(cfg, a)
    return resolve(opset, cfg, motif)


def motif_step(cfg: Configuration, motif: Motif, a: Iterable[Port], all_orders: bool = False) -> list[Configuration]:
    """Every configuration reachable from ``cfg`` when motif ``motif`` performs ``a``."""
    a = check_interaction(a)
    st = cfg.motifs.get(motif.name)
    if st is None:
        raise ModelError(f"unknown motif {motif.name!r}")
    stray = sorted(str(p) for p in a if p.instance not in st.instances)
    if stray:
        raise FiringError(f"ports {stray} do not belong to motif {motif.name!r}")
    term = motif.expand(cfg)
    if not satisfies(a, cfg, term, motif.name):
        raise FiringError(f"interaction does not satisfy the term of motif {motif.name!r}")
    actions = step_actions(cfg, term, a, motif.name)
    return apply_actions(actions, cfg.fire(a), all_orders=all_orders)


def check_motif_state(st: MotifState) -> list[str]:
    """Consistency problems of instances, map and address function."""
    problems = []
    for cid, node in st.address.items():
        if cid not in st.instances:
            problems.append(f"address of unknown instance {cid}")
        elif node not in st.map:
            problems.append(f"instance {cid} sits on missing node {node!r}")
    for a, b in st.map.edges:
        if a not in st.map or b not in st.map:
            problems.append(f"edge ({a!r}, {b!r}) dangles")
    return problems
