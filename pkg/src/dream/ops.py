"""Operations (assignments, reconfigurations, migrations) and their snapshot application.

Every read and every target is resolved against the pre-state snapshot into
an ``Action``; actions are then written into the post-state. When two actions
write the same target with different values the outcome is non-deterministic
and all distinct outcomes are produced.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Any, Iterable, NamedTuple

from .core import Configuration, MotifState, check_value, instantiate
from .errors import DreamError, EvaluationError, ModelError
from .expr import Addr, Expr, Inst, NodeAttr, Var, evaluate, instance_id


class Operation:
    __slots__ = ()


@dataclass(frozen=True)
class Assign(Operation):
    target: Var | NodeAttr
    value: Expr


@dataclass(frozen=True)
class Create(Operation):
    type: str
    node: Expr
    motif: str | None = None


@dataclass(frozen=True)
class Delete(Operation):
    inst: Expr


@dataclass(frozen=True)
class AddNode(Operation):
    node: Expr
    motif: str | None = None


@dataclass(frozen=True)
class RemoveNode(Operation):
    node: Expr
    motif: str | None = None


@dataclass(frozen=True)
class AddEdge(Operation):
    source: Expr
    target: Expr
    motif: str | None = None


@dataclass(frozen=True)
class RemoveEdge(Operation):
    source: Expr
    target: Expr
    motif: str | None = None


@dataclass(frozen=True)
class Move(Operation):
    inst: Expr
    node: Expr


@dataclass(frozen=True)
class Migrate(Operation):
    inst: Expr
    motif: str
    node: Expr


@dataclass(frozen=True)
class If(Operation):
    cond: Expr
    then: frozenset
    orelse: frozenset = frozenset()


RECONFIG_TYPES = (Create, Delete, AddNode, RemoveNode, AddEdge, RemoveEdge, Move)
MOTIF_SCOPED = (Create, AddNode, RemoveNode, AddEdge, RemoveEdge)


def ops(*items: Operation) -> frozenset:
    return frozenset(items)


def with_motif(opset: Iterable[Operation], motif: str) -> frozenset:
    """Fill the motif of motif-scoped reconfigurations that do not name one."""
    out = []
    for op in opset:
        if isinstance(op, MOTIF_SCOPED) and op.motif is None:
            op = replace(op, motif=motif)
        elif isinstance(op, If):
            op = If(op.cond, with_motif(op.then, motif), with_motif(op.orelse, motif))
        out.append(op)
    return frozenset(out)


def sort_ops(opset: Iterable[Operation]) -> list[Operation]:
    return sorted(opset, key=repr)


# -- resolved actions ---------------------------------------------------------------


class Action(NamedTuple):
    kind: str  # var | attr | add_node | add_edge | move | migrate | create | delete | remove_node | remove_edge
    key: tuple  # conflict key: actions with equal keys compete
    value: Any


CATEGORY = {
    "var": 0,
    "attr": 0,
    "add_node": 1,
    "add_edge": 1,
    "move": 2,
    "migrate": 2,
    "create": 3,
    "delete": 4,
    "remove_node": 4,
    "remove_edge": 4,
}

# only these kinds can conflict; the others are idempotent set elements
EXCLUSIVE = ("var", "attr", "move", "migrate")


def _motif_for(op_motif: str | None, ctx: str | None, cfg: Configuration) -> str:
    m = op_motif or ctx
    if m is None:
        if len(cfg.motifs) == 1:
            return next(iter(cfg.motifs))
        raise EvaluationError("reconfiguration without a motif context")
    if m not in cfg.motifs:
        raise EvaluationError(f"unknown motif {m!r}")
    return m


def _inst(expr: Expr, cfg: Configuration, motif: str | None) -> int:
    cid = instance_id(expr) if isinstance(expr, Inst) else evaluate(expr, cfg, motif)
    if not isinstance(cid, int) or not cfg.has_instance(cid):
        raise EvaluationError(f"{expr!r} does not denote an existing instance")
    return cid


def resolve(opset: Iterable[Operation], cfg: Configuration, motif: str | None = None) -> list[Action]:
    """Evaluate targets, values and conditions of ``opset`` against snapshot ``cfg``."""
    out: list[Action] = []
    for op in sort_ops(opset):
        _resolve(op, cfg, motif, out)
    return out


def _resolve(op: Operation, cfg: Configuration, motif: str | None, out: list[Action]) -> None:
    if isinstance(op, Assign):
        value = evaluate(op.value, cfg, motif)
        t = op.target
        if isinstance(t, Var):
            cid = _inst(t.inst, cfg, motif)
            cfg.instance(cid).type.var(t.name)
            out.append(Action("var", ("var", cid, t.name), value))
        elif isinstance(t, NodeAttr):
            if isinstance(t.node, Addr):
                m = cfg.motif_of(_inst(t.node.inst, cfg, motif))
            else:
                m = _motif_for(None, motif, cfg)
            node = evaluate(t.node, cfg, motif)
            cfg.motifs[m].map.attr(node, t.name)
            out.append(Action("attr", ("attr", m, node, t.name), value))
        else:
            raise EvaluationError(f"cannot assign to {t!r}")
    elif isinstance(op, If):
        c = evaluate(op.cond, cfg, motif)
        if not isinstance(c, bool):
            raise EvaluationError(f"condition {op.cond!r} is not boolean")
        for inner in sort_ops(op.then if c else op.orelse):
            _resolve(inner, cfg, motif, out)
    elif isinstance(op, Move):
        cid = _inst(op.inst, cfg, motif)
        m = cfg.motif_of(cid)
        node = cfg.motifs[m].map.normalize(evaluate(op.node, cfg, motif), strict=False)
        if node is None:
            raise EvaluationError(f"move of {cid} to a node outside the map of {m!r}")
        out.append(Action("move", ("move", cid), node))
    elif isinstance(op, Migrate):
        cid = _inst(op.inst, cfg, motif)
        if op.motif not in cfg.motifs:
            raise EvaluationError(f"migration to unknown motif {op.motif!r}")
        node = cfg.motifs[op.motif].map.normalize(evaluate(op.node, cfg, op.motif), strict=False)
        if node is None:
            raise EvaluationError(f"migration of {cid} to a node outside the map of {op.motif!r}")
        out.append(Action("migrate", ("migrate", cid), (op.motif, node)))
    elif isinstance(op, Create):
        m = _motif_for(op.motif, motif, cfg)
        if op.type not in cfg.types:
            raise EvaluationError(f"create of unknown type {op.type!r}")
        node = cfg.motifs[m].map.normalize(evaluate(op.node, cfg, m), strict=False)
        if node is None:
            raise EvaluationError(f"create at a node outside the map of {m!r}")
        out.append(Action("create", ("create", m, repr(op)), (m, op.type, node)))
    elif isinstance(op, Delete):
        cid = _inst(op.inst, cfg, motif)
        out.append(Action("delete", ("delete", cid), cid))
    elif isinstance(op, (AddNode, RemoveNode)):
        m = _motif_for(op.motif, motif, cfg)
        node = evaluate(op.node, cfg, m)
        kind = "add_node" if isinstance(op, AddNode) else "remove_node"
        out.append(Action(kind, (kind, m, repr(node)), (m, node)))
    elif isinstance(op, (AddEdge, RemoveEdge)):
        m = _motif_for(op.motif, motif, cfg)
        a, b = evaluate(op.source, cfg, m), evaluate(op.target, cfg, m)
        kind = "add_edge" if isinstance(op, AddEdge) else "remove_edge"
        out.append(Action(kind, (kind, m, repr(a), repr(b)), (m, a, b)))
    else:
        raise DreamError(f"unknown operation {op!r}")


# -- application ----------------------------------------------------------------------


def _remove_instance(cfg: Configuration, cid: int) -> Configuration:
    m = cfg.motif_of(cid)
    st = cfg.motifs[m]
    inst = {k: v for k, v in st.instances.items() if k != cid}
    addr = {k: v for k, v in st.address.items() if k != cid}
    return cfg.with_motif(m, MotifState(inst, st.map, addr))


def apply_action(cfg: Configuration, act: Action, strict: bool = False) -> Configuration:
    """Write one resolved action into ``cfg``.

    With ``strict`` an action whose referent has vanished is an error;
    otherwise it is skipped (it lost a race against a deletion in the same step).
    """
    kind, _, v = act
    if kind == "var":
        _, cid, name = act.key
        if not cfg.has_instance(cid):
            if strict:
                raise ModelError(f"assignment to deleted instance {cid}")
            return cfg
        m = cfg.motif_of(cid)
        st = cfg.motifs[m]
        insts = dict(st.instances)
        insts[cid] = insts[cid].with_value(name, v)
        return cfg.with_motif(m, replace(st, instances=insts))
    if kind == "attr":
        _, m, node, name = act.key
        st = cfg.motifs[m]
        if node not in st.map:
            if strict:
                raise ModelError(f"attribute write on removed node {node!r}")
            return cfg
        _check_attr_type(st.map, name, v)
        return cfg.with_motif(m, replace(st, map=st.map.with_attr(node, name, v)))
    if kind == "add_node":
        m, node = v
        st = cfg.motifs[m]
        return cfg.with_motif(m, replace(st, map=st.map.add_node(node)))
    if kind == "add_edge":
        m, a, b = v
        st = cfg.motifs[m]
        return cfg.with_motif(m, replace(st, map=st.map.add_edge(a, b)))
    if kind == "remove_edge":
        m, a, b = v
        st = cfg.motifs[m]
        return cfg.with_motif(m, replace(st, map=st.map.remove_edge(a, b)))
    if kind == "move":
        cid = act.key[1]
        if not cfg.has_instance(cid):
            if strict:
                raise ModelError(f"move of deleted instance {cid}")
            return cfg
        m = cfg.motif_of(cid)
        st = cfg.motifs[m]
        node = st.map.normalize(v)
        addr = dict(st.address)
        addr[cid] = node
        return cfg.with_motif(m, replace(st, address=addr))
    if kind == "migrate":
        cid = act.key[1]
        target, node = v
        if not cfg.has_instance(cid):
            if strict:
                raise ModelError(f"migration of deleted instance {cid}")
            return cfg
        inst = cfg.instance(cid)
        cfg = _remove_instance(cfg, cid)
        st = cfg.motifs[target]
        node = st.map.normalize(node)
        insts = dict(st.instances)
        insts[cid] = inst
        addr = dict(st.address)
        addr[cid] = node
        return cfg.with_motif(target, MotifState(insts, st.map, addr))
    if kind == "create":
        m, tname, node = v
        st = cfg.motifs[m]
        node = st.map.normalize(node)
        cid = cfg.next_id
        inst = instantiate(cfg.types[tname], cid, cfg.instance_ids())
        insts = dict(st.instances)
        insts[cid] = inst
        addr = dict(st.address)
        addr[cid] = node
        motifs = dict(cfg.motifs)
        motifs[m] = MotifState(insts, st.map, addr)
        return replace(cfg, motifs=motifs, next_id=cid + 1)
    if kind == "delete":
        if not cfg.has_instance(v):
            if strict:
                raise ModelError(f"instance {v} already deleted")
            return cfg
        return _remove_instance(cfg, v)
    if kind == "remove_node":
        m, node = v
        st = cfg.motifs[m]
        if node not in st.map:
            if strict:
                raise ModelError(f"node {node!r} already removed")
            return cfg
        doomed = [c for c, n in st.address.items() if n == node]
        insts = {k: x for k, x in st.instances.items() if k not in doomed}
        addr = {k: n for k, n in st.address.items() if k not in doomed}
        return cfg.with_motif(m, MotifState(insts, st.map.remove_node(node), addr))
    raise DreamError(f"unknown action {kind!r}")


def _check_attr_type(map_, name, value):
    vt = map_.attr_type(name)
    if not check_value(vt, value):
        raise EvaluationError(f"type mismatch: node attribute {name} is {vt}, got {value!r}")


def _choices(actions: list[Action]) -> tuple[list[Action], list[list[Action]]]:
    """Split actions into fixed ones and groups of competing alternatives."""
    fixed: list[Action] = []
    groups: dict[tuple, list[Action]] = {}
    seen = set()
    for act in actions:
        if act.kind in EXCLUSIVE:
            alts = groups.setdefault(act.key, [])
            if all(a.value != act.value or type(a.value) is not type(act.value) for a in alts):
                alts.append(act)
        else:
            if act.key not in seen:
                seen.add(act.key)
                fixed.append(act)
    return fixed, [groups[k] for k in sorted(groups, key=repr)]


def _apply_vars(cfg: Configuration, acts: list[Action]) -> Configuration:
    """Variable writes to distinct targets, batched per motif."""
    per_motif: dict[str, dict] = {}
    for act in acts:
        _, cid, name = act.key
        if not cfg.has_instance(cid):
            continue
        m = cfg.motif_of(cid)
        insts = per_motif.setdefault(m, {})
        insts[cid] = insts.get(cid, cfg.instance(cid)).with_value(name, act.value)
    for m, changed in per_motif.items():
        st = cfg.motifs[m]
        cfg = cfg.with_motif(m, replace(st, instances={**st.instances, **changed}))
    return cfg


def _apply_in_category_order(cfg: Configuration, acts: Iterable[Action]) -> Configuration:
    ordered = sorted(acts, key=lambda a: (CATEGORY[a.kind], repr(a.key)))
    writes = [a for a in ordered if a.kind == "var"]
    if writes:
        cfg = _apply_vars(cfg, writes)
    for act in ordered:
        if act.kind != "var":
            cfg = apply_action(cfg, act)
    return cfg


def outcome_count(actions: list[Action]) -> int:
    _, groups = _choices(actions)
    n = 1
    for g in groups:
        n *= len(g)
    return n


def apply_actions(actions: list[Action], cfg: Configuration, all_orders: bool = False, max_orders: int = 8) -> list[Configuration]:
    """All distinct configurations reachable by writing ``actions`` into ``cfg``.

    Default mode: competing writes to one target each pick one winner and
    categories are applied in a fixed order (assignments, additions,
    moves/migrations, creations, removals). ``all_orders`` instead replays
    every permutation of the actions; orderings that hit a vanished referent
    are discarded.
    """
    if all_orders:
        flat = list(dict.fromkeys(actions))
        if len(flat) > max_orders:
            raise DreamError(f"{len(flat)} operations are too many to enumerate every order (max {max_orders})")
        results: dict[tuple, Configuration] = {}
        for perm in itertools.permutations(flat):
            cur = cfg
            try:
                for act in perm:
                    cur = apply_action(cur, act, strict=True)
            except ModelError:
                continue
            results.setdefault(cur.digest(), cur)
        return [results[k] for k in sorted(results, key=repr)]
    fixed, groups = _choices(actions)
    results = {}
    for pick in itertools.product(*groups):
        out = _apply_in_category_order(cfg, [*fixed, *pick])
        results.setdefault(out.digest(), out)
    return [results[k] for k in sorted(results, key=repr)]


def sample_actions(actions: list[Action], cfg: Configuration, rng, exhaustive_limit: int = 512) -> Configuration:
    """Pick one outcome uniformly at random.

    Without deletions every combination of winners gives a different
    configuration, so each competing target draws its winner independently.
    Deletions can merge combinations; then up to ``exhaustive_limit``
    combinations the distinct outcomes are enumerated and one is drawn.
    """
    fixed, groups = _choices(actions)
    merging = any(a.kind in ("delete", "remove_node") for a in fixed)
    if merging and outcome_count(actions) <= exhaustive_limit:
        outs = apply_actions(actions, cfg)
        return outs[rng.randrange(len(outs))] if len(outs) > 1 else outs[0]
    pick = [g[rng.randrange(len(g))] for g in groups]
    return _apply_in_category_order(cfg, [*fixed, *pick])


def apply_ops(opset: Iterable[Operation], cfg: Configuration, motif: str | None = None, all_orders: bool = False) -> list[Configuration]:
    return apply_actions(resolve(opset, cfg, motif), cfg, all_orders=all_orders)
