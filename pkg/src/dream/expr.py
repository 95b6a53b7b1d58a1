"""Expressions over configurations: state predicates and assignment right-hand sides.

Instance references are ``Inst`` nodes whose ``ref`` is either a concrete
instance id (``int``) or a component variable name (``str``) that has not been
substituted yet. Evaluating an unsubstituted variable is an error.
"""
from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import EvaluationError


class Expr:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Lit(Expr):
    value: Any


@dataclass(frozen=True)
class Inst(Expr):
    ref: int | str


@dataclass(frozen=True)
class Var(Expr):
    """``c.x``: local variable ``x`` of instance ``c``."""

    inst: Inst
    name: str


@dataclass(frozen=True)
class Addr(Expr):
    """``at(c)``: the map node instance ``c`` is bound to."""

    inst: Inst


@dataclass(frozen=True)
class NodeAttr(Expr):
    """``at(c).x`` or ``n.x`` for an arbitrary node expression."""

    node: Expr
    name: str


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class UnOp(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class SetLit(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class VecLit(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple[Expr, ...]


BINARY_OPS = ("+", "-", "*", "mod", "=", "!=", "<", "<=", ">", ">=", "in", "union", "and", "or")
UNARY_OPS = ("not", "-", "card")
FUNCTIONS = ("distance", "card")


def lit(value: Any) -> Lit:
    return Lit(value)


def var(inst: int | str, name: str) -> Var:
    return Var(Inst(inst), name)


# -- generic traversal -------------------------------------------------------


def substitute(node: Any, mapping: Mapping[str, int | str]) -> Any:
    """Replace component-variable references by instance ids (or other names).

    Works on any frozen-dataclass AST (expressions, formulas, terms, ops):
    every ``Inst`` and every ``instance`` field of a port is rewritten.
    """
    if not mapping:
        return node
    return _subst(node, mapping)


def _subst(node: Any, mapping: Mapping[str, int | str]) -> Any:
    if isinstance(node, Inst):
        if isinstance(node.ref, str) and node.ref in mapping:
            return Inst(mapping[node.ref])
        return node
    if isinstance(node, (tuple, frozenset)):
        items = [_subst(x, mapping) for x in node]
        if all(a is b for a, b in zip(items, node)):
            return node
        return tuple(items) if isinstance(node, tuple) else frozenset(items)
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        changes = {}
        for name in _field_names(type(node)):
            old = getattr(node, name)
            if name == "instance" and isinstance(old, str):
                new = mapping.get(old, old)
            else:
                new = _subst(old, mapping)
            if new is not old:
                changes[name] = new
        return dataclasses.replace(node, **changes) if changes else node
    return node


@functools.lru_cache(maxsize=None)
def _field_names(cls: type) -> tuple[str, ...]:
    return tuple(f.name for f in dataclasses.fields(cls) if f.init)


def free_variables(node: Any) -> set[str]:
    """Component-variable names still referenced anywhere inside ``node``."""
    out: set[str] = set()
    _free(node, out)
    return out


def _free(node: Any, out: set[str]) -> None:
    if isinstance(node, Inst):
        if isinstance(node.ref, str):
            out.add(node.ref)
        return
    if isinstance(node, (tuple, frozenset, list)):
        for x in node:
            _free(x, out)
        return
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        for name in _field_names(type(node)):
            val = getattr(node, name)
            if name == "instance" and isinstance(val, str):
                out.add(val)
            else:
                _free(val, out)


# -- evaluation --------------------------------------------------------------


def instance_id(node: Inst) -> int:
    if not isinstance(node.ref, int):
        raise EvaluationError(f"unbound component variable {node.ref!r}")
    return node.ref


def evaluate(expr: Expr, cfg: Any = None, motif: str | None = None) -> Any:
    """Evaluate ``expr`` against configuration ``cfg``.

    ``motif`` names the motif whose map resolves bare node expressions and
    ``distance``; references through ``at(c)`` always use ``c``'s own motif.
    """
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Inst):
        return instance_id(expr)
    if isinstance(expr, Var):
        cid = instance_id(expr.inst)
        _need(cfg, expr)
        inst = cfg.instance(cid)
        try:
            return inst.valuation[expr.name]
        except KeyError:
            raise EvaluationError(f"instance {cid} ({inst.type.name}) has no variable {expr.name!r}") from None
    if isinstance(expr, Addr):
        _need(cfg, expr)
        return cfg.address(instance_id(expr.inst))
    if isinstance(expr, NodeAttr):
        _need(cfg, expr)
        m = _node_motif(expr.node, cfg, motif)
        node = evaluate(expr.node, cfg, motif)
        return cfg.motifs[m].map.attr(node, expr.name)
    if isinstance(expr, BinOp):
        return _binop(expr, cfg, motif)
    if isinstance(expr, UnOp):
        v = evaluate(expr.operand, cfg, motif)
        if expr.op == "not":
            return not _bool(v, expr)
        if expr.op == "-":
            if isinstance(v, tuple):
                return tuple(-x for x in v)
            return -v
        if expr.op == "card":
            if not isinstance(v, frozenset):
                raise EvaluationError(f"card() of non-set value {v!r}")
            return len(v)
        raise EvaluationError(f"unknown unary operator {expr.op!r}")
    if isinstance(expr, SetLit):
        return frozenset(evaluate(x, cfg, motif) for x in expr.items)
    if isinstance(expr, VecLit):
        return tuple(evaluate(x, cfg, motif) for x in expr.items)
    if isinstance(expr, Call):
        if expr.name == "distance":
            if len(expr.args) != 2:
                raise EvaluationError("distance() takes two arguments")
            m = _node_motif(expr.args[0], cfg, motif) if cfg is not None else None
            a = evaluate(expr.args[0], cfg, motif)
            b = evaluate(expr.args[1], cfg, motif)
            if m is not None:
                return cfg.motifs[m].map.distance(a, b)
            return euclidean(a, b)
        if expr.name == "card":
            return evaluate(UnOp("card", expr.args[0]), cfg, motif)
        raise EvaluationError(f"unknown function {expr.name!r}")
    raise EvaluationError(f"cannot evaluate {expr!r}")


def _need(cfg: Any, expr: Expr) -> None:
    if cfg is None:
        raise EvaluationError(f"{expr!r} needs a configuration")


def _node_motif(node_expr: Expr, cfg: Any, motif: str | None) -> str:
    if isinstance(node_expr, Addr):
        return cfg.motif_of(instance_id(node_expr.inst))
    if motif is not None:
        return motif
    if len(cfg.motifs) == 1:
        return next(iter(cfg.motifs))
    raise EvaluationError(f"node expression {node_expr!r} is ambiguous without a motif context")


def _bool(v: Any, expr: Expr) -> bool:
    if not isinstance(v, bool):
        raise EvaluationError(f"expected a boolean in {expr!r}, got {v!r}")
    return v


def _binop(expr: BinOp, cfg: Any, motif: str | None) -> Any:
    op = expr.op
    if op == "and":
        return _bool(evaluate(expr.left, cfg, motif), expr) and _bool(evaluate(expr.right, cfg, motif), expr)
    if op == "or":
        return _bool(evaluate(expr.left, cfg, motif), expr) or _bool(evaluate(expr.right, cfg, motif), expr)
    a = evaluate(expr.left, cfg, motif)
    b = evaluate(expr.right, cfg, motif)
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "in":
        if not isinstance(b, frozenset):
            raise EvaluationError(f"'in' needs a set on the right, got {b!r}")
        return a in b
    if op == "union":
        if not (isinstance(a, frozenset) and isinstance(b, frozenset)):
            raise EvaluationError(f"'union' needs two sets, got {a!r} and {b!r}")
        return a | b
    if isinstance(a, tuple) or isinstance(b, tuple):
        if op not in ("+", "-"):
            raise EvaluationError(f"operator {op!r} is not defined on vectors")
        if not (isinstance(a, tuple) and isinstance(b, tuple)) or len(a) != len(b):
            raise EvaluationError(f"vector arithmetic on mismatched operands {a!r}, {b!r}")
        if op == "+":
            return tuple(x + y for x, y in zip(a, b))
        return tuple(x - y for x, y in zip(a, b))
    if isinstance(a, (frozenset, bool)) or isinstance(b, (frozenset, bool)):
        raise EvaluationError(f"operator {op!r} is not defined on {a!r}, {b!r}")
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "mod":
        return a % b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise EvaluationError(f"unknown operator {op!r}")


def euclidean(a: tuple, b: tuple) -> float:
    if len(a) != len(b):
        raise EvaluationError(f"distance between points of different dimension: {a!r}, {b!r}")
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))
