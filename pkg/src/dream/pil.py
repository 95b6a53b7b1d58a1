"""Propositional Interaction Logic: formulas whose models are interactions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .core import Port, check_interaction
from .errors import DreamError, EvaluationError, UniverseTooLarge
from .expr import Expr, evaluate

MAX_UNIVERSE = 24


class Formula:
    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return And((self, other))

    def __or__(self, other: "Formula") -> "Formula":
        return Or((self, other))

    def __invert__(self) -> "Formula":
        return Not(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def __repr__(self):
        return "tt" if self.value else "ff"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class PortLit(Formula):
    port: Port


@dataclass(frozen=True)
class Pred(Formula):
    """State predicate: a boolean expression over the configuration."""

    expr: Expr


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    items: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    items: tuple[Formula, ...]


@dataclass(frozen=True)
class Idle(Formula):
    """``idle`` of one instance: none of its ports takes part."""

    instance: int | str


def port(instance: int | str, name: str) -> PortLit:
    return PortLit(Port(instance, name))


def conj(*items: Formula) -> Formula:
    if not items:
        return TRUE
    return items[0] if len(items) == 1 else And(tuple(items))


def disj(*items: Formula) -> Formula:
    if not items:
        return FALSE
    return items[0] if len(items) == 1 else Or(tuple(items))


def implies(a: Formula, b: Formula) -> Formula:
    return Or((Not(a), b))


def core_form(f: Formula) -> Formula:
    """Rewrite into the primitive connectives {port, predicate, not, and}."""
    if isinstance(f, (Const, PortLit, Pred)):
        return f
    if isinstance(f, Not):
        return Not(core_form(f.operand))
    if isinstance(f, And):
        return And(tuple(core_form(x) for x in f.items))
    if isinstance(f, Or):
        return Not(And(tuple(Not(core_form(x)) for x in f.items)))
    if isinstance(f, Idle):
        raise DreamError("idle literals need the instance's port set; expand them with expand_idle first")
    raise TypeError(f"not a formula: {f!r}")


def expand_idle(f: Formula, ports_of: Mapping[Any, Iterable[str]]) -> Formula:
    """Replace ``Idle(c)`` by the conjunction of the negated ports of ``c``."""
    if isinstance(f, Idle):
        return conj(*(Not(port(f.instance, p)) for p in sorted(ports_of[f.instance])))
    if isinstance(f, Not):
        return Not(expand_idle(f.operand, ports_of))
    if isinstance(f, And):
        return And(tuple(expand_idle(x, ports_of) for x in f.items))
    if isinstance(f, Or):
        return Or(tuple(expand_idle(x, ports_of) for x in f.items))
    return f


def satisfies(a: Iterable[Port], cfg: Any, f: Formula, motif: str | None = None) -> bool:
    if not isinstance(a, frozenset):
        a = frozenset(a)
    return _sat(a, cfg, f, motif)


def _sat(a: frozenset, cfg: Any, f: Formula, motif: str | None) -> bool:
    if isinstance(f, PortLit):
        if isinstance(f.port.instance, str):
            raise EvaluationError(f"unbound component variable {f.port.instance!r} in port literal")
        if cfg is not None and not cfg.has_instance(f.port.instance):
            raise EvaluationError(f"port literal {f.port} refers to a missing instance")
        return f.port in a
    if isinstance(f, And):
        return all(_sat(a, cfg, x, motif) for x in f.items)
    if isinstance(f, Or):
        return any(_sat(a, cfg, x, motif) for x in f.items)
    if isinstance(f, Not):
        return not _sat(a, cfg, f.operand, motif)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Pred):
        v = evaluate(f.expr, cfg, motif)
        if not isinstance(v, bool):
            raise EvaluationError(f"state predicate {f.expr!r} evaluated to non-boolean {v!r}")
        return v
    if isinstance(f, Idle):
        if isinstance(f.instance, str):
            raise EvaluationError(f"unbound component variable {f.instance!r} in idle literal")
        if cfg is not None and not cfg.has_instance(f.instance):
            raise EvaluationError(f"idle literal refers to missing instance {f.instance}")
        return all(p.instance != f.instance for p in a)
    raise TypeError(f"not a formula: {f!r}")


def interactions_over(universe: Iterable[Port], limit: int = MAX_UNIVERSE):
    """All subsets of ``universe`` holding at most one port per instance."""
    ports = sorted(set(universe), key=lambda p: (p.instance, p.name))
    if len(ports) > limit:
        raise UniverseTooLarge(f"{len(ports)} ports exceed the enumeration bound {limit}")
    groups: dict[Any, list[Port]] = {}
    for p in ports:
        groups.setdefault(p.instance, []).append(p)
    choices = [[None, *g] for g in groups.values()]
    for combo in itertools.product(*choices):
        yield frozenset(p for p in combo if p is not None)


def models_of(f: Formula, universe: Iterable[Port], cfg: Any = None, limit: int = MAX_UNIVERSE) -> set[frozenset]:
    return {a for a in interactions_over(universe, limit) if satisfies(a, cfg, f)}


def beta(gamma: Iterable[Iterable[Port]], universe: Iterable[Port]) -> Formula:
    """Characteristic formula of a set of interactions over a known port universe."""
    universe = sorted(set(universe), key=lambda p: (p.instance, p.name))
    monomials = []
    for a in sorted((frozenset(x) for x in gamma), key=lambda s: sorted((p.instance, p.name) for p in s)):
        extra = a - set(universe)
        if extra:
            raise DreamError(f"ports {sorted(map(str, extra))} are outside the universe")
        check_interaction(a)
        monomials.append(conj(*(PortLit(p) if p in a else Not(PortLit(p)) for p in universe)))
    return disj(*monomials)


def substitute_port(f: Formula, p: Port, value: bool) -> Formula:
    """``f[p := value]``."""
    if isinstance(f, PortLit):
        return Const(value) if f.port == p else f
    if isinstance(f, Not):
        return Not(substitute_port(f.operand, p, value))
    if isinstance(f, And):
        return And(tuple(substitute_port(x, p, value) for x in f.items))
    if isinstance(f, Or):
        return Or(tuple(substitute_port(x, p, value) for x in f.items))
    if isinstance(f, Idle) and f.instance == p.instance and value:
        return FALSE
    return f


def to_conjunctive(f: Formula, universe: Iterable[Port]) -> dict[Port, Formula]:
    """Per-port causal constraints ``p => f[p := tt]``."""
    return {p: substitute_port(f, p, True) for p in sorted(set(universe), key=lambda q: (q.instance, q.name))}


def conjunctive_formula(constraints: Mapping[Port, Formula]) -> Formula:
    return conj(*(implies(PortLit(p), psi) for p, psi in constraints.items()))


def ports_in(f: Formula) -> set[Port]:
    if isinstance(f, PortLit):
        return {f.port}
    if isinstance(f, Not):
        return ports_in(f.operand)
    if isinstance(f, (And, Or)):
        out = set()
        for x in f.items:
            out |= ports_in(x)
        return out
    return set()


def simplify(f: Formula, cfg: Any = None, motif: str | None = None, known_false: frozenset | None = None) -> Formula:
    """Constant-fold a formula.

    With ``cfg`` every state predicate is evaluated; ports in ``known_false``
    (e.g. ports that are not enabled) are replaced by ``ff``.
    """
    if isinstance(f, Const):
        return f
    if isinstance(f, PortLit):
        if known_false is not None and f.port in known_false:
            return FALSE
        return f
    if isinstance(f, Pred):
        if cfg is None:
            return f
        v = evaluate(f.expr, cfg, motif)
        if not isinstance(v, bool):
            raise EvaluationError(f"state predicate {f.expr!r} evaluated to non-boolean {v!r}")
        return TRUE if v else FALSE
    if isinstance(f, Not):
        inner = simplify(f.operand, cfg, motif, known_false)
        if isinstance(inner, Const):
            return Const(not inner.value)
        if isinstance(inner, Not):
            return inner.operand
        return Not(inner)
    if isinstance(f, And):
        items = []
        for x in f.items:
            s = simplify(x, cfg, motif, known_false)
            if s == FALSE:
                return FALSE
            if s == TRUE:
                continue
            items.extend(s.items if isinstance(s, And) else (s,))
        return conj(*items)
    if isinstance(f, Or):
        items = []
        for x in f.items:
            s = simplify(x, cfg, motif, known_false)
            if s == TRUE:
                return TRUE
            if s == FALSE:
                continue
            items.extend(s.items if isinstance(s, Or) else (s,))
        return disj(*items)
    if isinstance(f, Idle):
        return f
    raise TypeError(f"not a formula: {f!r}")
