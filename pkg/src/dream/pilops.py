"""Guarded-command terms: ``guard -> ops`` rules composed with ``&`` and ``|``."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .core import Port
from .errors import UniverseTooLarge
from .ops import Operation, apply_ops  # noqa: F401  (re-exported)
from .pil import (
    FALSE,
    TRUE,
    And,
    Const,
    Formula,
    Idle,
    Not,
    Or,
    Pred,
    PortLit,
    conj,
    disj,
    interactions_over,
    satisfies as pil_satisfies,
    simplify,
)


class Term:
    __slots__ = ()

    def __and__(self, other: "Term") -> "Term":
        return AndTerm((self, other))

    def __or__(self, other: "Term") -> "Term":
        return OrTerm((self, other))


@dataclass(frozen=True)
class Rule(Term):
    guard: Formula
    ops: frozenset = frozenset()


@dataclass(frozen=True)
class AndTerm(Term):
    items: tuple[Term, ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("an & term needs at least one operand")


@dataclass(frozen=True)
class OrTerm(Term):
    items: tuple[Term, ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("a | term needs at least one operand")


NEUTRAL = Rule(TRUE, frozenset())
ABSORBING = Rule(FALSE, frozenset())


def rule(guard: Formula, *operations: Operation) -> Rule:
    return Rule(guard, frozenset(operations))


def conjunction(items: Sequence[Term]) -> Term:
    """n-ary ``&``; the empty conjunction is the neutral rule ``tt -> {}``."""
    if not items:
        return NEUTRAL
    return items[0] if len(items) == 1 else AndTerm(tuple(items))


def union(items: Sequence[Term]) -> Term:
    """n-ary ``|``; the empty union is the unsatisfiable rule ``ff -> {}``."""
    if not items:
        return ABSORBING
    return items[0] if len(items) == 1 else OrTerm(tuple(items))


def satisfies(a: Iterable[Port], cfg: Any, term: Term, motif: str | None = None) -> bool:
    if not isinstance(a, frozenset):
        a = frozenset(a)
    if isinstance(term, Rule):
        return pil_satisfies(a, cfg, term.guard, motif)
    if isinstance(term, AndTerm):
        return all(satisfies(a, cfg, t, motif) for t in term.items)
    if isinstance(term, OrTerm):
        return any(satisfies(a, cfg, t, motif) for t in term.items)
    raise TypeError(f"not a term: {term!r}")


def ops_of(a: Iterable[Port], cfg: Any, term: Term, motif: str | None = None) -> frozenset:
    """Operations ``term`` asks to perform for interaction ``a``.

    ``&`` contributes only when every operand is satisfied; ``|`` always
    contributes the union of its operands.
    """
    if not isinstance(a, frozenset):
        a = frozenset(a)
    return _ops(a, cfg, term, motif)[1]


def _ops(a: frozenset, cfg: Any, term: Term, motif: str | None) -> tuple[bool, frozenset]:
    if isinstance(term, Rule):
        ok = pil_satisfies(a, cfg, term.guard, motif)
        return ok, (term.ops if ok else frozenset())
    if isinstance(term, AndTerm):
        acc = frozenset()
        for t in term.items:
            ok, d = _ops(a, cfg, t, motif)
            if not ok:
                return False, frozenset()
            acc |= d
        return True, acc
    if isinstance(term, OrTerm):
        any_ok = False
        acc = frozenset()
        for t in term.items:
            ok, d = _ops(a, cfg, t, motif)
            any_ok |= ok
            acc |= d
        return any_ok, acc
    raise TypeError(f"not a term: {term!r}")


def guard_of(term: Term) -> Formula:
    """The PIL formula characterising the interactions that satisfy ``term``."""
    if isinstance(term, Rule):
        return term.guard
    if isinstance(term, AndTerm):
        return conj(*(guard_of(t) for t in term.items))
    if isinstance(term, OrTerm):
        return disj(*(guard_of(t) for t in term.items))
    raise TypeError(f"not a term: {term!r}")


def rules_in(term: Term) -> list[Rule]:
    if isinstance(term, Rule):
        return [term]
    out = []
    for t in term.items:
        out.extend(rules_in(t))
    return out


# -- normal form -------------------------------------------------------------------------


def _products(term: Term) -> list[Rule]:
    """Sum of products via distributivity and rule fusion."""
    if isinstance(term, Rule):
        return [term]
    if isinstance(term, OrTerm):
        out = []
        for t in term.items:
            out.extend(_products(t))
        return out
    if isinstance(term, AndTerm):
        acc = [NEUTRAL]
        for t in term.items:
            nxt = []
            for r1 in acc:
                for r2 in _products(t):
                    nxt.append(Rule(conj(*_flat_and(r1.guard), *_flat_and(r2.guard)), r1.ops | r2.ops))
            acc = nxt
        return acc
    raise TypeError(f"not a term: {term!r}")


def _flat_and(f: Formula) -> tuple[Formula, ...]:
    if f == TRUE:
        return ()
    return f.items if isinstance(f, And) else (f,)


def _atoms(f: Formula, out: dict) -> None:
    if isinstance(f, (PortLit, Pred, Idle)):
        out.setdefault(f, len(out))
    elif isinstance(f, Not):
        _atoms(f.operand, out)
    elif isinstance(f, (And, Or)):
        for x in f.items:
            _atoms(x, out)


def _eval_atoms(f: Formula, val: Mapping[Formula, bool]) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not _eval_atoms(f.operand, val)
    if isinstance(f, And):
        return all(_eval_atoms(x, val) for x in f.items)
    if isinstance(f, Or):
        return any(_eval_atoms(x, val) for x in f.items)
    return val[f]


def propositionally_satisfiable(f: Formula, max_atoms: int = 16) -> bool:
    """Treat ports, predicates and idle literals as free atoms and search for a model.

    Port and idle atoms of one instance are not correlated, so this
    over-approximates; formulas with too many atoms are assumed satisfiable.
    """
    f = simplify(f)
    if isinstance(f, Const):
        return f.value
    atoms: dict = {}
    _atoms(f, atoms)
    if len(atoms) > max_atoms:
        return True
    keys = list(atoms)
    for bits in itertools.product((False, True), repeat=len(keys)):
        if _eval_atoms(f, dict(zip(keys, bits))):
            return True
    return False


def to_dnf(term: Term) -> Term:
    """Rewrite ``term`` into a union of rules with pairwise disjoint guards.

    Products come from distributivity and rule fusion; overlapping rules are
    then split with the normal-form axiom
    ``(g1 -> D1) | (g2 -> D2) = (g1 & !g2 -> D1) | (g2 & !g1 -> D2) | (g1 & g2 -> D1 u D2)``,
    dropping pieces whose guard is propositionally unsatisfiable.
    """
    if isinstance(term, Rule):
        return term
    disjoint: list[Rule] = []
    for r in _products(term):
        if not propositionally_satisfiable(r.guard):
            continue
        nxt: list[Rule] = []
        rest = r.guard
        for e in disjoint:
            both = conj(*_flat_and(e.guard), *_flat_and(r.guard))
            if not propositionally_satisfiable(both):
                nxt.append(e)
                continue
            only_e = conj(*_flat_and(e.guard), Not(r.guard))
            if propositionally_satisfiable(only_e):
                nxt.append(Rule(only_e, e.ops))
            nxt.append(Rule(both, e.ops | r.ops))
            rest = conj(*_flat_and(rest), Not(e.guard))
        if propositionally_satisfiable(rest):
            nxt.append(Rule(rest, r.ops))
        disjoint = nxt
    return OrTerm(tuple(disjoint)) if disjoint else OrTerm((ABSORBING,))


# -- equivalence ---------------------------------------------------------------------------


def equivalent(t1: Term, t2: Term, universe: Iterable[Port], configs: Sequence[Any] = (None,), limit: int = 20) -> bool:
    """Brute-force check that both terms agree on satisfaction and on ``ops`` everywhere."""
    return counterexample(t1, t2, universe, configs, limit) is None


def counterexample(t1: Term, t2: Term, universe: Iterable[Port], configs: Sequence[Any] = (None,), limit: int = 20):
    universe = list(universe)
    if len(set(universe)) > limit:
        raise UniverseTooLarge(f"{len(set(universe))} ports exceed the equivalence bound {limit}")
    for cfg in configs:
        for a in interactions_over(universe, limit):
            s1, o1 = _ops(a, cfg, t1, None)
            s2, o2 = _ops(a, cfg, t2, None)
            if s1 != s2 or o1 != o2:
                return a, cfg, (s1, o1), (s2, o2)
    return None


# -- conjunctive style -------------------------------------------------------------------


def conjunctive_term(p: Port, psi: Formula, delta: Iterable[Operation] = frozenset()) -> Term:
    """``(!p -> {}) | (p & psi -> delta)``: p may fire only if psi holds, doing delta."""
    lit = PortLit(p)
    return OrTerm((Rule(Not(lit)), Rule(conj(lit, *_flat_and(psi)), frozenset(delta))))


def expand_conjunctive(terms: Mapping[Port, tuple[Formula, Iterable[Operation]]], universe: Iterable[Port] | None = None) -> Term:
    """Disjunctive form of ``&_p conjunctive_term(p, psi_p, delta_p)``.

    One rule per split ``I u J = P``: ports in ``I`` fire with their
    constraints, ports in ``J`` are inhibited, and the ops are the union of
    ``delta_p`` over ``I``.
    """
    ports = sorted(universe if universe is not None else terms, key=lambda q: (q.instance, q.name))
    missing = [p for p in ports if p not in terms]
    if missing:
        raise KeyError(f"no conjunctive constraint for ports {[str(p) for p in missing]}")
    rules = []
    for bits in itertools.product((False, True), repeat=len(ports)):
        lits: list[Formula] = []
        delta: frozenset = frozenset()
        for p, on in zip(ports, bits):
            if on:
                psi, d = terms[p]
                lits.append(PortLit(p))
                lits.extend(_flat_and(psi))
                delta |= frozenset(d)
            else:
                lits.append(Not(PortLit(p)))
        rules.append(Rule(conj(*lits), delta))
    return OrTerm(tuple(rules))


def conjunction_of_conjunctive(terms: Mapping[Port, tuple[Formula, Iterable[Operation]]]) -> Term:
    return conjunction([conjunctive_term(p, psi, d) for p, (psi, d) in sorted(terms.items(), key=lambda kv: (kv[0].instance, kv[0].name))])
