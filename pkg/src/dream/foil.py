"""First-order coordination terms and their expansion into guarded-command terms.

Quantifiers range over the instances of a component type inside one motif
and are eliminated against the current configuration, so a term has to be
re-expanded whenever instances are created, deleted or migrate.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterable

from .core import Configuration, Port
from .errors import EvaluationError, WellFormednessError
from .expr import Expr, free_variables, substitute
from .ops import If, Operation, with_motif
from .pil import FALSE, TRUE, Formula, Not, PortLit, Pred, conj, disj
from .pilops import AndTerm, OrTerm, Rule, Term, conjunction, union

QUANTIFIERS = ("forall", "exists")
MACRO_KINDS = ("Require", "Accept", "AtMost", "AtLeast", "Unique", "Exactly")
COUNTING = ("AtMost", "AtLeast", "Exactly")
MAX_COMBINATIONS = 200_000


@dataclass(frozen=True)
class Decl:
    quant: str | None  # None only for malformed input, rejected by check_well_formed
    var: str
    type: str
    motif: str | None = None


class CoordTerm:
    __slots__ = ()


@dataclass(frozen=True)
class Lifted(CoordTerm):
    term: Term


@dataclass(frozen=True)
class Quantified(CoordTerm):
    decls: tuple[Decl, ...]
    body: Term


@dataclass(frozen=True)
class Conjunctive(CoordTerm):
    """``[forall c: b, D] c.p => guard -> ops``.

    The first declaration binds the port's owner; the remaining ones scope
    only the positive branch, so an empty existential leaves ``c.p``
    inhibited instead of making the whole term unsatisfiable.
    """

    decls: tuple[Decl, ...]
    port: Port
    guard: Formula
    ops: frozenset = frozenset()


@dataclass(frozen=True)
class AndC(CoordTerm):
    items: tuple[CoordTerm, ...]


@dataclass(frozen=True)
class OrC(CoordTerm):
    items: tuple[CoordTerm, ...]


@dataclass(frozen=True)
class Restriction(CoordTerm):
    """At most ``n`` instances of ``type`` take part through ``port`` (any port if ``None``)."""

    n: int
    type: str
    port: str | None = None
    motif: str | None = None


@dataclass(frozen=True)
class MacroEntry:
    port: str
    type: str
    index: str


@dataclass(frozen=True)
class Macro(CoordTerm):
    kind: str
    anchor_type: str
    anchor_port: str
    entries: tuple[MacroEntry, ...]
    predicate: Expr | None = None
    k: int | None = None
    motif: str | None = None


# -- well-formedness ------------------------------------------------------------------------


def check_well_formed(rho: CoordTerm, types: dict | None = None) -> list[str]:
    """Problems with ``rho``; an empty list means well formed."""
    problems: list[str] = []
    _check(rho, types, problems, "term")
    return problems


def ensure_well_formed(rho: CoordTerm, types: dict | None = None) -> None:
    problems = check_well_formed(rho, types)
    if problems:
        raise WellFormednessError(problems)


def _check_decls(decls, types, problems, where) -> set[str]:
    bound = set()
    for d in decls:
        if d.quant is None:
            problems.append(f"{where}: variable {d.var!r} lacks a quantifier")
        elif d.quant not in QUANTIFIERS:
            problems.append(f"{where}: unknown quantifier {d.quant!r}")
        if d.var in bound:
            problems.append(f"{where}: variable {d.var!r} declared twice")
        if types is not None and d.type not in types:
            problems.append(f"{where}: unknown component type {d.type!r}")
        bound.add(d.var)
    return bound


def _unbound(node, bound, problems, where):
    for v in sorted(free_variables(node) - bound):
        problems.append(f"{where}: unbound component variable {v!r}")


def _check(rho, types, problems, where):
    if isinstance(rho, Lifted):
        _unbound(rho.term, set(), problems, where)
    elif isinstance(rho, Quantified):
        bound = _check_decls(rho.decls, types, problems, where)
        _unbound(rho.body, bound, problems, where)
    elif isinstance(rho, Conjunctive):
        bound = _check_decls(rho.decls, types, problems, where)
        if not rho.decls or rho.decls[0].var != rho.port.instance or rho.decls[0].quant not in (None, "forall"):
            problems.append(f"{where}: a conjunctive term must start with 'forall' over the owner of {rho.port}")
        elif types is not None and rho.decls[0].type in types and rho.port.name not in types[rho.decls[0].type].ports:
            problems.append(f"{where}: {rho.decls[0].type} has no port {rho.port.name!r}")
        _unbound((rho.port, rho.guard, rho.ops), bound, problems, where)
    elif isinstance(rho, (AndC, OrC)):
        for i, x in enumerate(rho.items):
            _check(x, types, problems, f"{where}.{i}")
    elif isinstance(rho, Restriction):
        if rho.n < 0:
            problems.append(f"{where}: restriction bound must be >= 0")
        if types is not None:
            if rho.type not in types:
                problems.append(f"{where}: unknown component type {rho.type!r}")
            elif rho.port is not None and rho.port not in types[rho.type].ports:
                problems.append(f"{where}: {rho.type} has no port {rho.port!r}")
    elif isinstance(rho, Macro):
        if rho.kind not in MACRO_KINDS:
            problems.append(f"{where}: unknown constraint {rho.kind!r}")
        if rho.kind in COUNTING and (rho.k is None or rho.k < 1):
            problems.append(f"{where}: {rho.kind} needs k >= 1")
        idx = [e.index for e in rho.entries]
        if len(set(idx)) != len(idx):
            problems.append(f"{where}: index variables must be distinct")
        if not rho.entries:
            problems.append(f"{where}: {rho.kind} needs at least one port")
        if rho.predicate is not None:
            _unbound(rho.predicate, set(idx) | {"self"}, problems, where)
        if types is not None:
            for t, p in [(rho.anchor_type, rho.anchor_port)] + [(e.type, e.port) for e in rho.entries]:
                if t not in types:
                    problems.append(f"{where}: unknown component type {t!r}")
                elif p not in types[t].ports:
                    problems.append(f"{where}: {t} has no port {p!r}")
    else:
        problems.append(f"{where}: not a coordination term: {rho!r}")


# -- expansion -----------------------------------------------------------------------------


def expand(rho: CoordTerm, cfg: Configuration, motif: str) -> Term:
    """Eliminate declarations, restrictions and macros against ``cfg``.

    ``motif`` is the default motif for declarations that do not name one.
    """
    if isinstance(rho, Lifted):
        return _fill_motif(rho.term, motif)
    if isinstance(rho, Quantified):
        return _fill_motif(expand_declarations(rho.decls, rho.body, cfg, motif), motif)
    if isinstance(rho, Conjunctive):
        return _fill_motif(_expand_conjunctive(rho, cfg, motif), motif)
    if isinstance(rho, AndC):
        return conjunction([expand(x, cfg, motif) for x in rho.items])
    if isinstance(rho, OrC):
        return union([expand(x, cfg, motif) for x in rho.items])
    if isinstance(rho, Restriction):
        return expand_restriction(rho, cfg, motif)
    if isinstance(rho, Macro):
        m = rho.motif or motif
        terms = []
        for c in cfg.of_type(m, rho.anchor_type):
            lit = PortLit(Port(c, rho.anchor_port))
            body = expand_macro(rho, c, cfg, m)
            terms.append(OrTerm((Rule(Not(lit)), Rule(conj(lit, body)))))
        return conjunction(terms)
    raise TypeError(f"not a coordination term: {rho!r}")


def expand_declarations(decls: Iterable[Decl], body: Term, cfg: Configuration, motif: str) -> Term:
    decls = tuple(decls)
    if not decls:
        return body
    d = decls[0]
    if d.quant not in QUANTIFIERS:
        raise WellFormednessError([f"variable {d.var!r} lacks a quantifier"])
    parts = [expand_declarations(decls[1:], substitute(body, {d.var: c}), cfg, motif) for c in cfg.of_type(d.motif or motif, d.type)]
    return conjunction(parts) if d.quant == "forall" else union(parts)


def _expand_conjunctive(rho: Conjunctive, cfg: Configuration, motif: str) -> Term:
    owner = rho.decls[0]
    if owner.quant not in (None, "forall") or owner.var != rho.port.instance:
        raise WellFormednessError([f"a conjunctive term must start with 'forall' over the owner of {rho.port}"])
    positive = Rule(conj(PortLit(rho.port), rho.guard), rho.ops)
    terms = []
    for c in cfg.of_type(owner.motif or motif, owner.type):
        pos = expand_declarations(rho.decls[1:], substitute(positive, {owner.var: c}), cfg, motif)
        terms.append(OrTerm((Rule(Not(PortLit(Port(c, rho.port.name)))), pos)))
    return conjunction(terms)


def _fill_motif(term: Term, motif: str) -> Term:
    if isinstance(term, Rule):
        if not term.ops:
            return term
        filled = with_motif(term.ops, motif)
        return term if filled == term.ops else Rule(term.guard, filled)
    if isinstance(term, AndTerm):
        return AndTerm(tuple(_fill_motif(t, motif) for t in term.items))
    if isinstance(term, OrTerm):
        return OrTerm(tuple(_fill_motif(t, motif) for t in term.items))
    return term


def _active(cfg: Configuration, c: int, port: str | None) -> Formula:
    if port is not None:
        return PortLit(Port(c, port))
    return disj(*(PortLit(Port(c, p)) for p in cfg.instance(c).type.ports))


def _check_count(n: int, k: int):
    from math import comb

    if comb(n, k) > MAX_COMBINATIONS:
        raise EvaluationError(f"expansion needs C({n},{k}) clauses, more than {MAX_COMBINATIONS}")


def expand_restriction(r: Restriction, cfg: Configuration, motif: str) -> Term:
    """``AtMost(n)(b.p)`` as the rule forbidding every (n+1)-subset of participants."""
    m = r.motif or motif
    if r.type not in cfg.types:
        raise EvaluationError(f"unknown component type {r.type!r}")
    if r.port is not None and r.port not in cfg.types[r.type].ports:
        raise EvaluationError(f"{r.type} has no port {r.port!r}")
    if r.n < 0:
        raise EvaluationError("restriction bound must be >= 0")
    ids = cfg.of_type(m, r.type)
    if len(ids) <= r.n:
        return Rule(TRUE)
    _check_count(len(ids), r.n + 1)
    clauses = [Not(conj(*(_active(cfg, c, r.port) for c in group))) for group in itertools.combinations(ids, r.n + 1)]
    return Rule(conj(*clauses))


# -- constraint macros --------------------------------------------------------------------------


def _domains(mc: Macro, cfg: Configuration, motif: str) -> list[list[int]]:
    return [cfg.of_type(motif, e.type) for e in mc.entries]


def _psi(mc: Macro, anchor: int, tup: tuple[int, ...]) -> Formula:
    if mc.predicate is None:
        return TRUE
    mapping = {e.index: c for e, c in zip(mc.entries, tup)}
    mapping["self"] = anchor
    return Pred(substitute(mc.predicate, mapping))


def _tuples(domains: list[list[int]]):
    total = 1
    for d in domains:
        total *= max(len(d), 1)
    if total > MAX_COMBINATIONS:
        raise EvaluationError(f"macro expansion over {total} index tuples is too large")
    return itertools.product(*domains)


def _qualified(mc: Macro, anchor: int, domains, i: int, j: int) -> Formula:
    """Some completion of the index tuple with position ``i`` fixed to ``j`` satisfies the predicate."""
    others = [d if h != i else [j] for h, d in enumerate(domains)]
    return disj(*(_psi(mc, anchor, t) for t in _tuples(others)))


def expand_macro(mc: Macro, anchor: int, cfg: Configuration, motif: str | None = None) -> Formula:
    """Quantifier-free formula for constraint ``mc`` seen from instance ``anchor``."""
    m = mc.motif or motif
    if m is None:
        m = cfg.motif_of(anchor)
    problems = check_well_formed(mc, dict(cfg.types))
    if problems:
        raise WellFormednessError(problems)
    domains = _domains(mc, cfg, m)
    q = [e.port for e in mc.entries]

    def lit(i: int, c: int) -> Formula:
        return PortLit(Port(c, q[i]))

    if mc.kind == "Require":
        return disj(*(conj(_psi(mc, anchor, t), *(lit(i, c) for i, c in enumerate(t))) for t in _tuples(domains)))

    if mc.kind == "Accept":
        listed = {(e.type, e.port) for e in mc.entries}
        parts: list[Formula] = []
        for tname in sorted(cfg.types):
            for p in cfg.types[tname].ports:
                if (tname, p) in listed:
                    continue
                for c in cfg.of_type(m, tname):
                    if c == anchor and p == mc.anchor_port:
                        continue
                    parts.append(Not(PortLit(Port(c, p))))
        for t in _tuples(domains):
            psi = _psi(mc, anchor, t)
            if psi == TRUE:
                continue
            parts.append(disj(psi, conj(*(Not(lit(i, c)) for i, c in enumerate(t)))))
        return conj(*parts)

    if mc.kind in ("AtMost", "Unique"):
        k = 1 if mc.kind == "Unique" else mc.k
        return conj(*_at_most(mc, anchor, domains, lit, k))

    if mc.kind == "AtLeast":
        return conj(*_at_least(mc, anchor, domains, lit, mc.k))

    if mc.kind == "Exactly":
        return conj(*_at_most(mc, anchor, domains, lit, mc.k), *_at_least(mc, anchor, domains, lit, mc.k))

    raise EvaluationError(f"unknown constraint {mc.kind!r}")


def _at_most(mc, anchor, domains, lit, k) -> list[Formula]:
    # a qualified participant j forbids k further distinct participants of the same port
    out = []
    for i, dom in enumerate(domains):
        for j in dom:
            qual = _qualified(mc, anchor, domains, i, j)
            if qual == FALSE:
                continue
            rest = [c for c in dom if c != j]
            if len(rest) < k:
                continue
            _check_count(len(rest), k)
            crowd = disj(*(conj(*(lit(i, c) for c in group)) for group in itertools.combinations(rest, k)))
            out.append(disj(Not(qual), Not(lit(i, j)), Not(crowd)))
    return out


def _at_least(mc, anchor, domains, lit, k) -> list[Formula]:
    # a qualified participant j needs k-1 further distinct participants of the same port
    out = []
    for i, dom in enumerate(domains):
        for j in dom:
            qual = _qualified(mc, anchor, domains, i, j)
            if qual == FALSE:
                continue
            rest = [c for c in dom if c != j]
            _check_count(max(len(rest), 1), max(k - 1, 0))
            company = disj(*(conj(*(lit(i, c) for c in group)) for group in itertools.combinations(rest, k - 1)))
            out.append(disj(Not(qual), Not(lit(i, j)), company))
    return out


def operations_in(rho: CoordTerm) -> list[Operation]:
    """Every operation syntactically present in ``rho`` (conditionals flattened)."""
    out: list[Operation] = []

    def walk_ops(opset):
        for op in opset:
            out.append(op)
            if isinstance(op, If):
                walk_ops(op.then)
                walk_ops(op.orelse)

    def walk_term(t):
        if isinstance(t, Rule):
            walk_ops(t.ops)
        elif isinstance(t, (AndTerm, OrTerm)):
            for x in t.items:
                walk_term(x)

    def walk(r):
        if isinstance(r, Lifted):
            walk_term(r.term)
        elif isinstance(r, Quantified):
            walk_term(r.body)
        elif isinstance(r, Conjunctive):
            walk_ops(r.ops)
        elif isinstance(r, (AndC, OrC)):
            for x in r.items:
                walk(x)

    walk(rho)
    return out

