"""Systems of motifs, the global step rule and the execution engine."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .core import ComponentType, Configuration, Port, sort_ports
from .errors import DreamError, Quiescent, WellFormednessError
from .foil import CoordTerm, check_well_formed, expand, operations_in
from .motif import Motif, check_motif_state, step_actions
from .ops import Migrate, apply_actions, resolve, sample_actions
from .pil import TRUE, And, Formula, Idle, Not, Or, conj, interactions_over, ports_in, simplify
from .pil import satisfies as pil_satisfies
from .pilops import Term, guard_of, ops_of, satisfies
from .search import MaskSpace, maximal, satisfying_masks

METRIC_KINDS = ("distinct", "sum", "count", "min", "max")
SEARCH_MODES = ("vector", "enumerate")


@dataclass(frozen=True)
class Metric:
    """Scenario observable computed over every instance of ``type``."""

    name: str
    kind: str
    type: str
    var: str | None = None

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise DreamError(f"unknown metric kind {self.kind!r}")
        if self.kind != "count" and self.var is None:
            raise DreamError(f"metric {self.name!r} needs a variable")

    def value(self, cfg: Configuration) -> Any:
        insts = [i for i in cfg.instances().values() if i.type.name == self.type]
        if self.kind == "count":
            return len(insts)
        vals = [i.valuation[self.var] for i in insts]
        if self.kind == "distinct":
            return len(set(vals))
        if self.kind == "sum":
            return sum(vals)
        if not vals:
            return 0
        return min(vals) if self.kind == "min" else max(vals)


Selector = Callable[[Sequence[frozenset], random.Random], frozenset]


def canonical_key(a: frozenset) -> tuple:
    return tuple((p.instance, p.name) for p in sort_ports(a))


def select_maximal_uniform(candidates: Sequence[frozenset], rng: random.Random) -> frozenset:
    """Keep the inclusion-maximal candidates and draw one uniformly."""
    top = maximal_candidates(candidates)
    return top[rng.randrange(len(top))] if len(top) > 1 else top[0]


def maximal_candidates(candidates: Sequence[frozenset]) -> list[frozenset]:
    ordered = sorted(set(candidates), key=lambda a: -len(a))
    kept: list[frozenset] = []
    for a in ordered:
        if not any(a < k for k in kept):
            kept.append(a)
    return sorted(kept, key=canonical_key)


@dataclass
class System:
    types: Mapping[str, ComponentType]
    motifs: Mapping[str, Motif]
    initial: Configuration
    migration: CoordTerm | None = None
    metrics: tuple[Metric, ...] = ()
    steps: int = 20
    seed: int = 0
    max_ports: int = 24
    name: str = "system"
    selector: Selector = field(default=select_maximal_uniform, repr=False)

    def __post_init__(self):
        problems = []
        if set(self.motifs) != set(self.initial.motifs):
            problems.append(f"motifs {sorted(self.motifs)} differ from the configured ones {sorted(self.initial.motifs)}")
        for name, m in self.motifs.items():
            if m.name != name:
                problems.append(f"motif registered as {name!r} is named {m.name!r}")
            problems += [f"motif {name}: {p}" for p in check_well_formed(m.term, dict(self.types))]
        if self.migration is not None:
            problems += [f"migration: {p}" for p in check_well_formed(self.migration, dict(self.types))]
            bad = [op for op in operations_in(self.migration) if not isinstance(op, Migrate)]
            if bad:
                problems.append(f"migration: only migrate operations are allowed, found {bad[0]!r}")
        for m in self.metrics:
            if m.type not in self.types:
                problems.append(f"metric {m.name}: unknown type {m.type!r}")
            elif m.var is not None and not self.types[m.type].has_var(m.var):
                problems.append(f"metric {m.name}: {m.type} has no variable {m.var!r}")
        if problems:
            raise WellFormednessError(problems)

    def measure(self, cfg: Configuration) -> dict[str, Any]:
        return {m.name: m.value(cfg) for m in self.metrics}


def _default_motif(system: System) -> str | None:
    return next(iter(system.motifs)) if len(system.motifs) == 1 else None


def _drop_foreign_idle(f: Formula, own: set) -> Formula:
    # a motif only sees its own ports, so other instances are always idle there
    if isinstance(f, Idle):
        return f if f.instance in own else TRUE
    if isinstance(f, Not):
        return Not(_drop_foreign_idle(f.operand, own))
    if isinstance(f, And):
        return And(tuple(_drop_foreign_idle(x, own) for x in f.items))
    if isinstance(f, Or):
        return Or(tuple(_drop_foreign_idle(x, own) for x in f.items))
    return f


def restricted_guard(term: Term, cfg: Configuration, motif: str, enabled: set[Port]) -> Formula:
    """Guard of ``term`` with state predicates evaluated and foreign or disabled ports set to false."""
    own = set(cfg.motifs[motif].instances)
    f = guard_of(term)
    allowed = {p for p in enabled if p.instance in own}
    f = simplify(f, cfg, motif, known_false=frozenset(ports_in(f) - allowed))
    return simplify(_drop_foreign_idle(f, own))


def split(a: frozenset, cfg: Configuration) -> dict[str, frozenset]:
    """Decompose ``a`` into its per-motif parts."""
    parts: dict[str, set] = {m: set() for m in cfg.motifs}
    for p in a:
        parts[cfg.motif_of(p.instance)].add(p)
    return {m: frozenset(s) for m, s in parts.items()}


class Engine:
    """Executes a system; ``debug`` re-checks maximality and state consistency after each step.

    ``search`` picks how candidates are found: ``vector`` evaluates the
    folded guards on every interaction at once with numpy, ``enumerate``
    walks the interactions one by one through the satisfaction relation.
    Both are exhaustive and return the same candidates.
    """

    def __init__(self, system: System, seed: int | None = None, debug: bool = False, search: str = "vector"):
        if search not in SEARCH_MODES:
            raise DreamError(f"unknown search mode {search!r}; expected one of {', '.join(SEARCH_MODES)}")
        self.system = system
        self.search = search
        self.rng = random.Random(system.seed if seed is None else seed)
        self.debug = debug
        self._expanded: dict[str, Term] = {}
        self._expanded_for: tuple | None = None

    def expansions(self, cfg: Configuration) -> dict[str, Term]:
        # expansion only reads which instances of which type sit in which motif
        key = tuple(sorted((cid, cfg.instance(cid).type.name, cfg.motif_of(cid)) for cid in cfg.instance_ids()))
        if key != self._expanded_for:
            self._expanded = {name: m.expand(cfg) for name, m in self.system.motifs.items()}
            self._expanded_for = key
        return self._expanded

    def candidates(self, cfg: Configuration, terms: Mapping[str, Term] | None = None) -> list[frozenset]:
        terms = self.expansions(cfg) if terms is None else terms
        space = MaskSpace(cfg.enabled_ports(), self.system.max_ports)
        enabled = set(space.ports)
        guards = [restricted_guard(terms[m], cfg, m, enabled) for m in self.system.motifs]
        if self.search == "vector":
            found = [space.interaction(x) for x in satisfying_masks(guards, space) if x]
        else:
            guard = conj(*guards)
            found = [a for a in interactions_over(space.ports, self.system.max_ports) if a and pil_satisfies(a, None, guard)]
        if self.system.migration is not None:
            found = [a for a in found if self._post_motif(cfg, terms, a, migrating=True)]
        return sorted(found, key=canonical_key)

    def _motif_actions(self, cfg: Configuration, terms: Mapping[str, Term], a: frozenset):
        actions = []
        for m, part in split(a, cfg).items():
            if part:
                actions += step_actions(cfg, terms[m], part, m)
        return actions

    def _post_motif(self, cfg, terms, a, migrating=False) -> list[Configuration]:
        """Post-motif configurations; with ``migrating`` only those where ``a`` satisfies the migration term."""
        outs = apply_actions(self._motif_actions(cfg, terms, a), cfg.fire(a))
        if migrating:
            mu = self.system.migration
            outs = [g for g in outs if satisfies(a, g, expand(mu, g, _default_motif(self.system)))]
        return outs

    def step(self, cfg: Configuration) -> tuple[frozenset, Configuration, int]:
        terms = self.expansions(cfg)
        cands = self.candidates(cfg, terms)
        if not cands:
            raise Quiescent("no interaction is enabled")
        a = self.system.selector(cands, self.rng)
        if self.debug:
            bigger = [c for c in cands if a < c]
            if bigger:
                raise DreamError(f"selected interaction is not maximal; {sorted(map(str, bigger[0]))} extends it")
        actions = self._motif_actions(cfg, terms, a)
        fired = cfg.fire(a)
        count = len(actions)
        mu = self.system.migration
        if mu is None:
            nxt = sample_actions(actions, fired, self.rng)
        else:
            outs = self._post_motif(cfg, terms, a, migrating=True)
            mid = outs[self.rng.randrange(len(outs))] if len(outs) > 1 else outs[0]
            mterm = expand(mu, mid, _default_motif(self.system))
            macts = resolve(ops_of(a, mid, mterm), mid)
            count += len(macts)
            nxt = sample_actions(macts, mid, self.rng)
        if self.debug:
            for name, st in nxt.motifs.items():
                problems = check_motif_state(st)
                if problems:
                    raise DreamError(f"motif {name}: {problems}")
        return a, nxt, count


@dataclass(frozen=True)
class TraceStep:
    index: int
    interaction: frozenset
    op_count: int
    digest: str
    metrics: Mapping[str, Any]


@dataclass
class Trace:
    initial_metrics: Mapping[str, Any]
    steps: list[TraceStep]
    final: Configuration
    quiescent: bool = False

    def rows(self) -> list[tuple[int, str, Any]]:
        """``(step, metric, value)`` rows; step 0 is the initial state, step k follows the k-th interaction."""
        out = [(0, k, v) for k, v in self.initial_metrics.items()]
        for s in self.steps:
            out += [(s.index + 1, k, v) for k, v in s.metrics.items()]
        return out

    def series(self, metric: str) -> list[Any]:
        return [self.initial_metrics[metric]] + [s.metrics[metric] for s in self.steps]


def run(system: System, n_steps: int | None = None, seed: int | None = None, debug: bool = False,
        on_step: Callable[[TraceStep, Configuration, Configuration], None] | None = None, search: str = "vector") -> Trace:
    """Execute up to ``n_steps`` steps, stopping early on quiescence."""
    n = system.steps if n_steps is None else n_steps
    if n < 0:
        raise DreamError("the number of steps must be >= 0")
    engine = Engine(system, seed, debug, search)
    cfg = system.initial
    steps: list[TraceStep] = []
    quiescent = False
    for i in range(n):
        try:
            a, nxt, count = engine.step(cfg)
        except Quiescent:
            quiescent = True
            break
        record = TraceStep(i, a, count, nxt.fingerprint(), system.measure(nxt))
        if on_step is not None:
            on_step(record, cfg, nxt)
        steps.append(record)
        cfg = nxt
    return Trace(system.measure(system.initial), steps, cfg, quiescent)


def candidate_interactions(system: System, cfg: Configuration | None = None, search: str = "vector") -> list[frozenset]:
    return Engine(system, search=search).candidates(system.initial if cfg is None else cfg)


def step(system: System, cfg: Configuration, rng: random.Random) -> tuple[frozenset, Configuration]:
    engine = Engine(system)
    engine.rng = rng
    a, nxt, _ = engine.step(cfg)
    return a, nxt


def convergence_step(series: Sequence[Any], target: Any = 1) -> int | None:
    """First index from which ``series`` stays at ``target``; ``None`` if it never settles."""
    for i in range(len(series)):
        if all(v == target for v in series[i:]):
            return i
    return None
