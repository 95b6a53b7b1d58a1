"""Component types, instances, ports, interactions and configurations."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

from .errors import EvaluationError, FiringError, ModelError
from .expr import Expr, evaluate, free_variables
from .maps import Map

IDLE = "idle"
VALUE_TYPES = ("int", "bool", "set", "vec", "id")


def default_value(vtype: str) -> Any:
    if vtype in ("int", "id"):
        return 0
    if vtype == "bool":
        return False
    if vtype == "set":
        return frozenset()
    if vtype == "vec":
        return (0, 0)
    raise ModelError(f"unknown value type {vtype!r}")


def check_value(vtype: str, value: Any) -> bool:
    if vtype in ("int", "id"):
        return isinstance(value, int) and not isinstance(value, bool)
    if vtype == "bool":
        return isinstance(value, bool)
    if vtype == "set":
        return isinstance(value, frozenset)
    if vtype == "vec":
        return isinstance(value, tuple) and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    return False


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: str = "int"
    init: Expr | None = None

    def __post_init__(self):
        if self.type not in VALUE_TYPES:
            raise ModelError(f"variable {self.name!r}: unknown type {self.type!r}")


@dataclass(frozen=True)
class Transition:
    source: str
    port: str
    target: str


@dataclass(frozen=True)
class ComponentType:
    """A transition system template ``(S, s0, X, P, T)`` plus per-port local operations.

    ``port_ops`` maps a port name to an operation set written over the
    component variable ``self``; it runs whenever an instance fires that port.
    """

    name: str
    locations: tuple[str, ...]
    initial: str
    variables: tuple[VarDecl, ...] = ()
    ports: tuple[str, ...] = ()
    transitions: tuple[Transition, ...] = ()
    port_ops: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        if self.initial not in self.locations:
            raise ModelError(f"type {self.name}: initial location {self.initial!r} is not a location")
        if IDLE in self.ports:
            raise ModelError(f"type {self.name}: {IDLE!r} is reserved")
        if len(set(self.ports)) != len(self.ports):
            raise ModelError(f"type {self.name}: duplicate port names")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ModelError(f"type {self.name}: duplicate variable names")
        seen = set()
        for t in self.transitions:
            if t.port not in self.ports:
                raise ModelError(f"type {self.name}: transition on unknown port {t.port!r}")
            if t.source not in self.locations or t.target not in self.locations:
                raise ModelError(f"type {self.name}: transition {t} leaves the location set")
            if t.port in seen:
                raise ModelError(f"type {self.name}: port {t.port!r} labels more than one transition")
            seen.add(t.port)
        for p in self.port_ops:
            if p not in self.ports:
                raise ModelError(f"type {self.name}: local operation on unknown port {p!r}")

    def var(self, name: str) -> VarDecl:
        for v in self.variables:
            if v.name == name:
                return v
        raise ModelError(f"type {self.name} has no variable {name!r}")

    def has_var(self, name: str) -> bool:
        return any(v.name == name for v in self.variables)

    def transition(self, port: str) -> Transition | None:
        for t in self.transitions:
            if t.port == port:
                return t
        return None


@dataclass(frozen=True, order=True)
class Port:
    instance: int | str
    name: str

    def __str__(self):
        return f"{self.instance}.{self.name}"


Interaction = frozenset  # frozenset[Port]


def interaction(*ports: Port) -> frozenset:
    return frozenset(ports)


def check_interaction(a: Iterable[Port]) -> frozenset:
    a = frozenset(a)
    seen = set()
    for p in a:
        if p.name == IDLE:
            raise FiringError(f"idle port {p} cannot appear in an interaction")
        if p.instance in seen:
            raise FiringError(f"two ports of instance {p.instance} in one interaction")
        seen.add(p.instance)
    return a


def sort_ports(a: Iterable[Port]) -> list[Port]:
    return sorted(a, key=lambda p: (p.instance, p.name))


def format_interaction(a: Iterable[Port]) -> str:
    return "{" + ", ".join(map(str, sort_ports(a))) + "}"


@dataclass(frozen=True)
class Instance:
    id: int
    type: ComponentType
    location: str
    valuation: Mapping[str, Any]

    def __post_init__(self):
        if self.location not in self.type.locations:
            raise ModelError(f"instance {self.id}: {self.location!r} is not a location of {self.type.name}")
        if set(self.valuation) != {v.name for v in self.type.variables}:
            raise ModelError(f"instance {self.id}: valuation domain differs from the variables of {self.type.name}")

    def with_location(self, location: str) -> "Instance":
        return replace(self, location=location)

    def with_value(self, name: str, value: Any) -> "Instance":
        vt = self.type.var(name).type
        if not check_value(vt, value):
            raise EvaluationError(f"type mismatch: {self.type.name}.{name} is {vt}, got {value!r}")
        val = dict(self.valuation)
        val[name] = value
        return replace(self, valuation=val)

    def digest(self) -> tuple:
        return (self.id, self.type.name, self.location, tuple(sorted((k, repr(v)) for k, v in self.valuation.items())))


def instantiate(ctype: ComponentType, id: int, used_ids: Iterable[int] = (), overrides: Mapping[str, Any] | None = None) -> Instance:
    """Create instance ``id`` of ``ctype`` at its initial location.

    Initial expressions are evaluated without a configuration, so they may not
    reference runtime state. ``overrides`` replace individual initial values.
    """
    if id in set(used_ids):
        raise ModelError(f"instance id {id} is already in use")
    if not isinstance(id, int) or isinstance(id, bool) or id < 1:
        raise ModelError(f"instance ids are positive integers, got {id!r}")
    overrides = dict(overrides or {})
    valuation = {}
    for v in ctype.variables:
        if v.name in overrides:
            value = overrides.pop(v.name)
        elif v.init is None:
            value = default_value(v.type)
        else:
            if free_variables(v.init):
                raise ModelError(f"{ctype.name}.{v.name}: initialiser references component variables")
            try:
                value = evaluate(v.init, None)
            except EvaluationError as exc:
                raise ModelError(f"{ctype.name}.{v.name}: initialiser cannot reference runtime state ({exc})") from None
        if not check_value(v.type, value):
            raise ModelError(f"{ctype.name}.{v.name}: initial value {value!r} is not of type {v.type}")
        valuation[v.name] = value
    if overrides:
        raise ModelError(f"{ctype.name} has no variables {sorted(overrides)}")
    return Instance(id, ctype, ctype.initial, valuation)


def enabled_ports(inst: Instance) -> frozenset:
    return frozenset(Port(inst.id, t.port) for t in inst.type.transitions if t.source == inst.location)


def fire(instances: Mapping[int, Instance], a: Iterable[Port]) -> dict[int, Instance]:
    """Move every participant along the transition labelled by its port.

    Non-participants idle; valuations are left untouched.
    """
    a = check_interaction(a)
    out = dict(instances)
    for p in a:
        inst = instances.get(p.instance)
        if inst is None:
            raise FiringError(f"port {p} belongs to no instance")
        t = inst.type.transition(p.name)
        if t is None or t.source != inst.location:
            raise FiringError(f"port {p} is not enabled ({inst.type.name} at {inst.location})")
        out[p.instance] = inst.with_location(t.target)
    return out


# -- configurations ---------------------------------------------------------------


@dataclass(frozen=True)
class MotifState:
    """Dynamic state of one motif: its instances, map and address function."""

    instances: Mapping[int, Instance]
    map: Map
    address: Mapping[int, Any] = field(default_factory=dict)

    def __post_init__(self):
        for cid, node in self.address.items():
            if cid not in self.instances:
                raise ModelError(f"address function binds unknown instance {cid}")
            if node not in self.map:
                raise ModelError(f"instance {cid} is bound to missing node {node!r}")

    def of_type(self, tname: str) -> list[int]:
        return sorted(c for c, i in self.instances.items() if i.type.name == tname)

    def digest(self) -> tuple:
        return (
            tuple(self.instances[c].digest() for c in sorted(self.instances)),
            self.map.digest(),
            tuple(sorted((c, repr(n)) for c, n in self.address.items())),
        )


@dataclass(frozen=True)
class Configuration:
    """Global configuration: the disjoint union of motif states.

    ``next_id`` is the monotone counter from which created instances draw
    their identifiers.
    """

    types: Mapping[str, ComponentType]
    motifs: Mapping[str, MotifState]
    next_id: int = 1

    def __post_init__(self):
        seen: dict[int, str] = {}
        for m, st in self.motifs.items():
            for cid in st.instances:
                if cid in seen:
                    raise ModelError(f"instance {cid} belongs to motifs {seen[cid]!r} and {m!r}")
                seen[cid] = m
                if cid >= self.next_id:
                    raise ModelError(f"instance id {cid} is not below the id counter {self.next_id}")
        object.__setattr__(self, "_owner", seen)

    def motif_of(self, cid: int) -> str:
        try:
            return self._owner[cid]
        except KeyError:
            raise EvaluationError(f"no instance with id {cid}") from None

    def instance(self, cid: int) -> Instance:
        return self.motifs[self.motif_of(cid)].instances[cid]

    def has_instance(self, cid: int) -> bool:
        return cid in self._owner

    def address(self, cid: int) -> Any:
        st = self.motifs[self.motif_of(cid)]
        try:
            return st.address[cid]
        except KeyError:
            raise EvaluationError(f"instance {cid} is not bound to any node") from None

    def instances(self) -> dict[int, Instance]:
        out = {}
        for st in self.motifs.values():
            out.update(st.instances)
        return out

    def instance_ids(self) -> list[int]:
        return sorted(self._owner)

    def of_type(self, motif: str, tname: str) -> list[int]:
        if motif not in self.motifs:
            raise EvaluationError(f"unknown motif {motif!r}")
        if tname not in self.types:
            raise EvaluationError(f"unknown component type {tname!r}")
        return self.motifs[motif].of_type(tname)

    def enabled_ports(self) -> list[Port]:
        out = []
        for cid in self.instance_ids():
            out.extend(enabled_ports(self.instance(cid)))
        return sort_ports(out)

    def with_motif(self, name: str, state: MotifState) -> "Configuration":
        motifs = dict(self.motifs)
        motifs[name] = state
        return replace(self, motifs=motifs)

    def fire(self, a: Iterable[Port]) -> "Configuration":
        a = check_interaction(a)
        if not a:
            return self
        motifs = dict(self.motifs)
        for m, st in self.motifs.items():
            part = [p for p in a if p.instance in st.instances]
            if part:
                motifs[m] = replace(st, instances=fire(st.instances, part))
        missing = [p for p in a if not self.has_instance(p.instance)]
        if missing:
            raise FiringError(f"ports {missing} belong to no instance")
        return replace(self, motifs=motifs)

    def digest(self) -> tuple:
        return (self.next_id, tuple((m, self.motifs[m].digest()) for m in sorted(self.motifs)))

    def fingerprint(self) -> str:
        return hashlib.sha256(repr(self.digest()).encode()).hexdigest()[:16]
