"""Built-in scenarios, generated as scenario text and fed through the parser.

Robot start directions are a fixed stand-in, not measured data; robots
receive the eight compass directions followed by (0, 1) again, in id order,
and sit on a 3x3 lattice spread evenly over the torus.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from ..errors import DreamError
from ..maps import lattice_positions
from ..system import System
from .parser import parse

DIRECTIONS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1))

MASTER_SLAVE_TYPES = """\
type Master {
  locations m;
  initial m;
  var slaves: set = {};
  var buffer: int = 0;
  ports link, work;
  transition link: m -> m;
  transition work: m -> m { slaves := {} };
}

type Slave {
  locations wait, ready;
  initial wait;
  var master: int = 0;
  var mem: int = 0;
  ports bind, serve;
  transition bind: wait -> ready;
  transition serve: ready -> wait { master := 0 };
}
"""

MASTER_SLAVE_TERM = """\
  term AtMost(1)(Master)
     & AtMost(1)(Slave.bind)
     & AtMost(2)(Slave.serve)
     & [forall m: Master, exists s: Slave]
         m.link => card(m.slaves) < 2 and s.bind -> { m.slaves := m.slaves union {s} }
     & [forall s: Slave, exists m: Master]
         s.bind => m.link -> { s.master := m }
     & [forall m: Master, exists s1: Slave, exists s2: Slave]
         m.work => s1 != s2 and card(m.slaves) = 2 and s1 in m.slaves and s2 in m.slaves
                   and s1.serve and s2.serve -> { m.buffer := s1.mem + s2.mem }
     & [forall s: Slave, exists m: Master]
         s.serve => s.master = m and m.work -> {};
"""

ROBOT_TYPE = """\
type Robot {
  locations r0;
  initial r0;
  var clock: int = 0;
  var range: int = 0;
  var ts: int = 0;
  var dir: vec = (0, 0);
  ports tick;
  transition tick: r0 -> r0 { clock := clock + 1 };
}
"""

SENSING_TERM = """\
  term [forall r: Robot] r.tick => true -> { move(r, at(r) + r.dir) }
     & [forall r1, r2: Robot] r1.tick => r2.tick -> {
         if r1 != r2 then {
           if distance(at(r1), at(r2)) < r1.range and (r1.ts < r2.ts or (r1.ts = r2.ts and r1 < r2)) then {
             r1.dir := r2.dir; r1.ts := r1.clock; r2.ts := r2.clock
           }
         }
       };
"""

STIGMERGY_TERM = """\
  node var dir: vec = (0, 0);
  node var ts: int = 0;
  term [forall r: Robot] r.tick -> {
         if at(r).ts > r.ts then {
           r.dir := at(r).dir; r.ts := r.clock; at(r).ts := r.clock
         } else {
           at(r).ts := r.clock; at(r).dir := r.dir
         };
         move(r, at(r) + r.dir)
       };
"""


def _vec(v) -> str:
    return f"({v[0]}, {v[1]})"


def master_slaves(masters: int = 1, slaves: int | None = None, steps: int = 20, seed: int = 0) -> str:
    slaves = 2 * masters if slaves is None else slaves
    if masters < 0 or slaves < 0:
        raise DreamError("instance counts must be >= 0")
    lines = [f"  instance Master in ms at 0;" for _ in range(masters)]
    lines += [f"  instance Slave in ms at 0 {{ mem = {cid} }};" for cid in range(masters + 1, masters + slaves + 1)]
    return (
        MASTER_SLAVE_TYPES
        + "\nmotif ms {\n  map nodes {0};\n" + MASTER_SLAVE_TERM + "}\n"
        + "\nsystem master_slaves {\n" + "\n".join(lines) + "\n}\n"
        + f"\nrun {{\n  steps {steps};\n  seed {seed};\n  metric buffer = sum(Master.buffer);\n  metric bound = count(Slave);\n}}\n"
    )


def _robots(motif: str, size: int, range_: int) -> str:
    lines = []
    for pos, d in zip(lattice_positions(size), DIRECTIONS):
        lines.append(f"  instance Robot in {motif} at {_vec(pos)} {{ range = {range_}; dir = {_vec(d)} }};")
    return "\n".join(lines)


def flock(size: int = 9, range: int = 3, steps: int = 30, seed: int = 0) -> str:
    if size < 3:
        raise DreamError("the torus needs size >= 3 to hold the robot lattice")
    return (
        ROBOT_TYPE
        + f"\nmotif flock {{\n  map torus {size};\n" + SENSING_TERM + "}\n"
        + "\nsystem flock {\n" + _robots("flock", size, range) + "\n}\n"
        + f"\nrun {{\n  steps {steps};\n  seed {seed};\n  metric flocks = distinct(Robot.dir);\n}}\n"
    )


def stigmergy(size: int = 9, steps: int = 100, seed: int = 0) -> str:
    if size < 3:
        raise DreamError("the torus needs size >= 3 to hold the robot lattice")
    return (
        ROBOT_TYPE
        + f"\nmotif marks {{\n  map torus {size};\n" + STIGMERGY_TERM + "}\n"
        + "\nsystem stigmergy {\n" + _robots("marks", size, 0) + "\n}\n"
        + f"\nrun {{\n  steps {steps};\n  seed {seed};\n  metric flocks = distinct(Robot.dir);\n}}\n"
    )


@dataclass(frozen=True)
class Builtin:
    build: Callable[..., str]
    params: tuple[str, ...]


BUILTINS = {
    "master-slaves": Builtin(master_slaves, ("masters", "slaves", "steps", "seed")),
    "flock": Builtin(flock, ("size", "range", "steps", "seed")),
    "stigmergy": Builtin(stigmergy, ("size", "steps", "seed")),
}


def scenario_source(name: str, **params) -> str:
    if name not in BUILTINS:
        raise DreamError(f"unknown scenario {name!r}; built-ins are {', '.join(BUILTINS)}")
    b = BUILTINS[name]
    bad = sorted(k for k, v in params.items() if v is not None and k not in b.params)
    if bad:
        raise DreamError(f"scenario {name} does not take {', '.join(bad)}")
    return b.build(**{k: v for k, v in params.items() if v is not None})


def load(target: str, **overrides) -> System:
    """A built-in scenario by name, or a scenario file, with parameter overrides."""
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if target in BUILTINS:
        return parse(scenario_source(target, **overrides))
    path = Path(target)
    if not path.exists():
        raise DreamError(f"unknown scenario {target!r}: not a built-in and no such file")
    bad = sorted(set(overrides) - {"steps", "seed"})
    if bad:
        raise DreamError(f"scenario files only accept --steps and --seed overrides, not {', '.join(bad)}")
    system = parse(path.read_text(encoding="utf-8"))
    return dataclasses.replace(system, **overrides) if overrides else system
