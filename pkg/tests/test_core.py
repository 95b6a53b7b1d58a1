import pytest
from hypothesis import given
from hypothesis import strategies as st

from dream.core import (
    ComponentType,
    Port,
    Transition,
    VarDecl,
    check_interaction,
    enabled_ports,
    fire,
    instantiate,
)
from dream.dsl.parser import parse
from dream.dsl.scenarios import master_slaves
from dream.errors import FiringError, ModelError
from dream.expr import BinOp, evaluate, lit, var

from helpers import config, loop_type

# the propositional master labels link1/link2 on two transitions each; under the
# one-transition-per-port rule only this fragment of it is expressible
MASTER_3A = ComponentType(
    "Master",
    ("m00", "m10", "m01", "m11"),
    "m00",
    (),
    ("link1", "link2", "work"),
    (
        Transition("m00", "link1", "m10"),
        Transition("m00", "link2", "m01"),
        Transition("m11", "work", "m00"),
    ),
)


@pytest.fixture(scope="module")
def ms_types():
    return parse(master_slaves(1)).types


def test_instantiate_slave_defaults(ms_types):
    s = instantiate(ms_types["Slave"], 7)
    assert s.location == "wait"
    assert s.valuation == {"master": 0, "mem": 0}


def test_instantiate_master_defaults(ms_types):
    m = instantiate(ms_types["Master"], 1)
    assert m.location == "m"
    assert m.valuation == {"slaves": frozenset(), "buffer": 0}


def test_instantiate_rejects_used_id(ms_types):
    instantiate(ms_types["Slave"], 3, used_ids=[1, 2])
    with pytest.raises(ModelError):
        instantiate(ms_types["Slave"], 3, used_ids=[1, 3])


def test_initialiser_cannot_read_runtime_state():
    t = ComponentType("T", ("s",), "s", (VarDecl("x", "int", var(1, "x")),))
    with pytest.raises(ModelError):
        instantiate(t, 1)


def test_initialiser_expression_is_evaluated():
    t = ComponentType("T", ("s",), "s", (VarDecl("x", "int", BinOp("+", lit(2), lit(3))),))
    assert instantiate(t, 1).valuation["x"] == 5


def test_enabled_ports_follow_location(ms_types):
    s = instantiate(ms_types["Slave"], 2)
    assert enabled_ports(s) == {Port(2, "bind")}
    ready = s.with_location("ready")
    assert enabled_ports(ready) == {Port(2, "serve")}
    empty = ComponentType("E", ("s",), "s")
    assert enabled_ports(instantiate(empty, 1)) == frozenset()


def test_fire_moves_participants_only():
    m = instantiate(MASTER_3A, 1)
    out = fire({1: m}, {Port(1, "link1")})
    assert out[1].location == "m10"
    assert fire({1: m}, set())[1] == m


def test_fire_rejects_disabled_port(ms_types):
    s = instantiate(ms_types["Slave"], 7)
    with pytest.raises(FiringError):
        fire({7: s}, {Port(7, "serve")})


def test_interaction_has_one_port_per_instance():
    with pytest.raises(FiringError):
        check_interaction({Port(1, "link1"), Port(1, "link2")})
    with pytest.raises(FiringError):
        check_interaction({Port(1, "idle")})


def test_type_invariants():
    with pytest.raises(ModelError):
        ComponentType("T", ("a",), "b")
    with pytest.raises(ModelError):
        ComponentType("T", ("a",), "a", (), ("idle",))
    with pytest.raises(ModelError):
        ComponentType("T", ("a",), "a", (), ("p",), (Transition("a", "p", "a"), Transition("a", "p", "a")))
    with pytest.raises(ModelError):
        ComponentType("T", ("a",), "a", (), ("p",), (Transition("a", "p", "z"),))


PATHS = st.lists(st.sampled_from(["link1", "link2", "work"]), max_size=8)


@given(PATHS)
def test_fire_preserves_instances_and_valuations(path):
    t = loop_type("T", ports=("p", "q"), variables=(("x", "int"),))
    cfg = config([t, MASTER_3A], {"m": [("T", {"x": 4}), ("Master", {})]})
    insts = cfg.motifs["m"].instances
    for name in path:
        if name not in {t.port for t in MASTER_3A.transitions}:
            continue
        enabled = {p.name for p in enabled_ports(insts[2])}
        if name not in enabled:
            with pytest.raises(FiringError):
                fire(insts, {Port(2, name)})
            continue
        nxt = fire(insts, {Port(2, name), Port(1, "p")})
        assert set(nxt) == set(insts)
        assert all(nxt[c].valuation == insts[c].valuation for c in insts)
        assert enabled_ports(nxt[2]) <= {Port(2, p) for p in MASTER_3A.ports}
        insts = nxt


def test_expression_vector_and_set_arithmetic():
    cfg = config([loop_type("T", variables=(("v", "vec"), ("s", "set")))], {"m": [("T", {"v": (1, 2), "s": frozenset({3})})]})
    assert evaluate(BinOp("+", var(1, "v"), lit((2, 5))), cfg) == (3, 7)
    assert evaluate(BinOp("union", var(1, "s"), lit(frozenset({4}))), cfg) == frozenset({3, 4})
    assert evaluate(BinOp("in", lit(3), var(1, "s")), cfg) is True
