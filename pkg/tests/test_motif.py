import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dream.core import Port
from dream.dsl.parser import parse
from dream.dsl.scenarios import MASTER_SLAVE_TYPES, ROBOT_TYPE, SENSING_TERM, master_slaves
from dream.errors import EvaluationError, FiringError, ModelError
from dream.expr import Inst, lit
from dream.maps import explicit_map, lattice_positions, torus_map
from dream.motif import Motif, apply_reconfig, check_motif_state, motif_step
from dream.ops import AddEdge, AddNode, Create, Delete, Move, RemoveEdge, RemoveNode

EXPLICIT = MASTER_SLAVE_TYPES + """
motif ms {
  map nodes {0, 1} edges {0 -> 1};
  term true -> {};
}
system {
  instance Master in ms at 0;
  instance Slave in ms at 1 { mem = 4 };
}
"""


@pytest.fixture
def small():
    return parse(EXPLICIT).initial


def test_move_rebinds_address(small):
    out = apply_reconfig(Move(Inst(2), lit(0)), small, "ms")
    assert out.address(2) == 0
    assert out.instance(2) == small.instance(2)


def test_remove_node_cascades(small):
    out = apply_reconfig(RemoveNode(lit(1)), small, "ms")
    assert not out.has_instance(2)
    assert 1 not in out.motifs["ms"].map
    assert not out.motifs["ms"].map.edges
    assert check_motif_state(out.motifs["ms"]) == []


def test_create_starts_at_initial_state(small):
    out = apply_reconfig(Create("Slave", lit(0)), small, "ms")
    new = small.next_id
    assert out.instance(new).location == "wait"
    assert out.instance(new).valuation["master"] == 0
    assert out.address(new) == 0
    assert out.next_id == new + 1


def test_create_at_missing_node_fails(small):
    with pytest.raises(EvaluationError):
        apply_reconfig(Create("Slave", lit(7)), small, "ms")


def test_move_unknown_instance_fails(small):
    with pytest.raises((EvaluationError, ModelError)):
        apply_reconfig(Move(Inst(9), lit(0)), small, "ms")


def test_idempotent_node_and_edge_edits(small):
    same = apply_reconfig(AddNode(lit(0)), small, "ms")
    assert same.motifs["ms"].map.nodes == small.motifs["ms"].map.nodes
    gone = apply_reconfig(RemoveEdge(lit(1), lit(0)), small, "ms")
    assert gone.motifs["ms"].map.edges == small.motifs["ms"].map.edges
    added = apply_reconfig(AddEdge(lit(1), lit(0)), small, "ms")
    assert (1, 0) in added.motifs["ms"].map.edges


def test_delete_drops_address(small):
    out = apply_reconfig(Delete(Inst(2)), small, "ms")
    assert not out.has_instance(2) and 2 not in out.motifs["ms"].address


# -- torus ----------------------------------------------------------------------------------


def test_torus_wrap_and_distance():
    m = torus_map(9)
    assert m.normalize((8 + 1, 0 + 0)) == (0, 0)
    assert m.distance((0, 0), (8, 0)) == 1


def test_torus_needs_positive_size():
    with pytest.raises(ModelError):
        torus_map(0)


@given(st.integers(1, 12), st.data())
def test_torus_distance_is_minimal_wrapped(size, data):
    coord = st.integers(0, size - 1)
    a = (data.draw(coord), data.draw(coord))
    b = (data.draw(coord), data.draw(coord))
    brute = min(
        math.hypot(b[0] - a[0] + i * size, b[1] - a[1] + j * size) for i, j in itertools.product((-1, 0, 1), repeat=2)
    )
    assert math.isclose(torus_map(size).distance(a, b), brute)


def test_lattice_is_uniform_on_nine():
    pos = lattice_positions(9)
    assert pos == [(x, y) for y in (1, 4, 7) for x in (1, 4, 7)]


@given(st.sampled_from([6, 9, 12, 15, 18, 21]))
def test_lattice_spacing_is_equal(size):
    xs = sorted({x for x, _ in lattice_positions(size)})
    gaps = {b - a for a, b in zip(xs, xs[1:])} | {xs[0] + size - xs[-1]}
    assert gaps == {size // 3}


# -- motif steps --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def ms():
    return parse(master_slaves(1))


def _only(outs):
    assert len(outs) == 1
    return outs[0]


def test_master_slaves_cycle(ms):
    motif = ms.motifs["ms"]
    cfg = ms.initial
    cfg = _only(motif_step(cfg, motif, {Port(1, "link"), Port(2, "bind")}))
    cfg = _only(motif_step(cfg, motif, {Port(1, "link"), Port(3, "bind")}))
    assert cfg.instance(1).valuation["slaves"] == frozenset({2, 3})
    assert cfg.instance(2).valuation["master"] == 1
    mem = cfg.instance(2).valuation["mem"] + cfg.instance(3).valuation["mem"]
    cfg = _only(motif_step(cfg, motif, {Port(1, "work"), Port(2, "serve"), Port(3, "serve")}))
    assert cfg.instance(1).valuation["buffer"] == mem
    assert cfg.instance(1).valuation["slaves"] == frozenset()
    assert cfg.instance(2).valuation["master"] == 0 and cfg.instance(3).valuation["master"] == 0
    assert {cfg.instance(c).location for c in (2, 3)} == {"wait"}


def test_empty_step_is_identity(ms):
    assert motif_step(ms.initial, ms.motifs["ms"], set()) == [ms.initial]


def test_step_rejects_unsatisfying_interaction(ms):
    with pytest.raises(FiringError):
        motif_step(ms.initial, ms.motifs["ms"], {Port(2, "bind")})


ONE_ROBOT = ROBOT_TYPE + "\nmotif flock {\n  map torus 9;\n" + SENSING_TERM + """}
system {
  instance Robot in flock at (4, 4) { range = 3; dir = (0, 1) };
  instance Robot in flock at (8, 2) { range = 3; dir = (1, 0) };
}
"""


def test_robot_tick_moves_and_counts():
    s = parse(ONE_ROBOT)
    out = _only(motif_step(s.initial, s.motifs["flock"], {Port(1, "tick"), Port(2, "tick")}))
    assert out.address(1) == (4, 5)
    assert out.address(2) == (0, 2)
    assert out.instance(1).valuation["clock"] == 1


def test_step_without_operations_equals_fire():
    s = parse(EXPLICIT.replace("instance Master in ms at 0;\n", ""))
    motif = Motif("ms")
    a = {Port(1, "bind")}
    assert motif_step(s.initial, motif, a) == [s.initial.fire(a)]


def test_created_instance_does_not_join_the_step():
    text = MASTER_SLAVE_TYPES + """
motif ms {
  map nodes {0};
  term [forall s: Slave] s.bind => true -> { create(Slave, 0) };
}
system { instance Slave in ms at 0; }
"""
    s = parse(text)
    out = _only(motif_step(s.initial, s.motifs["ms"], {Port(1, "bind")}))
    assert out.instance(1).location == "ready"
    assert out.instance(2).location == "wait"


def test_snapshot_attribute_reads():
    text = ROBOT_TYPE + """
motif marks {
  map torus 3;
  node var ts: int = 0;
  term [forall r: Robot] r.tick => true -> { at(r).ts := r.clock + 5; move(r, at(r) + (1, 0)) };
}
system { instance Robot in marks at (0, 0); }
"""
    s = parse(text)
    out = _only(motif_step(s.initial, s.motifs["marks"], {Port(1, "tick")}))
    st_ = out.motifs["marks"]
    assert st_.map.attr((0, 0), "ts") == 5
    assert st_.map.attr((1, 0), "ts") == 0
    assert out.address(1) == (1, 0)


def test_check_motif_state_reports_dangling_edges(small):
    st_ = small.motifs["ms"]
    broken = explicit_map([0, 1], [(0, 1)])
    object.__setattr__(broken, "nodes", frozenset({0}))
    assert check_motif_state(type(st_)(st_.instances, st_.map, st_.address)) == []
    assert any("dangles" in p for p in check_motif_state(type(st_)({}, broken, {})))
