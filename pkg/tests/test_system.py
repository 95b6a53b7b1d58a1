import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dream.core import Port
from dream.dsl.parser import parse
from dream.dsl.scenarios import ROBOT_TYPE, SENSING_TERM, flock, master_slaves, stigmergy
from dream.errors import DreamError
from dream.motif import check_motif_state
from dream.system import (
    Engine,
    candidate_interactions,
    convergence_step,
    maximal_candidates,
    run,
    select_maximal_uniform,
)

from helpers import subsets


@pytest.fixture(scope="module")
def one_master():
    return parse(master_slaves(1))


def test_initial_candidates_are_the_two_links(one_master):
    cands = set(candidate_interactions(one_master))
    assert cands == {frozenset({Port(1, "link"), Port(2, "bind")}), frozenset({Port(1, "link"), Port(3, "bind")})}


TWO_ROBOTS = ROBOT_TYPE + "\nmotif flock {\n  map torus 9;\n" + SENSING_TERM + """}
system {
  instance Robot in flock at (1, 1) { range = 3; dir = (0, 1) };
  instance Robot in flock at (4, 4) { range = 3; dir = (1, 0) };
}
"""


def test_two_robots_tick_together():
    s = parse(TWO_ROBOTS)
    assert candidate_interactions(s) == [frozenset({Port(1, "tick"), Port(2, "tick")})]


def test_maximal_candidates_brute_force():
    # the models of p1 or (p2 and p3) over three ports
    ports = [Port(1, "p"), Port(2, "p"), Port(3, "p")]
    models = [a for a in subsets(ports) if a and (ports[0] in a or {ports[1], ports[2]} <= a)]
    expect = [a for a in models if not any(a < b for b in models)]
    assert set(maximal_candidates(models)) == set(expect) == {frozenset(ports)}


@given(st.lists(st.frozensets(st.integers(1, 5), min_size=1), min_size=1, max_size=12), st.integers(0, 99))
def test_selection_is_maximal(cands, seed):
    cands = [frozenset(Port(i, "p") for i in c) for c in cands]
    a = select_maximal_uniform(cands, random.Random(seed))
    assert a in cands and not any(a < b for b in cands)


def test_full_cycle_in_three_steps(one_master):
    seen = []
    trace = run(one_master, 3, seed=0, on_step=lambda r, pre, post: seen.append((r.interaction, pre, post)))
    assert len(trace.steps) == 3
    work = seen[2]
    assert work[0] == frozenset({Port(1, "work"), Port(2, "serve"), Port(3, "serve")})
    assert work[2].instance(1).valuation["buffer"] == 2 + 3
    assert trace.series("buffer") == [0, 0, 0, 5]


def test_zero_steps_and_negative_steps(one_master):
    trace = run(one_master, 0)
    assert trace.steps == [] and trace.final == one_master.initial
    with pytest.raises(DreamError):
        run(one_master, -1)


def test_runs_are_deterministic():
    s = parse(master_slaves(2, 4))
    a = run(s, 25, seed=3)
    b = run(s, 25, seed=3)
    assert [x.digest for x in a.steps] == [x.digest for x in b.steps]
    assert a.rows() == b.rows()


def test_unknown_search_mode(one_master):
    with pytest.raises(DreamError):
        Engine(one_master, search="magic")


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000))
def test_search_modes_agree(seed):
    s = parse(master_slaves(2, 3))
    a = run(s, 15, seed=seed, search="vector")
    b = run(s, 15, seed=seed, search="enumerate")
    assert [x.interaction for x in a.steps] == [x.interaction for x in b.steps]
    assert a.final == b.final


@pytest.mark.parametrize("text", [master_slaves(2, 4), flock(9, 3), stigmergy(9)], ids=["master-slaves", "flock", "stigmergy"])
def test_debug_mode_checks_maximality(text):
    trace = run(parse(text), 12, seed=1, debug=True)
    assert len(trace.steps) == 12


def test_motifs_stay_disjoint_and_consistent():
    s = parse(stigmergy(9))
    def check(record, pre, post):
        owners = [cid for st_ in post.motifs.values() for cid in st_.instances]
        assert len(owners) == len(set(owners))
        for st_ in post.motifs.values():
            assert check_motif_state(st_) == []
    run(s, 20, seed=2, on_step=check)


def test_quiescent_system_stops():
    s = parse(master_slaves(0, 2))
    trace = run(s, 5)
    assert trace.quiescent and trace.steps == []


def test_convergence_step():
    assert convergence_step([3, 1, 2, 1, 1]) == 3
    assert convergence_step([1, 1]) == 0
    assert convergence_step([1, 2]) is None
    assert convergence_step([]) is None
