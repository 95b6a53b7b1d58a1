import dataclasses
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dream.core import Port
from dream.dsl.parser import parse
from dream.dsl.scenarios import MASTER_SLAVE_TYPES
from dream.errors import WellFormednessError
from dream.expr import BinOp, Inst, var
from dream.foil import (
    AndC,
    Conjunctive,
    Decl,
    Lifted,
    Macro,
    MacroEntry,
    OrC,
    Quantified,
    Restriction,
    check_well_formed,
    expand,
    expand_declarations,
    expand_macro,
    expand_restriction,
)
from dream.ops import Assign
from dream.pil import FALSE, TRUE, PortLit, conj, models_of, port, satisfies
from dream.pilops import AndTerm, OrTerm, Rule, equivalent
from dream.pilops import satisfies as term_satisfies

from helpers import config, subsets, universe_of
from macros import TYPE_A, TYPE_B, MacroCase, mismatches, oracle, random_case

TYPES = parse(MASTER_SLAVE_TYPES + "\nmotif ms { map nodes {0}; term true -> {}; }\nsystem { }\n").types


def ms_config(*kinds):
    return config(TYPES.values(), {"ms": [(k, {}) for k in kinds]})


def test_master_rule_is_well_formed():
    rho = Quantified(
        (Decl("forall", "m", "Master"), Decl("exists", "s", "Slave")),
        Rule(conj(port("m", "link"), port("s", "bind")), frozenset({Assign(var("s", "master"), Inst("m"))})),
    )
    assert check_well_formed(rho, TYPES) == []


def test_unbound_variable_is_reported():
    rho = Quantified((Decl("forall", "m", "Master"),), Rule(conj(port("m", "link"), port("s2", "bind"))))
    problems = check_well_formed(rho, TYPES)
    assert problems and any("s2" in p for p in problems)


def test_missing_quantifier_is_reported():
    rho = Quantified((Decl("forall", "s", "Slave"), Decl(None, "m", "Master")), Rule(conj(port("s", "bind"), port("m", "link"))))
    assert any("m" in p and "quantifier" in p for p in check_well_formed(rho, TYPES))


def test_unknown_port_and_type():
    assert check_well_formed(Restriction(1, "Ghost"), TYPES)
    assert check_well_formed(Restriction(1, "Slave", "fly"), TYPES)
    assert check_well_formed(Macro("AtMost", "Slave", "bind", (MacroEntry("bind", "Slave", "j"),), k=0), TYPES)


def test_forall_expands_to_conjunction_over_instances():
    cfg = ms_config("Master", "Master", "Slave", "Master", "Slave")
    body = Rule(port("c", "bind"))
    out = expand_declarations([Decl("forall", "c", "Slave")], body, cfg, "ms")
    assert out == AndTerm((Rule(PortLit(Port(3, "bind"))), Rule(PortLit(Port(5, "bind")))))


def test_empty_quantifiers():
    cfg = ms_config("Master")
    body = Rule(port("c", "bind"))
    exists = expand_declarations([Decl("exists", "c", "Slave")], body, cfg, "ms")
    forall = expand_declarations([Decl("forall", "c", "Slave")], body, cfg, "ms")
    assert equivalent(exists, Rule(FALSE), universe_of(cfg), [cfg])
    assert equivalent(forall, Rule(TRUE), universe_of(cfg), [cfg])


def test_expansion_commutes_with_and_or():
    cfg = ms_config("Master", "Slave", "Slave")
    r1 = Quantified((Decl("forall", "c", "Slave"),), Rule(port("c", "bind")))
    r2 = Quantified((Decl("exists", "c", "Slave"),), Rule(port("c", "serve")))
    u = universe_of(cfg)
    assert equivalent(expand(AndC((r1, r2)), cfg, "ms"), AndTerm((expand(r1, cfg, "ms"), expand(r2, cfg, "ms"))), u, [cfg])
    assert equivalent(expand(OrC((r1, r2)), cfg, "ms"), OrTerm((expand(r1, cfg, "ms"), expand(r2, cfg, "ms"))), u, [cfg])


def test_expansion_tracks_instance_set():
    rho = Restriction(1, "Slave", "bind")
    small, large = ms_config("Slave", "Slave"), ms_config("Slave", "Slave", "Slave")
    two = frozenset({Port(2, "bind"), Port(3, "bind")})
    assert not term_satisfies(two, large, expand(rho, large, "ms"))
    assert not term_satisfies(frozenset({Port(1, "bind"), Port(2, "bind")}), small, expand(rho, small, "ms"))


# -- restrictions -------------------------------------------------------------------------


@pytest.fixture(scope="module")
def two_masters_three_slaves():
    return ms_config("Master", "Master", "Slave", "Slave", "Slave")


def test_at_most_one_bind(two_masters_three_slaves):
    cfg = two_masters_three_slaves
    t = expand_restriction(Restriction(1, "Slave", "bind"), cfg, "ms")
    assert not term_satisfies({Port(3, "bind"), Port(5, "bind")}, cfg, t)
    assert term_satisfies({Port(3, "bind"), Port(4, "serve")}, cfg, t)


def test_at_most_two_serve(two_masters_three_slaves):
    cfg = two_masters_three_slaves
    t = expand_restriction(Restriction(2, "Slave", "serve"), cfg, "ms")
    assert term_satisfies({Port(3, "serve"), Port(5, "serve")}, cfg, t)
    assert not term_satisfies({Port(3, "serve"), Port(4, "serve"), Port(5, "serve")}, cfg, t)


def test_at_most_one_master_any_port(two_masters_three_slaves):
    cfg = two_masters_three_slaves
    t = expand_restriction(Restriction(1, "Master"), cfg, "ms")
    assert not term_satisfies({Port(1, "link"), Port(2, "work")}, cfg, t)
    assert term_satisfies({Port(1, "link"), Port(3, "bind")}, cfg, t)


@given(st.integers(0, 3), st.sampled_from([None, "bind", "serve"]), st.integers(1, 4))
def test_restriction_counts_participants(n, p, slaves):
    cfg = ms_config(*["Slave"] * slaves)
    t = expand_restriction(Restriction(n, "Slave", p), cfg, "ms")
    assert t.ops == frozenset()
    for a in subsets(universe_of(cfg)):
        count = sum(1 for x in a if p is None or x.name == p)
        assert term_satisfies(a, cfg, t) == (count <= n)


# -- macros -------------------------------------------------------------------------------


def _cfg_q(n):
    return config([TYPE_A, TYPE_B], {"m": [("A", {}) for _ in range(n)]})


def _q(*ids):
    return frozenset(Port(i, "q") for i in ids)


def test_at_least_admits_empty_interaction():
    cfg = _cfg_q(3)
    f = expand_macro(Macro("AtLeast", "A", "r", (MacroEntry("q", "A", "j"),), k=2), 1, cfg, "m")
    assert satisfies(_q(1, 2), cfg, f)
    assert not satisfies(_q(1), cfg, f)
    assert satisfies(_q(), cfg, f)


def test_unique():
    cfg = _cfg_q(3)
    f = expand_macro(Macro("Unique", "A", "r", (MacroEntry("q", "A", "j"),)), 1, cfg, "m")
    assert not satisfies(_q(1, 2), cfg, f)
    assert satisfies(_q(1), cfg, f)


def test_require_other():
    cfg = _cfg_q(2)
    pred = BinOp("!=", Inst("j"), Inst("self"))
    f = expand_macro(Macro("Require", "A", "r", (MacroEntry("q", "A", "j"),), pred), 1, cfg, "m")
    universe = [Port(1, "q"), Port(2, "q")]
    assert {a for a in models_of(f, universe, cfg)} == {a for a in subsets(universe) if Port(2, "q") in a}


def test_exactly_is_at_most_and_at_least():
    rng = random.Random(5)
    for _ in range(40):
        case = random_case(rng, "Exactly")
        most = dataclasses.replace(case.macro, kind="AtMost")
        least = dataclasses.replace(case.macro, kind="AtLeast")
        f = expand_macro(case.macro, case.anchor, case.cfg, "m")
        g = conj(expand_macro(most, case.anchor, case.cfg, "m"), expand_macro(least, case.anchor, case.cfg, "m"))
        u = universe_of(case.cfg)
        assert models_of(f, u, case.cfg) == models_of(g, u, case.cfg)


def test_macro_is_guarded_by_the_anchor_port():
    cfg = _cfg_q(2)
    mc = Macro("Require", "A", "r", (MacroEntry("q", "A", "j"),), BinOp("!=", Inst("j"), Inst("self")))
    t = expand(mc, cfg, "m")
    assert term_satisfies(frozenset(), cfg, t)
    assert not term_satisfies({Port(1, "r")}, cfg, t)
    assert term_satisfies({Port(1, "r"), Port(2, "q")}, cfg, t)


def test_oracle_rejects_a_wrong_bound():
    rng = random.Random(11)
    caught = 0
    for _ in range(60):
        case = random_case(rng, "AtMost")
        shifted = dataclasses.replace(case.macro, k=case.macro.k + 1)
        f = expand_macro(shifted, case.anchor, case.cfg, "m")
        for a in subsets(universe_of(case.cfg)):
            if satisfies(a, case.cfg, f) != oracle(case.macro, case.anchor, case.cfg, a):
                caught += 1
                break
    assert caught > 0


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_macros_match_counting_oracle(rng):
    case = random_case(rng)
    assert mismatches(case) == []


@given(st.integers(1, 3), st.integers(1, 3))
def test_at_most_without_predicate_counts(n, k):
    cfg = _cfg_q(n)
    f = expand_macro(Macro("AtMost", "A", "r", (MacroEntry("q", "A", "j"),), k=k), 1, cfg, "m")
    for a in subsets(universe_of(cfg)):
        assert satisfies(a, cfg, f) == (sum(x.name == "q" for x in a) <= k)


def test_conjunctive_inner_declarations_scope_positive_branch():
    cfg = ms_config("Slave")
    rho = Conjunctive((Decl("forall", "s", "Slave"), Decl("exists", "m", "Master")), Port("s", "bind"), port("m", "link"))
    t = expand(rho, cfg, "ms")
    assert term_satisfies(frozenset(), cfg, t)
    assert not term_satisfies({Port(1, "bind")}, cfg, t)


def test_lifted_term_passes_through():
    cfg = ms_config("Slave")
    r = Rule(PortLit(Port(1, "bind")))
    assert expand(Lifted(r), cfg, "ms") == r
