import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dream.core import Port
from dream.errors import DreamError, UniverseTooLarge
from dream.pil import (
    FALSE,
    TRUE,
    Idle,
    Not,
    PortLit,
    beta,
    conj,
    conjunctive_formula,
    core_form,
    disj,
    implies,
    interactions_over,
    models_of,
    satisfies,
    substitute_port,
    to_conjunctive,
)

from helpers import formulas, guard_configs, ref_formula, subsets, universes

P, Q, R, S, T = (Port(i, n) for i, n in enumerate("pqrst", start=1))
PQRST = [P, Q, R, S, T]
p, q, r, s, t = (PortLit(x) for x in PQRST)


def fs(*ports):
    return frozenset(ports)


def test_beta_single_interaction_is_full_monomial():
    assert beta([{P, Q}], PQRST) == conj(p, q, Not(r), Not(s), Not(t))
    assert satisfies({P, Q}, None, conj(p, q, Not(r)))


def test_beta_idle_is_all_negative():
    assert beta([set()], PQRST) == conj(*(Not(x) for x in (p, q, r, s, t)))


def test_beta_broadcast_equals_p_not_s_not_t():
    gamma = [{P}, {P, Q}, {P, R}, {P, Q, R}]
    assert models_of(beta(gamma, PQRST), PQRST) == models_of(conj(p, Not(s), Not(t)), PQRST)


def test_beta_singletons():
    gamma = [{P}, {Q}]
    expected = conj(disj(conj(p, Not(q)), conj(Not(p), q)), Not(r), Not(s), Not(t))
    assert models_of(beta(gamma, PQRST), PQRST) == models_of(expected, PQRST)


def test_beta_rejects_foreign_port():
    with pytest.raises(DreamError):
        beta([{Port(9, "z")}], PQRST)


def test_f1_strong_synchronisation():
    ports = [Port(i, f"p{i}") for i in (1, 2, 3)]
    a, b, c = (PortLit(x) for x in ports)
    f1 = conj(implies(a, b), implies(b, c), implies(c, a))
    assert models_of(f1, ports) == {fs(), fs(*ports)}


def test_f2_broadcast():
    tp, r1, r2 = Port(1, "t"), Port(2, "r1"), Port(3, "r2")
    f2 = conj(implies(TRUE, PortLit(tp)), implies(PortLit(r1), PortLit(tp)), implies(PortLit(r2), PortLit(tp)))
    nonempty = {a for a in models_of(f2, [tp, r1, r2]) if a}
    assert nonempty == {fs(tp), fs(tp, r1), fs(tp, r2), fs(tp, r1, r2)}


def test_broadcast_disjunction_equivalence_modulo_idling():
    universe = [P, Q, R]
    psi = disj(conj(Not(q), Not(r)), p)
    conjunctive = conjunctive_formula(to_conjunctive(psi, universe))
    target = conj(implies(q, p), implies(r, p))
    assert models_of(conjunctive, universe) == models_of(target, universe)
    assert models_of(conjunctive, universe) == models_of(psi, universe) | {fs()}


def test_trivial_satisfaction():
    assert satisfies(set(), None, Not(p))
    assert models_of(FALSE, PQRST) == set()
    assert all(v == TRUE for v in to_conjunctive(TRUE, PQRST).values())


# -- Master-Slaves over 7 ports: master 1 (link1, link2, work), slaves 2 and 3 --
LINK1, LINK2, WORK = Port(1, "link1"), Port(1, "link2"), Port(1, "work")
BIND1, SERVE1, BIND2, SERVE2 = Port(2, "bind"), Port(2, "serve"), Port(3, "bind"), Port(3, "serve")
SEVEN = [LINK1, LINK2, WORK, BIND1, SERVE1, BIND2, SERVE2]
L1, L2, W, B1, S1, B2, S2 = (PortLit(x) for x in SEVEN)
PSI_DISJ = disj(conj(L1, B1, Idle(3)), conj(L2, B2, Idle(2)), conj(W, S1, S2))
PSI_CONJ = conj(
    implies(L1, B1), implies(L2, B2), implies(B1, L1), implies(B2, L2),
    implies(W, conj(S1, S2)), implies(S1, W), implies(S2, W),
)


def test_master_slaves_disjunctive_models():
    assert models_of(PSI_DISJ, SEVEN) == {fs(LINK1, BIND1), fs(LINK2, BIND2), fs(WORK, SERVE1, SERVE2)}


def test_master_slaves_conjunctive_adds_only_idling():
    assert models_of(PSI_CONJ, SEVEN) == models_of(PSI_DISJ, SEVEN) | {fs()}
    translated = conjunctive_formula(to_conjunctive(PSI_DISJ, SEVEN))
    assert models_of(translated, SEVEN) == models_of(PSI_DISJ, SEVEN) | {fs()}


def test_universe_bound():
    with pytest.raises(UniverseTooLarge):
        list(interactions_over([Port(i, "p") for i in range(30)]))


def test_core_form_rejects_bare_idle():
    with pytest.raises(DreamError):
        core_form(Idle(1))


# -- properties ---------------------------------------------------------------------------


@given(st.data())
def test_beta_round_trip(data):
    universe = data.draw(universes(5))
    gamma = data.draw(st.sets(st.sampled_from(subsets(universe))))
    assert models_of(beta(gamma, universe), universe) == gamma


@given(st.data())
def test_satisfaction_matches_reference(data):
    universe = data.draw(universes(4))
    f = data.draw(formulas(universe))
    for cfg in guard_configs():
        for a in subsets(universe):
            assert satisfies(a, cfg, f) == ref_formula(a, cfg, f)


@given(st.data())
def test_substitution_soundness(data):
    universe = data.draw(universes(4))
    f = data.draw(formulas(universe))
    x = data.draw(st.sampled_from(universe))
    for cfg in guard_configs():
        for a in subsets(universe):
            if x in a:
                assert satisfies(a, cfg, f) == satisfies(a, cfg, substitute_port(f, x, True))


@settings(max_examples=150)
@given(st.data())
def test_conjunctive_translation_adds_exactly_the_empty_interaction(data):
    universe = data.draw(universes(4))
    f = data.draw(formulas(universe, with_preds=False))
    lhs = models_of(conjunctive_formula(to_conjunctive(f, universe)), universe)
    assert lhs == models_of(f, universe) | {frozenset()}


@given(st.data())
def test_core_form_preserves_models(data):
    universe = data.draw(universes(4))
    f = data.draw(formulas(universe, with_preds=False))
    assert models_of(core_form(f), universe) == models_of(f, universe)


@given(st.sampled_from(subsets([Port(1, "a"), Port(1, "b"), Port(2, "a")])))
def test_not_idle_means_some_port(a):
    assert satisfies(a, None, Not(Idle(1))) == any(x.instance == 1 for x in a)
