import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from flpc.modeltools import Relation, Structure, brute_force_search, evaluate, search_normal_form
from flpc.normalform import (EQ, Conjunct, FlutedAtom, NormalFormSentence, NotFlutedError,
                             branch_nullary, check_uniform, exactly_one, qf_atoms, qf_eval,
                             qf_eval3, qf_substitute, to_normal_form)
from flpc.syntax import And, CountSpec, Not, Or, Signature, TRUE, parse_formula, predicates_of

from oracles import AXIOM_OF_INFINITY, EQ2
from test_modeltools import SIG, random_structure
from test_syntax import fluted_formulas

P, Q = FlutedAtom("p", 1), FlutedAtom("q", 1)


def expand(m: Structure, nf: NormalFormSentence) -> Structure:
    """Interpret every fresh predicate by its defining subformula."""
    rels = {}
    for name, d in nf.fresh_map.items():
        k = len(d.variables)
        tuples = [t for t in itertools.product(range(m.domain), repeat=k)
                  if evaluate(m, d.formula, dict(zip(d.variables, t)))]
        rels[name] = Relation(k, tuples)
    return m.with_relations(rels)


def test_eq2_fresh_predicates():
    nf = to_normal_form(parse_formula(EQ2))
    arities = {q: a for q, a in nf.signature.predicates if q in nf.fresh_map}
    assert arities == {"q0": 0, "q1": 1, "q2": 2}
    assert len(nf.positives) + len(nf.negatives) == 6
    assert nf.width == 3


def test_forall_becomes_hard_pair():
    nf = to_normal_form(parse_formula("forall x1 (p(x1))"))
    assert nf.describe()["positive"] == [{"guard": "q0", "count": [0, 0], "body": "!p(x2)"}]
    assert nf.describe()["negative"] == [{"guard": "!q0", "count": [0, 0], "body": "!p(x2)"}]
    [branch] = branch_nullary(nf)
    assert [c.is_hard for c in branch.positives] == [True]
    assert branch.negatives == ()


def test_axiom_of_infinity_branch():
    [branch] = branch_nullary(to_normal_form(parse_formula(AXIOM_OF_INFINITY)))
    assert branch.positives == ()
    assert branch.negatives == (Conjunct(TRUE, CountSpec(0, 1), TRUE),)
    assert branch.nullary_values == {"q0": False}


def test_contradictory_residue_has_no_branch():
    q = FlutedAtom("q0", 0)
    nf = NormalFormSentence(2, (), (), Signature.of({"q0": 0}), residue=And((q, Not(q))))
    assert branch_nullary(nf) == []


def test_two_nullary_predicates_branch_at_most_four_ways():
    a, b = FlutedAtom("a", 0), FlutedAtom("b", 0)
    nf = NormalFormSentence(2, (), (), Signature.of({"a": 0, "b": 0}), residue=Or((a, b)))
    branches = branch_nullary(nf)
    assert len(branches) == 3
    assert all(not br.nullary_predicates for br in branches)


def test_not_fluted_rejected():
    with pytest.raises(NotFlutedError):
        to_normal_form(parse_formula("forall x r(x,x)"))


def test_uniform_depth_is_checked():
    bad = NormalFormSentence(2, (Conjunct(FlutedAtom("r", 2), CountSpec(0, 0), TRUE),), (),
                             Signature.of({"r": 2}))
    with pytest.raises(ValueError):
        check_uniform(bad)


def test_fresh_names_avoid_collisions():
    nf = to_normal_form(parse_formula("forall x (q0(x) -> exists y r(x,y))"))
    fresh = set(nf.fresh_map)
    assert "q0" not in fresh and len(fresh) == 2


def test_qf_helpers():
    f = Or((And((P, Not(Q))), EQ))
    assert qf_atoms(f) == {P, Q, EQ}
    assert qf_eval(f, lambda a: a == P)
    assert qf_eval3(f, lambda a: None) is None
    assert qf_eval3(f, lambda a: True if a == EQ else None) is True
    assert qf_substitute(f, {"p": True, "q": False}) == TRUE
    assert qf_substitute(f, {P: False, EQ: False}) is not TRUE


def test_exactly_one():
    atoms = [FlutedAtom(n, 1) for n in "abc"]
    for hot in range(3):
        assert qf_eval(exactly_one(atoms), lambda a: a == atoms[hot])
    assert not qf_eval(exactly_one(atoms), lambda a: True)
    assert not qf_eval(exactly_one(atoms), lambda a: False)


@settings(max_examples=150, deadline=None)
@given(fluted_formulas(), st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_definitional_expansion_is_a_model(f, seed, domain):
    m = random_structure(random.Random(seed), SIG, domain)
    nf = to_normal_form(f, SIG)
    if evaluate(m, f):
        assert evaluate(expand(m, nf), nf.to_formula())


@settings(max_examples=80, deadline=None)
@given(fluted_formulas())
def test_normal_form_is_equisatisfiable(f):
    sig = predicates_of(f)
    nf = to_normal_form(f, sig)
    found = search_normal_form(nf, 2)
    reference = brute_force_search(f, sig, max_size=2)
    assert (found is None) == (reference is None)
    if found is not None:
        assert evaluate(found.reduct(sig.names), f)
