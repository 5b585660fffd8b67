import json
import random

import pytest

from flpc.corpus import random_normal_form
from flpc.diophantine import INF, check_assignment
from flpc.modeltools import Structure, evaluate, search_normal_form
from flpc.normalform import Conjunct, FlutedAtom, NormalFormSentence, branch_nullary, to_normal_form
from flpc.sat2 import (AbstractModel, EncodingError, abstract_model_from_json, assignment_from_model,
                       build_model, decide2, encode_psi, globally_homogenize,
                       is_globally_homogeneous)
from flpc.syntax import CountSpec, Not, Signature, TRUE, parse_formula
from flpc.typespace import TypeSpaceTooLarge

from oracles import AXIOM_OF_INFINITY
from test_modeltools import random_structure

PR = Signature.of({"p": 1, "r": 2})
P, R = FlutedAtom("p", 1), FlutedAtom("r", 2)


def nf_of(*conjuncts, negatives=(), sig=Signature()):
    return NormalFormSentence(2, tuple(conjuncts), tuple(negatives), sig)


PHI_ONE = nf_of(Conjunct(TRUE, CountSpec(1, 0), TRUE))


def branch(text):
    [b] = branch_nullary(to_normal_form(parse_formula(text)))
    return b


def test_phi_one_encoding():
    enc = encode_psi(PHI_ONE, prune=False, finite=True)
    assert len(enc.system.variables) == 3
    assert [str(c) for c in enc.system.clauses] == [
        "(x0 >= 1)", "(x0 = 0) | (y0_0 + y0_1 = x0)", "(x0 = 0) | (y0_0 + y0_1 = 1)", "(x0 = 0) | (y0_1 = 1)"]


def test_phi_one_solution_and_model():
    res = decide2(PHI_ONE, True)
    assert res.sat and res.assignment == {"x0": 1, "y0_0": 0, "y0_1": 1}
    m = build_model(res.assignment, res.encoding)
    assert m.domain == 1 and evaluate(m, PHI_ONE.to_formula())


def test_singleton_assignment_from_model():
    enc = encode_psi(PHI_ONE, prune=False, finite=True)
    sol = assignment_from_model(Structure(1, {}), enc)
    assert sol == {"x0": 1, "y0_0": 0, "y0_1": 1}
    assert check_assignment(enc.system, sol)


def test_two_successors_model():
    nf = nf_of(Conjunct(TRUE, CountSpec(2, 0), TRUE))
    res = decide2(nf, True)
    m = build_model({"x0": 2, "y0_0": 1, "y0_1": 1}, res.encoding)
    assert m.domain == 2 and evaluate(m, nf.to_formula())


def test_axiom_of_infinity():
    b = branch(AXIOM_OF_INFINITY)
    assert not decide2(b, True).sat
    res = decide2(b, False)
    assert res.sat
    am = build_model(res.assignment, res.encoding)
    assert isinstance(am, AbstractModel) and am.is_infinite and am.verify(b)
    assert am.to_json()["types"][0]["size"] == "inf"


def test_abstract_model_json_round_trip():
    b = branch(AXIOM_OF_INFINITY)
    res = decide2(b, False)
    am = build_model(res.assignment, res.encoding)
    data = json.loads(json.dumps(am.to_json()))
    again = abstract_model_from_json(data, res.encoding)
    assert again.verify(b)


def test_contradictions_unsat_in_both_modes():
    f = parse_formula("forall x1 (p(x1) -> exists[1+1] x2 p(x2)) & forall x1 (p(x1) & !p(x1))")
    for b in branch_nullary(to_normal_form(f)):
        assert not decide2(b, True).sat and not decide2(b, False).sat


def test_nullary_predicates_must_be_branched():
    with pytest.raises(EncodingError):
        encode_psi(to_normal_form(parse_formula("forall x p(x)")))


def test_type_cap():
    sig = Signature.of({f"p{i}": 1 for i in range(6)})
    nf = nf_of(Conjunct(TRUE, CountSpec(1, 0), TRUE), sig=sig)
    with pytest.raises(TypeSpaceTooLarge):
        encode_psi(nf, prune=False, cap=4)


def test_homogenize_example():
    m = Structure.from_sets(2, {"r": [(0, 0), (0, 1), (1, 0)]})
    assert not is_globally_homogeneous(m)
    h = globally_homogenize(m)
    assert sorted(h.tuples("r")) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert is_globally_homogeneous(h)
    f = parse_formula("forall x1 exists[1+1] x2 r(x1,x2)")
    assert evaluate(m, f) and evaluate(h, f)


def test_homogenize_fixed_point():
    m = Structure.from_sets(2, {"r": [(0, 0), (0, 1), (1, 0), (1, 1)]})
    assert globally_homogenize(m) == m


def test_pruning_does_not_change_verdicts():
    rng = random.Random(31)
    for k in range(120):
        nf = random_normal_form(rng, PR, 2)
        for finite in (True, False):
            a = decide2(nf, finite, prune=True)
            b = decide2(nf, finite, prune=False)
            assert a.sat == b.sat, (k, finite)
            assert a.encoding.sizes()["y_variables"] <= b.encoding.sizes()["y_variables"]


def test_general_mode_contains_finite_mode():
    rng = random.Random(32)
    for _ in range(80):
        nf = random_normal_form(rng, PR, 2)
        if decide2(nf, True).sat:
            assert decide2(nf, False).sat


def test_general_witnesses_verify():
    rng = random.Random(33)
    checked = 0
    for _ in range(80):
        nf = random_normal_form(rng, PR, 2)
        res = decide2(nf, False)
        if not res.sat:
            continue
        w = build_model(res.assignment, res.encoding)
        if isinstance(w, AbstractModel):
            assert w.verify(nf)
        else:
            assert evaluate(w, nf.to_formula())
        checked += 1
    assert checked > 20


def lemma_loop(seed: int, count: int):
    """Brute-forced models through homogenisation, Psi extraction and rebuilding."""
    rng = random.Random(seed)
    done = 0
    violations = []
    while done < count:
        nf = random_normal_form(rng, PR, 2)
        m = search_normal_form(nf, 4, rng=rng)
        if m is None:
            continue
        done += 1
        f = nf.to_formula()
        h = globally_homogenize(m)
        if not (evaluate(h, f) and is_globally_homogeneous(h)):
            violations.append(("homogenize", done))
        for prune in (False, True):
            enc = encode_psi(nf, prune=prune, finite=True)
            if not check_assignment(enc.system, assignment_from_model(h, enc)):
                violations.append(("psi", done, prune))
        res = decide2(nf, True)
        if not (res.sat and evaluate(build_model(res.assignment, res.encoding), f)):
            violations.append(("build", done))
    return violations


def test_lemma_loop_small():
    assert lemma_loop(34, 30) == []


def test_random_structures_homogenize():
    rng = random.Random(35)
    for _ in range(60):
        m = random_structure(rng, PR, rng.randint(1, 4))
        h = globally_homogenize(m)
        assert is_globally_homogeneous(h)
        assert h.domain == m.domain and h.tuples("p") == m.tuples("p")
