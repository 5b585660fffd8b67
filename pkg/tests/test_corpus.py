import itertools
import random

import pytest

from flpc.corpus import (GRID_BOUNDARY_INSENSITIVE, GRID_SIGNATURE, CorpusError, DiophEq, DiophSystem,
                         basis_atoms, encode_grid_axioms, encode_hilbert, grid_chi, grid_conjunct,
                         grid_degree, grid_truncation, hilbert_conjuncts, hilbert_model,
                         hilbert_signature, parse_dioph, random_normal_form, truncated_grid_expansion)
from flpc.modeltools import brute_force_search, evaluate
from flpc.normalform import check_uniform
from flpc.syntax import Signature, classify_fragment, parse_formula, print_formula


def dioph(text: str) -> DiophSystem:
    return parse_dioph(text.replace(";", "\n"))


def test_parse_dioph():
    s = dioph("u = 1; u + v = w  # sum; u * v = w")
    assert [e.kind for e in s.equations] == ["one", "add", "mul"]
    assert s.variables == ("u", "v", "w")


@pytest.mark.parametrize("text", ["u = 2", "u + u = w", "u - v = w", "u * v"])
def test_bad_equations_rejected(text):
    with pytest.raises(CorpusError):
        dioph(text)


def test_solution_check():
    s = dioph("u = 1; v = 1; u + v = w; u * w = z")
    assert s.holds({"u": 1, "v": 1, "w": 2, "z": 2})
    assert not s.holds({"u": 1, "v": 1, "w": 3, "z": 3})


def test_single_unit_equation():
    f = encode_hilbert(dioph("u = 1"))
    assert f == parse_formula("exists[=1] x A_u(x)")


def test_addition_encoding_is_reversed_fluted():
    s = dioph("u = 1; v = 1; u + v = w")
    rep = classify_fragment(encode_hilbert(s))
    assert rep.variable_width == 2 and rep.is_fluted_rev and not rep.is_fluted
    assert len(hilbert_conjuncts(s)) == 2 + 2 + 3


def test_multiplication_encoding_has_width_three():
    s = dioph("u * v = w; u = 1; v = 1")
    assert classify_fragment(encode_hilbert(s)).variable_width == 3
    assert ("P0", 3) in hilbert_signature(s).predicates


def test_hilbert_model_verifies():
    s = dioph("u = 1; v = 1; u + v = w")
    m = hilbert_model(s, {"u": 1, "v": 1, "w": 2})
    assert m.domain == 4 and evaluate(m, encode_hilbert(s))


def test_hilbert_model_multiplication():
    s = dioph("u = 1; v = 1; u + v = w; w * u = z")
    m = hilbert_model(s, {"u": 1, "v": 1, "w": 2, "z": 2})
    assert evaluate(m, encode_hilbert(s))


def test_hilbert_model_rejects_non_solutions():
    with pytest.raises(CorpusError):
        hilbert_model(dioph("u = 1; v = 1; u + v = w"), {"u": 1, "v": 1, "w": 3})


def test_unsolvable_system_has_no_small_model():
    s = dioph("u = 1; v = 1; u + v = w; w = 1")
    assert brute_force_search(encode_hilbert(s), hilbert_signature(s), max_size=4) is None


def test_models_of_small_solutions_verify():
    # every solution in a small box yields a model
    s = dioph("u + v = w; u * v = z; v = 1")
    f = encode_hilbert(s)
    for vals in itertools.product(range(3), repeat=4):
        sol = dict(zip(s.variables, vals))
        if s.holds(sol):
            assert evaluate(hilbert_model(s, sol), f)


def test_grid_axioms_classification():
    rep = classify_fragment(encode_grid_axioms())
    assert rep.variable_width == 4 and rep.uses_counting
    assert classify_fragment(encode_grid_axioms(with_chi=True)).variable_width == 4


def test_grid_axioms_use_grid_signature():
    from flpc.syntax import predicates_of
    assert set(predicates_of(encode_grid_axioms()).names) <= set(GRID_SIGNATURE.names)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_truncations_satisfy_boundary_insensitive_axioms(n):
    m = truncated_grid_expansion(n)
    for k in GRID_BOUNDARY_INSENSITIVE:
        assert evaluate(m, grid_conjunct(k)), k


@pytest.mark.parametrize("n", [2, 3])
def test_truncations_violate_successor_axiom(n):
    assert not evaluate(truncated_grid_expansion(n), grid_conjunct(4))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_truncation_shape(n):
    t = grid_truncation(n)
    assert t.structure.domain == n * n + n
    for i in range(n):
        for j in range(n):
            assert grid_degree(t, i, j, "H") == i and grid_degree(t, i, j, "V") == j


def test_grid_chi_is_a_sentence():
    assert print_formula(grid_chi())
    with pytest.raises((KeyError, ValueError, CorpusError)):
        grid_conjunct(14)


def test_random_normal_forms_are_uniform():
    rng = random.Random(51)
    sig = Signature.of({"p": 1, "r": 2, "t": 3})
    for width in (2, 3):
        for _ in range(40):
            nf = random_normal_form(rng, sig.restrict(n for n, a in sig.predicates if a <= width), width)
            check_uniform(nf)
            for _, c in nf.conjuncts:
                assert c.count.n <= 3 and c.count.p <= 3


def test_basis_atoms_fit_depth():
    sig = Signature.of({"p": 1, "r": 2, "t": 3})
    assert all(a.arity <= 2 for a in basis_atoms(sig, 2))
