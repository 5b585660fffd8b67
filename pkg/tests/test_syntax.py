import pytest
from hypothesis import given, settings, strategies as st

from flpc.syntax import (And, Atom, CountSpec, Equality, Exists, Forall, FormulaSyntaxError, Iff,
                         Implies, Not, Or, Signature, TRUE, classify_fragment, exists,
                         exists_at_least, exists_at_most, format_signature, free_variables,
                         parse_formula, parse_signature, parse_with_signature, predicates_of,
                         print_formula)

from oracles import EQ1, EQ2

PREDS = {"c": 0, "p": 1, "r": 2, "t": 3}


def fluted_formulas(max_depth: int = 3):
    """Random fluted sentences; children of And/Or are never And/Or of the same kind."""

    def atoms(depth):
        scope = [f"x{i}" for i in range(1, depth + 1)]
        out = [st.just(TRUE), st.just(Atom("c", ()))]
        for name, a in PREDS.items():
            if 1 <= a <= depth:
                out.append(st.just(Atom(name, tuple(scope[depth - a:]))))
        if depth >= 2:
            out.append(st.just(Equality(scope[-2], scope[-1])))
        return st.one_of(out)

    def formula(depth, budget):
        if budget <= 0:
            return atoms(depth)
        sub = st.deferred(lambda: formula(depth, budget - 1))
        options = [atoms(depth), sub.map(Not),
                   st.tuples(sub, sub).map(lambda ab: Implies(*ab)),
                   st.tuples(sub, sub).map(lambda ab: Iff(*ab)),
                   st.lists(sub.filter(lambda f: not isinstance(f, And)), min_size=2, max_size=3)
                   .map(lambda xs: And(tuple(xs))),
                   st.lists(sub.filter(lambda f: not isinstance(f, Or)), min_size=2, max_size=3)
                   .map(lambda xs: Or(tuple(xs)))]
        if depth < max_depth:
            var = f"x{depth + 1}"
            inner = st.deferred(lambda: formula(depth + 1, budget - 1))
            options.append(inner.map(lambda b: Forall(var, b)))
            options.append(st.tuples(st.integers(0, 3), st.integers(0, 3), inner)
                           .map(lambda t: Exists(CountSpec(t[0], t[1]), var, t[2])))
        return st.one_of(options)

    return formula(0, 4)


def test_parse_eq1_shape():
    f = parse_formula(EQ1)
    assert isinstance(f, Forall) and f.var == "x1"
    assert predicates_of(f) == Signature.of({"cond": 1, "solo": 1, "fav": 2, "conc": 1, "nom": 3})
    quantifiers = []
    g = f
    while True:
        if isinstance(g, (Forall, Exists)):
            quantifiers.append(g.var)
        kids = [k for k in _kids(g) if _has_quantifier(k)]
        if not kids:
            break
        g = kids[0]
    assert quantifiers == ["x1", "x2", "x3"]


def _kids(g):
    from flpc.syntax import children
    return children(g)


def _has_quantifier(g):
    from flpc.syntax import subformulas
    return any(isinstance(h, (Forall, Exists)) for h in subformulas(g))


def test_parse_forall_atom():
    assert parse_formula("forall x1 (p(x1))") == Forall("x1", Atom("p", ("x1",)))


def test_parse_periodic_round_trip():
    f = parse_formula("exists[0+2] x1 (p(x1))")
    assert f == Exists(CountSpec(0, 2), "x1", Atom("p", ("x1",)))
    assert parse_formula(print_formula(f)) == f


def test_eq2_round_trip():
    f = parse_formula(EQ2)
    assert parse_formula(print_formula(f)) == f


def test_nullary_prints_bare():
    assert print_formula(Atom("q0", ())) == "q0"


def test_plain_exists_means_not_none():
    assert parse_formula("exists x p(x)") == exists("x", Atom("p", ("x",)))
    assert parse_formula("exists x p(x)") == Not(Exists(CountSpec(0, 0), "x", Atom("p", ("x",))))


def test_threshold_sugar():
    body = Atom("p", ("x",))
    assert parse_formula("exists[>=2] x p(x)") == exists_at_least(2, "x", body)
    assert parse_formula("exists[<=1] x p(x)") == Or((Exists(CountSpec(0, 0), "x", body),
                                                     Exists(CountSpec(1, 0), "x", body)))
    assert parse_formula("exists[=3] x p(x)") == Exists(CountSpec(3, 0), "x", body)
    assert exists_at_most(0, "x", body) == Exists(CountSpec(0, 0), "x", body)


def test_bare_atoms_take_the_suffix():
    sig = Signature.of({"p": 1, "r": 2})
    assert parse_formula("forall x forall y (r -> p)", sig) == Forall(
        "x", Forall("y", Implies(Atom("r", ("x", "y")), Atom("p", ("y",)))))


@pytest.mark.parametrize("text", [
    "forall x (p(x)", "exists[1+] x p(x)", "forall x forall x p(x)", "p(x) & p(x,y)", "forall x (x)",
    "exists[2] x p(x)", "forall 3 p",
])
def test_malformed_input_rejected(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text)


def test_signature_mismatch_rejected():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("forall x p(x)", Signature.of({"p": 2}))
    with pytest.raises(FormulaSyntaxError):
        parse_formula("forall x q(x)", Signature.of({"p": 1}))


def test_signature_text_round_trip():
    sig = parse_signature("p/1, r/2\n# comment\nt/3\n")
    assert sig.as_dict() == {"p": 1, "r": 2, "t": 3}
    assert parse_signature(format_signature(sig)) == sig


def test_signature_rejects_conflicts():
    with pytest.raises(ValueError):
        Signature.of([("p", 1), ("p", 2)])


def test_inferred_signature():
    _, sig = parse_with_signature(EQ2)
    assert sig.as_dict() == {"orch": 1, "pers": 1, "first_viol": 1, "hires_to_play": 3}


# classification

def test_classify_eq1():
    rep = classify_fragment(parse_formula(EQ1))
    assert (rep.variable_width, rep.is_fluted, rep.uses_counting) == (3, True, False)


def test_classify_reversed_suffix():
    f = parse_formula("forall y (A_w(y) -> exists[=1] x (A_u(x) & R0(x,y)))")
    rep = classify_fragment(f)
    assert (rep.variable_width, rep.is_fluted, rep.is_fluted_rev) == (2, False, True)
    assert rep.offending_atoms[0][0] == "R0(x,y)"


def test_classify_repeated_variable():
    rep = classify_fragment(parse_formula("forall x r(x,x)"))
    assert not rep.is_fluted and not rep.is_fluted_rev
    assert [a for a, _ in rep.offending_atoms] == ["r(x,x)"]


def test_classify_counting_flags():
    assert classify_fragment(parse_formula("exists[2+0] x p(x)")).uses_counting
    assert not classify_fragment(parse_formula("exists[2+0] x p(x)")).uses_periodic
    rep = classify_fragment(parse_formula("exists[0+2] x p(x)"))
    assert rep.uses_counting and rep.uses_periodic


def test_classify_json_shape():
    d = classify_fragment(parse_formula("forall x r(x,x)")).as_dict()
    assert set(d) == {"variable_width", "is_fluted", "is_fluted_rev", "uses_counting",
                      "uses_periodic", "offending_atoms"}


@settings(max_examples=200, deadline=None)
@given(fluted_formulas())
def test_print_parse_round_trip(f):
    assert parse_formula(print_formula(f)) == f


@settings(max_examples=200, deadline=None)
@given(fluted_formulas())
def test_generated_sentences_are_fluted(f):
    rep = classify_fragment(f)
    assert rep.is_fluted and rep.is_fluted_rev
    assert free_variables(f) == set()
    assert rep.variable_width <= 3
