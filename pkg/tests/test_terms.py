"""Term language tests: parsing, printing, evaluation, generalized s-functions."""

import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from logcouple.element import (
    GammaElement,
    INF,
    ZERO,
    integral,
    parse_element,
    pred,
    psi,
    psi_point,
    succ,
)
from logcouple.psifun import contains
from logcouple.terms import (
    Add,
    AffineReport,
    Const,
    Delta,
    GenSFunction,
    Integ,
    Neg,
    Pred,
    Psi,
    Succ,
    TermSyntaxError,
    UnboundVariableError,
    Var,
    eval_gensfun,
    eval_term,
    free_vars,
    gensfun_cover,
    local_slope,
    parse_term,
    print_term,
)


def el(text):
    return parse_element(text)


class TestParse:
    def test_examples(self):
        assert parse_term("psi(int(x))") == Psi(Integ(Var("x")))
        assert parse_term("x - s(x)") == Add(Var("x"), Neg(Succ(Var("x"))))
        assert parse_term("d3([1/2])") == Delta(3, Const(el("[1/2]")))

    def test_precedence(self):
        assert parse_term("-x + y") == Add(Neg(Var("x")), Var("y"))
        assert parse_term("x - y - z") == Add(Add(Var("x"), Neg(Var("y"))), Neg(Var("z")))
        assert parse_term("-psi(x)") == Neg(Psi(Var("x")))
        assert parse_term("(x + y) - z") == Add(Add(Var("x"), Var("y")), Neg(Var("z")))

    def test_literals(self):
        assert parse_term("[]") == Const(ZERO)
        assert parse_term("inf") == Const(INF)
        assert parse_term("[1, -5]") == Const(el("[1, -5]"))
        assert parse_term("[-1/3]") == Const(el("[-1/3]"))

    def test_identifiers_without_call_are_variables(self):
        assert parse_term("s + p") == Add(Var("s"), Var("p"))

    def test_syntax_errors_carry_positions(self):
        with pytest.raises(TermSyntaxError) as e:
            parse_term("x + ")
        assert "position" in str(e.value)
        with pytest.raises(TermSyntaxError):
            parse_term("foo(x)")
        with pytest.raises(TermSyntaxError):
            parse_term("[1, ]")
        with pytest.raises(TermSyntaxError):
            parse_term("x y")
        with pytest.raises(TermSyntaxError):
            parse_term("x @ y")


terms_st = st.deferred(
    lambda: st.one_of(
        st.sampled_from([Var("x"), Var("y"), Const(ZERO), Const(INF)]),
        st.builds(Const, st.builds(GammaElement.from_list, st.lists(
            st.fractions(min_value=Fraction(-9), max_value=Fraction(9), max_denominator=9),
            max_size=3,
        ))),
        st.builds(Add, terms_st, terms_st),
        st.builds(Neg, terms_st),
        st.builds(Delta, st.integers(min_value=1, max_value=5), terms_st),
        st.builds(Psi, terms_st),
        st.builds(Succ, terms_st),
        st.builds(Pred, terms_st),
        st.builds(Integ, terms_st),
    )
)


class TestPrint:
    @given(terms_st)
    def test_round_trip(self, t):
        assert parse_term(print_term(t)) == t

    def test_examples(self):
        assert print_term(parse_term("x - s(x)")) == "x - s(x)"
        assert print_term(Add(Var("x"), Add(Var("y"), Var("z")))) == "x + (y + z)"
        assert print_term(Neg(Add(Var("x"), Var("y")))) == "-(x + y)"


class TestEval:
    def test_examples(self):
        assert eval_term(parse_term("psi(int(x))"), {"x": ZERO}) == el("[1]")
        assert eval_term(parse_term("x - s(x)"), {"x": el("[1, 1]")}) == el("[0, 0, -1]")
        assert eval_term(parse_term("p(x)"), {"x": el("[2]")}) is INF

    def test_unbound(self):
        with pytest.raises(UnboundVariableError):
            eval_term(parse_term("x + y"), {"x": ZERO})

    def test_free_vars(self):
        assert free_vars(parse_term("x + psi(y) - x")) == {"x", "y"}

    @given(terms_st)
    def test_total_on_closed_terms(self, t):
        env = {"x": el("[1, 1/2]"), "y": INF}
        v = eval_term(t, env)
        assert v is INF or isinstance(v, GammaElement)

    @given(terms_st)
    def test_integral_identity_observed(self, t):
        env = {"x": el("[0, 2]"), "y": el("[1]")}
        lhs = eval_term(Integ(t), env)
        rhs = eval_term(t, env) - eval_term(Succ(t), env)
        assert lhs == rhs

    def test_agrees_with_primitives(self):
        # differential check on single-constructor terms
        samples = [ZERO, el("[1]"), el("[0, -2/3]"), el("[1, 1]"), INF]
        for v in samples:
            env = {"x": v}
            assert eval_term(parse_term("psi(x)"), env) == psi(v)
            assert eval_term(parse_term("s(x)"), env) == succ(v)
            assert eval_term(parse_term("p(x)"), env) == pred(v)
            assert eval_term(parse_term("int(x)"), env) == integral(v)
            assert eval_term(parse_term("-x"), env) == -v
            assert eval_term(parse_term("x + x"), env) == v + v


class TestGenSFunction:
    def test_eval_examples(self):
        F = GenSFunction(1, [(0, 1, 1), (0, -1, -2)])
        assert eval_gensfun(F, [psi_point(2)]) == el("[-1, 1, 1]")
        G = GenSFunction(1, [(0, -1, 1)])
        assert eval_gensfun(G, [psi_point(1)]) is INF
        H = GenSFunction(2, [(0, 1, 0), (1, -3, 0)], el("[7]"))
        assert eval_gensfun(H, [1, 1]) == el("[7]")

    def test_validation(self):
        with pytest.raises(ValueError):
            GenSFunction(1, [(0, 1, 1), (0, 1, 2)])  # duplicate (var, shift)
        with pytest.raises(ValueError):
            GenSFunction(1, [(1, 0, 1)])  # variable out of range
        with pytest.raises(ValueError):
            eval_gensfun(GenSFunction(2), [1])

    def test_json_round_trip_keeps_zero_entries(self):
        F = GenSFunction(2, [(0, 2, Fraction(1, 3)), (1, 0, 0)], el("[0, 1]"))
        again = GenSFunction.from_json(F.to_json())
        assert again == F
        assert len(again.terms) == 2

    def test_cover_example(self):
        F = GenSFunction(1, [(0, 1, 1), (0, 0, -1)])  # s(a) - a
        G = gensfun_cover(F)
        assert sorted(G.coeffs.values()) == [Fraction(-1), Fraction(1)]
        assert G.offset == ZERO
        val = eval_gensfun(F, [psi_point(3)])
        assert val == psi_point(4) - psi_point(3)
        assert contains([G], val)

    def test_cover_constant(self):
        F = GenSFunction(3, [(0, 0, 0), (1, 2, 0)], el("[2]"))
        G = gensfun_cover(F)
        assert G.is_constant and G.offset == el("[2]")

    def test_cover_contains_finite_values(self):
        rng = random.Random(11)
        for _ in range(30):
            arity = rng.randint(1, 3)
            terms = []
            for i in range(arity):
                for k in sorted(rng.sample(range(-2, 3), rng.randint(0, 2))):
                    terms.append((i, k, Fraction(rng.randint(-5, 5), rng.randint(1, 5))))
            F = GenSFunction(arity, terms, GammaElement([(0, Fraction(1, 2))]))
            G = gensfun_cover(F)
            # arguments deep enough that no predecessor falls off
            args = [rng.randint(4, 7) for _ in range(arity)]
            val = eval_gensfun(F, args)
            assert val is not INF
            # reconstruct the witness directly
            nonzero = [(i, k, q) for i, k, q in F.terms if q]
            witness = {fresh: args[i] + k for fresh, (i, k, _) in enumerate(nonzero)}
            assert G.evaluate(witness) == val
            assert contains([G], val)


class TestLocalSlope:
    def test_psi_locally_constant(self):
        rep = local_slope(parse_term("psi(x)"), el("[1]"), el("[0, 1]"))
        assert rep == AffineReport({"x": Fraction(0)}, el("[1]"))

    def test_globally_affine(self):
        rep = local_slope(parse_term("x + x"), el("[3]"), el("[1]"))
        assert rep == AffineReport({"x": Fraction(2)}, el("[6]"))

    def test_succ_locally_constant(self):
        rep = local_slope(parse_term("s(x)"), el("[1, 1/2]"), el("[0, 0, 1]"))
        assert rep == AffineReport({"x": Fraction(0)}, succ(el("[1, 1/2]")))

    def test_constant_infinity(self):
        rep = local_slope(parse_term("p(x)"), el("[2]"), el("[0, 1]"))
        assert rep == AffineReport({"x": Fraction(0)}, INF)

    def test_not_affine_at_kink(self):
        # psi jumps across 0: probing x around 0 with a wide radius sees
        # different values on the two sides
        rep = local_slope(parse_term("psi(x)"), el("[0, 1]"), el("[1]"))
        assert rep is None

    def test_two_variables(self):
        t = parse_term("x + d2(y)")
        rep = local_slope(t, {"x": el("[1]"), "y": el("[2]")}, el("[0, 1]"))
        assert rep == AffineReport({"x": Fraction(1), "y": Fraction(1, 2)}, el("[2]"))

    def test_rejects_bad_radius(self):
        with pytest.raises(ValueError):
            local_slope(parse_term("x"), el("[1]"), ZERO)
