import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from softlogic.formula import (
    SCALAR_OPS,
    VECTOR_OPS,
    Atom,
    Bin,
    Const,
    Family,
    Literal,
    Neg,
    OperatorKind as Op,
    apply_operator,
    complement,
    decompose_rule,
    is_psl_rule,
)

from helpers import BINARIES, NEGATIONS

p, q, r, a, b, c = (Atom(n) for n in "pqrabc")


class TestApplyOperator:
    def test_lukasiewicz_conjunction(self):
        assert apply_operator(Op.CONJ_LUKASIEWICZ, 0.6, 0.4) == 0.0

    @pytest.mark.parametrize("x", [0.0, 0.13, 0.5, 0.999, 1.0])
    def test_godel_conjunction_identity(self, x):
        assert apply_operator(Op.CONJ_GODEL, 1.0, x) == x

    def test_residual_implication(self):
        assert apply_operator(Op.IMPL_RESIDUAL_GODEL, 0.6, 0.4) == 0.4
        assert apply_operator(Op.IMPL_RESIDUAL_GODEL, 0.4, 0.6) == 1.0

    def test_lukasiewicz_implication(self):
        assert apply_operator(Op.IMPL_LUKASIEWICZ, 0.3, 0.9) == 1.0

    @pytest.mark.parametrize(
        "op,args,expected",
        [
            (Op.NEG_STANDARD, (0.25,), 0.75),
            (Op.NEG_GODEL, (0.0,), 1.0),
            (Op.NEG_GODEL, (0.4,), 0.0),
            (Op.CONJ_PRODUCT, (0.5, 0.5), 0.25),
            (Op.DISJ_LUKASIEWICZ, (0.5, 0.75), 1.0),
            (Op.DISJ_GODEL, (0.5, 0.75), 0.75),
            (Op.DISJ_PRODUCT, (0.5, 0.5), 0.75),
            (Op.IMPL_S_GODEL, (0.75, 0.5), 0.5),
            (Op.IMPL_S_GODEL, (0.25, 0.5), 0.75),
        ],
    )
    def test_table(self, op, args, expected):
        assert apply_operator(op, *args) == expected

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            apply_operator(Op.CONJ_GODEL, 0.5)
        with pytest.raises(ValueError):
            apply_operator(Op.NEG_STANDARD, 0.5, 0.5)

    @pytest.mark.parametrize("bad", [-0.1, 1.5, float("nan")])
    def test_domain_error(self, bad):
        with pytest.raises(ValueError):
            apply_operator(Op.CONJ_LUKASIEWICZ, bad, 0.5)

    @pytest.mark.parametrize("op", list(Op))
    def test_boolean_agreement(self, op):
        classical = {
            Family.NEG: lambda x: not x,
            Family.CONJ: lambda x, y: x and y,
            Family.DISJ: lambda x, y: x or y,
            Family.IMPL: lambda x, y: (not x) or y,
        }[op.family]
        for args in itertools.product((0.0, 1.0), repeat=op.arity):
            assert apply_operator(op, *args) == float(classical(*(bool(v) for v in args)))

    @pytest.mark.parametrize("op", list(Op))
    def test_range_and_vector_agreement(self, op):
        rng = np.random.default_rng(list(Op).index(op))
        args = [rng.random(100_000) for _ in range(op.arity)]
        # include exact zeros and ties, where the piecewise ops switch branch
        for arr in args:
            arr[:1000] = 0.0
            arr[1000:2000] = 1.0
        if op.arity == 2:
            args[1][2000:3000] = args[0][2000:3000]
        vec = VECTOR_OPS[op](*args)
        assert np.all((vec >= 0.0) & (vec <= 1.0))
        scalar = np.array([SCALAR_OPS[op](*vals) for vals in zip(*(arr[:5000] for arr in args))])
        np.testing.assert_array_equal(vec[:5000], scalar)

    def test_lukasiewicz_de_morgan_on_grid(self):
        grid = np.arange(101) / 100
        for x, y in itertools.product(grid, grid):
            lhs = apply_operator(Op.NEG_STANDARD, apply_operator(Op.CONJ_LUKASIEWICZ, x, y))
            rhs = apply_operator(
                Op.DISJ_LUKASIEWICZ, apply_operator(Op.NEG_STANDARD, x), apply_operator(Op.NEG_STANDARD, y)
            )
            assert abs(lhs - rhs) <= 1e-12


class TestAst:
    def test_atom_names(self):
        assert Atom("Trust(a,b,t+1)").name == "Trust(a,b,t+1)"
        assert Atom("p") == Atom("p")
        assert Atom("p") != Atom("p(a)")
        for bad in ["", "1p", "p q", "p(a))", "p-q"]:
            with pytest.raises(ValueError):
                Atom(bad)

    @pytest.mark.parametrize("value", [-0.01, 1.01, float("inf")])
    def test_const_range(self, value):
        with pytest.raises(ValueError):
            Const(value)

    def test_family_checked_at_construction(self):
        with pytest.raises(ValueError):
            Neg(Op.CONJ_GODEL, p)
        with pytest.raises(ValueError):
            Bin(Op.NEG_STANDARD, p, q)
        with pytest.raises(TypeError):
            Bin(Op.CONJ_GODEL, p, "q")

    def test_operator_metadata(self):
        assert len(NEGATIONS) == 2 and len(BINARIES) == 9
        assert Op.IMPL_RESIDUAL_GODEL.family is Family.IMPL
        assert Op.NEG_GODEL.arity == 1


class TestLiterals:
    def test_complement(self):
        assert complement(Literal(p)) == Literal(p, True)
        assert complement(Literal(p, True)) == Literal(p)

    @given(st.sampled_from("pqrs"), st.booleans())
    def test_involution(self, name, negated):
        lit = Literal(Atom(name), negated)
        assert complement(complement(lit)) == lit


def rule(head, body):
    return Bin(Op.IMPL_LUKASIEWICZ, body, head)


class TestPslRule:
    def test_rule_with_negated_body_literal(self):
        f = rule(p, Bin(Op.CONJ_LUKASIEWICZ, q, Neg(Op.NEG_STANDARD, r)))
        parts = decompose_rule(f)
        assert parts.head == (Literal(p),)
        assert parts.body == (Literal(q), Literal(r, True))

    def test_constant_zero_head(self):
        body = Bin(Op.CONJ_LUKASIEWICZ, Bin(Op.CONJ_LUKASIEWICZ, Neg(Op.NEG_STANDARD, a), b), c)
        f = rule(Const(0), body)
        assert is_psl_rule(f)
        assert decompose_rule(f).head == ()

    def test_godel_rule_rejected(self):
        assert not is_psl_rule(Bin(Op.IMPL_RESIDUAL_GODEL, p, q))

    def test_empty_body(self):
        parts = decompose_rule(rule(Neg(Op.NEG_STANDARD, p), Const(1)))
        assert parts.body == () and parts.head == (Literal(p, True),)

    def test_disjunctive_head(self):
        assert is_psl_rule(rule(Bin(Op.DISJ_LUKASIEWICZ, a, Neg(Op.NEG_STANDARD, b)), c))

    @pytest.mark.parametrize(
        "f",
        [
            p,
            rule(p, Bin(Op.CONJ_GODEL, q, r)),
            rule(p, Const(0.5)),
            rule(Const(1), q),
            rule(p, Neg(Op.NEG_GODEL, q)),
            rule(p, Neg(Op.NEG_STANDARD, Neg(Op.NEG_STANDARD, q))),
            rule(Bin(Op.CONJ_LUKASIEWICZ, p, q), r),
            rule(p, Bin(Op.DISJ_LUKASIEWICZ, q, r)),
        ],
    )
    def test_non_rules(self, f):
        assert not is_psl_rule(f)
