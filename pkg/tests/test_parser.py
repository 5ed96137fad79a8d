import numpy as np
import pytest

from softlogic.formula import Atom, Bin, Const, Neg, OperatorKind as Op, Connective
from softlogic.logics import Flavor, Program, WeightedFormula
from softlogic.parser import ParseError, parse_formula, parse_program, print_formula, print_program, tokenize

from helpers import random_formula

p, q, r = Atom("p"), Atom("q"), Atom("r")


class TestParseProgram:
    def test_two_rule_program(self):
        prog = parse_program("flavor psl\n1 : p <-l q ^ 1\n2 : q <-l p ^ 1")
        assert prog.flavor is Flavor.PSL
        assert prog.formulas == (
            WeightedFormula(1, Bin(Op.IMPL_LUKASIEWICZ, q, p), 1),
            WeightedFormula(2, Bin(Op.IMPL_LUKASIEWICZ, p, q), 1),
        )
        assert prog.signature == ("p", "q")

    def test_crispifying_line(self):
        prog = parse_program("flavor gpsl\n1000 : p <-l p |l p ^ 1")
        (wf,) = prog.formulas
        assert wf.weight == 1000
        assert wf.formula == Bin(Op.IMPL_LUKASIEWICZ, Bin(Op.DISJ_LUKASIEWICZ, p, p), p)

    def test_psl_rejects_godel_implication(self):
        with pytest.raises(ParseError) as exc:
            parse_program("flavor psl\n1 : p ->r q ^ 1")
        assert exc.value.line == 2

    def test_psl_rejects_negative_weight(self):
        with pytest.raises(ParseError):
            parse_program("flavor psl\n-1 : p <-l q")

    def test_gpsl_and_mln_allow_negative_weights(self):
        assert parse_program("flavor gpsl\n-1.5 : p ^ 2").formulas[0].weight == -1.5
        assert parse_program("flavor mln\n-2 : p").formulas[0].weight == -2

    def test_constant_out_of_range(self):
        with pytest.raises(ParseError):
            parse_program("flavor gpsl\n1 : p &l 1.5")

    def test_exponent_default_and_explicit(self):
        prog = parse_program("flavor gpsl\n1 : p\n1 : q ^ 2")
        assert [wf.exponent for wf in prog.formulas] == [1, 2]
        with pytest.raises(ParseError):
            parse_program("flavor gpsl\n1 : p ^ 3")

    def test_psl_bare_literal_means_empty_body(self):
        prog = parse_program("flavor psl\n1 : !s p ^ 1")
        assert prog.formulas[0].formula == Bin(Op.IMPL_LUKASIEWICZ, Const(1), Neg(Op.NEG_STANDARD, p))

    def test_psl_bare_clause(self):
        prog = parse_program("flavor psl\n1 : a |l !s b |l !s c")
        assert prog.formulas[0].formula.left == Const(1)

    def test_mln_plain_tokens_map_to_default_family(self):
        prog = parse_program("flavor mln\n1 : p <- !p\n1 : !p & q | r")
        f0, f1 = (wf.formula for wf in prog.formulas)
        assert f0 == Bin(Op.IMPL_LUKASIEWICZ, Neg(Op.NEG_STANDARD, p), p)
        assert f1 == Bin(
            Op.DISJ_LUKASIEWICZ, Bin(Op.CONJ_LUKASIEWICZ, Neg(Op.NEG_STANDARD, p), q), r
        )

    @pytest.mark.parametrize("line", ["1 : p &m q", "1 : p ->r q", "1 : p ^ 1", "1 : p &l 0.5"])
    def test_mln_restrictions(self, line):
        with pytest.raises(ParseError):
            parse_program("flavor mln\n" + line)

    def test_plain_tokens_need_suffix_outside_mln(self):
        with pytest.raises(ParseError):
            parse_program("flavor gpsl\n1 : p & q")

    def test_comments_crlf_and_atoms(self):
        text = "# header comment\r\nflavor gpsl\r\natoms p q z\r\n1 : p &l q  # trailing\r\n\r\n"
        prog = parse_program(text)
        assert prog.signature == ("p", "q", "z")
        assert len(prog.formulas) == 1

    def test_ground_atoms(self):
        prog = parse_program("flavor gpsl\n1 : Trust(a,b,t0) &m !s !s Trust(a,b,t1) ->r Trust(a,b,t1)")
        assert prog.signature == ("Trust(a,b,t0)", "Trust(a,b,t1)")

    @pytest.mark.parametrize(
        "text,line,column",
        [
            ("", 1, 1),
            ("flavor fuzzy\n", 1, 1),
            ("flavor gpsl\n1 p", 2, 3),
            ("flavor gpsl\n1 : (p &l q", 2, 12),
            ("flavor gpsl\n1 : p $ q", 2, 7),
            ("flavor gpsl\n1 : p q", 2, 7),
        ],
    )
    def test_diagnostics(self, text, line, column):
        with pytest.raises(ParseError) as exc:
            parse_program(text)
        assert (exc.value.line, exc.value.column) == (line, column)


class TestFormulaSyntax:
    def test_precedence(self):
        f = parse_formula("!s p &l q |l r ->l p")
        assert f == Bin(
            Op.IMPL_LUKASIEWICZ,
            Bin(Op.DISJ_LUKASIEWICZ, Bin(Op.CONJ_LUKASIEWICZ, Neg(Op.NEG_STANDARD, p), q), r),
            p,
        )

    def test_implication_right_associative(self):
        assert parse_formula("p ->l q ->r r") == Bin(Op.IMPL_LUKASIEWICZ, p, Bin(Op.IMPL_RESIDUAL_GODEL, q, r))

    def test_reversed_implication(self):
        assert parse_formula("p <-s q") == Bin(Op.IMPL_S_GODEL, q, p)

    def test_conjunction_left_associative(self):
        assert parse_formula("p &l q &m r") == Bin(Op.CONJ_GODEL, Bin(Op.CONJ_LUKASIEWICZ, p, q), r)

    def test_decimal_literals_only(self):
        assert parse_formula(".5 |p 0.25") == Bin(Op.DISJ_PRODUCT, Const(0.5), Const(0.25))
        with pytest.raises(ParseError):
            parse_formula("p &l 1e-1")

    def test_tokenize_columns(self):
        assert [(t.kind, t.column) for t in tokenize("p ->l q")] == [("atom", 1), ("op", 3), ("atom", 7)]


class TestPrinting:
    def test_negation(self):
        assert print_formula(Neg(Op.NEG_STANDARD, p)) == "!s p"

    def test_nested(self):
        f = Bin(Op.DISJ_LUKASIEWICZ, Bin(Op.CONJ_LUKASIEWICZ, p, q), Const(0.5))
        assert print_formula(f) == "((p &l q) |l 0.5)"

    def test_constants(self):
        assert print_formula(Const(1)) == "1"
        assert print_formula(Const(0.1)) == "0.1"

    def test_classical_connectives(self):
        assert print_formula(Bin(Connective.IMPLIES, Neg(Connective.NOT, p), q)) == "(! p -> q)"

    def test_round_trip_random(self):
        rng = np.random.default_rng(7)
        consts = [0.0, 1.0, 0.5, 0.25, 0.1, 1 / 3, 0.7]
        names = ["p", "q", "r", "Trust(a,b,t+1)"]
        for _ in range(1000):
            f = random_formula(rng, 6, names=names, consts=consts)
            assert parse_formula(print_formula(f)) == f

    def test_program_round_trip(self):
        text = "flavor gpsl\natoms p q z\n1.5 : ((p &m q) ->r p) ^ 2\n-3 : !m z ^ 1\n"
        prog = parse_program(text)
        assert print_program(prog) == text
        assert parse_program(print_program(prog)) == prog

    def test_mln_program_round_trip(self):
        prog = parse_program("flavor mln\n1 : p <- !p\n1 : !p")
        assert parse_program(print_program(prog)) == prog
        assert "^" not in print_program(prog)

    def test_programmatic_program_round_trip(self):
        prog = Program(Flavor.PSL, (WeightedFormula(0.5, Bin(Op.IMPL_LUKASIEWICZ, q, p), 2),))
        assert parse_program(print_program(prog)) == prog
