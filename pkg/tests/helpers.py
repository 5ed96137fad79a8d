"""Random generators and independent oracles shared by the tests."""

from softlogic.formula import (
    Atom,
    Bin,
    Connective,
    Const,
    Family,
    Literal,
    Neg,
    OperatorKind,
    make_rule,
)
from softlogic.logics import Flavor, Program, WeightedFormula

NAMES = ("p", "q", "r", "s", "t")
NEGATIONS = [op for op in OperatorKind if op.family is Family.NEG]
BINARIES = [op for op in OperatorKind if op.family is not Family.NEG]
LUKASIEWICZ_BINARIES = [
    OperatorKind.CONJ_LUKASIEWICZ,
    OperatorKind.DISJ_LUKASIEWICZ,
    OperatorKind.IMPL_LUKASIEWICZ,
]


def random_formula(rng, depth, names=NAMES, ops=BINARIES, negs=NEGATIONS, consts=None):
    """Random fuzzy formula of at most ``depth`` levels."""
    if depth == 0 or rng.random() < 0.25:
        if consts is not None and rng.random() < 0.15:
            return Const(float(consts[rng.integers(len(consts))]))
        return Atom(names[rng.integers(len(names))])
    if rng.random() < 0.25:
        return Neg(negs[rng.integers(len(negs))], random_formula(rng, depth - 1, names, ops, negs, consts))
    op = ops[rng.integers(len(ops))]
    return Bin(
        op,
        random_formula(rng, depth - 1, names, ops, negs, consts),
        random_formula(rng, depth - 1, names, ops, negs, consts),
    )


def random_classical(rng, depth, names=NAMES):
    conns = [Connective.AND, Connective.OR, Connective.IMPLIES]
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.1:
            return Const(float(rng.integers(2)))
        return Atom(names[rng.integers(len(names))])
    if rng.random() < 0.25:
        return Neg(Connective.NOT, random_classical(rng, depth - 1, names))
    return Bin(conns[rng.integers(3)], random_classical(rng, depth - 1, names), random_classical(rng, depth - 1, names))


def random_literal(rng, names=NAMES):
    return Literal(Atom(names[rng.integers(len(names))]), bool(rng.integers(2)))


def random_rule(rng, max_body=4, names=NAMES):
    """Random rule ``a <-l b1 &l ... &l bn`` with a single head literal."""
    body = [random_literal(rng, names) for _ in range(rng.integers(0, max_body + 1))]
    return make_rule([random_literal(rng, names)], body)


def random_psl_program(rng, n_atoms=3, max_rules=5):
    names = NAMES[:n_atoms]
    rules = []
    for _ in range(rng.integers(1, max_rules + 1)):
        lits = [random_literal(rng, names) for _ in range(rng.integers(1, 4))]
        h = int(rng.integers(0, len(lits) + 1))
        rules.append(WeightedFormula(rng.uniform(0, 3), make_rule(lits[:h], lits[h:]), int(rng.integers(1, 3))))
    return Program(Flavor.PSL, tuple(rules), frozenset(names))


def random_mln(rng, max_atoms=4, max_formulas=6):
    names = NAMES[: rng.integers(1, max_atoms + 1)]
    from softlogic.transform import fuzzify

    formulas = tuple(
        WeightedFormula(rng.uniform(-3, 3), fuzzify(random_classical(rng, 3, names)))
        for _ in range(rng.integers(0, max_formulas + 1))
    )
    return Program(Flavor.MLN, formulas, frozenset(names))


def random_interpretation(rng, names=NAMES):
    from softlogic.semantics import Interpretation

    return Interpretation({n: rng.random() for n in names})


def python_boolean(f, world):
    """Independent two-valued evaluator: compiles ``f`` to a Python expression."""

    def emit(g):
        if isinstance(g, Atom):
            return f"W[{g.name!r}]"
        if isinstance(g, Const):
            return "True" if g.value == 1.0 else "False"
        if isinstance(g, Neg):
            return f"(not {emit(g.arg)})"
        fam = g.op.family
        a, b = emit(g.left), emit(g.right)
        if fam is Family.CONJ:
            return f"({a} and {b})"
        if fam is Family.DISJ:
            return f"({a} or {b})"
        return f"((not {a}) or {b})"

    return eval(emit(f), {"W": {k: bool(v) for k, v in world.items()}})
