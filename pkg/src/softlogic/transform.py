"""Fuzzification, crispifying rules, PSL rule rewriting and equivalence checking."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .formula import (
    LUKASIEWICZ_OPS,
    Atom,
    Bin,
    Connective,
    Const,
    Family,
    Formula,
    Neg,
    OperatorKind,
    atoms,
    complement,
    decompose_rule,
    fold,
    make_rule,
    operators,
)
from .logics import Flavor, Program, WeightedFormula
from .semantics import Interpretation, evaluate, evaluate_array

_CONNECTIVE_BY_FAMILY = {
    Family.NEG: Connective.NOT,
    Family.CONJ: Connective.AND,
    Family.DISJ: Connective.OR,
    Family.IMPL: Connective.IMPLIES,
}

DEFAULT_FAMILIES = {
    Family.NEG: OperatorKind.NEG_STANDARD,
    Family.CONJ: OperatorKind.CONJ_LUKASIEWICZ,
    Family.DISJ: OperatorKind.DISJ_LUKASIEWICZ,
    Family.IMPL: OperatorKind.IMPL_LUKASIEWICZ,
}


def fuzzify(
    f: Formula,
    neg: OperatorKind = OperatorKind.NEG_STANDARD,
    conj: OperatorKind = OperatorKind.CONJ_LUKASIEWICZ,
    disj: OperatorKind = OperatorKind.DISJ_LUKASIEWICZ,
    impl: OperatorKind = OperatorKind.IMPL_LUKASIEWICZ,
) -> Formula:
    """Replace each classical connective by the chosen fuzzy operator."""
    choice = {Family.NEG: neg, Family.CONJ: conj, Family.DISJ: disj, Family.IMPL: impl}
    for family, op in choice.items():
        if op.family is not family:
            raise ValueError(f"{op.name} is not a {family.value} operator")
    return _fuzzify(f, choice)


def _fuzzify(f: Formula, choice) -> Formula:
    if isinstance(f, Atom):
        return f
    if isinstance(f, Const):
        if f.value not in (0.0, 1.0):
            raise ValueError(f"classical formulas only have the constants 0 and 1, got {f.value}")
        return f
    if not isinstance(f.op, Connective):
        raise ValueError(f"{f.op.name} is already a fuzzy operator")
    if isinstance(f, Neg):
        return Neg(choice[Family.NEG], _fuzzify(f.arg, choice))
    return Bin(choice[f.op.family], _fuzzify(f.left, choice), _fuzzify(f.right, choice))


def defuzzify(f: Formula) -> Formula:
    """Erase operator families, giving the classical counterpart of ``f``."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Const):
        if f.value not in (0.0, 1.0):
            raise ValueError(f"constant {f.value} has no classical counterpart")
        return f
    conn = _CONNECTIVE_BY_FAMILY[f.op.family]
    if isinstance(f, Neg):
        return Neg(conn, defuzzify(f.arg))
    return Bin(conn, defuzzify(f.left), defuzzify(f.right))


def mln_to_gpsl(mln: Program, k: int = 1, **families: OperatorKind) -> Program:
    """The GPSL program whose formulas are the fuzzified MLN formulas with exponent ``k``."""
    if mln.flavor is not Flavor.MLN:
        raise ValueError("mln_to_gpsl expects an MLN program")
    return Program(
        Flavor.GPSL,
        tuple(WeightedFormula(wf.weight, fuzzify(defuzzify(wf.formula), **families), k) for wf in mln.formulas),
        mln.atoms,
    )


def to_mln(program: Program) -> Program:
    """Replace every fuzzy operator by its Boolean counterpart (weights kept, exponents dropped)."""
    return Program(
        Flavor.MLN,
        tuple(WeightedFormula(wf.weight, fuzzify(defuzzify(wf.formula))) for wf in program.formulas),
        program.atoms,
    )


# ---------------------------------------------------------------------------
# Crispifying rules


def crsp(atom: Atom | str) -> Formula:
    """``p |l p ->l p``, satisfied exactly when ``p`` is 0 or 1."""
    p = atom if isinstance(atom, Atom) else Atom(atom)
    return Bin(OperatorKind.IMPL_LUKASIEWICZ, Bin(OperatorKind.DISJ_LUKASIEWICZ, p, p), p)


def crispify(signature: Iterable, alpha: float) -> list[WeightedFormula]:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    names = sorted({a.name if isinstance(a, Atom) else a for a in signature})
    return [WeightedFormula(alpha, crsp(name), 1) for name in names]


# ---------------------------------------------------------------------------
# Equivalence checking


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    witness: Interpretation | None = None
    left_value: float | None = None
    right_value: float | None = None
    points: int = 0

    @property
    def label(self) -> str:
        return "equivalent-up-to-budget" if self.equivalent else "not-equivalent"

    def to_dict(self) -> dict:
        return {
            "result": self.label,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "left_value": self.left_value,
            "right_value": self.right_value,
            "points": self.points,
        }


MAX_GRID_ATOMS = 5


def check_equivalence(
    f: Formula,
    g: Formula,
    grid_step: float | None = 0.1,
    samples: int = 10_000,
    seed: int = 0,
    tol: float = 1e-9,
) -> EquivalenceResult:
    """Bounded test of ``v(f) == v(g)`` on a grid plus uniform random points.

    A returned witness proves non-equivalence; "equivalent" only means no
    difference above ``tol`` was found within the budget. Purely
    Lukasiewicz pairs get the grid refined to 0.05.
    """
    names = sorted(atoms(f) | atoms(g))
    n = len(names)
    blocks = []
    if grid_step is not None:
        if n > MAX_GRID_ATOMS:
            raise ValueError(f"grid mode supports at most {MAX_GRID_ATOMS} atoms, got {n}")
        step = grid_step
        if (operators(f) | operators(g)) <= LUKASIEWICZ_OPS:
            step = min(step, 0.05)
        cells = int(round(1.0 / step))
        ticks = np.arange(cells + 1) / cells
        if n:
            mesh = np.meshgrid(*([ticks] * n), indexing="ij")
            blocks.append(np.stack([m.ravel() for m in mesh], axis=1))
        else:
            blocks.append(np.zeros((1, 0)))
    if samples:
        blocks.append(np.random.default_rng(seed).random((samples, n)))
    pts = np.concatenate(blocks) if blocks else np.zeros((0, n))
    cols = {name: pts[:, j] for j, name in enumerate(names)}
    fv = np.broadcast_to(evaluate_array(f, cols), (len(pts),))
    gv = np.broadcast_to(evaluate_array(g, cols), (len(pts),))
    bad = np.flatnonzero(np.abs(fv - gv) > tol)
    if len(bad):
        j = bad[0]
        witness = Interpretation(zip(names, pts[j]))
        return EquivalenceResult(False, witness, evaluate(f, witness), evaluate(g, witness), len(pts))
    return EquivalenceResult(True, points=len(pts))


# ---------------------------------------------------------------------------
# Rule rewriting


class Relation(enum.Enum):
    BY_CONSTRUCTION = "equivalent-by-lemma"
    CHECKED = "checked-equivalent"
    NOT_EQUIVALENT = "not-equivalent"


@dataclass(frozen=True)
class RewriteSet:
    source: Formula
    variants: tuple[Formula, ...]
    relation: Relation


def clause_literals(rule: Formula):
    """Literals of the clausal form: head literals, then complemented body literals."""
    parts = decompose_rule(rule)
    if parts is None:
        raise ValueError("not a PSL rule")
    return list(parts.head) + [complement(b) for b in parts.body]


def clause_form(rule: Formula) -> Formula:
    lits = clause_literals(rule)
    if not lits:
        return Const(0.0)
    return fold(OperatorKind.DISJ_LUKASIEWICZ, [lit.to_formula() for lit in lits])


def rewrite_rule(
    rule: Formula,
    body_choices: Sequence[Sequence[int]] | None = None,
    check: bool = True,
) -> RewriteSet:
    """Equivalent forms of a PSL rule obtained by moving clause literals across the arrow.

    Each choice is a set of positions in the clausal form (head literals
    first, then complemented body literals) whose complements form the new
    body. The empty choice yields the bare clause. By default every choice
    is generated; the one reproducing ``rule`` itself is skipped.
    """
    lits = clause_literals(rule)
    idx = range(len(lits))
    if body_choices is None:
        body_choices = [c for r in range(len(lits) + 1) for c in itertools.combinations(idx, r)]
    variants = []
    for choice in body_choices:
        chosen = set(choice)
        if not chosen <= set(idx):
            raise ValueError(f"literal positions {sorted(chosen)} out of range")
        if not chosen:
            v = clause_form(rule)
        else:
            body = [complement(lits[j]) for j in idx if j in chosen]
            head = [lits[j] for j in idx if j not in chosen]
            v = make_rule(head, body)
        if v != rule and v not in variants:
            variants.append(v)
    if check:
        for v in variants:
            res = check_equivalence(rule, v)
            if not res.equivalent:
                raise AssertionError(f"rewrite is not equivalent; witness {res.witness}")
    return RewriteSet(rule, tuple(variants), Relation.BY_CONSTRUCTION)
