"""Fuzzy propositional formulas, operator families and literal helpers."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Iterator, Union

import numpy as np

ATOM_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:\([^()\n]*\))?")


class Family(enum.Enum):
    NEG = "negation"
    CONJ = "conjunction"
    DISJ = "disjunction"
    IMPL = "implication"


class OperatorKind(enum.Enum):
    """Fuzzy operators; the value is the DSL token."""

    NEG_STANDARD = "!s"
    NEG_GODEL = "!m"
    CONJ_LUKASIEWICZ = "&l"
    CONJ_GODEL = "&m"
    CONJ_PRODUCT = "&p"
    DISJ_LUKASIEWICZ = "|l"
    DISJ_GODEL = "|m"
    DISJ_PRODUCT = "|p"
    IMPL_LUKASIEWICZ = "->l"
    IMPL_RESIDUAL_GODEL = "->r"
    IMPL_S_GODEL = "->s"

    @property
    def family(self) -> Family:
        return _FAMILY_BY_PREFIX[self.value[:-1]]

    @property
    def arity(self) -> int:
        return 1 if self.family is Family.NEG else 2

    @property
    def token(self) -> str:
        return self.value

    @property
    def is_lukasiewicz(self) -> bool:
        return self in LUKASIEWICZ_OPS


class Connective(enum.Enum):
    """Classical (Boolean) connectives, used for MLN-side formulas."""

    NOT = "!"
    AND = "&"
    OR = "|"
    IMPLIES = "->"

    @property
    def family(self) -> Family:
        return _FAMILY_BY_PREFIX[self.value]

    @property
    def arity(self) -> int:
        return 1 if self is Connective.NOT else 2

    @property
    def token(self) -> str:
        return self.value


_FAMILY_BY_PREFIX = {"!": Family.NEG, "&": Family.CONJ, "|": Family.DISJ, "->": Family.IMPL}

LUKASIEWICZ_OPS = frozenset(
    {
        OperatorKind.NEG_STANDARD,
        OperatorKind.CONJ_LUKASIEWICZ,
        OperatorKind.DISJ_LUKASIEWICZ,
        OperatorKind.IMPL_LUKASIEWICZ,
    }
)

Op = Union[OperatorKind, Connective]


# Truth functions. Scalar versions are exact Python arithmetic; vector
# versions accept numpy arrays and must agree with the scalar ones.

# The residual implication jumps at x == y, so rounding noise such as
# 1 - (1 - 0.3) > 0.3 would flip it; comparisons allow this much slack.
RESIDUAL_SLACK = 1e-12


def _impl_r(x, y):
    return 1.0 if x <= y + RESIDUAL_SLACK else y


def _neg_m(x):
    return 1.0 if x == 0 else 0.0


SCALAR_OPS: dict[OperatorKind, Callable[..., float]] = {
    OperatorKind.NEG_STANDARD: lambda x: 1.0 - x,
    OperatorKind.NEG_GODEL: _neg_m,
    OperatorKind.CONJ_LUKASIEWICZ: lambda x, y: max(x + y - 1.0, 0.0),
    OperatorKind.CONJ_GODEL: lambda x, y: min(x, y),
    OperatorKind.CONJ_PRODUCT: lambda x, y: x * y,
    OperatorKind.DISJ_LUKASIEWICZ: lambda x, y: min(x + y, 1.0),
    OperatorKind.DISJ_GODEL: lambda x, y: max(x, y),
    OperatorKind.DISJ_PRODUCT: lambda x, y: x + y - x * y,
    OperatorKind.IMPL_LUKASIEWICZ: lambda x, y: min(1.0 - x + y, 1.0),
    OperatorKind.IMPL_RESIDUAL_GODEL: _impl_r,
    OperatorKind.IMPL_S_GODEL: lambda x, y: max(1.0 - x, y),
}

VECTOR_OPS: dict[OperatorKind, Callable[..., np.ndarray]] = {
    OperatorKind.NEG_STANDARD: lambda x: 1.0 - x,
    OperatorKind.NEG_GODEL: lambda x: np.where(x == 0, 1.0, 0.0),
    OperatorKind.CONJ_LUKASIEWICZ: lambda x, y: np.maximum(x + y - 1.0, 0.0),
    OperatorKind.CONJ_GODEL: np.minimum,
    OperatorKind.CONJ_PRODUCT: lambda x, y: x * y,
    OperatorKind.DISJ_LUKASIEWICZ: lambda x, y: np.minimum(x + y, 1.0),
    OperatorKind.DISJ_GODEL: np.maximum,
    OperatorKind.DISJ_PRODUCT: lambda x, y: x + y - x * y,
    OperatorKind.IMPL_LUKASIEWICZ: lambda x, y: np.minimum(1.0 - x + y, 1.0),
    OperatorKind.IMPL_RESIDUAL_GODEL: lambda x, y: np.where(x <= y + RESIDUAL_SLACK, 1.0, y),
    OperatorKind.IMPL_S_GODEL: lambda x, y: np.maximum(1.0 - x, y),
}


def apply_operator(op: OperatorKind, *args: float) -> float:
    """Apply the truth function of ``op`` to one or two values in [0, 1]."""
    if len(args) != op.arity:
        raise ValueError(f"{op.name} takes {op.arity} argument(s), got {len(args)}")
    for a in args:
        if not (0.0 <= a <= 1.0):
            raise ValueError(f"truth value {a!r} outside [0, 1]")
    return float(SCALAR_OPS[op](*(float(a) for a in args)))


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Atom:
    name: str

    def __post_init__(self):
        if not isinstance(self.name, str) or not ATOM_RE.fullmatch(self.name):
            raise ValueError(f"invalid atom name {self.name!r}")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or not (0.0 <= v <= 1.0):
            raise ValueError(f"constant {self.value!r} outside [0, 1]")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Neg:
    op: Op
    arg: "Formula"

    def __post_init__(self):
        if not isinstance(self.op, (OperatorKind, Connective)) or self.op.family is not Family.NEG:
            raise ValueError(f"{self.op!r} is not a negation")
        _check_formula(self.arg)


@dataclass(frozen=True)
class Bin:
    op: Op
    left: "Formula"
    right: "Formula"

    def __post_init__(self):
        if not isinstance(self.op, (OperatorKind, Connective)) or self.op.family is Family.NEG:
            raise ValueError(f"{self.op!r} is not a binary connective")
        _check_formula(self.left)
        _check_formula(self.right)


Formula = Union[Atom, Const, Neg, Bin]
FORMULA_TYPES = (Atom, Const, Neg, Bin)


def _check_formula(f) -> None:
    if not isinstance(f, FORMULA_TYPES):
        raise TypeError(f"expected a formula, got {type(f).__name__}")


def subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Neg):
            stack.append(g.arg)
        elif isinstance(g, Bin):
            stack.append(g.right)
            stack.append(g.left)


def atoms(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Atom))


def operators(f: Formula) -> set[Op]:
    return {g.op for g in subformulas(f) if isinstance(g, (Neg, Bin))}


def constants(f: Formula) -> list[float]:
    return [g.value for g in subformulas(f) if isinstance(g, Const)]


def is_classical(f: Formula) -> bool:
    """True if ``f`` only uses Boolean connectives and the constants 0 and 1."""
    return all(isinstance(op, Connective) for op in operators(f)) and all(
        c in (0.0, 1.0) for c in constants(f)
    )


def fold(op: Op, items: Iterable[Formula]) -> Formula:
    """Left-associated chain ``((a op b) op c) ...``."""
    items = list(items)
    if not items:
        raise ValueError("cannot fold an empty sequence")
    return reduce(lambda a, b: Bin(op, a, b), items)


def flatten(f: Formula, op: Op) -> list[Formula]:
    """Operands of a (possibly nested) chain of ``op``."""
    if isinstance(f, Bin) and f.op is op:
        return flatten(f.left, op) + flatten(f.right, op)
    return [f]


# ---------------------------------------------------------------------------
# Literals and PSL rules


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def to_formula(self) -> Formula:
        return Neg(OperatorKind.NEG_STANDARD, self.atom) if self.negated else self.atom

    def __str__(self):
        return f"!s {self.atom}" if self.negated else str(self.atom)


def complement(lit: Literal) -> Literal:
    return Literal(lit.atom, not lit.negated)


def as_literal(f: Formula) -> Literal | None:
    if isinstance(f, Atom):
        return Literal(f)
    if isinstance(f, Neg) and f.op is OperatorKind.NEG_STANDARD and isinstance(f.arg, Atom):
        return Literal(f.arg, True)
    return None


@dataclass(frozen=True)
class RuleParts:
    """Decomposition of ``head <-l body``.

    An empty ``body`` stands for the constant 1, an empty ``head`` for the
    constant 0. A head with several literals is a Lukasiewicz disjunction.
    """

    head: tuple[Literal, ...]
    body: tuple[Literal, ...]


def _literal_chain(f: Formula, op: OperatorKind, unit: float) -> tuple[Literal, ...] | None:
    if isinstance(f, Const):
        return () if f.value == unit else None
    lits = []
    for part in flatten(f, op):
        lit = as_literal(part)
        if lit is None:
            return None
        lits.append(lit)
    return tuple(lits)


def decompose_rule(f: Formula) -> RuleParts | None:
    """Split a PSL rule into head and body literals, or None if ``f`` is not one."""
    if not (isinstance(f, Bin) and f.op is OperatorKind.IMPL_LUKASIEWICZ):
        return None
    body = _literal_chain(f.left, OperatorKind.CONJ_LUKASIEWICZ, 1.0)
    head = _literal_chain(f.right, OperatorKind.DISJ_LUKASIEWICZ, 0.0)
    if body is None or head is None:
        return None
    return RuleParts(head=head, body=body)


def is_psl_rule(f: Formula) -> bool:
    return decompose_rule(f) is not None


def make_rule(head: Iterable[Literal], body: Iterable[Literal]) -> Formula:
    """Build ``head <-l body`` with the empty-body / empty-head conventions."""
    head, body = list(head), list(body)
    lhs = fold(OperatorKind.CONJ_LUKASIEWICZ, [b.to_formula() for b in body]) if body else Const(1.0)
    rhs = fold(OperatorKind.DISJ_LUKASIEWICZ, [h.to_formula() for h in head]) if head else Const(0.0)
    return Bin(OperatorKind.IMPL_LUKASIEWICZ, lhs, rhs)
