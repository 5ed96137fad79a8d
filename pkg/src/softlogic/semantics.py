"""Fuzzy interpretations and truth-value evaluation."""

from __future__ import annotations

import itertools
import math
import re
from collections.abc import Mapping
from typing import Iterable, Iterator

import numpy as np

from .formula import (
    ATOM_RE,
    SCALAR_OPS,
    VECTOR_OPS,
    Atom,
    Connective,
    Const,
    Formula,
    Neg,
    OperatorKind,
)

MAX_ENUMERATION_ATOMS = 24


class UnknownAtomError(KeyError):
    pass


class Interpretation(Mapping):
    """Immutable total map from atom names to truth values in [0, 1]."""

    __slots__ = ("_values", "_hash")

    def __init__(self, values: Mapping | Iterable[tuple] = ()):
        items = values.items() if isinstance(values, Mapping) else values
        data = {}
        for key, v in items:
            name = key.name if isinstance(key, Atom) else Atom(key).name
            v = float(v)
            if not math.isfinite(v) or not (0.0 <= v <= 1.0):
                raise ValueError(f"truth value of {name} is {v!r}, outside [0, 1]")
            data[name] = v
        self._values = dict(sorted(data.items()))
        self._hash = None

    def __getitem__(self, key):
        name = key.name if isinstance(key, Atom) else key
        try:
            return self._values[name]
        except KeyError:
            raise UnknownAtomError(name) from None

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._values.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Interpretation):
            return self._values == other._values
        return NotImplemented

    def __repr__(self):
        inner = ", ".join(f"{k}={v:g}" for k, v in self._values.items())
        return "{" + inner + "}"

    @property
    def signature(self) -> tuple[str, ...]:
        return tuple(self._values)

    def true_atoms(self) -> frozenset[str]:
        """Atoms with value 1 (the set view of a Boolean interpretation)."""
        return frozenset(k for k, v in self._values.items() if v == 1.0)

    def to_dict(self) -> dict[str, float]:
        return dict(self._values)


def evaluate(f: Formula, i: Mapping) -> float:
    """Truth value of ``f`` under ``i``."""
    if isinstance(f, Atom):
        try:
            return i[f.name]
        except KeyError:
            raise UnknownAtomError(f.name) from None
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Neg):
        return SCALAR_OPS[_fuzzy(f.op)](evaluate(f.arg, i))
    return SCALAR_OPS[_fuzzy(f.op)](evaluate(f.left, i), evaluate(f.right, i))


def evaluate_array(f: Formula, columns: Mapping[str, np.ndarray]) -> np.ndarray:
    """Vectorized :func:`evaluate`; ``columns`` maps atom names to value arrays."""
    if isinstance(f, Atom):
        try:
            return np.asarray(columns[f.name], dtype=float)
        except KeyError:
            raise UnknownAtomError(f.name) from None
    if isinstance(f, Const):
        return np.float64(f.value)
    if isinstance(f, Neg):
        return VECTOR_OPS[_fuzzy(f.op)](evaluate_array(f.arg, columns))
    return VECTOR_OPS[_fuzzy(f.op)](evaluate_array(f.left, columns), evaluate_array(f.right, columns))


def _fuzzy(op) -> OperatorKind:
    if isinstance(op, Connective):
        raise TypeError(f"classical connective {op.token!r} has no fuzzy truth function; fuzzify first")
    return op


def satisfies(f: Formula, i: Mapping) -> bool:
    return evaluate(f, i) == 1.0


def satisfies_within(f: Formula, i: Mapping, eps: float) -> bool:
    """Tolerant satisfaction, for product-family formulas that round."""
    return evaluate(f, i) >= 1.0 - eps


def classical_value(f: Formula, world: Mapping) -> bool:
    """Two-valued evaluation; operator families collapse to their Boolean connective.

    ``world`` maps atoms to 0/1 (or bools). Constants must be 0 or 1.
    """
    if isinstance(f, Atom):
        v = world[f.name]
        if v not in (0, 1):
            raise ValueError(f"{f.name} has non-Boolean value {v!r}")
        return bool(v)
    if isinstance(f, Const):
        if f.value not in (0.0, 1.0):
            raise ValueError(f"constant {f.value} is not classical")
        return f.value == 1.0
    if isinstance(f, Neg):
        return not classical_value(f.arg, world)
    a = classical_value(f.left, world)
    b = classical_value(f.right, world)
    family = f.op.family.name
    if family == "CONJ":
        return a and b
    if family == "DISJ":
        return a or b
    return (not a) or b


def is_boolean(i: Mapping) -> bool:
    return all(v in (0.0, 1.0) for v in i.values())


def enumerate_boolean(signature: Iterable) -> Iterator[Interpretation]:
    """All Boolean interpretations; atoms in name order, last atom varies fastest."""
    names = sorted({a.name if isinstance(a, Atom) else a for a in signature})
    if len(names) > MAX_ENUMERATION_ATOMS:
        raise ValueError(f"{len(names)} atoms exceeds the enumeration limit of {MAX_ENUMERATION_ATOMS}")
    for bits in itertools.product((0.0, 1.0), repeat=len(names)):
        yield Interpretation(zip(names, bits))


_ENTRY_RE = re.compile(
    r"\s*(" + ATOM_RE.pattern + r")\s*=\s*((?:\d+(?:\.\d*)?|\.\d+))\s*(,|$)"
)


def parse_interpretation(
    text: str, signature: Iterable[str] | None = None, default_zero: bool = False
) -> Interpretation:
    """Parse ``{p=0.6, q=0.4}``.

    With a ``signature``, atoms outside it are rejected and missing atoms are
    an error unless ``default_zero`` is set.
    """
    s = text.strip()
    if not (s.startswith("{") and s.endswith("}")):
        raise ValueError(f"interpretation must be written as {{atom=value, ...}}: {text!r}")
    body = s[1:-1].strip()
    values: dict[str, float] = {}
    pos = 0
    while pos < len(body):
        m = _ENTRY_RE.match(body, pos)
        if not m:
            raise ValueError(f"cannot parse interpretation near {body[pos:]!r}")
        name, value = m.group(1), float(m.group(2))
        if name in values:
            raise ValueError(f"atom {name} assigned twice")
        values[name] = value
        pos = m.end()
        if m.group(3) == "" and pos < len(body):
            raise ValueError(f"cannot parse interpretation near {body[pos:]!r}")
    if signature is not None:
        sig = set(signature)
        extra = sorted(set(values) - sig)
        if extra:
            raise ValueError(f"atoms not in the signature: {', '.join(extra)}")
        missing = sorted(sig - set(values))
        if missing and not default_zero:
            raise ValueError(f"missing truth values for: {', '.join(missing)}")
        for name in missing:
            values[name] = 0.0
    return Interpretation(values)
