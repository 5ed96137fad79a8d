"""Weight and density schemes for MLN, PSL and GPSL programs."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .formula import (
    Atom,
    Formula,
    atoms,
    constants,
    decompose_rule,
)
from .semantics import (
    MAX_ENUMERATION_ATOMS,
    classical_value,
    enumerate_boolean,
    evaluate,
    evaluate_array,
    is_boolean,
)

RULE_DISTANCE_TOL = 1e-12


class Flavor(enum.Enum):
    MLN = "mln"
    PSL = "psl"
    GPSL = "gpsl"


class ProgramError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedFormula:
    weight: float
    formula: Formula
    exponent: int = 1

    def __post_init__(self):
        w = float(self.weight)
        if not math.isfinite(w):
            raise ProgramError(f"weight {self.weight!r} is not finite")
        object.__setattr__(self, "weight", w)
        if self.exponent not in (1, 2):
            raise ProgramError(f"exponent must be 1 or 2, got {self.exponent!r}")


@dataclass(frozen=True)
class Program:
    """A flavored set of weighted formulas over a signature.

    ``atoms`` may list declared atoms that no formula mentions; atoms used by
    formulas are always added.
    """

    flavor: Flavor
    formulas: tuple[WeightedFormula, ...] = ()
    atoms: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "formulas", tuple(self.formulas))
        names = {a.name if isinstance(a, Atom) else Atom(a).name for a in self.atoms}
        for wf in self.formulas:
            names |= atoms(wf.formula)
        object.__setattr__(self, "atoms", frozenset(names))
        for n, wf in enumerate(self.formulas, 1):
            _validate(self.flavor, wf, n)

    @property
    def signature(self) -> tuple[str, ...]:
        return tuple(sorted(self.atoms))

    def __len__(self):
        return len(self.formulas)

    def with_formulas(self, formulas: Iterable[WeightedFormula], flavor: Flavor | None = None) -> "Program":
        return Program(flavor or self.flavor, tuple(formulas), self.atoms)


def _validate(flavor: Flavor, wf: WeightedFormula, n: int) -> None:
    if flavor is Flavor.PSL:
        if wf.weight < 0:
            raise ProgramError(f"formula {n}: PSL weights must be nonnegative, got {wf.weight:g}")
        if decompose_rule(wf.formula) is None:
            raise ProgramError(f"formula {n}: not a PSL rule (Lukasiewicz rule over literals)")
    elif flavor is Flavor.MLN:
        if any(c not in (0.0, 1.0) for c in constants(wf.formula)):
            raise ProgramError(f"formula {n}: MLN formulas only allow the constants 0 and 1")
        if wf.exponent != 1:
            raise ProgramError(f"formula {n}: MLN formulas carry no exponent")


def _require(program: Program, *flavors: Flavor) -> None:
    if program.flavor not in flavors:
        allowed = "/".join(f.value for f in flavors)
        raise ProgramError(f"expected a {allowed} program, got {program.flavor.value}")


def _logsumexp(xs: Sequence[float]) -> float:
    m = max(xs)
    if m == -math.inf:
        return m
    return m + math.log(math.fsum(math.exp(x - m) for x in xs))


# ---------------------------------------------------------------------------
# MLN


def mln_log_weight(program: Program, i: Mapping) -> float:
    """Sum of the weights of formulas classically satisfied by ``i``."""
    _require(program, Flavor.MLN)
    if not is_boolean(i):
        raise ValueError("MLN weights are defined for Boolean interpretations only")
    return math.fsum(wf.weight for wf in program.formulas if classical_value(wf.formula, i))


def mln_weight(program: Program, i: Mapping) -> float:
    return math.exp(mln_log_weight(program, i))


def mln_log_partition(program: Program) -> float:
    _require(program, Flavor.MLN)
    return _logsumexp([mln_log_weight(program, w) for w in enumerate_boolean(program.atoms)])


def mln_probability(program: Program, i: Mapping) -> float:
    if len(program.atoms) > MAX_ENUMERATION_ATOMS:
        raise ValueError("signature too large for exact normalization")
    return math.exp(mln_log_weight(program, i) - mln_log_partition(program))


# ---------------------------------------------------------------------------
# Distances to satisfaction


def _literal_value(lit, i: Mapping) -> float:
    v = i[lit.atom.name]
    return 1.0 - v if lit.negated else v


def psl_distance(rule: Formula, i: Mapping) -> float:
    """Hinge distance ``max(0, body - head)`` of a PSL rule.

    Body and head are computed from the literal values directly (n-ary
    Lukasiewicz t-norm / t-conorm), not through formula evaluation.
    """
    parts = decompose_rule(rule)
    if parts is None:
        raise ValueError("not a PSL rule")
    body_vals = [_literal_value(b, i) for b in parts.body]
    body = max(0.0, math.fsum(body_vals) - (len(body_vals) - 1)) if body_vals else 1.0
    head = min(1.0, math.fsum(_literal_value(h, i) for h in parts.head))
    return max(0.0, body - head)


def gpsl_distance(f: Formula, i: Mapping) -> float:
    return 1.0 - evaluate(f, i)


# ---------------------------------------------------------------------------
# Density


@dataclass(frozen=True)
class FormulaPenalty:
    index: int
    distance: float
    penalty: float


@dataclass(frozen=True)
class DensityReport:
    per_formula: tuple[FormulaPenalty, ...]
    log_unnormalized: float
    unnormalized: float
    normalized: float | None = None
    normalized_stderr: float | None = None
    log_partition: float | None = None

    def to_dict(self) -> dict:
        return {
            "per_formula": [
                {"index": p.index, "distance": p.distance, "penalty": p.penalty} for p in self.per_formula
            ],
            "log_unnormalized": self.log_unnormalized,
            "unnormalized": self.unnormalized,
            "normalized": self.normalized,
            "normalized_stderr": self.normalized_stderr,
            "log_partition": self.log_partition,
        }


def density(program: Program, i: Mapping, normalization: "Normalization | None" = None) -> DensityReport:
    """Per-formula penalties and the (optionally normalized) density at ``i``."""
    _require(program, Flavor.PSL, Flavor.GPSL)
    missing = program.atoms - set(i)
    if missing:
        raise ValueError(f"interpretation lacks atoms: {', '.join(sorted(missing))}")
    rows = []
    for n, wf in enumerate(program.formulas):
        d = gpsl_distance(wf.formula, i)
        if program.flavor is Flavor.PSL:
            d_rule = psl_distance(wf.formula, i)
            assert abs(d_rule - d) <= RULE_DISTANCE_TOL, (d_rule, d)
            d = d_rule
        rows.append(FormulaPenalty(n, d, wf.weight * d**wf.exponent))
    log_u = 0.0 - math.fsum(r.penalty for r in rows)
    report = DensityReport(tuple(rows), log_u, math.exp(log_u))
    if normalization is not None:
        report = DensityReport(
            report.per_formula,
            log_u,
            report.unnormalized,
            normalized=math.exp(log_u - normalization.log_z),
            normalized_stderr=normalization.relative_stderr * math.exp(log_u - normalization.log_z)
            if normalization.stderr is not None
            else None,
            log_partition=normalization.log_z,
        )
    return report


def log_density(program: Program, i: Mapping) -> float:
    return density(program, i).log_unnormalized


def log_density_array(program: Program, columns: Mapping[str, np.ndarray]) -> np.ndarray:
    """Vectorized log unnormalized density (GPSL distances) over many interpretations."""
    _require(program, Flavor.PSL, Flavor.GPSL)
    total = np.float64(0.0)
    for wf in program.formulas:
        d = 1.0 - evaluate_array(wf.formula, columns)
        total = total + wf.weight * d**wf.exponent
    return 0.0 - total


def log_total_weight(program: Program) -> float:
    _require(program, Flavor.PSL, Flavor.GPSL)
    return math.fsum(wf.weight for wf in program.formulas)


def total_weight(program: Program) -> float:
    return math.exp(log_total_weight(program))


# ---------------------------------------------------------------------------
# Normalization

DEFAULT_STEPS = {0: 1.0, 1: 1e-4, 2: 1e-3, 3: 1e-2}
MAX_QUADRATURE_ATOMS = 3


@dataclass(frozen=True)
class Normalization:
    """Estimate of the normalizing integral over the unit box."""

    log_z: float
    method: str
    step: float | None = None
    points: int = 0
    stderr: float | None = None

    @property
    def z(self) -> float:
        return math.exp(self.log_z)

    @property
    def relative_stderr(self) -> float:
        return 0.0 if self.stderr is None else self.stderr / self.z

    def density(self, program: Program, i: Mapping) -> float:
        """Normalized density at ``i``."""
        return math.exp(log_density(program, i) - self.log_z)


def midpoint_grid(n_atoms: int, step: float) -> np.ndarray:
    """Cell midpoints of the regular grid on [0,1]^n, shape (points, n)."""
    cells = int(round(1.0 / step))
    if cells < 1 or abs(cells * step - 1.0) > 1e-9:
        raise ValueError(f"step {step} does not divide [0, 1]")
    mids = (np.arange(cells) + 0.5) / cells
    if n_atoms == 0:
        return np.zeros((1, 0))
    mesh = np.meshgrid(*([mids] * n_atoms), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def normalize(
    program: Program,
    step: float | None = None,
    samples: int = 100_000,
    seed: int = 0,
) -> Normalization:
    """Integrate the unnormalized density over [0,1]^n.

    Midpoint quadrature for up to three atoms, uniform Monte Carlo beyond.
    """
    _require(program, Flavor.PSL, Flavor.GPSL)
    names = program.signature
    n = len(names)
    if n <= MAX_QUADRATURE_ATOMS:
        h = step if step is not None else DEFAULT_STEPS[n]
        pts = midpoint_grid(n, h) if n else np.zeros((1, 0))
        logs = np.broadcast_to(log_density_array(program, _columns(names, pts)), (len(pts),))
        m = float(np.max(logs))
        # each cell has volume h^n, i.e. Z is the mean over cells
        log_z = m + math.log(float(np.mean(np.exp(logs - m))))
        return Normalization(log_z, "midpoint", step=h if n else None, points=len(pts))
    rng = np.random.default_rng(seed)
    pts = rng.random((samples, n))
    logs = np.broadcast_to(log_density_array(program, _columns(names, pts)), (samples,))
    m = float(np.max(logs))
    w = np.exp(logs - m)
    mean = float(np.mean(w))
    se = float(np.std(w, ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return Normalization(m + math.log(mean), "monte-carlo", points=samples, stderr=se * math.exp(m))


def _columns(names: Sequence[str], pts: np.ndarray) -> dict[str, np.ndarray]:
    return {name: pts[:, j] for j, name in enumerate(names)}


__all__ = [
    "Flavor",
    "ProgramError",
    "WeightedFormula",
    "Program",
    "mln_log_weight",
    "mln_weight",
    "mln_log_partition",
    "mln_probability",
    "psl_distance",
    "gpsl_distance",
    "FormulaPenalty",
    "DensityReport",
    "density",
    "log_density",
    "log_density_array",
    "log_total_weight",
    "total_weight",
    "Normalization",
    "normalize",
    "midpoint_grid",
]
