"""MAP inference, the MLN/GPSL bridges and Monte Carlo marginals."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .formula import RESIDUAL_SLACK, Atom, Const, Formula, Neg, OperatorKind, atoms
from .logics import (
    Flavor,
    Program,
    density,
    log_density_array,
    log_total_weight,
    mln_log_weight,
)
from .semantics import MAX_ENUMERATION_ATOMS, Interpretation, enumerate_boolean, evaluate_array
from .transform import crispify, mln_to_gpsl

TIE_TOL = 1e-9
MAX_GRID_SEED_ATOMS = 4


@dataclass(frozen=True)
class MapResult:
    argmax: tuple[Interpretation, ...]
    objective: float
    method: str
    starts: int = 0
    converged: bool = True
    iterations: int = 0
    grid_seeded: bool = False
    start_objectives: tuple[float, ...] = ()

    @property
    def best(self) -> Interpretation:
        return self.argmax[0]

    def to_dict(self) -> dict:
        return {
            "argmax": [i.to_dict() for i in self.argmax],
            "objective": self.objective,
            "method": self.method,
            "starts": self.starts,
            "converged": self.converged,
            "iterations": self.iterations,
            "grid_seeded": self.grid_seeded,
            "start_objectives": list(self.start_objectives),
        }


def _require(program: Program, *flavors: Flavor) -> None:
    if program.flavor not in flavors:
        allowed = "/".join(f.value for f in flavors)
        raise ValueError(f"expected a {allowed} program, got {program.flavor.value}")


def map_boolean(program: Program) -> MapResult:
    """Most probable Boolean worlds of an MLN by full enumeration."""
    _require(program, Flavor.MLN)
    if len(program.atoms) > MAX_ENUMERATION_ATOMS:
        raise ValueError(f"more than {MAX_ENUMERATION_ATOMS} atoms")
    scored = [(mln_log_weight(program, w), w) for w in enumerate_boolean(program.atoms)]
    best = max(s for s, _ in scored)
    ties = tuple(w for s, w in scored if s >= best - TIE_TOL)
    return MapResult(ties, best, "boolean-enumeration", starts=len(scored))


# ---------------------------------------------------------------------------
# Continuous MAP


def _value_grad(f: Formula, x: np.ndarray, index: dict[str, int]):
    """Truth value of ``f`` at each row of ``x`` and a subgradient w.r.t. the columns.

    At kinks the flat piece is used, so satisfied hinges contribute nothing.
    """
    s, n = x.shape
    if isinstance(f, Atom):
        g = np.zeros((s, n))
        j = index[f.name]
        g[:, j] = 1.0
        return x[:, j], g
    if isinstance(f, Const):
        return np.full(s, f.value), np.zeros((s, n))
    if isinstance(f, Neg):
        a, ga = _value_grad(f.arg, x, index)
        if f.op is OperatorKind.NEG_STANDARD:
            return 1.0 - a, -ga
        return np.where(a == 0, 1.0, 0.0), np.zeros_like(ga)
    a, ga = _value_grad(f.left, x, index)
    b, gb = _value_grad(f.right, x, index)
    op = f.op
    if op is OperatorKind.CONJ_LUKASIEWICZ:
        u = a + b - 1.0
        on = (u > 0)[:, None]
        return np.maximum(u, 0.0), np.where(on, ga + gb, 0.0)
    if op is OperatorKind.DISJ_LUKASIEWICZ:
        u = a + b
        on = (u < 1)[:, None]
        return np.minimum(u, 1.0), np.where(on, ga + gb, 0.0)
    if op is OperatorKind.IMPL_LUKASIEWICZ:
        u = 1.0 - a + b
        on = (u < 1)[:, None]
        return np.minimum(u, 1.0), np.where(on, gb - ga, 0.0)
    if op is OperatorKind.CONJ_GODEL:
        pick = (a <= b)[:, None]
        return np.minimum(a, b), np.where(pick, ga, gb)
    if op is OperatorKind.DISJ_GODEL:
        pick = (a >= b)[:, None]
        return np.maximum(a, b), np.where(pick, ga, gb)
    if op is OperatorKind.CONJ_PRODUCT:
        return a * b, b[:, None] * ga + a[:, None] * gb
    if op is OperatorKind.DISJ_PRODUCT:
        return a + b - a * b, (1.0 - b)[:, None] * ga + (1.0 - a)[:, None] * gb
    if op is OperatorKind.IMPL_RESIDUAL_GODEL:
        le = a <= b + RESIDUAL_SLACK
        return np.where(le, 1.0, b), np.where(le[:, None], 0.0, gb)
    if op is OperatorKind.IMPL_S_GODEL:
        pick = (1.0 - a >= b)[:, None]
        return np.maximum(1.0 - a, b), np.where(pick, -ga, gb)
    raise TypeError(f"no truth function for {op!r}")


def penalty_and_grad(program: Program, x: np.ndarray, names) -> tuple[np.ndarray, np.ndarray]:
    """Total penalty sum(w * d^k) per row of ``x`` and its subgradient."""
    index = {name: j for j, name in enumerate(names)}
    total = np.zeros(x.shape[0])
    grad = np.zeros_like(x)
    for wf in program.formulas:
        v, g = _value_grad(wf.formula, x, index)
        d = 1.0 - v
        if wf.exponent == 1:
            total += wf.weight * d
            grad -= wf.weight * g
        else:
            total += wf.weight * d * d
            grad -= (2.0 * wf.weight * d)[:, None] * g
    return total, grad


def grid_points(n_atoms: int, step: float) -> np.ndarray:
    cells = int(round(1.0 / step))
    ticks = np.arange(cells + 1) / cells
    if n_atoms == 0:
        return np.zeros((1, 0))
    mesh = np.meshgrid(*([ticks] * n_atoms), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def grid_search(program: Program, step: float = 0.05, max_ties: int = 64) -> MapResult:
    """Exhaustive search over the closed grid with spacing ``step``.

    Only the first ``max_ties`` tied grid points (in grid order) are returned.
    """
    _require(program, Flavor.PSL, Flavor.GPSL)
    names = program.signature
    pts = grid_points(len(names), step)
    logs = np.broadcast_to(log_density_array(program, {n: pts[:, j] for j, n in enumerate(names)}), (len(pts),))
    best = float(np.max(logs))
    ties = np.flatnonzero(logs >= best - TIE_TOL)[:max_ties]
    argmax = tuple(Interpretation(zip(names, pts[j])) for j in ties)
    return MapResult(argmax, best, "grid-oracle", starts=len(pts))


def _min_norm_pair(g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Row-wise shortest vector on the segment between ``g`` and ``h``."""
    diff = g - h
    den = np.einsum("ij,ij->i", diff, diff)
    lam = np.zeros(len(g))
    nz = den > 0
    lam[nz] = np.clip(-np.einsum("ij,ij->i", h[nz], diff[nz]) / den[nz], 0.0, 1.0)
    return h + lam[:, None] * diff


def map_continuous(
    program: Program,
    starts: int = 16,
    grid_step: float | None = 0.05,
    epochs: int = 40,
    iterations: int = 100,
    step_size: float = 0.5,
    decay: float = 0.5,
    seed: int = 0,
) -> MapResult:
    """Minimize the total penalty over [0,1]^n by multistart projected subgradient descent.

    Starts are all-0, all-1, the best grid point (small signatures), then
    uniform random points. Each epoch restarts every start from its best
    iterate with steps ``c/sqrt(t)``; ``c`` shrinks by ``decay`` between
    epochs. The step direction is the shortest vector between the current
    and previous subgradient, which cancels the zig-zag across a kink and
    follows its floor instead.
    """
    _require(program, Flavor.PSL, Flavor.GPSL)
    if starts < 1:
        raise ValueError("need at least one start")
    names = program.signature
    n = len(names)
    if n == 0:
        obj = density(program, Interpretation()).log_unnormalized
        return MapResult((Interpretation(),), obj, "multistart-descent", starts=1)

    x0 = [np.zeros(n), np.ones(n)]
    grid_seeded = False
    if grid_step is not None and n <= MAX_GRID_SEED_ATOMS:
        x0.append(np.array([grid_search(program, grid_step, max_ties=1).best[a] for a in names]))
        grid_seeded = True
    rng = np.random.default_rng(seed)
    while len(x0) < starts:
        x0.append(rng.random(n))
    x = np.array(x0[:starts])

    best_x = x.copy()
    best_f, _ = penalty_and_grad(program, best_x, names)
    history = []
    c = step_size
    total_iters = 0
    for _ in range(epochs):
        x = best_x.copy()
        prev = None
        for t in range(1, iterations + 1):
            f, g = penalty_and_grad(program, x, names)
            better = f < best_f
            best_f = np.where(better, f, best_f)
            best_x[better] = x[better]
            if not g.any():
                break
            raw = g
            if prev is not None:
                g = _min_norm_pair(g, prev)
            prev = raw
            norm = np.linalg.norm(g, axis=1)
            moving = norm > 0
            step = np.zeros_like(x)
            step[moving] = g[moving] / norm[moving, None]
            x = np.clip(x - (c / math.sqrt(t)) * step, 0.0, 1.0)
            total_iters += 1
        f, _ = penalty_and_grad(program, x, names)
        better = f < best_f
        best_f = np.where(better, f, best_f)
        best_x[better] = x[better]
        history.append(float(best_f.min()))
        c *= decay

    top = float(best_f.min())
    converged = len(history) < 3 or history[-3] - history[-1] <= TIE_TOL
    argmax: list[Interpretation] = []
    seen: list[np.ndarray] = []
    for s in range(len(best_x)):
        if best_f[s] <= top + TIE_TOL and not any(np.max(np.abs(best_x[s] - p)) <= 1e-6 for p in seen):
            seen.append(best_x[s])
            argmax.append(Interpretation(zip(names, best_x[s])))
    objective = density(program, argmax[0]).log_unnormalized
    return MapResult(
        tuple(argmax),
        objective,
        "multistart-descent",
        starts=len(best_x),
        converged=bool(converged),
        iterations=total_iters,
        grid_seeded=grid_seeded,
        start_objectives=tuple(0.0 - float(v) for v in best_f),
    )


# ---------------------------------------------------------------------------
# MLN <-> GPSL bridges


@dataclass(frozen=True)
class CrispMapResult:
    continuous: MapResult
    boolean: MapResult
    rounded: tuple[Interpretation, ...]
    agrees: bool
    gap: float
    alpha: float
    band: float
    missed: tuple[Interpretation, ...] = ()

    def to_dict(self) -> dict:
        return {
            "continuous": self.continuous.to_dict(),
            "boolean": self.boolean.to_dict(),
            "rounded": [i.to_dict() for i in self.rounded],
            "agrees": self.agrees,
            "missed": [i.to_dict() for i in self.missed],
            "gap": self.gap,
            "alpha": self.alpha,
            "band": self.band,
        }


def boolean_gap(i: Interpretation) -> float:
    """Max-norm distance from ``i`` to the nearest Boolean interpretation."""
    return max((min(v, 1.0 - v) for v in i.values()), default=0.0)


def crispified_program(mln: Program, alpha: float, k: int = 1) -> Program:
    translated = mln_to_gpsl(mln, k)
    if alpha == 0:
        return translated
    return translated.with_formulas(translated.formulas + tuple(crispify(mln.atoms, alpha)))


def map_via_crispification(mln: Program, alpha: float = 1e3, k: int = 1, **config) -> CrispMapResult:
    """Continuous MAP of the fuzzified MLN plus crispifying rules, checked against enumeration.

    Coordinates within ``10/alpha`` of 0 or 1 are rounded before comparing
    with :func:`map_boolean`. ``agrees`` holds when every rounded argmax is a
    Boolean MAP world; tied MAP worlds the descent did not reach are listed
    in ``missed``.
    """
    _require(mln, Flavor.MLN)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    continuous = map_continuous(crispified_program(mln, alpha, k), **config)
    boolean = map_boolean(mln)
    band = min(10.0 / alpha, 0.5) if alpha > 0 else 0.0
    rounded = []
    for j in continuous.argmax:
        r = Interpretation({a: (round(v) if min(v, 1.0 - v) < band else v) for a, v in j.items()})
        if r not in rounded:
            rounded.append(r)
    agrees = set(rounded) <= set(boolean.argmax)
    missed = tuple(w for w in boolean.argmax if w not in rounded)
    gap = max(boolean_gap(j) for j in continuous.argmax)
    return CrispMapResult(continuous, boolean, tuple(rounded), agrees, gap, float(alpha), band, missed)


@dataclass(frozen=True)
class WeightIdentityReport:
    k: int
    rows: tuple[dict, ...]
    max_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> dict:
        return {"k": self.k, "rows": list(self.rows), "max_residual": self.max_residual,
                "tol": self.tol, "passed": self.passed}


def theorem2_check(mln: Program, k: int = 1, tol: float = 1e-9) -> WeightIdentityReport:
    """Compare log W_MLN(I) with log TW + log f(I) of the fuzzified program at every Boolean I."""
    _require(mln, Flavor.MLN)
    if len(mln.atoms) > 16:
        raise ValueError("theorem2_check is limited to 16 atoms")
    gpsl = mln_to_gpsl(mln, k)
    log_tw = log_total_weight(gpsl)
    rows = []
    worst = 0.0
    for world in enumerate_boolean(mln.atoms):
        log_w = mln_log_weight(mln, world)
        log_f = density(gpsl, world).log_unnormalized
        residual = abs(log_w - (log_tw + log_f))
        worst = max(worst, residual)
        rows.append({"world": sorted(world.true_atoms()), "log_weight": log_w,
                     "log_total_weight": log_tw, "log_density": log_f, "residual": residual})
    return WeightIdentityReport(k, tuple(rows), worst, tol)


# ---------------------------------------------------------------------------
# Marginals

SAMPLE_STREAMS = 8


@dataclass(frozen=True)
class MarginalEstimate:
    lower: float
    upper: float
    naive_fraction: float
    weighted_estimate: float
    stderr: float
    samples: int
    seed: int
    streams: int = SAMPLE_STREAMS

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "naive_fraction": self.naive_fraction,
            "weighted_estimate": self.weighted_estimate,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "streams": self.streams,
        }


def worker_count() -> int | None:
    value = os.environ.get("SOFTLOGIC_THREADS")
    if not value:
        return None
    threads = int(value)
    if threads < 1:
        raise ValueError("SOFTLOGIC_THREADS must be a positive integer")
    return threads


def estimate_marginal(
    program: Program,
    f: Formula,
    lower: float,
    upper: float,
    samples: int = 100_000,
    seed: int = 0,
    threads: int | None = None,
) -> MarginalEstimate:
    """Estimate P(lower <= v(f) <= upper) from uniform samples of [0,1]^n.

    ``naive_fraction`` is the plain share of samples in range;
    ``weighted_estimate`` reweights each sample by its unnormalized density
    (self-normalized importance sampling), which is the estimate of the
    probability under the program's density. Samples come from a fixed
    number of seeded streams, so results do not depend on ``threads``.
    """
    _require(program, Flavor.PSL, Flavor.GPSL)
    if not (0.0 <= lower <= upper <= 1.0):
        raise ValueError("need 0 <= lower <= upper <= 1")
    if samples < 1:
        raise ValueError("need at least one sample")
    names = sorted(program.atoms | atoms(f))
    n = len(names)
    sizes = [samples // SAMPLE_STREAMS + (s < samples % SAMPLE_STREAMS) for s in range(SAMPLE_STREAMS)]
    seqs = np.random.SeedSequence(seed).spawn(SAMPLE_STREAMS)

    def run(s: int):
        pts = np.random.default_rng(seqs[s]).random((sizes[s], n))
        cols = {name: pts[:, j] for j, name in enumerate(names)}
        logs = np.broadcast_to(log_density_array(program, cols), (sizes[s],))
        vals = np.broadcast_to(evaluate_array(f, cols), (sizes[s],))
        return logs, (vals >= lower) & (vals <= upper)

    with ThreadPoolExecutor(max_workers=threads or worker_count()) as pool:
        parts = list(pool.map(run, range(SAMPLE_STREAMS)))
    logs = np.concatenate([p[0] for p in parts])
    hits = np.concatenate([p[1] for p in parts]).astype(float)

    w = np.exp(logs - logs.max())
    w /= w.sum()
    mu = float(np.dot(w, hits))
    stderr = float(math.sqrt(np.dot(w * w, (hits - mu) ** 2)))
    return MarginalEstimate(
        lower=float(lower),
        upper=float(upper),
        naive_fraction=float(hits.mean()),
        weighted_estimate=min(max(mu, 0.0), 1.0),
        stderr=stderr,
        samples=samples,
        seed=seed,
    )
