"""Stability of smooth functions on spheres via their Morse data.

A function is stable exactly when its critical points are all
nondegenerate and carry pairwise distinct values.  The module decides
that at explicit tolerances, evaluates the Morse inequalities linking
index counts to the Betti numbers of the sphere, and packages the
two-critical-point index argument and its consequence (nondegenerate
critical points with extreme indices force stability for n >= 2) as
executable checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sphere_fn import (
    CriticalPoint,
    IncompleteCensusError,
    SolverConfig,
    critical_points,
)

__all__ = [
    "NotApplicableError",
    "MorseVector",
    "MorseReport",
    "StabilityConfig",
    "StabilityVerdict",
    "is_stable",
    "morse_inequalities",
    "index_lemma_check",
    "prop4_check",
    "Prop4Report",
]


class NotApplicableError(ValueError):
    """The hypotheses of the requested check are not met."""


def betti_numbers(n: int) -> tuple[int, ...]:
    """Betti numbers of S^n (two ones for n = 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    r = [0] * (n + 1)
    r[0] += 1
    r[n] += 1
    return tuple(r)


@dataclass(frozen=True)
class MorseVector:
    """Per-index critical counts of a census on S^n."""

    dimension: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != self.dimension + 1:
            raise ValueError("need one count per index 0..n")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @property
    def betti(self) -> tuple[int, ...]:
        return betti_numbers(self.dimension)

    def partial_sums(self) -> tuple[int, ...]:
        """S_l = R_l - R_{l-1} + ... +- R_0 for l = 0..n."""
        out = []
        for lam in range(self.dimension + 1):
            s = sum((-1) ** (lam - j) * self.betti[j] for j in range(lam + 1))
            out.append(s)
        return tuple(out)

    @classmethod
    def from_census(cls, census, dimension: int) -> "MorseVector":
        counts = [0] * (dimension + 1)
        for p in census:
            if p.index is None:
                raise NotApplicableError("census contains a degenerate point")
            counts[p.index] += 1
        return cls(dimension, tuple(counts))


@dataclass(frozen=True)
class MorseReport:
    inequalities: tuple[tuple[int, bool], ...]
    euler_equality: bool

    @property
    def all_hold(self) -> bool:
        return self.euler_equality and all(ok for _, ok in self.inequalities)


def morse_inequalities(mv: MorseVector) -> MorseReport:
    """Evaluate S_l <= C_l - C_{l-1} + ... +- C_0 for every l, plus the
    alternating-sum equality between counts and Betti numbers."""
    n = mv.dimension
    rows = []
    for lam in range(n + 1):
        lhs = sum((-1) ** (lam - j) * mv.betti[j] for j in range(lam + 1))
        rhs = sum((-1) ** (lam - j) * mv.counts[j] for j in range(lam + 1))
        rows.append((lam, lhs <= rhs))
    euler = sum((-1) ** j * mv.betti[j] for j in range(n + 1)) == sum(
        (-1) ** j * mv.counts[j] for j in range(n + 1)
    )
    return MorseReport(inequalities=tuple(rows), euler_equality=euler)


@dataclass(frozen=True)
class StabilityConfig:
    """Tolerances for the stability verdict (relative margins)."""

    nd_tol: float = 1e-8
    val_tol: float = 1e-8
    solver: SolverConfig = field(default_factory=SolverConfig)


@dataclass(frozen=True, eq=False)
class StabilityVerdict:
    """Outcome of the stability decision.

    ``witness`` names the failure: a degenerate point or a
    value-colliding pair of census indices.  Margins are relative; a
    margin within a factor 10 of its threshold yields "indeterminate"
    rather than a confident verdict.
    """

    status: str  # "stable" | "unstable" | "indeterminate"
    census: tuple[CriticalPoint, ...]
    witness: object | None
    min_nd_rel: float
    min_gap_rel: float
    diagnosis: str = ""

    @property
    def exit_code(self) -> int:
        return {"stable": 0, "unstable": 2, "indeterminate": 3}[self.status]


def _value_gap(census):
    vals = np.array([p.value for p in census])
    if len(vals) < 2:
        return np.inf, None
    order = np.argsort(vals)
    diffs = np.diff(vals[order])
    k = int(np.argmin(diffs))
    pair = (int(order[k]), int(order[k + 1]))
    scale = max(float(np.abs(vals).max()), 1e-300)
    return float(diffs[k]) / scale, pair


def is_stable(f, cfg: StabilityConfig | None = None) -> StabilityVerdict:
    """Decide stability of f: Morse census with pairwise distinct values.

    Stable requires margins at least 10x their thresholds; a hard
    failure (a margin below a tenth of its threshold, or a value
    collision) gives "unstable"; anything in between, or a census that
    cannot be completed, gives "indeterminate".
    """
    cfg = cfg or StabilityConfig()
    try:
        census = tuple(critical_points(f, cfg.solver))
    except IncompleteCensusError as err:
        return StabilityVerdict(
            status="indeterminate",
            census=tuple(err.census),
            witness=next((p for p in err.census if p.index is None), None),
            min_nd_rel=0.0,
            min_gap_rel=0.0,
            diagnosis=f"incomplete census: {err}",
        )

    nd_rels = [p.nd_margin / max(p.hess_scale, 1e-300) for p in census]
    min_nd = min(nd_rels)
    gap_rel, pair = _value_gap(census)

    ratios = (min_nd / cfg.nd_tol, gap_rel / cfg.val_tol)
    worst = min(ratios)
    if worst >= 10.0:
        status, witness, diagnosis = "stable", None, ""
    elif worst <= 0.1:
        status = "unstable"
        if ratios[1] <= ratios[0]:
            witness = pair
            diagnosis = "critical value collision"
        else:
            witness = census[int(np.argmin(nd_rels))]
            diagnosis = "degenerate critical point"
    else:
        status, witness = "indeterminate", None
        diagnosis = "margin within a factor 10 of threshold"
    return StabilityVerdict(
        status=status,
        census=census,
        witness=witness,
        min_nd_rel=min_nd,
        min_gap_rel=gap_rel,
        diagnosis=diagnosis,
    )


def index_lemma_check(census, n: int) -> bool:
    """True when a census with indices confined to {0, n} has exactly the
    forced form: one minimum and one maximum.

    Raises NotApplicableError for n < 2, degenerate points, or indices
    outside {0, n} (the hypotheses of the underlying lemma).
    """
    if n < 2:
        raise NotApplicableError("index lemma requires n >= 2")
    census = list(census)
    if any(p.index is None for p in census):
        raise NotApplicableError("census contains a degenerate point")
    if any(p.index not in (0, n) for p in census):
        raise NotApplicableError("census has an index outside {0, n}")
    indices = sorted(p.index for p in census)
    return len(census) == 2 and indices == [0, n]


@dataclass(frozen=True, eq=False)
class Prop4Report:
    """Executable check: nondegenerate critical points with indices in
    {0, n} (n >= 2) must force a stable function."""

    status: str  # "confirmed" | "contradiction" | "not_applicable"
    reason: str
    census: tuple[CriticalPoint, ...]
    verdict: StabilityVerdict | None = None

    @property
    def applicable(self) -> bool:
        return self.status != "not_applicable"


def prop4_check(f, cfg: StabilityConfig | None = None) -> Prop4Report:
    """Run the extreme-index stability implication on f (n >= 2 only)."""
    if f.dimension < 2:
        raise NotApplicableError("the implication fails for n = 1; refusing")
    cfg = cfg or StabilityConfig()
    try:
        census = tuple(critical_points(f, cfg.solver))
    except IncompleteCensusError as err:
        return Prop4Report(
            status="not_applicable",
            reason=f"degenerate census: {err}",
            census=tuple(err.census),
        )
    if any(p.index not in (0, f.dimension) for p in census):
        return Prop4Report(
            status="not_applicable",
            reason="census has an index outside {0, n}",
            census=census,
        )
    verdict = is_stable(f, cfg)
    status = "confirmed" if verdict.status == "stable" else "contradiction"
    reason = (
        "hypotheses hold and the function is stable"
        if status == "confirmed"
        else f"hypotheses hold but verdict is {verdict.status}"
    )
    return Prop4Report(status=status, reason=reason, census=census, verdict=verdict)
