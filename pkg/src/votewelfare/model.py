"""Finite weighted populations, the observable voting dataset, and summaries.

A population is a finite list of people, each with a status-quo utility
``u_a``, a proposal utility ``u_b`` (both in [0, 1]) and a positive weight.
Voting reveals only ``u_a`` and whether ``u_b > u_a``; that pair is the
:class:`ObservedDataset`. Everything downstream of the bound works from it
or from its :class:`SummaryStatistics`.

Sums go through :func:`math.fsum`, so weighted means are correctly rounded
and do not depend on the order of profiles.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _random
from .errors import (
    EmptyPopulation,
    InconsistentSummary,
    InvalidFamilyParameter,
    TieInStrictMode,
    UtilityOutOfRange,
    ValidationError,
)

log = logging.getLogger(__name__)

TIE_POLICIES = ("strict", "status-quo-tiebreak")

# Total-expectation consistency for summaries supplied from outside the library.
SUMMARY_TOL = 1e-6
NORM_TOL = 1e-12
# Slack when comparing normalized probabilities against 1/2.
MEDIAN_TOL = 1e-12


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise UtilityOutOfRange(f"{name}={value!r} is outside [0, 1]")
    return value


def _check_weight(value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ValidationError(f"weight={value!r} must be positive and finite")
    return value


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _normalize(weight: np.ndarray) -> np.ndarray:
    # Weights already summing to 1 within NORM_TOL pass through untouched, so
    # normalization is idempotent and observe() preserves weights bit for bit.
    total = math.fsum(weight.tolist())
    if not math.isfinite(total) or total <= 0.0:
        raise ValidationError("total weight must be positive and finite")
    if abs(total - 1.0) <= NORM_TOL:
        return weight
    return weight / total


@dataclass(frozen=True)
class UtilityProfile:
    u_a: float
    u_b: float
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "u_a", _check_unit("u_a", self.u_a))
        object.__setattr__(self, "u_b", _check_unit("u_b", self.u_b))
        object.__setattr__(self, "weight", _check_weight(self.weight))


@dataclass(frozen=True)
class ObservedRecord:
    u_a: float
    votes_b: bool
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "u_a", _check_unit("u_a", self.u_a))
        object.__setattr__(self, "votes_b", bool(self.votes_b))
        object.__setattr__(self, "weight", _check_weight(self.weight))


def _validate_arrays(u_a, others: dict[str, np.ndarray], weight) -> tuple:
    u_a = np.array(u_a, dtype=np.float64).reshape(-1)
    if u_a.size == 0:
        raise EmptyPopulation("population has no profiles")
    if weight is None:
        weight = np.ones_like(u_a)
    weight = np.array(weight, dtype=np.float64).reshape(-1)
    if weight.shape != u_a.shape:
        raise ValidationError("u_a and weight must have the same length")
    for name, arr in {"u_a": u_a, **others}.items():
        if arr.dtype == np.float64:
            bad = ~np.isfinite(arr) | (arr < 0.0) | (arr > 1.0)
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                exc = UtilityOutOfRange(f"profile {i}: {name}={arr[i]!r} is outside [0, 1]")
                exc.index = i
                raise exc
    bad = ~np.isfinite(weight) | (weight <= 0.0)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        exc = ValidationError(f"profile {i}: weight={weight[i]!r} must be positive")
        exc.index = i
        raise exc
    return u_a, weight


class Population:
    """Immutable finite population with normalized weights.

    Build with :func:`make_population` or :meth:`from_arrays`. Under the
    ``status-quo-tiebreak`` policy, exact ties are kept and ``has_ties`` is set;
    :func:`observe` then records them as A votes.
    """

    __slots__ = ("u_a", "u_b", "weight", "tie_policy", "has_ties")

    def __init__(self, u_a, u_b, weight=None, tie_policy: str = "strict"):
        if tie_policy not in TIE_POLICIES:
            raise ValidationError(f"unknown tie policy {tie_policy!r}")
        u_b = np.array(u_b, dtype=np.float64).reshape(-1)
        u_a, weight = _validate_arrays(u_a, {"u_b": u_b}, weight)
        if u_b.shape != u_a.shape:
            raise ValidationError("u_a and u_b must have the same length")
        ties = u_a == u_b
        if ties.any() and tie_policy == "strict":
            i = int(np.flatnonzero(ties)[0])
            raise TieInStrictMode(i, float(u_a[i]))
        if ties.any():
            log.warning("%d tied profile(s) will be counted as A votes", int(ties.sum()))
        set_ = object.__setattr__
        set_(self, "u_a", _frozen(u_a))
        set_(self, "u_b", _frozen(u_b))
        set_(self, "weight", _frozen(_normalize(weight)))
        set_(self, "tie_policy", tie_policy)
        set_(self, "has_ties", bool(ties.any()))

    @classmethod
    def from_arrays(cls, u_a, u_b, weight=None, tie_policy: str = "strict") -> "Population":
        return cls(u_a, u_b, weight, tie_policy)

    def __setattr__(self, name, value):
        raise AttributeError("Population is immutable")

    def __len__(self) -> int:
        return int(self.u_a.size)

    def __repr__(self) -> str:
        return f"Population(n={len(self)}, tie_policy={self.tie_policy!r}, has_ties={self.has_ties})"

    @property
    def normalized(self) -> bool:
        return True

    @property
    def profiles(self) -> list[UtilityProfile]:
        return [
            UtilityProfile(a, b, w)
            for a, b, w in zip(self.u_a.tolist(), self.u_b.tolist(), self.weight.tolist())
        ]

    def identical_to(self, other: "Population") -> bool:
        """Bit-for-bit equality of all arrays and flags."""
        return (
            self.tie_policy == other.tie_policy
            and self.u_a.tobytes() == other.u_a.tobytes()
            and self.u_b.tobytes() == other.u_b.tobytes()
            and self.weight.tobytes() == other.weight.tobytes()
        )


class ObservedDataset:
    """The identifiable object: status-quo utility and vote, with weights."""

    __slots__ = ("u_a", "votes_b", "weight")

    def __init__(self, u_a, votes_b, weight=None):
        votes_b = np.array(votes_b, dtype=bool).reshape(-1)
        u_a, weight = _validate_arrays(u_a, {}, weight)
        if votes_b.shape != u_a.shape:
            raise ValidationError("u_a and votes_b must have the same length")
        set_ = object.__setattr__
        set_(self, "u_a", _frozen(u_a))
        set_(self, "votes_b", _frozen(votes_b))
        set_(self, "weight", _frozen(_normalize(weight)))

    @classmethod
    def from_records(cls, records: Iterable[ObservedRecord]) -> "ObservedDataset":
        records = list(records)
        if not records:
            raise EmptyPopulation("dataset has no records")
        return cls(
            [r.u_a for r in records], [r.votes_b for r in records], [r.weight for r in records]
        )

    def __setattr__(self, name, value):
        raise AttributeError("ObservedDataset is immutable")

    def __len__(self) -> int:
        return int(self.u_a.size)

    def __repr__(self) -> str:
        return f"ObservedDataset(n={len(self)})"

    @property
    def records(self) -> list[ObservedRecord]:
        return [
            ObservedRecord(a, v, w)
            for a, v, w in zip(self.u_a.tolist(), self.votes_b.tolist(), self.weight.tolist())
        ]

    def identical_to(self, other: "ObservedDataset") -> bool:
        return (
            self.u_a.tobytes() == other.u_a.tobytes()
            and self.votes_b.tobytes() == other.votes_b.tobytes()
            and self.weight.tobytes() == other.weight.tobytes()
        )


@dataclass(frozen=True)
class SummaryStatistics:
    """E[u(A)], the B vote share, and E[u(A)] within each voting bloc.

    When a bloc is empty its conditional mean is stored as 0; every formula
    multiplies it by the bloc's zero mass. The constructor enforces the law of
    total expectation to ``tol`` (1e-6 by default, for external input).
    """

    mean_u_a: float
    vote_share_b: float
    cond_mean_a_given_b: float
    cond_mean_a_given_a: float
    tol: float = field(default=SUMMARY_TOL, repr=False, compare=False)

    def __post_init__(self):
        for name in ("mean_u_a", "vote_share_b", "cond_mean_a_given_b", "cond_mean_a_given_a"):
            object.__setattr__(self, name, _check_unit(name, getattr(self, name)))
        p = self.vote_share_b
        if p == 0.0:
            object.__setattr__(self, "cond_mean_a_given_b", 0.0)
        if p == 1.0:
            object.__setattr__(self, "cond_mean_a_given_a", 0.0)
        gap = abs(self.mean_u_a - self.total_expectation())
        if gap > self.tol:
            raise InconsistentSummary(
                f"mean_u_a={self.mean_u_a!r} differs from the vote-weighted conditional "
                f"means ({self.total_expectation()!r}) by {gap:.3g} > {self.tol:g}"
            )

    @classmethod
    def constant_status_quo(cls, level: float, vote_share_b: float) -> "SummaryStatistics":
        """Summary of a population where everyone has u_a == level."""
        level = _check_unit("level", level)
        return cls(level, vote_share_b, level, level)

    @property
    def vote_share_a(self) -> float:
        return 1.0 - self.vote_share_b

    def total_expectation(self) -> float:
        p = self.vote_share_b
        return self.cond_mean_a_given_b * p + self.cond_mean_a_given_a * (1.0 - p)

    def to_dict(self) -> dict:
        return {
            "mean_u_a": self.mean_u_a,
            "vote_share_b": self.vote_share_b,
            "cond_mean_a_given_b": self.cond_mean_a_given_b,
            "cond_mean_a_given_a": self.cond_mean_a_given_a,
        }


@dataclass(frozen=True)
class ConcordanceReport:
    median_diff: float
    welfare_diff: float
    concordant: bool
    tie: bool
    median_convention: str = "lower"

    def to_dict(self) -> dict:
        return {
            "median_diff": self.median_diff,
            "welfare_diff": self.welfare_diff,
            "concordant": self.concordant,
            "tie": self.tie,
            "median_convention": self.median_convention,
        }


# Positional parameter names per family, used by FamilySpec.parse.
FAMILY_PARAMS: dict[str, tuple[str, ...]] = {
    "independent-uniform": (),
    "binary-proposal": ("success",),
    "constant-status-quo": ("level",),
    "degenerate-binary-status-quo": ("prob_one",),
    "two-block": ("share", "a1", "b1", "a2", "b2"),
}
_FAMILY_DEFAULTS = {
    "binary-proposal": {"success": 0.5},
    "constant-status-quo": {"level": 0.5},
    "degenerate-binary-status-quo": {"prob_one": 0.5},
    "two-block": {"share": 0.6, "a1": 0.5, "b1": 0.6, "a2": 0.9, "b2": 0.0},
}


@dataclass(frozen=True)
class FamilySpec:
    """A named generator family with its parameters and population size.

    Every parameter is a probability or a utility, so all must lie in [0, 1].
    Missing parameters take the family defaults.
    """

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    population_size: int = 1000

    def __post_init__(self):
        if self.kind not in FAMILY_PARAMS:
            raise InvalidFamilyParameter(
                f"unknown family {self.kind!r}; expected one of {sorted(FAMILY_PARAMS)}"
            )
        allowed = FAMILY_PARAMS[self.kind]
        merged = dict(_FAMILY_DEFAULTS.get(self.kind, {}))
        for key, value in dict(self.params).items():
            if key not in allowed:
                raise InvalidFamilyParameter(f"{self.kind} has no parameter {key!r}")
            value = float(value)
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                raise InvalidFamilyParameter(f"{self.kind}.{key}={value!r} is outside [0, 1]")
            merged[key] = value
        if self.kind == "two-block":
            for a, b in (("a1", "b1"), ("a2", "b2")):
                if merged[a] == merged[b]:
                    raise InvalidFamilyParameter(
                        f"two-block {a} == {b} would create a tied block"
                    )
        n = self.population_size
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise InvalidFamilyParameter(f"population_size must be an integer >= 1, got {n!r}")
        object.__setattr__(self, "params", merged)
        object.__setattr__(self, "population_size", int(n))

    @classmethod
    def parse(cls, text: str) -> "FamilySpec":
        """Parse ``kind:p1,p2,...:n``; the params and size parts may be empty."""
        parts = text.strip().split(":")
        if not 1 <= len(parts) <= 3 or not parts[0]:
            raise InvalidFamilyParameter(f"cannot parse family {text!r}; expected kind:params:n")
        kind = parts[0]
        if kind not in FAMILY_PARAMS:
            raise InvalidFamilyParameter(f"unknown family {kind!r}")
        raw = [p for p in parts[1].split(",") if p.strip()] if len(parts) > 1 else []
        names = FAMILY_PARAMS[kind]
        if len(raw) > len(names):
            raise InvalidFamilyParameter(
                f"{kind} takes at most {len(names)} parameter(s) {names}, got {len(raw)}"
            )
        try:
            params = {name: float(v) for name, v in zip(names, raw)}
            size = int(parts[2]) if len(parts) > 2 and parts[2].strip() else 1000
        except ValueError as exc:
            raise InvalidFamilyParameter(f"cannot parse family {text!r}: {exc}") from None
        return cls(kind, params, size)

    def describe(self) -> str:
        names = FAMILY_PARAMS[self.kind]
        values = ",".join(repr(self.params[k]) for k in names)
        return f"{self.kind}:{values}:{self.population_size}"


def make_population(
    profiles: Sequence[UtilityProfile], tie_policy: str = "strict"
) -> Population:
    profiles = list(profiles)
    if not profiles:
        raise EmptyPopulation("population has no profiles")
    return Population(
        [p.u_a for p in profiles],
        [p.u_b for p in profiles],
        [p.weight for p in profiles],
        tie_policy=tie_policy,
    )


def generate(spec: FamilySpec, seed) -> Population:
    """Draw an equally weighted population from ``spec``.

    Each profile consumes two 64-bit words from the seeded stream, so profile
    ``i`` is the same for every population size.
    """
    n = spec.population_size
    params = spec.params
    if spec.kind == "two-block":
        n_first = int(round(params["share"] * n))
        first = np.arange(n) < n_first
        u_a = np.where(first, params["a1"], params["a2"])
        u_b = np.where(first, params["b1"], params["b2"])
        return Population(u_a, u_b)

    uniforms = _random.open_uniform(_random.raw_draws(seed, (n, 2)))
    draw_a, draw_b = uniforms[:, 0], uniforms[:, 1]
    if spec.kind == "independent-uniform":
        u_a, u_b = draw_a, draw_b
    elif spec.kind == "binary-proposal":
        u_a = draw_a
        u_b = (draw_b < params["success"]).astype(np.float64)
    elif spec.kind == "constant-status-quo":
        u_a = np.full(n, params["level"])
        u_b = draw_b
    elif spec.kind == "degenerate-binary-status-quo":
        u_a = (draw_a < params["prob_one"]).astype(np.float64)
        u_b = draw_b
    else:  # pragma: no cover - FamilySpec rejects unknown kinds
        raise InvalidFamilyParameter(spec.kind)
    return Population(u_a, u_b)


def observe(pop: Population) -> ObservedDataset:
    """Reduce a population to what a compulsory utility-maximizing vote reveals."""
    ties = pop.u_a == pop.u_b
    if ties.any() and pop.tie_policy == "strict":
        i = int(np.flatnonzero(ties)[0])
        raise TieInStrictMode(i, float(pop.u_a[i]))
    return ObservedDataset(pop.u_a.copy(), pop.u_b > pop.u_a, pop.weight.copy())


def _clip_unit(x: float) -> float:
    return min(1.0, max(0.0, x))


def summarize(obs: ObservedDataset) -> SummaryStatistics:
    w = obs.weight.tolist()
    ua = obs.u_a.tolist()
    votes = obs.votes_b.tolist()
    mass_b = math.fsum(wi for wi, v in zip(w, votes) if v)
    mass_a = math.fsum(wi for wi, v in zip(w, votes) if not v)
    sum_b = math.fsum(wi * ai for wi, ai, v in zip(w, ua, votes) if v)
    sum_a = math.fsum(wi * ai for wi, ai, v in zip(w, ua, votes) if not v)
    p = _clip_unit(mass_b)
    return SummaryStatistics(
        mean_u_a=_clip_unit(math.fsum(wi * ai for wi, ai in zip(w, ua))),
        vote_share_b=p,
        cond_mean_a_given_b=_clip_unit(sum_b / mass_b) if mass_b > 0.0 else 0.0,
        cond_mean_a_given_a=_clip_unit(sum_a / mass_a) if mass_a > 0.0 else 0.0,
    )


def true_welfare(pop: Population) -> tuple[float, float]:
    """Return (E[u(A)], E[u(B)]); needs the latent u_b, so only works on populations."""
    w = pop.weight.tolist()
    mean_a = math.fsum(wi * a for wi, a in zip(w, pop.u_a.tolist()))
    mean_b = math.fsum(wi * b for wi, b in zip(w, pop.u_b.tolist()))
    return mean_a, mean_b


def weighted_median(values: Sequence[float], weights: Sequence[float]) -> float:
    """Lower weighted median: smallest value whose cumulative weight reaches half."""
    values = np.asarray(values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if values.size == 0:
        raise EmptyPopulation("median of an empty sample")
    order = np.argsort(values, kind="stable")
    total = math.fsum(weights.tolist())
    cum = np.cumsum(weights[order])
    k = int(np.searchsorted(cum, 0.5 * total - MEDIAN_TOL, side="left"))
    return float(values[order[min(k, values.size - 1)]])


def _sign(x: float, atol: float) -> int:
    if abs(x) <= atol:
        return 0
    return 1 if x > 0 else -1


def check_concordance(pop: Population, atol: float = 1e-12) -> ConcordanceReport:
    """Compare the sign of Med[u(B) - u(A)] with the sign of E[u(B)] - E[u(A)].

    A zero sign on either side is flagged with ``tie=True``.
    """
    median_diff = weighted_median(pop.u_b - pop.u_a, pop.weight)
    mean_a, mean_b = true_welfare(pop)
    welfare_diff = mean_b - mean_a
    s_med, s_wel = _sign(median_diff, atol), _sign(welfare_diff, atol)
    return ConcordanceReport(
        median_diff=median_diff,
        welfare_diff=welfare_diff,
        concordant=s_med == s_wel,
        tie=s_med == 0 or s_wel == 0,
    )
