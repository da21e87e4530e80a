"""Policy choice between the status quo A and the proposal B.

The planner knows E[u(A)] and the identified interval for E[u(B)]. Criteria:

* Bayes: compare E[u(A)] with the mean of a prior on E[u(B)] supported
  inside the interval. With the midpoint as prior mean this reduces to
  comparing the vote share with E[u(A)].
* Maximin: the interval's lower end never exceeds E[u(A)], so A.
* Minimax regret: the smaller of the two worst-case regrets. Coincides with
  midpoint Bayes.
* Majority and supermajority: compare the vote share with a fixed threshold.

Exact indifference always resolves to A with ``tie=True``. Differences within
``TIE_TOL`` count as indifference so that algebraically equal quantities
computed along different floating-point paths are treated alike.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from scipy import integrate, stats as sps

from .bounds import WelfareBound, midpoint_welfare, sharp_bound
from .errors import InvariantViolation, PriorOutsideBound, ThresholdOutOfRange, ValidationError
from .model import SummaryStatistics

TIE_TOL = 1e-12
PRIOR_SUPPORT_TOL = 1e-12
BETA_QUAD_ATOL = 1e-10
DEFAULT_SUPERMAJORITIES = (3 / 5, 2 / 3)

MAJORITY = "majority"
MAXIMIN = "maximin"
MINIMAX_REGRET = "minimax-regret"
MIDPOINT_BAYES = "midpoint-bayes"
BAYES = "bayes"


class Policy(str, enum.Enum):
    A = "A"
    B = "B"

    def __str__(self) -> str:
        return self.value


PRIOR_KINDS = ("midpoint-point-mass", "point-mass", "uniform-on-bound", "truncated-beta")
_PRIOR_ALIASES = {"midpoint": "midpoint-point-mass", "uniform": "uniform-on-bound", "beta": "truncated-beta"}
_PRIOR_ARITY = {"midpoint-point-mass": 0, "point-mass": 1, "uniform-on-bound": 0, "truncated-beta": 2}


@dataclass(frozen=True)
class PriorSpec:
    """A prior family and its parameters, not yet tied to a bound."""

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        kind = _PRIOR_ALIASES.get(self.kind, self.kind)
        if kind not in PRIOR_KINDS:
            raise ValidationError(f"unknown prior kind {self.kind!r}; expected one of {PRIOR_KINDS}")
        params = tuple(float(x) for x in self.params)
        if len(params) != _PRIOR_ARITY[kind]:
            raise ValidationError(f"prior {kind} takes {_PRIOR_ARITY[kind]} parameter(s), got {len(params)}")
        if any(not math.isfinite(x) for x in params):
            raise ValidationError(f"prior parameters must be finite, got {params}")
        if kind == "truncated-beta" and min(params) <= 0.0:
            raise ValidationError(f"beta shape parameters must be positive, got {params}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", params)

    @classmethod
    def parse(cls, text: str) -> "PriorSpec":
        """Parse ``kind`` or ``kind:x1,x2``, e.g. ``point-mass:0.85`` or ``beta:2,3``."""
        kind, _, rest = text.strip().partition(":")
        try:
            params = tuple(float(x) for x in rest.split(",") if x.strip())
        except ValueError:
            raise ValidationError(f"cannot parse prior {text!r}") from None
        return cls(kind, params)

    def bind(self, bound: WelfareBound) -> "Prior":
        return make_prior(self.kind, self.params, bound)

    def __str__(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}:{','.join(repr(x) for x in self.params)}"


@dataclass(frozen=True)
class Prior:
    """Subjective distribution over E[u(B)], supported on [support_lo, support_hi]."""

    kind: str
    params: tuple[float, ...]
    support_lo: float
    support_hi: float
    mean: float


def _truncated_beta_mean(a: float, b: float, lo: float, hi: float) -> float:
    if hi - lo <= 0.0:
        return lo
    dist = sps.beta(a, b)
    mass, _ = integrate.quad(dist.pdf, lo, hi, epsabs=BETA_QUAD_ATOL, epsrel=0.0, limit=200)
    first, _ = integrate.quad(lambda x: x * dist.pdf(x), lo, hi, epsabs=BETA_QUAD_ATOL, epsrel=0.0, limit=200)
    if mass <= 0.0:
        raise ValidationError(f"beta({a}, {b}) has no mass on [{lo}, {hi}]")
    return min(hi, max(lo, first / mass))


def make_prior(kind: str, params: Sequence[float], bound: WelfareBound) -> Prior:
    """Build a prior whose support lies inside ``bound``; reject anything wider."""
    spec = PriorSpec(kind, tuple(params))
    lo, hi = bound.lower, bound.upper
    if spec.kind == "midpoint-point-mass":
        support = (bound.midpoint, bound.midpoint)
        mean = bound.midpoint
    elif spec.kind == "point-mass":
        (x,) = spec.params
        support = (x, x)
        mean = x
    elif spec.kind == "uniform-on-bound":
        support = (lo, hi)
        mean = bound.midpoint
    else:
        a, b = spec.params
        support = (lo, hi)
        mean = _truncated_beta_mean(a, b, lo, hi)
    if support[0] < lo - PRIOR_SUPPORT_TOL or support[1] > hi + PRIOR_SUPPORT_TOL:
        raise PriorOutsideBound(
            f"prior support [{support[0]}, {support[1]}] is not inside the bound [{lo}, {hi}]"
        )
    return Prior(spec.kind, spec.params, support[0], support[1], mean)


@dataclass(frozen=True)
class RegretPair:
    regret_a: float
    regret_b: float


@dataclass(frozen=True)
class DecisionEntry:
    criterion: str
    chosen: Policy
    tie: bool
    threshold_used: float
    regrets: RegretPair | None = None
    prior_mean: float | None = None

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "chosen": self.chosen.value,
            "tie": self.tie,
            "threshold_used": self.threshold_used,
            "regret_a": None if self.regrets is None else self.regrets.regret_a,
            "regret_b": None if self.regrets is None else self.regrets.regret_b,
            "prior_mean": self.prior_mean,
        }


@dataclass(frozen=True)
class DecisionReport:
    entries: tuple[DecisionEntry, ...] = field(default_factory=tuple)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, criterion: str) -> DecisionEntry:
        for entry in self.entries:
            if entry.criterion == criterion:
                return entry
        raise KeyError(criterion)

    def criteria(self) -> list[str]:
        return [e.criterion for e in self.entries]

    def to_list(self) -> list[dict]:
        return [e.to_dict() for e in self.entries]


def _versus(value: float, threshold: float) -> tuple[Policy, bool]:
    """B iff value exceeds threshold by more than TIE_TOL; near-equality is an A tie."""
    diff = value - threshold
    if abs(diff) <= TIE_TOL:
        return Policy.A, True
    return (Policy.B, False) if diff > 0 else (Policy.A, False)


def _coerce_prior(prior, stats: SummaryStatistics) -> Prior | None:
    if prior is None or isinstance(prior, Prior):
        return prior
    if isinstance(prior, str):
        prior = PriorSpec.parse(prior)
    if isinstance(prior, PriorSpec):
        return prior.bind(sharp_bound(stats))
    raise TypeError(f"cannot use {type(prior).__name__} as a prior")


def bayes_decide(stats: SummaryStatistics, prior) -> DecisionEntry:
    bound = sharp_bound(stats)
    prior = _coerce_prior(prior, stats)
    if prior.support_lo < bound.lower - PRIOR_SUPPORT_TOL or prior.support_hi > bound.upper + PRIOR_SUPPORT_TOL:
        raise PriorOutsideBound(
            f"prior support [{prior.support_lo}, {prior.support_hi}] is not inside "
            f"the bound [{bound.lower}, {bound.upper}]"
        )
    chosen, tie = _versus(prior.mean, stats.mean_u_a)
    return DecisionEntry(BAYES, chosen, tie, stats.mean_u_a, prior_mean=prior.mean)


def midpoint_bayes_decide(stats: SummaryStatistics) -> DecisionEntry:
    """Bayes with prior mean at the bound midpoint: vote share against E[u(A)]."""
    chosen, tie = _versus(stats.vote_share_b, stats.mean_u_a)
    return DecisionEntry(
        MIDPOINT_BAYES, chosen, tie, stats.mean_u_a, prior_mean=midpoint_welfare(stats)
    )


def maximin_decide(stats: SummaryStatistics) -> DecisionEntry:
    lower = sharp_bound(stats).lower
    # B's worst case is the lower end, which never exceeds E[u(A)].
    tie = abs(lower - stats.mean_u_a) <= TIE_TOL
    return DecisionEntry(MAXIMIN, Policy.A, tie, lower)


def regret_forms(stats: SummaryStatistics) -> dict[str, float]:
    """Both algebraic forms of each maximum regret.

    ``a_via_upper`` / ``b_via_lower`` measure the distance from E[u(A)] to
    the bound endpoints; ``a_direct`` / ``b_direct`` are the simplified forms.
    They agree whenever ``stats`` obeys the law of total expectation.
    """
    p = stats.vote_share_b
    bound = sharp_bound(stats)
    return {
        "a_via_upper": bound.upper - stats.mean_u_a,
        "a_direct": p - stats.cond_mean_a_given_b * p,
        "b_via_lower": stats.mean_u_a - bound.lower,
        "b_direct": stats.cond_mean_a_given_a * (1.0 - p),
    }


def max_regret(stats: SummaryStatistics) -> RegretPair:
    p = stats.vote_share_b
    return RegretPair(
        regret_a=max(0.0, p - stats.cond_mean_a_given_b * p),
        regret_b=max(0.0, stats.cond_mean_a_given_a * (1.0 - p)),
    )


def minimax_regret_decide(stats: SummaryStatistics) -> DecisionEntry:
    regrets = max_regret(stats)
    # Choosing B is better iff A's worst regret is larger.
    chosen, tie = _versus(regrets.regret_a, regrets.regret_b)
    return DecisionEntry(MINIMAX_REGRET, chosen, tie, stats.mean_u_a, regrets=regrets)


def majority_decide(stats: SummaryStatistics) -> DecisionEntry:
    chosen, tie = _versus(stats.vote_share_b, 0.5)
    return DecisionEntry(MAJORITY, chosen, tie, 0.5)


def supermajority_name(threshold: float) -> str:
    return f"supermajority:{threshold:.6g}"


def supermajority_decide(stats: SummaryStatistics, threshold: float) -> DecisionEntry:
    threshold = float(threshold)
    if not 0.5 <= threshold <= 1.0:
        raise ThresholdOutOfRange(f"supermajority threshold {threshold!r} is outside [1/2, 1]")
    chosen, tie = _versus(stats.vote_share_b, threshold)
    return DecisionEntry(supermajority_name(threshold), chosen, tie, threshold)


def _check_report(report: DecisionReport) -> None:
    maximin = report[MAXIMIN]
    if maximin.chosen is not Policy.A:
        raise InvariantViolation("maximin chose B")
    mmr, mid = report[MINIMAX_REGRET], report[MIDPOINT_BAYES]
    if (mmr.chosen, mmr.tie) != (mid.chosen, mid.tie):
        raise InvariantViolation(
            f"minimax regret ({mmr.chosen}, tie={mmr.tie}) disagrees with midpoint Bayes "
            f"({mid.chosen}, tie={mid.tie})"
        )


def decide_all(
    stats: SummaryStatistics,
    prior=None,
    supermajority_thresholds: Iterable[float] = DEFAULT_SUPERMAJORITIES,
) -> DecisionReport:
    """Run every criterion on ``stats``.

    ``prior`` may be a bound :class:`Prior`, a :class:`PriorSpec`, a spec
    string such as ``"point-mass:0.85"``, or None to skip the Bayes entry.
    """
    entries = [
        majority_decide(stats),
        *(supermajority_decide(stats, t) for t in supermajority_thresholds),
        minimax_regret_decide(stats),
        midpoint_bayes_decide(stats),
        maximin_decide(stats),
    ]
    prior = _coerce_prior(prior, stats)
    if prior is not None:
        entries.append(bayes_decide(stats, prior))
    report = DecisionReport(tuple(entries))
    _check_report(report)
    return report
