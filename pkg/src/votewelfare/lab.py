"""Verification and simulation.

The feasibility oracle builds populations that reproduce an observed dataset
exactly, choosing latent ``u_b`` values anywhere the votes allow. Pushing
those choices to the edges realizes points arbitrarily close to the bound
endpoints, which checks sharpness without going through the bound formula.

The Monte Carlo helpers draw populations from a family, run every decision
rule on what the vote reveals, and score each rule against the true
utilitarian optimum.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from . import _random
from .bounds import WelfareBound, sharp_bound, sharp_bound_constant_a
from .decisions import (
    DEFAULT_SUPERMAJORITIES,
    MAJORITY,
    MINIMAX_REGRET,
    Policy,
    PriorSpec,
    _versus,
    decide_all,
)
from .errors import InfeasibleRecord, ValidationError
from .model import (
    FamilySpec,
    ObservedDataset,
    Population,
    SummaryStatistics,
    check_concordance,
    generate,
    observe,
    summarize,
    true_welfare,
)

DEFAULT_DELTA = 1e-9
# Closed-interval containment is checked with this much floating-point slack.
CONTAINMENT_TOL = 1e-12


def _check_feasible(obs: ObservedDataset) -> None:
    bad = (obs.votes_b & (obs.u_a >= 1.0)) | (~obs.votes_b & (obs.u_a <= 0.0))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise InfeasibleRecord(i, float(obs.u_a[i]), bool(obs.votes_b[i]))


def _strictly_above(u_b: np.ndarray, u_a: np.ndarray) -> np.ndarray:
    return np.minimum(np.maximum(u_b, np.nextafter(u_a, 2.0)), 1.0)


def _strictly_below(u_b: np.ndarray, u_a: np.ndarray) -> np.ndarray:
    return np.maximum(np.minimum(u_b, np.nextafter(u_a, -1.0)), 0.0)


def _witness(obs: ObservedDataset, u_b_if_b: np.ndarray, u_b_if_a: np.ndarray) -> Population:
    u_a = obs.u_a
    u_b = np.where(
        obs.votes_b, _strictly_above(u_b_if_b, u_a), _strictly_below(u_b_if_a, u_a)
    )
    return Population(u_a.copy(), u_b, obs.weight.copy())


def random_feasible_population(obs: ObservedDataset, seed) -> Population:
    """Random population consistent with ``obs``.

    B voters get u_b uniform on (u_a, 1), A voters uniform on [0, u_a).
    """
    _check_feasible(obs)
    draws = _random.open_uniform(_random.raw_draws(seed, (len(obs), 1)))[:, 0]
    u_a = obs.u_a
    return _witness(obs, u_a + (1.0 - u_a) * draws, u_a * draws)


@dataclass(frozen=True)
class FeasibleExtremes:
    inf_approx: float
    sup_approx: float
    delta: float
    bound: WelfareBound
    inf_population: Population = field(repr=False)
    sup_population: Population = field(repr=False)

    @property
    def lower_gap(self) -> float:
        return self.inf_approx - self.bound.lower

    @property
    def upper_gap(self) -> float:
        return self.bound.upper - self.sup_approx

    def to_dict(self) -> dict:
        return {
            "inf_approx": self.inf_approx,
            "sup_approx": self.sup_approx,
            "delta": self.delta,
            "lower": self.bound.lower,
            "upper": self.bound.upper,
            "lower_gap": self.lower_gap,
            "upper_gap": self.upper_gap,
        }


def feasible_extremes(obs: ObservedDataset, delta: float = DEFAULT_DELTA) -> FeasibleExtremes:
    """Populations consistent with ``obs`` whose E[u(B)] sit within ``delta`` of each endpoint.

    Low witness: B voters barely prefer B (u_b = u_a + delta*(1-u_a)), A voters
    have u_b = 0. High witness: B voters have u_b = 1, A voters
    u_b = (1-delta)*u_a.
    """
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta!r}")
    _check_feasible(obs)
    u_a = obs.u_a
    zeros, ones = np.zeros_like(u_a), np.ones_like(u_a)
    low = _witness(obs, u_a + delta * (1.0 - u_a), zeros)
    high = _witness(obs, ones, (1.0 - delta) * u_a)
    return FeasibleExtremes(
        inf_approx=true_welfare(low)[1],
        sup_approx=true_welfare(high)[1],
        delta=delta,
        bound=sharp_bound(summarize(obs)),
        inf_population=low,
        sup_population=high,
    )


def realized_regret(pop: Population, chosen) -> float:
    """Welfare lost by ``chosen`` relative to the better policy."""
    chosen = Policy(chosen)
    mean_a, mean_b = true_welfare(pop)
    achieved = mean_a if chosen is Policy.A else mean_b
    return max(mean_a, mean_b) - achieved


@dataclass(frozen=True)
class TrialOutcome:
    index: int
    mean_u_a: float
    mean_u_b: float
    stats: SummaryStatistics
    utilitarian: Policy
    chosen: dict[str, Policy]
    regret: dict[str, float]
    concordant: bool
    concordance_tie: bool


def _run_trial(spec: FamilySpec, seed, index: int, prior, thresholds) -> TrialOutcome:
    pop = generate(spec, _random.derive_seed(seed, index))
    mean_a, mean_b = true_welfare(pop)
    stats = summarize(observe(pop))
    report = decide_all(stats, prior, thresholds)
    best = max(mean_a, mean_b)
    chosen = {e.criterion: e.chosen for e in report}
    regret = {k: best - (mean_a if v is Policy.A else mean_b) for k, v in chosen.items()}
    conc = check_concordance(pop)
    return TrialOutcome(
        index=index,
        mean_u_a=mean_a,
        mean_u_b=mean_b,
        stats=stats,
        utilitarian=_versus(mean_b, mean_a)[0],
        chosen=chosen,
        regret=regret,
        concordant=conc.concordant,
        concordance_tie=conc.tie,
    )


def _run_chunk(args) -> list[TrialOutcome]:
    spec, seed, indices, prior, thresholds = args
    return [_run_trial(spec, seed, i, prior, thresholds) for i in indices]


def run_trials(
    spec: FamilySpec,
    trials: int,
    seed: int,
    prior=None,
    supermajority_thresholds: Iterable[float] = DEFAULT_SUPERMAJORITIES,
    workers: int = 1,
) -> Iterator[TrialOutcome]:
    """Yield one outcome per trial, in trial order, whatever ``workers`` is."""
    if isinstance(trials, bool) or int(trials) != trials or trials < 1:
        raise ValidationError(f"trials must be a positive integer, got {trials!r}")
    thresholds = tuple(supermajority_thresholds)
    if isinstance(prior, str):
        prior = PriorSpec.parse(prior)
    if workers <= 1:
        for i in range(trials):
            yield _run_trial(spec, seed, i, prior, thresholds)
        return
    chunk = max(1, math.ceil(trials / (workers * 4)))
    jobs = [
        (spec, seed, range(start, min(trials, start + chunk)), prior, thresholds)
        for start in range(0, trials, chunk)
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for outcomes in pool.map(_run_chunk, jobs):
            yield from outcomes


def _half_width(rate: float, trials: int) -> float:
    return 2.0 * math.sqrt(rate * (1.0 - rate) / trials)


@dataclass(frozen=True)
class DisagreementReport:
    family: str
    seed: int
    trials: int
    majority_vs_utilitarian_disagree_rate: float
    mmr_vs_utilitarian_disagree_rate: float
    majority_vs_mmr_disagree_rate: float
    concordance_rate: float
    mean_realized_regret: dict[str, float]
    prior: str | None = None

    RATE_FIELDS = (
        "majority_vs_utilitarian_disagree_rate",
        "mmr_vs_utilitarian_disagree_rate",
        "majority_vs_mmr_disagree_rate",
        "concordance_rate",
    )

    def half_widths(self) -> dict[str, float]:
        """Two-standard-error Monte Carlo half-widths for each rate."""
        return {name: _half_width(getattr(self, name), self.trials) for name in self.RATE_FIELDS}

    def to_dict(self) -> dict:
        out = {"family": self.family, "seed": self.seed, "trials": self.trials, "prior": self.prior}
        for name in self.RATE_FIELDS:
            out[name] = getattr(self, name)
        out["half_widths"] = self.half_widths()
        out["mean_realized_regret"] = dict(self.mean_realized_regret)
        return out

    def csv_columns(self) -> tuple[list[str], list]:
        """Header and values for a one-row CSV export."""
        kind, _, rest = self.family.partition(":")
        params = rest.rpartition(":")[0]
        header = ["family", "params", "trials", "seed", *self.RATE_FIELDS]
        row = [kind, params, self.trials, self.seed, *(getattr(self, n) for n in self.RATE_FIELDS)]
        for name, value in self.mean_realized_regret.items():
            header.append(f"mean_regret[{name}]")
            row.append(value)
        for name, value in self.half_widths().items():
            header.append(f"half_width[{name}]")
            row.append(value)
        return header, row


def monte_carlo_disagreement(
    spec: FamilySpec,
    trials: int,
    seed: int,
    prior=None,
    supermajority_thresholds: Iterable[float] = DEFAULT_SUPERMAJORITIES,
    workers: int = 1,
) -> DisagreementReport:
    """How often majority rule, minimax regret and the utilitarian optimum disagree."""
    n = maj_util = mmr_util = maj_mmr = concordant = 0
    regrets: dict[str, list[float]] = {}
    for out in run_trials(spec, trials, seed, prior, supermajority_thresholds, workers):
        n += 1
        maj, mmr = out.chosen[MAJORITY], out.chosen[MINIMAX_REGRET]
        maj_util += maj is not out.utilitarian
        mmr_util += mmr is not out.utilitarian
        maj_mmr += maj is not mmr
        concordant += out.concordant
        for name, value in out.regret.items():
            regrets.setdefault(name, []).append(value)
    if isinstance(prior, str):
        prior = PriorSpec.parse(prior)
    return DisagreementReport(
        family=spec.describe(),
        seed=int(seed),
        trials=n,
        majority_vs_utilitarian_disagree_rate=maj_util / n,
        mmr_vs_utilitarian_disagree_rate=mmr_util / n,
        majority_vs_mmr_disagree_rate=maj_mmr / n,
        concordance_rate=concordant / n,
        mean_realized_regret={k: math.fsum(v) / n for k, v in regrets.items()},
        prior=None if prior is None else str(prior),
    )


@dataclass(frozen=True)
class ContainmentSummary:
    family: str
    seed: int
    trials: int
    violations: int
    truth_violations: int
    status_quo_violations: int
    min_margin_truth: float
    min_margin_status_quo: float
    max_excess: float
    trivial_bounds: int
    constant_a_max_deviation: float | None = None

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "seed": self.seed,
            "trials": self.trials,
            "violations": self.violations,
            "truth_violations": self.truth_violations,
            "status_quo_violations": self.status_quo_violations,
            "min_margin_truth": self.min_margin_truth,
            "min_margin_status_quo": self.min_margin_status_quo,
            "max_excess": self.max_excess,
            "trivial_bounds": self.trivial_bounds,
            "constant_a_max_deviation": self.constant_a_max_deviation,
            "passed": self.passed,
            "summary": f"{self.violations} violations",
        }


def verify_bound_containment(
    spec: FamilySpec, trials: int, seed: int, tol: float = CONTAINMENT_TOL
) -> ContainmentSummary:
    """Check that both E[u(B)] and E[u(A)] fall inside the bound on every trial.

    Margins are distances from the value to the nearer endpoint (negative
    means outside); ``max_excess`` is the largest distance outside the bound.
    """
    if isinstance(trials, bool) or int(trials) != trials or trials < 1:
        raise ValidationError(f"trials must be a positive integer, got {trials!r}")
    violations = truth_bad = sq_bad = trivial = 0
    min_truth = min_sq = math.inf
    max_excess = 0.0
    const_dev = 0.0 if spec.kind == "constant-status-quo" else None
    for i in range(trials):
        pop = generate(spec, _random.derive_seed(seed, i))
        mean_a, mean_b = true_welfare(pop)
        stats = summarize(observe(pop))
        bound = sharp_bound(stats)
        m_truth = min(mean_b - bound.lower, bound.upper - mean_b)
        m_sq = min(mean_a - bound.lower, bound.upper - mean_a)
        min_truth, min_sq = min(min_truth, m_truth), min(min_sq, m_sq)
        max_excess = max(max_excess, -m_truth, -m_sq)
        bad_truth, bad_sq = m_truth < -tol, m_sq < -tol
        truth_bad += bad_truth
        sq_bad += bad_sq
        violations += bad_truth or bad_sq
        trivial += bound.trivial
        if const_dev is not None:
            ref = sharp_bound_constant_a(spec.params["level"], stats.vote_share_b)
            const_dev = max(const_dev, abs(ref.lower - bound.lower), abs(ref.upper - bound.upper))
    return ContainmentSummary(
        family=spec.describe(),
        seed=int(seed),
        trials=int(trials),
        violations=violations,
        truth_violations=truth_bad,
        status_quo_violations=sq_bad,
        min_margin_truth=min_truth,
        min_margin_status_quo=min_sq,
        max_excess=max_excess,
        trivial_bounds=trivial,
        constant_a_max_deviation=const_dev,
    )
