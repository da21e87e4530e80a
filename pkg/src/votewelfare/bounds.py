"""Identified interval for welfare under the proposal.

Given the vote share ``p`` and the mean status-quo utility in each voting
bloc, E[u(B)] is confined to

    cond_mean_a_given_b * p  <  E[u(B)]  <  p + cond_mean_a_given_a * (1 - p)

because a B voter's u_b lies in (u_a, 1] and an A voter's in [0, u_a). The
inequalities are strict, but the endpoints are the infimum and supremum over
all populations consistent with the data, so they are stored as numbers with
``endpoints_open=True``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .model import SummaryStatistics, _check_unit

_MID_TOL = 1e-12


@dataclass(frozen=True)
class WelfareBound:
    lower: float
    upper: float
    midpoint: float
    endpoints_open: bool = True
    trivial: bool = False

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise ValidationError(
                f"invalid bound: need 0 <= lower <= upper <= 1, got [{self.lower}, {self.upper}]"
            )
        if abs(self.midpoint - 0.5 * (self.lower + self.upper)) > _MID_TOL:
            raise ValidationError("midpoint does not bisect the bound")

    @classmethod
    def from_endpoints(cls, lower: float, upper: float) -> "WelfareBound":
        lower = min(1.0, max(0.0, lower))
        upper = min(1.0, max(lower, upper))
        return cls(
            lower=lower,
            upper=upper,
            midpoint=0.5 * (lower + upper),
            endpoints_open=True,
            trivial=lower == 0.0 and upper == 1.0,
        )

    def contains(self, value: float, tol: float = 0.0) -> bool:
        """Closed-interval membership, widened by ``tol`` on both sides."""
        return self.lower - tol <= value <= self.upper + tol

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "midpoint": self.midpoint,
            "trivial": self.trivial,
            "endpoints_open": self.endpoints_open,
        }


def sharp_bound(stats: SummaryStatistics) -> WelfareBound:
    p = stats.vote_share_b
    lower = stats.cond_mean_a_given_b * p
    upper = p + stats.cond_mean_a_given_a * (1.0 - p)
    return WelfareBound.from_endpoints(lower, upper)


def sharp_bound_constant_a(u_a_level: float, p: float) -> WelfareBound:
    """Bound when every person has the same status-quo utility ``u_a_level``.

    This is also the yes/no intentions setting: ``u_a_level`` is the response
    threshold and ``p`` the share answering yes.
    """
    u_a_level = _check_unit("u_a_level", u_a_level)
    p = _check_unit("p", p)
    return WelfareBound.from_endpoints(u_a_level * p, p + u_a_level * (1.0 - p))


def midpoint_welfare(stats: SummaryStatistics) -> float:
    """Midpoint of the bound from E[u(A)] and the vote share alone."""
    return 0.5 * stats.mean_u_a + 0.5 * stats.vote_share_b


def bound_width(b: WelfareBound) -> float:
    return b.upper - b.lower
