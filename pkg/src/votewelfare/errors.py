"""Exception hierarchy.

``ValidationError`` covers malformed or out-of-range inputs; ``InfeasibleInput``
covers inputs that are well formed but cannot come from any population
(inconsistent summaries, empty feasible intervals).
"""


class VoteWelfareError(Exception):
    pass


class ValidationError(VoteWelfareError, ValueError):
    pass


class InfeasibleInput(VoteWelfareError, ValueError):
    pass


class EmptyPopulation(ValidationError):
    pass


class UtilityOutOfRange(ValidationError):
    pass


class TieInStrictMode(ValidationError):
    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(
            f"profile {index} has u_a == u_b == {value!r}; "
            "ties are rejected under the strict tie policy"
        )


class InvalidFamilyParameter(ValidationError):
    pass


class PriorOutsideBound(ValidationError):
    pass


class ThresholdOutOfRange(ValidationError):
    pass


class InputFormatError(ValidationError):
    """Malformed input file; carries the 1-based line number when known."""

    def __init__(self, source: str, line: int | None, message: str):
        self.source = source
        self.line = line
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class InconsistentSummary(InfeasibleInput):
    pass


class InfeasibleRecord(InfeasibleInput):
    def __init__(self, index: int, u_a: float, votes_b: bool):
        self.index = index
        side = "B" if votes_b else "A"
        super().__init__(
            f"record {index} (u_a={u_a!r}, vote={side}) has an empty feasible "
            "interval for u_b"
        )


class InvariantViolation(VoteWelfareError, RuntimeError):
    pass
