"""Exception types shared across the toolkit."""

from __future__ import annotations


class UndefinedStatisticError(ValueError):
    """An agreement or evaluation statistic has no defined value.

    Raised instead of silently returning 0 or 1 when the expected
    disagreement (or the denominator of a ratio) is zero.
    """


class ConflictError(RuntimeError):
    """An append-only collection was asked to accept a conflicting write."""

    def __init__(self, message: str, *, tweet_id: str | None = None,
                 prior_round: str | None = None) -> None:
        super().__init__(message)
        self.tweet_id = tweet_id
        self.prior_round = prior_round


class DependencyError(RuntimeError):
    """A pipeline stage was run before the stages it depends on."""

    def __init__(self, stage: str, missing: str) -> None:
        super().__init__(f"stage {stage!r} requires {missing!r} to have completed")
        self.stage = stage
        self.missing = missing
