from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union


@dataclass(frozen=True)
class TruncationPolicy:
    """Rank-selection rule shared by all format truncations.

    ``mode`` is ``"rank"`` (keep at most ``rank`` terms per mode/bond; an int
    applies to all, a sequence gives one target per mode or bond) or
    ``"tol"`` (absolute Frobenius error budget ``tol`` for the whole tensor).
    ``drop_threshold`` optionally removes rank-1 terms whose weight is below
    ``drop_threshold * max weight`` before re-orthogonalisation.
    """

    mode: str = "rank"
    rank: Union[int, Sequence[int], None] = None
    tol: Optional[float] = None
    drop_threshold: Optional[float] = None

    def __post_init__(self):
        if self.mode == "rank":
            if self.rank is None:
                raise ValueError("fixed-rank policy needs a rank")
            ranks = [self.rank] if isinstance(self.rank, int) else list(self.rank)
            if any(int(r) < 1 for r in ranks):
                raise ValueError("requested rank must be >= 1")
        elif self.mode == "tol":
            if self.tol is None or self.tol < 0:
                raise ValueError("tolerance policy needs tol >= 0")
        else:
            raise ValueError(f"unknown truncation mode {self.mode!r}")
        if self.drop_threshold is not None and not 0 <= self.drop_threshold < 1:
            raise ValueError("drop_threshold must lie in [0, 1)")

    @classmethod
    def fixed(cls, rank, drop_threshold=None):
        return cls("rank", rank=rank, drop_threshold=drop_threshold)

    @classmethod
    def tolerance(cls, tol, drop_threshold=None):
        return cls("tol", tol=float(tol), drop_threshold=drop_threshold)

    def rank_at(self, j):
        if isinstance(self.rank, int):
            return self.rank
        return int(self.rank[j])

    def split_tol(self, parts):
        """Per-step budget so that the root-sum-square error stays <= tol."""
        return self.tol / max(parts, 1) ** 0.5

    def select(self, singular_values, j, parts):
        from ..linalg import truncation_index

        if self.mode == "rank":
            k = truncation_index(singular_values, rank=self.rank_at(j))
        else:
            k = truncation_index(singular_values, tol=self.split_tol(parts))
        return max(k, 1)
