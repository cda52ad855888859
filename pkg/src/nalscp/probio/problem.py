from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..cones import ConeDesc
from ..errors import DimensionMismatch
from ..linalg import LinearMap


@dataclass(eq=False)
class Problem:
    """Standard-form conic program ``min c.x  s.t.  A x = b,  x in K``.

    ``c`` and the rows of ``A`` are given in plain coordinates, the usual
    convention of conic solvers.  :attr:`c_elem` is the same cost expressed
    as an algebra element, so that ``cone.inner(c_elem, x) == c @ x``.
    """

    A: LinearMap
    b: np.ndarray
    c: np.ndarray
    cone: ConeDesc
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.c = np.asarray(self.c, dtype=float).ravel()
        if self.A.cone != self.cone:
            raise DimensionMismatch("A was built for a different cone")
        if self.b.shape[0] != self.A.m:
            raise DimensionMismatch(f"b has length {self.b.shape[0]}, A has {self.A.m} rows")
        if self.c.shape[0] != self.cone.vec_len:
            raise DimensionMismatch(f"c has length {self.c.shape[0]}, cone expects {self.cone.vec_len}")
        if not (np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.c))):
            raise ValueError("b and c must be finite")

    @property
    def m(self) -> int:
        return self.A.m

    @property
    def n(self) -> int:
        return self.cone.vec_len

    @cached_property
    def c_elem(self) -> np.ndarray:
        return self.c / self.cone.gram

    def validate(self) -> "Problem":
        """Check full row rank of A (raises RankDeficient)."""
        self.A.aat_factor
        return self

    def same_data(self, other: "Problem") -> bool:
        return (
            self.cone == other.cone
            and self.A == other.A
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.c, other.c)
        )
