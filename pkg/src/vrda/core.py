"""Sparse vectors and the shared data model (examples, datasets, runs)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping


class DimensionError(ValueError):
    """Raised when two vectors (or a vector and a dataset) disagree on dimension."""


class SparseVector:
    """Immutable index -> value map over an ``dim``-dimensional space.

    Stored entries never hold an exact zero, so ``nnz`` counts true nonzeros.
    Indices are 0-based. ``entries`` is exposed for fast iteration and must
    not be mutated by callers.
    """

    __slots__ = ("entries", "dim")

    def __init__(self, entries: Mapping[int, float] | None = None, dim: int = 0):
        clean: dict[int, float] = {}
        if entries:
            for j, v in entries.items():
                j = int(j)
                v = float(v)
                if j < 0:
                    raise IndexError(f"negative feature index {j}")
                if v != 0.0:
                    clean[j] = v
        if clean and dim <= max(clean):
            raise DimensionError(f"index {max(clean)} out of range for dim {dim}")
        object.__setattr__(self, "entries", clean)
        object.__setattr__(self, "dim", int(dim))

    @classmethod
    def _trusted(cls, entries: dict[int, float], dim: int) -> "SparseVector":
        # caller guarantees canonical form and valid indices
        obj = object.__new__(cls)
        object.__setattr__(obj, "entries", entries)
        object.__setattr__(obj, "dim", dim)
        return obj

    @classmethod
    def zeros(cls, dim: int) -> "SparseVector":
        return cls._trusted({}, int(dim))

    @classmethod
    def from_dense(cls, values: Iterable[float]) -> "SparseVector":
        values = list(values)
        return cls(dict(enumerate(values)), len(values))

    def to_dense(self) -> list[float]:
        out = [0.0] * self.dim
        for j, v in self.entries.items():
            out[j] = v
        return out

    def __setattr__(self, name, value):
        raise AttributeError("SparseVector is immutable")

    def __reduce__(self):
        return (SparseVector._trusted, (dict(self.entries), self.dim))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(frozenset(self.entries.items()))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return iter(sorted(self.entries.items()))

    def __getitem__(self, j: int) -> float:
        return self.entries.get(j, 0.0)

    def __repr__(self) -> str:
        body = ", ".join(f"{j}: {v!r}" for j, v in self)
        return f"SparseVector({{{body}}}, dim={self.dim})"

    def scale(self, alpha: float) -> "SparseVector":
        return add_scaled(SparseVector.zeros(self.dim), self, alpha)


def _check_dims(a: SparseVector, b: SparseVector) -> None:
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def dot(a: SparseVector, b: SparseVector) -> float:
    # fsum is correctly rounded, so the result is independent of entry order
    _check_dims(a, b)
    ae, be = a.entries, b.entries
    if len(ae) > len(be):
        ae, be = be, ae
    get = be.get
    return math.fsum([v * get(j, 0.0) for j, v in ae.items() if j in be])


def add_scaled(a: SparseVector, b: SparseVector, alpha: float) -> SparseVector:
    """Return ``a + alpha * b`` with exact zeros dropped."""
    _check_dims(a, b)
    out = dict(a.entries)
    if alpha != 0.0:
        for j, v in b.entries.items():
            r = out.get(j, 0.0) + alpha * v
            if r == 0.0:
                out.pop(j, None)
            else:
                out[j] = r
    return SparseVector._trusted(out, a.dim)


def l2_norm(a: SparseVector) -> float:
    return math.sqrt(math.fsum(v * v for v in a.entries.values()))


def l1_norm(a: SparseVector) -> float:
    return math.fsum(abs(v) for v in a.entries.values())


def nnz(a: SparseVector) -> int:
    return len(a.entries)


@dataclass(frozen=True)
class Example:
    x: SparseVector
    y: int

    def __post_init__(self):
        if self.y not in (1, -1) or isinstance(self.y, bool):
            raise ValueError(f"label must be +1 or -1, got {self.y!r}")


@dataclass(frozen=True)
class Dataset:
    examples: tuple[Example, ...]
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        for i, ex in enumerate(self.examples):
            if ex.x.dim != self.dim:
                raise DimensionError(
                    f"example {i} has dim {ex.x.dim}, dataset dim is {self.dim}"
                )

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[Example]:
        return iter(self.examples)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Dataset(self.examples[i], self.dim)
        return self.examples[i]

    def reorder(self, order: Iterable[int]) -> "Dataset":
        return Dataset(tuple(self.examples[i] for i in order), self.dim)


@dataclass(frozen=True)
class PredictorSnapshot:
    """A predictor ``w`` together with its survival count ``c``."""

    w: SparseVector
    c: int


@dataclass
class TrainingRun:
    """Everything recorded while training one online learner.

    ``snapshots`` is empty when the run kept only the final and averaged
    predictors (``retention == "final_and_average"``); ``n_snapshots`` is
    always the number of predictors produced.
    """

    snapshots: list[PredictorSnapshot]
    mistake_indices: list[tuple[int, int]]
    nnz_curve: list[int]
    cumulative_mistakes_curve: list[int]
    sample_nnz: list[int]
    epoch_mistakes: list[int]
    config: dict
    final_s: SparseVector
    update_count: int
    initial: SparseVector
    final: SparseVector
    final_c: int
    weighted_sum: SparseVector
    n_snapshots: int
    n_examples: int
    subgradient_norms: list[float] = field(default_factory=list)

    @property
    def mistakes(self) -> int:
        return len(self.mistake_indices)

    @property
    def retention(self) -> str:
        return self.config.get("retention", "full")

    @property
    def has_snapshots(self) -> bool:
        return bool(self.snapshots)

    def averaged(self) -> SparseVector:
        """Weighted average ``(1/K) * sum_k c_k w_k`` over the K snapshots."""
        return self.weighted_sum.scale(1.0 / self.n_snapshots)
