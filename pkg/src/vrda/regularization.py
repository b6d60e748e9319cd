"""Regularizers, soft-thresholding and the closed-form dual averaging step.

The step solves, for the running subgradient sum ``s`` after ``k`` updates,

    w = argmin_w  (1/k) s.w + reg(w) + (eta * sqrt(k) / k) * 0.5 * ||w||^2

which separates over coordinates, so each regularizer has a closed form.
``rda_update_oracle`` solves the same problem numerically for testing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .core import SparseVector, l1_norm


class RegKind(str, enum.Enum):
    NONE = "none"
    L1 = "l1"
    L2 = "l2"


@dataclass(frozen=True)
class RegularizerSpec:
    kind: RegKind = RegKind.NONE
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", RegKind(self.kind))
        if not self.lam >= 0.0 or math.isinf(self.lam):
            raise ValueError(f"regularization weight must be finite and >= 0, got {self.lam}")

    @property
    def weight(self) -> float:
        """Effective lambda; ``none`` always counts as zero."""
        return 0.0 if self.kind is RegKind.NONE else self.lam

    def value(self, w: SparseVector) -> float:
        """Full regularizer value, lambda included."""
        return self.weight * psi_bare(self.kind, w)


@dataclass(frozen=True)
class RdaState:
    s: SparseVector
    k: int
    eta: float


def shrink(g: SparseVector, lam: float) -> SparseVector:
    """Coordinate-wise soft-thresholding of ``g`` at level ``lam``."""
    if lam < 0:
        raise ValueError(f"threshold must be non-negative, got {lam}")
    out = {}
    for j, v in g.entries.items():
        if v > lam:
            out[j] = v - lam
        elif v < -lam:
            out[j] = v + lam
    return SparseVector._trusted(out, g.dim)


def psi_bare(kind: RegKind | str, w: SparseVector) -> float:
    """Regularizer with lambda factored out: ||w||_1, 0.5 ||w||_2^2, or 0."""
    kind = RegKind(kind)
    if kind is RegKind.L1:
        return l1_norm(w)
    if kind is RegKind.L2:
        return 0.5 * math.fsum(v * v for v in w.entries.values())
    return 0.0


def _check_state(state: RdaState) -> None:
    if state.k < 1:
        raise ValueError(f"update count k must be >= 1, got {state.k}")
    if not state.eta > 0:
        raise ValueError(f"eta must be > 0, got {state.eta}")


def rda_update(state: RdaState, reg: RegularizerSpec) -> SparseVector:
    _check_state(state)
    k, eta = state.k, state.eta
    s = state.s.entries
    out: dict[int, float] = {}
    if reg.kind is RegKind.L2:
        denom = k * reg.lam + eta * math.sqrt(k)
        for j, v in s.items():
            r = -v / denom
            if r != 0.0:
                out[j] = r
        return SparseVector._trusted(out, state.s.dim)

    scale = -math.sqrt(k) / eta
    lam = reg.weight
    for j, v in s.items():
        a = v / k
        if a > lam:
            r = scale * (a - lam)
        elif a < -lam:
            r = scale * (a + lam)
        else:
            continue
        if r != 0.0:
            out[j] = r
    return SparseVector._trusted(out, state.s.dim)


class OracleError(RuntimeError):
    pass


def _minimize_coordinate(a: float, b: float, lam: float, max_iter: int = 5000) -> float:
    """Minimize ``a*w + lam*|w| + (b/2)*w^2`` over scalar ``w`` by bisection.

    Searches for the point where the left derivative is <= 0 and the right
    derivative is >= 0. Works directly from the optimality condition of the
    convex objective, so it shares no algebra with the closed forms.
    """
    bound = 1.0
    while a + lam * 1.0 + b * bound < 0 or a - lam + b * -bound > 0:
        bound *= 2.0
        if bound > 1e300:
            raise OracleError("could not bracket minimizer")
    lo, hi = -bound, bound
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            return mid
        left = a + b * mid + (lam if mid > 0 else -lam)
        right = a + b * mid + (lam if mid >= 0 else -lam)
        if left > 0:
            hi = mid
        elif right < 0:
            lo = mid
        else:
            return mid
    raise OracleError("bisection did not converge")


def rda_update_oracle(state: RdaState, reg: RegularizerSpec, dims: int) -> SparseVector:
    """Numerically solve the dual averaging step coordinate by coordinate."""
    _check_state(state)
    if dims > 10:
        raise ValueError("oracle is meant for small test problems (dims <= 10)")
    k, eta = state.k, state.eta
    beta = eta * math.sqrt(k)
    quad = beta / k
    lam_abs = 0.0
    if reg.kind is RegKind.L1:
        lam_abs = reg.lam
    elif reg.kind is RegKind.L2:
        quad += reg.lam
    w = [_minimize_coordinate(state.s[j] / k, quad, lam_abs) for j in range(dims)]
    return SparseVector(dict(enumerate(w)), max(dims, state.s.dim))
