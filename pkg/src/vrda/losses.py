"""Convex surrogate losses of a linear predictor and their subgradients."""

from __future__ import annotations

import enum
import math

from .core import Example, SparseVector, dot

# exp() arguments are clamped here to keep subgradients finite
EXP_CLAMP = 700.0


class LossKind(str, enum.Enum):
    HINGE = "hinge"
    LOGISTIC = "logistic"
    EXPONENTIAL = "exponential"

    @classmethod
    def parse(cls, name: "str | LossKind") -> "LossKind":
        if isinstance(name, LossKind):
            return name
        aliases = {"log": "logistic", "exp": "exponential"}
        try:
            return cls(aliases.get(name, name))
        except ValueError:
            raise ValueError(f"unknown loss {name!r}") from None


def _sigmoid(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def loss_from_margin(kind: LossKind, z: float) -> float:
    """Loss as a function of the signed margin ``z = y * w.x``."""
    if kind is LossKind.HINGE:
        return max(0.0, 1.0 - z)
    if kind is LossKind.LOGISTIC:
        # log(1 + exp(-z)) without overflow
        if z > 0:
            return math.log1p(math.exp(-z))
        return -z + math.log1p(math.exp(z))
    if kind is LossKind.EXPONENTIAL:
        return math.exp(min(-z, EXP_CLAMP))
    raise ValueError(f"unknown loss {kind!r}")


def dloss_dmargin(kind: LossKind, z: float) -> float:
    """A subgradient of the loss with respect to the margin ``z``.

    The hinge kink at ``z == 1`` takes the zero subgradient.
    """
    if kind is LossKind.HINGE:
        return -1.0 if z < 1.0 else 0.0
    if kind is LossKind.LOGISTIC:
        return -_sigmoid(-z)
    if kind is LossKind.EXPONENTIAL:
        return -math.exp(min(-z, EXP_CLAMP))
    raise ValueError(f"unknown loss {kind!r}")


def subgradient_from_margin(kind: LossKind, z: float, ex: Example) -> SparseVector:
    coef = dloss_dmargin(kind, z) * ex.y
    if coef == 0.0:
        return SparseVector.zeros(ex.x.dim)
    out = {}
    for j, v in ex.x.entries.items():
        r = coef * v
        if r != 0.0:
            out[j] = r
    return SparseVector._trusted(out, ex.x.dim)


def loss_value(kind: LossKind | str, w: SparseVector, z: Example) -> float:
    kind = LossKind.parse(kind)
    return loss_from_margin(kind, z.y * dot(w, z.x))


def loss_subgradient(kind: LossKind | str, w: SparseVector, z: Example) -> SparseVector:
    kind = LossKind.parse(kind)
    return subgradient_from_margin(kind, z.y * dot(w, z.x), z)
