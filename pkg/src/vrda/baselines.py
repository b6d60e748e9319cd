"""Comparison learners: voted/averaged perceptron and truncated gradient.

Both emit the same ``TrainingRun`` records as vRDA so the predictor and
analysis code applies unchanged.
"""

from __future__ import annotations

import math

from .core import Dataset, SparseVector, TrainingRun, dot
from .losses import LossKind, subgradient_from_margin
from .regularization import shrink
from .trainer import NonFiniteSubgradient, RunRecorder, _check_data, predict_label

PERCEPTRON_VARIANTS = ("voted", "averaged")


def train_perceptron(
    data: Dataset, epochs: int = 1, variant: str = "voted", retention: str = "full"
) -> TrainingRun:
    """Conservative perceptron with unit step: ``w += y * x`` on every mistake.

    Both variants keep the survival-weighted average; ``voted`` is normally
    evaluated with ``mode="vote"`` and ``averaged`` with ``mode="average"``.
    """
    _check_data(data)
    if variant not in PERCEPTRON_VARIANTS:
        raise ValueError(f"variant must be one of {PERCEPTRON_VARIANTS}, got {variant!r}")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    config = {"algo": "perceptron", "variant": variant, "epochs": epochs, "retention": retention}
    rec = RunRecorder(data.dim, len(data), config, retention)
    w: dict[int, float] = {}
    w_vec = rec.w
    for epoch in range(epochs):
        rec.start_epoch()
        for i, ex in enumerate(data.examples):
            if predict_label(dot(w_vec, ex.x)) == ex.y:
                rec.survive()
                rec.end_sample()
                continue
            rec.mistake(epoch, i)
            for j, v in ex.x.entries.items():
                r = w.get(j, 0.0) + ex.y * v
                if r == 0.0:
                    w.pop(j, None)
                else:
                    w[j] = r
            w_vec = SparseVector._trusted(dict(w), data.dim)
            rec.subgradient_norms.append(math.sqrt(math.fsum(v * v for v in ex.x.entries.values())))
            rec.replace(w_vec, 1)
            rec.end_sample()
    final_s = SparseVector._trusted({j: -v for j, v in w.items()}, data.dim)
    return rec.finish(final_s)


def train_truncated_gradient(
    data: Dataset,
    loss: LossKind | str = LossKind.HINGE,
    lam: float = 0.0,
    eta: float = 0.1,
    truncation_period: int = 1,
    epochs: int = 1,
    retention: str = "full",
) -> TrainingRun:
    """Online subgradient descent with periodic soft-thresholding.

    Every step takes ``w <- w - eta * g``; every ``truncation_period``-th step
    then shrinks ``w`` by ``truncation_period * eta * lam``.
    """
    _check_data(data)
    loss = LossKind.parse(loss)
    if truncation_period < 1:
        raise ValueError("truncation period must be >= 1")
    if not eta > 0 or lam < 0:
        raise ValueError("need eta > 0 and lam >= 0")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    config = {
        "algo": "tg",
        "loss": loss.value,
        "lambda": lam,
        "eta": eta,
        "truncation_period": truncation_period,
        "epochs": epochs,
        "retention": retention,
    }
    rec = RunRecorder(data.dim, len(data), config, retention)
    gravity = truncation_period * eta * lam
    w: dict[int, float] = {}
    w_vec = rec.w
    s: dict[int, float] = {}
    step = 0
    for epoch in range(epochs):
        rec.start_epoch()
        for i, ex in enumerate(data.examples):
            margin = dot(w_vec, ex.x)
            correct = predict_label(margin) == ex.y
            if correct:
                rec.survive()
            else:
                rec.mistake(epoch, i)
            g = subgradient_from_margin(loss, ex.y * margin, ex)
            gnorm = math.sqrt(math.fsum(v * v for v in g.entries.values()))
            if not math.isfinite(gnorm):
                raise NonFiniteSubgradient(f"non-finite subgradient at epoch {epoch}, sample {i}")
            for j, v in g.entries.items():
                r = w.get(j, 0.0) - eta * v
                if r == 0.0:
                    w.pop(j, None)
                else:
                    w[j] = r
                t = s.get(j, 0.0) + v
                if t == 0.0:
                    s.pop(j, None)
                else:
                    s[j] = t
            step += 1
            w_vec = SparseVector._trusted(dict(w), data.dim)
            if gravity > 0 and step % truncation_period == 0:
                w_vec = shrink(w_vec, gravity)
                w = dict(w_vec.entries)
            rec.subgradient_norms.append(gnorm)
            rec.replace(w_vec, 0 if correct else 1)
            rec.end_sample()
    return rec.finish(SparseVector._trusted(s, data.dim))
