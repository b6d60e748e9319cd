"""Voted regularized dual averaging (vRDA) training loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .core import Dataset, DimensionError, PredictorSnapshot, SparseVector, TrainingRun, dot
from .losses import LossKind, subgradient_from_margin
from .regularization import RdaState, RegKind, RegularizerSpec, rda_update

ON_ERROR = "on_error"
EVERY_STEP = "every_step"
POLICIES = (ON_ERROR, EVERY_STEP)
RETENTIONS = ("full", "final_and_average")


class NonFiniteSubgradient(ArithmeticError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    loss: LossKind = LossKind.HINGE
    reg: RegularizerSpec = field(default_factory=RegularizerSpec)
    eta: float = 1.0
    epochs: int = 1
    policy: str = ON_ERROR
    retention: str = "full"
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "loss", LossKind.parse(self.loss))
        if not self.eta > 0 or math.isinf(self.eta):
            raise ValueError(f"eta must be finite and > 0, got {self.eta}")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError(f"epochs must be a positive integer, got {self.epochs}")
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if self.retention not in RETENTIONS:
            raise ValueError(f"retention must be one of {RETENTIONS}, got {self.retention!r}")

    def to_dict(self) -> dict:
        return {
            "algo": "vrda",
            "loss": self.loss.value,
            "reg": self.reg.kind.value,
            "lambda": self.reg.lam,
            "eta": self.eta,
            "epochs": self.epochs,
            "policy": self.policy,
            "retention": self.retention,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(
            loss=LossKind.parse(d["loss"]),
            reg=RegularizerSpec(RegKind(d.get("reg", "none")), float(d.get("lambda", 0.0))),
            eta=float(d["eta"]),
            epochs=int(d.get("epochs", 1)),
            policy=d.get("policy", ON_ERROR),
            retention=d.get("retention", "full"),
            seed=d.get("seed"),
        )


def predict_label(margin: float) -> int:
    return 1 if margin >= 0.0 else -1


class RunRecorder:
    """Snapshot and curve bookkeeping shared by every online learner.

    A new snapshot starts whenever the learner replaces its weights. The
    running snapshot's survival count grows by one for every correctly
    predicted sample; a snapshot created right after a mistake starts at 1,
    one created after a correct prediction starts at 0.
    """

    def __init__(self, dim: int, n_examples: int, config: dict, retention: str = "full"):
        self.dim = dim
        self.n_examples = n_examples
        self.config = config
        self.keep_all = retention == "full"
        self.w = SparseVector.zeros(dim)
        self.initial = self.w
        self.c = 0
        self.snapshots: list[PredictorSnapshot] = []
        self.n_snapshots = 1
        self.weighted: dict[int, float] = {}
        self.mistake_indices: list[tuple[int, int]] = []
        self.cum_mistakes: list[int] = []
        self.sample_nnz: list[int] = []
        self.nnz_curve: list[int] = []
        self.epoch_mistakes: list[int] = []
        self.subgradient_norms: list[float] = []
        self.update_count = 0

    def start_epoch(self) -> None:
        self.epoch_mistakes.append(0)

    def mistake(self, epoch: int, i: int) -> None:
        self.mistake_indices.append((epoch, i))
        self.epoch_mistakes[-1] += 1

    def survive(self) -> None:
        self.c += 1

    def replace(self, w: SparseVector, c_start: int) -> None:
        self._finalize()
        self.w = w
        self.c = c_start
        self.n_snapshots += 1
        self.update_count += 1
        self.nnz_curve.append(len(w.entries))

    def end_sample(self) -> None:
        self.cum_mistakes.append(len(self.mistake_indices))
        self.sample_nnz.append(len(self.w.entries))

    def _finalize(self) -> None:
        if self.keep_all:
            self.snapshots.append(PredictorSnapshot(self.w, self.c))
        if self.c:
            acc = self.weighted
            c = self.c
            for j, v in self.w.entries.items():
                r = acc.get(j, 0.0) + c * v
                if r == 0.0:
                    acc.pop(j, None)
                else:
                    acc[j] = r

    def finish(self, final_s: SparseVector) -> TrainingRun:
        self._finalize()
        return TrainingRun(
            snapshots=self.snapshots,
            mistake_indices=self.mistake_indices,
            nnz_curve=self.nnz_curve,
            cumulative_mistakes_curve=self.cum_mistakes,
            sample_nnz=self.sample_nnz,
            epoch_mistakes=self.epoch_mistakes,
            config=self.config,
            final_s=final_s,
            update_count=self.update_count,
            initial=self.initial,
            final=self.w,
            final_c=self.c,
            weighted_sum=SparseVector._trusted(self.weighted, self.dim),
            n_snapshots=self.n_snapshots,
            n_examples=self.n_examples,
            subgradient_norms=self.subgradient_norms,
        )


def _check_data(data: Dataset) -> None:
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    for i, ex in enumerate(data.examples):
        if ex.x.dim != data.dim:
            raise DimensionError(f"example {i} has dim {ex.x.dim}, dataset dim is {data.dim}")


def _run(data: Dataset, cfg: TrainConfig, policy: str, epochs: int, index_map=None) -> TrainingRun:
    _check_data(data)
    rec = RunRecorder(
        data.dim, len(data), {**cfg.to_dict(), "policy": policy, "epochs": epochs}, cfg.retention
    )
    s: dict[int, float] = {}
    k = 0
    w = rec.w
    conservative = policy == ON_ERROR
    for epoch in range(epochs):
        rec.start_epoch()
        for i, ex in enumerate(data.examples):
            margin = dot(w, ex.x)
            correct = predict_label(margin) == ex.y
            if correct:
                rec.survive()
            else:
                rec.mistake(*(index_map[i] if index_map is not None else (epoch, i)))
            if correct and conservative:
                rec.end_sample()
                continue

            g = subgradient_from_margin(cfg.loss, ex.y * margin, ex)
            gnorm = math.sqrt(math.fsum(v * v for v in g.entries.values()))
            if not math.isfinite(gnorm):
                raise NonFiniteSubgradient(f"non-finite subgradient at epoch {epoch}, sample {i}")
            for j, v in g.entries.items():
                r = s.get(j, 0.0) + v
                if r == 0.0:
                    s.pop(j, None)
                else:
                    s[j] = r
            k += 1
            w = rda_update(RdaState(SparseVector._trusted(dict(s), data.dim), k, cfg.eta), cfg.reg)
            rec.subgradient_norms.append(gnorm)
            rec.replace(w, 0 if correct else 1)
            rec.end_sample()
    return rec.finish(SparseVector._trusted(s, data.dim))


def train(data: Dataset, cfg: TrainConfig) -> TrainingRun:
    """Run vRDA (``on_error``) or plain RDA (``every_step``) over ``data``.

    With ``on_error`` only misclassified samples feed the subgradient sum,
    so the run holds ``M + 1`` snapshots for ``M`` mistakes and the survival
    counts add up to ``epochs * len(data)``. Prediction uses ``w.x >= 0 -> +1``.
    """
    return _run(data, cfg, cfg.policy, cfg.epochs)


def mistake_subsequence(data: Dataset, mistake_indices: Sequence[tuple[int, int]]) -> Dataset:
    m = len(data)
    picked = []
    for epoch, i in mistake_indices:
        if not 0 <= i < m or epoch < 0:
            raise IndexError(f"mistake index ({epoch}, {i}) out of range for {m} examples")
        picked.append(data.examples[i])
    return Dataset(tuple(picked), data.dim)


def replay_on_subsequence(
    data: Dataset, mistake_indices: Sequence[tuple[int, int]], cfg: TrainConfig
) -> TrainingRun:
    """Plain RDA over just the examples an ``on_error`` run got wrong.

    Reproduces that run's predictor sequence exactly. Mistakes in the
    returned run are reported with the original (epoch, index) labels.
    """
    sub = mistake_subsequence(data, mistake_indices)
    if len(sub) == 0:
        rec = RunRecorder(data.dim, 0, {**cfg.to_dict(), "policy": EVERY_STEP}, cfg.retention)
        return rec.finish(SparseVector.zeros(data.dim))
    return _run(sub, cfg, EVERY_STEP, 1, index_map=list(mistake_indices))
