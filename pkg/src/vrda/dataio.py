"""Dataset and weight file formats, run reports, and synthetic generators."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import Comparator
from .core import Dataset, Example, PredictorSnapshot, SparseVector, TrainingRun, dot, l2_norm

# every generated feature vector has l2 norm <= RADIUS
RADIUS = 1.0

SYNTH_KINDS = ("separable", "noisy", "reranking")


class DataFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class GenerationError(RuntimeError):
    pass


# -- svmlight ---------------------------------------------------------------


def _parse_label(tok: str, lineno: int) -> int:
    try:
        value = float(tok)
    except ValueError:
        raise DataFormatError(f"bad label {tok!r}", lineno) from None
    if value == 1.0:
        return 1
    if value == -1.0:
        return -1
    raise DataFormatError(f"label must be +1 or -1, got {tok!r}", lineno)


def parse_svmlight(lines, dim: int | None = None) -> Dataset:
    """Parse svmlight text; indices are 1-based in the text, 0-based in memory.

    A ``# dim: N`` comment sets the dimension unless ``dim`` is given.
    """
    rows: list[tuple[int, dict[int, float]]] = []
    declared = None
    max_index = -1
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("dim:"):
                try:
                    declared = int(body[4:])
                except ValueError:
                    raise DataFormatError(f"bad dim directive {line!r}", lineno) from None
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        y = _parse_label(tokens[0], lineno)
        entries: dict[int, float] = {}
        prev = 0
        for tok in tokens[1:]:
            idx, sep, val = tok.partition(":")
            if not sep:
                raise DataFormatError(f"expected index:value, got {tok!r}", lineno)
            try:
                j = int(idx)
                v = float(val)
            except ValueError:
                raise DataFormatError(f"expected index:value, got {tok!r}", lineno) from None
            if j < 1:
                raise DataFormatError(f"indices are 1-based, got {j}", lineno)
            if j <= prev:
                raise DataFormatError(f"indices must be strictly ascending ({j} after {prev})", lineno)
            if not math.isfinite(v):
                raise DataFormatError(f"non-finite value {val!r}", lineno)
            prev = j
            if v != 0.0:
                entries[j - 1] = v
        if tokens[1:]:
            max_index = max(max_index, prev - 1)
        rows.append((y, entries))
    if dim is None:
        dim = declared if declared is not None else max_index + 1
    if max_index >= dim:
        raise DataFormatError(f"feature index {max_index + 1} exceeds dimension {dim}")
    examples = tuple(Example(SparseVector._trusted(e, dim), y) for y, e in rows)
    return Dataset(examples, dim)


def read_svmlight(path, dim: int | None = None) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse_svmlight(fh, dim)


def format_svmlight(data: Dataset) -> str:
    out = [f"# dim: {data.dim}"]
    for ex in data:
        feats = " ".join(f"{j + 1}:{v!r}" for j, v in ex.x)
        label = "+1" if ex.y == 1 else "-1"
        out.append(f"{label} {feats}".rstrip())
    return "\n".join(out) + "\n"


def write_svmlight(data: Dataset, path) -> None:
    Path(path).write_text(format_svmlight(data), encoding="utf-8", newline="\n")


# -- weights ----------------------------------------------------------------


def vector_to_dict(w: SparseVector) -> dict:
    return {"dim": w.dim, "entries": {str(j): v for j, v in w}}


def vector_from_dict(doc) -> SparseVector:
    if not isinstance(doc, dict) or "dim" not in doc:
        raise DataFormatError("weights document needs 'dim' and 'entries'")
    dim = doc["dim"]
    if not isinstance(dim, int) or dim < 0:
        raise DataFormatError(f"bad dim {dim!r}")
    entries = {}
    for key, v in (doc.get("entries") or {}).items():
        try:
            j = int(key)
        except ValueError:
            raise DataFormatError(f"bad index {key!r}") from None
        if not 0 <= j < dim:
            raise DataFormatError(f"index {j} out of range for dim {dim}")
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            raise DataFormatError(f"bad value at index {j}: {v!r}")
        entries[j] = float(v)
    return SparseVector(entries, dim)


def write_weights(w, path) -> None:
    if isinstance(w, Comparator):
        w = w.u
    Path(path).write_text(json.dumps(vector_to_dict(w)) + "\n", encoding="utf-8")


def read_weights(path, source: str = "supplied") -> Comparator:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"malformed JSON in {path}: {exc}") from None
    return Comparator(vector_from_dict(doc), source)


# -- run reports ------------------------------------------------------------

REPORT_SCHEMA = "vrda.run/1"


def run_to_dict(run: TrainingRun) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "config": run.config,
        "n_examples": run.n_examples,
        "dim": run.final.dim,
        "M": run.mistakes,
        "update_count": run.update_count,
        "mistake_indices": [list(p) for p in run.mistake_indices],
        "epoch_mistakes": run.epoch_mistakes,
        "nnz_curve": run.nnz_curve,
        "cumulative_mistakes_curve": run.cumulative_mistakes_curve,
        "sample_nnz": run.sample_nnz,
        "subgradient_norms": run.subgradient_norms,
        "n_snapshots": run.n_snapshots,
        "final_c": run.final_c,
        "final_weights": vector_to_dict(run.final),
        "averaged_weights": vector_to_dict(run.averaged()),
        "weighted_sum": vector_to_dict(run.weighted_sum),
        "final_s": vector_to_dict(run.final_s),
        "snapshots": (
            [{"c": s.c, "w": vector_to_dict(s.w)} for s in run.snapshots]
            if run.has_snapshots
            else None
        ),
    }


def run_from_dict(doc: dict) -> TrainingRun:
    try:
        dim = doc["dim"]
        snaps = doc.get("snapshots") or []
        return TrainingRun(
            snapshots=[PredictorSnapshot(vector_from_dict(s["w"]), int(s["c"])) for s in snaps],
            mistake_indices=[(int(e), int(i)) for e, i in doc["mistake_indices"]],
            nnz_curve=list(doc.get("nnz_curve", [])),
            cumulative_mistakes_curve=list(doc.get("cumulative_mistakes_curve", [])),
            sample_nnz=list(doc.get("sample_nnz", [])),
            epoch_mistakes=list(doc.get("epoch_mistakes", [])),
            config=dict(doc["config"]),
            final_s=vector_from_dict(doc.get("final_s", {"dim": dim})),
            update_count=int(doc["update_count"]),
            initial=SparseVector.zeros(dim),
            final=vector_from_dict(doc["final_weights"]),
            final_c=int(doc.get("final_c", 0)),
            weighted_sum=vector_from_dict(doc["weighted_sum"]),
            n_snapshots=int(doc["n_snapshots"]),
            n_examples=int(doc["n_examples"]),
            subgradient_norms=list(doc.get("subgradient_norms", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed run report: {exc}") from None


def write_report(run: TrainingRun, path) -> None:
    Path(path).write_text(json.dumps(run_to_dict(run)) + "\n", encoding="utf-8")


def read_report(path) -> TrainingRun:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"malformed JSON in {path}: {exc}") from None
    return run_from_dict(doc)


# -- synthetic data ---------------------------------------------------------


@dataclass(frozen=True)
class SynthSpec:
    kind: str = "separable"
    n_examples: int = 1000
    dim: int = 100
    margin: float = 0.05
    density: float = 0.1
    flip_rate: float = 0.0
    candidates_per_sentence: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SYNTH_KINDS:
            raise ValueError(f"kind must be one of {SYNTH_KINDS}, got {self.kind!r}")
        if self.n_examples < 1 or self.dim < 1:
            raise ValueError("need n_examples >= 1 and dim >= 1")
        if not self.margin > 0:
            raise ValueError("margin must be positive")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if not 0 <= self.flip_rate < 0.5:
            raise ValueError("flip_rate must lie in [0, 0.5)")
        if self.kind == "reranking" and self.candidates_per_sentence < 2:
            raise ValueError("reranking needs at least two candidates per sentence")


def _clip_norm(entries: dict[int, float], dim: int, radius: float) -> SparseVector:
    v = SparseVector._trusted(entries, dim)
    while l2_norm(v) > radius:
        v = v.scale(1.0 - 2.0**-52)
    return v


def _random_direction(rng: np.random.Generator, dim: int, density: float, norm: float):
    k = max(1, int(round(density * dim)))
    support = rng.choice(dim, size=k, replace=False)
    vals = rng.normal(size=k)
    vals *= norm / np.linalg.norm(vals)
    return {int(j): float(v) for j, v in zip(support, vals) if v != 0.0}


def _random_point(rng: np.random.Generator, dim: int, density: float, norm: float) -> SparseVector:
    k = max(1, int(rng.binomial(dim, density)))
    support = np.sort(rng.choice(dim, size=k, replace=False))
    vals = rng.normal(size=k)
    vals *= norm / np.linalg.norm(vals)
    entries = {int(j): float(v) for j, v in zip(support, vals) if v != 0.0}
    return _clip_norm(entries, dim, norm)


def _max_attempts(spec: SynthSpec) -> int:
    return max(10_000, 1000 * spec.n_examples)


def _separable(spec: SynthSpec, rng: np.random.Generator):
    tau = spec.margin
    u0 = SparseVector(_random_direction(rng, spec.dim, spec.density, 1.0), spec.dim)
    u = u0.scale(1.0 / tau)
    examples = []
    attempts = 0
    while len(examples) < spec.n_examples:
        attempts += 1
        if attempts > _max_attempts(spec):
            raise GenerationError(
                f"rejection sampling gave up after {attempts - 1} draws; "
                f"margin {spec.margin} is too large for dim={spec.dim}, density={spec.density}"
            )
        x = _random_point(rng, spec.dim, spec.density, RADIUS)
        score = dot(u0, x)
        if abs(score) < tau:
            continue
        y = 1 if score > 0 else -1
        if y * dot(u, x) < 1.0:
            continue
        examples.append(Example(x, y))
    return Dataset(tuple(examples), spec.dim), u


def _reranking(spec: SynthSpec, rng: np.random.Generator):
    tau = spec.margin
    u0 = SparseVector(_random_direction(rng, spec.dim, spec.density, 1.0), spec.dim)
    u = u0.scale(1.0 / tau)
    half = 0.5 * RADIUS
    examples = []
    attempts = 0
    while len(examples) < spec.n_examples:
        attempts += 1
        if attempts > _max_attempts(spec):
            raise GenerationError(
                f"rejection sampling gave up after {attempts - 1} sentences; "
                f"margin {spec.margin} is too large for the candidate spread"
            )
        cands = [
            _random_point(rng, spec.dim, spec.density, half)
            for _ in range(spec.candidates_per_sentence)
        ]
        scores = [dot(u0, phi) for phi in cands]
        order = sorted(range(len(cands)), key=lambda h: scores[h], reverse=True)
        best, rival = order[0], order[1]
        if scores[best] - scores[rival] < tau:
            continue
        x = SparseVector(
            {
                j: cands[best][j] - cands[rival][j]
                for j in set(cands[best].entries) | set(cands[rival].entries)
            },
            spec.dim,
        )
        if dot(u, x) < 1.0:
            continue
        examples.append(Example(x, 1))
    return Dataset(tuple(examples), spec.dim), u


def generate(spec: SynthSpec) -> tuple[Dataset, Comparator]:
    """Draw a synthetic dataset and the comparator that separates it.

    ``separable``: a sparse unit direction ``u0`` labels sparse unit-norm
    points; points with ``|u0.x| < margin`` are rejected and the returned
    ``u = u0 / margin`` satisfies ``y * u.x >= 1`` everywhere, so its
    margin ``1/||u||`` equals the requested one.

    ``noisy``: the separable draw with labels flipped at ``flip_rate``.

    ``reranking``: every label is +1 and each ``x`` is the difference between
    the best and runner-up candidate under a planted scorer.
    """
    data_seq, flip_seq = np.random.SeedSequence(spec.seed).spawn(2)
    rng = np.random.default_rng(data_seq)
    if spec.kind == "reranking":
        data, u = _reranking(spec, rng)
    else:
        data, u = _separable(spec, rng)
    if spec.kind == "noisy" and spec.flip_rate > 0:
        flips = np.random.default_rng(flip_seq).random(len(data)) < spec.flip_rate
        data = Dataset(
            tuple(
                Example(ex.x, -ex.y) if flip else ex
                for ex, flip in zip(data.examples, flips.tolist())
            ),
            data.dim,
        )
    return data, Comparator(u, "generator")


def ensure_parent(path) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
