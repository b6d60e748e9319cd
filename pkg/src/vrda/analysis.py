"""Mistake, regret and online-to-batch bounds evaluated on concrete runs.

Every quantity is computed against a fixed comparator ``u`` over the
subsequence of samples on which the online learner erred. Regularizer
values use the bare form ``psi`` (lambda factored out), so the effective
penalty is ``lam * psi``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import Dataset, SparseVector, TrainingRun, dot, l2_norm
from .losses import LossKind, loss_from_margin
from .regularization import RegKind, RegularizerSpec, psi_bare
from .trainer import ON_ERROR, TrainConfig, train

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Comparator:
    u: SparseVector
    source: str = "supplied"  # generator | supplied | averaged

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.u.entries.values()):
            raise ValueError("comparator has non-finite entries")

    @property
    def data_dependent(self) -> bool:
        return self.source == "averaged"


def _as_vector(u) -> SparseVector:
    return u.u if isinstance(u, Comparator) else u


def _mistake_predictors(run: TrainingRun) -> list[SparseVector]:
    if not run.has_snapshots:
        raise ValueError("this quantity needs every snapshot (retention='full')")
    m = run.mistakes
    if len(run.snapshots) != m + 1:
        raise ValueError("snapshots do not line up with mistakes; use an on_error run")
    return [snap.w for snap in run.snapshots[:m]]


def relative_strength(u, run: TrainingRun, reg: RegularizerSpec | RegKind | str):
    """Return ``(delta, delta_bar)`` for comparator ``u``.

    ``delta = psi(u) - mean_k psi(w_k)`` and ``delta_bar = psi(u) - psi(mean_k w_k)``
    over the M predictors that made mistakes.
    """
    kind = reg.kind if isinstance(reg, RegularizerSpec) else RegKind(reg)
    u = _as_vector(u)
    ws = _mistake_predictors(run)
    if not ws:
        raise ValueError("relative strength is undefined for a run without mistakes")
    m = len(ws)
    psi_u = psi_bare(kind, u)
    delta = psi_u - math.fsum(psi_bare(kind, w) for w in ws) / m
    mean: dict[int, float] = {}
    for w in ws:
        for j, v in w.entries.items():
            mean[j] = mean.get(j, 0.0) + v
    w_bar = SparseVector({j: v / m for j, v in mean.items()}, u.dim)
    return delta, psi_u - psi_bare(kind, w_bar)


def subsequence_loss(
    u, data: Dataset, mistake_indices: Sequence[tuple[int, int]], loss: LossKind | str
) -> float:
    """Total loss of ``u`` over the samples where mistakes were made."""
    loss = LossKind.parse(loss)
    u = _as_vector(u)
    n = len(data)
    total = []
    for epoch, i in mistake_indices:
        if not 0 <= i < n:
            raise IndexError(f"mistake index ({epoch}, {i}) out of range for {n} examples")
        ex = data.examples[i]
        total.append(loss_from_margin(loss, ex.y * dot(u, ex.x)))
    return math.fsum(total)


def regret_observed(u, run: TrainingRun, data: Dataset, reg: RegularizerSpec) -> float:
    u = _as_vector(u)
    ws = _mistake_predictors(run)
    if not ws:
        raise ValueError("regret is undefined for a run without mistakes")
    loss = LossKind.parse(run.config["loss"])
    lam = reg.weight
    online = []
    for w, (_, i) in zip(ws, run.mistake_indices):
        ex = data.examples[i]
        online.append(loss_from_margin(loss, ex.y * dot(w, ex.x)))
        online.append(lam * psi_bare(reg.kind, w))
    comparator = subsequence_loss(u, data, run.mistake_indices, loss)
    comparator += len(ws) * lam * psi_bare(reg.kind, u)
    return math.fsum(online) - comparator


def quadratic_bound(a: float, b: float, c: float) -> tuple[float, float]:
    """Bounds on ``x`` implied by ``a*x - b*sqrt(x) - c <= 0``.

    Returns ``(mid, outer)`` with ``x <= mid <= outer``.
    """
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    if b < 0 or c < 0:
        raise ValueError("b and c must be non-negative")
    ca = c / a
    ba = b / a
    mid = ca + ba * ba + ba * math.sqrt(ca)
    outer = (math.sqrt(ca) + ba) ** 2
    return mid, outer


def theorem1_bound(L_u: float, R: float, norm_u: float, lam_delta: float) -> float | None:
    """Mistake bound for a comparator with total loss ``L_u``.

    Returns ``None`` when ``lam_delta >= 1``, where no finite bound follows.
    """
    if L_u < 0 or R < 0 or norm_u < 0:
        raise ValueError("L_u, R and norm_u must be non-negative")
    if lam_delta >= 1:
        return None
    a = 1.0 - lam_delta
    return (math.sqrt(L_u / a) + SQRT2 * R * norm_u / a) ** 2


def separable_bound(R: float, gamma: float, lam_delta: float = 0.0) -> float | None:
    """``2 (R/gamma)^2 / (1 - lam_delta)^2``; ``None`` if ``lam_delta >= 1``."""
    if lam_delta >= 1:
        return None
    return 2.0 * (R / gamma) ** 2 / (1.0 - lam_delta) ** 2


def perceptron_bound(R: float, gamma: float) -> float:
    return (R / gamma) ** 2


def regret_bound(G: float, norm_u: float, eta: float, M: int) -> float:
    """``(eta/2 ||u||^2 + G^2/eta) sqrt(M)``; equals ``sqrt(2) G ||u|| sqrt(M)`` at the best eta."""
    return (0.5 * eta * norm_u**2 + G**2 / eta) * math.sqrt(M)


def optimal_eta(G: float, norm_u: float) -> float:
    return SQRT2 * G / norm_u


def mistake_bound_at_eta(
    L_u: float, G: float, norm_u: float, eta: float, lam_delta: float
) -> float | None:
    """Mistake bound for an arbitrary ``eta`` via the quadratic lemma."""
    if lam_delta >= 1:
        return None
    b = 0.5 * eta * norm_u**2 + G**2 / eta
    return quadratic_bound(1.0 - lam_delta, b, L_u)[1]


def check_separability(u, data: Dataset) -> tuple[bool, float]:
    """Whether every example has ``y * u.x >= 1``, and the margin ``1/||u||``."""
    u = _as_vector(u)
    norm = l2_norm(u)
    if norm == 0.0:
        raise ValueError("margin is undefined for the zero comparator")
    separable = all(ex.y * dot(u, ex.x) >= 1.0 for ex in data)
    return separable, 1.0 / norm


def data_radius(data: Dataset) -> float:
    if len(data) == 0:
        raise ValueError("radius of an empty dataset is undefined")
    return max(l2_norm(ex.x) for ex in data)


def gradient_bound(run: TrainingRun, data: Dataset) -> float:
    """Subgradient norm bound G: the data radius for hinge, else the run's max."""
    if run.config.get("loss") == LossKind.HINGE.value:
        return data_radius(data)
    return max(run.subgradient_norms, default=0.0)


def online_to_batch_bound(E: float, m: int) -> float:
    if m < 1:
        raise ValueError("need at least one training example")
    if E < 0:
        raise ValueError("expected mistakes must be non-negative")
    return 2.0 * E / (m + 1)


def permutation_mistakes(
    data: Dataset, cfg: TrainConfig, permutations: int, seed: int = 0
) -> list[int]:
    """Mistake counts of single-pass on_error runs over random orderings."""
    if permutations < 1:
        raise ValueError("need at least one permutation")
    cfg = replace(cfg, epochs=1, policy=ON_ERROR, retention="final_and_average")
    children = np.random.SeedSequence(seed).spawn(permutations)
    counts = []
    for child in children:
        order = np.random.default_rng(child).permutation(len(data))
        counts.append(train(data.reorder(order.tolist()), cfg).mistakes)
    return counts


def estimate_expected_mistakes(
    data: Dataset, cfg: TrainConfig, permutations: int, seed: int = 0
) -> float:
    counts = permutation_mistakes(data, cfg, permutations, seed)
    return sum(counts) / len(counts)


@dataclass
class BoundReport:
    M_observed: int
    m: int
    loss: str
    lam: float
    eta: float
    R: float
    G: float
    norm_u: float
    comparator_source: str
    L_u: float | None = None
    delta_u: float | None = None
    delta_bar_u: float | None = None
    lambda_delta_u: float | None = None
    separable: bool = False
    gamma: float | None = None
    eta_optimal: float | None = None
    bound_theorem1: float | None = None
    bound_theorem1_at_eta: float | None = None
    bound_separable: float | None = None
    regret_observed: float | None = None
    regret_bound: float | None = None
    theorem1_applicable: bool = False
    theorem1_satisfied: bool | None = None
    theorem1_at_eta_satisfied: bool | None = None
    separable_satisfied: bool | None = None
    regret_satisfied: bool | None = None
    expected_mistakes: float | None = None
    permutations: int = 0
    online_to_batch: float | None = None
    enforced: list[str] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


# regret slack for floating-point summation
REGRET_TOL = 1e-9


def bound_report(
    run: TrainingRun,
    data: Dataset,
    comparator: Comparator,
    permutations: int = 0,
    seed: int = 0,
) -> BoundReport:
    """Evaluate every bound for an on_error vRDA run against ``comparator``.

    The mistake bounds whose derivation applies to the run are listed in
    ``enforced``; any of those that fail land in ``violations``.
    """
    cfg_d = run.config
    if cfg_d.get("algo") != "vrda" or cfg_d.get("policy") != ON_ERROR:
        raise ValueError("bound reports are defined for on_error vRDA runs")
    cfg = TrainConfig.from_dict(cfg_d)
    u = comparator.u
    if u.dim != data.dim:
        raise ValueError(f"comparator dim {u.dim} does not match dataset dim {data.dim}")
    M = run.mistakes
    R = data_radius(data)
    G = gradient_bound(run, data)
    norm_u = l2_norm(u)
    rep = BoundReport(
        M_observed=M,
        m=len(data),
        loss=cfg.loss.value,
        lam=cfg.reg.weight,
        eta=cfg.eta,
        R=R,
        G=G,
        norm_u=norm_u,
        comparator_source=comparator.source,
    )
    if comparator.data_dependent:
        rep.warnings.append("comparator derived from the run itself; bounds are diagnostic only")
    if norm_u > 0:
        rep.separable, rep.gamma = check_separability(u, data)
        rep.eta_optimal = optimal_eta(G, norm_u)
    if cfg.epochs != 1:
        rep.warnings.append("mistake bounds are certified for single-epoch runs only")

    if permutations:
        rep.permutations = permutations
        rep.expected_mistakes = estimate_expected_mistakes(data, cfg, permutations, seed)
        rep.online_to_batch = online_to_batch_bound(rep.expected_mistakes, len(data))

    if M == 0:
        rep.warnings.append("no mistakes: relative strength and regret are undefined")
        return rep

    rep.L_u = subsequence_loss(u, data, run.mistake_indices, cfg.loss)
    rep.delta_u, rep.delta_bar_u = relative_strength(u, run, cfg.reg)
    rep.lambda_delta_u = cfg.reg.weight * rep.delta_u
    rep.regret_observed = regret_observed(u, run, data, cfg.reg)
    rep.regret_bound = regret_bound(G, norm_u, cfg.eta, M)
    rep.regret_satisfied = rep.regret_observed <= rep.regret_bound + REGRET_TOL

    rep.bound_theorem1 = theorem1_bound(rep.L_u, G, norm_u, rep.lambda_delta_u)
    rep.bound_theorem1_at_eta = mistake_bound_at_eta(
        rep.L_u, G, norm_u, cfg.eta, rep.lambda_delta_u
    )
    rep.theorem1_applicable = rep.bound_theorem1 is not None
    if rep.theorem1_applicable:
        rep.theorem1_satisfied = M <= rep.bound_theorem1
        rep.theorem1_at_eta_satisfied = M <= rep.bound_theorem1_at_eta
    if rep.separable and rep.gamma is not None:
        rep.bound_separable = separable_bound(R, rep.gamma, rep.lambda_delta_u)
        if rep.bound_separable is not None:
            rep.separable_satisfied = M <= rep.bound_separable

    rep.enforced.append("regret")
    # natural-log logistic loss is only >= ln 2 on mistakes, so M <= sum of losses fails
    surrogate_ok = cfg.loss is not LossKind.LOGISTIC
    if not surrogate_ok:
        rep.warnings.append("logistic loss (natural log) does not upper-bound the 0-1 loss")
    if surrogate_ok and rep.theorem1_applicable:
        rep.enforced.append("theorem1_at_eta")
        eta_is_optimal = rep.eta_optimal is not None and math.isclose(
            cfg.eta, rep.eta_optimal, rel_tol=1e-9
        )
        # with lam = 0 the mistake sequence does not depend on eta
        if cfg.reg.weight == 0.0 or eta_is_optimal:
            rep.enforced.append("theorem1")
            if rep.bound_separable is not None and cfg.loss is LossKind.HINGE:
                rep.enforced.append("separable")
    checks = {
        "regret": rep.regret_satisfied,
        "theorem1": rep.theorem1_satisfied,
        "theorem1_at_eta": rep.theorem1_at_eta_satisfied,
        "separable": rep.separable_satisfied,
    }
    rep.violations = [name for name in rep.enforced if checks[name] is False]
    if comparator.data_dependent:
        rep.violations = []
    return rep
