import numpy as np
import pytest

from vrda.analysis import check_separability, data_radius, optimal_eta, perceptron_bound
from vrda.baselines import train_perceptron, train_truncated_gradient
from vrda.core import Dataset, Example, SparseVector, l2_norm
from vrda.dataio import SynthSpec, generate
from vrda.losses import loss_subgradient
from vrda.predictor import evaluate
from vrda.regularization import RegularizerSpec
from vrda.trainer import TrainConfig, train

from conftest import sv


@pytest.fixture(scope="module")
def separable_sets():
    return [generate(SynthSpec("separable", 500, 60, 0.06, 0.15, seed=s)) for s in range(20)]


def test_perceptron_mistake_bound(separable_sets):
    for data, u in separable_sets:
        _, gamma = check_separability(u, data)
        R = data_radius(data)
        run = train_perceptron(data)
        assert run.mistakes <= perceptron_bound(R, gamma)
        assert run.mistakes <= 2 * (R / gamma) ** 2


def test_perceptron_single_update():
    x = sv({0: 1.0, 2: -3.0}, 3)
    run = train_perceptron(Dataset((Example(x, -1),), 3))
    assert run.mistakes == 1
    assert run.snapshots[1].w == x.scale(-1.0)


def test_unregularized_vrda_matches_perceptron_mistakes(separable_sets):
    for data, u in separable_sets[:5]:
        p = train_perceptron(data, epochs=2)
        v = train(data, TrainConfig("hinge", RegularizerSpec("none"), 0.37, epochs=2))
        assert p.mistake_indices == v.mistake_indices


@pytest.mark.parametrize("variant", ["voted", "averaged"])
def test_perceptron_run_structure(separable_sets, variant):
    data, _ = separable_sets[0]
    run = train_perceptron(data, epochs=3, variant=variant)
    assert len(run.snapshots) == run.mistakes + 1
    assert sum(s.c for s in run.snapshots) == 3 * len(data)
    changes = [i for i in range(1, len(run.snapshots)) if run.snapshots[i].w != run.snapshots[i - 1].w]
    assert len(changes) == run.mistakes
    assert evaluate("vote" if variant == "voted" else "average", run, data).accuracy > 0.9


def _dense_gd_trace(data, eta):
    w = np.zeros(data.dim)
    for ex in data:
        g = loss_subgradient("hinge", SparseVector.from_dense(w), ex)
        w = w - eta * np.array(g.to_dense())
    return w


def test_truncated_gradient_without_penalty_is_plain_gd():
    rng = np.random.default_rng(2)
    examples = tuple(
        Example(SparseVector.from_dense(rng.normal(size=4)), int(rng.choice([1, -1]))) for _ in range(5)
    )
    data = Dataset(examples, 4)
    run = train_truncated_gradient(data, "hinge", lam=0.0, eta=0.3)
    np.testing.assert_array_equal(np.array(run.final.to_dense()), _dense_gd_trace(data, 0.3))


def test_truncation_decays_untouched_coordinate():
    first = Example(sv({0: 1.0}, 2), 1)
    rest = tuple(Example(sv({1: 1.0}, 2), 1) for _ in range(6))
    data = Dataset((first,) + rest, 2)
    run = train_truncated_gradient(data, "hinge", lam=0.25, eta=1.0)
    coord0 = [snap.w[0] for snap in run.snapshots[1:]]
    # 1 - 0.25 after the first step, then 0.75 / 0.25 = 3 further truncations
    assert coord0[:4] == [0.75, 0.5, 0.25, 0.0]
    assert all(v == 0.0 for v in coord0[4:])


def test_huge_penalty_pins_weights_at_zero():
    data, _ = generate(SynthSpec("noisy", 200, 20, 0.05, 0.3, flip_rate=0.2, seed=4))
    run = train_truncated_gradient(data, "hinge", lam=1e6, eta=0.5)
    assert run.final.entries == {}
    assert run.mistakes == sum(1 for ex in data if ex.y == -1)


def test_truncated_gradient_run_structure():
    data, _ = generate(SynthSpec("noisy", 200, 20, 0.05, 0.3, flip_rate=0.1, seed=5))
    run = train_truncated_gradient(data, "logistic", lam=1e-3, eta=0.2, truncation_period=3, epochs=2)
    assert run.update_count == 2 * len(data)
    assert sum(s.c for s in run.snapshots) == 2 * len(data)
    assert len(run.cumulative_mistakes_curve) == 2 * len(data)


def test_baseline_argument_validation():
    data = Dataset((Example(sv({0: 1.0}), 1),), 10)
    with pytest.raises(ValueError):
        train_perceptron(data, variant="kernel")
    with pytest.raises(ValueError):
        train_truncated_gradient(data, truncation_period=0)
    with pytest.raises(ValueError):
        train_perceptron(Dataset((), 10))


def test_sparsity_ordering_trend():
    """Final-model NNZ: vRDA-l1 <= TG <= perceptron, over ten seeds."""
    wins = 0
    for seed in range(10):
        data, u = generate(SynthSpec("noisy", 1500, 200, 0.05, 0.1, flip_rate=0.05, seed=seed))
        train_part, test_part = data[:1000], data[1000:]
        eta = optimal_eta(data_radius(train_part), l2_norm(u.u))
        runs = {
            "vrda": train(train_part, TrainConfig("hinge", RegularizerSpec("l1", 1e-3), eta)),
            "tg": train_truncated_gradient(train_part, "hinge", 1e-3, 0.1),
            "perceptron": train_perceptron(train_part),
        }
        nnz = {k: len(r.final.entries) for k, r in runs.items()}
        acc = {k: evaluate("average", r, test_part).accuracy for k, r in runs.items()}
        assert max(acc.values()) - min(acc.values()) < 0.1
        wins += nnz["vrda"] <= nnz["tg"] <= nnz["perceptron"]
    assert wins >= 8
