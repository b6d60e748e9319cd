import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vrda.analysis import (
    Comparator,
    bound_report,
    check_separability,
    data_radius,
    estimate_expected_mistakes,
    mistake_bound_at_eta,
    online_to_batch_bound,
    optimal_eta,
    permutation_mistakes,
    quadratic_bound,
    regret_bound,
    regret_observed,
    relative_strength,
    separable_bound,
    subsequence_loss,
    theorem1_bound,
)
from vrda.core import Dataset, Example, l2_norm
from vrda.dataio import SynthSpec, generate
from vrda.regularization import RegularizerSpec
from vrda.trainer import TrainConfig, train

from conftest import sv


def two_point_data():
    return Dataset((Example(sv({0: 1.0}, 2), -1), Example(sv({1: 1.0}, 2), -1)), 2)


U = sv({0: -1.0, 1: -1.0}, 2)


@pytest.mark.parametrize(
    "abc, expected",
    [
        ((1.0, 0.0, 4.0), (4.0, 4.0)),
        ((1.0, 1.0, 0.0), (1.0, 1.0)),
        ((1.0, 2.0, 3.0), (7.0 + 2.0 * math.sqrt(3.0), (math.sqrt(3.0) + 2.0) ** 2)),
    ],
)
def test_quadratic_bound_examples(abc, expected):
    mid, outer = quadratic_bound(*abc)
    assert mid == pytest.approx(expected[0], rel=1e-12)
    assert outer == pytest.approx(expected[1], rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0.01, 10.0),
    st.floats(0.0, 50.0),
    st.floats(0.0, 50.0),
    st.floats(0.0, 1.0),
)
def test_quadratic_bound_is_sound(a, b, c, t):
    mid, outer = quadratic_bound(a, b, c)
    assert mid <= outer * (1 + 1e-12)
    # any x satisfying the inequality sits below both bounds
    x = t * mid
    if a * x - b * math.sqrt(x) - c <= 0:
        assert x <= mid * (1 + 1e-12)
    # and mid itself is feasible or on the boundary up to rounding
    assert a * mid - b * math.sqrt(mid) - c >= -1e-9 * max(1.0, a * mid)


def test_quadratic_bound_rejects_bad_coefficients():
    with pytest.raises(ValueError):
        quadratic_bound(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        quadratic_bound(1.0, -1.0, 1.0)


def test_theorem1_bound_examples():
    assert theorem1_bound(0.0, 1.0, 10.0, 0.0) == pytest.approx(200.0)
    assert theorem1_bound(5.0, 1.0, 1.0, 1.5) is None
    assert theorem1_bound(2.0, 1.0, 1.0, 0.0) == pytest.approx((math.sqrt(2.0) + math.sqrt(2.0)) ** 2)
    assert theorem1_bound(1.0, 1.0, 1.0, 0.5) == pytest.approx((math.sqrt(2.0) + 2 * math.sqrt(2.0)) ** 2)


def test_separable_and_eta_bounds():
    assert separable_bound(1.0, 0.1) == pytest.approx(200.0)
    assert separable_bound(1.0, 0.1, 0.5) == pytest.approx(800.0)
    assert separable_bound(1.0, 0.1, 1.0) is None
    assert optimal_eta(1.0, 2.0) == pytest.approx(math.sqrt(2.0) / 2.0)
    # at the optimal step size the general bound reduces to the closed form
    G, nu, L = 1.3, 4.0, 7.0
    eta = optimal_eta(G, nu)
    assert mistake_bound_at_eta(L, G, nu, eta, 0.2) == pytest.approx(theorem1_bound(L, G, nu, 0.2))
    assert regret_bound(G, nu, eta, 9) == pytest.approx(math.sqrt(2.0) * G * nu * 3.0)
    assert mistake_bound_at_eta(L, G, nu, eta, 1.0) is None


def test_online_to_batch():
    assert online_to_batch_bound(10.0, 99) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        online_to_batch_bound(1.0, 0)


def test_unregularized_hand_trace():
    data = two_point_data()
    run = train(data, TrainConfig("hinge", RegularizerSpec("none"), 1.0))
    assert run.mistakes == 2
    assert run.snapshots[1].w == sv({0: -1.0}, 2)
    reg = RegularizerSpec("none")
    assert regret_observed(U, run, data, reg) == pytest.approx(2.0)
    assert 2.0 <= regret_bound(1.0, math.sqrt(2.0), 1.0, 2) == pytest.approx(2 * math.sqrt(2.0))
    assert subsequence_loss(U, data, run.mistake_indices, "hinge") == 0.0


def test_l1_hand_trace():
    data = two_point_data()
    reg = RegularizerSpec("l1", 0.5)
    run = train(data, TrainConfig("hinge", reg, 1.0))
    assert run.mistakes == 2
    assert run.snapshots[1].w == sv({0: -0.5}, 2)
    assert run.final.entries == {}
    delta, delta_bar = relative_strength(U, run, reg)
    assert delta == pytest.approx(1.75)
    assert delta_bar == pytest.approx(1.75)
    assert regret_observed(U, run, data, reg) == pytest.approx(0.25)


def test_subsequence_loss_hand_trace():
    data = Dataset(
        (
            Example(sv({0: 1.0}, 3), 1),
            Example(sv({1: 1.0}, 3), -1),
            Example(sv({2: 1.0}, 3), 1),
            Example(sv({0: 1.0, 1: 1.0}, 3), 1),
        ),
        3,
    )
    u = sv({0: 0.5, 1: 2.0, 2: -1.0}, 3)
    # margins 0.5, -2, -1 on samples 0, 1, 2; sample 3 is excluded
    assert subsequence_loss(u, data, [(0, 0), (0, 1), (0, 2)], "hinge") == pytest.approx(0.5 + 3.0 + 2.0)
    assert subsequence_loss(u, data, [(0, 0), (1, 0)], "hinge") == pytest.approx(1.0)
    with pytest.raises(IndexError):
        subsequence_loss(u, data, [(0, 4)], "hinge")


def test_check_separability_and_radius():
    data = two_point_data()
    ok, gamma = check_separability(U, data)
    assert ok and gamma == pytest.approx(1 / math.sqrt(2.0))
    ok, _ = check_separability(U.scale(0.5), data)
    assert not ok
    with pytest.raises(ValueError):
        check_separability(sv({}, 2), data)
    assert data_radius(data) == 1.0


def test_relative_strength_never_exceeds_jensen_gap():
    rng = random.Random(3)
    data, u = generate(SynthSpec("noisy", 300, 30, 0.05, 0.3, flip_rate=0.1, seed=1))
    for kind in ("l1", "l2"):
        reg = RegularizerSpec(kind, 1e-3)
        run = train(data, TrainConfig("hinge", reg, rng.uniform(0.1, 3.0)))
        delta, delta_bar = relative_strength(u, run, reg)
        assert delta <= delta_bar + 1e-12


def test_permutation_estimator():
    data, _ = generate(SynthSpec("separable", 200, 20, 0.08, 0.3, seed=2))
    cfg = TrainConfig("hinge", RegularizerSpec("none"), 1.0)
    counts = permutation_mistakes(data, cfg, 5, seed=11)
    assert counts == permutation_mistakes(data, cfg, 5, seed=11)
    assert len(counts) == 5
    single = permutation_mistakes(data, cfg, 1, seed=0)
    assert estimate_expected_mistakes(data, cfg, 1, seed=0) == single[0]
    # a dataset of identical examples is order-invariant
    dup = Dataset((data[0],) * 30, data.dim)
    assert len(set(permutation_mistakes(dup, cfg, 6))) == 1
    with pytest.raises(ValueError):
        permutation_mistakes(data, cfg, 0)


def test_bound_report_separable():
    data, u = generate(SynthSpec("separable", 800, 50, 0.05, 0.2, seed=6))
    G = data_radius(data)
    eta = optimal_eta(G, l2_norm(u.u))
    run = train(data, TrainConfig("hinge", RegularizerSpec("l1", 1e-4), eta))
    rep = bound_report(run, data, u, permutations=3)
    assert rep.M_observed == run.mistakes
    assert rep.separable
    assert set(rep.enforced) == {"regret", "theorem1_at_eta", "theorem1", "separable"}
    assert rep.violations == []
    assert rep.M_observed <= rep.bound_separable
    assert rep.online_to_batch == pytest.approx(2 * rep.expected_mistakes / 801)
    assert rep.to_dict()["comparator_source"] == "generator"


def test_bound_report_logistic_not_enforced():
    data, u = generate(SynthSpec("noisy", 300, 30, 0.05, 0.3, flip_rate=0.1, seed=3))
    run = train(data, TrainConfig("logistic", RegularizerSpec("none"), 0.5))
    rep = bound_report(run, data, u)
    assert rep.enforced == ["regret"]
    assert rep.regret_satisfied
    assert any("logistic" in w for w in rep.warnings)


def test_bound_report_without_mistakes_and_bad_inputs():
    data = Dataset((Example(sv({0: 1.0}, 2), 1),), 2)
    run = train(data, TrainConfig("hinge", RegularizerSpec("none"), 1.0))
    rep = bound_report(run, data, Comparator(sv({0: 2.0}, 2), "supplied"))
    assert rep.M_observed == 0 and rep.L_u is None and rep.violations == []
    with pytest.raises(ValueError):
        bound_report(run, data, Comparator(sv({0: 1.0}, 3), "supplied"))
    every = train(data, TrainConfig("hinge", RegularizerSpec("none"), 1.0, policy="every_step"))
    with pytest.raises(ValueError):
        bound_report(every, data, Comparator(sv({0: 1.0}, 2), "supplied"))


def test_data_dependent_comparator_is_diagnostic():
    data, _ = generate(SynthSpec("noisy", 300, 30, 0.05, 0.3, flip_rate=0.3, seed=8))
    run = train(data, TrainConfig("hinge", RegularizerSpec("l1", 1e-3), 1.0))
    rep = bound_report(run, data, Comparator(run.averaged(), "averaged"))
    assert rep.violations == []
    assert any("diagnostic" in w for w in rep.warnings)
