import numpy as np
import pytest
from scipy.stats import norm

from cgar import distill
from cgar.distill import (
    generate_dataset,
    mean_curves,
    nearest_center_accuracy,
    read_csv,
    run_demo,
    train_pair,
    train_pair_ce,
    train_pair_mse,
    write_csv,
)
from cgar.nn_core import ContractError

from .fd import max_rel_error, numeric_grad


@pytest.fixture(scope="module")
def demo_rows():
    return {v: run_demo(v, seeds=range(5), epochs=15) for v in ("ce", "mse")}


def test_dataset_shape_and_split():
    ds = generate_dataset(n_per_class=250, n_classes=4, spread=0.8, seed=0)
    assert ds.inputs.shape == (1000, 2) and ds.labels.shape == (1000,)
    assert len(np.intersect1d(ds.train_idx, ds.eval_idx)) == 0
    assert len(ds.train_idx) == 800 and len(ds.eval_idx) == 200
    for idx in (ds.train_idx, ds.eval_idx):
        counts = np.bincount(ds.labels[idx], minlength=4)
        assert counts.max() - counts.min() <= 1
    np.testing.assert_allclose(np.linalg.norm(ds.centers, axis=1), 2.0, rtol=1e-15)


def test_dataset_seeded_and_requires_two_classes():
    a, b = generate_dataset(seed=3), generate_dataset(seed=3)
    assert np.array_equal(a.inputs, b.inputs) and np.array_equal(a.eval_idx, b.eval_idx)
    assert not np.array_equal(a.inputs, generate_dataset(seed=4).inputs)
    with pytest.raises(ContractError):
        generate_dataset(n_classes=1)


def test_zero_spread_is_separable():
    ds = generate_dataset(n_per_class=50, n_classes=5, spread=0.0, seed=1)
    assert nearest_center_accuracy(ds) == 1.0
    h = train_pair_ce(ds, epochs=30, seed=1)
    assert h["acc_m1"][-1] == 1.0


def test_nearest_center_matches_closed_form():
    # four centres: decision regions are quadrants in the 45-degree frame, so
    # accuracy = Phi(sqrt(2) / spread)^2
    ds = generate_dataset(n_per_class=20_000, n_classes=4, spread=0.5, seed=3)
    p = norm.cdf(np.sqrt(2) / 0.5) ** 2
    se = np.sqrt(p * (1 - p) / len(ds.eval_idx))
    assert abs(nearest_center_accuracy(ds) - p) < 4 * se


@pytest.mark.parametrize("variant", ["ce", "mse"])
def test_teacher_loss_gradient(variant):
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(5, 4))
    onehot = np.eye(4)[rng.integers(0, 4, 5)]
    _, g = distill._teacher_loss(variant, logits, onehot)
    num = numeric_grad(lambda: distill._teacher_loss(variant, logits, onehot)[0], [logits])
    assert max_rel_error([g], num) < 1e-6


def test_student_loss_gradient_and_minimum():
    rng = np.random.default_rng(1)
    logits = rng.normal(size=(6, 3))
    target = distill._softmax_rows(rng.normal(size=(6, 3)))
    _, g = distill._student_loss(logits, target)
    num = numeric_grad(lambda: distill._student_loss(logits, target)[0], [logits])
    assert max_rel_error([g], num) < 1e-6
    # at logits reproducing the target the gradient vanishes
    _, g0 = distill._student_loss(np.log(target), target)
    assert np.max(np.abs(g0)) < 1e-15


def test_history_shape_and_architecture():
    ds = generate_dataset(seed=0)
    h = train_pair_mse(ds, epochs=3, seed=0)
    assert len(h["acc_m1"]) == len(h["acc_m2"]) == 4 and h["failed_at"] is None
    s1, s2 = h["layer_sizes"]
    assert s1 == s2 == [2, 16, 16, 4]
    with pytest.raises(ContractError):
        train_pair(ds, variant="kl")


def test_seeded_determinism():
    ds = generate_dataset(seed=2)
    assert train_pair_mse(ds, 4, seed=7) == train_pair_mse(ds, 4, seed=7)
    assert train_pair_ce(ds, 4, seed=7) != train_pair_ce(ds, 4, seed=8)


def test_epoch_zero_near_chance(demo_rows):
    for rows in demo_rows.values():
        _, m1, m2 = mean_curves(rows)
        assert abs(m1[0] - 0.25) < 0.15 and abs(m2[0] - 0.25) < 0.15


@pytest.mark.parametrize("variant", ["ce", "mse"])
def test_teacher_reaches_oracle_ceiling(variant):
    ds = generate_dataset(seed=0)
    h = train_pair(ds, 30, seed=0, variant=variant)
    ceiling = nearest_center_accuracy(ds)
    assert h["acc_m1"][-1] >= ceiling - 0.05
    assert h["acc_m2"][-1] > 0.5


@pytest.mark.parametrize("variant", ["ce", "mse"])
def test_teacher_leads_in_first_half(demo_rows, variant):
    _, m1, m2 = mean_curves(demo_rows[variant])
    assert np.all(m1[1:6] >= m2[1:6])
    # once both sit at the ceiling the gap is eval-sample noise: allow one
    # binomial standard error of an accuracy measured on 5 x 200 points
    se = np.sqrt(m1 * (1 - m1) / 1000)
    assert np.all(m1[6:16] >= m2[6:16] - se[6:16])


def test_csv_round_trip(tmp_path, demo_rows):
    rows = demo_rows["ce"][:20]
    write_csv(rows, tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "seed,epoch,variant,acc_m1,acc_m2"
    assert read_csv(tmp_path / "d.csv") == rows
