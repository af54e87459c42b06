"""Teacher/student lag on a synthetic classification task.

Two MLPs with identical architecture: M1 fits the labels, M2 fits M1's
current predictions. Both are updated alternately on every minibatch and
their eval accuracies are recorded each epoch (epoch 0 is before training).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .nn_core import AdamState, ContractError, NumericError, adam_step, init_mlp, mlp_backward, mlp_forward, mlp_trace

VARIANTS = ("ce", "mse")
CSV_HEADER = ["seed", "epoch", "variant", "acc_m1", "acc_m2"]


@dataclass
class DemoDataset:
    inputs: np.ndarray
    labels: np.ndarray
    train_idx: np.ndarray
    eval_idx: np.ndarray
    centers: np.ndarray

    @property
    def n_classes(self) -> int:
        return len(self.centers)


def generate_dataset(n_per_class=250, n_classes=4, spread=0.8, seed=0, train_frac=0.8) -> DemoDataset:
    """Gaussian blobs centred on a radius-2 circle, split per class."""
    if n_classes < 2:
        raise ContractError("need at least two classes")
    rng = np.random.default_rng(seed)
    angles = 2 * np.pi * np.arange(n_classes) / n_classes
    centers = 2.0 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    labels = np.repeat(np.arange(n_classes), n_per_class)
    inputs = centers[labels] + spread * rng.standard_normal((len(labels), 2))
    n_train = int(round(train_frac * n_per_class))
    train, evals = [], []
    for c in range(n_classes):
        idx = rng.permutation(np.flatnonzero(labels == c))
        train.append(idx[:n_train])
        evals.append(idx[n_train:])
    return DemoDataset(inputs, labels, np.concatenate(train), np.concatenate(evals), centers)


def nearest_center_accuracy(ds: DemoDataset) -> float:
    """Eval accuracy of assigning each point to its closest true centre (Bayes rule for equal isotropic blobs)."""
    x, y = ds.inputs[ds.eval_idx], ds.labels[ds.eval_idx]
    d = ((x[:, None, :] - ds.centers[None]) ** 2).sum(-1)
    return float(np.mean(d.argmin(1) == y))


def _softmax_rows(z):
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def _log_softmax_rows(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def accuracy(params, x, y) -> float:
    return float(np.mean(mlp_forward(params, x).argmax(1) == y))


def _teacher_loss(variant, logits, onehot):
    n = len(logits)
    if variant == "ce":
        loss = -np.mean(np.sum(onehot * _log_softmax_rows(logits), axis=1))
        return loss, (_softmax_rows(logits) - onehot) / n
    diff = logits - onehot
    return np.mean(diff * diff), 2.0 * diff / diff.size


def _student_loss(logits, target):
    """Soft-target cross-entropy against the teacher's class probabilities."""
    loss = -np.mean(np.sum(target * _log_softmax_rows(logits), axis=1))
    return loss, (_softmax_rows(logits) - target) / len(logits)


def train_pair(ds: DemoDataset, epochs=30, seed=0, variant="ce", hidden=(16, 16), lr=1e-3, batch_size=32) -> dict:
    """Returns ``{"acc_m1": [...], "acc_m2": [...], "failed_at": epoch or None}`` with ``epochs + 1`` entries
    on success (fewer if a numeric failure cut the run short)."""
    if variant not in VARIANTS:
        raise ContractError(f"variant must be one of {VARIANTS}")
    rng = np.random.default_rng(seed)
    sizes = [2, *hidden, ds.n_classes]
    m1 = init_mlp(sizes, rng)
    m2 = init_mlp(sizes, rng)
    s1, s2 = AdamState.for_params(m1), AdamState.for_params(m2)
    xe, ye = ds.inputs[ds.eval_idx], ds.labels[ds.eval_idx]
    eye = np.eye(ds.n_classes)
    hist = {"acc_m1": [accuracy(m1, xe, ye)], "acc_m2": [accuracy(m2, xe, ye)], "failed_at": None}
    for epoch in range(1, epochs + 1):
        order = rng.permutation(ds.train_idx)
        try:
            for start in range(0, len(order), batch_size):
                idx = order[start:start + batch_size]
                x, onehot = ds.inputs[idx], eye[ds.labels[idx]]
                # teacher fits the labels
                t1 = mlp_trace(m1, x)
                loss1, up1 = _teacher_loss(variant, t1.output, onehot)
                m1, s1 = adam_step(m1, mlp_backward(m1, x, up1, trace=t1), s1, lr)
                # student fits the teacher's current soft predictions; labels unused
                target = _softmax_rows(mlp_forward(m1, x))
                t2 = mlp_trace(m2, x)
                loss2, up2 = _student_loss(t2.output, target)
                m2, s2 = adam_step(m2, mlp_backward(m2, x, up2, trace=t2), s2, lr)
                if not (np.isfinite(loss1) and np.isfinite(loss2)):
                    raise NumericError(f"non-finite loss in epoch {epoch}")
        except NumericError:
            hist["failed_at"] = epoch
            break
        hist["acc_m1"].append(accuracy(m1, xe, ye))
        hist["acc_m2"].append(accuracy(m2, xe, ye))
    hist["layer_sizes"] = (m1.layer_sizes, m2.layer_sizes)
    return hist


def train_pair_ce(ds, epochs=30, seed=0, **kw):
    return train_pair(ds, epochs, seed, "ce", **kw)


def train_pair_mse(ds, epochs=30, seed=0, **kw):
    return train_pair(ds, epochs, seed, "mse", **kw)


def run_demo(variant="ce", seeds=range(5), epochs=30, dataset_seed=None, **dataset_kw) -> list[dict]:
    """One row per (seed, epoch). Each seed draws its own dataset unless ``dataset_seed`` is given."""
    rows = []
    for seed in seeds:
        ds = generate_dataset(seed=seed if dataset_seed is None else dataset_seed, **dataset_kw)
        h = train_pair(ds, epochs, seed, variant)
        for epoch, (a1, a2) in enumerate(zip(h["acc_m1"], h["acc_m2"])):
            rows.append({"seed": seed, "epoch": epoch, "variant": variant, "acc_m1": a1, "acc_m2": a2})
    return rows


def mean_curves(rows):
    """Seed-mean accuracy per epoch: returns (epochs, mean_m1, mean_m2)."""
    epochs = sorted({r["epoch"] for r in rows})
    m1 = np.array([np.mean([r["acc_m1"] for r in rows if r["epoch"] == e]) for e in epochs])
    m2 = np.array([np.mean([r["acc_m2"] for r in rows if r["epoch"] == e]) for e in epochs])
    return np.array(epochs), m1, m2


def write_csv(rows, path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for r in rows:
            fh.write(f"{r['seed']},{r['epoch']},{r['variant']},{r['acc_m1']!r},{r['acc_m2']!r}\n")
            fh.flush()


def read_csv(path) -> list[dict]:
    import csv

    with open(path, newline="") as fh:
        return [
            {"seed": int(r["seed"]), "epoch": int(r["epoch"]), "variant": r["variant"],
             "acc_m1": float(r["acc_m1"]), "acc_m2": float(r["acc_m2"])}
            for r in csv.DictReader(fh)
        ]
