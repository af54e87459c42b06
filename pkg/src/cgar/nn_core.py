"""Dense MLPs in float64 numpy with hand-written reverse mode and Adam.

Inputs may be a single vector ``(n_in,)`` or a batch ``(B, n_in)``. For a
batch, parameter gradients are summed over the batch, so callers that want
a mean loss scale the upstream cotangent by ``1/B`` themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("relu", "tanh", "identity")


class ContractError(ValueError):
    """Shape or argument contract violated."""


class NumericError(ArithmeticError):
    """A non-finite value appeared where a finite one is required."""


@dataclass
class MlpParams:
    layer_sizes: list[int]
    weights: list[np.ndarray]  # weights[i] has shape (layer_sizes[i], layer_sizes[i+1])
    biases: list[np.ndarray]
    activation: str = "relu"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ContractError(f"unknown activation {self.activation!r}")
        if len(self.layer_sizes) < 2 or any(int(n) <= 0 for n in self.layer_sizes):
            raise ContractError(f"bad layer_sizes {self.layer_sizes}")
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ContractError("number of weight/bias arrays does not match layer_sizes")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            n_in, n_out = self.layer_sizes[i], self.layer_sizes[i + 1]
            if w.shape != (n_in, n_out) or b.shape != (n_out,):
                raise ContractError(
                    f"layer {i}: expected W{(n_in, n_out)} b{(n_out,)}, got W{w.shape} b{b.shape}"
                )

    @property
    def n_in(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_out(self) -> int:
        return self.layer_sizes[-1]

    def arrays(self) -> list[np.ndarray]:
        """Weights and biases interleaved: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def with_arrays(self, arrays: list[np.ndarray]) -> "MlpParams":
        return MlpParams(list(self.layer_sizes), list(arrays[0::2]), list(arrays[1::2]), self.activation)

    def copy(self) -> "MlpParams":
        return self.with_arrays([a.copy() for a in self.arrays()])

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())


@dataclass
class GradBuffer:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input: np.ndarray | None = None

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    @classmethod
    def zeros_like(cls, params: MlpParams) -> "GradBuffer":
        return cls([np.zeros_like(w) for w in params.weights], [np.zeros_like(b) for b in params.biases])

    def __add__(self, other: "GradBuffer") -> "GradBuffer":
        inp = None
        if self.input is not None and other.input is not None:
            inp = self.input + other.input
        return GradBuffer(
            [a + b for a, b in zip(self.weights, other.weights)],
            [a + b for a, b in zip(self.biases, other.biases)],
            inp,
        )


def init_mlp(layer_sizes, rng: np.random.Generator, activation: str = "relu") -> MlpParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases."""
    weights, biases = [], []
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = 1.0 / np.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
        biases.append(rng.uniform(-bound, bound, size=(n_out,)))
    return MlpParams([int(n) for n in layer_sizes], weights, biases, activation)


def _act(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return z


def _act_grad(name, z, h, g):
    # g is the cotangent of h = act(z)
    if name == "relu":
        return g * (z > 0)
    if name == "tanh":
        return g * (1.0 - h * h)
    return g


def _check_input(params, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != params.n_in:
        raise ContractError(f"input shape {x.shape} incompatible with n_in={params.n_in}")
    return x


@dataclass
class Trace:
    """Saved forward pass: output plus the inputs/pre-activations of each layer."""

    output: np.ndarray
    hs: list
    zs: list


def mlp_trace(params: MlpParams, x) -> Trace:
    x = _check_input(params, x)
    hs, zs = [x], []
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        if i < last:
            zs.append(z)
            h = _act(params.activation, z)
            hs.append(h)
        else:
            h = z
    return Trace(h, hs, zs)


def mlp_forward(params: MlpParams, x) -> np.ndarray:
    return mlp_trace(params, x).output


def mlp_backward(params: MlpParams, x, upstream, trace: Trace | None = None, param_grads: bool = True) -> GradBuffer:
    """Gradients of ``<upstream, mlp_forward(params, x)>`` w.r.t. parameters and input.

    Pass ``trace`` from an earlier ``mlp_trace(params, x)`` to skip the
    forward pass. With ``param_grads=False`` only ``.input`` is filled in.
    """
    if trace is None:
        trace = mlp_trace(params, x)
    g = np.asarray(upstream, dtype=np.float64)
    if g.shape != trace.output.shape:
        raise ContractError(f"upstream shape {g.shape} != output shape {trace.output.shape}")
    n = len(params.weights)
    gw, gb = [None] * n, [None] * n
    batched = g.ndim == 2
    for i in range(n - 1, -1, -1):
        if param_grads:
            h_in = trace.hs[i]
            if batched:
                gw[i] = h_in.T @ g
                gb[i] = g.sum(axis=0)
            else:
                gw[i] = np.outer(h_in, g)
                gb[i] = g.copy()
        g = g @ params.weights[i].T
        if i > 0:
            g = _act_grad(params.activation, trace.zs[i - 1], trace.hs[i], g)
    if not param_grads:
        return GradBuffer([], [], g)
    return GradBuffer(gw, gb, g)


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_arrays(cls, arrays, **kw) -> "AdamState":
        return cls([np.zeros_like(a) for a in arrays], [np.zeros_like(a) for a in arrays], **kw)

    @classmethod
    def for_params(cls, params: MlpParams, **kw) -> "AdamState":
        return cls.for_arrays(params.arrays(), **kw)


def adam_update(arrays, grads, state: AdamState, lr: float):
    """One bias-corrected Adam step on a list of arrays. Returns (new_arrays, new_state)."""
    if not lr > 0:
        raise ContractError(f"learning rate must be positive, got {lr}")
    if len(arrays) != len(grads) or len(arrays) != len(state.m):
        raise ContractError("arrays, grads and Adam moments differ in length")
    for a, g, m in zip(arrays, grads, state.m):
        if np.shape(a) != np.shape(g) or np.shape(a) != np.shape(m):
            raise ContractError(f"shape mismatch {np.shape(a)} / {np.shape(g)} / {np.shape(m)}")
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient; Adam update rejected")
    b1, b2 = state.beta1, state.beta2
    t = state.t + 1
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    new_arrays, new_m, new_v = [], [], []
    for a, g, m, v in zip(arrays, grads, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        new_arrays.append(a - lr * (m / c1) / (np.sqrt(v / c2) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return new_arrays, AdamState(new_m, new_v, t, b1, b2, state.eps)


def adam_step(params: MlpParams, grads: GradBuffer, state: AdamState, lr: float):
    new_arrays, new_state = adam_update(params.arrays(), grads.arrays(), state, lr)
    return params.with_arrays(new_arrays), new_state
