"""Fully connected tanh networks with exact reverse-mode gradients.

Forward passes return a tape (the per-layer activations) that the backward
pass replays; there is no general autodiff graph.
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from ..errors import ShapeError


@dataclass
class Mlp:
    layer_sizes: tuple
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    @classmethod
    def init(cls, layer_sizes, rng, final_scale=1.0):
        """Glorot-uniform weights, zero biases; ``final_scale`` shrinks the output layer."""
        sizes = tuple(int(s) for s in layer_sizes)
        if len(sizes) < 2 or min(sizes) < 1:
            raise ShapeError(f"bad layer sizes {layer_sizes}")
        ws, bs = [], []
        for k, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            lim = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-lim, lim, size=(fan_in, fan_out))
            if k == len(sizes) - 2:
                w *= final_scale
            ws.append(w)
            bs.append(np.zeros(fan_out))
        return cls(sizes, ws, bs)

    @property
    def params(self):
        """Parameter arrays in a fixed order (w0, b0, w1, b1, ...)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self):
        return Mlp(self.layer_sizes, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def flat(self):
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, vec):
        k = 0
        for p in self.params:
            p[...] = vec[k:k + p.size].reshape(p.shape)
            k += p.size
        if k != vec.size:
            raise ShapeError(f"expected {k} parameters, got {vec.size}")


def mlp_forward(net, x):
    """Forward pass on a vector or a (B, d) batch. Returns ``(output, tape)``."""
    a = np.asarray(x, dtype=float)
    single = a.ndim == 1
    if single:
        a = a[None, :]
    if a.shape[1] != net.layer_sizes[0]:
        raise ShapeError(f"input width {a.shape[1]} != {net.layer_sizes[0]}")
    tape = [a]
    last = len(net.weights) - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        a = a @ w + b
        if k < last:
            a = np.tanh(a)
        tape.append(a)
    out = a[0] if single else a
    return out, (tape, single)


def mlp_backward(net, tape, grad_out):
    """Gradients w.r.t. parameters (same order as ``net.params``) and the input."""
    acts, single = tape
    g = np.asarray(grad_out, dtype=float)
    if single:
        g = g[None, :]
    grads = [None] * (2 * len(net.weights))
    last = len(net.weights) - 1
    for k in range(last, -1, -1):
        if k < last:
            g = g * (1.0 - acts[k + 1] ** 2)
        grads[2 * k] = acts[k].T @ g
        grads[2 * k + 1] = g.sum(axis=0)
        g = g @ net.weights[k].T
    return grads, (g[0] if single else g)


class Adam:
    def __init__(self, params, lr=3e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
