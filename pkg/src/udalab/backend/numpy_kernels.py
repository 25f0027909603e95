"""Reference NumPy implementations of the hot per-iteration kernels.

The compiled module ``_speedups`` mirrors every function here with the same
signature and the same floating-point recipe (stable sigmoid branches,
max-shifted softmax), so either backend can serve the autodiff layer.
All arrays are 2-D C-contiguous float64.
"""

import numpy as np

NAME = "numpy"


def relu(x):
    return np.maximum(x, 0.0)


def relu_backward(grad, x):
    return np.where(x > 0.0, grad, 0.0)


def sigmoid(x):
    # Branch on sign so exp never overflows.
    out = np.empty_like(x)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(grad, out):
    return grad * out * (1.0 - out)


def clip(x, lo, hi):
    return np.clip(x, lo, hi)


def clip_backward(grad, x, lo, hi):
    return np.where((x >= lo) & (x <= hi), grad, 0.0)


def softmax_rows(x):
    shifted = x - x.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=1, keepdims=True)


def softmax_rows_backward(grad, out):
    inner = (grad * out).sum(axis=1, keepdims=True)
    return out * (grad - inner)


def sgd_momentum_update(param, grad, velocity, lr, momentum, weight_decay):
    """In-place heavy-ball step: v <- m*v + g + wd*p; p <- p - lr*v."""
    velocity *= momentum
    velocity += grad
    if weight_decay != 0.0:
        velocity += weight_decay * param
    param -= lr * velocity
