# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``numpy_kernels`` function-for-function."""

from libc.math cimport exp as c_exp

import numpy as np

NAME = "compiled"


def relu(double[:, ::1] x):
    out = np.empty((x.shape[0], x.shape[1]))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            o[i, j] = x[i, j] if x[i, j] > 0.0 else 0.0
    return out


def relu_backward(double[:, ::1] grad, double[:, ::1] x):
    out = np.empty((x.shape[0], x.shape[1]))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            o[i, j] = grad[i, j] if x[i, j] > 0.0 else 0.0
    return out


def sigmoid(double[:, ::1] x):
    out = np.empty((x.shape[0], x.shape[1]))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double v, e
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            v = x[i, j]
            if v >= 0.0:
                o[i, j] = 1.0 / (1.0 + c_exp(-v))
            else:
                e = c_exp(v)
                o[i, j] = e / (1.0 + e)
    return out


def sigmoid_backward(double[:, ::1] grad, double[:, ::1] out_val):
    out = np.empty((out_val.shape[0], out_val.shape[1]))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    for i in range(out_val.shape[0]):
        for j in range(out_val.shape[1]):
            o[i, j] = grad[i, j] * out_val[i, j] * (1.0 - out_val[i, j])
    return out


def clip(double[:, ::1] x, double lo, double hi):
    out = np.empty((x.shape[0], x.shape[1]))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double v
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            v = x[i, j]
            if v < lo:
                v = lo
            elif v > hi:
                v = hi
            o[i, j] = v
    return out


def clip_backward(double[:, ::1] grad, double[:, ::1] x, double lo, double hi):
    out = np.empty((x.shape[0], x.shape[1]))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            o[i, j] = grad[i, j] if lo <= x[i, j] <= hi else 0.0
    return out


def softmax_rows(double[:, ::1] x):
    out = np.empty((x.shape[0], x.shape[1]))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double m, s
    for i in range(x.shape[0]):
        m = x[i, 0]
        for j in range(1, x.shape[1]):
            if x[i, j] > m:
                m = x[i, j]
        s = 0.0
        for j in range(x.shape[1]):
            o[i, j] = c_exp(x[i, j] - m)
            s += o[i, j]
        for j in range(x.shape[1]):
            o[i, j] /= s
    return out


def softmax_rows_backward(double[:, ::1] grad, double[:, ::1] out_val):
    out = np.empty((out_val.shape[0], out_val.shape[1]))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double inner
    for i in range(out_val.shape[0]):
        inner = 0.0
        for j in range(out_val.shape[1]):
            inner += grad[i, j] * out_val[i, j]
        for j in range(out_val.shape[1]):
            o[i, j] = out_val[i, j] * (grad[i, j] - inner)
    return out


def sgd_momentum_update(double[:, ::1] param, double[:, ::1] grad,
                        double[:, ::1] velocity, double lr,
                        double momentum, double weight_decay):
    cdef Py_ssize_t i, j
    cdef double v
    for i in range(param.shape[0]):
        for j in range(param.shape[1]):
            v = momentum * velocity[i, j] + grad[i, j]
            if weight_decay != 0.0:
                v += weight_decay * param[i, j]
            velocity[i, j] = v
            param[i, j] -= lr * v
