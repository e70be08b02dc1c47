"""Sparse difference operators matching the evaluators in ``core``."""

import numpy as np
import scipy.sparse as sp


def trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def line_first(n, h):
    rows = [0, 0, 0, n - 1, n - 1, n - 1]
    cols = [0, 1, 2, n - 3, n - 2, n - 1]
    vals = [-3.0, 4.0, -1.0, 1.0, -4.0, 3.0]
    i = np.arange(1, n - 1)
    rows = np.concatenate([rows, i, i])
    cols = np.concatenate([cols, i - 1, i + 1])
    vals = np.concatenate([vals, -np.ones(n - 2), np.ones(n - 2)])
    return sp.csr_matrix((vals / (2.0 * h), (rows, cols)), shape=(n, n))


def line_second(n, h):
    rows = [0, 0, 0, 0, n - 1, n - 1, n - 1, n - 1]
    cols = [0, 1, 2, 3, n - 4, n - 3, n - 2, n - 1]
    vals = [2.0, -5.0, 4.0, -1.0, -1.0, 4.0, -5.0, 2.0]
    i = np.arange(1, n - 1)
    rows = np.concatenate([rows, i, i, i])
    cols = np.concatenate([cols, i - 1, i, i + 1])
    vals = np.concatenate([vals, np.ones(n - 2), -2.0 * np.ones(n - 2), np.ones(n - 2)])
    return sp.csr_matrix((vals / h**2, (rows, cols)), shape=(n, n))


def periodic_first(n, h):
    i = np.arange(n)
    rows = np.concatenate([i, i])
    cols = np.concatenate([(i + 1) % n, (i - 1) % n])
    vals = np.concatenate([np.ones(n), -np.ones(n)]) / (2.0 * h)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def periodic_second(n, h):
    i = np.arange(n)
    rows = np.concatenate([i, i, i])
    cols = np.concatenate([(i - 1) % n, i, (i + 1) % n])
    vals = np.concatenate([np.ones(n), -2.0 * np.ones(n), np.ones(n)]) / h**2
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
