"""Product-integration weights for the power kernel ``w**(-p)``.

Every routine here integrates the piecewise-linear interpolant of nodal data
exactly against the singular kernel, so the only error left is interpolation
error. Nodes are uniform with spacing ``h``; a "cell at distance m" spans
``w in [m*h, (m+1)*h]`` measured from the anchor node.
"""

import numpy as np
from scipy.signal import fftconvolve

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_GL_S = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def cell_moments(m, h, p):
    """Return ``(Q0, Q1)`` with ``Q0 = int w^-p dw`` and
    ``Q1 = int ((w - m h)/h) w^-p dw`` over cell ``m``.

    ``Q0[0]`` is ``inf`` when ``p >= 1``.
    """
    m = np.asarray(m, dtype=float)
    scale = h ** (1.0 - p)
    q0 = np.empty_like(m)
    q1 = np.empty_like(m)
    zero = m == 0
    q0[zero] = 1.0 / (1.0 - p) if p < 1 else np.inf
    q1[zero] = 1.0 / (2.0 - p)
    mm = m[~zero][:, None]
    # Gauss-Legendre is spectrally accurate here: the nearest singularity is at s = -m <= -1.
    kern = (mm + _GL_S[None, :]) ** (-p)
    q0[~zero] = kern @ _GL_W
    q1[~zero] = kern @ (_GL_W * _GL_S)
    return q0 * scale, q1 * scale


def left_difference_integrals(v, h, p):
    """``J[k] = int_{x_0}^{x_k} (v(x_k) - v(y)) (x_k - y)^-p dy`` for all k.

    ``v`` holds nodal values; ``p < 2``. Computed as a convolution, so the
    cost is ``O(M log M)``.
    """
    v = np.asarray(v, dtype=float)
    M = v.size - 1
    if M < 1:
        return np.zeros_like(v)
    q0, q1 = cell_moments(np.arange(M), h, p)
    A = q0 - q1
    A[0] = 0.0  # multiplied by v_k - v_k = 0
    B = q1
    total = np.concatenate(([0.0], np.cumsum(A + B)))
    conv_a = fftconvolve(v, A)[: M + 1]
    conv_a -= v[0] * np.concatenate((A, [0.0]))
    conv_b = np.concatenate(([0.0], fftconvolve(v, B)[:M]))
    J = v * total - conv_a - conv_b
    J[0] = 0.0
    return J


def right_difference_integrals(v, h, p):
    """Mirror of :func:`left_difference_integrals`:
    ``J[k] = int_{x_k}^{x_M} (v(x_k) - v(y)) (y - x_k)^-p dy``."""
    v = np.asarray(v, dtype=float)
    return left_difference_integrals(v[::-1], h, p)[::-1]


def forward_kernel_integrals(v, h, p):
    """``S[k] = int_{x_k}^{x_M} v(y) (y - x_k)^-p dy`` for all k, with ``p < 1``."""
    v = np.asarray(v, dtype=float)
    M = v.size - 1
    if M < 1:
        return np.zeros_like(v)
    q0, q1 = cell_moments(np.arange(M), h, p)
    # correlation: the near node of cell m seen from x_k is k + m
    near = fftconvolve(v[:-1], (q0 - q1)[::-1])[M - 1 :]
    far = fftconvolve(v[1:], q1[::-1])[M - 1 :]
    return np.concatenate((near + far, [0.0]))


def _signed_piece(c0, c1, wa, wb, p):
    i0 = np.where(c0 == 0.0, 0.0, c0 * (wb ** (1.0 - p) - _safe_pow(wa, 1.0 - p)) / (1.0 - p))
    i1 = c1 * (wb ** (2.0 - p) - wa ** (2.0 - p)) / (2.0 - p)
    return i0 + i1


def _safe_pow(w, q):
    with np.errstate(divide="ignore"):
        out = np.where(w > 0, w, 1.0) ** q
    return np.where(w > 0, out, 0.0 if q > 0 else np.inf)


def abs_cell_integrals(e_near, e_far, m, h, p):
    """``int |e(w)| w^-p dw`` over cells at distance ``m`` with ``e`` linear.

    ``e_near`` is the value at ``w = m h`` and ``e_far`` at ``(m+1) h``. On a
    cell touching the anchor (``m == 0``) the near value must be 0.
    Sign changes inside a cell are split at the root.
    """
    e_near = np.asarray(e_near, dtype=float)
    e_far = np.asarray(e_far, dtype=float)
    m = np.broadcast_to(np.asarray(m, dtype=float), e_near.shape)
    w0 = m * h
    w1 = w0 + h
    c1 = (e_far - e_near) / h
    c0 = e_near - c1 * w0
    c0 = np.where(m == 0, 0.0, c0)
    cross = (e_near * e_far) < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.where(cross, w0 - e_near / c1, w1)
    with np.errstate(invalid="ignore", divide="ignore"):
        first = np.abs(_signed_piece(c0, c1, w0, root, p))
        second = np.where(cross, np.abs(_signed_piece(c0, c1, root, w1, p)), 0.0)
    return first + second


def weights_left_singular(M, h, p):
    """Nodal weights ``w_k`` with ``sum w_k f_k = int_{0}^{M h} f(x) x^-p dx``
    for piecewise-linear ``f`` (``p < 1``)."""
    q0, q1 = cell_moments(np.arange(M), h, p)
    w = np.zeros(M + 1)
    w[:-1] += q0 - q1
    w[1:] += q1
    return w
