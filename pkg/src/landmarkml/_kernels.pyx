# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled epoch kernels.

Same contract and arithmetic as landmarkml._kernels_py, with the whole
shuffled-minibatch epoch fused into one call: row gathers, three affine
layers, the backward pass and the SGD updates run over preallocated
buffers with direct BLAS (dgemm) calls, instead of ~40 numpy dispatches
per batch. That overhead is what dominates at this problem's typical
batch shapes (batch 64, feature widths 10..300).
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

BACKEND_NAME = "cython"


cdef void _gemm_rm(bint trans_a, bint trans_b, int m, int n, int k,
                   double alpha, double* A, int lda, double* B, int ldb,
                   double beta, double* C, int ldc) noexcept nogil:
    """Row-major C(m,n) = alpha*op(A)op(B) + beta*C.

    Uses the column-major identity C^T = op(B)^T op(A)^T: swap the
    operands and the (m, n) pair, keep the transpose letters, and pass
    each array's row-major column count as its leading dimension.
    """
    cdef char ta = b'T' if trans_a else b'N'
    cdef char tb = b'T' if trans_b else b'N'
    dgemm(&tb, &ta, &n, &m, &k, &alpha, B, &ldb, A, &lda, &beta, C, &ldc)


cdef inline void _gather(double[:, ::1] src, cnp.int64_t[::1] order,
                         Py_ssize_t start, Py_ssize_t nb,
                         double[:, ::1] dst) noexcept:
    cdef Py_ssize_t r, j, cols = src.shape[1]
    cdef cnp.int64_t row
    for r in range(nb):
        row = order[start + r]
        for j in range(cols):
            dst[r, j] = src[row, j]


cdef inline void _add_bias(double[:, ::1] M, double[::1] b, Py_ssize_t nb) noexcept:
    cdef Py_ssize_t r, j, cols = M.shape[1]
    for r in range(nb):
        for j in range(cols):
            M[r, j] += b[j]


cdef inline void _leaky_forward(double[:, ::1] Z, double[:, ::1] H,
                                double slope, Py_ssize_t nb) noexcept:
    cdef Py_ssize_t r, j, cols = Z.shape[1]
    for r in range(nb):
        for j in range(cols):
            H[r, j] = Z[r, j] if Z[r, j] >= 0.0 else slope * Z[r, j]


cdef inline void _leaky_backward(double[:, ::1] D, double[:, ::1] Z,
                                 double slope, Py_ssize_t nb) noexcept:
    # multiply the backpropagated delta by the activation derivative
    # (1 at and above zero, slope below)
    cdef Py_ssize_t r, j, cols = D.shape[1]
    for r in range(nb):
        for j in range(cols):
            if Z[r, j] < 0.0:
                D[r, j] *= slope


cdef inline void _residual(double[:, ::1] F, double[:, ::1] Yb,
                           Py_ssize_t nb) noexcept:
    cdef Py_ssize_t r, j, cols = F.shape[1]
    for r in range(nb):
        for j in range(cols):
            F[r, j] -= Yb[r, j]


cdef inline void _colsum(double[:, ::1] M, double[::1] out, Py_ssize_t nb) noexcept:
    cdef Py_ssize_t r, j, cols = M.shape[1]
    for j in range(cols):
        out[j] = 0.0
    for r in range(nb):
        for j in range(cols):
            out[j] += M[r, j]


cdef inline void _apply_update_2d(double[:, ::1] P, double[:, ::1] G,
                                  double lr) noexcept:
    cdef Py_ssize_t r, j
    for r in range(P.shape[0]):
        for j in range(P.shape[1]):
            P[r, j] -= lr * G[r, j]


cdef inline void _apply_update_1d(double[::1] p, double[::1] g, double lr) noexcept:
    cdef Py_ssize_t j
    for j in range(p.shape[0]):
        p[j] -= lr * g[j]


def linear_epoch(double[:, ::1] X, double[:, ::1] Y, double[:, ::1] BBT,
                 double[:, ::1] W, double[::1] b,
                 double lr, cnp.int64_t[::1] order, Py_ssize_t batch_size):
    """One shuffled minibatch epoch for the single-layer variant; updates
    W and b in place."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], c = Y.shape[1]
    cdef Py_ssize_t bs = batch_size if batch_size < n else n
    cdef double[:, ::1] Xb = np.empty((bs, d))
    cdef double[:, ::1] Yb = np.empty((bs, c))
    cdef double[:, ::1] F = np.empty((bs, c))
    cdef double[:, ::1] G = np.empty((bs, c))
    cdef double[:, ::1] gW = np.empty((d, c))
    cdef double[::1] gb = np.empty(c)
    cdef Py_ssize_t start, nb
    cdef int inb, id_ = <int>d, ic = <int>c

    for start in range(0, n, batch_size):
        nb = batch_size if start + batch_size <= n else n - start
        inb = <int>nb
        _gather(X, order, start, nb, Xb)
        _gather(Y, order, start, nb, Yb)
        _gemm_rm(0, 0, inb, ic, id_, 1.0, &Xb[0, 0], id_, &W[0, 0], ic,
                 0.0, &F[0, 0], ic)
        _add_bias(F, b, nb)
        _residual(F, Yb, nb)
        _gemm_rm(0, 0, inb, ic, ic, 2.0, &F[0, 0], ic, &BBT[0, 0], ic,
                 0.0, &G[0, 0], ic)
        _gemm_rm(1, 0, id_, ic, inb, 1.0, &Xb[0, 0], id_, &G[0, 0], ic,
                 0.0, &gW[0, 0], ic)
        _colsum(G, gb, nb)
        _apply_update_2d(W, gW, lr)
        _apply_update_1d(b, gb, lr)


def mlp_epoch(double[:, ::1] X, double[:, ::1] Y, double[:, ::1] BBT,
              double[:, ::1] W1, double[::1] b1,
              double[:, ::1] W2, double[::1] b2,
              double[:, ::1] W3, double[::1] b3,
              double slope, double lr,
              cnp.int64_t[::1] order, Py_ssize_t batch_size):
    """One shuffled minibatch epoch for the two-hidden-layer variant;
    updates all six parameter tensors in place."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], c = Y.shape[1]
    cdef Py_ssize_t h1 = W1.shape[1], h2 = W2.shape[1]
    cdef Py_ssize_t bs = batch_size if batch_size < n else n
    cdef double[:, ::1] Xb = np.empty((bs, d))
    cdef double[:, ::1] Yb = np.empty((bs, c))
    cdef double[:, ::1] Z1 = np.empty((bs, h1))
    cdef double[:, ::1] H1 = np.empty((bs, h1))
    cdef double[:, ::1] Z2 = np.empty((bs, h2))
    cdef double[:, ::1] H2 = np.empty((bs, h2))
    cdef double[:, ::1] F = np.empty((bs, c))
    cdef double[:, ::1] G = np.empty((bs, c))
    cdef double[:, ::1] D2 = np.empty((bs, h2))
    cdef double[:, ::1] D1 = np.empty((bs, h1))
    cdef double[:, ::1] gW1 = np.empty((d, h1))
    cdef double[:, ::1] gW2 = np.empty((h1, h2))
    cdef double[:, ::1] gW3 = np.empty((h2, c))
    cdef double[::1] gb1 = np.empty(h1)
    cdef double[::1] gb2 = np.empty(h2)
    cdef double[::1] gb3 = np.empty(c)
    cdef Py_ssize_t start, nb
    cdef int inb, id_ = <int>d, ic = <int>c, ih1 = <int>h1, ih2 = <int>h2

    for start in range(0, n, batch_size):
        nb = batch_size if start + batch_size <= n else n - start
        inb = <int>nb
        _gather(X, order, start, nb, Xb)
        _gather(Y, order, start, nb, Yb)

        # forward
        _gemm_rm(0, 0, inb, ih1, id_, 1.0, &Xb[0, 0], id_, &W1[0, 0], ih1,
                 0.0, &Z1[0, 0], ih1)
        _add_bias(Z1, b1, nb)
        _leaky_forward(Z1, H1, slope, nb)
        _gemm_rm(0, 0, inb, ih2, ih1, 1.0, &H1[0, 0], ih1, &W2[0, 0], ih2,
                 0.0, &Z2[0, 0], ih2)
        _add_bias(Z2, b2, nb)
        _leaky_forward(Z2, H2, slope, nb)
        _gemm_rm(0, 0, inb, ic, ih2, 1.0, &H2[0, 0], ih2, &W3[0, 0], ic,
                 0.0, &F[0, 0], ic)
        _add_bias(F, b3, nb)

        # dL/dF for the landmark prediction term
        _residual(F, Yb, nb)
        _gemm_rm(0, 0, inb, ic, ic, 2.0, &F[0, 0], ic, &BBT[0, 0], ic,
                 0.0, &G[0, 0], ic)

        # backward
        _gemm_rm(1, 0, ih2, ic, inb, 1.0, &H2[0, 0], ih2, &G[0, 0], ic,
                 0.0, &gW3[0, 0], ic)
        _colsum(G, gb3, nb)
        _gemm_rm(0, 1, inb, ih2, ic, 1.0, &G[0, 0], ic, &W3[0, 0], ic,
                 0.0, &D2[0, 0], ih2)
        _leaky_backward(D2, Z2, slope, nb)
        _gemm_rm(1, 0, ih1, ih2, inb, 1.0, &H1[0, 0], ih1, &D2[0, 0], ih2,
                 0.0, &gW2[0, 0], ih2)
        _colsum(D2, gb2, nb)
        _gemm_rm(0, 1, inb, ih1, ih2, 1.0, &D2[0, 0], ih2, &W2[0, 0], ih2,
                 0.0, &D1[0, 0], ih1)
        _leaky_backward(D1, Z1, slope, nb)
        _gemm_rm(1, 0, id_, ih1, inb, 1.0, &Xb[0, 0], id_, &D1[0, 0], ih1,
                 0.0, &gW1[0, 0], ih1)
        _colsum(D1, gb1, nb)

        _apply_update_2d(W1, gW1, lr)
        _apply_update_1d(b1, gb1, lr)
        _apply_update_2d(W2, gW2, lr)
        _apply_update_1d(b2, gb2, lr)
        _apply_update_2d(W3, gW3, lr)
        _apply_update_1d(b3, gb3, lr)
