# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM sequence kernels (see backends.py for the contract).

The per-step recurrence runs without Python overhead: the hidden-to-hidden
product goes through BLAS dgemm and the gate nonlinearities run as simple
contiguous C loops, shaped so the compiler can vectorize the exp/tanh calls
(glibc's libmvec). Gate block order is (input, forget, cell-candidate,
output).
"""

import numpy as np

from libc.math cimport exp, tanh
from libc.string cimport memcpy
from scipy.linalg.cython_blas cimport dgemm


cdef void _sigmoid_map(double* x, Py_ssize_t n) nogil:
    cdef Py_ssize_t i
    for i in range(n):
        x[i] = 1.0 / (1.0 + exp(-x[i]))


cdef void _tanh_map(const double* x, double* out, Py_ssize_t n) nogil:
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = tanh(x[i])


cdef void _gemm_rm(double* a, double* b, double* c,
                   int m, int n, int k, double alpha, double beta) nogil:
    # C(m,n) = alpha * A(m,k) @ B(k,n) + beta * C, all row-major.
    # BLAS is column-major, so compute C^T = B^T @ A^T by swapping operands.
    cdef char tn = 110  # 'n'
    dgemm(&tn, &tn, &n, &m, &k, &alpha, b, &n, a, &k, &beta, c, &n)


cdef void _gemm_rm_nt(double* a, double* b, double* c,
                      int m, int n, int k, double alpha, double beta) nogil:
    # C(m,n) = alpha * A(m,k) @ B(n,k)^T + beta * C, all row-major.
    cdef char tt = 116  # 't'
    cdef char tn = 110  # 'n'
    dgemm(&tt, &tn, &n, &m, &k, &alpha, b, &k, a, &k, &beta, c, &n)


def lstm_seq_forward(double[:, :, ::1] x_proj, double[:, ::1] wh,
                     double[:, ::1] h0, double[:, ::1] c0):
    cdef Py_ssize_t T = x_proj.shape[0]
    cdef int B = <int> x_proj.shape[1]
    cdef int H4 = <int> x_proj.shape[2]
    cdef int H = H4 // 4

    h_all_np = np.empty((T, B, H))
    c_all_np = np.empty((T, B, H))
    gates_np = np.empty((T, B, H4))
    cdef double[:, :, ::1] h_all = h_all_np
    cdef double[:, :, ::1] c_all = c_all_np
    cdef double[:, :, ::1] gates = gates_np

    cdef Py_ssize_t t
    cdef int b, j
    cdef double* h_prev
    cdef double* c_prev
    cdef double* row
    cdef double* c_row
    cdef double* h_row

    with nogil:
        for t in range(T):
            memcpy(&gates[t, 0, 0], &x_proj[t, 0, 0], sizeof(double) * B * H4)
            h_prev = &h0[0, 0] if t == 0 else &h_all[t - 1, 0, 0]
            _gemm_rm(h_prev, &wh[0, 0], &gates[t, 0, 0], B, H4, H, 1.0, 1.0)
            for b in range(B):
                row = &gates[t, b, 0]
                c_prev = &c0[b, 0] if t == 0 else &c_all[t - 1, b, 0]
                c_row = &c_all[t, b, 0]
                h_row = &h_all[t, b, 0]
                _sigmoid_map(row, 2 * H)        # input and forget blocks
                _tanh_map(row + 2 * H, row + 2 * H, H)
                _sigmoid_map(row + 3 * H, H)    # output block
                for j in range(H):
                    c_row[j] = row[H + j] * c_prev[j] + row[j] * row[2 * H + j]
                _tanh_map(c_row, h_row, H)
                for j in range(H):
                    h_row[j] *= row[3 * H + j]
    return h_all_np, c_all_np, gates_np


def lstm_seq_backward(double[:, :, ::1] dh_out, double[:, ::1] wh,
                      double[:, :, ::1] gates, double[:, :, ::1] h_all,
                      double[:, :, ::1] c_all, double[:, ::1] h0,
                      double[:, ::1] c0):
    cdef Py_ssize_t T = dh_out.shape[0]
    cdef int B = <int> dh_out.shape[1]
    cdef int H = <int> dh_out.shape[2]
    cdef int H4 = 4 * H

    dz_all_np = np.empty((T, B, H4))
    dh_np = np.zeros((B, H))
    dc_np = np.zeros((B, H))
    tc_np = np.empty(H)
    cdef double[:, :, ::1] dz_all = dz_all_np
    cdef double[:, ::1] dh = dh_np
    cdef double[:, ::1] dc = dc_np
    cdef double[::1] tc_buf = tc_np

    cdef Py_ssize_t t
    cdef int b, j
    cdef double* row
    cdef double* dz
    cdef double* dh_row
    cdef double* dc_row
    cdef double* c_prev
    cdef double* tc = &tc_buf[0]

    with nogil:
        for t in range(T - 1, -1, -1):
            for b in range(B):
                row = &gates[t, b, 0]
                dz = &dz_all[t, b, 0]
                dh_row = &dh[b, 0]
                dc_row = &dc[b, 0]
                c_prev = &c0[b, 0] if t == 0 else &c_all[t - 1, b, 0]
                _tanh_map(&c_all[t, b, 0], tc, H)
                for j in range(H):
                    dh_row[j] = dh_row[j] + dh_out[t, b, j]
                for j in range(H):
                    dc_row[j] = dc_row[j] + dh_row[j] * row[3 * H + j] * (1.0 - tc[j] * tc[j])
                for j in range(H):
                    dz[j] = dc_row[j] * row[2 * H + j] * row[j] * (1.0 - row[j])
                for j in range(H):
                    dz[H + j] = dc_row[j] * c_prev[j] * row[H + j] * (1.0 - row[H + j])
                for j in range(H):
                    dz[2 * H + j] = dc_row[j] * row[j] * (1.0 - row[2 * H + j] * row[2 * H + j])
                for j in range(H):
                    dz[3 * H + j] = dh_row[j] * tc[j] * row[3 * H + j] * (1.0 - row[3 * H + j])
                for j in range(H):
                    dc_row[j] *= row[H + j]
            # dh for step t-1: dz_t @ wh^T
            _gemm_rm_nt(&dz_all[t, 0, 0], &wh[0, 0], &dh[0, 0], B, H, H4, 1.0, 0.0)
    return dz_all_np, dh_np, dc_np
