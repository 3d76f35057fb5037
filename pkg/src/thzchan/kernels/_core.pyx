# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``thzchan.kernels._numpy``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, log, pow, sin, sqrt

cnp.import_array()

BACKEND = "compiled"


def ray_path_distance(double d_center, double az_tx, double az_rx,
                      double r_tx, double r_rx,
                      off_az_tx, off_el_tx, off_az_rx, off_el_rx):
    cdef double[::1] oat = np.ascontiguousarray(off_az_tx, dtype=np.float64)
    cdef double[::1] oet = np.ascontiguousarray(off_el_tx, dtype=np.float64)
    cdef double[::1] oar = np.ascontiguousarray(off_az_rx, dtype=np.float64)
    cdef double[::1] oer = np.ascontiguousarray(off_el_rx, dtype=np.float64)
    cdef Py_ssize_t n = oat.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double srx = sin(az_rx), crx = cos(az_rx)
    cdef double stx = sin(az_tx), ctx = cos(az_tx)
    cdef double d_v, d_h
    cdef Py_ssize_t i
    for i in range(n):
        d_v = d_center * (srx * r_rx / cos(oer[i]) + stx * r_tx / cos(oet[i]))
        d_h = d_center * (crx * r_rx / cos(oar[i]) + ctx * r_tx / cos(oat[i]))
        out[i] = sqrt(d_v * d_v + d_h * d_h)
    return out_arr


def mirror_step(d_tx, d_rx, disp_tx, disp_rx):
    cdef double[:, ::1] vt = np.ascontiguousarray(d_tx, dtype=np.float64)
    cdef double[:, ::1] vr = np.ascontiguousarray(d_rx, dtype=np.float64)
    cdef double[::1] dt = np.ascontiguousarray(disp_tx, dtype=np.float64)
    cdef double[::1] dr = np.ascontiguousarray(disp_rx, dtype=np.float64)
    cdef Py_ssize_t n = vt.shape[0]
    new_tx_arr = np.empty((n, 3), dtype=np.float64)
    new_rx_arr = np.empty((n, 3), dtype=np.float64)
    dist_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] nt = new_tx_arr
    cdef double[:, ::1] nr = new_rx_arr
    cdef double[::1] dist = dist_arr
    cdef double rx0, rx1, rx2, tx0, tx1, tx2
    cdef double dist_tmp, norm_tx, scale, dist_new
    cdef Py_ssize_t i
    for i in range(n):
        rx0 = vr[i, 0] - dr[0]
        rx1 = vr[i, 1] - dr[1]
        rx2 = vr[i, 2] - dr[2]
        dist_tmp = sqrt(rx0 * rx0 + rx1 * rx1 + rx2 * rx2)
        norm_tx = sqrt(vt[i, 0] * vt[i, 0] + vt[i, 1] * vt[i, 1]
                       + vt[i, 2] * vt[i, 2])
        scale = dist_tmp / norm_tx
        tx0 = vt[i, 0] * scale - dt[0]
        tx1 = vt[i, 1] * scale - dt[1]
        tx2 = vt[i, 2] * scale - dt[2]
        dist_new = sqrt(tx0 * tx0 + tx1 * tx1 + tx2 * tx2)
        nt[i, 0] = tx0
        nt[i, 1] = tx1
        nt[i, 2] = tx2
        scale = dist_new / dist_tmp
        nr[i, 0] = rx0 * scale
        nr[i, 1] = rx1 * scale
        nr[i, 2] = rx2 * scale
        dist[i] = dist_new
    return new_tx_arr, new_rx_arr, dist_arr


def stf_power_profile(tau, z_db, xi, gamma, alive, freqs,
                      double f_c, double ds, double r_tau):
    cdef double[::1] tv = np.ascontiguousarray(tau, dtype=np.float64)
    cdef double[::1] zv = np.ascontiguousarray(z_db, dtype=np.float64)
    cdef double[::1] xv = np.ascontiguousarray(xi, dtype=np.float64)
    cdef double[::1] gv = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef cnp.uint8_t[:, ::1] av = np.ascontiguousarray(alive, dtype=np.uint8)
    cdef double[::1] fv = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef Py_ssize_t n_sub = fv.shape[0]
    cdef Py_ssize_t n_ray = tv.shape[0]
    out_arr = np.zeros((n_sub, n_ray), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    base_arr = np.empty(n_ray, dtype=np.float64)
    cdef double[::1] base = base_arr
    cdef double coef = (r_tau - 1.0) / (r_tau * ds)
    cdef double total, log_ratio, p
    cdef Py_ssize_t i, m
    for m in range(n_ray):
        base[m] = exp(-tv[m] * coef) * pow(10.0, -zv[m] / 10.0) * xv[m]
    for i in range(n_sub):
        total = 0.0
        log_ratio = log(fv[i] / f_c)
        for m in range(n_ray):
            if av[i, m]:
                p = base[m] * exp(gv[m] * log_ratio)
                out[i, m] = p
                total += p
        if total > 0.0:
            for m in range(n_ray):
                out[i, m] /= total
    return out_arr


def psd_correlation_scan(powers, Py_ssize_t anchor, Py_ssize_t step):
    cdef double[:, ::1] pv = np.ascontiguousarray(powers, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0]
    cdef Py_ssize_t m = pv.shape[1]
    cdef Py_ssize_t n_lags
    if step > 0:
        n_lags = n - anchor
    else:
        n_lags = anchor + 1
    out_arr = np.empty(n_lags, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double ref_self = 0.0, cross, row_self, denom
    cdef Py_ssize_t lag, j, row
    for j in range(m):
        ref_self += pv[anchor, j] * pv[anchor, j]
    for lag in range(n_lags):
        row = anchor + step * lag
        cross = 0.0
        row_self = 0.0
        for j in range(m):
            cross += pv[anchor, j] * pv[row, j]
            row_self += pv[row, j] * pv[row, j]
        denom = ref_self if ref_self > row_self else row_self
        out[lag] = cross / denom if denom > 0.0 else 0.0
    return out_arr
