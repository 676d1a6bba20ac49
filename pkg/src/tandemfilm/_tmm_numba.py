"""Numba transfer-matrix kernels: scalar 2x2 products, one wavelength at a time.

Mirrors ``_tmm_numpy`` exactly; the batch kernel parallelizes over stacks
(each (stack, wavelength) cell is independent, so thread scheduling cannot
change the result).
"""

import numpy as np

from .accel import njit, prange


@njit(cache=True)
def _kz_scalar(nk, k0, kx):
    w = np.sqrt((nk * k0) ** 2 - kx * kx + 0j)
    if w.imag < 0.0:
        w = -w
    return w


@njit(cache=True)
def _point_rt(d_nm, nk_col, nk_in, nk_out, k0, kx):
    """(T, R) at a single wavelength; nk_col holds one index per layer."""
    kz_in = _kz_scalar(nk_in, k0, kx)
    kz_prev = kz_in
    s11 = 1.0 + 0j
    s12 = 0.0 + 0j
    s21 = 0.0 + 0j
    s22 = 1.0 + 0j
    n_layers = d_nm.shape[0]
    for j in range(n_layers + 1):
        if j < n_layers:
            kz_next = _kz_scalar(nk_col[j], k0, kx)
        else:
            kz_next = _kz_scalar(nk_out, k0, kx)
        r = (kz_prev - kz_next) / (kz_prev + kz_next)
        t = 2.0 * kz_prev / (kz_prev + kz_next)
        b11 = (s11 + s12 * r) / t
        b12 = (s11 * r + s12) / t
        b21 = (s21 + s22 * r) / t
        b22 = (s21 * r + s22) / t
        if j < n_layers:
            phase_minus = np.exp(-1j * kz_next * d_nm[j])
            phase_plus = np.exp(1j * kz_next * d_nm[j])
            s11 = b11 * phase_minus
            s12 = b12 * phase_plus
            s21 = b21 * phase_minus
            s22 = b22 * phase_plus
        else:
            s11 = b11
            s12 = b12
            s21 = b21
            s22 = b22
        kz_prev = kz_next

    t_total = 1.0 / s11
    r_total = s21 / s11
    kz_out = _kz_scalar(nk_out, k0, kx)
    transmit = (kz_out.real / kz_in.real) * abs(t_total) ** 2
    reflect = abs(r_total) ** 2
    return transmit, reflect


@njit(cache=True)
def spectrum_rt(d_nm, nk_layers, nk_in, nk_out, k0, kx):
    n_wl = k0.shape[0]
    transmit = np.empty(n_wl)
    reflect = np.empty(n_wl)
    for w in range(n_wl):
        transmit[w], reflect[w] = _point_rt(
            d_nm, nk_layers[:, w], nk_in[w], nk_out[w], k0[w], kx[w]
        )
    return transmit, reflect


@njit(cache=True, parallel=True)
def batch_spectrum_rt(d_batch, nk_layers, nk_in, nk_out, k0, kx):
    n_stacks = d_batch.shape[0]
    n_wl = k0.shape[0]
    transmit = np.empty((n_stacks, n_wl))
    reflect = np.empty((n_stacks, n_wl))
    for i in prange(n_stacks):
        for w in range(n_wl):
            transmit[i, w], reflect[i, w] = _point_rt(
                d_batch[i], nk_layers[:, w], nk_in[w], nk_out[w], k0[w], kx[w]
            )
    return transmit, reflect
