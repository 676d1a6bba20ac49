"""Pure-numpy transfer-matrix kernels, vectorized across wavelengths.

Same contract as ``_tmm_numba``: given per-wavelength complex indices for the
ambients and each layer, chain the interface and propagation matrices into the
full-stack scattering matrix and return transmittance and reflectance.  The
2x2 product runs layer by layer with the four matrix entries held as arrays
over the wavelength grid.
"""

import numpy as np


def kz_array(nk: np.ndarray, k0: np.ndarray, kx: np.ndarray) -> np.ndarray:
    """Longitudinal wavevector sqrt((nk*k0)^2 - kx^2), branch Im >= 0."""
    w = np.sqrt((nk * k0) ** 2 - kx**2 + 0j)
    return np.where(w.imag < 0, -w, w)


def spectrum_rt(d_nm, nk_layers, nk_in, nk_out, k0, kx):
    """(T, R) over the wavelength grid for one stack.

    d_nm: (L,) layer thicknesses; nk_layers: (L, W) complex; nk_in/nk_out:
    (W,) complex ambients; k0 = 2*pi/wavelength, kx the conserved transverse
    wavevector (both (W,)).
    """
    kz_prev = kz_array(nk_in, k0, kx)
    kz_out = kz_array(nk_out, k0, kx)

    one = np.ones_like(kz_prev)
    zero = np.zeros_like(kz_prev)
    s11, s12, s21, s22 = one.copy(), zero.copy(), zero.copy(), one.copy()

    n_layers = len(d_nm)
    for j in range(n_layers + 1):
        kz_next = kz_array(nk_layers[j], k0, kx) if j < n_layers else kz_out
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
            s11, s12, s21, s22 = b11, b12, b21, b22
        kz_prev = kz_next

    t_total = 1.0 / s11
    r_total = s21 / s11
    transmit = (kz_out.real / kz_array(nk_in, k0, kx).real) * np.abs(t_total) ** 2
    reflect = np.abs(r_total) ** 2
    return transmit, reflect


def batch_spectrum_rt(d_batch, nk_layers, nk_in, nk_out, k0, kx):
    """(T, R) with shape (N, W) for N stacks sharing one material sequence."""
    n_stacks = d_batch.shape[0]
    n_wl = k0.shape[0]
    transmit = np.empty((n_stacks, n_wl))
    reflect = np.empty((n_stacks, n_wl))
    for i in range(n_stacks):
        transmit[i], reflect[i] = spectrum_rt(d_batch[i], nk_layers, nk_in, nk_out, k0, kx)
    return transmit, reflect
