"""Transfer-matrix optics for multilayer stacks.

Field amplitudes on the two sides of an interface are related by the
interface matrix ``(1/t)[[1, r], [r, 1]]`` with s-polarization Fresnel
coefficients written in longitudinal-wavevector form, and propagation through
a layer by ``diag(exp(-i kz d), exp(+i kz d))``.  The left-to-right product
over all interfaces and layers gives the stack scattering matrix S, from
which r = S21/S11 and t = 1/S11.  Transmittance carries the
Re(kz_out)/Re(kz_in) flux factor so that R + T = 1 for lossless stacks with
any pair of ambients (it reduces to |t|^2 for air/air).

Spectra are evaluated on the fixed 400..800 nm grid (1 nm steps, 401 points).
Scalar operations here are the reference implementation; grid and batch
evaluation route through the selected kernel backend (numba or numpy, see
``accel``).
"""

import math
from dataclasses import dataclass

import numpy as np

from .accel import NUMBA_ENABLED
from .materials import builtin_materials

if NUMBA_ENABLED:
    from . import _tmm_numba as _kern
else:
    from . import _tmm_numpy as _kern

WAVELENGTHS_NM = np.arange(400.0, 801.0)
WAVELENGTHS_NM.setflags(write=False)
N_POINTS = 401


class SingularStackError(ArithmeticError):
    """Scattering matrix with S11 = 0 (no transmitted solution)."""


@dataclass(frozen=True)
class LayerStack:
    """Ordered layer thicknesses and materials between two ambients."""

    thicknesses_nm: np.ndarray
    materials: tuple
    ambient_in: str = "Air"
    ambient_out: str = "Air"
    incidence_angle_rad: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.thicknesses_nm, dtype=float)
        if d.ndim != 1:
            raise ValueError("thicknesses must be a 1-D array")
        if len(d) != len(self.materials):
            raise ValueError(
                f"{len(d)} thicknesses vs {len(self.materials)} materials"
            )
        if np.any(d < 0):
            raise ValueError("layer thicknesses must be non-negative")
        d.setflags(write=False)
        object.__setattr__(self, "thicknesses_nm", d)
        object.__setattr__(self, "materials", tuple(self.materials))


def alternating_materials(layer_count: int, first: str = "SiO2", second: str = "TiO2"):
    """SiO2/TiO2 alternation with the first material on the incidence side."""
    return tuple(first if i % 2 == 0 else second for i in range(layer_count))


def alternating_stack(thicknesses_nm, **kwargs) -> LayerStack:
    d = np.asarray(thicknesses_nm, dtype=float)
    return LayerStack(d, alternating_materials(len(d)), **kwargs)


# --- scalar operations ---


def longitudinal_wavevector(
    n_complex: complex, n0: float, theta: float, wavelength_nm: float
) -> complex:
    """kz = k0 * sqrt(n^2 - (n0 sin theta)^2) with the Im >= 0 branch."""
    if wavelength_nm <= 0:
        raise ValueError("wavelength must be positive")
    k0 = 2.0 * math.pi / wavelength_nm
    w = np.sqrt(complex(n_complex) ** 2 - (n0 * math.sin(theta)) ** 2)
    if w.imag < 0:
        w = -w
    return complex(w * k0)


def fresnel_s(kz_j: complex, kz_k: complex):
    """s-polarization amplitude coefficients (r, t) for one interface."""
    denom = kz_j + kz_k
    if denom == 0:
        raise ValueError("degenerate interface: kz_j + kz_k = 0")
    return (kz_j - kz_k) / denom, 2.0 * kz_j / denom


def interface_matrix(r: complex, t: complex) -> np.ndarray:
    if t == 0:
        raise ValueError("interface with t = 0 has no matrix representation")
    return np.array([[1.0, r], [r, 1.0]], dtype=complex) / t


def layer_matrix(kz: complex, d_nm: float) -> np.ndarray:
    if d_nm < 0:
        raise ValueError("layer thickness must be non-negative")
    return np.array(
        [[np.exp(-1j * kz * d_nm), 0.0], [0.0, np.exp(1j * kz * d_nm)]], dtype=complex
    )


def scattering_matrix(stack: LayerStack, wavelength_nm: float, materials=None) -> np.ndarray:
    """Full-stack S built as the explicit interface/layer matrix product."""
    materials = materials or builtin_materials()
    theta = stack.incidence_angle_rad
    n0 = materials[stack.ambient_in].index_at(wavelength_nm).real

    def kz(material_id):
        nk = materials[material_id].index_at(wavelength_nm)
        return longitudinal_wavevector(nk, n0, theta, wavelength_nm)

    chain = [stack.ambient_in, *stack.materials, stack.ambient_out]
    kz_chain = [kz(m) for m in chain]
    s = interface_matrix(*fresnel_s(kz_chain[0], kz_chain[1]))
    for j, d in enumerate(stack.thicknesses_nm):
        s = s @ layer_matrix(kz_chain[j + 1], d)
        s = s @ interface_matrix(*fresnel_s(kz_chain[j + 1], kz_chain[j + 2]))
    return s


def amplitude_coefficients(s: np.ndarray):
    """Total (r, t) of a stack from its scattering matrix."""
    if s[0, 0] == 0:
        raise SingularStackError("S11 = 0: amplitude coefficients undefined")
    return s[1, 0] / s[0, 0], 1.0 / s[0, 0]


def transmittance(stack: LayerStack, wavelength_nm: float, materials=None) -> float:
    """Power transmittance at one wavelength."""
    materials = materials or builtin_materials()
    s = scattering_matrix(stack, wavelength_nm, materials)
    _, t = amplitude_coefficients(s)
    theta = stack.incidence_angle_rad
    n0 = materials[stack.ambient_in].index_at(wavelength_nm).real
    kz_in = longitudinal_wavevector(
        materials[stack.ambient_in].index_at(wavelength_nm), n0, theta, wavelength_nm
    )
    kz_out = longitudinal_wavevector(
        materials[stack.ambient_out].index_at(wavelength_nm), n0, theta, wavelength_nm
    )
    return (kz_out.real / kz_in.real) * abs(t) ** 2


# --- grid evaluation through the kernel backend ---


def _grid_arrays(stack_materials, ambient_in, ambient_out, theta, materials, wavelengths):
    wl = np.asarray(wavelengths, dtype=float)
    nk_in = materials[ambient_in].sample(wl)
    nk_out = materials[ambient_out].sample(wl)
    if stack_materials:
        nk_layers = np.vstack([materials[m].sample(wl) for m in stack_materials])
    else:
        nk_layers = np.zeros((0, wl.size), dtype=complex)
    k0 = 2.0 * math.pi / wl
    kx = nk_in.real * math.sin(theta) * k0
    return nk_layers, nk_in, nk_out, k0, kx


def spectrum_rt(stack: LayerStack, materials=None, wavelengths=WAVELENGTHS_NM):
    """(T, R) arrays over the wavelength grid."""
    materials = materials or builtin_materials()
    args = _grid_arrays(
        stack.materials,
        stack.ambient_in,
        stack.ambient_out,
        stack.incidence_angle_rad,
        materials,
        wavelengths,
    )
    return _kern.spectrum_rt(stack.thicknesses_nm, *args)


def transmission_spectrum(stack: LayerStack, materials=None, wavelengths=WAVELENGTHS_NM):
    """Transmittance on the 401-point grid (or a custom grid)."""
    return spectrum_rt(stack, materials, wavelengths)[0]


def batch_transmission_spectra(
    thicknesses, material_sequence=None, materials=None, wavelengths=WAVELENGTHS_NM,
    ambient_in="Air", ambient_out="Air", theta=0.0,
):
    """Spectra for N stacks sharing one material sequence; shape (N, 401).

    The hot path for dataset generation and GA fitness.
    """
    d = np.ascontiguousarray(thicknesses, dtype=float)
    if d.ndim != 2:
        raise ValueError("thicknesses must be (n_stacks, n_layers)")
    seq = material_sequence or alternating_materials(d.shape[1])
    materials = materials or builtin_materials()
    args = _grid_arrays(seq, ambient_in, ambient_out, theta, materials, wavelengths)
    return _kern.batch_spectrum_rt(d, *args)[0]
