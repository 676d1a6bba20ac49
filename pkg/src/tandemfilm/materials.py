"""Wavelength-dependent complex refractive indices.

Tables are loaded from two/three-column CSV (``wl,n[,k]``, wavelengths in nm,
strictly increasing) and queried by piecewise-linear interpolation of n and k
independently.  No extrapolation: querying outside the tabulated range is an
error.  The package ships SiO2, TiO2, and Air tables covering 400-800 nm,
hash-stamped in ``data/manifest.txt``; their k is zero over that window.
"""

import configparser
import hashlib
import io
from dataclasses import dataclass, field
from importlib import resources

import numpy as np


class DispersionFormatError(ValueError):
    """Malformed or inconsistent dispersion table input."""


class WavelengthRangeError(ValueError):
    """Wavelength query outside the tabulated range."""


@dataclass(frozen=True)
class DispersionTable:
    material_id: str
    wavelengths_nm: np.ndarray
    n: np.ndarray
    k: np.ndarray = field(default=None)

    def __post_init__(self):
        wl = np.asarray(self.wavelengths_nm, dtype=float)
        n = np.asarray(self.n, dtype=float)
        k = np.zeros_like(n) if self.k is None else np.asarray(self.k, dtype=float)
        if wl.ndim != 1 or wl.size < 2:
            raise DispersionFormatError("need at least 2 tabulated wavelengths")
        if not (len(wl) == len(n) == len(k)):
            raise DispersionFormatError("wl, n, k arrays must have equal length")
        if not np.all(np.diff(wl) > 0):
            raise DispersionFormatError("wavelengths must be strictly increasing")
        if not np.all(n > 0):
            raise DispersionFormatError("refractive index must be positive")
        if not np.all(k >= 0):
            raise DispersionFormatError("extinction coefficient must be non-negative")
        for name, arr in (("wavelengths_nm", wl), ("n", n), ("k", k)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def wl_min(self) -> float:
        return float(self.wavelengths_nm[0])

    @property
    def wl_max(self) -> float:
        return float(self.wavelengths_nm[-1])

    def index_at(self, wavelength_nm: float) -> complex:
        """Complex index n + ik at one wavelength (linear interpolation)."""
        self._check_range(np.asarray(wavelength_nm, dtype=float))
        n = np.interp(wavelength_nm, self.wavelengths_nm, self.n)
        k = np.interp(wavelength_nm, self.wavelengths_nm, self.k)
        return complex(n, k)

    def sample(self, wavelengths_nm) -> np.ndarray:
        """Complex index on an array of wavelengths."""
        wl = np.asarray(wavelengths_nm, dtype=float)
        self._check_range(wl)
        return np.interp(wl, self.wavelengths_nm, self.n) + 1j * np.interp(
            wl, self.wavelengths_nm, self.k
        )

    def _check_range(self, wl: np.ndarray) -> None:
        if np.any(wl < self.wl_min) or np.any(wl > self.wl_max):
            raise WavelengthRangeError(
                f"{self.material_id}: wavelength outside tabulated range "
                f"[{self.wl_min:g}, {self.wl_max:g}] nm (no extrapolation)"
            )


def index_at(table: DispersionTable, wavelength_nm: float) -> complex:
    return table.index_at(wavelength_nm)


def load_dispersion(source, material_id: str = "custom") -> DispersionTable:
    """Parse a ``wl,n[,k]`` CSV (path, bytes, str, or file object)."""
    text = _read_text(source)
    lines = text.splitlines()
    if not lines:
        raise DispersionFormatError("empty dispersion file")
    header = [c.strip().lower() for c in lines[0].split(",")]
    if header not in (["wl", "n"], ["wl", "n", "k"]):
        raise DispersionFormatError(
            f"line 1: expected header 'wl,n' or 'wl,n,k', got {lines[0]!r}"
        )
    ncols = len(header)
    wl, n, k = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != ncols:
            raise DispersionFormatError(f"line {lineno}: expected {ncols} columns")
        try:
            values = [float(c) for c in cells]
        except ValueError:
            raise DispersionFormatError(f"line {lineno}: non-numeric value") from None
        wl.append(values[0])
        n.append(values[1])
        k.append(values[2] if ncols == 3 else 0.0)
    return DispersionTable(material_id, np.array(wl), np.array(n), np.array(k))


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str) and "\n" in source:
        return source
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    with open(source, "rb") as fh:
        return fh.read().decode("utf-8")


_MANIFEST_FILES = {"SiO2": "sio2.csv", "TiO2": "tio2.csv", "Air": "air.csv"}
_builtin_cache = None


def _data_bytes(name: str) -> bytes:
    return resources.files("tandemfilm").joinpath(f"data/{name}").read_bytes()


def builtin_manifest() -> dict:
    """Parsed shipped-table manifest: material_id -> {file, source, sha256}."""
    parser = configparser.ConfigParser()
    parser.read_string(_data_bytes("manifest.txt").decode("utf-8"))
    return {sec: dict(parser[sec]) for sec in parser.sections()}


def manifest_digest() -> str:
    """Hash over the manifest itself; stamps datasets with the table version."""
    return hashlib.sha256(_data_bytes("manifest.txt")).hexdigest()


def builtin_materials() -> dict:
    """Shipped SiO2/TiO2/Air tables, hash-verified against the manifest."""
    global _builtin_cache
    if _builtin_cache is None:
        manifest = builtin_manifest()
        tables = {}
        for material_id, filename in _MANIFEST_FILES.items():
            raw = _data_bytes(filename)
            recorded = manifest[material_id]["sha256"]
            actual = hashlib.sha256(raw).hexdigest()
            if actual != recorded:
                raise DispersionFormatError(
                    f"{filename}: content hash {actual[:12]} does not match "
                    f"manifest entry {recorded[:12]}"
                )
            tables[material_id] = load_dispersion(io.BytesIO(raw), material_id)
        _builtin_cache = tables
    return _builtin_cache
