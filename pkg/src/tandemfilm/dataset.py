"""Dataset generation, normalization, splitting, and CSV serialization.

A sample is a thickness sequence drawn uniformly from the 30..70 nm grid
(1 nm steps) plus its simulated transmission spectrum.  Thickness draws are
keyed by (seed, sample index, layer index) through the counter-based
generator, so generation is order-independent and bit-reproducible; the
train/val/test split (60/20/20) is a seeded permutation.

File format: one CSV row per sample, header ``d_1..d_L,T_400..T_800``
(L + 401 columns), LF endings, spectra at 9 significant digits.  A sidecar
``<file>.manifest`` records the generation config, generator name, material
table hashes, and the CSV content hash.
"""

import configparser
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng, tmm
from .materials import builtin_materials, manifest_digest

THICKNESS_MIN_NM = 30.0
THICKNESS_MAX_NM = 70.0
THICKNESS_STEP_NM = 1.0

GENERATOR_NAME = "splitmix64-counter-v1"

_TAG_THICKNESS = rng.tag("thick")
_TAG_SPLIT = rng.tag("split")


class SchemaError(ValueError):
    """Dataset file does not match the documented layout."""


@dataclass(frozen=True)
class GenConfig:
    layer_count: int
    sample_count: int
    thickness_min_nm: float = THICKNESS_MIN_NM
    thickness_max_nm: float = THICKNESS_MAX_NM
    thickness_step_nm: float = THICKNESS_STEP_NM
    seed: int = 0

    def __post_init__(self):
        if self.layer_count < 1:
            raise ValueError("layer_count must be >= 1")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        span = (self.thickness_max_nm - self.thickness_min_nm) / self.thickness_step_nm
        if abs(span - round(span)) > 1e-9:
            raise ValueError("thickness range must be an integral number of steps")

    @property
    def n_grid_values(self) -> int:
        """Admissible thicknesses per layer (41 with the defaults)."""
        return (
            int(round((self.thickness_max_nm - self.thickness_min_nm) / self.thickness_step_nm))
            + 1
        )

    def grid(self) -> np.ndarray:
        return self.thickness_min_nm + self.thickness_step_nm * np.arange(self.n_grid_values)


@dataclass(frozen=True)
class Dataset:
    thicknesses: np.ndarray  # (N, L) grid values in nm
    spectra: np.ndarray  # (N, 401)
    gen_config: GenConfig
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    material_manifest_hash: str

    @property
    def sample_count(self) -> int:
        return self.thicknesses.shape[0]

    @property
    def layer_count(self) -> int:
        return self.thicknesses.shape[1]

    def normalized(self) -> np.ndarray:
        cfg = self.gen_config
        return normalize(self.thicknesses, cfg.thickness_min_nm, cfg.thickness_max_nm)

    def subset(self, split: str) -> np.ndarray:
        try:
            return {"train": self.train_idx, "val": self.val_idx, "test": self.test_idx}[split]
        except KeyError:
            raise ValueError(f"unknown split {split!r}") from None


def sample_thicknesses(config: GenConfig, draw_index: int) -> np.ndarray:
    """Thickness sequence for one draw, keyed by (seed, draw, layer)."""
    steps = rng.uniform_ints(
        config.seed,
        (_TAG_THICKNESS, draw_index),
        np.arange(config.layer_count),
        config.n_grid_values,
    )
    return config.thickness_min_nm + config.thickness_step_nm * steps


def random_stack(config: GenConfig, draw_index: int) -> tmm.LayerStack:
    return tmm.alternating_stack(sample_thicknesses(config, draw_index))


def split_indices(sample_count: int, seed: int):
    """Disjoint 60/20/20 index sets from a seeded permutation."""
    perm = rng.permutation(sample_count, seed, _TAG_SPLIT)
    n_train = math.floor(sample_count * 0.6)
    n_val = math.floor(sample_count * 0.2)
    return (
        perm[:n_train],
        perm[n_train : n_train + n_val],
        perm[n_train + n_val :],
    )


def generate_dataset(config: GenConfig, materials=None) -> Dataset:
    materials = materials or builtin_materials()
    thicknesses = np.empty((config.sample_count, config.layer_count))
    for i in range(config.sample_count):
        thicknesses[i] = sample_thicknesses(config, i)
    spectra = tmm.batch_transmission_spectra(thicknesses, materials=materials)
    train, val, test = split_indices(config.sample_count, config.seed)
    return Dataset(
        thicknesses=thicknesses,
        spectra=spectra,
        gen_config=config,
        train_idx=train,
        val_idx=val,
        test_idx=test,
        material_manifest_hash=manifest_digest(),
    )


# --- min-max normalization over the theoretical thickness range ---


def normalize(thicknesses_nm, lo: float = THICKNESS_MIN_NM, hi: float = THICKNESS_MAX_NM):
    """Affine map [lo, hi] -> [0, 1]; out-of-range input is an error."""
    d = np.asarray(thicknesses_nm, dtype=float)
    if np.any(d < lo) or np.any(d > hi):
        raise ValueError(f"thickness outside [{lo:g}, {hi:g}] nm")
    return (d - lo) / (hi - lo)


def denormalize(
    values,
    lo: float = THICKNESS_MIN_NM,
    hi: float = THICKNESS_MAX_NM,
    step: float = THICKNESS_STEP_NM,
    snap: bool = True,
):
    """Inverse of normalize; clamps to [0, 1] and optionally snaps to the grid."""
    x = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    d = lo + x * (hi - lo)
    if snap:
        d = lo + step * np.round((d - lo) / step)
    return d


# --- serialization ---


def _header(layer_count: int):
    return [f"d_{i + 1}" for i in range(layer_count)] + [
        f"T_{int(wl)}" for wl in tmm.WAVELENGTHS_NM
    ]


def dataset_csv_bytes(dataset: Dataset) -> bytes:
    rows = [",".join(_header(dataset.layer_count))]
    for d, spec in zip(dataset.thicknesses, dataset.spectra):
        cells = [f"{v:.10g}" for v in d] + [f"{v:.9g}" for v in spec]
        rows.append(",".join(cells))
    return ("\n".join(rows) + "\n").encode("utf-8")


def write_dataset(dataset: Dataset, path) -> None:
    """Write the CSV and its sidecar manifest."""
    path = Path(path)
    payload = dataset_csv_bytes(dataset)
    path.write_bytes(payload)
    cfg = dataset.gen_config
    manifest = (
        "[dataset]\n"
        "format = tandemfilm-dataset-v1\n"
        f"layer_count = {cfg.layer_count}\n"
        f"sample_count = {cfg.sample_count}\n"
        f"thickness_min_nm = {cfg.thickness_min_nm:g}\n"
        f"thickness_max_nm = {cfg.thickness_max_nm:g}\n"
        f"thickness_step_nm = {cfg.thickness_step_nm:g}\n"
        f"seed = {cfg.seed}\n"
        f"generator = {GENERATOR_NAME}\n"
        "\n[materials]\n"
        f"manifest_sha256 = {dataset.material_manifest_hash}\n"
        "\n[integrity]\n"
        f"csv_sha256 = {hashlib.sha256(payload).hexdigest()}\n"
    )
    manifest_path_for(path).write_text(manifest, newline="\n")


def manifest_path_for(path) -> Path:
    return Path(str(path) + ".manifest")


def read_dataset(path) -> Dataset:
    """Read CSV + manifest back into a Dataset (verifies the content hash)."""
    path = Path(path)
    manifest_path = manifest_path_for(path)
    if not manifest_path.exists():
        raise SchemaError(f"missing dataset manifest {manifest_path}")
    parser = configparser.ConfigParser()
    parser.read_string(manifest_path.read_text())
    try:
        sec = parser["dataset"]
        config = GenConfig(
            layer_count=sec.getint("layer_count"),
            sample_count=sec.getint("sample_count"),
            thickness_min_nm=sec.getfloat("thickness_min_nm"),
            thickness_max_nm=sec.getfloat("thickness_max_nm"),
            thickness_step_nm=sec.getfloat("thickness_step_nm"),
            seed=sec.getint("seed"),
        )
        material_hash = parser["materials"]["manifest_sha256"]
        recorded_hash = parser["integrity"]["csv_sha256"]
    except (KeyError, configparser.Error) as exc:
        raise SchemaError(f"malformed dataset manifest: {exc}") from None

    payload = path.read_bytes()
    actual = hashlib.sha256(payload).hexdigest()
    if actual != recorded_hash:
        raise SchemaError(
            f"dataset content hash {actual[:12]} does not match manifest {recorded_hash[:12]}"
        )

    lines = payload.decode("utf-8").splitlines()
    expected_header = ",".join(_header(config.layer_count))
    if not lines or lines[0] != expected_header:
        raise SchemaError(
            f"bad header: expected {config.layer_count + tmm.N_POINTS} columns "
            f"(d_1..d_{config.layer_count},T_400..T_800)"
        )
    body = [line for line in lines[1:] if line.strip()]
    if len(body) != config.sample_count:
        raise SchemaError(f"expected {config.sample_count} rows, found {len(body)}")
    ncols = config.layer_count + tmm.N_POINTS
    thicknesses = np.empty((config.sample_count, config.layer_count))
    spectra = np.empty((config.sample_count, tmm.N_POINTS))
    for i, line in enumerate(body):
        cells = line.split(",")
        if len(cells) != ncols:
            raise SchemaError(f"row {i + 2}: expected {ncols} columns, found {len(cells)}")
        values = np.array([float(c) for c in cells])
        thicknesses[i] = values[: config.layer_count]
        spectra[i] = values[config.layer_count :]
    train, val, test = split_indices(config.sample_count, config.seed)
    return Dataset(
        thicknesses=thicknesses,
        spectra=spectra,
        gen_config=config,
        train_idx=train,
        val_idx=val,
        test_idx=test,
        material_manifest_hash=material_hash,
    )
