"""Flat key=value run configuration files.

INI-style sections mirror the owning modules: ``[dataset]``,
``[training.fnn]``, ``[training.tnn]``, ``[ga]``.  Every key has a default
equal to the standard protocol value; unknown sections or keys are rejected
so typos cannot silently fall back to defaults.
"""

import configparser
from dataclasses import dataclass

from .dataset import THICKNESS_MAX_NM, THICKNESS_MIN_NM, THICKNESS_STEP_NM
from .training import TrainConfig

FNN_TRAIN_DEFAULTS = dict(epochs=500, batch_size=16, lr=1e-4, patience=None)
TNN_TRAIN_DEFAULTS = dict(epochs=1000, batch_size=16, lr=1e-4, patience=200)

GA_DEFAULTS = dict(
    population_size=200,
    generations=500,
    mutation_rate=0.1,
    selected_fraction=0.1,
)

DATASET_DEFAULTS = dict(
    thickness_min_nm=THICKNESS_MIN_NM,
    thickness_max_nm=THICKNESS_MAX_NM,
    thickness_step_nm=THICKNESS_STEP_NM,
)

_SCHEMA = {
    "dataset": {
        "layer_count": int,
        "sample_count": int,
        "thickness_min_nm": float,
        "thickness_max_nm": float,
        "thickness_step_nm": float,
        "seed": int,
    },
    "training.fnn": {
        "epochs": int,
        "batch_size": int,
        "lr": float,
        "patience": int,
        "seed": int,
        "shuffle": bool,
    },
    "training.tnn": {
        "epochs": int,
        "batch_size": int,
        "lr": float,
        "patience": int,
        "seed": int,
        "shuffle": bool,
    },
    "ga": {
        "population_size": int,
        "generations": int,
        "mutation_rate": float,
        "selected_fraction": float,
        "seed": int,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Parsed overrides, one dict per section (only keys that were present)."""

    dataset: dict
    training_fnn: dict
    training_tnn: dict
    ga: dict


def load_run_config(path) -> RunConfig:
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    sections = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ValueError(f"unknown config section [{section}]")
        schema = _SCHEMA[section]
        values = {}
        for key, raw in parser[section].items():
            if key not in schema:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            kind = schema[key]
            if kind is bool:
                values[key] = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                values[key] = kind(raw)
        sections[section] = values
    return RunConfig(
        dataset=sections.get("dataset", {}),
        training_fnn=sections.get("training.fnn", {}),
        training_tnn=sections.get("training.tnn", {}),
        ga=sections.get("ga", {}),
    )


def train_config(role: str, overrides: dict, flag_overrides: dict) -> TrainConfig:
    """Defaults for the role, updated by config file then CLI flags."""
    base = dict(FNN_TRAIN_DEFAULTS if role == "fnn" else TNN_TRAIN_DEFAULTS)
    base["seed"] = 0
    base["shuffle"] = True
    base.update(overrides)
    base.update({k: v for k, v in flag_overrides.items() if v is not None})
    return TrainConfig(**base)
