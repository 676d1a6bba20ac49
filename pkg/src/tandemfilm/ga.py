"""Genetic-algorithm inverse design over the thickness grid.

Truncation selection with elitism: the top ``selected_fraction`` of each
generation survives unchanged (so best fitness never worsens), and the rest
of the population is refilled by uniform per-gene crossover of random
survivor pairs followed by per-gene mutation (resample that gene uniformly
from the 41-value grid with probability ``mutation_rate``).  Fitness is the
MSE between the target spectrum and either the TMM-simulated spectrum of the
genes or a trained forward network's prediction of it.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import dataset as ds
from . import tmm
from .rng import CounterStream, tag

_TAG_GA = tag("ga")


@dataclass(frozen=True)
class GaConfig:
    layer_count: int
    population_size: int = 200
    generations: int = 500
    mutation_rate: float = 0.1
    selected_fraction: float = 0.1
    seed: int = 0
    target_mse: float | None = None

    def __post_init__(self):
        if not 0 < self.selected_fraction <= 1:
            raise ValueError("selected_fraction must be in (0, 1]")
        if self.population_size * self.selected_fraction < 2:
            raise ValueError("population_size * selected_fraction must be >= 2")

    @property
    def n_survivors(self) -> int:
        return max(2, int(round(self.population_size * self.selected_fraction)))


@dataclass
class Individual:
    genes: np.ndarray  # integer thicknesses on the 30..70 nm grid
    fitness: float


@dataclass
class GaResult:
    best: Individual
    history: list  # (generation, best_mse, mean_mse)
    generations_run: int
    seconds: float
    backend: str


def make_fitness(backend: str, target, fnn=None, materials=None):
    """Population fitness function: genes (N, L) -> MSE per individual."""
    target = np.asarray(target, dtype=float).reshape(-1)
    if target.size != tmm.N_POINTS:
        raise ValueError(f"target spectrum must have {tmm.N_POINTS} points")
    if backend == "tmm":

        def fitness(genes):
            spectra = tmm.batch_transmission_spectra(
                genes.astype(float), materials=materials
            )
            return np.mean((spectra - target) ** 2, axis=1)

    elif backend == "fnn":
        if fnn is None:
            raise ValueError("fnn backend requires a trained forward network")

        def fitness(genes):
            preds = fnn.forward(ds.normalize(genes.astype(float)), train=False)
            return np.mean((preds - target) ** 2, axis=1)

    else:
        raise ValueError(f"unknown fitness backend {backend!r}")
    return fitness


def run_ga(target, backend: str, config: GaConfig, fnn=None, materials=None) -> GaResult:
    start_time = time.perf_counter()
    fitness = make_fitness(backend, target, fnn=fnn, materials=materials)
    stream = CounterStream(config.seed, _TAG_GA)
    grid_lo = int(ds.THICKNESS_MIN_NM)
    n_values = int(round(ds.THICKNESS_MAX_NM - ds.THICKNESS_MIN_NM)) + 1

    genes = grid_lo + stream.integers(
        n_values, (config.population_size, config.layer_count)
    )
    history = []
    generations_run = 0
    for gen in range(config.generations + 1):
        scores = fitness(genes)
        order = np.argsort(scores, kind="stable")
        genes = genes[order]
        scores = scores[order]
        history.append((gen, float(scores[0]), float(scores.mean())))
        generations_run = gen
        if config.target_mse is not None and scores[0] <= config.target_mse:
            break
        if gen == config.generations:
            break

        survivors = genes[: config.n_survivors]
        n_children = config.population_size - config.n_survivors
        children = np.empty((n_children, config.layer_count), dtype=genes.dtype)
        for i in range(n_children):
            a = stream.integers(config.n_survivors)
            b = stream.integers(config.n_survivors - 1)
            if b >= a:  # distinct parents
                b += 1
            mask = stream.integers(2, (config.layer_count,)).astype(bool)
            children[i] = np.where(mask, survivors[a], survivors[b])
        mutate = stream.floats((n_children, config.layer_count)) < config.mutation_rate
        fresh = grid_lo + stream.integers(n_values, (n_children, config.layer_count))
        children = np.where(mutate, fresh, children)
        genes = np.vstack([survivors, children])

    best = Individual(genes[0].copy(), float(scores[0]))
    return GaResult(
        best,
        history,
        generations_run,
        time.perf_counter() - start_time,
        backend,
    )


def ga_compare(target, fnn, config: GaConfig, materials=None):
    """Run both fitness backends with identical seeds; returns two GaResults."""
    return [
        run_ga(target, backend, config, fnn=fnn, materials=materials)
        for backend in ("tmm", "fnn")
    ]


def history_csv(result: GaResult) -> str:
    rows = ["generation,best_mse,mean_mse"]
    for gen, best, mean in result.history:
        rows.append(f"{gen},{best:.9g},{mean:.9g}")
    return "\n".join(rows) + "\n"


def compare_csv(results) -> str:
    out = ["backend,best_mse,seconds,generations_run"]
    for r in results:
        out.append(
            f"{r.backend},{r.best.fitness:.9g},{r.seconds:.3f},{r.generations_run}"
        )
    return "\n".join(out) + "\n"
