"""Command-line pipeline driver.

Subcommands: gen-data, train-fnn, train-tnn, invert, ga, plot.  All
randomness flows from explicit --seed flags; reruns with identical flags
reproduce every artifact byte-for-byte except wall-clock fields, which only
appear in report/compare files.  Exit codes: 0 success, 2 usage error,
3 data/schema error, 4 numeric failure.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import ga as ga_mod
from . import plotting, tmm
from .materials import DispersionFormatError, WavelengthRangeError
from .models import ALGORITHMS, build_fnn, build_inn, compose_tandem
from .nn import CheckpointError, load_checkpoint, save_network, save_tandem
from .runconfig import GA_DEFAULTS, RunConfig, load_run_config, train_config
from .training import (
    NumericError,
    TandemModel,
    predict_inverse,
    save_report,
    train_fnn,
    train_tandem,
)

DATA_ERRORS = (
    ds.SchemaError,
    CheckpointError,
    DispersionFormatError,
    WavelengthRangeError,
    ValueError,
    OSError,
)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _load_config(path) -> RunConfig:
    if path is None:
        return RunConfig({}, {}, {}, {})
    return load_run_config(path)


# --- spectrum files (wl,T and wl,target,predicted) ---


def read_spectrum(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].split(",")[:2] != ["wl", "T"]:
        raise ds.SchemaError(f"{path}: expected header 'wl,T'")
    body = [line for line in lines[1:] if line.strip()]
    if len(body) != tmm.N_POINTS:
        raise ds.SchemaError(
            f"{path}: expected {tmm.N_POINTS} spectrum rows, found {len(body)}"
        )
    values = np.empty(tmm.N_POINTS)
    for i, line in enumerate(body):
        cells = line.split(",")
        if len(cells) != 2:
            raise ds.SchemaError(f"{path}: row {i + 2} must have 2 columns")
        wl, value = float(cells[0]), float(cells[1])
        if wl != tmm.WAVELENGTHS_NM[i]:
            raise ds.SchemaError(
                f"{path}: row {i + 2} wavelength {wl:g} != grid {tmm.WAVELENGTHS_NM[i]:g}"
            )
        values[i] = value
    return values


def write_spectrum(path, values) -> None:
    rows = ["wl,T"]
    rows += [f"{int(wl)},{v:.9g}" for wl, v in zip(tmm.WAVELENGTHS_NM, values)]
    Path(path).write_text("\n".join(rows) + "\n", newline="\n")


# --- subcommands ---


def cmd_gen_data(args) -> int:
    overrides = _load_config(args.config).dataset
    config = ds.GenConfig(
        layer_count=overrides.get("layer_count", args.layers),
        sample_count=overrides.get("sample_count", args.count),
        thickness_min_nm=overrides.get("thickness_min_nm", ds.THICKNESS_MIN_NM),
        thickness_max_nm=overrides.get("thickness_max_nm", ds.THICKNESS_MAX_NM),
        thickness_step_nm=overrides.get("thickness_step_nm", ds.THICKNESS_STEP_NM),
        seed=overrides.get("seed", args.seed),
    )
    start = time.perf_counter()
    data = ds.generate_dataset(config)
    ds.write_dataset(data, args.out)
    print(
        f"wrote {args.out}: {config.sample_count} samples x {config.layer_count} layers "
        f"in {time.perf_counter() - start:.2f}s"
    )
    return 0


def _fnn_meta(algorithm, layer_count, seed):
    return {
        "role": "fnn",
        "algorithm": algorithm,
        "layer_count": layer_count,
        "init": "glorot_uniform",
        "init_seed": seed,
    }


def _repeat_path(path, i: int, repeats: int) -> Path:
    path = Path(path)
    if repeats == 1:
        return path
    return path.with_name(f"{path.stem}_r{i}{path.suffix}")


def _write_summary(prefix, rows) -> None:
    lines = ["repeat,seed,epochs_run,test_r2,test_mse,seconds"]
    lines += [
        f"{r['repeat']},{r['seed']},{r['epochs_run']},{r['test_r2']:.6f},"
        f"{r['test_mse']:.9g},{r['seconds']:.3f}"
        for r in rows
    ]
    mean_r2 = sum(r["test_r2"] for r in rows) / len(rows)
    mean_mse = sum(r["test_mse"] for r in rows) / len(rows)
    lines.append(f"mean,,,{mean_r2:.6f},{mean_mse:.9g},")
    Path(f"{prefix}_summary.csv").write_text("\n".join(lines) + "\n", newline="\n")
    print(f"mean over {len(rows)} repeats: r2={mean_r2:.4f} mse={mean_mse:.3e}")


def cmd_train_fnn(args) -> int:
    from dataclasses import replace

    run_cfg = _load_config(args.config)
    data = ds.read_dataset(args.data)
    config = train_config(
        "fnn",
        run_cfg.training_fnn,
        {
            "epochs": args.epochs,
            "batch_size": args.batch_size,
            "lr": args.lr,
            "patience": args.patience,
            "seed": args.seed,
        },
    )
    prefix = args.report or str(Path(args.out).with_suffix(""))
    rows = []
    for i in range(args.repeats):
        cfg_i = replace(config, seed=config.seed + i)
        network = build_fnn(args.algo, data.layer_count, seed=cfg_i.seed)
        network, report = train_fnn(network, data, cfg_i)
        save_network(
            _repeat_path(args.out, i, args.repeats),
            network,
            _fnn_meta(args.algo, data.layer_count, cfg_i.seed),
        )
        save_report(report, prefix if args.repeats == 1 else f"{prefix}_r{i}")
        rows.append(
            {
                "repeat": i,
                "seed": cfg_i.seed,
                "epochs_run": report.epochs_run,
                "test_r2": report.test_r2,
                "test_mse": report.test_mse,
                "seconds": report.seconds,
            }
        )
        print(
            f"fnn[{args.algo}] epochs={report.epochs_run} best={report.best_epoch} "
            f"test_r2={report.test_r2:.4f} test_mse={report.test_mse:.3e} "
            f"({report.seconds:.1f}s)"
        )
    if args.repeats > 1:
        _write_summary(prefix, rows)
    return 0


def _load_fnn(path):
    kind, networks, manifest = load_checkpoint(path)
    if kind != "network":
        raise ds.SchemaError(f"{path}: expected a forward-network checkpoint, got {kind}")
    meta = manifest["networks"][0]
    return networks["net"], meta


def _train_one_tandem(inn_algo, fnn_net, fnn_meta, data, config):
    inn = build_inn(inn_algo, data.layer_count, seed=config.seed)
    tandem = compose_tandem(
        inn,
        fnn_net,
        inn_meta={
            "role": "inn",
            "algorithm": inn_algo,
            "layer_count": data.layer_count,
            "init": "glorot_uniform",
            "init_seed": config.seed,
        },
        fnn_meta={
            k: fnn_meta[k]
            for k in ("role", "algorithm", "layer_count", "init", "init_seed")
            if k in fnn_meta
        },
    )
    return train_tandem(tandem, data, config)


def cmd_train_tnn(args) -> int:
    from dataclasses import replace

    run_cfg = _load_config(args.config)
    data = ds.read_dataset(args.data)
    config = train_config(
        "tnn",
        run_cfg.training_tnn,
        {
            "epochs": args.epochs,
            "batch_size": args.batch_size,
            "lr": args.lr,
            "patience": args.patience,
            "seed": args.seed,
        },
    )
    if args.matrix:
        return _run_matrix(args, run_cfg, data, config)
    if args.fnn is None:
        raise ds.SchemaError("train-tnn requires --fnn CKPT (or --matrix)")
    fnn_net, fnn_meta = _load_fnn(args.fnn)
    if fnn_net.input_dim != data.layer_count:
        raise ds.SchemaError(
            f"forward checkpoint expects {fnn_net.input_dim} layers but the dataset "
            f"has {data.layer_count}"
        )
    prefix = args.report or str(Path(args.out).with_suffix(""))
    rows = []
    for i in range(args.repeats):
        cfg_i = replace(config, seed=config.seed + i)
        tandem, report = _train_one_tandem(args.inn, fnn_net, fnn_meta, data, cfg_i)
        save_tandem(_repeat_path(args.out, i, args.repeats), tandem)
        save_report(report, prefix if args.repeats == 1 else f"{prefix}_r{i}")
        rows.append(
            {
                "repeat": i,
                "seed": cfg_i.seed,
                "epochs_run": report.epochs_run,
                "test_r2": report.test_r2,
                "test_mse": report.test_mse,
                "seconds": report.seconds,
            }
        )
        print(
            f"tnn[{args.inn}-{fnn_meta.get('algorithm', '?')}] epochs={report.epochs_run} "
            f"best={report.best_epoch} test_r2={report.test_r2:.4f} "
            f"test_mse={report.test_mse:.3e} ({report.seconds:.1f}s)"
        )
    if args.repeats > 1:
        _write_summary(prefix, rows)
    return 0


def _run_matrix(args, run_cfg, data, tnn_config) -> int:
    out_dir = Path(args.out_dir or Path(args.out).parent or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    fnn_config = train_config(
        "fnn", run_cfg.training_fnn, {"epochs": args.fnn_epochs, "seed": args.seed}
    )
    fnns = {}
    for algo in ALGORITHMS:
        net = build_fnn(algo, data.layer_count, seed=fnn_config.seed)
        net, report = train_fnn(net, data, fnn_config)
        path = out_dir / f"fnn_{algo}.ckpt"
        save_network(path, net, _fnn_meta(algo, data.layer_count, fnn_config.seed))
        fnns[algo] = (path, report)
        print(f"fnn[{algo}] test_r2={report.test_r2:.4f} ({report.seconds:.1f}s)")
    rows = ["inn,fnn,r2,mse,seconds"]
    for inn_algo in ALGORITHMS:
        for fnn_algo in ALGORITHMS:
            fnn_net, fnn_meta = _load_fnn(fnns[fnn_algo][0])
            tandem, report = _train_one_tandem(inn_algo, fnn_net, fnn_meta, data, tnn_config)
            save_tandem(out_dir / f"tnn_{inn_algo}_{fnn_algo}.ckpt", tandem)
            rows.append(
                f"{inn_algo},{fnn_algo},{report.test_r2:.6f},"
                f"{report.test_mse:.9g},{report.seconds:.3f}"
            )
            print(
                f"tnn[{inn_algo}-{fnn_algo}] test_r2={report.test_r2:.4f} "
                f"test_mse={report.test_mse:.3e} ({report.seconds:.1f}s)"
            )
    matrix_path = out_dir / "matrix.csv"
    matrix_path.write_text("\n".join(rows) + "\n", newline="\n")
    print(f"wrote {matrix_path}")
    return 0


def cmd_invert(args) -> int:
    kind, networks, manifest = load_checkpoint(args.tnn)
    if kind != "tandem":
        raise ds.SchemaError(f"{args.tnn}: expected a tandem checkpoint, got {kind}")
    tandem = TandemModel(networks["inn"], networks["fnn"])
    target = read_spectrum(args.target)
    design = predict_inverse(tandem, target)
    prefix = args.out
    design_rows = ["layer,thickness_nm"]
    design_rows += [
        f"{i + 1},{int(round(d))}" for i, d in enumerate(design.thicknesses_nm)
    ]
    Path(f"{prefix}_design.csv").write_text("\n".join(design_rows) + "\n", newline="\n")
    recon_rows = ["wl,target,predicted"]
    recon_rows += [
        f"{int(wl)},{t:.9g},{p:.9g}"
        for wl, t, p in zip(tmm.WAVELENGTHS_NM, target, design.reconstructed)
    ]
    Path(f"{prefix}_reconstruction.csv").write_text(
        "\n".join(recon_rows) + "\n", newline="\n"
    )
    Path(f"{prefix}_metrics.txt").write_text(
        f"design_mse = {design.design_mse:.9g}\n", newline="\n"
    )
    print(f"design MSE (TMM-verified): {design.design_mse:.6g}")
    return 0


def cmd_ga(args) -> int:
    run_cfg = _load_config(args.config)
    overrides = dict(GA_DEFAULTS)
    overrides.update(run_cfg.ga)
    config = ga_mod.GaConfig(
        layer_count=args.layers,
        population_size=(
            args.population if args.population is not None else overrides["population_size"]
        ),
        generations=(
            args.generations if args.generations is not None else overrides["generations"]
        ),
        mutation_rate=overrides["mutation_rate"],
        selected_fraction=overrides["selected_fraction"],
        seed=args.seed if args.seed is not None else overrides.get("seed", 0),
        target_mse=args.target_mse,
    )
    target = read_spectrum(args.target)
    fnn_net = None
    if args.backend in ("fnn", "both"):
        fnn_net, _ = _load_fnn(args.fnn)
    prefix = args.out
    if args.backend == "both":
        results = ga_mod.ga_compare(target, fnn_net, config)
        for result in results:
            Path(f"{prefix}_history_{result.backend}.csv").write_text(
                ga_mod.history_csv(result), newline="\n"
            )
        Path(f"{prefix}_compare.csv").write_text(
            ga_mod.compare_csv(results), newline="\n"
        )
        for result in results:
            print(
                f"{result.backend}: best_mse={result.best.fitness:.6g} "
                f"gen={result.generations_run} ({result.seconds:.1f}s)"
            )
    else:
        result = ga_mod.run_ga(target, args.backend, config, fnn=fnn_net)
        Path(f"{prefix}_history_{args.backend}.csv").write_text(
            ga_mod.history_csv(result), newline="\n"
        )
        print(
            f"{args.backend}: best_mse={result.best.fitness:.6g} "
            f"gen={result.generations_run} ({result.seconds:.1f}s)"
        )
    return 0


def cmd_plot(args) -> int:
    if args.what == "loss":
        lines = Path(args.input).read_text().splitlines()
        if not lines or lines[0] != "epoch,train_mse,val_mse":
            raise ds.SchemaError(f"{args.input}: expected a losses CSV")
        epochs, train, val = [], [], []
        for line in lines[1:]:
            if not line.strip():
                continue
            e, t, v = line.split(",")
            epochs.append(float(e))
            train.append(float(t))
            val.append(float(v))
        plotting.line_chart(
            [("train", epochs, train), ("validation", epochs, val)],
            args.out,
            title="Training loss",
            xlabel="epoch",
            ylabel="MSE",
            log_y=True,
        )
    else:  # spectra
        lines = Path(args.input).read_text().splitlines()
        if not lines or lines[0] != "wl,target,predicted":
            raise ds.SchemaError(f"{args.input}: expected a reconstruction CSV")
        wl, target, pred = [], [], []
        for line in lines[1:]:
            if not line.strip():
                continue
            w, t, p = line.split(",")
            wl.append(float(w))
            target.append(float(t))
            pred.append(float(p))
        plotting.line_chart(
            [("target", wl, target), ("predicted", wl, pred)],
            args.out,
            title="Transmission spectrum",
            xlabel="wavelength (nm)",
            ylabel="T",
        )
        csv_out = args.csv or str(Path(args.out).with_suffix(".csv"))
        rows = ["wl,target,predicted,diff"]
        rows += [
            f"{int(w)},{t:.9g},{p:.9g},{p - t:.9g}"
            for w, t, p in zip(wl, target, pred)
        ]
        Path(csv_out).write_text("\n".join(rows) + "\n", newline="\n")
    print(f"wrote {args.out}")
    return 0


# --- parser ---


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tandemfilm",
        description="Thin-film dataset generation, network training, and inverse design.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a (thicknesses, spectrum) dataset")
    p.add_argument("--layers", type=_positive_int, default=20)
    p.add_argument("--count", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train-fnn", help="train a forward network")
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="report file prefix (default: checkpoint stem)")
    p.add_argument("--config")
    p.add_argument("--epochs", type=_positive_int)
    p.add_argument("--batch-size", type=_positive_int, dest="batch_size")
    p.add_argument("--lr", type=float)
    p.add_argument("--patience", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--repeats", type=_positive_int, default=1,
                   help="train N times with seeds seed..seed+N-1 and average")
    p.set_defaults(func=cmd_train_fnn)

    p = sub.add_parser("train-tnn", help="train a tandem (inverse) network")
    p.add_argument("--inn", choices=ALGORITHMS, default="mlp")
    p.add_argument("--fnn", help="pre-trained forward network checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="tnn.ckpt")
    p.add_argument("--report")
    p.add_argument("--config")
    p.add_argument("--epochs", type=_positive_int)
    p.add_argument("--batch-size", type=_positive_int, dest="batch_size")
    p.add_argument("--lr", type=float)
    p.add_argument("--patience", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--repeats", type=_positive_int, default=1,
                   help="train N times with seeds seed..seed+N-1 and average")
    p.add_argument("--matrix", action="store_true", help="train all nine INN x FNN pairs")
    p.add_argument("--out-dir", dest="out_dir", help="output directory for --matrix")
    p.add_argument("--fnn-epochs", type=_positive_int, dest="fnn_epochs",
                   help="forward-network epochs in --matrix mode")
    p.set_defaults(func=cmd_train_tnn)

    p = sub.add_parser("invert", help="inverse-design thicknesses for a target spectrum")
    p.add_argument("--tnn", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True, help="output file prefix")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("ga", help="genetic-algorithm inverse design")
    p.add_argument("--backend", choices=("tmm", "fnn", "both"), default="tmm")
    p.add_argument("--target", required=True)
    p.add_argument("--fnn", help="forward-network checkpoint (fnn/both backends)")
    p.add_argument("--layers", type=_positive_int, default=20)
    p.add_argument("--population", type=_positive_int)
    p.add_argument("--generations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--target-mse", type=float, dest="target_mse")
    p.add_argument("--out", default="ga")
    p.add_argument("--config")
    p.set_defaults(func=cmd_ga)

    p = sub.add_parser("plot", help="render SVG charts from report files")
    p.add_argument("what", choices=("loss", "spectra"))
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", help="underlying-data CSV path (spectra only)")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "ga" and args.backend in ("fnn", "both") and not args.fnn:
        parser.error("--backend fnn/both requires --fnn CKPT")
    try:
        return args.func(args)
    except (NumericError, tmm.SingularStackError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
