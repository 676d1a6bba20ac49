import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from tandemfilm import dataset as ds
from tandemfilm import tmm
from tandemfilm.cli import main, read_spectrum, write_spectrum
from tandemfilm.runconfig import load_run_config, train_config

GOLDEN_DIR = Path(__file__).parent / "data"


def run_cli(*args) -> int:
    return main([str(a) for a in args])


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Shared artifacts: dataset, target spectrum, small fnn/tnn checkpoints."""
    root = tmp_path_factory.mktemp("cli")
    assert run_cli("gen-data", "--layers", 8, "--count", 60, "--seed", 42,
                   "--out", root / "d.csv") == 0
    data = ds.read_dataset(root / "d.csv")
    write_spectrum(root / "target.csv", data.spectra[0])
    assert run_cli("train-fnn", "--algo", "mlp", "--data", root / "d.csv",
                   "--out", root / "fnn.ckpt", "--epochs", 2, "--seed", 7) == 0
    assert run_cli("train-tnn", "--inn", "mlp", "--fnn", root / "fnn.ckpt",
                   "--data", root / "d.csv", "--out", root / "tnn.ckpt",
                   "--epochs", 2, "--seed", 8) == 0
    return root


def test_gen_data_shape_and_golden(tmp_path):
    out = tmp_path / "g.csv"
    assert run_cli("gen-data", "--layers", 8, "--count", 5, "--seed", 42, "--out", out) == 0
    assert out.read_bytes() == (GOLDEN_DIR / "golden_dataset_8layer_seed42_n5.csv").read_bytes()
    rows = out.read_text().splitlines()
    assert len(rows) == 6
    assert len(rows[0].split(",")) == 409


def test_gen_data_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run_cli("gen-data", "--layers", 8, "--count", 10, "--seed", 3, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()
    assert ds.manifest_path_for(a).read_text() == ds.manifest_path_for(b).read_text()


def test_gen_data_zero_layers_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        run_cli("gen-data", "--layers", 0, "--count", 5, "--out", tmp_path / "x.csv")
    assert excinfo.value.code == 2


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "tandemfilm.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "gen-data" in proc.stdout


def test_missing_flag_exits_2_in_subprocess(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "tandemfilm.cli", "gen-data", "--count", "5"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert proc.returncode == 2


def test_train_rerun_reproduces_checkpoint_and_losses(workdir, tmp_path):
    out = tmp_path / "fnn2.ckpt"
    assert run_cli("train-fnn", "--algo", "mlp", "--data", workdir / "d.csv",
                   "--out", out, "--epochs", 2, "--seed", 7) == 0
    assert out.read_bytes() == (workdir / "fnn.ckpt").read_bytes()
    assert (tmp_path / "fnn2_losses.csv").read_text() == (workdir / "fnn_losses.csv").read_text()


def test_train_fnn_default_config_echo(workdir):
    # defaults: 500 epochs, batch 16, lr 1e-4, no patience
    cfg = train_config("fnn", {}, {})
    assert (cfg.epochs, cfg.batch_size, cfg.lr, cfg.patience) == (500, 16, 1e-4, None)
    cfg = train_config("tnn", {}, {})
    assert (cfg.epochs, cfg.batch_size, cfg.lr, cfg.patience) == (1000, 16, 1e-4, 200)
    report = (workdir / "fnn_report.txt").read_text()
    assert "batch_size = 16" in report
    assert "learning_rate = 0.0001" in report


def test_train_tnn_width_mismatch_names_both_widths(workdir, tmp_path):
    out12 = tmp_path / "d12.csv"
    assert run_cli("gen-data", "--layers", 12, "--count", 10, "--seed", 1, "--out", out12) == 0
    code = run_cli("train-tnn", "--inn", "mlp", "--fnn", workdir / "fnn.ckpt",
                   "--data", out12, "--out", tmp_path / "t.ckpt", "--epochs", 1)
    assert code == 3


def test_invert_writes_design_and_reconstruction(workdir, tmp_path):
    prefix = tmp_path / "inv"
    assert run_cli("invert", "--tnn", workdir / "tnn.ckpt",
                   "--target", workdir / "target.csv", "--out", prefix) == 0
    design_rows = (tmp_path / "inv_design.csv").read_text().splitlines()
    assert design_rows[0] == "layer,thickness_nm"
    thicknesses = np.array([int(r.split(",")[1]) for r in design_rows[1:]])
    assert len(thicknesses) == 8
    assert np.all((thicknesses >= 30) & (thicknesses <= 70))
    recon_rows = (tmp_path / "inv_reconstruction.csv").read_text().splitlines()
    assert recon_rows[0] == "wl,target,predicted"
    assert len(recon_rows) == 402
    assert recon_rows[1].startswith("400,")
    assert recon_rows[-1].startswith("800,")


def test_invert_rejects_short_target(workdir, tmp_path):
    bad = tmp_path / "short.csv"
    lines = (workdir / "target.csv").read_text().splitlines()
    bad.write_text("\n".join(lines[:-1]) + "\n")  # 400 rows
    code = run_cli("invert", "--tnn", workdir / "tnn.ckpt", "--target", bad,
                   "--out", tmp_path / "x")
    assert code == 3


def test_ga_fnn_backend_without_checkpoint_is_usage_error(workdir):
    with pytest.raises(SystemExit) as excinfo:
        run_cli("ga", "--backend", "fnn", "--target", workdir / "target.csv")
    assert excinfo.value.code == 2


def test_ga_both_emits_two_row_compare(workdir, tmp_path):
    prefix = tmp_path / "ga"
    assert run_cli("ga", "--backend", "both", "--target", workdir / "target.csv",
                   "--fnn", workdir / "fnn.ckpt", "--layers", 8, "--population", 20,
                   "--generations", 3, "--seed", 5, "--out", prefix) == 0
    compare = (tmp_path / "ga_compare.csv").read_text().splitlines()
    assert compare[0] == "backend,best_mse,seconds,generations_run"
    assert len(compare) == 3
    assert compare[1].startswith("tmm,") and compare[2].startswith("fnn,")
    for backend in ("tmm", "fnn"):
        history = (tmp_path / f"ga_history_{backend}.csv").read_text().splitlines()
        assert history[0] == "generation,best_mse,mean_mse"
        assert len(history) == 5  # generations 0..3


def test_ga_target_mse_stops_early(workdir, tmp_path):
    prefix = tmp_path / "gae"
    assert run_cli("ga", "--backend", "tmm", "--target", workdir / "target.csv",
                   "--layers", 8, "--population", 40, "--generations", 300,
                   "--seed", 11, "--target-mse", 0.05, "--out", prefix) == 0
    history = (tmp_path / "gae_history_tmm.csv").read_text().splitlines()
    last_gen, best, _ = history[-1].split(",")
    assert int(last_gen) < 300
    assert float(best) <= 0.05


def test_ga_history_rerun_byte_identical(workdir, tmp_path):
    out = []
    for name in ("r1", "r2"):
        prefix = tmp_path / name
        assert run_cli("ga", "--backend", "tmm", "--target", workdir / "target.csv",
                       "--layers", 8, "--population", 20, "--generations", 4,
                       "--seed", 9, "--out", prefix) == 0
        out.append((tmp_path / f"{name}_history_tmm.csv").read_bytes())
    assert out[0] == out[1]


def test_plot_loss_has_two_series(workdir, tmp_path):
    svg = tmp_path / "loss.svg"
    assert run_cli("plot", "loss", "--input", workdir / "fnn_losses.csv", "--out", svg) == 0
    text = svg.read_text()
    assert text.count("<polyline") == 2
    assert "train" in text and "validation" in text


def test_plot_spectra_perfect_prediction_diff_is_zero(workdir, tmp_path):
    recon = tmp_path / "recon.csv"
    target = read_spectrum(workdir / "target.csv")
    rows = ["wl,target,predicted"]
    rows += [f"{int(w)},{v:.9g},{v:.9g}" for w, v in zip(tmm.WAVELENGTHS_NM, target)]
    recon.write_text("\n".join(rows) + "\n")
    svg = tmp_path / "spec.svg"
    assert run_cli("plot", "spectra", "--input", recon, "--out", svg) == 0
    text = svg.read_text()
    assert text.count("<polyline") == 2
    assert ">400<" in text and ">800<" in text
    diff_rows = (tmp_path / "spec.csv").read_text().splitlines()[1:]
    assert all(row.split(",")[3] == "0" for row in diff_rows)


def test_plot_missing_input(tmp_path):
    assert run_cli("plot", "loss", "--input", tmp_path / "nope.csv",
                   "--out", tmp_path / "x.svg") == 3


def test_numeric_failure_exits_4(monkeypatch, tmp_path):
    # route a real parse through main() with the command made to blow up,
    # exercising the NumericError -> exit 4 mapping
    from tandemfilm import cli as cli_mod
    from tandemfilm.training import NumericError

    real_build = cli_mod.build_parser

    def boom(args):
        raise NumericError("non-finite training loss at epoch 1")

    def patched_build():
        parser = real_build()
        args_holder = parser.parse_args
        def parse(argv=None):
            args = args_holder(argv)
            args.func = boom
            return args
        parser.parse_args = parse
        return parser

    monkeypatch.setattr(cli_mod, "build_parser", patched_build)
    assert cli_mod.main(["gen-data", "--out", str(tmp_path / "x.csv")]) == 4


def test_config_file_overrides_and_rejects_unknown_keys(tmp_path, workdir):
    good = tmp_path / "run.cfg"
    good.write_text("[training.fnn]\nepochs = 3\nbatch_size = 8\n")
    cfg = load_run_config(good)
    assert cfg.training_fnn == {"epochs": 3, "batch_size": 8}
    tc = train_config("fnn", cfg.training_fnn, {"epochs": None})
    assert tc.epochs == 3 and tc.batch_size == 8

    bad = tmp_path / "bad.cfg"
    bad.write_text("[training.fnn]\nlearning = 0.1\n")
    with pytest.raises(ValueError, match="unknown key"):
        load_run_config(bad)
    bad2 = tmp_path / "bad2.cfg"
    bad2.write_text("[optimizer]\nlr = 0.1\n")
    with pytest.raises(ValueError, match="unknown config section"):
        load_run_config(bad2)


def test_config_file_drives_gen_data(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[dataset]\nlayer_count = 8\nsample_count = 5\nseed = 42\n")
    out = tmp_path / "cfg.csv"
    assert run_cli("gen-data", "--out", out, "--config", cfg) == 0
    assert out.read_bytes() == (GOLDEN_DIR / "golden_dataset_8layer_seed42_n5.csv").read_bytes()


def test_matrix_mode_runs_all_nine_pairs(tmp_path):
    data_path = tmp_path / "m.csv"
    assert run_cli("gen-data", "--layers", 8, "--count", 20, "--seed", 2,
                   "--out", data_path) == 0
    assert run_cli("train-tnn", "--matrix", "--data", data_path,
                   "--out-dir", tmp_path / "runs", "--epochs", 1, "--fnn-epochs", 1,
                   "--seed", 4) == 0
    matrix = (tmp_path / "runs" / "matrix.csv").read_text().splitlines()
    assert matrix[0] == "inn,fnn,r2,mse,seconds"
    assert len(matrix) == 10
    pairs = {tuple(r.split(",")[:2]) for r in matrix[1:]}
    assert pairs == {(i, f) for i in ("mlp", "cnn", "lstm") for f in ("mlp", "cnn", "lstm")}
    for inn in ("mlp", "cnn", "lstm"):
        for fnn in ("mlp", "cnn", "lstm"):
            assert (tmp_path / "runs" / f"tnn_{inn}_{fnn}.ckpt").exists()
