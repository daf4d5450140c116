import json
import logging

import numpy as np
import pytest

from lete import cli
from lete.baselines import BaselineEncoder, lete_params_replicating_sin
from lete.combined import CombinedEncoder
from lete.io import (
    DataFileError,
    SchemaError,
    VersionMismatchError,
    load_model,
    read_event_csv,
    save_model,
    write_event_csv,
)
from lete.spectral import EventSequence
from lete.train import Model


def all_encoders():
    return {
        "combined": CombinedEncoder.init(6, 0.5, rng=0),
        "fourier_dense": CombinedEncoder.init(4, 1.0, rng=1),
        "fourier_diag": CombinedEncoder.init(4, 1.0, diagonal_only=True, k_max=3, rng=2),
        "spline": CombinedEncoder.init(5, 0.0, grid_size=12, degree=2, span=(-3.0, 1.0), rng=3),
        "spline_mix": CombinedEncoder.init(3, 0.0, dense_mix=True, rng=4),
        "raw": lete_params_replicating_sin(np.array([0.3, 2.0]), np.array([1.0, -0.5])),
        "ftr": BaselineEncoder.init("ftr", 6),
        "t2v": BaselineEncoder("t2v", [0.7, 1.3, 0.01], [0.1, 0.2, 0.3]),
        "unified_sin": BaselineEncoder.init("unified_sin", 4),
    }


class TestModelFiles:
    @pytest.mark.parametrize("name", list(all_encoders()))
    def test_round_trip_bitwise(self, tmp_path, name):
        enc = all_encoders()[name]
        if hasattr(enc, "scale"):
            enc.scale[:] = np.random.default_rng(0).uniform(0.5, 2, enc.dim)
        path = tmp_path / "m.json"
        save_model(path, enc, seed=5)
        loaded = load_model(path)
        t = np.random.default_rng(1).uniform(-1e3, 1e3, 100)
        np.testing.assert_array_equal(loaded(t), enc(t))
        assert type(loaded) is type(enc)

    def test_model_with_decoder(self, tmp_path):
        enc = CombinedEncoder.init(4, 0.5, rng=0)
        enc.frozen = {"omega"}
        model = Model(enc, rng=1)
        save_model(tmp_path / "m.json", model, seed=1)
        loaded = load_model(tmp_path / "m.json")
        t = np.linspace(-5, 5, 100)
        np.testing.assert_array_equal(loaded(t), model(t))
        assert loaded.frozen == {"enc.omega"}
        data = json.loads((tmp_path / "m.json").read_text())
        assert data["format_version"] == 1 and data["seed"] == 1
        assert data["encoder"]["spline"]["degree"] == 3

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "m.json"
        save_model(path, CombinedEncoder.init(4, rng=0))
        text = path.read_text()
        path.write_text(text[: len(text) // 2])
        with pytest.raises(SchemaError):
            load_model(path)

    def test_version_bump(self, tmp_path):
        path = tmp_path / "m.json"
        save_model(path, CombinedEncoder.init(4, rng=0))
        data = json.loads(path.read_text())
        data["format_version"] = 2
        path.write_text(json.dumps(data))
        with pytest.raises(VersionMismatchError):
            load_model(path)

    def test_inconsistent_shape(self, tmp_path):
        path = tmp_path / "m.json"
        save_model(path, CombinedEncoder.init(4, 1.0, rng=0))
        data = json.loads(path.read_text())
        data["encoder"]["fourier"]["w_cos"] = data["encoder"]["fourier"]["w_cos"][:-1]
        path.write_text(json.dumps(data))
        with pytest.raises(SchemaError, match="w_cos"):
            load_model(path)

    def test_unknown_kind(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"format_version": 1, "encoder": {"kind": "wavelet"}}))
        with pytest.raises(SchemaError, match="wavelet"):
            load_model(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_model(tmp_path / "absent.json")

    def test_errors_are_distinct(self):
        assert not issubclass(SchemaError, VersionMismatchError)
        assert not issubclass(VersionMismatchError, SchemaError)


class TestEventCsv:
    def _write(self, path, rows):
        path.write_text("node_id,timestamp\n" + "".join(f"{a},{b}\n" for a, b in rows))

    def test_threshold(self, tmp_path):
        rows = [("a", i) for i in range(6)] + [("b", i) for i in range(5)] + [("c", i) for i in range(9)]
        self._write(tmp_path / "e.csv", rows)
        seqs = read_event_csv(tmp_path / "e.csv", min_events=5)
        assert sorted(s.node_id for s in seqs) == ["a", "c"]

    def test_empty_file(self, tmp_path, caplog):
        (tmp_path / "e.csv").write_text("")
        with caplog.at_level(logging.WARNING):
            assert read_event_csv(tmp_path / "e.csv") == []
        assert "empty" in caplog.text

    def test_malformed_row_line_number(self, tmp_path):
        self._write(tmp_path / "e.csv", [("a", 1.0), ("a", "oops"), ("a", 2.0)])
        with pytest.raises(DataFileError, match=":3:"):
            read_event_csv(tmp_path / "e.csv")

    def test_wrong_field_count(self, tmp_path):
        (tmp_path / "e.csv").write_text("node_id,timestamp\na,1,2\n")
        with pytest.raises(DataFileError, match=":2:"):
            read_event_csv(tmp_path / "e.csv")

    def test_bad_header(self, tmp_path):
        (tmp_path / "e.csv").write_text("id,time\na,1\n")
        with pytest.raises(DataFileError, match="header"):
            read_event_csv(tmp_path / "e.csv")

    def test_sorted_with_duplicates(self, tmp_path):
        self._write(tmp_path / "e.csv", [("a", t) for t in [5, 1, 3, 3, 2, 9, 1]])
        (seq,) = read_event_csv(tmp_path / "e.csv", min_events=0)
        np.testing.assert_array_equal(seq.times, [1, 1, 2, 3, 3, 5, 9])

    def test_generator_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        seqs = [EventSequence(np.sort(rng.exponential(1.0, 1000).cumsum()), f"n{i}") for i in range(10)]
        write_event_csv(tmp_path / "e.csv", seqs)
        got = read_event_csv(tmp_path / "e.csv")
        assert [s.node_id for s in got] == [s.node_id for s in seqs]
        for a, b in zip(got, seqs):
            np.testing.assert_array_equal(a.times, b.times)


class TestParseCli:
    def test_fit_happy_path(self):
        args = cli.parse_cli("fit --encoder fourier --target sin --dim 1 --steps 5000 --seed 7".split())
        assert (args.command, args.encoder, args.target, args.dim, args.steps, args.seed) == ("fit", "fourier", "sin", 1, 5000, 7)
        assert args.formats == ["csv", "json"]

    def test_ratio_out_of_range(self):
        with pytest.raises(cli.UsageError, match=r"--p.*\[0, 1\]"):
            cli.parse_cli("fit --encoder fourier --p 1.5".split())

    def test_entropy_default_threshold(self):
        args = cli.parse_cli("entropy --input events.csv --min-events 5".split())
        assert args.command == "entropy" and args.min_events == 5
        assert cli.parse_cli("entropy --input events.csv".split()).min_events == 5

    @pytest.mark.parametrize(
        "argv",
        [
            "",
            "train",
            "fit --encoder fourier --bogus 1",
            "fit --encoder fourier --dim 2",
            "fit --encoder spline --p 1",
            "reconstruct --encoders fte,wavelet",
            "reconstruct --dim 1",
            "gradcheck --h 1e-2",
            "gradcheck --encoder ftr --dim 3",
            "fit --encoder fourier --steps 0",
            "entropy",
            "entropy --input a.csv --synthetic 3",
            "featmap --t-min 5 --t-max 1",
            "fit --encoder fourier --format pdf",
        ],
    )
    def test_usage_errors(self, argv):
        with pytest.raises(cli.UsageError):
            cli.parse_cli(argv.split())

    def test_repeated_format(self):
        args = cli.parse_cli("replicate-sin --format svg --format csv".split())
        assert args.formats == ["svg", "csv"]


class TestMain:
    def test_usage_exit_code(self, capsys):
        assert cli.main(["fit", "--encoder", "fourier", "--p", "1.5"]) == 1
        assert "--p" in capsys.readouterr().err

    def test_data_exit_code(self, tmp_path):
        assert cli.main(["entropy", "--input", str(tmp_path / "none.csv"), "--output-dir", str(tmp_path)]) == 2
        bad = tmp_path / "bad.csv"
        bad.write_text("node_id,timestamp\na,x\n")
        assert cli.main(["entropy", "--input", str(bad), "--output-dir", str(tmp_path)]) == 2
        (tmp_path / "m.json").write_text("{")
        assert cli.main(["featmap", "--model", str(tmp_path / "m.json"), "--output-dir", str(tmp_path)]) == 2

    def test_numerical_exit_code(self, tmp_path):
        argv = ["gradcheck", "--encoder", "spline", "--dim", "2", "--tol", "1e-300", "--output-dir", str(tmp_path)]
        assert cli.main(argv) == 3

    def test_divergence_exit_code(self, tmp_path):
        argv = ["fit", "--encoder", "fte", "--lr", "1e300", "--steps", "50", "--output-dir", str(tmp_path)]
        with np.errstate(all="ignore"):
            assert cli.main(argv) == 3

    def test_empty_event_file_succeeds(self, tmp_path):
        (tmp_path / "e.csv").write_text("")
        assert cli.main(["entropy", "--input", str(tmp_path / "e.csv"), "--output-dir", str(tmp_path / "o")]) == 0

    def test_outputs_stay_in_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        out = tmp_path / "out"
        runs = [
            ["fit", "--encoder", "spline", "--steps", "20"],
            ["reconstruct", "--steps", "10", "--n", "64"],
            ["entropy", "--synthetic", "5", "--gaps"],
            ["featmap", "--dim", "4"],
            ["gradcheck", "--dim", "2"],
            ["replicate-sin"],
        ]
        for argv in runs:
            assert cli.main(argv + ["--output-dir", str(out), "--format", "csv", "--format", "json", "--format", "png"]) == 0
        assert sorted(p.name for p in tmp_path.iterdir()) == ["out"]
        names = {p.name for p in out.iterdir()}
        for expected in ["fit_spline_sin.csv", "fit_spline_sin.png", "fit_spline_sin_model.json",
                         "reconstruct_mixed.json", "entropy.csv", "entropy_density.png",
                         "featmap.csv", "transfer_listing.txt", "gradcheck.json", "replicate_sin.json"]:
            assert expected in names

    def test_fit_is_deterministic(self, tmp_path, capsys):
        outs = []
        for sub in ("a", "b"):
            cli.main(["fit", "--encoder", "fte", "--target", "swish", "--steps", "200", "--seed", "3",
                      "--output-dir", str(tmp_path / sub)])
            outs.append((tmp_path / sub / "fit_fte_swish.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_featmap_from_saved_model(self, tmp_path):
        enc = CombinedEncoder.init(4, 0.5, rng=0)
        save_model(tmp_path / "m.json", enc)
        assert cli.main(["featmap", "--model", str(tmp_path / "m.json"), "--t-min", "0", "--t-max", "1",
                         "--n-grid", "11", "--output-dir", str(tmp_path / "o")]) == 0
        data = np.loadtxt(tmp_path / "o" / "featmap.csv", delimiter=",", skiprows=1)
        np.testing.assert_array_equal(data[:, 1:], enc(np.linspace(0, 1, 11)))

    def test_svg_rendering(self, tmp_path):
        assert cli.main(["featmap", "--dim", "2", "--format", "svg", "--output-dir", str(tmp_path)]) == 0
        assert (tmp_path / "featmap.svg").read_text().lstrip().startswith("<?xml")

    def test_replicate_sin_stdout(self, tmp_path, capsys):
        assert cli.main(["replicate-sin", "--output-dir", str(tmp_path)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].split("\t") == ["dim", "n_times", "max_abs_error"]
        assert float(lines[1].split("\t")[2]) < 1e-12
