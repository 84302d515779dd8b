"""End-to-end tests for the command-line interface."""

import os
import subprocess
import sys

import numpy as np
import pytest

from motifembed.cli import main, read_config_file


@pytest.fixture
def triangle(tmp_path):
    path = tmp_path / "tri.edges"
    path.write_text("0 1\n1 2\n0 2\n")
    return path


@pytest.fixture
def ring_graph(tmp_path):
    # 30-node ring with chords: sparse enough for linkpred negatives
    rng = np.random.default_rng(11)
    edges = {(i, (i + 1) % 30) for i in range(30)}
    while len(edges) < 55:
        u, v = sorted(rng.integers(0, 30, 2).tolist())
        if u != v:
            edges.add((u, v))
    path = tmp_path / "ring.edges"
    path.write_text("".join(f"{u} {v}\n" for u, v in sorted(edges)))
    return path


def run_cli(args, env_extra=None, capsys=None):
    """Invoke main() in-process; returns (exit_code, ""). capsys is accepted
    so call sites read captured output themselves after the call."""
    del capsys  # output stays in the caller's capture buffer
    env_backup = {}
    if env_extra:
        for key, value in env_extra.items():
            env_backup[key] = os.environ.get(key)
            os.environ[key] = value
    try:
        code = main(args)
    finally:
        for key, old in env_backup.items():
            if old is None:
                os.environ.pop(key, None)
            else:
                os.environ[key] = old
    return code, ""


def read_body(path):
    """File content minus the leading comment header."""
    lines = path.read_text().splitlines()
    return [ln for ln in lines if not ln.startswith("#")]


class TestCountOrbits:
    def test_triangle_counts(self, triangle, tmp_path):
        out = tmp_path / "counts.tsv"
        code, _ = run_cli(["count-orbits", "--input", str(triangle), "--out", str(out)])
        assert code == 0
        body = read_body(out)
        header = body[0].split("\t")
        assert header == ["u", "v"] + [f"O{i}" for i in range(1, 14)]
        rows = [ln.split("\t") for ln in body[1:]]
        assert len(rows) == 3
        o3_col = header.index("O3")
        for row in rows:
            assert row[o3_col] == "1"
            # triangle has no 4-node motifs
            assert all(c == "0" for c in row[o3_col + 1:])

    def test_original_labels_preserved(self, tmp_path):
        path = tmp_path / "big_labels.edges"
        path.write_text("100 200\n200 305\n100 305\n")
        out = tmp_path / "counts.tsv"
        code, _ = run_cli(["count-orbits", "--input", str(path), "--out", str(out)])
        assert code == 0
        pairs = {tuple(ln.split("\t")[:2]) for ln in read_body(out)[1:]}
        assert pairs == {("100", "200"), ("100", "305"), ("200", "305")}

    def test_one_indexed_input(self, tmp_path):
        path = tmp_path / "one.edges"
        path.write_text("1 2\n2 3\n1 3\n")
        out = tmp_path / "counts.tsv"
        code, _ = run_cli(
            ["count-orbits", "--input", str(path), "--one-indexed", "--out", str(out)]
        )
        assert code == 0
        assert read_body(out)[1].split("\t")[:2] == ["1", "2"]

    def test_missing_input_fails_with_path(self, tmp_path, capsys):
        missing = tmp_path / "nope.edges"
        code, _ = run_cli(["count-orbits", "--input", str(missing)], capsys=capsys)
        assert code == 1
        assert str(missing) in capsys.readouterr().err

    def test_malformed_line_reports_line_number(self, tmp_path, capsys):
        path = tmp_path / "bad.edges"
        path.write_text("0 1\nnot numbers\n")
        code, _ = run_cli(["count-orbits", "--input", str(path)], capsys=capsys)
        assert code == 1
        assert "line 2" in capsys.readouterr().err


class TestMotifMatrix:
    def test_matrixmarket_export(self, triangle, tmp_path):
        out = tmp_path / "tri.mtx"
        code, _ = run_cli(
            ["motif-matrix", "--input", str(triangle), "--orbit", "3", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("%%MatrixMarket matrix coordinate")
        assert any("orbit=3" in ln for ln in lines if ln.startswith("%"))
        import scipy.io

        mat = scipy.io.mmread(out).tocsr()
        assert mat.shape == (3, 3)
        dense = mat.toarray()
        assert np.allclose(dense, np.ones((3, 3)) - np.eye(3))

    def test_orbit_out_of_range(self, triangle, capsys):
        code, _ = run_cli(
            ["motif-matrix", "--input", str(triangle), "--orbit", "14"], capsys=capsys
        )
        assert code == 1
        assert "orbit" in capsys.readouterr().err

    def test_delta_filters_everything(self, triangle, tmp_path):
        out = tmp_path / "empty.mtx"
        code, _ = run_cli(
            ["motif-matrix", "--input", str(triangle), "--orbit", "3",
             "--delta", "2", "--out", str(out)]
        )
        assert code == 0
        import scipy.io

        assert scipy.io.mmread(out).nnz == 0


class TestEmbed:
    def test_writes_vectors(self, ring_graph, tmp_path):
        out = tmp_path / "z.tsv"
        code, _ = run_cli(
            ["embed", "--input", str(ring_graph), "--dl", "2", "--d", "8",
             "--k", "1", "--out", str(out)]
        )
        assert code == 0
        body = read_body(out)
        assert len(body) == 30
        first = body[0].split("\t")
        assert first[0] == "0"
        assert len(first) == 1 + 8
        float(first[1])  # parses

    def test_seventeen_significant_digits(self, ring_graph, tmp_path):
        out = tmp_path / "z.tsv"
        run_cli(["embed", "--input", str(ring_graph), "--dl", "2", "--d", "8",
                 "--k", "1", "--out", str(out)])
        values = [
            float(tok)
            for ln in read_body(out)
            for tok in ln.split("\t")[1:]
        ]
        # round-trip exactness is the point of .17g
        texts = [
            tok for ln in read_body(out) for tok in ln.split("\t")[1:]
        ]
        assert all(float(t) == v for t, v in zip(texts, values))

    def test_y_out(self, ring_graph, tmp_path):
        z_out = tmp_path / "z.tsv"
        y_out = tmp_path / "y.tsv"
        code, _ = run_cli(
            ["embed", "--input", str(ring_graph), "--dl", "2", "--d", "8",
             "--k", "1", "--out", str(z_out), "--y-out", str(y_out)]
        )
        assert code == 0
        y_body = read_body(y_out)
        assert len(y_body) == 30
        # 13 orbits x 1 step x rank 2 columns
        assert len(y_body[0].split("\t")) == 1 + 26

    def test_header_values_reproduce_output(self, ring_graph, tmp_path):
        """The reproducibility invariant: re-run with the header's values."""
        first = tmp_path / "a.tsv"
        run_cli(["embed", "--input", str(ring_graph), "--dl", "2", "--d", "8",
                 "--k", "1", "--seed", "9", "--out", str(first)])
        header = {}
        for ln in first.read_text().splitlines():
            if ln.startswith("# ") and "=" in ln:
                key, _, val = ln[2:].partition("=")
                header[key] = val
        second = tmp_path / "b.tsv"
        args = ["embed", "--input", header["input"], "--kind", header["kind"],
                "--delta", header["delta"], "--dl", header["dl"], "--d", header["d"],
                "--k", header["k"], "--diffusion", header["diffusion"],
                "--seed", header["seed"], "--out", str(second)]
        if header["one_indexed"] == "true":
            args.append("--one-indexed")
        run_cli(args)
        assert first.read_text() == second.read_text()

    def test_rejects_auto_k(self, ring_graph, capsys):
        code, _ = run_cli(["embed", "--input", str(ring_graph), "--k", "auto"],
                          capsys=capsys)
        assert code == 1
        assert "auto" in capsys.readouterr().err


class TestConfigPrecedence:
    def test_config_file_supplies_values(self, ring_graph, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# embedding settings\n"
            f"input={ring_graph}\n"
            "dl=2\n"
            "d=8\n"
            "k=1\n"
            "seed=4\n"
        )
        out = tmp_path / "z.tsv"
        code, _ = run_cli(["embed", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert "# seed=4" in text
        assert "# dl=2" in text

    def test_flags_override_config(self, ring_graph, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"input={ring_graph}\ndl=2\nd=8\nk=1\nseed=4\n")
        out = tmp_path / "z.tsv"
        run_cli(["embed", "--config", str(cfg), "--seed", "7", "--out", str(out)])
        assert "# seed=7" in out.read_text()

    def test_env_seed_overrides_flag(self, ring_graph, tmp_path):
        out = tmp_path / "z.tsv"
        run_cli(
            ["embed", "--input", str(ring_graph), "--dl", "2", "--d", "8",
             "--k", "1", "--seed", "7", "--out", str(out)],
            env_extra={"MOTIFEMBED_SEED": "123"},
        )
        assert "# seed=123" in out.read_text()

    def test_bad_config_line(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("just some words\n")
        code, _ = run_cli(["embed", "--config", str(cfg)], capsys=capsys)
        assert code == 1
        assert "key=value" in capsys.readouterr().err

    def test_read_config_file_parses(self, tmp_path):
        cfg = tmp_path / "ok.cfg"
        cfg.write_text("# comment\n\nkind=p\nskip-header=true\n")
        values = read_config_file(str(cfg))
        assert values == {"kind": "p", "skip_header": "true"}


class TestLinkpred:
    def test_report_shape(self, ring_graph, tmp_path):
        out = tmp_path / "report.tsv"
        code, _ = run_cli(
            ["linkpred", "--input", str(ring_graph), "--k", "1", "--dl", "2",
             "--d", "8", "--seeds", "2", "--out", str(out)]
        )
        assert code == 0
        body = read_body(out)
        assert body[0] == "seed\tk\tauc"
        assert len(body) == 1 + 2 + 1  # header, one row per seed, summary
        seed_rows = [ln.split("\t") for ln in body[1:3]]
        assert [r[0] for r in seed_rows] == ["0", "1"]
        assert all(r[1] == "1" for r in seed_rows)
        for row in seed_rows:
            assert 0.0 <= float(row[2]) <= 1.0
        summary = body[3].split("\t")
        assert summary[0] == "mean"
        expected = np.mean([float(r[2]) for r in seed_rows])
        assert abs(float(summary[2]) - expected) < 1e-12

    def test_deterministic_reruns(self, ring_graph, tmp_path):
        a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
        args = ["linkpred", "--input", str(ring_graph), "--k", "1", "--dl", "2",
                "--d", "8", "--seeds", "2"]
        run_cli(args + ["--out", str(a)])
        run_cli(args + ["--out", str(b)])
        assert a.read_text() == b.read_text()

    def test_auto_k_selects_from_grid(self, ring_graph, tmp_path):
        out = tmp_path / "report.tsv"
        code, _ = run_cli(
            ["linkpred", "--input", str(ring_graph), "--k", "auto", "--dl", "2",
             "--d", "8", "--seeds", "1", "--out", str(out)]
        )
        assert code == 0
        row = read_body(out)[1].split("\t")
        assert row[1] in {"1", "2", "3", "4"}


class TestBench:
    def test_small_sizes(self, tmp_path):
        out = tmp_path / "bench.tsv"
        code, _ = run_cli(
            ["bench", "--sizes", "60,120", "--dl", "2", "--d", "8", "--out", str(out)]
        )
        assert code == 0
        body = read_body(out)
        assert body[0].split("\t") == [
            "n", "edges", "generate_s", "count_s", "local_s", "global_s", "total_s"
        ]
        rows = [ln.split("\t") for ln in body[1:]]
        assert [r[0] for r in rows] == ["60", "120"]
        for row in rows:
            stages = [float(x) for x in row[2:]]
            assert all(s >= 0 for s in stages)

    def test_descending_sizes_rejected(self, capsys):
        code, _ = run_cli(["bench", "--sizes", "100,50"], capsys=capsys)
        assert code == 1
        assert "ascending" in capsys.readouterr().err


class TestEntryPoint:
    def test_help_exits_zero(self, capsys):
        code, _ = run_cli(["--help"], capsys=capsys)
        assert code == 0
        assert "count-orbits" in capsys.readouterr().out

    def test_subcommand_help(self, capsys):
        code, _ = run_cli(["linkpred", "--help"], capsys=capsys)
        assert code == 0
        out = capsys.readouterr().out
        for flag in ("--kind", "--delta", "--dl", "--d", "--k", "--diffusion", "--seeds"):
            assert flag in out

    def test_no_subcommand_errors(self, capsys):
        code, _ = run_cli([], capsys=capsys)
        assert code != 0

    def test_installed_script(self, triangle):
        proc = subprocess.run(
            [sys.executable, "-m", "motifembed.cli", "count-orbits",
             "--input", str(triangle)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0] == "# subcommand=count-orbits"

    def test_unknown_diffusion_token(self, triangle, capsys):
        code, _ = run_cli(
            ["embed", "--input", str(triangle), "--diffusion", "sideways"],
            capsys=capsys,
        )
        assert code == 1
        assert "sideways" in capsys.readouterr().err
