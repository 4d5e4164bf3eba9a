"""Experiment configs and the command line driver."""

import pytest

from mathsim.bow import RepresentationConfig
from mathsim.cli import main, run_suite
from mathsim.config import (
    ConfigError,
    ExperimentConfig,
    load_config,
    write_config,
)
from mathsim.models import load_similarity_matrix
from mathsim.mterms import WeightScheme
from mathsim.viz import parse_pr_tsv


class TestConfig:
    def test_defaults(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[experiment]\nconfig_id = base\n")
        config = load_config(path)
        assert config.config_id == "base"
        assert config.method == "tfidf-lsi"
        assert config.num_topics == 50
        assert config.folds == 2 and config.reruns == 4
        assert config.representation == RepresentationConfig()
        assert config.weight_scheme == WeightScheme()

    def test_round_trip(self, tmp_path):
        config = ExperimentConfig(
            config_id="full",
            method="tfidf-lda",
            num_topics=25,
            folds=3,
            reruns=2,
            base_seed=5,
            include_diagonal=False,
            representation=RepresentationConfig(
                use_text=False,
                use_tex=True,
                mterm_strategy="high",
                mtmod_scale=200.0,
                remove_stopwords=True,
                apply_stemming=True,
                include_operand_runs=False,
                thirds_scope="corpus",
            ),
            weight_scheme=WeightScheme(level_coeff=0.25, var_coeff=0.9, const_coeff=0.7),
            lda_gamma_threshold=1e-4,
            lda_iterations=50,
            lda_passes=5,
        )
        path = tmp_path / "c.ini"
        write_config(config, path)
        assert load_config(path) == config

    def test_unknown_key_named_in_error(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[experiment]\nconfig_id = x\nnum_topic = 5\n")
        with pytest.raises(ConfigError, match="num_topic"):
            load_config(path)

    def test_unknown_section_named_in_error(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[experiment]\nconfig_id = x\n\n[modelling]\nfoo = 1\n")
        with pytest.raises(ConfigError, match="modelling"):
            load_config(path)

    def test_config_id_required(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[experiment]\nmethod = lsi\n")
        with pytest.raises(ConfigError, match="config_id"):
            load_config(path)

    def test_unknown_method_rejected(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[experiment]\nconfig_id = x\nmethod = pca\n")
        with pytest.raises(ConfigError, match="pca"):
            load_config(path)

    def test_bad_int_rejected(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[experiment]\nconfig_id = x\nnum_topics = many\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_paths_section(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text(
            "[experiment]\nconfig_id = x\n\n"
            "[paths]\ncorpus = /data/corpus\nordering = /data/ordering.tsv\n"
        )
        config = load_config(path)
        assert config.corpus_dir == "/data/corpus"
        assert config.ordering_path == "/data/ordering.tsv"

    def test_validation_in_constructor(self):
        with pytest.raises(ValueError):
            ExperimentConfig(config_id="", method="lsi")
        with pytest.raises(ValueError):
            ExperimentConfig(config_id="x", folds=1)
        with pytest.raises(ValueError):
            ExperimentConfig(config_id="x", reruns=0)
        with pytest.raises(ValueError):
            ExperimentConfig(config_id="x", num_topics=0)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One synthetic corpus with ordering and config, shared by CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    assert main([
        "synth", "--out", str(root / "corpus"),
        "--categories", "3", "--docs-per-category", "8",
        "--words-per-doc", "40", "--formulae-per-doc", "2", "--seed", "9",
    ]) == 0
    assert main([
        "shuffle", "--corpus", str(root / "corpus"),
        "--seed", "9", "--out", str(root / "ordering.tsv"),
    ]) == 0
    (root / "exp.ini").write_text(
        "[experiment]\n"
        "config_id = demo\n"
        "method = tfidf-lsi\n"
        "num_topics = 10\n"
        "folds = 2\n"
        "reruns = 2\n"
        "base_seed = 7\n"
    )
    return root


def run_args(root, out, extra=()):
    return [
        "run",
        "--config", str(root / "exp.ini"),
        "--corpus", str(root / "corpus"),
        "--ordering", str(root / "ordering.tsv"),
        "--out", str(out),
        *extra,
    ]


class TestCli:
    def test_synth_created_files(self, workspace):
        assert len(list((workspace / "corpus").glob("*.xhtml"))) == 24
        assert (workspace / "corpus" / "metadata.tsv").exists()
        assert (workspace / "corpus" / "msc-spec.tsv").exists()

    def test_ingest_reports(self, workspace, capsys):
        assert main(["ingest", "--corpus", str(workspace / "corpus")]) == 0
        out = capsys.readouterr().out
        assert "24 documents" in out
        assert "3 categories" in out

    def test_ordering_file(self, workspace):
        lines = (workspace / "ordering.tsv").read_text().splitlines()
        assert lines[0] == "seed\t9"
        assert len(lines) == 25

    def test_run_writes_artifacts(self, workspace, tmp_path):
        out = tmp_path / "out"
        assert main(run_args(workspace, out, ["--save-matrices"])) == 0
        names = {p.name for p in out.iterdir()}
        assert "report.csv" in names
        for fold in (0, 1):
            for rerun in (0, 1):
                assert f"curve-demo-{fold}-{rerun}.tsv" in names
                assert f"matrix-demo-{fold}-{rerun}.png" in names
                assert f"matrix-demo-{fold}-{rerun}.mat" in names
        matrix = load_similarity_matrix(out / "matrix-demo-0-0.mat")
        assert matrix.shape == (12, 12)
        curve = parse_pr_tsv((out / "curve-demo-0-0.tsv").read_text())
        assert len(curve.thresholds) > 0

    def test_run_deterministic_bytes(self, workspace, tmp_path):
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(run_args(workspace, out1)) == 0
        assert main(run_args(workspace, out2)) == 0
        for name in ("report.csv", "curve-demo-0-0.tsv", "matrix-demo-1-1.png"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_run_seed_override_changes_lda(self, workspace, tmp_path):
        config = workspace / "lda.ini"
        config.write_text(
            "[experiment]\nconfig_id = lda\nmethod = tfidf-lda\n"
            "num_topics = 5\nfolds = 2\nreruns = 1\nbase_seed = 7\n"
        )
        args = lambda out, seed: [
            "run", "--config", str(config),
            "--corpus", str(workspace / "corpus"),
            "--ordering", str(workspace / "ordering.tsv"),
            "--out", str(out), "--seed", seed,
        ]
        assert main(args(tmp_path / "s1", "1")) == 0
        assert main(args(tmp_path / "s2", "2")) == 0
        a = (tmp_path / "s1" / "report.csv").read_text()
        b = (tmp_path / "s2" / "report.csv").read_text()
        assert a != b

    def test_dump_bows(self, workspace, tmp_path):
        out = tmp_path / "out"
        assert main(run_args(workspace, out, ["--dump-bows"])) == 0
        dumps = list(out.glob("bow-debug-*.tsv"))
        assert len(dumps) == 24
        first = dumps[0].read_text().splitlines()
        assert all("\t" in line for line in first)

    def test_missing_corpus_fails_cleanly(self, workspace, tmp_path, capsys):
        code = main([
            "run", "--config", str(workspace / "exp.ini"),
            "--corpus", str(tmp_path / "nowhere"),
            "--ordering", str(workspace / "ordering.tsv"),
            "--out", str(tmp_path / "out"),
        ])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_render(self, workspace, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(run_args(workspace, out, ["--save-matrices"])) == 0
        png = tmp_path / "picture.png"
        assert main([
            "render", "--matrix", str(out / "matrix-demo-0-0.mat"),
            "--out", str(png), "--regions", "4,4,4",
        ]) == 0
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_render_bad_regions(self, workspace, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(run_args(workspace, out, ["--save-matrices"])) == 0
        code = main([
            "render", "--matrix", str(out / "matrix-demo-0-0.mat"),
            "--out", str(tmp_path / "p.png"), "--regions", "5,5",
        ])
        assert code == 1

    def test_suite(self, workspace, tmp_path, capsys):
        second = workspace / "exp2.ini"
        second.write_text(
            "[experiment]\nconfig_id = demo2\nmethod = tfidf-lsi\n"
            "num_topics = 10\nfolds = 2\nreruns = 2\nbase_seed = 7\n\n"
            "[representation]\nuse_text = false\nmterm_strategy = all-weighted\n"
        )
        out = tmp_path / "suite"
        assert main([
            "suite", "--configs", str(workspace / "exp.ini"), str(second),
            "--corpus", str(workspace / "corpus"),
            "--ordering", str(workspace / "ordering.tsv"),
            "--out", str(out),
        ]) == 0
        lines = (out / "suite.csv").read_text().splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("config_id,")
        ranked = [line.split(",")[0] for line in lines[1:]]
        assert set(ranked) == {"demo", "demo2"}
        f1s = [float(line.split(",")[11]) for line in lines[1:]]
        assert f1s == sorted(f1s, reverse=True)
        assert (out / "demo" / "report.csv").exists()
        assert (out / "demo2" / "report.csv").exists()

    def test_suite_rejects_duplicate_ids(self, workspace, tmp_path):
        configs = [
            ExperimentConfig(config_id="same"),
            ExperimentConfig(config_id="same"),
        ]
        with pytest.raises(ConfigError, match="same"):
            run_suite(configs, tmp_path / "out")

    def test_suite_records_failed_config(self, workspace, tmp_path):
        good = ExperimentConfig(
            config_id="good",
            num_topics=10,
            reruns=2,
            base_seed=7,
            corpus_dir=str(workspace / "corpus"),
            ordering_path=str(workspace / "ordering.tsv"),
        )
        bad = ExperimentConfig(
            config_id="bad",
            corpus_dir=str(tmp_path / "missing"),
            ordering_path=str(workspace / "ordering.tsv"),
        )
        suite_path = run_suite([good, bad], tmp_path / "out")
        lines = suite_path.read_text().splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("good,")
        assert lines[2].startswith("bad,")
        assert "failed:" in lines[2]
