"""End-to-end command tests against the bundled fixture."""

import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from slamaudit.cli import main

EN_TRAIN = "data/mini/en_es.train.slam"
EN_DEV = "data/mini/en_es.dev.slam"
EN_KEY = "data/mini/en_es.dev.key"


def run(argv):
    return main(argv)


@pytest.fixture(scope="module")
def gbdt_model(tmp_path_factory, mini_dir):
    out = tmp_path_factory.mktemp("model") / "gbdt_en_es.json"
    code = run(
        [
            "train",
            "--data", str(mini_dir / "en_es.train.slam"),
            "--track", "en_es",
            "--model", "gbdt",
            "--out", str(out),
        ]
    )
    assert code == 0
    return out


@pytest.fixture(scope="module")
def fast_mt_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "mt.json"
    path.write_text(json.dumps({"embed_dim": 4, "hidden_dim": 4, "epochs": 1}))
    return path


class TestTrain:
    def test_writes_model_and_manifest(self, gbdt_model):
        assert gbdt_model.exists()
        sidecar = Path(str(gbdt_model) + ".manifest.json")
        manifest = json.loads(sidecar.read_text())
        assert manifest["track"] == "en_es"
        assert manifest["model_kind"] == "gbdt"
        assert manifest["split"] == "train"
        assert set(manifest["config_hashes"]) == {"model_config", "vocab"}
        assert len(manifest["dataset_hashes"]) == 1

    def test_same_seed_is_byte_identical(self, tmp_path, mini_dir, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            assert run(
                [
                    "train",
                    "--data", str(mini_dir / "fr_en.train.slam"),
                    "--track", "fr_en",
                    "--model", "gbdt",
                    "--config", str(self._small_config(tmp_path)),
                    "--out", str(out),
                ]
            ) == 0
            outs.append(out)
        assert outs[0].read_bytes() == outs[1].read_bytes()
        a = Path(str(outs[0]) + ".manifest.json").read_bytes()
        b = Path(str(outs[1]) + ".manifest.json").read_bytes()
        assert a == b

    @staticmethod
    def _small_config(tmp_path):
        path = tmp_path / "small_gbdt.json"
        if not path.exists():
            path.write_text(json.dumps({"n_trees": 5, "max_depth": 3}))
        return path

    def test_multitask_joint_model_has_two_heads(
        self, tmp_path, mini_dir, fast_mt_config
    ):
        out = tmp_path / "mt.json"
        code = run(
            [
                "train",
                "--data",
                str(mini_dir / "es_en.train.slam"),
                str(mini_dir / "fr_en.train.slam"),
                "--track", "es_en", "fr_en",
                "--model", "multitask",
                "--config", str(fast_mt_config),
                "--out", str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["kind"] == "multitask"
        assert sorted(payload["heads"]) == ["es_en", "fr_en"]
        manifest = json.loads(Path(str(out) + ".manifest.json").read_text())
        assert manifest["track"] == "es_en,fr_en"

    def test_missing_data_file_names_path(self, tmp_path, capsys):
        code = run(
            [
                "train",
                "--data", "data/mini/no_such_track.train.slam",
                "--track", "en_es",
                "--model", "gbdt",
                "--out", str(tmp_path / "x.json"),
            ]
        )
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "no_such_track.train.slam" in err

    def test_mismatched_data_track_counts(self, tmp_path, mini_dir, capsys):
        code = run(
            [
                "train",
                "--data", str(mini_dir / "en_es.train.slam"),
                "--track", "en_es", "fr_en",
                "--model", "multitask",
                "--out", str(tmp_path / "x.json"),
            ]
        )
        assert code == 1
        assert "counts must match" in capsys.readouterr().err


class TestPredict:
    def test_scores_csv(self, tmp_path, gbdt_model, mini_dir):
        out = tmp_path / "scores.csv"
        code = run(
            [
                "predict",
                "--model", str(gbdt_model),
                "--data", str(mini_dir / "en_es.dev.slam"),
                "--track", "en_es",
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "instance_id,score"
        assert len(lines) == 515
        for line in lines[1:]:
            _, score = line.split(",")
            assert 0.0 < float(score) < 1.0


class TestEvaluate:
    def test_report_fields(self, tmp_path, gbdt_model, mini_dir, capsys):
        out = tmp_path / "eval.json"
        code = run(
            [
                "evaluate",
                "--model", str(gbdt_model),
                "--data", str(mini_dir / "en_es.dev.slam"),
                "--track", "en_es",
                "--labels", str(mini_dir / "en_es.dev.key"),
                "--out", str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["n"] == 514
        assert payload["auc"] > 0.75
        assert 0.0 <= payload["f1"] <= 1.0
        assert payload["manifest"]["model_kind"] == "gbdt"
        assert "auc=" in capsys.readouterr().out


@pytest.fixture(scope="module")
def audit_dir(tmp_path_factory, gbdt_model, mini_dir):
    out = tmp_path_factory.mktemp("audit") / "client"
    code = run(
        [
            "audit",
            "--model", str(gbdt_model),
            "--data", str(mini_dir / "en_es.dev.slam"),
            "--track", "en_es",
            "--labels", str(mini_dir / "en_es.dev.key"),
            "--dimension", "client",
            "--out", str(out),
        ]
    )
    assert code == 0
    return out


class TestAudit:
    def test_exactly_three_pairs_and_plots(self, audit_dir):
        fairness = (audit_dir / "fairness.csv").read_text().splitlines()
        assert fairness[0] == "group_1,group_2,track,model,abroca"
        pairs = [tuple(line.split(",")[:2]) for line in fairness[1:]]
        assert pairs == [("android", "ios"), ("android", "web"), ("ios", "web")]
        svgs = sorted(p.name for p in audit_dir.glob("*.svg"))
        assert svgs == [
            "roc_client_android_vs_ios.svg",
            "roc_client_android_vs_web.svg",
            "roc_client_ios_vs_web.svg",
        ]

    def test_svgs_are_well_formed(self, audit_dir):
        for path in audit_dir.glob("*.svg"):
            root = ET.fromstring(path.read_text())
            assert root.tag.endswith("svg")

    def test_report_embeds_manifest_and_accuracy(self, audit_dir):
        payload = json.loads((audit_dir / "report.json").read_text())
        assert payload["manifest"]["model_kind"] == "gbdt"
        assert payload["fairness"]["dimension"] == "client"
        assert len(payload["fairness"]["results"]) == 3
        groups = [row["group"] for row in payload["accuracy"]["groups"]]
        assert groups == ["android", "ios", "web"]
        acc_lines = (audit_dir / "accuracy.csv").read_text().splitlines()
        assert acc_lines[0] == "group,track,model,n,auc,f1"
        assert len(acc_lines) == 4

    def test_web_skew_ordering(self, audit_dir):
        payload = json.loads((audit_dir / "report.json").read_text())
        ab = {
            (r["group_a"], r["group_b"]): r["abroca"]
            for r in payload["fairness"]["results"]
        }
        assert ab[("ios", "web")] > ab[("android", "ios")]

    def test_byte_determinism(self, tmp_path, gbdt_model, mini_dir, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        outs = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            assert run(
                [
                    "audit",
                    "--model", str(gbdt_model),
                    "--data", str(mini_dir / "en_es.dev.slam"),
                    "--track", "en_es",
                    "--labels", str(mini_dir / "en_es.dev.key"),
                    "--dimension", "client",
                    "--out", str(out),
                ]
            ) == 0
            outs.append(out)
        files = sorted(p.name for p in outs[0].iterdir())
        assert files == sorted(p.name for p in outs[1].iterdir())
        for name in files:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_development_dimension_single_pair(self, tmp_path, gbdt_model, mini_dir):
        out = tmp_path / "dev_audit"
        code = run(
            [
                "audit",
                "--model", str(gbdt_model),
                "--data", str(mini_dir / "en_es.dev.slam"),
                "--track", "en_es",
                "--labels", str(mini_dir / "en_es.dev.key"),
                "--dimension", "development",
                "--out", str(out),
            ]
        )
        assert code == 0
        payload = json.loads((out / "report.json").read_text())
        assert len(payload["fairness"]["results"]) == 1
        assert len(list(out.glob("*.svg"))) == 1

    def test_min_group_size_floor_can_exclude_all(
        self, tmp_path, gbdt_model, mini_dir, capsys
    ):
        code = run(
            [
                "audit",
                "--model", str(gbdt_model),
                "--data", str(mini_dir / "en_es.dev.slam"),
                "--track", "en_es",
                "--labels", str(mini_dir / "en_es.dev.key"),
                "--dimension", "client",
                "--min-group-size", "100000",
                "--out", str(tmp_path / "never"),
            ]
        )
        assert code == 1
        assert "fewer than two valid groups" in capsys.readouterr().err

    def test_vocab_mismatch_against_tampered_manifest(
        self, tmp_path, gbdt_model, mini_dir, capsys
    ):
        model_copy = tmp_path / "model.json"
        model_copy.write_bytes(gbdt_model.read_bytes())
        sidecar = json.loads(
            Path(str(gbdt_model) + ".manifest.json").read_text()
        )
        sidecar["config_hashes"]["vocab"] = "0" * 64
        Path(str(model_copy) + ".manifest.json").write_text(
            json.dumps(sidecar, sort_keys=True, indent=2) + "\n"
        )
        code = run(
            [
                "audit",
                "--model", str(model_copy),
                "--data", str(mini_dir / "en_es.dev.slam"),
                "--track", "en_es",
                "--labels", str(mini_dir / "en_es.dev.key"),
                "--dimension", "client",
                "--out", str(tmp_path / "never"),
            ]
        )
        assert code == 1
        assert "vocab mismatch" in capsys.readouterr().err

    def test_unlabeled_data_without_key_fails(self, tmp_path, gbdt_model, mini_dir, capsys):
        code = run(
            [
                "audit",
                "--model", str(gbdt_model),
                "--data", str(mini_dir / "en_es.dev.slam"),
                "--track", "en_es",
                "--dimension", "client",
                "--out", str(tmp_path / "never"),
            ]
        )
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")
