import csv
import io
import json
import os

import pytest

from xlangperm.appscan import AppReport, Finding, FindingKind
from xlangperm.cli import findings_csv, main, map_bytes
from xlangperm.config import RunConfig, load_config
from xlangperm.report import atomic_write

from conftest import APPS, PERMDB, corpus_roots, extraction


def _corpus_args(name):
    return [a for r in corpus_roots(name) for a in ("--corpus", str(r))]


@pytest.fixture(scope="module")
def map_file(tmp_path_factory):
    out = tmp_path_factory.mktemp("map") / "map.json"
    assert main(["extract", *_corpus_args("full_corpus"), "--out", str(out)]) == 0
    return out


def test_extract_summary_and_entries(tmp_path, capsys):
    out = tmp_path / "map.json"
    assert main(["extract", *_corpus_args("full_corpus"), "--out", str(out)]) == 0
    stdout = capsys.readouterr().out.splitlines()
    assert stdout[1:] == ["pairs: AIDL=1 JNI=5", "entries: 5", "diagnostics: 0"]
    apis = {row["api"] for row in json.loads(out.read_text())["entries"]}
    assert {
        "android.hardware.camera2.CameraManager.openCamera/3",
        "android.media.MediaPlayer.setDataSource/1",
        "android.media.MediaRecorder.setVideoSource/1",
        "android.media.MediaRecorder.setAudioSource/1",
    } <= apis


def test_extract_empty_corpus(tmp_path):
    (tmp_path / "corpus").mkdir()
    out = tmp_path / "map.json"
    assert main(["extract", "--corpus", str(tmp_path / "corpus"), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["entries"] == []


def test_extract_malformed_corpus_writes_nothing(tmp_path, capsys):
    bad = tmp_path / "corpus" / "framework" / "java" / "a"
    bad.mkdir(parents=True)
    (bad / "A.mjava").write_text("package a; class {\n")
    out = tmp_path / "map.json"
    assert main(["extract", "--corpus", str(tmp_path / "corpus"), "--out", str(out)]) == 2
    assert not out.exists()
    assert "A.mjava" in capsys.readouterr().err


def test_extract_missing_corpus_is_io_error(tmp_path):
    assert main(["extract", "--corpus", str(tmp_path / "nope"), "--out", str(tmp_path / "m.json")]) == 3


def test_extract_csv_is_header_plus_one_row(tmp_path):
    out = tmp_path / "map.csv"
    assert main(["extract", *_corpus_args("camera_connect_corpus"), "--out", str(out), "--format", "csv"]) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows == [
        ["api", "condition"],
        ["android.hardware.camera2.CameraManager.openCamera/3", "android.permission.CAMERA || pid == getpid()"],
    ]


def test_extract_debug_dump(tmp_path):
    dump = tmp_path / "dump"
    assert main(["extract", *_corpus_args("camera_connect_corpus"), "--out", str(tmp_path / "m.json"), "--debug-dump", str(dump)]) == 0
    assert (dump / "cfg.edges").read_text() and (dump / "cfg.nodes").read_text()


def test_extract_per_path_rows(tmp_path):
    out = tmp_path / "map.json"
    assert main(["extract", *_corpus_args("camera_connect_corpus"), "--out", str(out), "--per-path"]) == 0
    (entry,) = json.loads(out.read_text())["entries"]
    assert entry["paths"]


def test_scan_mms(tmp_path, map_file, capsys):
    out = tmp_path / "out"
    code = main(["scan", "--map", str(map_file), "--permdb", str(PERMDB), "--app", str(APPS / "com.android.mms"), "--out", str(out)])
    assert code == 0
    report = json.loads((out / "com.android.mms.json").read_text())
    (f,) = report["findings"]
    assert f["kind"] == "COMPONENT_HIJACKING"
    assert capsys.readouterr().out.splitlines()[-1] == "apps: 1 findings: 1"
    rows = list(csv.reader(io.StringIO((out / "findings.csv").read_text())))
    assert rows[0] == ["app", "kind", "subject", "detail", "evidence", "truncated"] and len(rows) == 2


def test_scan_fail_on_findings(tmp_path, map_file):
    args = ["scan", "--map", str(map_file), "--permdb", str(PERMDB), "--out", str(tmp_path / "o"), "--fail-on-findings"]
    assert main([*args, "--app", str(APPS / "com.android.mms")]) == 1
    assert main([*args, "--app", str(APPS / "com.angelnumbers")]) == 0


def test_scan_no_apps(tmp_path, map_file, capsys):
    assert main(["scan", "--map", str(map_file), "--permdb", str(PERMDB), "--app", "--out", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "apps: 0 findings: 0"


@pytest.mark.parametrize("permdb, code", [
    ({"android.permission.CAMERA": "high"}, 4),
    ({"android.permission.CAMERA": "dangerous"}, 4),  # levels missing for the rest
])
def test_scan_permdb_errors(tmp_path, map_file, permdb, code):
    db = tmp_path / "db.json"
    db.write_text(json.dumps(permdb))
    args = ["scan", "--map", str(map_file), "--permdb", str(db), "--app", str(APPS / "com.android.mms"), "--out", str(tmp_path / "o")]
    assert main(args) == code


def test_scan_bad_manifest_is_schema_error(tmp_path, map_file):
    app = tmp_path / "com.bad"
    app.mkdir()
    (app / "manifest.json").write_text(json.dumps({"package": "com.bad", "uses_permissions": []}))
    args = ["scan", "--map", str(map_file), "--permdb", str(PERMDB), "--app", str(app), "--out", str(tmp_path / "o")]
    assert main(args) == 4


def test_scan_missing_map_is_io_error(tmp_path):
    args = ["scan", "--map", str(tmp_path / "none.json"), "--permdb", str(PERMDB), "--app", "--out", str(tmp_path / "o")]
    assert main(args) == 3


def test_config_defaults_round_trip(tmp_path, capsys):
    assert main(["config", "--print-defaults"]) == 0
    text = capsys.readouterr().out
    f = tmp_path / "c.json"
    f.write_text(text)
    assert load_config(f) == RunConfig()


def test_config_unknown_key_is_rejected(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"path_budjet": 5}))
    assert main(["extract", *_corpus_args("camera_connect_corpus"), "--out", str(tmp_path / "m.json"), "--config", str(f)]) == 4


def test_config_file_settings_apply(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"format": "csv"}))
    out = tmp_path / "m.csv"
    assert main(["extract", *_corpus_args("camera_connect_corpus"), "--out", str(out), "--config", str(f)]) == 0
    assert out.read_text().startswith("api,condition\n")


def test_map_bytes_are_stable():
    pmap = extraction("full_corpus").map
    a = map_bytes(pmap)
    assert a == map_bytes(pmap) and a.endswith(b"\n") and b"\r" not in a


def test_findings_csv_quotes_commas():
    f = Finding("com.x", FindingKind.COMPONENT_HIJACKING, "com.x.A,B", ("p.A", "p.B"), ("a/1",))
    text = findings_csv([AppReport("com.x", (f,))]).decode()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[1] == ["com.x", "COMPONENT_HIJACKING", "com.x.A,B", "p.A;p.B", "a/1", "false"]


def test_atomic_write_keeps_old_file_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "out.json"
    target.write_bytes(b"old")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        atomic_write(target, b"new")
    assert target.read_bytes() == b"old"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]
