# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import gzip
import json
import os

import pytest

from tailfit.cli import EXIT_FIT, EXIT_INPUT, EXIT_OK, RunConfig, build_parser, main
from tailfit.conf import THREADS_ENV
from tailfit.defaults import SEED, THREADS
from tailfit.distributions import PowerLawModel, sample
from tailfit.errors import DomainError
from tailfit.ingestion import write_manifest
from tailfit.records import FileRecord, HostRecord


@pytest.fixture
def settings_file(tmp_path):
    path = tmp_path / "settings.ini"
    path.write_text("[General]\nthreads=5\nseed=9\ncapGb=2.5\nkminHiKb=500\n")
    return str(path)


def run_cli(*argv):
    return main([str(a) for a in argv])


def write_files(path, records):
    with open(str(path), "wb") as f:
        write_manifest(records, f)
    return str(path)


def write_hosts(path, hosts):
    with open(str(path), "w") as f:
        for host in hosts:
            f.write(json.dumps(host.as_dict()) + "\n")
    return str(path)


def synth(out, *extra):
    return run_cli("synth", "--out", out, "--settings", "", *extra)


def test_hist_writes_one_csv_per_category(tmp_path):
    manifest = write_files(tmp_path / "m.jsonl", [
        FileRecord("a", "/1.jpg", "image/jpeg", 10),
        FileRecord("a", "/2.jpg", "image/jpeg", 5000),
        FileRecord("b", "/3.mp4", "video/mp4", 2048),
    ])
    out = tmp_path / "out"
    assert run_cli("hist", "--input", manifest, "--out", out, "--settings", "") == EXIT_OK
    assert sorted(os.listdir(str(out))) == ["hist_image.csv", "hist_video.csv", "summary.csv", "summary.json"]
    assert (out / "hist_image.csv").read_text() == "k,count\n1,1\n5,1\n"
    report = json.loads((out / "summary.json").read_text())
    assert report["records"] == 3
    assert report["hosts"] == 2
    assert [c["category"] for c in report["categories"]] == ["image", "video"]


def test_hist_of_empty_input_succeeds(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    out = tmp_path / "out"
    assert run_cli("hist", "--input", empty, "--out", out, "--settings", "") == EXIT_OK
    assert json.loads((out / "summary.json").read_text())["categories"] == []


def test_hist_of_missing_input_fails_and_leaves_nothing(tmp_path):
    out = tmp_path / "out"
    assert run_cli("hist", "--input", tmp_path / "nope.jsonl", "--out", out, "--settings", "") == EXIT_INPUT
    assert not out.exists() or os.listdir(str(out)) == []


def test_hist_of_truncated_gzip_manifest_is_an_input_error(tmp_path):
    records = [FileRecord("h{}".format(i % 7), "/{}.jpg".format(i), "image/jpeg", 100 * i) for i in range(2000)]
    packed = gzip.compress(b"".join(json.dumps(r.as_dict()).encode("utf-8") + b"\n" for r in records))
    manifest = tmp_path / "m.jsonl.gz"
    manifest.write_bytes(packed[:len(packed) // 2])
    out = tmp_path / "out"
    assert run_cli("hist", "--input", manifest, "--out", out, "--settings", "") == EXIT_INPUT
    assert not out.exists() or os.listdir(str(out)) == []


def test_fit_of_corrupt_histogram_csv_is_an_input_error(tmp_path):
    hist = tmp_path / "hist_image.csv"
    hist.write_text("k,count\n1,abc\n")
    out = tmp_path / "out"
    assert run_cli("fit", "--input", hist, "--out", out, "--settings", "") == EXIT_INPUT
    assert not (out / "fit_report.json").exists()


def test_synth_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert synth(a, "--alpha", 2.2, "-n", 500, "--seed", 4) == EXIT_OK
    assert synth(b, "--alpha", 2.2, "-n", 500, "--seed", 4) == EXIT_OK
    data = (a / "manifest.jsonl").read_bytes()
    assert data == (b / "manifest.jsonl").read_bytes()
    assert len(data.splitlines()) == 500


def test_synth_gzip_matches_plain(tmp_path):
    assert synth(tmp_path / "plain", "--model", "lognormal", "--mu", 4, "--sigma", 1, "-n", 200) == EXIT_OK
    assert synth(tmp_path / "gz", "--model", "lognormal", "--mu", 4, "--sigma", 1, "-n", 200, "--gzip") == EXIT_OK
    packed = (tmp_path / "gz" / "manifest.jsonl.gz").read_bytes()
    assert gzip.decompress(packed) == (tmp_path / "plain" / "manifest.jsonl").read_bytes()


def test_synth_zero_records(tmp_path):
    assert synth(tmp_path, "--alpha", 2.0, "-n", 0) == EXIT_OK
    assert (tmp_path / "manifest.jsonl").read_bytes() == b""


def test_synth_rejects_invalid_parameters(tmp_path):
    assert synth(tmp_path, "--alpha", 0.5) == EXIT_INPUT
    assert not (tmp_path / "manifest.jsonl").exists()
    assert synth(tmp_path, "--model", "lognormal", "--mu", 3) == EXIT_INPUT
    assert synth(tmp_path, "--alpha", 2.0, "-n", -3) == EXIT_INPUT


def test_synth_hist_fit_pipeline(tmp_path):
    assert synth(tmp_path, "--model", "lognormal", "--mu", 5, "--sigma", 1, "-n", 50000,
                 "--seed", 3, "--category", "video") == EXIT_OK
    manifest = tmp_path / "manifest.jsonl"
    hists = tmp_path / "hists"
    assert run_cli("hist", "--input", manifest, "--out", hists, "--settings", "") == EXIT_OK
    reports = []
    for threads in (1, 4):
        out = tmp_path / "fit{}".format(threads)
        code = run_cli("fit", "--input", hists / "hist_video.csv", "--out", out, "--settings", "",
                       "--kmin-hi", 100, "--grid-points", 12, "--threads", threads)
        assert code == EXIT_OK
        reports.append((out / "fit_report.json").read_text())
    assert reports[0] == reports[1]
    video = json.loads(reports[0])["categories"]["video"]
    assert video["total"] == 50000
    assert video["selected_family"] == "lognormal"
    assert os.path.isfile(str(tmp_path / "fit1" / "ccdf_video_lognormal.csv"))


def test_fit_of_missing_category_is_a_selection_failure(tmp_path):
    manifest = write_files(tmp_path / "m.jsonl", [FileRecord("a", "/1.jpg", "image/jpeg", 10)])
    code = run_cli("fit", "--input", manifest, "--category", "audio", "--out", tmp_path / "out", "--settings", "")
    assert code == EXIT_FIT


def test_fit_without_enough_tail_reports_and_fails(tmp_path):
    manifest = write_files(tmp_path / "m.jsonl", [FileRecord("a", "/1.jpg", "image/jpeg", 10)] * 20)
    out = tmp_path / "out"
    assert run_cli("fit", "--input", manifest, "--out", out, "--settings", "", "--kmin-hi", 4) == EXIT_FIT
    report = json.loads((out / "fit_report.json").read_text())
    assert report["categories"]["image"]["selected_family"] is None


def test_graph_exit_codes(tmp_path):
    degrees = sample(PowerLawModel(2.1, 1), 5000, seed=8)
    hosts = [HostRecord("h{}".format(i), int(d), int(d) % 17) for i, d in enumerate(degrees)]
    manifest = write_hosts(tmp_path / "hosts.jsonl", hosts)
    out = tmp_path / "ok"
    assert run_cli("graph", "--input", manifest, "--out", out, "--settings", "") == EXIT_OK
    report = json.loads((out / "graph_report.json").read_text())
    assert report["hosts"] == 5000
    assert report["slope"]["slope"] < -1.0
    few = write_hosts(tmp_path / "few.jsonl", hosts[:50])
    out = tmp_path / "few"
    assert run_cli("graph", "--input", few, "--out", out, "--settings", "") == EXIT_FIT
    assert "error" in json.loads((out / "graph_report.json").read_text())["slope"]
    out = tmp_path / "few_allowed"
    assert run_cli("graph", "--input", few, "--out", out, "--settings", "", "--min-tail-count", 20) == EXIT_OK


def test_maxent_solve(tmp_path):
    code = run_cli("maxent-solve", "--support-hi", 50, "--e-s", 10, "--out", tmp_path, "--settings", "")
    assert code == EXIT_OK
    report = json.loads((tmp_path / "maxent.json").read_text())
    assert report["moments"]["e_s"] == pytest.approx(10.0, abs=1e-8)
    assert report["multipliers"]["lambda_1"] == 0.0
    assert report["stationarity"]["stationary"] is True


def test_maxent_solve_infeasible_target(tmp_path):
    code = run_cli("maxent-solve", "--support-hi", 50, "--e-s", 60, "--out", tmp_path, "--settings", "")
    assert code == EXIT_INPUT
    assert not (tmp_path / "maxent.json").exists()


def test_config_precedence(settings_file):
    parser = build_parser()
    args = parser.parse_args(["fit", "--settings", settings_file])
    config = RunConfig.from_args(args, environ={})
    assert config.threads == 5
    assert config.seed == 9
    assert config.cap_gb == 2.5
    assert config.kmin_hi == 500
    config = RunConfig.from_args(args, environ={THREADS_ENV: "7"})
    assert config.threads == 7
    args = parser.parse_args(["fit", "--settings", settings_file, "--threads", "2", "--seed", "1"])
    config = RunConfig.from_args(args, environ={THREADS_ENV: "7"})
    assert config.threads == 2
    assert config.seed == 1


def test_config_defaults_and_validation(tmp_path):
    parser = build_parser()
    args = parser.parse_args(["hist", "--settings", str(tmp_path / "absent.ini")])
    config = RunConfig.from_args(args, environ={})
    assert config.threads == THREADS
    assert config.seed == SEED
    assert config.cap_bytes == 10 * 2 ** 30
    with pytest.raises(DomainError):
        RunConfig.from_args(parser.parse_args(["fit", "--settings", "", "--kmin-lo", "9", "--kmin-hi", "3"]), {})
    with pytest.raises(DomainError):
        RunConfig.from_args(args, environ={THREADS_ENV: "lots"})
