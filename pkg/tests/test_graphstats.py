# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import io
import json

import numpy as np
import pytest

from tailfit.distributions import PowerLawModel, sample
from tailfit.errors import DomainError, NoFitError
from tailfit.graphstats import (
    JointHistogram, accumulate_hosts, fit_indegree_slope, indegree_histogram, joint_histogram, log_bin,
    parse_host_manifest, rank_correlation, slope, slope_report,
)
from tailfit.records import HostRecord


def hosts_with_degrees(degrees, file_count=1):
    return [HostRecord("h{}.example".format(i), int(d), file_count) for i, d in enumerate(degrees)]


def test_indegree_histogram_counts_zero_degree_apart():
    hosts = hosts_with_degrees([0, 0, 1, 1, 1, 4])
    hist = indegree_histogram(hosts)
    assert hist.histogram.counts == {1: 3, 4: 1}
    assert hist.zero_degree == 2


def test_slope_of_powerlaw_degrees(powerlaw_hist):
    fit = fit_indegree_slope(powerlaw_hist, grid=[1, 2, 4], threads=1)
    assert slope(fit) == pytest.approx(-2.5, abs=0.1)
    report = slope_report(fit, zero_degree=7)
    assert list(report) == ["slope", "zero_in_degree_hosts", "fit"]
    assert report["zero_in_degree_hosts"] == 7
    assert report["fit"]["family"] == "powerlaw"


def test_slope_from_host_records():
    degrees = sample(PowerLawModel(2.1, 1), 50000, seed=21)
    hist = indegree_histogram(hosts_with_degrees(np.concatenate([degrees, [0] * 30])))
    assert hist.zero_degree == 30
    assert slope(fit_indegree_slope(hist, grid=[1, 2, 4], threads=2)) == pytest.approx(-2.1, abs=0.1)


@pytest.mark.slow
def test_slope_on_a_million_hosts():
    degrees = sample(PowerLawModel(2.1, 1), 10 ** 6, seed=22)
    hist = indegree_histogram(hosts_with_degrees(degrees))
    assert slope(fit_indegree_slope(hist)) == pytest.approx(-2.1, abs=0.05)


def test_single_degree_has_no_slope():
    hist = indegree_histogram(hosts_with_degrees([5] * 300))
    with pytest.raises(NoFitError):
        fit_indegree_slope(hist, threads=1)


def test_too_few_hosts_have_no_slope():
    hist = indegree_histogram(hosts_with_degrees(range(1, 60)))
    with pytest.raises(NoFitError) as e:
        fit_indegree_slope(hist, threads=1)
    assert e.value.family == "powerlaw"
    fit = fit_indegree_slope(hist, grid=[1], min_count=50, threads=1)
    assert fit.k_min == 1
    assert fit.as_dict()["tail_count"] == 59


def test_log_bin():
    assert [log_bin(v) for v in (0, 1, 2, 3, 4, 7, 8)] == [0, 1, 2, 2, 3, 3, 4]
    assert [log_bin(v, 10) for v in (1, 9, 10, 99, 100, 1000)] == [1, 1, 2, 2, 3, 4]
    assert log_bin(2.5) == 2
    with pytest.raises(DomainError):
        log_bin(-1)


def test_joint_histogram_cell():
    joint = joint_histogram([HostRecord("a", 5, 100)])
    matrix = joint.to_matrix()
    assert matrix.shape == (4, 8)
    assert matrix[3, 7] == 1
    assert matrix.sum() == 1


def test_empty_joint_histogram():
    joint = JointHistogram()
    assert joint.total == 0
    assert joint.to_matrix().tolist() == [[0]]
    assert rank_correlation(joint) is None
    with pytest.raises(DomainError):
        JointHistogram(1.0)


def test_joint_histogram_total_and_merge():
    rng = np.random.default_rng(3)
    hosts = [HostRecord("h{}".format(i), int(a), int(b))
             for i, (a, b) in enumerate(rng.integers(0, 5000, size=(1000, 2)))]
    whole = joint_histogram(hosts)
    assert whole.total == 1000
    assert whole.to_matrix().sum() == 1000
    merged = joint_histogram(hosts[:400]).merge(joint_histogram(hosts[400:]))
    assert merged.cells == whole.cells
    with pytest.raises(DomainError):
        whole.merge(JointHistogram(10))


def test_joint_csv_layout():
    joint = joint_histogram([HostRecord("a", 0, 3), HostRecord("b", 2, 0)])
    buf = io.StringIO()
    joint.to_csv(buf)
    assert buf.getvalue().splitlines() == [
        "in_degree\\file_count,0,1,2",
        "0,0,0,1",
        "1,0,0,0",
        "2,1,0,0",
    ]


def test_rank_correlation_sign():
    hosts = [HostRecord("h{}".format(i), 2 ** i, 2 ** (12 - i)) for i in range(12)]
    assert rank_correlation(joint_histogram(hosts)) == pytest.approx(-1.0)
    same = [HostRecord("h", 4, n) for n in range(1, 50)]
    assert rank_correlation(joint_histogram(same)) is None


def test_parse_host_manifest():
    lines = [
        {"host": "a.example", "in_degree": 12, "file_count": 300},
        {"host": "b.example", "in_degree": -1, "file_count": 3},
        {"host": "c.example", "in_degree": 0, "file_count": 0},
    ]
    data = b"".join(json.dumps(line).encode() + b"\n" for line in lines)
    reader = parse_host_manifest(io.BytesIO(data))
    assert list(reader) == [HostRecord("a.example", 12, 300), HostRecord("c.example", 0, 0)]
    assert reader.malformed == 1


@pytest.mark.parametrize("threads, batch_size", [(1, 7), (3, 7), (4, 1000)])
def test_streamed_host_batches_match_single_pass(threads, batch_size):
    degrees = sample(PowerLawModel(2.2, 1), 500, seed=31)
    hosts = [HostRecord("h{}.example".format(i), int(d) if i % 9 else 0, i % 23) for i, d in enumerate(degrees)]
    streamed = accumulate_hosts(iter(hosts), threads=threads, batch_size=batch_size)
    single = indegree_histogram(hosts)
    assert streamed.indegree.histogram == single.histogram
    assert streamed.indegree.zero_degree == single.zero_degree
    assert streamed.joint.cells == joint_histogram(hosts).cells
