# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import csv
import math
from collections import Counter, OrderedDict, namedtuple
from functools import partial

import numpy as np
from scipy import stats

from tailfit.defaults import BATCH_SIZE, GRID_POINTS, LOG_BASE, MIN_TAIL_COUNT
from tailfit.errors import DomainError, NoFitError
from tailfit.fitting import kmin_grid, scan_kmin
from tailfit.helpers import Logger
from tailfit.histogram import SizeHistogram
from tailfit.ingestion import ManifestReader, digest_stream
from tailfit.records import HostRecord

logger = Logger(__name__)

IndegreeHistogram = namedtuple("IndegreeHistogram", ["histogram", "zero_degree"])


def parse_host_manifest(stream, name="<stream>"):
    """Line-delimited {host, in_degree, file_count} records, plain or gzip."""
    return ManifestReader(stream, HostRecord, name)


def indegree_histogram(hosts):
    """
    Hosts per in-degree. Hosts without inbound links have no place on a
    log-log plot and are only counted.
    """
    return HostAccumulator().add(hosts).indegree


class HostAccumulator(object):
    """In-degree counts and the joint histogram for one slice of a host stream; partials merge exactly."""

    def __init__(self, log_base=LOG_BASE):
        self._degrees = Counter()
        self._zero = 0
        self._joint = JointHistogram(log_base)

    def add(self, hosts):
        for host in hosts:
            if host.in_degree == 0:
                self._zero += 1
            else:
                self._degrees[host.in_degree] += 1
            self._joint.add(host.in_degree, host.file_count)
        return self

    def merge(self, other):
        self._degrees += other._degrees
        self._zero += other._zero
        self._joint = self._joint.merge(other._joint)
        return self

    @property
    def indegree(self):
        return IndegreeHistogram(SizeHistogram(self._degrees), self._zero)

    @property
    def joint(self):
        return self._joint


def accumulate_hosts(hosts, log_base=LOG_BASE, threads=None, batch_size=BATCH_SIZE):
    """Both host histograms in one streaming pass, batches digested on the worker pool."""
    total = digest_stream(hosts, partial(HostAccumulator, log_base), threads, batch_size)
    logger.info("Read {} hosts, {} without inbound links".format(total.joint.total, total.indegree.zero_degree))
    return total


def fit_indegree_slope(hist, grid=None, min_count=MIN_TAIL_COUNT, threads=None):
    """
    Power-law fit of an in-degree histogram with the k_min scan; the
    log-log slope of the degree distribution is -alpha.
    """
    if isinstance(hist, IndegreeHistogram):
        hist = hist.histogram
    if hist.total < min_count:
        raise NoFitError("powerlaw", {1: "{} hosts with in_degree >= 1, need {}".format(hist.total, min_count)})
    if grid is None:
        grid = kmin_grid(1, hist.k_max_observed, GRID_POINTS)
    fit = scan_kmin(hist, "powerlaw", grid, min_count=min_count, threads=threads)
    logger.info("In-degree slope {:.4f} from k_min={}".format(slope(fit), fit.k_min))
    return fit


def slope(fit):
    return -fit.params["alpha"]


def slope_report(fit, zero_degree=0):
    data = OrderedDict()
    data["slope"] = slope(fit)
    data["zero_in_degree_hosts"] = zero_degree
    data["fit"] = fit.as_dict()
    return data


def log_bin(value, base=LOG_BASE):
    """
    Bin 0 holds zero, bin i >= 1 holds [base^(i-1), base^i).

    >>> log_bin(0), log_bin(1), log_bin(5), log_bin(100)
    (0, 1, 3, 7)
    """
    if value < 0:
        raise DomainError("cannot bin negative value {}".format(value))
    if value == 0:
        return 0
    if base == 2 and isinstance(value, int):
        return value.bit_length()
    e = int(math.floor(math.log(value) / math.log(base)))
    # float log can land one off at exact powers
    while base ** (e + 1) <= value:
        e += 1
    while e > 0 and base ** e > value:
        e -= 1
    return e + 1


class JointHistogram(object):
    """
    Host counts on a grid of (in-degree bin, file-count bin). Partial
    histograms built on separate slices of the host stream merge exactly.
    """

    def __init__(self, log_base=LOG_BASE):
        if not log_base > 1:
            raise DomainError("log_base must be > 1, got {}".format(log_base))
        self._base = log_base
        self._cells = Counter()

    def __repr__(self):
        return "<JointHistogram base={} cells={} total={}>".format(self._base, len(self._cells), self.total)

    @property
    def log_base(self):
        return self._base

    @property
    def cells(self):
        return dict(self._cells)

    @property
    def total(self):
        return sum(self._cells.values())

    def add(self, in_degree, file_count):
        self._cells[(log_bin(in_degree, self._base), log_bin(file_count, self._base))] += 1

    def merge(self, other):
        if other.log_base != self._base:
            raise DomainError("cannot merge base {} into base {}".format(other.log_base, self._base))
        merged = JointHistogram(self._base)
        merged._cells = self._cells + other._cells
        return merged

    def shape(self):
        if not self._cells:
            return 1, 1
        return max(i for i, _ in self._cells) + 1, max(j for _, j in self._cells) + 1

    def to_matrix(self):
        """Rows are in-degree bins, columns file-count bins."""
        matrix = np.zeros(self.shape(), dtype=np.int64)
        for (i, j), n in self._cells.items():
            matrix[i, j] = n
        return matrix

    def lower_edge(self, index):
        if index == 0:
            return 0
        edge = self._base ** (index - 1)
        return int(edge) if float(edge).is_integer() else edge

    def csv_header(self):
        return ["in_degree\\file_count"] + [self.lower_edge(j) for j in range(self.shape()[1])]

    def csv_rows(self):
        return [[self.lower_edge(i)] + row.tolist() for i, row in enumerate(self.to_matrix())]

    def to_csv(self, stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.csv_header())
        writer.writerows(self.csv_rows())


def joint_histogram(hosts, log_base=LOG_BASE):
    joint = JointHistogram(log_base)
    for host in hosts:
        joint.add(host.in_degree, host.file_count)
    return joint


def rank_correlation(joint):
    """
    Spearman correlation between in-degree bin and file-count bin, each
    occupied cell weighted by its host count. None when undefined.
    """
    cells = sorted(joint.cells.items())
    if not cells:
        return None
    i = np.repeat([c[0][0] for c in cells], [c[1] for c in cells])
    j = np.repeat([c[0][1] for c in cells], [c[1] for c in cells])
    if len(np.unique(i)) < 2 or len(np.unique(j)) < 2:
        return None
    rho = stats.spearmanr(i, j)[0]
    return float(rho)
