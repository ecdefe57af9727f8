# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import csv
import io

import numpy as np

from tailfit.defaults import BIN_BYTES, CAP_BYTES
from tailfit.distributions import bin_indices, check_bin
from tailfit.errors import DomainError


class SizeHistogram(object):
    """
    Counts per integer bin, stored as two sorted arrays of occupied bins.

    Instances are immutable; ``merge`` and ``truncate`` return new ones.
    Zero counts are never stored, so ``k_max_observed`` is always the
    largest key with a positive count.
    """

    def __init__(self, counts=None):
        ks, ns = [], []
        for k, n in sorted((counts or {}).items()):
            k = check_bin(k)
            if n < 0:
                raise DomainError("negative count {} at k={}".format(n, k))
            if n:
                ks.append(k)
                ns.append(int(n))
        self._ks = np.array(ks, dtype=np.int64)
        self._ns = np.array(ns, dtype=np.int64)

    def __repr__(self):
        return "<SizeHistogram bins={} total={} k_max={}>".format(len(self), self.total, self.k_max_observed)

    def __len__(self):
        return len(self._ks)

    def __eq__(self, other):
        if not isinstance(other, SizeHistogram):
            return NotImplemented
        return np.array_equal(self._ks, other._ks) and np.array_equal(self._ns, other._ns)

    def __add__(self, other):
        return self.merge(other)

    @classmethod
    def from_arrays(cls, ks, ns):
        """Build from parallel arrays; repeated bins are summed."""
        ks = np.asarray(ks, dtype=np.int64)
        ns = np.asarray(ns, dtype=np.int64)
        if ks.shape != ns.shape:
            raise DomainError("bins and counts differ in length")
        if ks.size and ks.min() < 1:
            raise DomainError("bin indices must be >= 1")
        if ns.size and ns.min() < 0:
            raise DomainError("counts must be >= 0")
        keep = ns > 0
        uniq, inverse = np.unique(ks[keep], return_inverse=True)
        sums = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(sums, inverse.ravel(), ns[keep])
        hist = cls()
        hist._ks = uniq.astype(np.int64)
        hist._ns = sums
        return hist

    @classmethod
    def from_values(cls, values):
        """Histogram of integer observations (bin indices, degrees, ...)."""
        values = np.asarray(values, dtype=np.int64)
        ks, ns = np.unique(values, return_counts=True)
        return cls.from_arrays(ks, ns)

    @classmethod
    def from_sizes(cls, sizes_bytes):
        return cls.from_values(bin_indices(sizes_bytes))

    @classmethod
    def from_csv(cls, stream):
        """Read the ``k,count`` export format."""
        if isinstance(stream, (bytes, bytearray)):
            stream = io.StringIO(stream.decode("utf-8"))
        reader = csv.reader(stream)
        header = next(reader, None)
        if header is None:
            return cls()
        if [h.strip() for h in header] != ["k", "count"]:
            raise DomainError("expected header 'k,count', got {!r}".format(",".join(header)))
        ks, ns = [], []
        for row in reader:
            if not row:
                continue
            try:
                k, n = int(row[0]), int(row[1])
            except (ValueError, IndexError):
                raise DomainError("line {}: expected two integers, got {!r}".format(
                    reader.line_num, ",".join(row)))
            ks.append(k)
            ns.append(n)
        return cls.from_arrays(ks, ns)

    def to_csv(self, stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["k", "count"])
        writer.writerows(self.rows())

    def rows(self):
        return [(int(k), int(n)) for k, n in zip(self._ks, self._ns)]

    @property
    def counts(self):
        return dict(self.rows())

    @property
    def bins(self):
        return self._ks.copy()

    @property
    def values(self):
        return self._ns.copy()

    @property
    def total(self):
        return int(self._ns.sum())

    @property
    def k_max_observed(self):
        return int(self._ks[-1]) if len(self._ks) else None

    @property
    def k_min_observed(self):
        return int(self._ks[0]) if len(self._ks) else None

    def count(self, k):
        i = np.searchsorted(self._ks, k)
        if i < len(self._ks) and self._ks[i] == k:
            return int(self._ns[i])
        return 0

    def tail(self, k_min):
        """(bins, counts) for k >= k_min, as views."""
        i = np.searchsorted(self._ks, k_min, side="left")
        return self._ks[i:], self._ns[i:]

    def tail_total(self, k_min):
        return int(self.tail(k_min)[1].sum())

    def merge(self, other):
        return SizeHistogram.from_arrays(
            np.concatenate([self._ks, other._ks]),
            np.concatenate([self._ns, other._ns]),
        )

    def scaled(self, factor):
        factor = int(factor)
        if factor < 1:
            raise DomainError("scale factor must be a positive integer")
        hist = SizeHistogram()
        hist._ks = self._ks.copy()
        hist._ns = self._ns * factor
        return hist


def truncate(hist, cap_bytes=CAP_BYTES):
    """
    Drop every bin whose lower edge (k - 1) * 1024 lies above ``cap_bytes``.
    """
    if cap_bytes <= 0:
        raise DomainError("cap_bytes must be positive, got {}".format(cap_bytes))
    ks, ns = hist.bins, hist.values
    keep = (ks - 1) * BIN_BYTES <= cap_bytes
    return SizeHistogram.from_arrays(ks[keep], ns[keep])


def empirical_ccdf(hist, k_min=None, k_max=None, normalize_tail=True):
    """
    Pr_emp(K >= k) for every integer k in [k_min, k_max], including bins
    without counts. With ``normalize_tail`` the mass is taken over
    k >= k_min only, otherwise over the whole histogram.
    """
    if k_min is None:
        k_min = hist.k_min_observed or 1
    if k_max is None:
        k_max = hist.k_max_observed
    ks, ns = hist.tail(k_min)
    keep = ks <= k_max
    ks, ns = ks[keep], ns[keep]
    dense = np.zeros(k_max - k_min + 1, dtype=np.int64)
    dense[ks - k_min] = ns
    above = np.cumsum(dense[::-1])[::-1]
    total = hist.tail_total(k_min) if normalize_tail else hist.total
    # counts beyond k_max still belong to Pr(K >= k)
    above = above + (hist.tail_total(k_min) - int(ns.sum()))
    return above / float(total)
