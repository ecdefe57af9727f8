# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import io

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from tailfit.errors import DomainError
from tailfit.histogram import SizeHistogram, empirical_ccdf, truncate

sizes = st.lists(st.integers(min_value=0, max_value=10 ** 9), max_size=200)


def test_from_sizes_uses_one_kilobyte_bins():
    assert SizeHistogram.from_sizes([0, 500, 1023]).counts == {1: 3}
    assert SizeHistogram.from_sizes([1024, 2047]).counts == {2: 2}


def test_empty_histogram():
    hist = SizeHistogram()
    assert hist.total == 0
    assert hist.k_max_observed is None
    assert len(hist) == 0
    assert hist.rows() == []


def test_zero_counts_are_dropped():
    hist = SizeHistogram({1: 0, 4: 2})
    assert hist.counts == {4: 2}
    assert hist.k_min_observed == 4


def test_invalid_input():
    with pytest.raises(DomainError):
        SizeHistogram({0: 1})
    with pytest.raises(DomainError):
        SizeHistogram({1: -1})
    with pytest.raises(DomainError):
        SizeHistogram.from_arrays([1, 2], [1])
    with pytest.raises(DomainError):
        SizeHistogram.from_sizes([-5])


def test_tail_access():
    hist = SizeHistogram({1: 5, 3: 2, 7: 1})
    ks, ns = hist.tail(3)
    assert ks.tolist() == [3, 7]
    assert ns.tolist() == [2, 1]
    assert hist.tail_total(4) == 1
    assert hist.count(3) == 2
    assert hist.count(2) == 0


@given(sizes, sizes)
def test_merge_equals_single_pass(a, b):
    whole = SizeHistogram.from_sizes(a + b)
    left, right = SizeHistogram.from_sizes(a), SizeHistogram.from_sizes(b)
    assert left.merge(right) == whole
    assert right + left == whole
    assert whole.total == len(a) + len(b)


@given(sizes, st.integers(min_value=1, max_value=10 ** 9))
def test_truncate_is_idempotent(values, cap):
    hist = SizeHistogram.from_sizes(values)
    once = truncate(hist, cap)
    assert truncate(once, cap) == once
    assert all((k - 1) * 1024 <= cap for k in once.counts)


def test_truncate_keeps_bin_starting_at_cap():
    cap = 10 * 2 ** 30
    k_edge = cap // 1024 + 1
    hist = SizeHistogram({1: 1, k_edge: 2, k_edge + 1: 3})
    assert truncate(hist, cap).counts == {1: 1, k_edge: 2}
    with pytest.raises(DomainError):
        truncate(hist, 0)


def test_csv_export_and_import():
    hist = SizeHistogram({1: 4, 10: 1, 3: 2})
    buf = io.StringIO()
    hist.to_csv(buf)
    assert buf.getvalue() == "k,count\n1,4\n3,2\n10,1\n"
    buf.seek(0)
    assert SizeHistogram.from_csv(buf) == hist


def test_csv_rejects_wrong_header():
    with pytest.raises(DomainError):
        SizeHistogram.from_csv(io.StringIO("size,n\n1,2\n"))


@pytest.mark.parametrize("body", ["k,count\n1,abc\n", "k,count\n1,2\n3\n", "k,count\n2.5,1\n"])
def test_csv_rejects_non_integer_rows(body):
    with pytest.raises(DomainError, match="line"):
        SizeHistogram.from_csv(io.StringIO(body))


def test_scaled_multiplies_counts():
    hist = SizeHistogram({2: 3, 5: 1})
    assert hist.scaled(4).counts == {2: 12, 5: 4}
    with pytest.raises(DomainError):
        hist.scaled(0)


def test_empirical_ccdf_covers_empty_bins():
    hist = SizeHistogram({1: 2, 3: 2})
    assert empirical_ccdf(hist, 1, 3).tolist() == [1.0, 0.5, 0.5]
    assert empirical_ccdf(hist, 2, 3).tolist() == [1.0, 1.0]
    assert empirical_ccdf(hist, 2, 3, normalize_tail=False).tolist() == [0.5, 0.5]


def test_empirical_ccdf_counts_mass_beyond_kmax():
    hist = SizeHistogram({1: 1, 2: 1, 9: 2})
    assert np.allclose(empirical_ccdf(hist, 1, 2), [1.0, 0.75])
