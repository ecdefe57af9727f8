# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import json
import math
import mimetypes
import os
import platform
import zlib
from collections import Counter, OrderedDict
from functools import partial
from itertools import islice

import numpy as np

from tailfit.conf import EXTENSIONS_FILE
from tailfit.defaults import (
    BATCH_SIZE, BIN_BYTES, CATEGORIES, EXACT_MEDIAN_LIMIT, MANIFEST_LINE_LIMIT,
    MANIFEST_MALFORMED_RATIO, MANIFEST_SNIFF_LINES, MANIFEST_SNIFF_MIN_LINES,
    SKETCH_RELATIVE_ACCURACY,
)
from tailfit.distributions import bin_indices
from tailfit.errors import IngestionError, ManifestFormatError
from tailfit.helpers import Logger
from tailfit.histogram import SizeHistogram
from tailfit.records import UNKNOWN_MIME, FileRecord
from tailfit.utils import sniff_binary
from tailfit.workers import run_parallel, thread_count

logger = Logger(__name__)

OTHER = "other"


def load_extensions(path=EXTENSIONS_FILE):
    with open(path, "r") as f:
        data = json.load(f)
    logger.debug("Extension table v{} with {} entries".format(data["version"], len(data["extensions"])))
    return {ext.lower(): mime for ext, mime in data["extensions"].items()}


EXTENSIONS = load_extensions()


def classify(record, level="category"):
    """
    Label a record by MIME category (``image``) or, with ``level="type"``,
    by full type (``image/jpeg``). The reported MIME wins when its top level
    is one of the five categories, then the path extension, then ``other``.
    """
    mime = record.mime
    top = mime.split("/", 1)[0]
    if top not in CATEGORIES:
        ext = os.path.splitext(record.path)[1].lower()
        mime = EXTENSIONS.get(ext)
        if mime is None:
            return OTHER
        top = mime.split("/", 1)[0]
    return mime if level == "type" else top


def category_order(labels):
    """The five categories in their usual order, then everything else sorted."""
    labels = set(labels)
    head = [c for c in CATEGORIES if c in labels]
    return head + sorted(labels - set(head))


def scan_filesystem(root, host=None, skipped=None):
    """
    Yield a FileRecord for every regular file under ``root`` in sorted
    order. Symlinks are never followed. Unreadable subdirectories are
    logged, appended to ``skipped`` as (path, reason) and passed over.
    """
    host = host or platform.node() or "localhost"
    try:
        top = sorted(os.scandir(root), key=lambda e: e.name)
    except OSError as e:
        raise IngestionError("cannot read {}: {}".format(root, e))
    stack = [("", top)]
    while stack:
        prefix, entries = stack.pop()
        for i, entry in enumerate(entries):
            rel = "{}/{}".format(prefix, entry.name)
            try:
                if entry.is_symlink():
                    continue
                if entry.is_dir(follow_symlinks=False):
                    try:
                        children = sorted(os.scandir(entry.path), key=lambda e: e.name)
                    except OSError as e:
                        logger.warning("Skipped unreadable {}: {}".format(entry.path, e))
                        if skipped is not None:
                            skipped.append((entry.path, str(e)))
                        continue
                    # resume this directory after the child
                    stack.append((prefix, entries[i + 1:]))
                    stack.append((rel, children))
                    break
                if entry.is_file(follow_symlinks=False):
                    size = entry.stat(follow_symlinks=False).st_size
                    mime = mimetypes.guess_type(entry.name)[0] or UNKNOWN_MIME
                    yield FileRecord(host, rel, mime, size)
            except OSError as e:
                logger.warning("Skipped unreadable {}: {}".format(entry.path, e))
                if skipped is not None:
                    skipped.append((entry.path, str(e)))


class ManifestReader(object):
    """
    Iterate line-delimited JSON records. Bad lines are counted, not fatal,
    unless more than half of the first lines are bad, which means the
    input is most likely not a manifest at all.
    """

    def __init__(self, stream, record_type=FileRecord, name="<stream>"):
        self._stream = sniff_binary(stream)
        self._record_type = record_type
        self._name = name
        self._lines = 0
        self._accepted = 0
        self._malformed = 0

    @property
    def accepted(self):
        return self._accepted

    @property
    def malformed(self):
        return self._malformed

    @property
    def lines(self):
        return self._lines

    def _parse(self, raw):
        if len(raw) > MANIFEST_LINE_LIMIT:
            raise ValueError("line longer than {} bytes".format(MANIFEST_LINE_LIMIT))
        data = json.loads(raw.decode("utf-8"))
        if not isinstance(data, dict):
            raise ValueError("not an object")
        return self._record_type.from_dict(data)

    def _sniff(self):
        if self._malformed > MANIFEST_MALFORMED_RATIO * self._lines:
            raise ManifestFormatError("{}: {} of the first {} lines are malformed, wrong file?".format(
                self._name, self._malformed, self._lines))

    def _raw_lines(self):
        try:
            for raw in self._stream:
                yield raw
        except (EOFError, zlib.error) as e:
            raise IngestionError("{}: corrupt compressed input after line {}: {}".format(self._name, self._lines, e))

    def __iter__(self):
        for raw in self._raw_lines():
            raw = raw.rstrip(b"\r\n")
            if not raw.strip():
                continue
            self._lines += 1
            try:
                record = self._parse(raw)
            except (ValueError, TypeError, AttributeError, UnicodeDecodeError) as e:
                self._malformed += 1
                logger.debug("{}: malformed line {}: {}".format(self._name, self._lines, e))
            else:
                self._accepted += 1
                yield record
            if self._lines == MANIFEST_SNIFF_LINES:
                self._sniff()
        if MANIFEST_SNIFF_MIN_LINES <= self._lines < MANIFEST_SNIFF_LINES:
            self._sniff()
        if self._malformed:
            logger.warning("{}: {} malformed lines of {}".format(self._name, self._malformed, self._lines))


def parse_manifest(stream, name="<stream>"):
    return ManifestReader(stream, FileRecord, name)


def write_manifest(records, stream):
    """Write records in manifest format; returns the number written."""
    count = 0
    for record in records:
        line = json.dumps(record.as_dict(), separators=(",", ":"), ensure_ascii=False)
        stream.write(line.encode("utf-8"))
        stream.write(b"\n")
        count += 1
    return count


class LogBucketSketch(object):
    """
    Mergeable quantile sketch over non-negative sizes: counts in logarithmic
    buckets of relative width SKETCH_RELATIVE_ACCURACY. Merging only adds
    counts, so the result does not depend on how the stream was split.
    """

    def __init__(self, accuracy=SKETCH_RELATIVE_ACCURACY):
        self._gamma = (1.0 + accuracy) / (1.0 - accuracy)
        self._log_gamma = math.log(self._gamma)
        self._buckets = Counter()
        self._zeros = 0
        self._count = 0

    @property
    def count(self):
        return self._count

    def add_many(self, values):
        values = np.asarray(values, dtype=float)
        if not values.size:
            return
        zeros = values <= 0
        self._zeros += int(zeros.sum())
        index = np.ceil(np.log(values[~zeros]) / self._log_gamma).astype(np.int64)
        uniq, counts = np.unique(index, return_counts=True)
        self._buckets.update(dict(zip(uniq.tolist(), counts.tolist())))
        self._count += int(values.size)

    def merge(self, other):
        self._buckets.update(other._buckets)
        self._zeros += other._zeros
        self._count += other._count
        return self

    def quantile(self, q):
        if not self._count:
            return None
        rank = q * (self._count - 1)
        seen = self._zeros
        if rank < seen:
            return 0.0
        for index in sorted(self._buckets):
            seen += self._buckets[index]
            if rank < seen:
                return 2.0 * self._gamma ** index / (self._gamma + 1.0)
        return 2.0 * self._gamma ** max(self._buckets) / (self._gamma + 1.0)


class CategorySummary(object):

    def __init__(self, category, file_count, files_per_host, mean_kb, median_kb, share, median_mode):
        self.category = category
        self.file_count = file_count
        self.files_per_host = files_per_host
        self.mean_kb = mean_kb
        self.median_kb = median_kb
        self.share = share
        self.median_mode = median_mode

    def __repr__(self):
        return "<CategorySummary {} {}>".format(self.category, self.triple())

    def triple(self):
        return "({:.1f}|{:.0f}|{:.0f})".format(self.files_per_host, self.mean_kb, self.median_kb)

    def as_dict(self):
        return OrderedDict([
            ("category", self.category),
            ("file_count", self.file_count),
            ("share_percent", self.share),
            ("files_per_host", self.files_per_host),
            ("mean_kb", self.mean_kb),
            ("median_kb", self.median_kb),
            ("median_mode", self.median_mode),
        ])


class _CategoryStats(object):

    def __init__(self):
        self.bins = Counter()
        self.count = 0
        self.size_sum = 0
        self.sizes = []
        self.sketch = LogBucketSketch()

    def add(self, sizes):
        sizes = np.asarray(sizes, dtype=np.int64)
        ks, ns = np.unique(bin_indices(sizes), return_counts=True)
        self.bins.update(dict(zip(ks.tolist(), ns.tolist())))
        self.count += int(sizes.size)
        self.size_sum += int(sizes.sum())
        self.sketch.add_many(sizes)
        if self.sizes is not None:
            self.sizes.append(sizes)
            self._check_exact()

    def merge(self, other):
        self.bins.update(other.bins)
        self.count += other.count
        self.size_sum += other.size_sum
        self.sketch.merge(other.sketch)
        if self.sizes is not None and other.sizes is not None:
            self.sizes.extend(other.sizes)
            self._check_exact()
        else:
            self.sizes = None

    def _check_exact(self):
        if self.count >= EXACT_MEDIAN_LIMIT:
            self.sizes = None

    def median_bytes(self):
        if self.sizes is not None:
            values = np.concatenate(self.sizes) if self.sizes else np.zeros(0, np.int64)
            return float(np.median(values)) if values.size else 0.0, "exact"
        return self.sketch.quantile(0.5), "sketch"


class CorpusAccumulator(object):
    """
    Per-label bin counts and summary statistics for one slice of a record
    stream. Accumulators merge exactly, so a stream may be cut into batches,
    digested on any number of workers and merged back.
    """

    def __init__(self, level="category"):
        self._level = level
        self._stats = {}
        self._hosts = set()
        self._records = 0

    @property
    def records(self):
        return self._records

    @property
    def hosts(self):
        return len(self._hosts)

    @property
    def labels(self):
        return category_order(self._stats)

    def add(self, records):
        sizes = {}
        for record in records:
            label = classify(record, self._level)
            sizes.setdefault(label, []).append(record.size_bytes)
            self._hosts.add(record.host)
            self._records += 1
        for label, values in sizes.items():
            self._stats.setdefault(label, _CategoryStats()).add(values)
        return self

    def merge(self, other):
        for label, stats in other._stats.items():
            if label in self._stats:
                self._stats[label].merge(stats)
            else:
                self._stats[label] = stats
        self._hosts |= other._hosts
        self._records += other._records
        return self

    def histograms(self):
        return OrderedDict(
            (label, SizeHistogram(self._stats[label].bins)) for label in self.labels
        )

    def summaries(self):
        out = []
        hosts = max(len(self._hosts), 1)
        for label in self.labels:
            stats = self._stats[label]
            median, mode = stats.median_bytes()
            out.append(CategorySummary(
                category=label,
                file_count=stats.count,
                files_per_host=stats.count / float(hosts),
                mean_kb=stats.size_sum / float(stats.count) / BIN_BYTES,
                median_kb=median / BIN_BYTES,
                share=100.0 * stats.count / float(self._records),
                median_mode=mode,
            ))
        return out


def _batches(records, size):
    records = iter(records)
    while True:
        batch = list(islice(records, size))
        if not batch:
            return
        yield batch


def digest_stream(records, new_partial, threads=None, batch_size=BATCH_SIZE):
    """
    One pass over ``records``: a producer cuts the stream into batches,
    workers digest each into a fresh ``new_partial()``, partials are merged
    in stream order. At most ``threads`` batches are held in memory at a time.
    """
    threads = thread_count(threads)
    total = new_partial()

    def digest(batch):
        return new_partial().add(batch)

    batches = _batches(records, batch_size)
    while True:
        wave = list(islice(batches, threads))
        if not wave:
            break
        for result in run_parallel(digest, wave, threads):
            if not result["ok"]:
                raise result["error"]
            total.merge(result["data"])
    return total


def accumulate(records, level="category", threads=None, batch_size=BATCH_SIZE):
    total = digest_stream(records, partial(CorpusAccumulator, level), threads, batch_size)
    logger.info("Ingested {} records from {} hosts in {} labels".format(total.records, total.hosts, len(total.labels)))
    return total


def build_histograms(records, level="category", threads=None):
    """Per-label 1 KB size histograms, k = floor(size/1024) + 1."""
    return accumulate(records, level, threads).histograms()


def summarize(records, level="category", threads=None):
    """Per-label (files per host | mean KB | median KB) with shares of the file count."""
    return accumulate(records, level, threads).summaries()
