# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import csv
import gzip
import io
import json
import os

from tailfit.helpers import Logger

GZIP_MAGIC = b"\x1f\x8b"

logger = Logger(__name__)


def split_list(li, n):
    """
    Split list into n lists

    :param li list: List to split
    :param n int: Split count
    :return list: List of n lists

    >>> split_list([1, 2, 3, 4, 5, 6, 7, 8, 9, 10], 3)
    [[1, 2, 3, 4], [5, 6, 7], [8, 9, 10]]
    """
    li = list(li)
    n = max(1, min(n, len(li))) if li else 1
    k, m = divmod(len(li), n)

    return [li[i * k + min(i, m):(i + 1) * k + min(i + 1, m)] for i in range(n)]


def sniff_binary(stream):
    """
    Return a binary stream that transparently decompresses gzip input,
    detected by its magic bytes rather than by file name.
    """
    if not hasattr(stream, "peek"):
        stream = io.BufferedReader(stream)
    if stream.peek(2)[:2] == GZIP_MAGIC:
        return gzip.GzipFile(fileobj=stream, mode="rb")
    return stream


class OutputWriter(object):
    """
    Writes report files into one directory and remembers them, so a failed
    run can remove its partial outputs.
    """

    def __init__(self, directory):
        self._directory = directory
        self._written = []

    @property
    def directory(self):
        return self._directory

    @property
    def written(self):
        return list(self._written)

    def path(self, name):
        return os.path.join(self._directory, name)

    def _track(self, name):
        os.makedirs(self._directory, exist_ok=True)
        path = self.path(name)
        self._written.append(path)
        return path

    def write_csv(self, name, header, rows):
        path = self._track(name)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        logger.info("Wrote {}".format(path))
        return path

    def write_json(self, name, data):
        path = self._track(name)
        with open(path, "w") as f:
            json.dump(data, f, indent=2)
            f.write("\n")
        logger.info("Wrote {}".format(path))
        return path

    def open_binary(self, name, compress=False):
        path = self._track(name)
        if compress:
            return gzip.GzipFile(path, mode="wb", mtime=0)
        return open(path, "wb")

    def remove_partial(self):
        for path in reversed(self._written):
            try:
                os.remove(path)
            except OSError as e:
                logger.warning("Could not remove partial output {}: {}".format(path, e))
            else:
                logger.info("Removed partial output {}".format(path))
        self._written = []

