# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import re

UNKNOWN_MIME = "unknown/unknown"
MATCH_MIME = r"^[A-Za-z0-9!#$&^_.+-]+/[A-Za-z0-9!#$&^_.+-]+$"

regex_mime = re.compile(MATCH_MIME)


def _is_count(value):
    return type(value) is int and value >= 0


class FileRecord(object):
    """One file's metadata as seen by a crawler or a filesystem walk."""

    def __init__(self, host, path, mime, size_bytes):
        FileRecord.validate(host, path, mime, size_bytes)
        self._host = host
        self._path = path
        self._mime = mime.lower()
        self._size_bytes = size_bytes

    def __repr__(self):
        return "<FileRecord {}{} {} {}B>".format(self.host, self.path, self.mime, self.size_bytes)

    def __eq__(self, other):
        if not isinstance(other, FileRecord):
            return NotImplemented
        return self.as_tuple() == other.as_tuple()

    def __hash__(self):
        return hash(self.as_tuple())

    @classmethod
    def validate(cls, host, path, mime, size_bytes):
        if not isinstance(host, str) or not host:
            raise ValueError("Invalid host, non-empty string required")
        if not isinstance(path, str):
            raise ValueError("Invalid path value type, str required")
        if not isinstance(mime, str) or not (mime == UNKNOWN_MIME or regex_mime.match(mime)):
            raise ValueError("Invalid mime type {!r}".format(mime))
        if not _is_count(size_bytes):
            raise ValueError("Invalid size_bytes {!r}, non-negative int required".format(size_bytes))

    @classmethod
    def from_dict(cls, data):
        return cls(data.get("host"), data.get("path"), data.get("mime"), data.get("size_bytes"))

    def as_dict(self):
        return {"host": self.host, "path": self.path, "mime": self.mime, "size_bytes": self.size_bytes}

    def as_tuple(self):
        return (self.host, self.path, self.mime, self.size_bytes)

    @property
    def host(self):
        return self._host

    @property
    def path(self):
        return self._path

    @property
    def mime(self):
        return self._mime

    @property
    def size_bytes(self):
        return self._size_bytes


class HostRecord(object):
    """A host with its link in-degree and the number of files it serves."""

    def __init__(self, host, in_degree, file_count):
        HostRecord.validate(host, in_degree, file_count)
        self._host = host
        self._in_degree = in_degree
        self._file_count = file_count

    def __repr__(self):
        return "<HostRecord {} in={} files={}>".format(self.host, self.in_degree, self.file_count)

    def __eq__(self, other):
        if not isinstance(other, HostRecord):
            return NotImplemented
        return self.as_tuple() == other.as_tuple()

    def __hash__(self):
        return hash(self.as_tuple())

    @classmethod
    def validate(cls, host, in_degree, file_count):
        if not isinstance(host, str) or not host:
            raise ValueError("Invalid host, non-empty string required")
        if not _is_count(in_degree):
            raise ValueError("Invalid in_degree {!r}, non-negative int required".format(in_degree))
        if not _is_count(file_count):
            raise ValueError("Invalid file_count {!r}, non-negative int required".format(file_count))

    @classmethod
    def from_dict(cls, data):
        return cls(data.get("host"), data.get("in_degree"), data.get("file_count"))

    def as_dict(self):
        return {"host": self.host, "in_degree": self.in_degree, "file_count": self.file_count}

    def as_tuple(self):
        return (self.host, self.in_degree, self.file_count)

    @property
    def host(self):
        return self._host

    @property
    def in_degree(self):
        return self._in_degree

    @property
    def file_count(self):
        return self._file_count
