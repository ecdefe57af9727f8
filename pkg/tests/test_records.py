# -*- coding: UTF-8 -*-
#!/usr/bin/env python

import pytest

from tailfit.records import UNKNOWN_MIME, FileRecord, HostRecord


def test_file_record_normalizes_mime_case():
    record = FileRecord("a.example", "/x.JPG", "Image/JPEG", 10)
    assert record.mime == "image/jpeg"
    assert record.path == "/x.JPG"
    assert record == FileRecord("a.example", "/x.JPG", "image/jpeg", 10)
    assert len({record, FileRecord("a.example", "/x.JPG", "image/jpeg", 10)}) == 1


@pytest.mark.parametrize("fields", [
    ("", "/x", "image/jpeg", 1),
    (None, "/x", "image/jpeg", 1),
    ("h", None, "image/jpeg", 1),
    ("h", "/x", "jpeg", 1),
    ("h", "/x", "image/jpeg", -1),
    ("h", "/x", "image/jpeg", 1.5),
    ("h", "/x", "image/jpeg", True),
    ("h", "/x", "image/jpeg", "10"),
])
def test_file_record_rejects_invalid_fields(fields):
    with pytest.raises(ValueError):
        FileRecord(*fields)


def test_file_record_dict_round_trip():
    data = {"host": "b.example", "path": "/a b/ü.mp3", "mime": UNKNOWN_MIME, "size_bytes": 0}
    record = FileRecord.from_dict(data)
    assert record.as_dict() == data
    with pytest.raises(ValueError):
        FileRecord.from_dict({"host": "b.example", "path": "/x"})


def test_host_record():
    host = HostRecord("c.example", 0, 12)
    assert host.as_tuple() == ("c.example", 0, 12)
    assert HostRecord.from_dict(host.as_dict()) == host
    with pytest.raises(ValueError):
        HostRecord("c.example", -1, 12)
    with pytest.raises(ValueError):
        HostRecord("c.example", 1, None)
    assert host != FileRecord("c.example", "/", "text/html", 12)
