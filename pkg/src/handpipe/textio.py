"""Line-oriented JSON text containers used by the stage artifacts.

First line is a header object, each following line one record. Keys are
sorted and separators fixed so identical data serializes to identical bytes.
"""

import json


def dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def write_records(path, header, records):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(header) + "\n")
        for rec in records:
            fh.write(dumps(rec) + "\n")


def read_records(path, expect_format=None, expect_version=None):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = json.loads(lines[0])
    if expect_format is not None and header.get("format") != expect_format:
        raise ValueError(f"{path}: expected format {expect_format!r}, "
                         f"got {header.get('format')!r}")
    if expect_version is not None and header.get("version") != expect_version:
        raise ValueError(f"{path}: unsupported version {header.get('version')!r}")
    return header, [json.loads(ln) for ln in lines[1:] if ln]
