import os

import pytest

from freqprint.utils.errors import ParseError
from freqprint.utils.files import atomic_write_bytes, atomic_write_text, read_text_file, safe_name


def test_atomic_write_creates_parents(tmp_path):
    target = tmp_path / "a" / "b" / "manifest.tsv"
    assert atomic_write_text(target, "x\n") == target
    assert target.read_text() == "x\n"


def test_atomic_write_replaces_and_leaves_no_temp_files(tmp_path):
    target = tmp_path / "model.fpnn"
    atomic_write_bytes(target, b"old")
    atomic_write_bytes(target, b"new")
    assert target.read_bytes() == b"new"
    assert os.listdir(tmp_path) == ["model.fpnn"]


def test_atomic_write_failure_keeps_old_content(tmp_path, monkeypatch):
    target = tmp_path / "manifest.tsv"
    atomic_write_text(target, "old\n")

    def broken_replace(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", broken_replace)
    with pytest.raises(OSError):
        atomic_write_text(target, "new\n")
    assert target.read_text() == "old\n"
    assert os.listdir(tmp_path) == ["manifest.tsv"]


@pytest.mark.parametrize(
    "label,expected",
    [("nginx:1.25", "nginx_1.25"), ("ghcr.io/org/app", "ghcr.io_org_app"), ("", "_"), ("a b", "a_b")],
)
def test_safe_name(label, expected):
    assert safe_name(label) == expected


def test_read_text_file(tmp_path):
    target = atomic_write_text(tmp_path / "spec.txt", "cores=0\ntarget=é|run\n")
    assert read_text_file(target) == "cores=0\ntarget=é|run\n"


def test_read_text_file_reports_undecodable_line(tmp_path):
    target = tmp_path / "spec.txt"
    target.write_bytes(b"cores=0\n\ntarget=\xff\xfe|run\n")
    with pytest.raises(ParseError) as exc_info:
        read_text_file(target)
    assert exc_info.value.line == 3
