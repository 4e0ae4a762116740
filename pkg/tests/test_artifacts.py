"""Tests for output path handling."""

import pytest

from src.artifacts import is_path_blocked, resolve_output_dir, sanitize_filename
from src.commands import CommandContext
from src.errors import InputValidationError


class TestSanitizeFilename:
    def test_plain_name_unchanged(self):
        assert sanitize_filename("results.csv") == "results.csv"

    def test_directories_dropped(self):
        assert sanitize_filename("../../etc/passwd") == "passwd"
        assert sanitize_filename("runs\\k60\\summary.json") == "summary.json"

    def test_unsafe_characters_replaced(self):
        assert sanitize_filename('hist<K>:"a"|b?*.svg') == "hist_K___a__b__.svg"
        assert sanitize_filename("loss\x00.csv") == "loss_.csv"

    def test_empty_names(self):
        assert sanitize_filename("") == "unnamed"
        assert sanitize_filename(" .. ") == "unnamed"
        assert sanitize_filename("dir/") == "unnamed"

    def test_long_name_keeps_extension(self):
        name = sanitize_filename("k" * 300 + ".json")
        assert len(name) == 255
        assert name.endswith(".json")


class TestOutputDirectory:
    def test_blocked(self):
        assert is_path_blocked("/proc/self")[0]
        assert is_path_blocked("")[0]
        with pytest.raises(InputValidationError):
            resolve_output_dir("/etc/compdiff")

    def test_created(self, tmp_path):
        directory = resolve_output_dir(str(tmp_path / "a" / "b"))
        assert directory.is_dir()

    def test_existing_file_rejected(self, tmp_path):
        target = tmp_path / "file"
        target.write_text("x")
        with pytest.raises(InputValidationError):
            resolve_output_dir(str(target))

    def test_context_paths_stay_inside(self, tmp_path):
        context = CommandContext(out=tmp_path, seed=0, workers=1, version="1.0.0")
        assert context.path("../escape.json") == tmp_path / "escape.json"
        assert context.path("samples.cgs") == tmp_path / "samples.cgs"
