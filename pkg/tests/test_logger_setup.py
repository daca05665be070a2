"""Unit tests for logger_setup module."""

import logging
from collections.abc import Iterator
from datetime import datetime
from pathlib import Path

import pytest

from cavity_ghz.logger_setup import (
    LOG_FILENAME,
    LOGGER_NAME,
    OUTPUT_DIR_FORMAT,
    create_output_dir,
    setup_logging,
)


@pytest.fixture(autouse=True)
def _reset_handlers() -> Iterator[None]:
    yield
    logger = logging.getLogger(LOGGER_NAME)
    for handler in logger.handlers:
        handler.close()
    logger.handlers.clear()


def _console(logger: logging.Logger) -> logging.Handler:
    return next(h for h in logger.handlers if not isinstance(h, logging.FileHandler))


def _log_text(logger: logging.Logger, output_dir: Path) -> str:
    for h in logger.handlers:
        h.flush()
    return (output_dir / LOG_FILENAME).read_text(encoding="utf-8")


class TestCreateOutputDir:
    def test_creates_timestamped_directory(self, tmp_path: Path) -> None:
        output_dir = create_output_dir(base_dir=tmp_path)
        assert output_dir.is_dir()
        assert output_dir.parent == tmp_path

    def test_directory_name_matches_timestamp_format(self, tmp_path: Path) -> None:
        before = datetime.now()
        output_dir = create_output_dir(base_dir=tmp_path)
        after = datetime.now()
        parsed = datetime.strptime(output_dir.name, OUTPUT_DIR_FORMAT)
        assert before.replace(microsecond=0) <= parsed <= after.replace(microsecond=0)

    def test_defaults_to_output_base_dir(self, monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
        monkeypatch.chdir(tmp_path)
        output_dir = create_output_dir()
        assert output_dir.resolve().parent == (tmp_path / "output").resolve()

    def test_existing_directory_reused(self, tmp_path: Path) -> None:
        first = create_output_dir(base_dir=tmp_path)
        first.mkdir(parents=True, exist_ok=True)
        assert first.exists()


class TestSetupLogging:
    def test_returns_package_logger(self, tmp_path: Path) -> None:
        assert setup_logging(tmp_path).name == "cavity_ghz"

    def test_module_loggers_are_children(self, tmp_path: Path) -> None:
        setup_logging(tmp_path)
        logging.getLogger("cavity_ghz.propagate").info("from a module")
        assert "from a module" in _log_text(logging.getLogger(LOGGER_NAME), tmp_path)

    def test_logger_level_is_debug(self, tmp_path: Path) -> None:
        assert setup_logging(tmp_path).level == logging.DEBUG

    def test_console_and_file_handlers(self, tmp_path: Path) -> None:
        logger = setup_logging(tmp_path)
        file_h = next(h for h in logger.handlers if isinstance(h, logging.FileHandler))
        assert file_h.level == logging.DEBUG
        assert _console(logger).level == logging.INFO

    def test_verbose_console_is_debug(self, tmp_path: Path) -> None:
        assert _console(setup_logging(tmp_path, verbose=True)).level == logging.DEBUG

    def test_log_file_name(self, tmp_path: Path) -> None:
        setup_logging(tmp_path).info("x")
        assert LOG_FILENAME == "run.log"
        assert (tmp_path / "run.log").exists()

    def test_format_includes_timestamp_and_level(self, tmp_path: Path) -> None:
        logger = setup_logging(tmp_path)
        logger.warning("check format")
        content = _log_text(logger, tmp_path)
        assert "[WARNING] cavity_ghz: check format" in content
        assert "T" in content.split("[")[0]

    def test_debug_reaches_file(self, tmp_path: Path) -> None:
        logger = setup_logging(tmp_path)
        logger.debug("debug only")
        assert "[DEBUG]" in _log_text(logger, tmp_path)

    def test_repeated_calls_do_not_duplicate_handlers(self, tmp_path: Path) -> None:
        setup_logging(tmp_path)
        assert len(setup_logging(tmp_path).handlers) == 2
