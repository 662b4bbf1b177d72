import logging
import threading
import time

import pytest
from fairmmd.util import cli

_log = logging.getLogger(__name__)


@pytest.fixture()
def fresh_pool(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setattr(cli.ThreadPool, "_instance", None)
    yield
    if cli.ThreadPool._instance is not None:  # noqa: SLF001
        cli.ThreadPool._instance.shutdown()  # noqa: SLF001


def test_argparser():
    parser = cli.ArgumentParser("vdq")
    assert parser.parse_args([]).verbosity == 0
    assert parser.parse_args(["-v"]).verbosity == 1
    assert parser.parse_args(["-vv"]).verbosity == 2  # noqa: PLR2004
    assert parser.parse_args(["-q"]).verbosity == -1
    assert parser.parse_args(["-qqq"]).verbosity == -2  # noqa: PLR2004
    assert parser.parse_args([]).jobs == 1


def test_argparser_error():
    parser = cli.ArgumentParser()
    parser.add_argument("-k", type=int)
    with pytest.raises(SystemExit) as exc:
        parser.parse_args(["-k", "many"])
    assert exc.value.code == cli.EXIT_INPUT_ERROR
    with pytest.raises(SystemExit) as exc:
        parser.parse_args(["-j", "0"])
    assert exc.value.code == cli.EXIT_INPUT_ERROR


def emit_all():
    _log.debug("debug message")
    _log.info("info message")
    _log.warning("warning message")
    _log.error("error message")


def test_logging_config(caplog: pytest.LogCaptureFixture):
    cli.ArgumentParser().parse_args([])
    emit_all()
    assert "debug" not in caplog.text
    assert "info" not in caplog.text
    assert "warning" in caplog.text
    assert "error" in caplog.text
    caplog.clear()
    caplog.set_level(logging.INFO)
    emit_all()
    assert "debug" not in caplog.text
    assert "info" in caplog.text
    caplog.clear()
    caplog.set_level(logging.DEBUG)
    emit_all()
    assert "debug" in caplog.text


def test_console_handler():
    handler = cli.ConsoleHandler()
    handler.setFormatter(logging.Formatter(logging.BASIC_FORMAT))
    info = logging.LogRecord("fairmmd", logging.INFO, __file__, 1, "grid", None, None)
    assert handler.format(info) == "grid"
    warn = logging.LogRecord("fairmmd", logging.WARNING, __file__, 1, "m=1", None, None)
    assert handler.format(warn) == "WARNING:fairmmd:m=1"


@pytest.mark.usefixtures("fresh_pool")
def test_threadpool(caplog: pytest.LogCaptureFixture):
    pool = cli.ThreadPool(2)
    assert cli.ThreadPool() is pool
    assert pool._max_workers == 2  # noqa: SLF001, PLR2004
    cli.ThreadPool(42)
    assert "ignored 42" in caplog.text


@pytest.mark.usefixtures("fresh_pool")
def test_thread_map_sizes_pool():
    jobs = 4
    seconds = 0.05
    start = time.perf_counter()
    cli.thread_map(time.sleep, [seconds] * jobs, jobs=jobs)
    elapsed = time.perf_counter() - start
    assert cli.ThreadPool()._max_workers == jobs  # noqa: SLF001
    assert elapsed < seconds * 3


def test_thread_map_order():
    def slow_square(x: int) -> int:
        time.sleep(0.001 * (10 - x))
        return x * x

    expected = [x * x for x in range(10)]
    assert cli.thread_map(slow_square, range(10)) == expected
    assert cli.thread_map(slow_square, range(10), jobs=4) == expected


def test_thread_map_serial_stays_in_caller():
    names = cli.thread_map(lambda _: threading.current_thread().name, range(3))
    assert set(names) == {threading.current_thread().name}
