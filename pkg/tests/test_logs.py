import io
import sys

from loguru import logger as log

from app.logs import setup_logging


def test_stderr_sink_follows_a_swapped_stream(monkeypatch):
    setup_logging(enqueue=False)
    first = io.StringIO()
    monkeypatch.setattr(sys, "stderr", first)
    log.warning("first stream")
    second = io.StringIO()
    monkeypatch.setattr(sys, "stderr", second)
    log.warning("second stream")
    assert "first stream" in first.getvalue()
    assert "second stream" in second.getvalue()
    assert "first stream" not in second.getvalue()
