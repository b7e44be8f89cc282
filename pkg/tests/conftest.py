import time
from contextlib import contextmanager

import pytest

from trustlab.ledger import Honesty, InteractionLedger, Outcome, RatingEvent

# criterion number -> (status, title, detail)
ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def ev(rater, ratee, t, value=1.0, outcome=None, honesty=None):
    if outcome is None:
        outcome = Outcome.AUTHENTIC if value >= 0.5 else Outcome.INAUTHENTIC
    if honesty is None:
        honesty = Honesty.HONEST if (value >= 0.5) == (outcome is Outcome.AUTHENTIC) else Honesty.DISHONEST
    return RatingEvent(rater, ratee, t, value, outcome, honesty)


def ledger_of(n, triples):
    """Ledger from (rater, ratee, value) triples at consecutive ticks."""
    led = InteractionLedger(n)
    for t, (i, j, v) in enumerate(triples):
        led.record(ev(i, j, t, v))
    return led


@contextmanager
def judge(number: int, title: str, limit_s: float):
    """Record one acceptance criterion; a body exception or an overrun fails it."""
    state = {"detail": ""}
    t0 = time.perf_counter()
    try:
        yield state
    except BaseException as exc:
        el = time.perf_counter() - t0
        ACCEPTANCE[number] = ("FAIL", title, f"{type(exc).__name__}: {exc} [{el:.1f}s]")
        raise
    el = time.perf_counter() - t0
    ok = el < limit_s
    ACCEPTANCE[number] = ("PASS" if ok else "FAIL", title,
                          f"{state['detail']} [{el:.1f}s / limit {limit_s:g}s]")
    assert ok, f"criterion {number} took {el:.1f}s, limit {limit_s}s"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n} {status}: {title} -- {detail}")


@pytest.fixture
def small_ledger():
    return ledger_of(4, [(0, 1, 1.0), (0, 1, 1.0), (0, 2, 0.0), (1, 2, 1.0), (2, 3, 1.0)])
