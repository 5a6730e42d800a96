import time

_started = None


def pytest_sessionstart(session):
    global _started
    _started = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    if _started is not None:
        elapsed = time.perf_counter() - _started
        print(f"\nfull suite wall clock: {elapsed:.1f}s (budget: 60s)")
