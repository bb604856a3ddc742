import random

import pytest

from cardproto.enrollment import ServerState, register_user


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def server(rng):
    return ServerState.create(rng)


@pytest.fixture
def alice(server):
    """(server-with-alice, alice's card, password)."""
    srv, card = register_user(server, "alice", "pw1")
    return srv, card, "pw1"


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        ok, text = RESULTS[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {text}")
