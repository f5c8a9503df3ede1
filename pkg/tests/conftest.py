import pytest

from whitelie.isolation import install_audit


@pytest.fixture(scope="session", autouse=True)
def outbound_audit():
    """Process-wide outbound-connection audit covering the entire suite.

    The core must never open a non-loopback socket; the teardown assertion
    makes any violation fail the run even if no test checked explicitly.
    """
    audit = install_audit()
    yield audit
    assert audit.outbound_connections == 0, (
        f"outbound connections attempted: {audit.attempts}"
    )
