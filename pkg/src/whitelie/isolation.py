"""Outbound-connection audit backing the offline-operation guarantee.

The sandbox simulates every network effect internally; nothing in the core
may open a socket to a non-loopback destination. Installing the audit wraps
the socket connect entry points and counts any outbound attempt, so the
test suite can assert the counter stayed at zero end to end.
"""

from __future__ import annotations

import ipaddress
import socket
import threading
from dataclasses import dataclass, field


def _is_loopback(address: object) -> bool:
    if isinstance(address, (tuple, list)) and address:
        host = str(address[0])
        if host in ("localhost", ""):
            return True
        try:
            return ipaddress.ip_address(host).is_loopback
        except ValueError:
            return False
    # AF_UNIX paths and the like stay on this machine.
    return True


@dataclass
class OutboundAudit:
    """Counts connect() calls to non-loopback destinations."""

    outbound_connections: int = 0
    attempts: list[str] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _installed: bool = field(default=False, repr=False)

    def record(self, address: object) -> None:
        if not _is_loopback(address):
            with self._lock:
                self.outbound_connections += 1
                self.attempts.append(repr(address))

    def install(self) -> "OutboundAudit":
        if self._installed:
            return self
        audit = self
        original_connect = socket.socket.connect
        original_connect_ex = socket.socket.connect_ex

        def connect(sock: socket.socket, address):  # type: ignore[no-untyped-def]
            audit.record(address)
            return original_connect(sock, address)

        def connect_ex(sock: socket.socket, address):  # type: ignore[no-untyped-def]
            audit.record(address)
            return original_connect_ex(sock, address)

        socket.socket.connect = connect  # type: ignore[method-assign]
        socket.socket.connect_ex = connect_ex  # type: ignore[method-assign]
        self._originals = (original_connect, original_connect_ex)
        self._installed = True
        return self

    def uninstall(self) -> None:
        if self._installed:
            socket.socket.connect, socket.socket.connect_ex = self._originals  # type: ignore[method-assign]
            self._installed = False


_active: OutboundAudit | None = None


def install_audit() -> OutboundAudit:
    """Install (or return the already-installed) process-wide audit."""
    global _active
    if _active is None:
        _active = OutboundAudit().install()
    return _active


def active_audit() -> OutboundAudit | None:
    return _active
