"""Operator surface: the command-line interface and the loopback HTTP +
server-sent-events API the dashboard consumes."""

from .server import GatewayHub, serve

__all__ = ["GatewayHub", "serve"]
