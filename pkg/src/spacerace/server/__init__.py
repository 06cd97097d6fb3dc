"""Hosting layer: many concurrent games behind one WebSocket/TCP endpoint."""

from .app import ServerSettings, create_app

__all__ = ["ServerSettings", "create_app"]
