"""Collision handlers for the simulator."""

from __future__ import annotations

from drr.handler.abc import BaseCollisionHandler
from drr.handler.base import DRRHandler, PreplannedHandler

__all__ = ("BaseCollisionHandler", "DRRHandler", "PreplannedHandler")
