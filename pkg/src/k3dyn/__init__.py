"""Exact dynamics and certificates for Wehler K3 surfaces."""

from __future__ import annotations

__version__ = "0.1.0"
