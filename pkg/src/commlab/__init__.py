"""Seeded simulations of two-party protocols: message compression,
privacy trade-offs, remote state preparation and entanglement tests."""

from . import cinfo, cproto, entres, ersp, qmath, qproto

__all__ = ["qmath", "cinfo", "cproto", "qproto", "ersp", "entres"]
__version__ = "0.1.0"
