"""Small shared helpers."""

from __future__ import annotations

import zlib


def stable_seed(*parts) -> int:
    """Deterministic 31-bit seed from arbitrary repr-able parts.

    Unlike hash(), stable across processes and runs.
    """
    return zlib.crc32(repr(parts).encode()) & 0x7FFFFFFF
