"""Named random streams derived from one global seed."""

from __future__ import annotations

import hashlib
import random

MASK64 = (1 << 64) - 1


def stream_hash(*names: object) -> int:
    digest = hashlib.sha256("\x1f".join(str(n) for n in names).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_seed(seed: int, *names: object) -> int:
    """``seed XOR hash(names)``: adding a stream never perturbs another one."""
    return (int(seed) ^ stream_hash(*names)) & MASK64


def rng_for(seed: int, *names: object) -> random.Random:
    return random.Random(derive_seed(seed, *names) if names else int(seed) & MASK64)
