"""Deterministic child-seed derivation.

Every random decision in a study derives from one master seed through
``derive_seed(master_seed, label, index)``. The derivation is pinned:

    seed = int.from_bytes(SHA-256(f"{master_seed}:{label}:{index}")[:8], "big")

so records are portable across implementations and results are independent
of scheduling or worker count. The mapping is test-pinned in
``tests/test_seeding.py``; changing it invalidates stored digests.
"""

from __future__ import annotations

import hashlib


def derive_seed(master_seed: int, label: str, index: int = 0) -> int:
    """Derive a 64-bit child seed from (master_seed, component label, index)."""
    payload = f"{master_seed}:{label}:{index}".encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")
