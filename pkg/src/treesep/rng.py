"""Counter-based deterministic randomness.

Two keyed PRF streams, domain-separated by blake2b's person field:

* seed derivation for replicas and engine substreams, and
* per-vertex occupancy draws.

Occupancy draws additionally mix in a per-vertex counter: the engine may
relabel a site back to "undecided" after moving its value elsewhere, and
the next decision for that vertex must be a fresh draw, not a replay.
"""

from __future__ import annotations

from hashlib import blake2b

_MASK64 = (1 << 64) - 1
_SEED_PERSON = b"treesep:seed"
_OCCUPY_PERSON = b"treesep:occupy"
_INV_2_53 = 2.0 ** -53


def _key(master: int) -> bytes:
    return (master & _MASK64).to_bytes(8, "little")


def derive_seed(master: int, *indices: int) -> int:
    """64-bit seed for a substream identified by an index path."""
    h = blake2b(digest_size=8, key=_key(master), person=_SEED_PERSON)
    for ix in indices:
        h.update((ix & _MASK64).to_bytes(8, "little"))
    return int.from_bytes(h.digest(), "little")


def occupancy_uniform(master: int, word: bytes, counter: int) -> float:
    """Uniform [0, 1) draw for vertex ``word``, fresh for each counter value."""
    h = blake2b(digest_size=8, key=_key(master), person=_OCCUPY_PERSON)
    h.update((counter & _MASK64).to_bytes(8, "little"))
    h.update(word)
    return (int.from_bytes(h.digest(), "little") >> 11) * _INV_2_53
