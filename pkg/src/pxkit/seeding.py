"""Deterministic derivation of decorrelated seeds from a base seed.

Derived seeds are pure functions of the base seed and the key components
(integers, or floats keyed by their IEEE-754 bit pattern), so independent
streams can be reconstructed anywhere without shared state.
"""

from __future__ import annotations

import struct

import numpy as np


def _word(component) -> int:
    if isinstance(component, float):
        return struct.unpack("<Q", struct.pack("<d", component))[0]
    return int(component) % (1 << 64)


def derive_seed(base_seed: int, *components) -> int:
    """Collapse (base_seed, components...) into one 64-bit seed."""
    words = [_word(base_seed)] + [_word(c) for c in components]
    return int(np.random.SeedSequence(words).generate_state(1, np.uint64)[0])
