"""Small shared helpers: bitmask iteration, memory budget, seed derivation."""

import os

from .errors import BudgetExceededError

DEFAULT_BUDGET_MB = 4096
_BUDGET_ENV = "GBN_MEM_BUDGET_MB"


def memory_budget_bytes():
    """Configured memory budget in bytes (env GBN_MEM_BUDGET_MB, default 4096)."""
    raw = os.environ.get(_BUDGET_ENV)
    if raw is None:
        mb = DEFAULT_BUDGET_MB
    else:
        try:
            mb = int(raw)
        except ValueError:
            mb = DEFAULT_BUDGET_MB
    return mb * 1024 * 1024


def ensure_within_budget(bytes_needed, what):
    budget = memory_budget_bytes()
    if bytes_needed > budget:
        raise BudgetExceededError(
            f"{what} needs about {bytes_needed / 2**20:.0f} MiB, "
            f"budget is {budget / 2**20:.0f} MiB (set {_BUDGET_ENV} to raise it)",
            bytes_needed=bytes_needed,
            budget_bytes=budget,
        )


def iter_bits(mask):
    """Yield the set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


_MASK64 = (1 << 64) - 1


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master, *indices):
    """Derive a child seed from a master seed and an index path.

    Splitmix-style mixing; stable across runs and platforms, so replicate
    streams are independent of execution order.
    """
    x = _splitmix64(master & _MASK64)
    for k in indices:
        x = _splitmix64(x ^ ((k + 1) * 0xD1B54A32D192ED03 & _MASK64))
    return x
