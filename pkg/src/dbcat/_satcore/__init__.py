"""Saturation kernel selection.

Two interchangeable kernels implement the mask-level inner loops: the
compiled ``_speedups`` extension (64-bit masks, built at install time when a
compiler is available) and the pure-Python ``_pure`` module (arbitrary mask
width).  Selection happens per saturation run: the compiled kernel is used
when it was built, the mask space fits in 64 bits, and the environment
variable ``DBCAT_PURE`` is unset.

``force_kernel`` exists for benchmarks and parity tests.
"""

from __future__ import annotations

import os

from . import _pure

try:  # built optionally; absence is fine
    from . import _speedups  # type: ignore[attr-defined]
except ImportError:
    _speedups = None

pure = _pure
compiled = _speedups
compiled_available = _speedups is not None

_forced = None


def force_kernel(name):
    """Force 'pure' or 'compiled' (None restores automatic choice)."""
    global _forced
    if name is None:
        _forced = None
    elif name == "pure":
        _forced = _pure
    elif name == "compiled":
        if _speedups is None:
            raise RuntimeError("compiled kernel is not available")
        _forced = _speedups
    else:
        raise ValueError(f"unknown kernel {name!r}")


def pick_kernel(max_mask_bits: int):
    """Choose the kernel for a saturation over ``max_mask_bits``-bit masks."""
    if _forced is not None:
        if _forced is not _pure and max_mask_bits > 64:
            return _pure  # forced compiled kernel cannot represent the masks
        return _forced
    if os.environ.get("DBCAT_PURE"):
        return _pure
    if _speedups is not None and max_mask_bits <= 64:
        return _speedups
    return _pure
