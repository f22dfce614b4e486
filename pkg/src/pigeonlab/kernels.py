"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``PIGEONLAB_PURE=1`` to force the pure-Python kernels.
"""

import os

from . import _pykernels

try:
    if os.environ.get("PIGEONLAB_PURE"):
        raise ImportError("pure kernels requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

HAVE_COMPILED = _ckernels is not None
BACKEND = "cython" if HAVE_COMPILED else "python"


def _fits(masks, *extra):
    return all(x.bit_length() <= 64 for x in masks) and all(
        x.bit_length() <= 64 for x in extra if x >= 0
    )


def min_expansion(masks, r, unique=True, allowed=None, hole_mask=-1, backend=None):
    use_c = (backend or BACKEND) == "cython" and HAVE_COMPILED and _fits(masks, hole_mask)
    impl = _ckernels if use_c else _pykernels
    return impl.min_expansion(masks, r, unique, allowed, hole_mask)


def find_augmentation(masks, current, outside, r, nu_num, nu_den, k_max, candidates, backend=None):
    use_c = (
        (backend or BACKEND) == "cython"
        and HAVE_COMPILED
        and _fits(masks, outside)
        and abs(nu_num) < 2**31
        and abs(nu_den) < 2**31
    )
    impl = _ckernels if use_c else _pykernels
    return impl.find_augmentation(masks, current, outside, r, nu_num, nu_den, k_max, candidates)
