"""Pointwise kernels for the hot inner loop.

The compiled Cython lane is preferred when the extension was built;
otherwise the numpy reference lane is used.  Set ``LLBAR_NO_EXT=1`` to
force the reference lane (used by the lane-comparison tests and the
kernel benchmark).  Both lanes implement identical arithmetic on
(m, npoints) float64 arrays.
"""

import os

from . import _ref

if os.environ.get("LLBAR_NO_EXT"):
    _impl = _ref
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _ref
        BACKEND = "numpy"

cubic_mag = _impl.cubic_mag
cross3 = _impl.cross3
dot_scale = _impl.dot_scale
easy_axis_field = _impl.easy_axis_field

__all__ = ["BACKEND", "cubic_mag", "cross3", "dot_scale", "easy_axis_field"]
