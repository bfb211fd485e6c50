"""Reference numpy implementations of the pointwise kernels.

These define the semantics; the compiled lane in ``_core.pyx`` mirrors
the same operation order so results agree to rounding.
"""

import numpy as np


def cubic_mag(u):
    """|u|^2 u for u of shape (m, n)."""
    mag2 = np.einsum("cj,cj->j", u, u)
    return mag2[np.newaxis, :] * u


def cross3(a, b):
    """Componentwise cross product of two (3, n) arrays."""
    out = np.empty_like(a)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


def dot_scale(u, a):
    """(a . u) u for u of shape (m, n) and a of shape (m,)."""
    s = np.einsum("c,cj->j", a, u)
    return s[np.newaxis, :] * u


def easy_axis_field(u, e, lam1, lam2):
    """lam1 (e.u) e - lam2 (e.u)^3 e for u of shape (3, n), unit e."""
    s = np.einsum("c,cj->j", e, u)
    w = lam1 * s - lam2 * s**3
    return w[np.newaxis, :] * e[:, np.newaxis]
