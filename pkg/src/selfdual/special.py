"""Standard normal CDF/pdf used by every closed form in the package.

Built on the C library ``erfc`` (exposed through :mod:`math`), which is
accurate to double precision; no external special-function dependency.
"""

from __future__ import annotations

import math

import numpy as np

_SQRT2 = math.sqrt(2.0)
_erfc_vec = np.vectorize(math.erfc, otypes=[float])


def norm_cdf(x):
    """Phi(x), max abs error at double-precision rounding level."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(-float(x) / _SQRT2)
    return 0.5 * _erfc_vec(-np.asarray(x, dtype=float) / _SQRT2)


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return float(out) if out.ndim == 0 else out
