"""Standard normal helpers shared by every analysis module.

Thin wrappers over ``scipy.special`` so each call site uses one
machine-precision implementation (erf-based, absolute error well below
1e-12). All functions broadcast over numpy arrays and accept plain floats.
"""

import numpy as np
from scipy import special

_SQRT2 = float(np.sqrt(2.0))
_INV_SQRT_2PI = 1.0 / float(np.sqrt(2.0 * np.pi))
_SQRT_2_OVER_PI = float(np.sqrt(2.0 / np.pi))


def pdf(x):
    """Density of the standard normal at ``x``."""
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(x))


def cdf(x):
    """Lower-tail probability of the standard normal at ``x``."""
    return special.ndtr(x)


def sf(x):
    """Upper-tail probability; keeps relative accuracy deep in the tail."""
    return special.ndtr(np.negative(x))


def quantile(p):
    """Inverse of :func:`cdf`. Requires ``0 < p < 1``."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise ValueError("quantile requires probabilities strictly inside (0, 1)")
    q = special.ndtri(p_arr)
    return float(q) if np.isscalar(p) or p_arr.ndim == 0 else q


def hazard(x):
    """Normal hazard (Mills ratio inverse) ``pdf(x) / sf(x)``.

    Computed via the scaled complementary error function, so it neither
    underflows nor loses accuracy for large ``x``; ``hazard(-inf) == 0``.
    """
    return _SQRT_2_OVER_PI / special.erfcx(np.asarray(x, dtype=float) / _SQRT2)
