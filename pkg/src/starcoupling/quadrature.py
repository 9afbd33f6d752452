"""Gauss-Legendre rules for the kernel integrals.

The double integrals all live on [0,1]^2 after rescaling and carry
integrands that are analytic per cell except for a crease along x = y.
Cells on the diagonal are therefore split into two triangles, each mapped
to the unit square (x = s, y = s*t and its mirror image), which restores
spectral accuracy of the tensor rule.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import QuadratureNotConverged


@lru_cache(maxsize=None)
def _gauss01(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def merge_breaks(lo, hi, *extra):
    """Sorted unique breakpoints covering [lo, hi], including any of
    ``extra`` that fall strictly inside."""
    pts = [lo, hi]
    for arr in extra:
        for t in np.atleast_1d(arr):
            if lo + 1e-14 < t < hi - 1e-14:
                pts.append(float(t))
    return np.unique(np.asarray(pts, dtype=float))


@dataclass(frozen=True)
class QuadratureRule:
    """Per-cell Gauss-Legendre rule of fixed order.

    ``split_diagonal`` controls whether same-cell double integrals are
    decomposed into triangles; leave it on for kernels containing |x-y|.
    """

    order: int = 32
    split_diagonal: bool = True

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be positive")

    def doubled(self):
        return replace(self, order=2 * self.order)

    def points(self, a, b):
        x, w = _gauss01(self.order)
        return a + (b - a) * x, (b - a) * w

    def integrate(self, f, breaks):
        """Integral of a vectorized f over the cells of ``breaks``."""
        breaks = np.asarray(breaks, dtype=float)
        total = 0.0
        for a, b in zip(breaks[:-1], breaks[1:]):
            x, w = self.points(a, b)
            total = total + np.sum(w * f(x))
        return total

    def _tensor_cell(self, f, ax, bx, ay, by):
        x, wx = self.points(ax, bx)
        y, wy = self.points(ay, by)
        vals = f(x[:, None], y[None, :])
        return np.sum(wx[:, None] * wy[None, :] * vals)

    def _triangle_pair(self, f, a, b):
        # lower triangle a<=y<=x<=b via x = a+(b-a)s, y = a+(b-a)s*t,
        # Jacobian (b-a)^2 s; the upper triangle is its mirror image
        s, ws = _gauss01(self.order)
        t, wt = _gauss01(self.order)
        h = b - a
        S = s[:, None]
        T = t[None, :]
        X = a + h * S
        Y = a + h * S * T
        wgt = (h * h) * (ws[:, None] * wt[None, :]) * S
        return np.sum(wgt * f(X, Y)) + np.sum(wgt * f(Y, X))

    def double_integral(self, f, breaks):
        """Integral of f(x, y) over the square spanned by ``breaks``^2.

        ``f`` must accept broadcasting 2-d arrays. Diagonal cells are
        triangle-split when ``split_diagonal`` is set.
        """
        breaks = np.asarray(breaks, dtype=float)
        total = 0.0
        ncell = breaks.size - 1
        for i in range(ncell):
            for j in range(ncell):
                if i == j and self.split_diagonal:
                    total = total + self._triangle_pair(f, breaks[i], breaks[i + 1])
                else:
                    total = total + self._tensor_cell(
                        f, breaks[i], breaks[i + 1], breaks[j], breaks[j + 1]
                    )
        return total


def converged_value(compute, rule, rtol=1e-10, atol=0.0, context=""):
    """Evaluate ``compute(rule)`` and verify against the doubled order.

    Returns the doubled-order value; raises QuadratureNotConverged when the
    two disagree beyond ``rtol`` (relative) plus ``atol``.
    """
    coarse = compute(rule)
    fine = compute(rule.doubled())
    if abs(fine - coarse) > rtol * abs(fine) + atol:
        raise QuadratureNotConverged(
            f"order {rule.order}->{2 * rule.order} changed "
            f"{context or 'integral'} by {abs(fine - coarse):.3e} "
            f"(value {abs(fine):.3e})"
        )
    return fine
