"""Vectorised composite Simpson quadrature with nested panel doubling.

Many integrals share one abscissa set (one per grid anti-diagonal), so the
integrand is evaluated as a block ``(n_items, n_points)``. Each item is frozen
at the first level where it meets the tolerance, which makes the result of
an item independent of which other items it was batched with.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


class QuadratureError(RuntimeError):
    def __init__(self, message, *, rel_change=None, items=None, panels=None):
        super().__init__(message)
        self.rel_change = rel_change
        self.items = items
        self.panels = panels


def adaptive_simpson(
    integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a: float,
    b: float,
    n_items: int,
    rtol: float = 1e-6,
    atol: float = 0.0,
    min_panels: int = 64,
    max_panels: int = 2**18,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate ``n_items`` integrands over ``[a, b]``.

    Parameters
    ----------
    integrand : callable
        ``integrand(x, idx)`` returns a ``(len(idx), len(x))`` array: the
        integrands for the item indices ``idx`` evaluated at ``x``.
    rtol, atol : float
        An item is converged once ``|S_2n - S_n| <= rtol * |S_2n| + atol``.
    min_panels, max_panels : int
        Even panel counts bounding the refinement.

    Returns
    -------
    values : ndarray, complex
    panels : ndarray, int
        Panel count at which each item converged.
    """
    if min_panels < 2 or min_panels % 2:
        raise ValueError("min_panels must be an even integer >= 2")
    idx_all = np.arange(n_items)
    n = min_panels
    h = (b - a) / n
    x = a + h * np.arange(n + 1)
    fx = np.asarray(integrand(x, idx_all), dtype=complex)
    ends = fx[:, 0] + fx[:, -1]
    odd = fx[:, 1:-1:2].sum(axis=1)
    even = fx[:, 2:-1:2].sum(axis=1)
    prev = h / 3 * (ends + 4 * odd + 2 * even)

    result = np.full(n_items, np.nan + 0j)
    panels = np.zeros(n_items, dtype=int)
    active = idx_all.copy()
    change = np.full(n_items, np.inf)

    while active.size:
        if 2 * n > max_panels:
            worst = float(np.max(change[active]))
            raise QuadratureError(
                f"quadrature did not converge: relative change {worst:.3e} > {rtol:.1e} "
                f"after {n} panels for {active.size} item(s)",
                rel_change=worst,
                items=active.copy(),
                panels=n,
            )
        n *= 2
        h /= 2
        mids = a + h * (2 * np.arange(n // 2) + 1)
        fm = np.asarray(integrand(mids, active), dtype=complex)
        even = even + odd
        odd = fm.sum(axis=1)
        cur = h / 3 * (ends + 4 * odd + 2 * even)

        diff = np.abs(cur - prev)
        change[active] = diff / np.maximum(np.abs(cur), np.finfo(float).tiny)
        done = diff <= rtol * np.abs(cur) + atol
        result[active[done]] = cur[done]
        panels[active[done]] = n

        keep = ~done
        active = active[keep]
        ends, odd, even, prev = ends[keep], odd[keep], even[keep], cur[keep]
    return result, panels
