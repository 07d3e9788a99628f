"""Thin adaptive-quadrature wrapper used by the analytic modules.

All one-dimensional integrals in the package go through :func:`integrate`,
which handles infinite limits, user-supplied break points, and converts
scipy's soft convergence warnings into hard :class:`~lrb.errors.NumericError`
when the estimate is genuinely unusable.  The target tolerance can be set
globally through the ``LRB_QUAD_TOL`` environment variable.
"""

from __future__ import annotations

import math
import os
from typing import Callable, Iterable

from scipy import integrate as _si

from .errors import NumericError

_DEFAULT_TOL = 1e-9


def quad_tol() -> float:
    """Quadrature tolerance: ``LRB_QUAD_TOL`` env var, default 1e-9."""
    raw = os.environ.get("LRB_QUAD_TOL")
    if raw is None:
        return _DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise NumericError(f"LRB_QUAD_TOL is not a number: {raw!r}") from exc
    if not 0.0 < tol < 1.0:
        raise NumericError(f"LRB_QUAD_TOL out of range (0, 1): {tol}")
    return tol


def _quad_segment(f, a, b, tol, limit):
    out = _si.quad(f, a, b, epsabs=tol, epsrel=tol, limit=limit, full_output=1)
    value, abserr = out[0], out[1]
    ok = len(out) < 4  # no warning message attached
    return value, abserr, ok


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    points: Iterable[float] = (),
    tol: float | None = None,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]``; returns ``(value, error_estimate)``.

    ``points`` marks internal locations where the integrand is awkward
    (kinks, near-singularities, atoms of an adjacent measure); infinite
    limits are supported and force a split at those points.
    """
    if tol is None:
        tol = quad_tol()
    if not a < b:
        if a == b:
            return 0.0, 0.0
        raise NumericError(f"integration range is empty: [{a}, {b}]")

    pts = sorted({float(p) for p in points if a < p < b})
    if math.isinf(a) or math.isinf(b):
        edges = [a, *pts, b]
        total = err = 0.0
        all_ok = True
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, e, ok = _quad_segment(f, lo, hi, tol, 200)
            if not ok:
                v, e, ok = _quad_segment(f, lo, hi, tol, 800)
            total += v
            err += e
            all_ok = all_ok and ok
    else:
        total, err, all_ok = _quad_segment_pts(f, a, b, pts, tol, 200)
        if not all_ok:
            total, err, all_ok = _quad_segment_pts(f, a, b, pts, tol, 800)

    if not all_ok and err > 1e-6 * max(1.0, abs(total)):
        raise NumericError(
            "quadrature did not converge",
            diagnostics={"value": total, "error_estimate": err, "range": (a, b)},
        )
    return total, err


def _quad_segment_pts(f, a, b, pts, tol, limit):
    out = _si.quad(
        f, a, b, epsabs=tol, epsrel=tol, limit=limit,
        points=pts or None, full_output=1,
    )
    return out[0], out[1], len(out) < 4
