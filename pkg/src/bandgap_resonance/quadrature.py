"""Adaptive principal-value quadrature.

The engine combines three pieces:

* a symmetric window ``[p - w, p + w]`` around a simple pole ``p`` that is
  folded onto ``(0, w]`` as ``f(p + t) + f(p - t)``; the ``1/t`` parts cancel
  and the folded integrand is regular,
* globally adaptive 15-point Gauss-Kronrod panels, evaluated in vectorised
  batches, for the regular pieces,
* a semi-infinite tail summed over consecutive half-periods of the
  oscillation (or over doubling intervals when no period is known), with the
  sequence of partial sums extrapolated by Wynn's epsilon algorithm.

Non-decaying oscillatory tails (such as a bare ``cos(kx)``) are summed in the
Abel sense: the epsilon algorithm returns the mean of the oscillating partial
sums, which is the ``exp(-eps k)``-regularised value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, DomainError

# Kronrod nodes on [0, 1] (15-point rule) and the embedded 7-point Gauss weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:7:2] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[9:14:2] = _WG[2::-1]

_EPMACH = np.finfo(float).eps


class QuadResult(NamedTuple):
    value: float
    error: float


@dataclass(frozen=True)
class PVProblem:
    """A one-dimensional integral with at most one simple pole.

    ``integrand`` must accept numpy arrays and evaluate elementwise.
    ``half_period`` is the half-period of the oscillation. It is needed for
    oscillatory integrands on ``[lower, inf)``, and finite pieces are
    pre-split into panels no wider than it so that fast oscillations are not
    aliased by the first Kronrod rule. ``tail_start`` (if
    given) is where the tail summation begins; by default it starts right
    after the pole window.
    """

    integrand: Callable[[np.ndarray], np.ndarray]
    lower: float
    upper: float = math.inf
    pole: float | None = None
    rel_tol: float = 1e-10
    abs_tol: float = 1e-300
    half_period: float | None = None
    tail_start: float | None = None
    max_panels: int = 200_000
    max_tail_terms: int = 4000

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(f"need lower < upper (got {self.lower!r}, {self.upper!r})")
        if math.isinf(self.lower):
            raise DomainError("lower limit must be finite")
        if self.pole is not None and not self.lower < self.pole < self.upper:
            raise DomainError(f"pole {self.pole!r} must lie strictly inside ({self.lower!r}, {self.upper!r})")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("rel_tol and abs_tol must be positive")
        if self.half_period is not None and not self.half_period > 0:
            raise DomainError("half_period must be positive")


def _gk15(f, a, b):
    """Kronrod value and QUADPACK-style error estimate on each panel ``[a_i, b_i]``."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = center[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    if not np.all(np.isfinite(y)):
        raise ConvergenceError("integrand returned a non-finite value")
    kron = half * (y @ _KRONROD)
    gauss = half * (y @ _GAUSS)
    mean = kron / np.where(half != 0, 2 * half, 1.0)
    absint = np.abs(half) * (np.abs(y) @ _KRONROD)
    asc = np.abs(half) * (np.abs(y - mean[:, None]) @ _KRONROD)
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = asc * np.minimum(1.0, (200.0 * err / asc) ** 1.5)
    err = np.where((asc != 0) & (err != 0), scaled, err)
    err = np.maximum(err, 50 * _EPMACH * absint)
    return kron, err, absint


def integrate_segments(f, edges, abs_tol, rel_tol, *, relative_to="total", max_panels=200_000):
    """Adaptive Gauss-Kronrod over consecutive segments.

    Returns per-segment values, the summed error estimate and the summed
    absolute integral. ``relative_to="total"`` measures ``rel_tol`` against
    the magnitude of the total integral; ``"abs"`` against the integral of
    ``|f|`` (useful when the segment values cancel).

    A panel whose error does not drop when it is bisected is dominated by
    evaluation noise; it is accepted and its error stays in the estimate.
    """
    edges = np.asarray(edges, dtype=float)
    nseg = len(edges) - 1
    span = edges[-1] - edges[0]
    values = np.zeros(nseg)
    errors_done = 0.0
    abs_done = 0.0
    a = edges[:-1].copy()
    b = edges[1:].copy()
    seg = np.arange(nseg)
    parent_err = np.full(nseg, np.inf)
    parent_val = np.zeros(nseg)
    npanels = nseg
    while True:
        kron, err, absint = _gk15(f, a, b)
        total = values.sum() + kron.sum()
        absint_total = abs_done + absint.sum()
        scale = abs(total) if relative_to == "total" else absint_total
        # never ask for less than the roundoff floor of the panels themselves
        tol = max(abs_tol, rel_tol * scale, 100 * _EPMACH * absint_total)
        err_total = errors_done + err.sum()
        if err_total <= tol:
            np.add.at(values, seg, kron)
            return values, err_total, absint_total
        width = b - a
        tiny = width <= 64 * _EPMACH * np.maximum(np.abs(a), np.abs(b))
        at_floor = err <= 51 * _EPMACH * absint
        # children come in (left, right) pairs sharing one parent error
        stalled = np.zeros(len(err), dtype=bool)
        if np.isfinite(parent_err[0]):
            pair_err = err.reshape(-1, 2).sum(axis=1)
            pair_val = kron.reshape(-1, 2).sum(axis=1)
            agree = np.abs(pair_val - parent_val[::2]) <= 1e-5 * np.abs(pair_val)
            stalled = np.repeat(agree & (pair_err > 0.99 * parent_err[::2]), 2)
        accept = (err <= 0.5 * tol * width / span) | tiny | at_floor | stalled
        np.add.at(values, seg[accept], kron[accept])
        errors_done += err[accept].sum()
        abs_done += absint[accept].sum()
        keep = ~accept
        if not keep.any():
            return values, err_total, abs_done
        a, b, seg, perr, pval = a[keep], b[keep], seg[keep], err[keep], kron[keep]
        mid = 0.5 * (a + b)
        # interleave children so each pair is adjacent
        a = np.column_stack([a, mid]).ravel()
        b = np.column_stack([mid, b]).ravel()
        seg = np.repeat(seg, 2)
        parent_err = np.repeat(perr, 2)
        parent_val = np.repeat(pval, 2)
        npanels += len(mid)
        if npanels > max_panels:
            best = values.sum() + kron[keep].sum()
            raise ConvergenceError(
                f"adaptive quadrature exceeded {max_panels} panels",
                estimate=best,
                error=err_total,
            )


def wynn_epsilon(partial_sums, max_depth=24):
    """Wynn epsilon extrapolation of a sequence of partial sums.

    Returns ``(estimate, error)``. The error compares the two deepest even
    columns and the last two entries of the deepest one.
    """
    s = np.asarray(partial_sums, dtype=float)
    n = len(s)
    if n < 3:
        return float(s[-1]), float(abs(s[-1] - s[-2])) if n == 2 else math.inf
    prev = np.zeros(n + 1)
    cur = s.copy()
    evens = [cur]
    k = 0
    while len(cur) > 1 and k < max_depth:
        diff = np.diff(cur)
        if np.any(diff == 0) or not np.all(np.isfinite(diff)):
            break
        nxt = prev[1:len(cur)] + 1.0 / diff
        prev, cur = cur, nxt
        k += 1
        if k % 2 == 0:
            if not np.all(np.isfinite(cur)):
                break
            evens.append(cur)
    deep = evens[-1]
    est = float(deep[-1])
    err = 0.0
    if len(deep) > 1:
        err += abs(deep[-1] - deep[-2])
    if len(evens) > 1:
        err += abs(deep[-1] - evens[-2][-1])
    else:
        err += abs(s[-1] - s[-2])
    return est, float(err)


def _tail(f, start, half_period, tol_abs, rel_tol, max_terms, max_panels):
    """Sum ``int_start^inf f`` over half-periods (or doubling intervals)."""
    block = 24
    sums = []
    total = 0.0
    quad_err = 0.0
    n = 0
    width = half_period
    if width is None:
        width = max(abs(start), 1.0)
    prev_est = None
    prev_err = math.inf
    scale = 0.0
    while n < max_terms:
        if half_period is not None:
            edges = start + half_period * np.arange(n, n + block + 1)
        else:
            # doubling: [s, s+w], [s+w, s+3w], [s+3w, s+7w], ...
            idx = np.arange(n, n + block + 1, dtype=float)
            edges = start + width * (2.0 ** idx - 1.0)
        vals, err, absint = integrate_segments(
            f, edges, 0.0 if scale == 0 else 1e-3 * tol_abs, 1e-13,
            relative_to="abs", max_panels=max_panels,
        )
        if scale == 0:
            scale = absint
        quad_err += err
        for v in vals:
            total += v
            sums.append(total)
        n += block
        window = sums[-48:]
        est, eerr = wynn_epsilon(window)
        if prev_est is not None:
            eerr = max(eerr, abs(est - prev_est))
        tol = max(tol_abs, rel_tol * abs(est))
        if eerr <= tol and prev_est is not None:
            return est, eerr + quad_err
        prev_est, prev_err = est, eerr
    raise ConvergenceError(
        f"oscillatory tail did not converge after {max_terms} terms",
        estimate=prev_est if prev_est is not None else total,
        error=prev_err,
    )


def _split_edges(edges, width, max_panels):
    count = max(1, math.ceil((edges[-1] - edges[0]) / width))
    if count > max_panels:
        raise ConvergenceError(f"resolving the oscillation needs {count} panels (limit {max_panels})")
    return np.linspace(edges[0], edges[-1], count + 1)


def pv_quadrature(problem: PVProblem) -> QuadResult:
    """Principal value of ``int_lower^upper f(u) du`` with error estimate."""
    p = problem
    f = p.integrand
    rel, atol = p.rel_tol, p.abs_tol
    value = 0.0
    error = 0.0
    right = p.lower
    pieces = []
    if p.pole is not None:
        w = p.pole - p.lower
        if math.isfinite(p.upper):
            w = min(w, p.upper - p.pole)
        pole = p.pole

        def folded(t, pole=pole):
            # p + t and p - t are rounded; rescaling each half by its exact
            # offset restores the cancellation of the 1/t parts
            up = pole + t
            um = pole - t
            return (f(up) * (up - pole) + f(um) * (pole - um)) / t

        pieces.append((folded, np.array([0.0, w])))
        if p.pole - w > p.lower:
            pieces.append((f, np.array([p.lower, p.pole - w])))
        right = p.pole + w
    finite_end = p.upper
    if math.isinf(p.upper):
        finite_end = max(right, p.tail_start if p.tail_start is not None else right)
    if finite_end > right:
        pieces.append((f, np.array([right, finite_end])))
    # integrate finite pieces jointly so the tolerance is shared
    finite_val = 0.0
    finite_err = 0.0
    for g, edges in pieces:
        if p.half_period is not None:
            edges = _split_edges(edges, p.half_period, p.max_panels)
        v, e, _ = integrate_segments(
            g, edges, atol, 0.25 * rel, max_panels=p.max_panels,
        )
        finite_val += v.sum()
        finite_err += e
    value += finite_val
    error += finite_err
    if math.isinf(p.upper):
        tol_abs = max(atol, 0.25 * rel * abs(finite_val))
        tail_val, tail_err = _tail(
            f, finite_end, p.half_period, tol_abs, 0.25 * rel,
            p.max_tail_terms, p.max_panels,
        )
        value += tail_val
        error += tail_err
    return QuadResult(float(value), float(error))
