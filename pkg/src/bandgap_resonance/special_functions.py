"""Sine and cosine integrals and the auxiliary function built from them.

The pair (Si, Ci) is evaluated with its power series up to ``x = 6`` and with
the continued fraction of the exponential integral ``E1(ix)`` beyond. The
continued fraction also yields ``si(x) = Si(x) - pi/2`` directly, which keeps
full relative precision for large arguments where ``Si`` is close to ``pi/2``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286060651209008240243

SERIES_CROSSOVER = 6.0
_EPS = 1e-17
_MAX_TERMS = 200


class SiCi(NamedTuple):
    si: float
    ci: float


def _series(x: float) -> tuple[float, float]:
    x2 = x * x
    term = x
    si = x
    k = 0
    while True:
        k += 1
        term *= -x2 / ((2 * k) * (2 * k + 1))
        add = term / (2 * k + 1)
        si += add
        if abs(add) < _EPS * abs(si) or k > _MAX_TERMS:
            break
    term = 1.0
    acc = 0.0
    k = 0
    while True:
        k += 1
        term *= -x2 / ((2 * k - 1) * (2 * k))
        add = term / (2 * k)
        acc += add
        if abs(add) < _EPS * max(abs(acc), 1e-300) or k > _MAX_TERMS:
            break
    ci = EULER_GAMMA + math.log(x) + acc
    return si, ci


def _continued_fraction(x: float) -> tuple[float, float]:
    """Return ``(Si(x) - pi/2, Ci(x))`` from the modified Lentz algorithm."""
    tiny = 1e-300
    b = complex(1.0, x)
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(2, 10_000):
        a = -float((i - 1) * (i - 1))
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta.real - 1.0) + abs(delta.imag) < 1e-16:
            break
    else:  # pragma: no cover - convergence is fast for x > 1
        raise RuntimeError(f"continued fraction for Si/Ci did not converge at x={x}")
    h *= complex(math.cos(x), -math.sin(x))
    return h.imag, -h.real


def sine_cosine_integrals(x: float) -> SiCi:
    """Return ``(Si(x), Ci(x))``.

    ``Si`` is odd and defined everywhere; ``Ci`` needs ``x > 0``.
    """
    x = float(x)
    if x <= 0.0:
        if x == 0.0:
            raise DomainError("Ci(x) is undefined for x <= 0 (got 0)")
        raise DomainError(f"Ci(x) is undefined for x <= 0 (got {x!r})")
    if x <= SERIES_CROSSOVER:
        si, ci = _series(x)
        return SiCi(si, ci)
    shifted, ci = _continued_fraction(x)
    return SiCi(shifted + math.pi / 2, ci)


def sine_integral(x: float) -> float:
    """Si(x) for any real ``x`` (odd function, Si(0) = 0)."""
    x = float(x)
    if x == 0.0:
        return 0.0
    sign = 1.0 if x > 0 else -1.0
    return sign * sine_cosine_integrals(abs(x)).si


def shifted_sine_integral(x: float) -> float:
    """``si(x) = Si(x) - pi/2`` for ``x > 0``, accurate for large ``x``."""
    x = float(x)
    if x <= 0.0:
        raise DomainError(f"shifted sine integral requires x > 0 (got {x!r})")
    if x <= SERIES_CROSSOVER:
        return _series(x)[0] - math.pi / 2
    return _continued_fraction(x)[0]


def cosine_integral(x: float) -> float:
    return sine_cosine_integrals(x).ci


def f_aux(z: float) -> float:
    """Auxiliary function ``f(z) = Ci(z) sin z - si(z) cos z``.

    Equals ``int_0^inf sin(u) / (u + z) du``; tends to pi/2 as z -> 0+ and to
    ``1/z`` for large z.
    """
    z = float(z)
    if z <= 0.0:
        raise DomainError(f"f_aux requires z > 0 (got {z!r})")
    ci = cosine_integral(z)
    return ci * math.sin(z) - shifted_sine_integral(z) * math.cos(z)


class IntermediateStateIntegrals(NamedTuple):
    virtual: float
    real: float
    ratio: float | None


COS_ZERO_GUARD = 1e-6


def intermediate_state_integrals(k0: float, r: float) -> IntermediateStateIntegrals:
    """Radial integrals of the virtual and real intermediate photon states.

    ``virtual = (1/r) int_0^inf sin(kr)/(k0+k) dk`` and
    ``real = PV (1/r) int_0^inf sin(kr)/(k0-k) dk``. ``ratio`` is
    ``|virtual|/|real|``, or ``None`` when ``|cos(k0 r)|`` is below
    ``COS_ZERO_GUARD`` and the real part is passing through a zero.
    """
    if k0 <= 0 or r <= 0:
        raise DomainError(f"k0 and r must be positive (got k0={k0!r}, r={r!r})")
    z = k0 * r
    fz = f_aux(z)
    virtual = fz / r
    real = fz / r - math.pi * math.cos(z) / r
    if abs(math.cos(z)) < COS_ZERO_GUARD:
        ratio = None
    else:
        ratio = abs(virtual) / abs(real)
    return IntermediateStateIntegrals(virtual, real, ratio)
