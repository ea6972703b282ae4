"""Two identical impurities coupled to a 1D tight-binding band.

The pole of the impurity-pair resolvent solves

    z = E0 + (g^2 B^2 / 2 pi) PV int_{-pi}^{pi} (1 +/- cos(k x)) / (z + B cos k) dk

with band dispersion ``-B cos k``; ``+`` is the symmetric and ``-`` the
antisymmetric impurity state. Energies are in the same (arbitrary) unit as
``B``; distances are in lattice units and treated as continuous.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .quadrature import PVProblem, QuadResult, pv_quadrature
from .resolvent import PoleSolution, iterate_pole

PARITIES = ("symmetric", "antisymmetric")
MIN_FORCE_SEPARATION = 2.0


@dataclass(frozen=True)
class WireModel:
    """Impurity pair in a quantum wire.

    Parameters
    ----------
    impurity_energy : float
        Bare impurity level ``E0``.
    half_bandwidth : float
        ``B > 0``.
    coupling : float
        Dimensionless impurity-band coupling ``g``.
    parity : {"symmetric", "antisymmetric"}
    separation : float
        Impurity distance in lattice units, ``x >= 0``.
    """

    impurity_energy: float = 0.0
    half_bandwidth: float = 1.0
    coupling: float = 0.1
    parity: str = "symmetric"
    separation: float = 10.0

    def __post_init__(self):
        if not self.half_bandwidth > 0:
            raise DomainError(f"half_bandwidth must be positive (got {self.half_bandwidth!r})")
        if self.parity not in PARITIES:
            raise DomainError(f"parity must be one of {PARITIES} (got {self.parity!r})")
        if not self.separation >= 0:
            raise DomainError(f"separation must be non-negative (got {self.separation!r})")

    @property
    def parity_sign(self) -> float:
        return 1.0 if self.parity == "symmetric" else -1.0

    def replace(self, **changes) -> "WireModel":
        return dataclasses.replace(self, **changes)


def electron_dispersion(k, half_bandwidth):
    """Band energy ``-B cos k``."""
    out = -half_bandwidth * np.cos(np.asarray(k, dtype=float))
    return float(out) if out.ndim == 0 else out


def kappa0(impurity_energy, half_bandwidth):
    """In-band wavenumber solving ``E0 = -B cos(kappa0)``, in ``[0, pi]``."""
    if not half_bandwidth > 0:
        raise DomainError(f"half_bandwidth must be positive (got {half_bandwidth!r})")
    ratio = -impurity_energy / half_bandwidth
    if abs(ratio) > 1:
        raise DomainError(f"|E0| = {abs(impurity_energy)!r} lies outside the band (B = {half_bandwidth!r})")
    return math.acos(ratio)


def electronic_pole_integral_quadrature(z, model: WireModel, rel_tol=1e-11) -> QuadResult:
    """Right-hand-side shift at trial energy ``z`` with its quadrature error."""
    b = model.half_bandwidth
    x = model.separation
    sign = model.parity_sign
    if abs(z) == b:
        raise SingularityError(f"the pole integral diverges at the band edge z = {z!r}")

    if abs(z) < b:
        pole = math.acos(-z / b)

        # z + B cos k = B (cos k - cos k*), factored so the zero sits exactly at k*
        def integrand(k):
            denom = -2.0 * b * np.sin(0.5 * (k + pole)) * np.sin(0.5 * (k - pole))
            return (1.0 + sign * np.cos(k * x)) / denom

    else:
        pole = None

        def integrand(k):
            return (1.0 + sign * np.cos(k * x)) / (z + b * np.cos(k))

    # the integrand is even in k, so fold [-pi, pi] onto [0, pi]
    res = pv_quadrature(
        PVProblem(
            integrand, 0.0, math.pi, pole=pole, rel_tol=rel_tol, abs_tol=1e-13 / b,
            half_period=math.pi / x if x > 1 else None,
        )
    )
    scale = model.coupling**2 * b * b / (2 * math.pi) * 2.0
    return QuadResult(scale * res.value, scale * res.error)


def electronic_pole_integral(z, model: WireModel, rel_tol=1e-11) -> float:
    """Distance-dependent right-hand side of the impurity pole equation."""
    return electronic_pole_integral_quadrature(z, model, rel_tol).value


def solve_electronic_pole(model: WireModel, mode="first_iteration", tol=1e-13, damping=0.5, max_iter=100) -> PoleSolution:
    """Pole of the impurity-pair resolvent, by the same driver as the photonic case."""
    return iterate_pole(
        lambda z: electronic_pole_integral(z, model),
        model.impurity_energy,
        mode,
        tol,
        damping,
        max_iter,
    )


def electronic_force(model: WireModel, mode="first_iteration", step=1e-3, tol=1e-13) -> float:
    """``-dz/dx`` by a central difference in the (continuous) separation."""
    x = model.separation
    if x < MIN_FORCE_SEPARATION:
        raise DomainError(f"separation must be at least {MIN_FORCE_SEPARATION:g} lattice units (got {x!r})")
    up = solve_electronic_pole(model.replace(separation=x + step), mode, tol).shift
    down = solve_electronic_pole(model.replace(separation=x - step), mode, tol).shift
    return -(up - down) / (2 * step)
