"""Dispersion relation of the periodic dielectric-slab crystal.

The crystal is a stack of slabs of width ``2a`` and refractive index ``n``
separated by vacuum gaps ``b = 2na``. For that spacing the Bloch condition
collapses to ``cos(4na omega/c) = X(k)`` with

    X(k) = [4n cos(kL) + (1 - n)^2] / (1 + n)^2,   L = 2a + b.

All frequencies are angular frequencies in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, SingularityError, UnsupportedGapError
from .units import SPEED_OF_LIGHT

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class CrystalSpec:
    """Slab crystal geometry: index, slab half-width and spacing (metres)."""

    refractive_index: float
    slab_half_width: float
    spacing: float | None = None

    def __post_init__(self):
        n, a = self.refractive_index, self.slab_half_width
        if not n > 1:
            raise DomainError(f"refractive index must exceed 1 (got {n!r})")
        if not a > 0:
            raise DomainError(f"slab half-width must be positive (got {a!r})")
        matched = 2 * n * a
        if self.spacing is None:
            object.__setattr__(self, "spacing", matched)
        elif not math.isclose(self.spacing, matched, rel_tol=1e-12):
            raise DomainError(
                f"only the matched spacing b = 2na = {matched!r} is supported (got {self.spacing!r})"
            )

    @property
    def period(self) -> float:
        return 2 * self.slab_half_width + self.spacing

    @property
    def frequency_scale(self) -> float:
        """``c / (4 n a)``: converts the Bloch phase into rad/s."""
        return SPEED_OF_LIGHT / (4 * self.refractive_index * self.slab_half_width)


@dataclass(frozen=True)
class BandStructure:
    """Edges of the first gap and the effective-mass curvature above it.

    ``curvature`` is ``A`` in ``omega = omega_c + A (k - k0)^2`` (m^2/s).
    """

    omega_v: float
    omega_c: float
    k0: float
    curvature: float
    gap_index: int = 1

    def __post_init__(self):
        if not 0 < self.omega_v < self.omega_c:
            raise DomainError(
                f"need 0 < omega_v < omega_c (got {self.omega_v!r}, {self.omega_c!r})"
            )
        if not self.k0 > 0:
            raise DomainError(f"k0 must be positive (got {self.k0!r})")
        if not self.curvature > 0:
            raise DomainError(f"curvature must be positive (got {self.curvature!r})")
        if self.gap_index < 1:
            raise DomainError("gap index starts at 1")

    @property
    def gap(self) -> float:
        return self.omega_c - self.omega_v


class BandEdges(NamedTuple):
    omega_v: float
    omega_c: float
    k0: float


def bloch_argument(k, spec: CrystalSpec):
    n = spec.refractive_index
    return (4 * n * np.cos(k * spec.period) + (1 - n) ** 2) / (1 + n) ** 2


def dispersion(k, spec: CrystalSpec, branch: int = 1):
    """Photon frequency on the first (``branch=1``) or second band.

    Defined on the reduced zone ``0 <= k <= pi/L``; accepts scalars or arrays.
    """
    if branch not in (1, 2):
        raise DomainError(f"branch must be 1 or 2 (got {branch!r})")
    k_arr = np.asarray(k, dtype=float)
    edge = math.pi / spec.period
    if np.any(k_arr < -_DOMAIN_SLACK * edge) or np.any(k_arr > edge * (1 + _DOMAIN_SLACK)):
        raise DomainError(f"k must lie in [0, pi/L] = [0, {edge!r}]")
    x = bloch_argument(np.clip(k_arr, 0.0, edge), spec)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise ArithmeticError("Bloch argument left [-1, 1]; crystal parameters are inconsistent")
    phase = np.arccos(np.clip(x, -1.0, 1.0))
    if branch == 2:
        phase = 2 * np.pi - phase
    out = spec.frequency_scale * phase
    return float(out) if out.ndim == 0 else out


def band_edges(spec: CrystalSpec, gap_index: int = 1) -> BandEdges:
    if gap_index != 1:
        raise UnsupportedGapError(f"only the first gap (q = 1) is modelled (got q={gap_index!r})")
    k0 = math.pi / spec.period
    return BandEdges(dispersion(k0, spec, 1), dispersion(k0, spec, 2), k0)


# Fourth-order one-sided second-derivative stencil f(x0), f(x0-h), ..., f(x0-5h).
_ONE_SIDED_D2 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0


def effective_mass(spec: CrystalSpec, edge: str = "upper", rel_step: float = 2e-3) -> float:
    """Curvature ``|omega''(k0)| / 2`` at the lower or upper gap edge.

    The edge sits on the zone boundary, so the derivative uses a one-sided
    fourth-order stencil reaching into the zone. The curvature varies on a
    short scale near the edge, so two step sizes are combined by Richardson
    extrapolation.
    """
    if edge not in ("lower", "upper"):
        raise DomainError(f"edge must be 'lower' or 'upper' (got {edge!r})")
    if not 0 < rel_step < 0.1:
        raise DomainError(f"rel_step must lie in (0, 0.1) (got {rel_step!r})")
    branch = 1 if edge == "lower" else 2
    k0 = math.pi / spec.period

    def second(h):
        samples = dispersion(k0 - h * np.arange(6), spec, branch)
        return float(_ONE_SIDED_D2 @ samples) / h**2

    h = rel_step * k0
    coarse, fine = second(h), second(h / 2)
    return abs((16 * fine - coarse) / 15) / 2


def band_structure(spec: CrystalSpec, gap_index: int = 1) -> BandStructure:
    """Gap edges plus the upper-edge curvature used by the resonance model."""
    edges = band_edges(spec, gap_index)
    return BandStructure(edges.omega_v, edges.omega_c, edges.k0, effective_mass(spec, "upper"), gap_index)


def dispersion_em(k, bands: BandStructure, side: str = "above"):
    """Effective-mass (parabolic) dispersion just below or above the gap."""
    u = np.asarray(k, dtype=float) - bands.k0
    if side == "above":
        out = bands.omega_c + bands.curvature * u * u
    elif side == "below":
        out = bands.omega_v - bands.curvature * u * u
    else:
        raise DomainError(f"side must be 'below' or 'above' (got {side!r})")
    return float(out) if out.ndim == 0 else out


def dos(omega, bands: BandStructure):
    """Near-edge photon density of states (s/m^3 scaled).

    ``(k0^2/sqrt(A)) * 2 pi / sqrt(|omega - omega_edge|)`` outside the gap,
    zero inside it. Exactly at an edge the density diverges.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w == bands.omega_c) or np.any(w == bands.omega_v):
        raise SingularityError("density of states diverges at a band edge")
    prefactor = bands.k0**2 / math.sqrt(bands.curvature) * 2 * math.pi
    out = np.zeros_like(w)
    above = w > bands.omega_c
    below = w < bands.omega_v
    out[above] = prefactor / np.sqrt(w[above] - bands.omega_c)
    out[below] = prefactor / np.sqrt(bands.omega_v - w[below])
    return float(out) if out.ndim == 0 else out
