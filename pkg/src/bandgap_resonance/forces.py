"""Energy shifts, quasi-static forces, vacuum baselines and enhancement ratios.

All results are first-order (first-iteration) far-zone expressions. Energy
shifts are in rad/s; forces are in rad/s per metre (multiply by hbar for
newtons). The coupling ``dipole_sq`` carries the reduced units described in
:class:`~bandgap_resonance.resolvent.AtomPairConfig`.

Sign convention: ``alignment`` is the cosine between the dipole and the
separation; the angular factor ``alignment**2 - 1`` is never positive, so for
dipoles perpendicular to the separation a positive force pushes the atoms
apart.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .band_structure import BandStructure
from .errors import DomainError, FarZoneWarning, SingularityError
from .resolvent import FAR_ZONE_MIN, AtomPairConfig
from .units import SPEED_OF_LIGHT


def dipole_tensor(mu_hat, r_hat, k0, r, mode="exact"):
    """``mu_m mu_n (-lap delta_mn + grad_m grad_n)`` applied to ``cos(k0 r)/r``.

    Parameters
    ----------
    mu_hat, r_hat : array_like, shape (3,)
        Unit dipole and separation directions.
    k0 : float
        Wavenumber of the field (rad/m).
    r : float
        Separation (m).
    mode : {"exact", "far_zone"}
        ``far_zone`` keeps only the ``1/r`` term.

    Returns
    -------
    float
        Contracted tensor in 1/m^3.
    """
    if not r > 0:
        raise SingularityError(f"the dipole tensor is singular at r = {r!r}")
    c = float(np.dot(mu_hat, r_hat))
    c2 = c * c
    kr = k0 * r
    cs, sn = math.cos(kr), math.sin(kr)
    if mode == "far_zone":
        return -(k0**2) * (c2 - 1.0) * cs / r
    if mode != "exact":
        raise DomainError(f"mode must be 'exact' or 'far_zone' (got {mode!r})")
    d1 = -k0 * sn / r - cs / r**2
    d2 = -(k0**2) * cs / r + 2 * k0 * sn / r**2 + 2 * cs / r**3
    return (c2 - 1.0) * d2 - (1.0 + c2) * d1 / r


def _detuning(cfg: AtomPairConfig, bands: BandStructure, regularized: bool) -> float:
    detuning = cfg.omega_i - bands.omega_c
    if regularized:
        if detuning < 0:
            raise DomainError(
                f"the regularised form needs omega_i >= omega_c (got detuning {detuning!r})"
            )
        if detuning == 0 and not cfg.gamma > 0:
            raise SingularityError("at omega_i = omega_c the regularised form needs gamma > 0")
        return abs(detuning) + cfg.gamma
    if detuning == 0:
        raise SingularityError(
            "the force diverges at omega_i = omega_c; use the regularised form with gamma > 0"
        )
    if detuning < 0:
        raise DomainError(
            f"omega_i must lie above omega_c (got detuning {detuning!r}); "
            "the below-edge branch is not modelled"
        )
    return detuning


def _check_dims(cfg, expected):
    if cfg.dimensionality != expected:
        raise DomainError(f"expected a {expected}D configuration (got {cfg.dimensionality}D)")


def _warn_short(kr, what):
    if kr < FAR_ZONE_MIN:
        warnings.warn(
            f"{what} = {kr:.3g} is below {FAR_ZONE_MIN:g}; far-zone forms are unreliable",
            FarZoneWarning,
            stacklevel=3,
        )


def _edge_strength(cfg, bands, regularized):
    """``omega_c / (2 sqrt(A * detuning))``, the van Hove enhancement factor."""
    return bands.omega_c / (2.0 * math.sqrt(bands.curvature * _detuning(cfg, bands, regularized)))


def energy_shift_3d(cfg: AtomPairConfig, bands: BandStructure, regularized=False) -> float:
    """Distance-dependent energy shift in the isotropic crystal (rad/s).

    ``omega_c k0 / (2 sqrt(A d)) * dipole_sq * (c^2 - 1) * cos(k0 r) / r``
    with ``d = omega_i - omega_c`` (or ``|d| + gamma`` when regularised).
    """
    _check_dims(cfg, 3)
    r = cfg.separation
    _warn_short(bands.k0 * r, "k0 * r")
    c = cfg.alignment
    return _edge_strength(cfg, bands, regularized) * bands.k0 * cfg.dipole_sq * (c * c - 1.0) * math.cos(bands.k0 * r) / r


def force_3d(cfg: AtomPairConfig, bands: BandStructure, regularized=False) -> float:
    """Quasi-static force ``-d(energy)/dr`` in the far zone (rad/s per m).

    Only the oscillating factor is differentiated, which drops a term smaller
    by ``1/(k0 r)``.
    """
    _check_dims(cfg, 3)
    r = cfg.separation
    _warn_short(bands.k0 * r, "k0 * r")
    c = cfg.alignment
    return _edge_strength(cfg, bands, regularized) * bands.k0**2 * cfg.dipole_sq * (c * c - 1.0) * math.sin(bands.k0 * r) / r


def energy_shift_1d(cfg: AtomPairConfig, bands: BandStructure, regularized=False) -> float:
    """Distance-dependent energy shift in the 1D crystal (rad/s)."""
    _check_dims(cfg, 1)
    x = cfg.separation
    _warn_short(bands.k0 * x, "k0 * x")
    return 2.0 * math.pi * _edge_strength(cfg, bands, regularized) * cfg.transverse_coupling * math.sin(bands.k0 * x)


def force_1d(cfg: AtomPairConfig, bands: BandStructure, regularized=False) -> float:
    """Quasi-static force in the 1D crystal (rad/s per m)."""
    _check_dims(cfg, 1)
    x = cfg.separation
    _warn_short(bands.k0 * x, "k0 * x")
    return -2.0 * math.pi * _edge_strength(cfg, bands, regularized) * bands.k0 * cfg.transverse_coupling * math.cos(bands.k0 * x)


def energy_shift(cfg: AtomPairConfig, bands: BandStructure, regularized=False) -> float:
    fn = energy_shift_3d if cfg.dimensionality == 3 else energy_shift_1d
    return fn(cfg, bands, regularized)


def force(cfg: AtomPairConfig, bands: BandStructure, regularized=False) -> float:
    fn = force_3d if cfg.dimensionality == 3 else force_1d
    return fn(cfg, bands, regularized)


def vacuum_wavenumber(omega_i: float) -> float:
    return omega_i / SPEED_OF_LIGHT


def vacuum_energy_shift(cfg: AtomPairConfig) -> float:
    """Far-zone resonant energy shift in free space (rad/s)."""
    k = vacuum_wavenumber(cfg.omega_i)
    d = cfg.separation
    _warn_short(k * d, "(omega_i/c) * separation")
    if cfg.dimensionality == 3:
        c = cfg.alignment
        return k**2 * cfg.dipole_sq * (c * c - 1.0) * math.cos(k * d) / d
    return 2.0 * math.pi * cfg.transverse_coupling * k * math.sin(k * d)


def vacuum_force(cfg: AtomPairConfig) -> float:
    """Far-zone resonant force in free space (rad/s per m)."""
    k = vacuum_wavenumber(cfg.omega_i)
    d = cfg.separation
    _warn_short(k * d, "(omega_i/c) * separation")
    if cfg.dimensionality == 3:
        c = cfg.alignment
        return k**3 * cfg.dipole_sq * (c * c - 1.0) * math.sin(k * d) / d
    return -2.0 * math.pi * cfg.transverse_coupling * k**2 * math.cos(k * d)


def enhancement_ratio(cfg: AtomPairConfig, bands: BandStructure, dimensionality=None) -> float:
    """Peak crystal-to-vacuum force ratio at the band edge.

    3D: ``[omega_c k0^2 / (2 sqrt(A gamma))] / (omega_i/c)^3``;
    1D: ``[omega_c k0 / sqrt(A gamma)] / (omega_i/c)^2``.
    """
    dims = cfg.dimensionality if dimensionality is None else dimensionality
    if not cfg.gamma > 0:
        raise SingularityError("the enhancement ratio diverges for gamma = 0")
    k = vacuum_wavenumber(cfg.omega_i)
    root = math.sqrt(bands.curvature * cfg.gamma)
    if dims == 3:
        return bands.omega_c * bands.k0**2 / (2.0 * root) / k**3
    if dims == 1:
        return bands.omega_c * bands.k0 / root / k**2
    raise DomainError(f"dimensionality must be 1 or 3 (got {dims!r})")


def inferred_linewidth_1d(bands: BandStructure, omega_i: float, target_ratio=10.0) -> float:
    """Linewidth for which the 1D enhancement ratio equals ``target_ratio``.

    This is a back-solved value, not a computed decay rate.
    """
    if not target_ratio > 0:
        raise DomainError("target_ratio must be positive")
    k = vacuum_wavenumber(omega_i)
    return (bands.omega_c * bands.k0 / (target_ratio * k**2)) ** 2 / bands.curvature


@dataclass(frozen=True)
class ForceResult:
    energy_shift: float
    force: float
    vacuum_force: float
    enhancement_ratio: float
    far_zone_ok: bool
    edge_proximity: float


def evaluate(cfg: AtomPairConfig, bands: BandStructure, regularized=False) -> ForceResult:
    """Energy shift, force and vacuum baseline for one configuration.

    ``enhancement_ratio`` here is the pointwise ``|force / vacuum_force|``
    (NaN where the vacuum force vanishes); ``edge_proximity`` is
    ``(omega_i - omega_c) / gamma``.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FarZoneWarning)
        shift = energy_shift(cfg, bands, regularized)
        f = force(cfg, bands, regularized)
        fv = vacuum_force(cfg)
    ratio = abs(f / fv) if fv != 0 else math.nan
    detuning = cfg.omega_i - bands.omega_c
    proximity = detuning / cfg.gamma if cfg.gamma > 0 else math.copysign(math.inf, detuning)
    return ForceResult(shift, f, fv, ratio, bands.k0 * cfg.separation >= FAR_ZONE_MIN, proximity)
