"""Distance-dependent pole integrals and the implicit pole equations.

Energies are angular frequencies throughout. With ``zeta`` the trial pole
(rad/s), ``delta = zeta - omega_c`` and ``q = sqrt(delta / A)`` the resonant
offset above the edge wavenumber, the two integrals are

    3D:  I(zeta, r) = PV int_0^inf (omega_c + A u^2) / (delta - A u^2)
                          * sin((u + k0) r) / ((u + k0) r) du
    1D:  I(zeta, x) = PV int_0^inf (omega_c + A u^2) / (delta - A u^2)
                          * cos((u + k0) x) du

The 1D integrand does not decay; its tail is taken in the Abel sense
(``exp(-eps u)`` regularisation, ``eps -> 0``).

Closed forms follow from the split

    (omega_c + A u^2) / (delta - A u^2) = -1 + (omega_c + delta) / (A (q^2 - u^2))

and partial fractions in ``u``; every remaining piece is a sine or cosine
integral.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .band_structure import BandStructure
from .errors import ConvergenceError, DomainError, FarZoneWarning
from .quadrature import PVProblem, QuadResult, pv_quadrature
from .special_functions import (
    cosine_integral,
    shifted_sine_integral,
    sine_cosine_integrals,
)
from .units import coupling_from_debye

METHODS_3D = ("closed", "quadrature", "near_edge", "far_zone")
METHODS_1D = ("closed", "quadrature", "near_edge", "far_zone")
POLE_MODES = ("first_iteration", "fixed_point")

FAR_ZONE_MIN = 10.0
# below this |q - k0| / k0 the partial fractions of the 3D closed form cancel
_COINCIDENT_POLES = 1e-6


def _unit(v, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise DomainError(f"{name} must be a 3-vector")
    norm = float(np.linalg.norm(v))
    if not math.isclose(norm, 1.0, rel_tol=0, abs_tol=1e-9):
        raise DomainError(f"{name} must have unit norm (got |{name}| = {norm!r})")
    return v


@dataclass(frozen=True)
class AtomPairConfig:
    """Two identical two-level atoms sharing one excitation.

    Parameters
    ----------
    omega_i : float
        Atomic transition frequency (rad/s).
    separation : float
        Interatomic distance (m): ``r`` in 3D, ``x`` along the crystal in 1D.
    gamma : float
        Linewidth of the symmetric state (rad/s), used by the regularised
        force and the enhancement ratios.
    dipole_sq : float
        ``|mu|^2 / hbar`` (3D) or ``|p|^2 / hbar`` (1D) in reduced units that
        make the energy shift come out in rad/s. Defaults to a 1 debye
        transition dipole.
    dipole : 3-vector
        Unit vector of the transition dipole.
    axis : 3-vector
        Unit vector joining the atoms (3D) or the crystal direction (1D).
    dimensionality : int
        1 or 3.
    """

    omega_i: float
    separation: float
    gamma: float = 0.0
    dipole_sq: float = coupling_from_debye(1.0)
    dipole: tuple = (0.0, 0.0, 1.0)
    axis: tuple = (1.0, 0.0, 0.0)
    dimensionality: int = 3

    def __post_init__(self):
        if not self.omega_i > 0:
            raise DomainError(f"omega_i must be positive (got {self.omega_i!r})")
        if not self.separation > 0:
            raise DomainError(f"separation must be positive (got {self.separation!r})")
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be non-negative (got {self.gamma!r})")
        if not self.dipole_sq >= 0:
            raise DomainError(f"dipole_sq must be non-negative (got {self.dipole_sq!r})")
        if self.dimensionality not in (1, 3):
            raise DomainError(f"dimensionality must be 1 or 3 (got {self.dimensionality!r})")
        object.__setattr__(self, "dipole", tuple(float(c) for c in _unit(self.dipole, "dipole")))
        object.__setattr__(self, "axis", tuple(float(c) for c in _unit(self.axis, "axis")))

    @property
    def alignment(self) -> float:
        """Cosine between the dipole and the axis."""
        return float(np.dot(self.dipole, self.axis))

    @property
    def transverse_coupling(self) -> float:
        """``|p|^2 - |p_x|^2``: the part of the coupling seen by 1D modes."""
        c = self.alignment
        return self.dipole_sq * (1.0 - c * c)

    def replace(self, **changes) -> "AtomPairConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class PoleSolution:
    """Solved pole of the resolvent with its iteration history.

    ``frequency`` is the pole (rad/s) and ``shift`` its offset from the
    unperturbed level, carried separately so that small shifts keep full
    relative precision. ``trace`` lists the successive shifts.
    """

    frequency: float
    shift: float
    mode: str
    iterations: int
    converged: bool
    residual: float
    trace: tuple = field(default=(), repr=False)


def _resonance(zeta, bands: BandStructure):
    delta = zeta - bands.omega_c
    if not delta > 0:
        raise DomainError(
            f"the pole must lie above the upper band edge (zeta - omega_c = {delta!r}); "
            "the below-edge branch is not modelled"
        )
    return delta, math.sqrt(delta / bands.curvature)


def _check_separation(r):
    if not r > 0:
        raise DomainError(f"separation must be positive (got {r!r})")


def _warn_far_zone(k0r):
    if k0r < FAR_ZONE_MIN:
        warnings.warn(
            f"k0 * separation = {k0r:.3g} is below {FAR_ZONE_MIN:g}; "
            "the far-zone form is unreliable here",
            FarZoneWarning,
            stacklevel=3,
        )


# The resonant denominator is written as A (q - u)(q + u) rather than
# delta - A u^2 so that it vanishes exactly at the floating-point pole q; the
# symmetric fold of the quadrature relies on that.


def _integrand_3d(zeta, r, bands):
    _, q = _resonance(zeta, bands)
    wc, k0, a = bands.omega_c, bands.k0, bands.curvature

    def f(u):
        k = u + k0
        return (wc + a * u * u) / (a * (q - u) * (q + u)) * np.sin(k * r) / (k * r)

    return f


def _integrand_1d(zeta, x, bands):
    _, q = _resonance(zeta, bands)
    wc, k0, a = bands.omega_c, bands.k0, bands.curvature

    def f(u):
        return (wc + a * u * u) / (a * (q - u) * (q + u)) * np.cos((u + k0) * x)

    return f


def pole_integral_3d_quadrature(zeta, r, bands: BandStructure, rel_tol=1e-10) -> QuadResult:
    """3D pole integral by principal-value quadrature, with error estimate."""
    _check_separation(r)
    _, q = _resonance(zeta, bands)
    return pv_quadrature(
        PVProblem(_integrand_3d(zeta, r, bands), 0.0, pole=q, half_period=math.pi / r, rel_tol=rel_tol)
    )


def pole_integral_1d_quadrature(zeta, x, bands: BandStructure, rel_tol=1e-10) -> QuadResult:
    """1D pole integral by principal-value quadrature (Abel-summed tail)."""
    _check_separation(x)
    _, q = _resonance(zeta, bands)
    return pv_quadrature(
        PVProblem(_integrand_1d(zeta, x, bands), 0.0, pole=q, half_period=math.pi / x, rel_tol=rel_tol)
    )


def _closed_3d(zeta, r, bands):
    delta, q = _resonance(zeta, bands)
    wc, k0, a = bands.omega_c, bands.k0, bands.curvature
    if abs(q - k0) < _COINCIDENT_POLES * k0:
        return pole_integral_3d_quadrature(zeta, r, bands).value
    si_k0 = shifted_sine_integral(k0 * r)
    si_q = shifted_sine_integral(q * r)
    ci_q = cosine_integral(q * r)
    # 1/((q^2-u^2)(u+k0)) = c_k0/(u+k0) + c_plus/(u+q) + c_minus/(q-u)
    c_k0 = 1.0 / (q * q - k0 * k0)
    c_plus = 1.0 / (2 * q * (q + k0))
    c_minus = 1.0 / (2 * q * (k0 - q))
    psi = (k0 + q) * r
    phi = (k0 - q) * r
    # int_0^inf sin((u+k0) r) / (u + c) du in each partial fraction, PV for the last
    j_k0 = -si_k0
    j_plus = -(math.cos(psi) * (si_q + math.pi) - math.sin(psi) * ci_q)
    j_minus = -math.cos(phi) * si_q - math.sin(phi) * ci_q
    resonant = (wc + delta) / a * (c_k0 * j_k0 + c_plus * j_plus + c_minus * j_minus)
    return (si_k0 + resonant) / r


def _closed_1d(zeta, x, bands):
    delta, q = _resonance(zeta, bands)
    wc, k0, a = bands.omega_c, bands.k0, bands.curvature
    b = q * x
    s_b, c_b = sine_cosine_integrals(b)
    sk, ck = math.sin(k0 * x), math.cos(k0 * x)
    # -int_0^inf cos((u+k0) x) du = sin(k0 x)/x in the Abel sense
    background = sk / x
    even = math.pi * math.sin(b) / (2 * q)
    odd = (math.sin(b) * c_b - math.cos(b) * s_b) / q
    return background + (wc + delta) / a * (ck * even - sk * odd)


def _near_edge_3d(zeta, r, bands):
    delta, _ = _resonance(zeta, bands)
    k0r = bands.k0 * r
    _warn_far_zone(k0r)
    return -math.pi * bands.omega_c / (2 * math.sqrt(bands.curvature * delta)) * math.cos(k0r) / k0r


def _near_edge_1d(zeta, x, bands):
    delta, _ = _resonance(zeta, bands)
    _warn_far_zone(bands.k0 * x)
    return math.pi * bands.omega_c / (2 * math.sqrt(bands.curvature * delta)) * math.sin(bands.k0 * x)


def _far_zone_3d(zeta, r, bands):
    delta, q = _resonance(zeta, bands)
    k0 = bands.k0
    _warn_far_zone(q * r)
    amp = math.pi * (bands.omega_c + delta) / (2 * r * bands.curvature * q * (q + k0))
    return -amp * math.cos((k0 + q) * r)


def _far_zone_1d(zeta, x, bands):
    delta, q = _resonance(zeta, bands)
    _warn_far_zone(q * x)
    amp = math.pi * (bands.omega_c + delta) / (2 * bands.curvature * q)
    return amp * math.sin((bands.k0 + q) * x)


_DISPATCH_3D: dict[str, Callable] = {
    "closed": _closed_3d,
    "quadrature": lambda z, r, b: pole_integral_3d_quadrature(z, r, b).value,
    "near_edge": _near_edge_3d,
    "far_zone": _far_zone_3d,
}
_DISPATCH_1D: dict[str, Callable] = {
    "closed": _closed_1d,
    "quadrature": lambda z, x, b: pole_integral_1d_quadrature(z, x, b).value,
    "near_edge": _near_edge_1d,
    "far_zone": _far_zone_1d,
}


def pole_integral_3d(zeta, r, bands: BandStructure, method="closed") -> float:
    """Distance-dependent integral of the 3D pole equation (1/m).

    Parameters
    ----------
    zeta : float
        Trial pole frequency (rad/s); must exceed ``omega_c``.
    r : float
        Separation (m).
    bands : BandStructure
    method : {"closed", "quadrature", "near_edge", "far_zone"}
        ``closed`` is exact; ``quadrature`` is the principal-value oracle;
        ``far_zone`` is the ``q r >> 1`` asymptote of the exact result;
        ``near_edge`` keeps only the leading ``1/sqrt(delta)`` term with the
        phase frozen at ``k0 r``.
    """
    if method not in _DISPATCH_3D:
        raise DomainError(f"unknown method {method!r}; choose from {METHODS_3D}")
    _check_separation(r)
    return float(_DISPATCH_3D[method](zeta, r, bands))


def pole_integral_1d(zeta, x, bands: BandStructure, method="closed") -> float:
    """Distance-dependent integral of the 1D pole equation (rad/s per rad/m).

    Same methods as :func:`pole_integral_3d`.
    """
    if method not in _DISPATCH_1D:
        raise DomainError(f"unknown method {method!r}; choose from {METHODS_1D}")
    _check_separation(x)
    return float(_DISPATCH_1D[method](zeta, x, bands))


def radial_tensor(d1, d2, r, alignment):
    """Contract ``mu_m mu_n (-lap delta_mn + grad_m grad_n)`` on a radial field.

    ``d1`` and ``d2`` are the first and second radial derivatives at ``r``;
    ``alignment`` is the cosine between the dipole and the separation.
    """
    c2 = alignment * alignment
    return (c2 - 1.0) * d2 - (1.0 + c2) * d1 / r


def _radial_derivatives(g, r, h):
    # five-point central stencils
    fm2, fm1, f0, fp1, fp2 = (g(r + j * h) for j in (-2, -1, 0, 1, 2))
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
    return f0, d1, d2


def interaction_rhs(zeta, cfg: AtomPairConfig, bands: BandStructure, integral="near_edge") -> float:
    """Distance-dependent right-hand side of the pole equation minus ``omega_i``.

    With ``integral="near_edge"`` the 3D tensor is applied in its far-zone form,
    ``-k0^2 ((mu.r)^2 - 1)`` acting on ``cos(k0 r)/r``; the other integrals are
    differentiated numerically in ``r``.
    """
    r = cfg.separation
    if cfg.dimensionality == 1:
        return 2.0 * cfg.transverse_coupling * pole_integral_1d(zeta, r, bands, integral)
    c = cfg.alignment
    if integral == "near_edge":
        value = pole_integral_3d(zeta, r, bands, "near_edge")
        # near_edge is proportional to cos(k0 r)/r
        tensor = -bands.k0**2 * (c * c - 1.0) * value
    else:
        h = 0.05 / bands.k0
        if r - 2 * h <= 0:
            raise DomainError("separation too small for the radial derivative stencil")
        _, d1, d2 = _radial_derivatives(lambda s: pole_integral_3d(zeta, s, bands, integral), r, h)
        tensor = radial_tensor(d1, d2, r, c)
    return cfg.dipole_sq / math.pi * tensor


def solve_pole(
    cfg: AtomPairConfig,
    bands: BandStructure,
    mode="first_iteration",
    tol=None,
    integral="near_edge",
    damping=0.5,
    max_iter=100,
) -> PoleSolution:
    """Solve ``zeta = omega_i + rhs(zeta)`` for the pole of the resolvent.

    ``first_iteration`` evaluates the right-hand side once at ``omega_i``.
    ``fixed_point`` iterates ``zeta <- (1 - damping) zeta + damping (omega_i +
    rhs(zeta))`` until successive iterates differ by at most ``tol`` (rad/s,
    default ``1e-13 * omega_i``). Distance-independent shifts are left out.
    """
    if not cfg.omega_i > bands.omega_c:
        raise DomainError(
            f"omega_i must lie above omega_c (got {cfg.omega_i!r} <= {bands.omega_c!r})"
        )
    return iterate_pole(
        lambda z: interaction_rhs(z, cfg, bands, integral),
        cfg.omega_i,
        mode,
        tol if tol is not None else 1e-13 * cfg.omega_i,
        damping,
        max_iter,
        lower=bands.omega_c,
    )


def iterate_pole(shift_of, level, mode, tol, damping=0.5, max_iter=100, lower=None) -> PoleSolution:
    """Shared first-iteration / damped fixed-point driver.

    Solves ``z = level + shift_of(z)``. The iteration runs on the offset
    ``z - level`` so that shifts far below ``level`` are not rounded away.
    ``lower`` (if given) is a bound the pole must stay above.
    """
    if mode not in POLE_MODES:
        raise DomainError(f"mode must be one of {POLE_MODES} (got {mode!r})")
    if not 0 < damping <= 1:
        raise DomainError(f"damping must lie in (0, 1] (got {damping!r})")
    if not tol > 0:
        raise DomainError(f"tol must be positive (got {tol!r})")
    if mode == "first_iteration":
        s = float(shift_of(level))
        return PoleSolution(level + s, s, mode, 1, True, 0.0, (0.0, s))
    trace = [0.0]
    s = 0.0
    step = math.inf
    for it in range(1, max_iter + 1):
        try:
            target = shift_of(level + s)
        except DomainError as exc:
            raise ConvergenceError(
                f"fixed-point iteration left the domain at step {it}: {exc}",
                estimate=level + s,
                trace=trace,
            ) from exc
        new = (1 - damping) * s + damping * target
        if not math.isfinite(new):
            raise ConvergenceError("fixed-point iterate is not finite", estimate=level + s, trace=trace)
        step = abs(new - s)
        trace.append(float(new))
        s = new
        if lower is not None and not level + s > lower:
            raise ConvergenceError(
                f"fixed-point iterate fell to {level + s!r}, below the band edge {lower!r}",
                estimate=level + s,
                trace=trace,
            )
        if step <= tol:
            return PoleSolution(level + s, s, mode, it, True, float(step), tuple(trace))
    raise ConvergenceError(
        f"fixed-point iteration did not converge in {max_iter} steps (last step {step:.3g})",
        estimate=level + s,
        error=step,
        trace=trace,
    )
