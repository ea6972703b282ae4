"""Physical constants and conversions at the I/O boundary.

Inside the package energies are carried as angular frequencies (E/hbar, in
rad/s) and couplings in reduced units, so hbar never appears in a kernel.
"""

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact
HBAR_CGS = 1.054571817e-27  # erg s
DEBYE_CGS = 1e-18  # statC cm


def coupling_from_debye(debye: float) -> float:
    """``|mu|^2 / hbar`` in m^3/s for a transition dipole given in debye.

    This is the reduced coupling ``dipole_sq`` that makes the 3D energy shift
    come out in rad/s (Gaussian units, converted from cm^3 to m^3).
    """
    mu = debye * DEBYE_CGS
    return mu * mu / HBAR_CGS * 1e-6
