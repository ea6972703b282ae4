import pytest

from bandgap_resonance.band_structure import BandStructure, CrystalSpec


@pytest.fixture
def edge_bands():
    """Round-number band edge used for the enhancement estimates."""
    return BandStructure(omega_v=0.9e15, omega_c=1e15, k0=1e7, curvature=1e2)


@pytest.fixture
def slab_crystal():
    return CrystalSpec(refractive_index=2.0, slab_half_width=1e-7)
