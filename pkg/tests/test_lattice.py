import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticeinv.errors import IncompatibleSpec, InvalidCoordinate, TooLarge
from latticeinv.lattice import (
    Displacement,
    LatticeShape,
    Parity,
    ParitySpec,
    Sector,
    SpinBasis,
    TwoParticleBasis,
    hopping_parity,
    index_site,
    manhattan,
    max_basis_size,
    parity_vector,
    site_index,
)

extents = st.lists(st.integers(1, 6), min_size=1, max_size=3).map(tuple)


@pytest.mark.parametrize("shape, coords, expected", [
    ((4,), (0,), 0),
    ((3, 3), (2, 2), 8),
    ((3, 3), (1, 2), 5),
])
def test_site_index_examples(shape, coords, expected):
    assert site_index(LatticeShape(shape), coords) == expected


def test_site_index_matches_row_major_enumeration():
    shape = LatticeShape((3, 4, 2))
    for n, c in enumerate(itertools.product(range(3), range(4), range(2))):
        assert site_index(shape, c) == n
        assert index_site(shape, n) == c


@pytest.mark.parametrize("coords", [(3,), (-1,), (0, 0)])
def test_site_index_rejects_bad_coordinates(coords):
    with pytest.raises(InvalidCoordinate):
        site_index(LatticeShape((3,)), coords)


def test_index_site_out_of_range():
    with pytest.raises(InvalidCoordinate):
        index_site(LatticeShape((2, 2)), 4)


@given(extents)
def test_site_index_is_a_bijection(ext):
    shape = LatticeShape(ext)
    seen = {site_index(shape, index_site(shape, n)) for n in range(shape.size)}
    assert seen == set(range(shape.size))


@pytest.mark.parametrize("d, expected", [((2, 0), 2), ((1, 2), 3), ((0, 0), 0), ((-3, 1), 4)])
def test_manhattan(d, expected):
    assert manhattan(Displacement(d)) == expected


@pytest.mark.parametrize("d, spec, expected", [
    ((1, 2), ParitySpec.all_dimensions(), Parity.ODD),
    ((1, 2), ParitySpec.subset([0]), Parity.ODD),
    ((2, 1), ParitySpec.subset([0]), Parity.EVEN),
    ((0, 0), ParitySpec.all_dimensions(), Parity.EVEN),
    ((0, 0), ParitySpec.subset([1]), Parity.EVEN),
    ((2, 0), ParitySpec.all_dimensions(), Parity.EVEN),
])
def test_hopping_parity(d, spec, expected):
    assert hopping_parity(Displacement(d), spec) is expected


def test_subset_out_of_range_dimension():
    with pytest.raises(IncompatibleSpec):
        hopping_parity(Displacement((1, 0)), ParitySpec.subset([2]))


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=3))
def test_parity_is_symmetric_under_reversal(offsets):
    d = Displacement(tuple(offsets))
    assert hopping_parity(d) is hopping_parity(-d)


def test_parity_vector_chain():
    np.testing.assert_array_equal(parity_vector(LatticeShape((4,))), [1, -1, 1, -1])


def test_parity_vector_subset_depends_on_x_only():
    np.testing.assert_array_equal(parity_vector(LatticeShape((2, 2)), ParitySpec.subset([0])), [1, 1, -1, -1])


def test_parity_vector_two_particles():
    basis = TwoParticleBasis(LatticeShape((3,)), Sector.DISTINGUISHABLE)
    signs = parity_vector(basis)
    assert signs[basis.index(0, 1)] == -1
    for i, j in basis.pairs:
        assert signs[basis.index(i, j)] == (-1) ** (i + j)


def test_parity_vector_spin_z():
    np.testing.assert_array_equal(parity_vector(SpinBasis(2), ParitySpec.spin_z()), [1, -1, -1, 1])


@pytest.mark.parametrize("spec", [ParitySpec.spin_z(), ParitySpec.spin_x_pair()])
def test_spin_parity_on_spatial_lattice_rejected(spec):
    with pytest.raises(IncompatibleSpec):
        parity_vector(LatticeShape((4,)), spec)


@given(extents)
def test_origin_is_even_and_neighbours_alternate(ext):
    shape = LatticeShape(ext)
    signs = parity_vector(shape)
    assert signs[0] == 1
    coords = shape.coords
    for dim in range(shape.ndim):
        step = np.zeros(shape.ndim, dtype=int)
        step[dim] = 1
        for n, c in enumerate(coords):
            nb = c + step
            if nb[dim] < ext[dim]:
                assert signs[site_index(shape, nb)] == -signs[n]


@pytest.mark.parametrize("L, sector, size", [
    (81, Sector.ANTISYMMETRIC, 3240),
    (81, Sector.DISTINGUISHABLE, 6561),
    (5, Sector.SYMMETRIC, 15),
])
def test_two_particle_basis_sizes(L, sector, size):
    assert TwoParticleBasis(LatticeShape((L,)), sector).size == size


def test_antisymmetric_basis_has_no_double_occupancy():
    basis = TwoParticleBasis(LatticeShape((6,)), Sector.ANTISYMMETRIC)
    assert np.all(basis.relative_distance >= 1)


@pytest.mark.parametrize("sector", list(Sector))
def test_isometry_columns_are_orthonormal(sector):
    basis = TwoParticleBasis(LatticeShape((4,)), sector)
    p = basis.isometry().toarray()
    np.testing.assert_allclose(p.T @ p, np.eye(basis.size), atol=1e-15)


def test_env_ceiling(monkeypatch):
    monkeypatch.setenv("LATTICEINV_MAX_DIM", "10")
    assert max_basis_size() == 10
    with pytest.raises(TooLarge):
        LatticeShape((11,))
    LatticeShape((10,))


@settings(max_examples=30)
@given(st.integers(1, 8))
def test_spin_basis_index_roundtrip(n):
    basis = SpinBasis(n)
    for k in range(basis.size):
        assert basis.index(basis.bits[k]) == k
