import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from latticeinv.errors import (
    DimensionMismatch,
    IncompatibleBasis,
    InvalidInput,
    InvalidTerm,
    NotHermitian,
    TooLarge,
)
from latticeinv.lattice import (
    Displacement,
    LatticeShape,
    ParitySpec,
    Sector,
    SpinBasis,
    TwoParticleBasis,
)
from latticeinv.operators import (
    CoulombSpec,
    HermitianOperator,
    HoppingTerm,
    TfimSpec,
    build_parity_operator,
    build_single_particle,
    build_tfim,
    build_two_particle_coulomb,
    conjugate_by_parity,
    exchange_operator,
    invert_even_terms,
    invert_odd_hoppings,
    invert_potential,
    nearest_neighbor_hamiltonian,
    read_triplets,
    split_by_parity,
    write_triplets,
)
from latticeinv.oracles import dense_chain, open_chain_spectrum, tfim_kron, x_basis_rotation


def eig(op):
    return np.linalg.eigvalsh(op.toarray())


def test_chain_of_three():
    np.testing.assert_allclose(eig(nearest_neighbor_hamiltonian(LatticeShape((3,)))), [-np.sqrt(2), 0, np.sqrt(2)],
                               atol=1e-12)


def test_single_site_is_the_potential():
    h = nearest_neighbor_hamiltonian(LatticeShape((1,)), potential=[3.5])
    np.testing.assert_array_equal(h.toarray(), [[3.5]])


def test_constant_potential_shifts_spectrum():
    shape = LatticeShape((4,))
    e0 = eig(nearest_neighbor_hamiltonian(shape))
    np.testing.assert_allclose(eig(nearest_neighbor_hamiltonian(shape, potential=np.full(4, 1.7))), e0 + 1.7,
                               atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 30), st.floats(0.1, 3.0))
def test_chain_matches_dense_oracle(L, g):
    rng = np.random.default_rng(L)
    v = rng.uniform(-5, 5, L)
    h = nearest_neighbor_hamiltonian(LatticeShape((L,)), g, v)
    np.testing.assert_allclose(h.toarray(), dense_chain(L, g, v), atol=0)
    if L > 1:
        np.testing.assert_allclose(eig(nearest_neighbor_hamiltonian(LatticeShape((L,)), g)),
                                   open_chain_spectrum(L, g), atol=1e-12)


def test_hopping_sign_convention():
    h = build_single_particle(LatticeShape((3,)), [HoppingTerm(Displacement((1,)), 0.5 + 0.25j)])
    m = h.toarray()
    assert m[0, 1] == 0.5 + 0.25j
    assert m[1, 0] == 0.5 - 0.25j
    assert m[0, 2] == 0


def test_two_dimensional_hops_stay_inside():
    shape = LatticeShape((3, 4))
    h = build_single_particle(shape, [HoppingTerm(Displacement((1, 2)), 1.0)]).toarray()
    for a, ca in enumerate(shape.coords):
        for b, cb in enumerate(shape.coords):
            step = tuple(cb - ca)
            assert h[a, b] == (1.0 if step in ((1, 2), (-1, -2)) else 0.0)


@pytest.mark.parametrize("offsets, amp", [((0,), 1.0), ((1,), np.inf), ((1,), np.nan)])
def test_invalid_terms(offsets, amp):
    with pytest.raises(InvalidTerm):
        HoppingTerm(Displacement(offsets), amp)


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitian):
        HermitianOperator(sp.csr_array(np.array([[0.0, 1.0], [0.0, 0.0]])))


def test_non_square_rejected():
    with pytest.raises(DimensionMismatch):
        HermitianOperator(sp.csr_array(np.zeros((2, 3))))


def test_potential_length_checked():
    with pytest.raises(InvalidInput):
        nearest_neighbor_hamiltonian(LatticeShape((3,)), potential=[1.0, 2.0])


# --- two particles ------------------------------------------------------------------------


def test_coulomb_diagonal_entry():
    spec = CoulombSpec(L=20, v=2.0, sector=Sector.DISTINGUISHABLE)
    h = build_two_particle_coulomb(spec)
    b = spec.basis()
    k = b.index(10, 12)
    assert h.toarray()[k, k] == pytest.approx(1.0, abs=1e-15)


def test_antisymmetric_size():
    assert build_two_particle_coulomb(CoulombSpec(L=81)).dim == 3240


def test_two_free_particles_on_two_sites():
    # Distinguishable, v = 0: spectrum is the sum of two {-1, 1} spectra.
    h = build_two_particle_coulomb(CoulombSpec(L=2, v=0.0, sector=Sector.DISTINGUISHABLE))
    np.testing.assert_allclose(eig(h), [-2, 0, 0, 2], atol=1e-12)


@pytest.mark.parametrize("sector", [Sector.ANTISYMMETRIC, Sector.SYMMETRIC])
def test_sector_spectra_are_free_fermion_and_boson_sums(sector):
    L = 6
    e1 = open_chain_spectrum(L)
    i, j = np.triu_indices(L, k=1 if sector is Sector.ANTISYMMETRIC else 0)
    expected = np.sort(e1[i] + e1[j])
    h = build_two_particle_coulomb(CoulombSpec(L=L, v=0.0, sector=sector))
    np.testing.assert_allclose(eig(h), expected, atol=1e-12)


def test_exchange_commutes_with_coulomb():
    spec = CoulombSpec(L=5, D=2, v=1.3, sector=Sector.DISTINGUISHABLE)
    h = build_two_particle_coulomb(spec).matrix
    p = exchange_operator(spec.basis())
    assert abs(p @ h - h @ p).max() < 1e-14


def test_exchange_needs_distinguishable_basis():
    with pytest.raises(IncompatibleBasis):
        exchange_operator(TwoParticleBasis(LatticeShape((3,)), Sector.ANTISYMMETRIC))


def test_sector_restriction_agrees_with_grid_eigenvalues():
    spec = CoulombSpec(L=7, v=2.0, sector=Sector.DISTINGUISHABLE)
    full = eig(build_two_particle_coulomb(spec))
    anti = eig(build_two_particle_coulomb(CoulombSpec(L=7, v=2.0, sector=Sector.ANTISYMMETRIC)))
    sym = eig(build_two_particle_coulomb(CoulombSpec(L=7, v=2.0, sector=Sector.SYMMETRIC)))
    np.testing.assert_allclose(np.sort(np.concatenate([anti, sym])), full, atol=1e-12)


def test_coulomb_ceiling(monkeypatch):
    monkeypatch.setenv("LATTICEINV_MAX_DIM", "100")
    with pytest.raises(TooLarge):
        build_two_particle_coulomb(CoulombSpec(L=11))


# --- TFIM ---------------------------------------------------------------------------------


@pytest.mark.parametrize("spec, expected", [
    (TfimSpec(2, 1.0, 0.0), [-1, -1, 1, 1]),
    (TfimSpec(1, 0.0, 1.0), [-1, 1]),
])
def test_tfim_small_spectra(spec, expected):
    np.testing.assert_allclose(eig(build_tfim(spec)), expected, atol=1e-12)


@pytest.mark.parametrize("n, J, h", [(3, 1.0, 0.5), (4, -0.7, 1.3), (5, 2.0, -0.4)])
def test_tfim_matches_kron_oracle(n, J, h):
    np.testing.assert_allclose(build_tfim(TfimSpec(n, J, h)).toarray(), tfim_kron(n, J, h), atol=1e-12)


@pytest.mark.parametrize("n, J, h", [(3, 1.0, 0.5), (4, -0.7, 1.3)])
def test_tfim_x_basis_is_a_rotation(n, J, h):
    u = x_basis_rotation(n)
    np.testing.assert_allclose(build_tfim(TfimSpec(n, J, h), axis="x").toarray(), u.T @ tfim_kron(n, J, h) @ u,
                               atol=1e-12)


@pytest.mark.parametrize("n", [0, 15])
def test_tfim_size_limits(n):
    with pytest.raises(TooLarge):
        TfimSpec(n)


# --- parity operators ---------------------------------------------------------------------


def test_parity_operator_chain():
    np.testing.assert_array_equal(build_parity_operator(LatticeShape((3,))).as_operator().toarray(),
                                  np.diag([1.0, -1.0, 1.0]))


def test_parity_operator_spin_z():
    np.testing.assert_array_equal(build_parity_operator(SpinBasis(2), ParitySpec.spin_z()).signs, [1, -1, -1, 1])


def test_parity_eigenvalue():
    a = build_parity_operator(LatticeShape((4,)))
    assert a.eigenvalue([1, 0, 1j, 0]) == 1
    assert a.eigenvalue([0, 1, 0, 0]) == -1
    assert a.eigenvalue([1, 1, 0, 0]) is None


@given(st.lists(st.integers(1, 5), min_size=1, max_size=2))
def test_parity_squares_to_identity(ext):
    a = build_parity_operator(LatticeShape(tuple(ext)))
    np.testing.assert_array_equal(a.signs.astype(int) ** 2, 1)


def test_parity_anticommutes_with_nearest_neighbour_hops():
    shape = LatticeShape((3, 4))
    t = nearest_neighbor_hamiltonian(shape)
    conj = conjugate_by_parity(t, build_parity_operator(shape))
    np.testing.assert_array_equal(conj.toarray(), -t.toarray())


def test_parity_leaves_potential_alone():
    v = HermitianOperator(sp.diags_array(np.arange(5.0)).tocsr())
    np.testing.assert_array_equal(conjugate_by_parity(v, build_parity_operator(LatticeShape((5,)))).toarray(),
                                  v.toarray())


@pytest.mark.parametrize("n, J, h", [(3, 1.0, 0.5), (5, -1.2, 0.8)])
def test_spin_z_parity_flips_field(n, J, h):
    a = build_parity_operator(SpinBasis(n), ParitySpec.spin_z())
    conj = conjugate_by_parity(build_tfim(TfimSpec(n, J, h)), a)
    np.testing.assert_allclose(conj.toarray(), build_tfim(TfimSpec(n, J, -h)).toarray(), atol=0)


@pytest.mark.parametrize("n, J, h", [(2, 1.0, 0.3), (5, -1.2, 0.8), (6, 0.9, -1.1)])
def test_spin_x_pair_parity_flips_coupling(n, J, h):
    a = build_parity_operator(SpinBasis(n, "x"), ParitySpec.spin_x_pair())
    conj = conjugate_by_parity(build_tfim(TfimSpec(n, J, h), axis="x"), a)
    np.testing.assert_allclose(conj.toarray(), build_tfim(TfimSpec(n, -J, h), axis="x").toarray(), atol=0)


def test_invert_potential():
    shape = LatticeShape((2,))
    h = nearest_neighbor_hamiltonian(shape, 1.0, [0.0, 5.0])
    np.testing.assert_array_equal(invert_potential(h, [0.0, 5.0]).toarray(), [[0.0, 1.0], [1.0, -5.0]])
    np.testing.assert_array_equal(invert_potential(h, [0.0, 0.0]).toarray(), h.toarray())


def test_invert_odd_hops_on_nearest_neighbours():
    shape = LatticeShape((5,))
    t = nearest_neighbor_hamiltonian(shape)
    np.testing.assert_array_equal(invert_odd_hoppings(t, shape, [HoppingTerm(Displacement((1,)), 1.0)]).toarray(),
                                  -t.toarray())


def test_invert_odd_hops_two_dimensional_example():
    shape = LatticeShape((4, 4))
    t20 = HoppingTerm(Displacement((2, 0)), 0.7)
    t12 = HoppingTerm(Displacement((1, 2)), 1.1)
    h = build_single_particle(shape, [t20, t12])
    flipped = invert_odd_hoppings(h, shape, [t20, t12])
    expected = build_single_particle(shape, [t20, HoppingTerm(Displacement((1, 2)), -1.1)])
    np.testing.assert_array_equal(flipped.toarray(), expected.toarray())
    even, odd = split_by_parity([t20, t12])
    assert even == [t20] and odd == [t12]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_odd_inversion_equals_parity_conjugation(seed):
    rng = np.random.default_rng(seed)
    shape = LatticeShape((int(rng.integers(2, 6)), int(rng.integers(2, 6))))
    terms = [HoppingTerm(Displacement(d), complex(*rng.normal(size=2)))
             for d in [(1, 0), (0, 1), (1, 1), (2, 1)]]
    v = rng.uniform(-5, 5, shape.size)
    h = build_single_particle(shape, terms, v)
    a = build_parity_operator(shape)
    np.testing.assert_allclose(invert_odd_hoppings(h, shape, terms).toarray(),
                               conjugate_by_parity(h, a).toarray(), atol=1e-14)
    np.testing.assert_allclose(invert_even_terms(h, shape, terms, v).toarray(),
                               -conjugate_by_parity(h, a).toarray(), atol=1e-14)


def test_triplet_roundtrip(tmp_path):
    shape = LatticeShape((3, 3))
    h = build_single_particle(shape, [HoppingTerm(Displacement((1, 0)), 0.1 + 0.3j),
                                      HoppingTerm(Displacement((0, 1)), 1 / 3)],
                              np.linspace(-1, 1, 9))
    path = tmp_path / "h.txt"
    write_triplets(h, path)
    assert path.read_text().startswith("# dim 9\n")
    back = read_triplets(path)
    np.testing.assert_array_equal(back.toarray(), h.toarray())


def test_triplet_bad_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("# dim 2\n0 0 1.0\n")
    with pytest.raises(InvalidInput, match=":2:"):
        read_triplets(path)
