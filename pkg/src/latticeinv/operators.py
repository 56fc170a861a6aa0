"""Sparse Hermitian operators: hopping Hamiltonians, the two-particle Coulomb
model, the open transverse-field Ising chain and diagonal parity operators.

Sign convention for hopping: a term with displacement ``d`` and amplitude
``g`` contributes ``g`` at ``(x, x + d)`` and ``conj(g)`` at ``(x + d, x)``,
so ``g > 0`` nearest-neighbour hopping gives the band ``2 g cos(k)``.
Hops that would leave the lattice are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from latticeinv.errors import (
    DimensionMismatch,
    IncompatibleBasis,
    InvalidInput,
    InvalidTerm,
    NotHermitian,
    TooLarge,
)
from latticeinv.lattice import (
    Basis,
    Displacement,
    LatticeShape,
    Parity,
    ParitySpec,
    Sector,
    SpinBasis,
    TwoParticleBasis,
    hopping_parity,
    parity_vector,
)

HERMITIAN_ATOL = 1e-12
MAX_SPINS = 14


@dataclass(frozen=True)
class HermitianOperator:
    """Square sparse matrix checked for Hermiticity on construction."""

    matrix: sp.csr_array

    def __post_init__(self):
        m = sp.csr_array(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"operator must be square, got {m.shape}")
        m.sum_duplicates()
        m.eliminate_zeros()
        residual = abs(m - m.conj().T)
        if residual.nnz and residual.max() > HERMITIAN_ATOL:
            raise NotHermitian(f"max |H - H^dagger| = {residual.max():.3e}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix.data) or not np.any(self.matrix.data.imag)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def __matmul__(self, other):
        return self.matrix @ other

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _check_dims(self.dim, other.dim)
        return HermitianOperator(self.matrix + other.matrix)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        _check_dims(self.dim, other.dim)
        return HermitianOperator(self.matrix - other.matrix)

    def __neg__(self) -> "HermitianOperator":
        return HermitianOperator(-self.matrix)

    def scaled(self, factor: float) -> "HermitianOperator":
        return HermitianOperator(self.matrix * float(factor))

    def expectation(self, psi: np.ndarray) -> float:
        return float(np.real(np.vdot(psi, self.matrix @ psi)))


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatch(f"dimension mismatch: {a} vs {b}")


def diagonal_operator(values: Sequence[float]) -> HermitianOperator:
    values = np.asarray(values)
    return HermitianOperator(sp.diags_array(values, format="csr"))


@dataclass(frozen=True)
class HoppingTerm:
    """Hop by ``displacement`` with ``amplitude``; the Hermitian partner is implied."""

    displacement: Displacement
    amplitude: complex = 1.0

    def __post_init__(self):
        d = self.displacement
        if not isinstance(d, Displacement):
            d = Displacement(tuple(d))
            object.__setattr__(self, "displacement", d)
        if d.is_zero():
            raise InvalidTerm("zero-distance terms belong in the potential")
        if not np.isfinite(self.amplitude):
            raise InvalidTerm(f"non-finite hopping amplitude {self.amplitude!r}")

    def parity(self, spec: ParitySpec = ParitySpec()) -> Parity:
        return hopping_parity(self.displacement, spec)


def nearest_neighbor_terms(ndim: int, g: complex = 1.0) -> list[HoppingTerm]:
    """One unit hop per dimension with amplitude ``g``."""
    terms = []
    for j in range(ndim):
        offsets = [0] * ndim
        offsets[j] = 1
        terms.append(HoppingTerm(Displacement(tuple(offsets)), g))
    return terms


def potential_field(shape: LatticeShape, values=None) -> np.ndarray:
    """Validated real on-site energies, one per site (zeros when ``values`` is None)."""
    if values is None:
        return np.zeros(shape.size)
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 1 and shape.size != 1:
        v = np.full(shape.size, float(v[0]))
    if v.size != shape.size:
        raise InvalidInput(f"potential has {v.size} entries, lattice has {shape.size} sites")
    if not np.all(np.isfinite(v)):
        raise InvalidInput("potential entries must be finite")
    return v


def hopping_matrix(shape: LatticeShape, hoppings: Iterable[HoppingTerm]) -> sp.csr_array:
    """Kinetic part only; each term and its Hermitian partner on open boundaries."""
    n = shape.size
    coords = shape.coords
    extents = np.array(shape.extents)
    strides = np.array([int(np.prod(shape.extents[j + 1:])) for j in range(shape.ndim)])
    rows, cols, vals = [], [], []
    for term in hoppings:
        d = np.array(term.displacement.offsets)
        if d.size != shape.ndim:
            raise InvalidTerm(f"displacement {tuple(d)} does not match a {shape.ndim}-d lattice")
        target = coords + d
        ok = np.all((target >= 0) & (target < extents), axis=1)
        src = np.flatnonzero(ok)
        dst = target[ok] @ strides
        amp = complex(term.amplitude)
        rows += [src, dst]
        cols += [dst, src]
        vals += [np.full(src.size, amp), np.full(src.size, amp.conjugate())]
    if not rows:
        return sp.csr_array((n, n), dtype=float)
    data = np.concatenate(vals)
    if not np.any(data.imag):
        data = data.real
    return sp.csr_array((data, (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def build_single_particle(shape: LatticeShape, hoppings: Iterable[HoppingTerm], potential=None) -> HermitianOperator:
    """``H = sum_i T_i + diag(V)`` on an open lattice."""
    v = potential_field(shape, potential)
    return HermitianOperator(hopping_matrix(shape, hoppings) + sp.diags_array(v))


def nearest_neighbor_hamiltonian(shape: LatticeShape, g: float = 1.0, potential=None) -> HermitianOperator:
    return build_single_particle(shape, nearest_neighbor_terms(shape.ndim, g), potential)


@dataclass(frozen=True)
class CoulombSpec:
    """Two charges hopping with strength ``g`` and repelling as ``v / |x1 - x2|``.

    ``v_ons`` is the doubly occupied energy; ``None`` means ``v``.
    """

    L: int
    D: int = 1
    g: float = 1.0
    v: float = 1.0
    v_ons: Optional[float] = None
    sector: Sector = Sector.ANTISYMMETRIC

    def __post_init__(self):
        object.__setattr__(self, "sector", Sector(self.sector))
        if self.L < 1:
            raise InvalidInput(f"L must be >= 1, got {self.L}")
        if self.D not in (1, 2):
            raise InvalidInput(f"only D = 1 or 2 is supported, got {self.D}")
        if not math.isfinite(self.onsite):
            raise InvalidInput("the onsite energy must be finite")

    @property
    def onsite(self) -> float:
        return float(self.v if self.v_ons is None else self.v_ons)

    @property
    def shape(self) -> LatticeShape:
        return LatticeShape((self.L,) * self.D)

    def basis(self) -> TwoParticleBasis:
        return TwoParticleBasis(self.shape, self.sector)


def coulomb_potential(basis: TwoParticleBasis, v: float, v_ons: float) -> np.ndarray:
    r = basis.relative_distance
    with np.errstate(divide="ignore"):
        return np.where(r > 0, v / np.where(r > 0, r, 1.0), v_ons)


def build_two_particle_coulomb(spec: CoulombSpec) -> HermitianOperator:
    """Coulomb pair Hamiltonian restricted to ``spec.sector``.

    Built on the distinguishable grid and projected with the sector isometry,
    which keeps the (anti)symmetrisation signs right in any dimension.
    """
    grid = TwoParticleBasis(spec.shape, Sector.DISTINGUISHABLE)
    n = spec.shape.size
    single = hopping_matrix(spec.shape, nearest_neighbor_terms(spec.D, spec.g))
    eye = sp.identity(n, format="csr")
    kinetic = sp.kron(single, eye, format="csr") + sp.kron(eye, single, format="csr")
    h = kinetic + sp.diags_array(coulomb_potential(grid, spec.v, spec.onsite))
    if spec.sector is not Sector.DISTINGUISHABLE:
        p = spec.basis().isometry()
        h = p.T @ h @ p
    return HermitianOperator(sp.csr_array(h))


def exchange_operator(basis: TwoParticleBasis) -> sp.csr_array:
    """Permutation swapping the two particles on the distinguishable grid."""
    if basis.sector is not Sector.DISTINGUISHABLE:
        raise IncompatibleBasis("particle swap is a permutation only on the distinguishable grid")
    i, j = basis.pairs[:, 0], basis.pairs[:, 1]
    n = basis.shape.size
    rows = np.arange(basis.size)
    return sp.csr_array((np.ones(basis.size), (rows, j * n + i)), shape=(basis.size, basis.size))


@dataclass(frozen=True)
class TfimSpec:
    """Open transverse-field Ising chain ``-J sum s_j s_{j+1} - h sum sigma^x_j``."""

    N: int
    J: float = 1.0
    h: float = 1.0

    def __post_init__(self):
        if not 1 <= self.N <= MAX_SPINS:
            raise TooLarge(f"TFIM supports 1..{MAX_SPINS} spins, got {self.N}")

    def with_(self, **changes) -> "TfimSpec":
        return TfimSpec(**{"N": self.N, "J": self.J, "h": self.h, **changes})


def build_tfim(spec: TfimSpec, axis: str = "z") -> HermitianOperator:
    """TFIM matrix in the z basis (default) or in the sigma^x product basis.

    In the z basis the bond energy is diagonal and the field flips one bit;
    in the x basis the field is diagonal and each bond flips two adjacent bits.
    """
    basis = SpinBasis(spec.N, axis)
    states = np.arange(basis.size)
    spins = 2 * basis.bits - 1
    if axis == "z":
        diag = -spec.J * (spins[:, :-1] * spins[:, 1:]).sum(axis=1)
        masks = [1 << j for j in range(spec.N)]
        amp = -spec.h
    else:
        diag = -spec.h * spins.sum(axis=1)
        masks = [3 << j for j in range(spec.N - 1)]
        amp = -spec.J
    rows = [states]
    cols = [states]
    vals = [diag.astype(float)]
    if amp != 0:
        for m in masks:
            rows.append(states)
            cols.append(states ^ m)
            vals.append(np.full(basis.size, float(amp)))
    data = np.concatenate(vals)
    return HermitianOperator(sp.csr_array((data, (np.concatenate(rows), np.concatenate(cols))), shape=(basis.size,) * 2))


def magnetization(n_spins: int) -> HermitianOperator:
    """``sum_j sigma^z_j`` in the z basis."""
    basis = SpinBasis(n_spins)
    return diagonal_operator((2 * basis.bits - 1).sum(axis=1).astype(float))


def zz_correlation(n_spins: int, i: int, j: int) -> HermitianOperator:
    """``sigma^z_i sigma^z_j`` in the z basis."""
    spins = 2 * SpinBasis(n_spins).bits - 1
    return diagonal_operator((spins[:, i] * spins[:, j]).astype(float))


@dataclass(frozen=True)
class ParityOperator:
    """Diagonal +-1 operator; squares to the identity."""

    signs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=np.int8)
        if not np.all(np.abs(s) == 1):
            raise InvalidInput("parity entries must be +-1")
        object.__setattr__(self, "signs", s)

    @property
    def dim(self) -> int:
        return self.signs.size

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.signs * np.asarray(psi)

    def eigenvalue(self, psi: np.ndarray, atol: float = 1e-12) -> Optional[int]:
        """+1 or -1 if ``psi`` is a parity eigenstate, else None."""
        psi = np.asarray(psi)
        for lam in (1, -1):
            if np.max(np.abs(self.apply(psi) - lam * psi), initial=0.0) <= atol:
                return lam
        return None

    def as_operator(self) -> HermitianOperator:
        return diagonal_operator(self.signs.astype(float))


def build_parity_operator(basis: Basis, spec: ParitySpec = ParitySpec()) -> ParityOperator:
    return ParityOperator(parity_vector(basis, spec))


def conjugate_by_parity(h: HermitianOperator, a: ParityOperator) -> HermitianOperator:
    """``A H A``: entry (r, c) picks up ``A_r A_c``."""
    _check_dims(h.dim, a.dim)
    coo = h.matrix.tocoo()
    sign = a.signs[coo.row].astype(float) * a.signs[coo.col]
    return HermitianOperator(sp.csr_array((coo.data * sign, (coo.row, coo.col)), shape=coo.shape))


def invert_potential(h: HermitianOperator, potential) -> HermitianOperator:
    """Replace the diagonal ``V`` of ``h`` by ``-V``; hopping untouched."""
    v = np.asarray(potential, dtype=float).reshape(-1)
    if v.size == 1:
        v = np.full(h.dim, float(v[0]))
    _check_dims(h.dim, v.size)
    return HermitianOperator(h.matrix - sp.diags_array(2.0 * v))


def split_by_parity(hoppings: Iterable[HoppingTerm], spec: ParitySpec = ParitySpec()):
    """``(even_terms, odd_terms)``."""
    even, odd = [], []
    for term in hoppings:
        (odd if term.parity(spec) is Parity.ODD else even).append(term)
    return even, odd


def invert_odd_hoppings(h: HermitianOperator, shape: LatticeShape, hoppings: Sequence[HoppingTerm],
                        spec: ParitySpec = ParitySpec()) -> HermitianOperator:
    """Negate every hop that is odd under ``spec``; ``hoppings`` must be those used to build ``h``."""
    _check_dims(h.dim, shape.size)
    _, odd = split_by_parity(hoppings, spec)
    return HermitianOperator(h.matrix - 2 * hopping_matrix(shape, odd))


def invert_even_terms(h: HermitianOperator, shape: LatticeShape, hoppings: Sequence[HoppingTerm],
                      potential, spec: ParitySpec = ParitySpec()) -> HermitianOperator:
    """Negate the potential and every even hop (``H -> -(A H A)`` when ``h`` is built from these parts)."""
    even, _ = split_by_parity(hoppings, spec)
    flipped = invert_potential(h, potential_field(shape, potential))
    return HermitianOperator(flipped.matrix - 2 * hopping_matrix(shape, even))


def write_triplets(op: HermitianOperator, path) -> None:
    """Sparse text dump: ``# dim N`` header then ``row col re im`` per nonzero."""
    coo = op.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [f"# dim {op.dim}"]
    for k in order:
        z = complex(coo.data[k])
        lines.append(f"{coo.row[k]} {coo.col[k]} {z.real:.17g} {z.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_triplets(path) -> HermitianOperator:
    rows, cols, vals = [], [], []
    dim = None
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "dim":
                dim = int(parts[1])
            continue
        try:
            r, c, re, im = line.split()
            rows.append(int(r))
            cols.append(int(c))
            vals.append(complex(float(re), float(im)))
        except ValueError as exc:
            raise InvalidInput(f"{path}:{lineno}: expected 'row col re im', got {line!r}") from exc
    if dim is None:
        raise InvalidInput(f"{path}: missing '# dim N' header")
    data = np.array(vals, dtype=complex)
    if not np.any(data.imag):
        data = data.real
    return HermitianOperator(sp.csr_array((data, (rows, cols)), shape=(dim, dim)))
