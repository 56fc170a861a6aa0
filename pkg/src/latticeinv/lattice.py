"""Finite open-boundary lattices, basis indexing and parity masks.

Three kinds of basis are supported:

* :class:`LatticeShape` -- one particle on a d-dimensional grid,
* :class:`TwoParticleBasis` -- two particles on the same grid, optionally
  restricted to an exchange-symmetry sector,
* :class:`SpinBasis` -- the 2**N configurations of N spin-1/2 sites.

Coordinates are zero based and linearised in row-major order (last
dimension fastest). The all-zero site carries parity +1.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np
import scipy.sparse as sp

from latticeinv.errors import IncompatibleSpec, InvalidCoordinate, InvalidInput, TooLarge

DEFAULT_MAX_DIM = 2**16


def max_basis_size() -> int:
    """Basis-size ceiling, overridable through ``LATTICEINV_MAX_DIM``."""
    raw = os.environ.get("LATTICEINV_MAX_DIM")
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError as exc:
        raise InvalidInput(f"LATTICEINV_MAX_DIM must be an integer, got {raw!r}") from exc
    if value < 1:
        raise InvalidInput(f"LATTICEINV_MAX_DIM must be positive, got {value}")
    return value


def _check_size(size: int, what: str) -> None:
    ceiling = max_basis_size()
    if size > ceiling:
        raise TooLarge(f"{what} has {size} basis states, ceiling is {ceiling}")


@dataclass(frozen=True)
class LatticeShape:
    """Open (hard-wall) lattice with ``extents[j]`` sites along dimension j."""

    extents: tuple[int, ...]
    boundary: str = field(default="open", init=False)

    def __post_init__(self):
        extents = tuple(int(e) for e in self.extents)
        if not extents:
            raise InvalidInput("a lattice needs at least one dimension")
        if any(e < 1 for e in extents):
            raise InvalidInput(f"every extent must be >= 1, got {extents}")
        object.__setattr__(self, "extents", extents)
        _check_size(self.size, f"lattice {extents}")

    @classmethod
    def chain(cls, length: int) -> "LatticeShape":
        return cls((length,))

    @property
    def ndim(self) -> int:
        return len(self.extents)

    @property
    def size(self) -> int:
        return int(np.prod(self.extents))

    @cached_property
    def coords(self) -> np.ndarray:
        """Integer coordinates of every site, shape ``(size, ndim)``."""
        grids = np.indices(self.extents).reshape(self.ndim, -1)
        return grids.T.copy()

    def __len__(self) -> int:
        return self.size


def site_index(shape: LatticeShape, coords: Sequence[int]) -> int:
    """Row-major linear index of ``coords``."""
    coords = tuple(int(c) for c in coords)
    if len(coords) != shape.ndim:
        raise InvalidCoordinate(f"expected {shape.ndim} coordinates, got {len(coords)}")
    index = 0
    for c, extent in zip(coords, shape.extents):
        if not 0 <= c < extent:
            raise InvalidCoordinate(f"coordinate {coords} outside extents {shape.extents}")
        index = index * extent + c
    return index


def index_site(shape: LatticeShape, index: int) -> tuple[int, ...]:
    """Inverse of :func:`site_index`."""
    if not 0 <= index < shape.size:
        raise InvalidCoordinate(f"index {index} outside basis of size {shape.size}")
    return tuple(int(c) for c in np.unravel_index(index, shape.extents))


@dataclass(frozen=True)
class Displacement:
    """Integer hop vector, one offset per dimension."""

    offsets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(int(o) for o in self.offsets))

    @property
    def ndim(self) -> int:
        return len(self.offsets)

    def is_zero(self) -> bool:
        return not any(self.offsets)

    def __neg__(self) -> "Displacement":
        return Displacement(tuple(-o for o in self.offsets))


def manhattan(d: Displacement) -> int:
    return sum(abs(o) for o in d.offsets)


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1


class ParityMode(enum.Enum):
    ALL_DIMENSIONS = "all_dimensions"
    DIMENSION_SUBSET = "dimension_subset"
    SPIN_Z_COUNT = "spin_z_count"
    SPIN_X_PAIR_COUNT = "spin_x_pair_count"


SPIN_MODES = (ParityMode.SPIN_Z_COUNT, ParityMode.SPIN_X_PAIR_COUNT)


@dataclass(frozen=True)
class ParitySpec:
    """Which coordinates feed the exponent of the diagonal parity operator.

    ``dims`` is only used by ``DIMENSION_SUBSET``.
    """

    mode: ParityMode = ParityMode.ALL_DIMENSIONS
    dims: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "dims", frozenset(int(d) for d in self.dims))
        if self.mode is ParityMode.DIMENSION_SUBSET and not self.dims:
            raise InvalidInput("DIMENSION_SUBSET parity needs at least one dimension")

    @classmethod
    def all_dimensions(cls) -> "ParitySpec":
        return cls(ParityMode.ALL_DIMENSIONS)

    @classmethod
    def subset(cls, dims: Iterable[int]) -> "ParitySpec":
        return cls(ParityMode.DIMENSION_SUBSET, frozenset(dims))

    @classmethod
    def spin_z(cls) -> "ParitySpec":
        return cls(ParityMode.SPIN_Z_COUNT)

    @classmethod
    def spin_x_pair(cls) -> "ParitySpec":
        return cls(ParityMode.SPIN_X_PAIR_COUNT)

    def selected_dims(self, ndim: int) -> tuple[int, ...]:
        if self.mode in SPIN_MODES:
            raise IncompatibleSpec(f"{self.mode.value} parity is only defined on a spin basis")
        if self.mode is ParityMode.ALL_DIMENSIONS:
            return tuple(range(ndim))
        bad = [d for d in self.dims if not 0 <= d < ndim]
        if bad:
            raise IncompatibleSpec(f"dimensions {sorted(bad)} outside a {ndim}-d lattice")
        return tuple(sorted(self.dims))


def hopping_parity(d: Displacement, spec: ParitySpec = ParitySpec()) -> Parity:
    """Parity of a hop: even hops commute with the parity operator, odd ones anticommute."""
    dims = spec.selected_dims(d.ndim)
    distance = sum(abs(d.offsets[j]) for j in dims)
    return Parity(distance % 2)


class Sector(enum.Enum):
    DISTINGUISHABLE = "distinguishable"
    ANTISYMMETRIC = "antisymmetric"  # spin triplet
    SYMMETRIC = "symmetric"  # spin singlet


@dataclass(frozen=True)
class TwoParticleBasis:
    """Two particles on ``shape``.

    In the distinguishable sector the states are ordered pairs ``(i, j)``
    with index ``i * n + j``. The (anti)symmetric sectors keep one
    representative ``i < j`` (``i <= j`` when symmetric), normalised
    combinations of ``|i, j>`` and ``|j, i>``.
    """

    shape: LatticeShape
    sector: Sector = Sector.DISTINGUISHABLE

    def __post_init__(self):
        object.__setattr__(self, "sector", Sector(self.sector))
        _check_size(self.shape.size**2, f"two-particle grid on {self.shape.extents}")

    @cached_property
    def pairs(self) -> np.ndarray:
        """Single-particle site indices ``(i, j)`` of each basis state."""
        n = self.shape.size
        i, j = np.divmod(np.arange(n * n), n)
        if self.sector is Sector.ANTISYMMETRIC:
            keep = i < j
        elif self.sector is Sector.SYMMETRIC:
            keep = i <= j
        else:
            keep = np.ones(n * n, dtype=bool)
        return np.column_stack([i[keep], j[keep]])

    @property
    def size(self) -> int:
        return len(self.pairs)

    def __len__(self) -> int:
        return self.size

    def index(self, i: int, j: int) -> int:
        """Basis index of the state with particles on sites ``i`` and ``j``."""
        n = self.shape.size
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidCoordinate(f"sites ({i}, {j}) outside lattice of {n} sites")
        if self.sector is Sector.DISTINGUISHABLE:
            return i * n + j
        if self.sector is Sector.ANTISYMMETRIC and i == j:
            raise InvalidCoordinate("antisymmetric sector has no doubly occupied sites")
        lo, hi = min(i, j), max(i, j)
        hits = np.flatnonzero((self.pairs[:, 0] == lo) & (self.pairs[:, 1] == hi))
        return int(hits[0])

    @cached_property
    def coords1(self) -> np.ndarray:
        return self.shape.coords[self.pairs[:, 0]]

    @cached_property
    def coords2(self) -> np.ndarray:
        return self.shape.coords[self.pairs[:, 1]]

    @cached_property
    def relative_distance(self) -> np.ndarray:
        """Euclidean distance |x1 - x2| of each basis state, in sites."""
        return np.linalg.norm(self.coords1 - self.coords2, axis=1)

    def isometry(self) -> sp.csr_array:
        """Embedding of this sector into the distinguishable ``n**2`` grid.

        Columns are orthonormal; the identity for the distinguishable sector.
        """
        n = self.shape.size
        if self.sector is Sector.DISTINGUISHABLE:
            return sp.identity(n * n, format="csr")
        i, j = self.pairs[:, 0], self.pairs[:, 1]
        cols = np.arange(self.size)
        diagonal = i == j
        sign = -1.0 if self.sector is Sector.ANTISYMMETRIC else 1.0
        off = ~diagonal
        rows = np.concatenate([i[off] * n + j[off], j[off] * n + i[off], i[diagonal] * n + i[diagonal]])
        cols_all = np.concatenate([cols[off], cols[off], cols[diagonal]])
        vals = np.concatenate([
            np.full(off.sum(), 1 / np.sqrt(2)),
            np.full(off.sum(), sign / np.sqrt(2)),
            np.ones(diagonal.sum()),
        ])
        return sp.csr_array((vals, (rows, cols_all)), shape=(n * n, self.size))


@dataclass(frozen=True)
class SpinBasis:
    """``2**n_spins`` product states; bit j of the index set means spin j is up.

    ``axis`` names the quantisation axis of the product states ("z" or "x").
    """

    n_spins: int
    axis: str = "z"

    def __post_init__(self):
        if self.n_spins < 1:
            raise InvalidInput(f"need at least one spin, got {self.n_spins}")
        if self.axis not in ("z", "x"):
            raise InvalidInput(f"axis must be 'z' or 'x', got {self.axis!r}")
        _check_size(2**self.n_spins, f"{self.n_spins}-spin basis")

    @property
    def size(self) -> int:
        return 2**self.n_spins

    def __len__(self) -> int:
        return self.size

    @cached_property
    def bits(self) -> np.ndarray:
        """Occupation bits, shape ``(size, n_spins)``."""
        states = np.arange(self.size)
        return (states[:, None] >> np.arange(self.n_spins)) & 1

    def index(self, ups: Sequence[int]) -> int:
        """Basis index from a 0/1 list, spin 0 first."""
        if len(ups) != self.n_spins:
            raise InvalidCoordinate(f"expected {self.n_spins} spins, got {len(ups)}")
        return int(sum(int(bool(u)) << j for j, u in enumerate(ups)))


Basis = Union[LatticeShape, TwoParticleBasis, SpinBasis]


def _signs(exponent: np.ndarray) -> np.ndarray:
    return np.where(exponent % 2 == 0, 1, -1).astype(np.int8)


def parity_vector(basis: Basis, spec: ParitySpec = ParitySpec()) -> np.ndarray:
    """Diagonal of the parity operator on ``basis`` as an int8 array of +-1."""
    if isinstance(basis, SpinBasis):
        if spec.mode is ParityMode.SPIN_Z_COUNT:
            if basis.axis != "z":
                raise IncompatibleSpec("spin_z_count parity needs the z basis")
            return _signs(basis.bits.sum(axis=1))
        if spec.mode is ParityMode.SPIN_X_PAIR_COUNT:
            if basis.axis != "x":
                raise IncompatibleSpec("spin_x_pair_count parity needs the x basis")
            # Every bond term flips one even and one odd site, so the count of
            # up spins on odd sites changes by exactly one per bond flip.
            return _signs(basis.bits[:, 1::2].sum(axis=1))
        # A spin basis is the 2x2x...x2 hypercube.
        shape = LatticeShape((2,) * basis.n_spins)
        return parity_vector(shape, spec)
    if spec.mode in SPIN_MODES:
        raise IncompatibleSpec(f"{spec.mode.value} parity applies to spin bases only")
    if isinstance(basis, TwoParticleBasis):
        dims = list(spec.selected_dims(basis.shape.ndim))
        return _signs(basis.coords1[:, dims].sum(axis=1) + basis.coords2[:, dims].sum(axis=1))
    dims = list(spec.selected_dims(basis.ndim))
    return _signs(basis.coords[:, dims].sum(axis=1))
