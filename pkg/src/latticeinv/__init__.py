"""Finite-lattice quantum dynamics and numerical checks of potential / parity inversion."""

__version__ = "0.1.0"

from latticeinv.errors import (  # noqa: F401
    DimensionMismatch,
    IncompatibleBasis,
    IncompatibleSpec,
    InvalidCoordinate,
    InvalidGeometry,
    InvalidInput,
    InvalidTerm,
    LatticeInvError,
    NotHermitian,
    TooLarge,
)
from latticeinv.lattice import (  # noqa: F401
    Displacement,
    LatticeShape,
    Parity,
    ParityMode,
    ParitySpec,
    Sector,
    SpinBasis,
    TwoParticleBasis,
    hopping_parity,
    index_site,
    manhattan,
    parity_vector,
    site_index,
)
from latticeinv.operators import (  # noqa: F401
    CoulombSpec,
    HermitianOperator,
    HoppingTerm,
    ParityOperator,
    TfimSpec,
    build_parity_operator,
    build_single_particle,
    build_tfim,
    build_two_particle_coulomb,
    conjugate_by_parity,
    invert_odd_hoppings,
    invert_potential,
)
from latticeinv.evolve import (  # noqa: F401
    SpectralDecomposition,
    decompose,
    evolve,
    expect_relative_distance,
    partition_function,
    probability_density,
    region_probability,
    thermal_expectation,
)
