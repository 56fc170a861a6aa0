"""Exact diagonalisation, unitary time evolution and thermal averages.

Units: hbar = 1, times in 1/g when energies are in g.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.special import logsumexp

from latticeinv.errors import DimensionMismatch, IncompatibleBasis, InvalidInput, NotHermitian, TooLarge
from latticeinv.lattice import TwoParticleBasis
from latticeinv.operators import HERMITIAN_ATOL, HermitianOperator

DENSE_MAX_DIM = 8192
REAL_PHASE_ATOL = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def coefficients(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi)
        if psi.shape[-1] != self.dim:
            raise DimensionMismatch(f"state has {psi.shape[-1]} amplitudes, operator has dimension {self.dim}")
        return self.eigenvectors.conj().T @ psi

    def residual(self, h: HermitianOperator) -> float:
        """``max_n |H v_n - E_n v_n| / max(1, |E_n|)``."""
        hv = h.matrix @ self.eigenvectors
        err = np.linalg.norm(hv - self.eigenvectors * self.eigenvalues, axis=0)
        return float(np.max(err / np.maximum(1.0, np.abs(self.eigenvalues)), initial=0.0))

    def orthonormality_error(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(self.dim)), initial=0.0))


def _is_tridiagonal(m: sp.csr_array) -> bool:
    coo = m.tocoo()
    return bool(np.all(np.abs(coo.row - coo.col) <= 1))


def decompose(h: Union[HermitianOperator, np.ndarray]) -> SpectralDecomposition:
    """Full dense eigendecomposition of ``h`` (dimension <= 8192)."""
    if not isinstance(h, HermitianOperator):
        dense = np.asarray(h)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise DimensionMismatch(f"operator must be square, got {dense.shape}")
        if np.max(np.abs(dense - dense.conj().T), initial=0.0) > HERMITIAN_ATOL:
            raise NotHermitian("input matrix is not Hermitian")
        h = HermitianOperator(sp.csr_array(dense))
    if h.dim > DENSE_MAX_DIM:
        raise TooLarge(f"dense diagonalisation is limited to {DENSE_MAX_DIM} states, got {h.dim}")
    if h.is_real and _is_tridiagonal(h.matrix) and h.dim > 2:
        m = h.matrix
        d = m.diagonal().real
        e = m.diagonal(1).real
        w, v = sla.eigh_tridiagonal(d, e)
    elif h.is_real:
        w, v = np.linalg.eigh(h.toarray().real)
    else:
        w, v = np.linalg.eigh(h.toarray())
    return SpectralDecomposition(w, v)


def normalize(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0 or not np.isfinite(norm):
        raise InvalidInput("cannot normalise a zero or non-finite state")
    return psi / norm


def is_real_up_to_phase(psi, atol: float = REAL_PHASE_ATOL) -> bool:
    """True when ``exp(-i theta) psi`` is real, theta the phase of the largest entry."""
    psi = np.asarray(psi, dtype=complex)
    if psi.size == 0:
        return True
    big = psi[np.argmax(np.abs(psi))]
    if big == 0:
        return True
    rotated = psi * np.exp(-1j * np.angle(big))
    return bool(np.max(np.abs(rotated.imag)) <= atol)


def evolve(decomp: SpectralDecomposition, psi0, t: float) -> np.ndarray:
    """``exp(-i H t) psi0`` via the eigenbasis."""
    psi0 = np.asarray(psi0, dtype=complex)
    c = decomp.coefficients(psi0)
    if t == 0:
        return psi0.copy()
    return decomp.eigenvectors @ (np.exp(-1j * decomp.eigenvalues * t) * c)


def evolve_many(decomp: SpectralDecomposition, psi0, times: Sequence[float], chunk: int = 256) -> np.ndarray:
    """States at every time, shape ``(len(times), dim)``.

    Each row depends only on its own time, so chunking does not change results.
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    psi0 = np.asarray(psi0, dtype=complex)
    c = decomp.coefficients(psi0)
    out = np.empty((times.size, decomp.dim), dtype=complex)
    for start in range(0, times.size, chunk):
        ts = times[start:start + chunk]
        phases = np.exp(-1j * np.outer(ts, decomp.eigenvalues)) * c
        out[start:start + chunk] = phases @ decomp.eigenvectors.T
    out[times == 0] = psi0
    return out


def density_series(decomp: SpectralDecomposition, psi0, times: Sequence[float], chunk: int = 256) -> np.ndarray:
    """``|psi(t)|^2`` for every time without keeping all amplitudes at once."""
    times = np.asarray(times, dtype=float).reshape(-1)
    out = np.empty((times.size, decomp.dim))
    for start in range(0, times.size, chunk):
        out[start:start + chunk] = probability_density(evolve_many(decomp, psi0, times[start:start + chunk]))
    return out


def probability_density(psi) -> np.ndarray:
    psi = np.asarray(psi)
    return (psi.real**2 + psi.imag**2) if np.iscomplexobj(psi) else psi**2


def expect_relative_distance(psi, basis: TwoParticleBasis, *, is_density: bool = False) -> Union[float, np.ndarray]:
    """``E[|x1 - x2|]`` in sites; ``psi`` may be one state or a stack of states."""
    if not isinstance(basis, TwoParticleBasis):
        raise IncompatibleBasis("relative distance needs a two-particle basis")
    p = np.asarray(psi) if is_density else probability_density(psi)
    if p.shape[-1] != basis.size:
        raise IncompatibleBasis(f"state has {p.shape[-1]} amplitudes, basis has {basis.size}")
    result = p @ basis.relative_distance
    return float(result) if np.ndim(result) == 0 else result


def region_probability(psi, predicate: Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]) -> float:
    """Probability mass on the basis states selected by ``predicate``.

    ``predicate`` is a boolean mask or a callable mapping the index array to one.
    """
    p = probability_density(psi)
    mask = predicate(np.arange(p.size)) if callable(predicate) else predicate
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != p.shape:
        raise DimensionMismatch(f"mask shape {mask.shape} does not match state shape {p.shape}")
    return float(np.clip(p[mask].sum(), 0.0, 1.0))


def log_partition_function(decomp: SpectralDecomposition, beta: float) -> float:
    return float(logsumexp(-beta * decomp.eigenvalues))


def partition_function(decomp: SpectralDecomposition, beta: float) -> float:
    """``sum_n exp(-beta E_n)``; beta may be negative.

    Raises OverflowError when the result is not representable, in which case
    use :func:`log_partition_function`.
    """
    log_z = log_partition_function(decomp, beta)
    if log_z > np.log(np.finfo(float).max):
        raise OverflowError(f"log Z = {log_z:.6g} overflows; use log_partition_function")
    return float(np.exp(log_z))


def thermal_weights(decomp: SpectralDecomposition, beta: float) -> np.ndarray:
    """Boltzmann probabilities of each eigenstate, summing to one."""
    a = -beta * decomp.eigenvalues
    return np.exp(a - logsumexp(a))


def thermal_expectation(decomp: SpectralDecomposition, op: HermitianOperator, beta: float) -> float:
    """``Tr(O exp(-beta H)) / Z``."""
    if op.dim != decomp.dim:
        raise DimensionMismatch(f"operator dimension {op.dim} vs Hamiltonian {decomp.dim}")
    v = decomp.eigenvectors
    diag = np.einsum("in,in->n", v.conj(), op.matrix @ v)
    return float(np.real(thermal_weights(decomp, beta) @ diag))


def energy(h: HermitianOperator, psi) -> float:
    return h.expectation(np.asarray(psi, dtype=complex))
