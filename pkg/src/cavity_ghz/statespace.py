"""Composite Hilbert space of one three-level coupler and n truncated cavity modes.

Basis ordering: the coupler is the slowest-varying tensor factor (axis 0),
cavity 1 is axis 1, and cavity n (axis n) varies fastest.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import reduce

import numpy as np

from cavity_ghz.config import DEFAULT_FOCK_CUTOFF, NORMALIZATION_TOLERANCE

COUPLER_LEVELS = 3


@dataclass(frozen=True)
class SystemDims:
    """Shape of the coupler x cavities space."""

    n_cavities: int
    fock_cutoff: int = DEFAULT_FOCK_CUTOFF
    coupler_levels: int = COUPLER_LEVELS

    def __post_init__(self) -> None:
        if self.n_cavities < 1:
            raise ValueError(f"n_cavities must be >= 1, got {self.n_cavities}")
        if self.fock_cutoff < 2:
            raise ValueError(f"fock_cutoff must be >= 2, got {self.fock_cutoff}")
        if self.coupler_levels != COUPLER_LEVELS:
            raise ValueError(f"coupler_levels is fixed at {COUPLER_LEVELS}, got {self.coupler_levels}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.coupler_levels,) + (self.fock_cutoff,) * self.n_cavities

    @property
    def dimension(self) -> int:
        return self.coupler_levels * self.fock_cutoff**self.n_cavities


class StateKind(enum.Enum):
    PURE_VECTOR = "pure"
    DENSITY_MATRIX = "density"


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure state vector or density matrix over a :class:`SystemDims` space.

    The constructor only checks array shapes; normalization and Hermiticity
    are enforced by :func:`pure_state` and :func:`density_state`. Integrated
    states carry their drift unchanged so it stays visible as a diagnostic.
    """

    dims: SystemDims
    kind: StateKind
    data: np.ndarray

    def __post_init__(self) -> None:
        d = self.dims.dimension
        expected = (d,) if self.kind is StateKind.PURE_VECTOR else (d, d)
        data = np.array(self.data, dtype=complex)
        if data.shape != expected:
            raise ValueError(f"{self.kind.value} state needs shape {expected}, got {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def is_pure(self) -> bool:
        return self.kind is StateKind.PURE_VECTOR


@dataclass(frozen=True, eq=False)
class CompositeOperator:
    """Dense d x d operator on the composite space."""

    dims: SystemDims
    data: np.ndarray

    def __post_init__(self) -> None:
        d = self.dims.dimension
        data = np.array(self.data, dtype=complex)
        if data.shape != (d, d):
            raise ValueError(f"operator needs shape {(d, d)}, got {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    def adjoint(self) -> CompositeOperator:
        return CompositeOperator(self.dims, self.data.conj().T)


class LocalOperator(enum.Enum):
    """Single-factor operators the interaction Hamiltonians are built from."""

    S12_PLUS = "S12+"  # |2><1| on the coupler
    S01_PLUS = "S01+"  # |1><0|
    S02_PLUS = "S02+"  # |2><0|
    ANNIHILATE = "a"
    CREATE = "a+"


class DephasingPair(enum.Enum):
    Z21 = "21"
    Z20 = "20"
    Z10 = "10"


_COUPLER_TRANSITIONS = {
    LocalOperator.S12_PLUS: (2, 1),
    LocalOperator.S01_PLUS: (1, 0),
    LocalOperator.S02_PLUS: (2, 0),
}


# ---------------------------------------------------------------------------
# Local (single-factor) matrices
# ---------------------------------------------------------------------------

def coupler_local(upper: int, lower: int) -> np.ndarray:
    """Return |upper><lower| as a 3 x 3 matrix."""
    if upper not in range(COUPLER_LEVELS) or lower not in range(COUPLER_LEVELS):
        raise ValueError(f"coupler levels must be in 0..2, got upper={upper}, lower={lower}")
    if upper == lower:
        raise ValueError(f"upper and lower level must differ, got {upper}")
    op = np.zeros((COUPLER_LEVELS, COUPLER_LEVELS), dtype=complex)
    op[upper, lower] = 1.0
    return op


def annihilation_local(fock_cutoff: int) -> np.ndarray:
    """Truncated ladder operator a|m> = sqrt(m)|m-1> on ``fock_cutoff`` levels."""
    return np.diag(np.sqrt(np.arange(1, fock_cutoff)), k=1).astype(complex)


def dephasing_local(pair: DephasingPair | str) -> np.ndarray:
    """Diagonal of S^z for the given level pair, e.g. |2><2| - |1><1| for ``21``."""
    pair = DephasingPair(pair)
    upper, lower = int(pair.value[0]), int(pair.value[1])
    diag = np.zeros(COUPLER_LEVELS)
    diag[upper] = 1.0
    diag[lower] = -1.0
    return diag


def local_matrix(op: LocalOperator, fock_cutoff: int) -> np.ndarray:
    if op in _COUPLER_TRANSITIONS:
        return coupler_local(*_COUPLER_TRANSITIONS[op])
    a = annihilation_local(fock_cutoff)
    return a if op is LocalOperator.ANNIHILATE else a.conj().T


# ---------------------------------------------------------------------------
# Tensor embeddings
# ---------------------------------------------------------------------------

def _check_axes(dims: SystemDims, axes: Sequence[int]) -> None:
    for axis in axes:
        if not 0 <= axis <= dims.n_cavities:
            raise ValueError(f"tensor axis {axis} out of range for {dims.n_cavities} cavities")


def embed(dims: SystemDims, factors: Mapping[int, np.ndarray]) -> np.ndarray:
    """Kronecker product with ``factors[axis]`` on the given axes and identity elsewhere."""
    _check_axes(dims, list(factors))
    blocks = [factors.get(axis, np.eye(size, dtype=complex)) for axis, size in enumerate(dims.shape)]
    return reduce(np.kron, blocks)


def embed_diagonal(dims: SystemDims, factors: Mapping[int, np.ndarray]) -> np.ndarray:
    """Diagonal of a product of diagonal local operators, as a length-d vector."""
    _check_axes(dims, list(factors))
    blocks = [np.asarray(factors.get(axis, np.ones(size))) for axis, size in enumerate(dims.shape)]
    return reduce(np.kron, blocks)


def _local_monomial(local: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows = local.shape[0]
    cols = np.zeros(rows, dtype=np.intp)
    weights = np.zeros(rows, dtype=complex)
    for r in range(rows):
        nonzero = np.flatnonzero(local[r])
        if nonzero.size > 1:
            raise ValueError("local operator has more than one nonzero entry in a row")
        if nonzero.size == 1:
            cols[r] = nonzero[0]
            weights[r] = local[r, nonzero[0]]
    return cols, weights


def embed_monomial(dims: SystemDims, factors: Mapping[int, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Row-sparse form of :func:`embed` for operators with one nonzero per row.

    Returns ``(source, weight)`` such that ``(X @ psi)[x] == weight[x] * psi[source[x]]``.
    Ladder operators and coupler transitions all have this form, so products of
    them never need a dense d x d matrix.
    """
    _check_axes(dims, list(factors))
    shape = dims.shape
    index = np.indices(shape).reshape(len(shape), -1)
    source = index.copy()
    weight = np.ones(dims.dimension, dtype=complex)
    for axis, local in factors.items():
        cols, w = _local_monomial(np.asarray(local))
        source[axis] = cols[index[axis]]
        weight *= w[index[axis]]
    return np.ravel_multi_index(tuple(source), shape), weight


# ---------------------------------------------------------------------------
# Composite operators
# ---------------------------------------------------------------------------

def coupler_transition(dims: SystemDims, upper: int, lower: int) -> CompositeOperator:
    """|upper><lower| on the coupler, identity on every cavity."""
    return CompositeOperator(dims, embed(dims, {0: coupler_local(upper, lower)}))


def _cavity_axis(dims: SystemDims, cavity_index: int) -> int:
    if not 1 <= cavity_index <= dims.n_cavities:
        raise ValueError(f"cavity_index must be in 1..{dims.n_cavities}, got {cavity_index}")
    return cavity_index


def annihilation(dims: SystemDims, cavity_index: int) -> CompositeOperator:
    axis = _cavity_axis(dims, cavity_index)
    return CompositeOperator(dims, embed(dims, {axis: annihilation_local(dims.fock_cutoff)}))


def creation(dims: SystemDims, cavity_index: int) -> CompositeOperator:
    return annihilation(dims, cavity_index).adjoint()


def number_operator(dims: SystemDims, cavity_index: int) -> CompositeOperator:
    axis = _cavity_axis(dims, cavity_index)
    occupations = np.arange(dims.fock_cutoff, dtype=float)
    return CompositeOperator(dims, np.diag(embed_diagonal(dims, {axis: occupations})))


def dephasing_z(dims: SystemDims, pair: DephasingPair | str) -> CompositeOperator:
    return CompositeOperator(dims, np.diag(embed_diagonal(dims, {0: dephasing_local(pair)})))


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

def pure_state(dims: SystemDims, vector: np.ndarray, atol: float = NORMALIZATION_TOLERANCE) -> QuantumState:
    """Wrap a state vector, rejecting it unless its norm is 1 within ``atol``."""
    state = QuantumState(dims, StateKind.PURE_VECTOR, vector)
    norm = np.linalg.norm(state.data)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state vector norm {norm!r} differs from 1 by more than {atol}")
    return state


def density_state(dims: SystemDims, matrix: np.ndarray, atol: float = NORMALIZATION_TOLERANCE) -> QuantumState:
    """Wrap a density matrix, rejecting it unless it is Hermitian with unit trace."""
    state = QuantumState(dims, StateKind.DENSITY_MATRIX, matrix)
    rho = state.data
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > atol:
        raise ValueError(f"density matrix trace {trace!r} differs from 1 by more than {atol}")
    return state


def basis_index(dims: SystemDims, coupler_level: int, occupations: Sequence[int]) -> int:
    if len(occupations) != dims.n_cavities:
        raise ValueError(f"expected {dims.n_cavities} occupations, got {len(occupations)}")
    if not 0 <= coupler_level < dims.coupler_levels:
        raise ValueError(f"coupler level must be in 0..2, got {coupler_level}")
    for m in occupations:
        if not 0 <= m < dims.fock_cutoff:
            raise ValueError(f"occupation {m} outside 0..{dims.fock_cutoff - 1}")
    return int(np.ravel_multi_index((coupler_level, *occupations), dims.shape))


def basis_state(dims: SystemDims, coupler_level: int, occupations: Sequence[int]) -> QuantumState:
    vector = np.zeros(dims.dimension, dtype=complex)
    vector[basis_index(dims, coupler_level, occupations)] = 1.0
    return pure_state(dims, vector)


def pure_to_density(state: QuantumState) -> QuantumState:
    if not state.is_pure:
        return state
    psi = state.data
    return QuantumState(state.dims, StateKind.DENSITY_MATRIX, np.outer(psi, psi.conj()))


def vacuum_state(dims: SystemDims, coupler_level: int = 0) -> QuantumState:
    """``|coupler_level>`` on the coupler with every cavity empty."""
    return basis_state(dims, coupler_level, [0] * dims.n_cavities)
