"""Dense pure states over qudit parties and the linear algebra built on them.

Amplitudes are stored as a flat complex vector in mixed-radix order with
party 1 as the most significant digit, so ``|i_1 i_2 ... i_n>`` maps to
index ``((i_1 * d_2 + i_2) * d_3 + ...) + i_n``.  Internally parties are
0-based; user-facing labels (``A1``, ``A2``, ...) are 1-based.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EigenFailure,
    EmptySubset,
    InvalidState,
    NotSeparable,
    SizeLimit,
    TrivialSubset,
    ZeroState,
)

DEFAULT_MAX_DIM = 2**20
MAX_DIM_ENV = "ENTANGLE_MAX_DIM"

# eigenvalues below this are a broken density matrix, not rounding noise
NEGATIVE_EIGENVALUE_LIMIT = -1e-6


def max_dim() -> int:
    """Total Hilbert space dimension cap, overridable via ``ENTANGLE_MAX_DIM``."""
    raw = os.environ.get(MAX_DIM_ENV)
    if not raw:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise InvalidState(f"{MAX_DIM_ENV} must be an integer, got {raw!r}") from None
    if value < 2:
        raise InvalidState(f"{MAX_DIM_ENV} must be at least 2")
    return value


@dataclass(frozen=True)
class Tolerances:
    """Thresholds that turn exact-arithmetic statements into float decisions.

    ``rank_eps`` is relative to the largest eigenvalue of the reduced
    density matrix; ``norm_eps`` bounds how far an input norm may stray
    from 1 before it counts as unnormalized.
    """

    rank_eps: float = 1e-9
    norm_eps: float = 1e-8

    def __post_init__(self):
        for name in ("rank_eps", "norm_eps"):
            value = getattr(self, name)
            if not (0.0 < value < 1e-2):
                raise ValueError(f"{name} must lie in (0, 1e-2), got {value!r}")


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class SystemShape:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 1:
            raise InvalidState("a system needs at least one party")
        if any(d < 2 for d in dims):
            raise InvalidState(f"every local dimension must be >= 2, got {list(dims)}")
        cap = max_dim()
        if math.prod(dims) > cap:
            raise SizeLimit(
                f"total dimension {math.prod(dims)} exceeds the cap of {cap} "
                f"(set {MAX_DIM_ENV} to raise it)"
            )

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def subset_dim(self, subset: PartySubset) -> int:
        return math.prod(self.dims[k] for k in subset.parties)


@dataclass(frozen=True, order=False)
class PartySubset:
    """A set of parties stored as a bitmask (bit k is party ``A_{k+1}``)."""

    mask: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("party count must be positive")
        if self.mask < 0 or self.mask >> self.n:
            raise ValueError(f"mask {self.mask:#b} does not fit {self.n} parties")

    @classmethod
    def of(cls, parties: Iterable[int], n: int) -> PartySubset:
        """Build from 0-based party indices."""
        mask = 0
        for k in parties:
            if not 0 <= k < n:
                raise ValueError(f"party index {k} out of range for {n} parties")
            mask |= 1 << k
        return cls(mask, n)

    @classmethod
    def full(cls, n: int) -> PartySubset:
        return cls((1 << n) - 1, n)

    @property
    def parties(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.n) if self.mask >> k & 1)

    @property
    def size(self) -> int:
        return bin(self.mask).count("1")

    def complement(self) -> PartySubset:
        return PartySubset(((1 << self.n) - 1) ^ self.mask, self.n)

    def is_empty(self) -> bool:
        return self.mask == 0

    def is_full(self) -> bool:
        return self.mask == (1 << self.n) - 1

    def is_nontrivial(self) -> bool:
        return not (self.is_empty() or self.is_full())

    def __contains__(self, k: int) -> bool:
        return 0 <= k < self.n and bool(self.mask >> k & 1)

    def __iter__(self):
        return iter(self.parties)

    def __len__(self) -> int:
        return self.size

    def label(self) -> str:
        return "(" + ",".join(f"A{k + 1}" for k in self.parties) + ")"

    def key(self) -> str:
        """Comma separated 1-based indices, e.g. ``"1,3"``."""
        return ",".join(str(k + 1) for k in self.parties)


def nontrivial_subsets(n: int) -> Iterable[PartySubset]:
    """All ``2**n - 2`` nontrivial subsets, in increasing mask order."""
    for mask in range(1, (1 << n) - 1):
        yield PartySubset(mask, n)


class PureState:
    """Immutable normalized amplitude vector over ``shape.n`` parties.

    The constructor accepts amplitudes whose norm is within ``norm_eps`` of
    one and rescales them exactly; anything further off is rejected.  Use
    :func:`normalize` for arbitrary nonzero vectors.
    """

    __slots__ = ("shape", "_amps")

    def __init__(self, dims, amplitudes, norm_eps: float = DEFAULT_TOLERANCES.norm_eps):
        shape = dims if isinstance(dims, SystemShape) else SystemShape(tuple(dims))
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != shape.total_dim:
            raise InvalidState(
                f"expected {shape.total_dim} amplitudes for dims {list(shape.dims)}, "
                f"got {amps.size}"
            )
        if not np.all(np.isfinite(amps)):
            raise InvalidState("amplitudes must be finite")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > norm_eps:
            raise InvalidState(f"state norm {norm!r} deviates from 1 by more than {norm_eps}")
        amps = amps / norm
        amps.setflags(write=False)
        self.shape = shape
        self._amps = amps

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    @property
    def n(self) -> int:
        return self.shape.n

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    @property
    def tensor(self) -> np.ndarray:
        return self._amps.reshape(self.dims)

    def amplitude(self, digits: Sequence[int]) -> complex:
        return complex(self.tensor[tuple(digits)])

    def fidelity(self, other: PureState) -> float:
        """``|<self|other>|``; phase insensitive overlap."""
        if self.dims != other.dims:
            raise InvalidState("fidelity needs states of identical shape")
        return float(abs(np.vdot(self._amps, other._amps)))

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self._amps, other._amps)

    def __hash__(self):
        return hash((self.dims, self._amps.tobytes()))

    def __repr__(self):
        return f"PureState(dims={list(self.dims)}, amplitudes={self._amps!r})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    retained: PartySubset
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidState("density matrix must be square")
        scale = float(np.max(np.abs(m))) if m.size else 0.0
        if float(np.max(np.abs(m - m.conj().T))) > 1e-10 * max(scale, 1e-300):
            raise InvalidState("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise InvalidState(f"density matrix trace {np.trace(m).real!r} is not 1")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return _clamped_eigvalsh(self.matrix)


def normalize(amplitudes, dims) -> PureState:
    """Rescale a nonzero amplitude vector to unit norm."""
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(amps)):
        raise InvalidState("amplitudes must be finite")
    norm = float(np.linalg.norm(amps))
    if norm < 1e-12:
        raise ZeroState(f"cannot normalize a state of norm {norm!r}")
    return PureState(dims, amps / norm)


def tensor_product(a: PureState, b: PureState) -> PureState:
    dims = a.dims + b.dims
    SystemShape(dims)  # raises SizeLimit before the kron allocates
    return PureState(dims, np.kron(a.amplitudes, b.amplitudes))


def basis_state(digits: Sequence[int], dims: Sequence[int] | None = None) -> PureState:
    dims = tuple(dims) if dims is not None else tuple(max(2, d + 1) for d in digits)
    amps = np.zeros(math.prod(dims), dtype=np.complex128)
    amps[np.ravel_multi_index(tuple(digits), dims)] = 1.0
    return PureState(dims, amps)


def cat_state(n: int, d: int = 2) -> PureState:
    """``(|0...0> + |1...1>)/sqrt(2)`` on ``n`` parties of dimension ``d``."""
    dims = (d,) * n
    amps = np.zeros(d**n, dtype=np.complex128)
    amps[0] = amps[np.ravel_multi_index((1,) * n, dims)] = 1 / math.sqrt(2)
    return PureState(dims, amps)


def w_state(n: int) -> PureState:
    amps = np.zeros(2**n, dtype=np.complex128)
    for k in range(n):
        amps[1 << k] = 1.0
    return normalize(amps, (2,) * n)


def epr_state() -> PureState:
    return cat_state(2)


def ghz_state() -> PureState:
    return cat_state(3)


def permute_parties(state: PureState, order: Sequence[int]) -> PureState:
    """New state whose party ``j`` is party ``order[j]`` of ``state``."""
    order = tuple(order)
    if sorted(order) != list(range(state.n)):
        raise ValueError(f"{order} is not a permutation of {state.n} parties")
    tensor = np.transpose(state.tensor, order)
    return PureState(tuple(state.dims[k] for k in order), tensor.reshape(-1))


def _bipartite_matrix(state: PureState, keep: PartySubset) -> np.ndarray:
    """Reshape amplitudes into a (dim keep) x (dim complement) matrix."""
    kept = keep.parties
    rest = keep.complement().parties
    t = np.transpose(state.tensor, kept + rest)
    return t.reshape(state.shape.subset_dim(keep), -1)


def _check_subset(state: PureState, subset: PartySubset):
    if subset.n != state.n:
        raise InvalidState(f"subset refers to {subset.n} parties, state has {state.n}")


def _clamped_eigvalsh(matrix: np.ndarray) -> np.ndarray:
    try:
        w = np.linalg.eigvalsh(matrix)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"Hermitian eigensolver did not converge: {exc}") from exc
    if w.size and w[0] < NEGATIVE_EIGENVALUE_LIMIT:
        raise InvalidState(f"density matrix has eigenvalue {w[0]!r} < {NEGATIVE_EIGENVALUE_LIMIT}")
    return np.clip(w, 0.0, 1.0)


def _reduced_matrix(state: PureState, keep: PartySubset) -> np.ndarray:
    m = _bipartite_matrix(state, keep)
    rho = m @ m.conj().T
    return 0.5 * (rho + rho.conj().T)


def partial_trace(state: PureState, keep: PartySubset) -> DensityMatrix:
    """Reduced density matrix of ``keep``, tracing out the complement."""
    _check_subset(state, keep)
    if keep.is_empty():
        raise EmptySubset("cannot keep an empty set of parties")
    return DensityMatrix(keep, _reduced_matrix(state, keep))


def entropy_of_spectrum(eigenvalues: np.ndarray) -> float:
    """Shannon entropy in bits of clamped eigenvalues, with 0 log 0 = 0."""
    p = eigenvalues[eigenvalues > 0.0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    return entropy_of_spectrum(rho.eigenvalues())


def subset_spectrum(state: PureState, subset: PartySubset) -> np.ndarray:
    """Nonzero-relevant spectrum of ``rho_subset``, computed on the smaller side.

    For a pure state the reduced matrices of a subset and its complement
    share their nonzero eigenvalues, so the cheaper side is diagonalized.
    Eigenvalues are ascending and clamped to [0, 1].
    """
    _check_subset(state, subset)
    if subset.is_empty():
        raise EmptySubset("subset is empty")
    if subset.is_full():
        return np.array([1.0])
    other = subset.complement()
    side = subset if state.shape.subset_dim(subset) <= state.shape.subset_dim(other) else other
    return _clamped_eigvalsh(_reduced_matrix(state, side))


def subset_entropy(state: PureState, subset: PartySubset) -> float:
    """Partial entropy ``S_I`` in bits of a nontrivial subset."""
    _check_subset(state, subset)
    if not subset.is_nontrivial():
        raise TrivialSubset(f"subset {subset.label()} must be neither empty nor full")
    return entropy_of_spectrum(subset_spectrum(state, subset))


def rank_of_spectrum(eigenvalues: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    top = float(eigenvalues[-1])
    return int(np.count_nonzero(eigenvalues > tol.rank_eps * top))


def subset_rank(state: PureState, subset: PartySubset, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Schmidt rank across ``subset | complement`` using a relative cutoff."""
    return rank_of_spectrum(subset_spectrum(state, subset), tol)


def reduced_pure_state(
    state: PureState, keep: PartySubset, tol: Tolerances = DEFAULT_TOLERANCES
) -> PureState:
    """Pure factor on ``keep`` when ``rho_keep`` has rank one.

    The global phase is fixed so that the largest-magnitude amplitude is
    real and positive.
    """
    _check_subset(state, keep)
    if keep.is_empty():
        raise EmptySubset("cannot keep an empty set of parties")
    if keep.is_full():
        return state
    rank = subset_rank(state, keep, tol)
    if rank != 1:
        raise NotSeparable(f"{keep.label()} is not a pure factor (Schmidt rank {rank})")
    m = _bipartite_matrix(state, keep)
    # top right singular vector from the small Gram matrix, then map back
    gram = m.conj().T @ m
    try:
        _, vecs = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"Hermitian eigensolver did not converge: {exc}") from exc
    vec = m @ vecs[:, -1]
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise EigenFailure("degenerate factor extraction")
    vec = vec / norm
    pivot = vec[np.argmax(np.abs(vec))]
    vec = vec * (abs(pivot) / pivot)
    dims = tuple(state.dims[k] for k in keep.parties)
    return PureState(dims, vec)
