"""Exact hypergraph states as sign vectors, plus the stabilizer picture.

A hypergraph state is real and equally weighted, so it is stored as one
sign per computational basis string.  Basis index ``x`` carries qubit ``i``
in bit ``i - 1``, matching the edge bitmask convention of
:mod:`hyperent.hypercore`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .hypercore import CapacityError, Hypergraph, mask_to_vertices

MAX_STATE_QUBITS = 20
MAX_DENSE_QUBITS = 10


def _basis(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class SignState:
    """Amplitude of basis string ``x`` is ``signs[x] / sqrt(2**n)``."""

    n: int
    signs: np.ndarray

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=np.int8)
        if signs.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} signs, got shape {signs.shape}")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be +1 or -1")
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)

    @classmethod
    def plus(cls, n: int) -> "SignState":
        return cls(n, np.ones(1 << n, dtype=np.int8))

    def __eq__(self, other):
        return isinstance(other, SignState) and self.n == other.n and bool(
            np.array_equal(self.signs, other.signs))

    def __hash__(self):
        return hash((self.n, self.signs.tobytes()))

    def amplitudes(self) -> np.ndarray:
        return self.signs.astype(float) / np.sqrt(1 << self.n)

    def projector(self) -> np.ndarray:
        v = self.amplitudes()
        return np.outer(v, v).astype(complex)

    def bitstring(self, x: int) -> str:
        """Basis label written qubit 1 first, as in ``|1110>``."""
        return "".join("1" if x >> i & 1 else "0" for i in range(self.n))


def build_state(h: Hypergraph) -> SignState:
    """|H> = prod_e C_e |+>^n as a sign vector."""
    if h.n > MAX_STATE_QUBITS:
        raise CapacityError(f"{h.n} qubits exceed the sign-vector cap of {MAX_STATE_QUBITS}")
    x = _basis(h.n)
    parity = np.zeros(1 << h.n, dtype=np.int8)
    for e in h.edges:
        parity ^= ((x & e) == e).astype(np.int8)
    return SignState(h.n, 1 - 2 * parity)


def apply_ce(state: SignState, edge: int) -> SignState:
    """Multi-controlled Z on ``edge``: flip every string that is all ones on it."""
    if edge <= 0:
        raise ValueError("C_e needs a nonempty edge")
    if edge >> state.n:
        raise ValueError(f"edge {set(mask_to_vertices(edge))} outside {state.n} qubits")
    x = _basis(state.n)
    flip = (x & edge) == edge
    return SignState(state.n, np.where(flip, -state.signs, state.signs))


def apply_x(state: SignState, qubit: int) -> SignState:
    """Pauli X on 1-indexed ``qubit`` (a permutation of basis strings)."""
    x = _basis(state.n)
    return SignState(state.n, state.signs[x ^ (1 << (qubit - 1))])


def inner_product(a: SignState, b: SignState) -> Fraction:
    """<a|b> as an exact dyadic rational."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n} qubits")
    agree = int(np.dot(a.signs.astype(np.int64), b.signs.astype(np.int64)))
    return Fraction(agree, 1 << a.n)


def symmetric_difference_overlap(h: Hypergraph, f: Hypergraph) -> Fraction:
    """<H|F> from the parity count over the symmetric difference of edge sets."""
    if h.n != f.n:
        raise ValueError(f"dimension mismatch: {h.n} vs {f.n} qubits")
    delta = set(h.edges) ^ set(f.edges)
    x = _basis(h.n)
    parity = np.zeros(1 << h.n, dtype=np.int64)
    for e in delta:
        parity ^= ((x & e) == e).astype(np.int64)
    return Fraction(int(np.sum(1 - 2 * parity)), 1 << h.n)


# -- stabilizers ------------------------------------------------------------

@dataclass(frozen=True)
class StabilizerOp:
    """g_i = X_i * prod_{e containing i} C_{e minus i}.

    ``phase_edges`` holds the reduced edges; the C factors act first, then X.
    An empty reduced edge (a loop on ``i``) contributes the global factor -1.
    """

    n: int
    qubit: int
    phase_edges: tuple[int, ...]

    def __post_init__(self):
        bit = 1 << (self.qubit - 1)
        if any(e & bit for e in self.phase_edges):
            raise ValueError("phase edges of g_i must not contain qubit i")

    def apply(self, state: SignState) -> SignState:
        if state.n != self.n:
            raise ValueError(f"dimension mismatch: {state.n} vs {self.n} qubits")
        x = _basis(self.n)
        parity = np.zeros(1 << self.n, dtype=np.int8)
        for e in self.phase_edges:
            parity ^= ((x & e) == e).astype(np.int8)
        signs = state.signs * (1 - 2 * parity)
        return SignState(self.n, signs[x ^ (1 << (self.qubit - 1))])

    def matrix(self) -> np.ndarray:
        d = 1 << self.n
        x = _basis(self.n)
        diag = np.ones(d)
        for e in self.phase_edges:
            diag = np.where((x & e) == e, -diag, diag)
        xmat = np.zeros((d, d))
        xmat[x ^ (1 << (self.qubit - 1)), x] = 1.0
        return xmat @ np.diag(diag)


def stabilizer(h: Hypergraph, i: int) -> StabilizerOp:
    if not 1 <= i <= h.n:
        raise ValueError(f"qubit index {i} out of range 1..{h.n}")
    bit = 1 << (i - 1)
    return StabilizerOp(h.n, i, tuple(e & ~bit for e in h.edges if e & bit))


def check_stabilizers(h: Hypergraph) -> list[int]:
    """Qubits whose g_i fails to fix |H>; empty when all pass."""
    state = build_state(h)
    return [i for i in range(1, h.n + 1) if stabilizer(h, i).apply(state) != state]


def stabilizer_projector(h: Hypergraph) -> "DensityMatrix":
    """|H><H| assembled as prod_i (1 + g_i)/2."""
    if h.n > MAX_DENSE_QUBITS:
        raise CapacityError(f"{h.n} qubits exceed the dense-matrix cap of {MAX_DENSE_QUBITS}")
    d = 1 << h.n
    proj = np.eye(d)
    for i in range(1, h.n + 1):
        proj = proj @ ((np.eye(d) + stabilizer(h, i).matrix()) / 2)
    return DensityMatrix(h.n, proj.astype(complex))


# -- density matrices -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n: int
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        d = 1 << self.n
        if data.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {data.shape}")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_state(cls, state: SignState) -> "DensityMatrix":
        return cls(state.n, state.projector())

    @property
    def dim(self) -> int:
        return 1 << self.n

    def validate(self, herm_tol: float = 1e-12, trace_tol: float = 1e-12,
                 psd_tol: float = 1e-10) -> None:
        """Raise ValueError unless Hermitian, unit-trace and PSD to tolerance."""
        if np.max(np.abs(self.data - self.data.conj().T)) > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(self.data)
        if abs(tr - 1) > trace_tol:
            raise ValueError(f"density matrix trace is {tr.real:.3g}, not 1")
        lam = np.linalg.eigvalsh(self.data)
        if lam[0] < -psd_tol:
            raise ValueError(f"density matrix has eigenvalue {lam[0]:.3g} < 0")

    def expectation(self, state: SignState) -> float:
        v = state.amplitudes()
        return float(np.real(v @ self.data @ v))

    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))

    def __add__(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(self.n, self.data + other.data)

    def __mul__(self, c: float) -> "DensityMatrix":
        return DensityMatrix(self.n, self.data * c)

    __rmul__ = __mul__
