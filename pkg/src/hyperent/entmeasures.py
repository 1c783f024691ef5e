"""Partial transposition, Hermitian spectra, negativity and the PPT test."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .hypercore import mask_to_vertices, vertices_to_mask
from .statevec import DensityMatrix

PPT_TOL = 1e-10
_CLAMP = 1e-10


@dataclass(frozen=True)
class Bipartition:
    """Unordered split {A, complement} of qubits 1..n.

    Stored canonically as the side that does not contain qubit n.
    """

    n: int
    mask: int

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.mask <= 0 or self.mask >= full or self.mask & ~full:
            raise ValueError(f"bipartition side {self.mask:#b} must be a nonempty proper subset")
        if self.mask >> (self.n - 1) & 1:
            object.__setattr__(self, "mask", full & ~self.mask)

    @classmethod
    def from_side(cls, n: int, side: Iterable[int]) -> "Bipartition":
        side = tuple(side)
        if any(not 1 <= v <= n for v in side):
            raise ValueError(f"qubit index out of range 1..{n} in {side}")
        return cls(n, vertices_to_mask(side))

    @classmethod
    def parse(cls, text: str, n: int) -> "Bipartition":
        """``"1|2,3,4"`` or just ``"1"`` (the complement is implied)."""
        left, _, right = text.partition("|")
        try:
            a = [int(s) for s in left.split(",") if s.strip()]
            b = [int(s) for s in right.split(",") if s.strip()]
        except ValueError:
            raise ValueError(f"malformed bipartition {text!r}") from None
        if right.strip() and sorted(a + b) != list(range(1, n + 1)):
            raise ValueError(f"{text!r} is not a split of qubits 1..{n}")
        return cls.from_side(n, a)

    @property
    def complement(self) -> int:
        return ((1 << self.n) - 1) & ~self.mask

    def sides(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return mask_to_vertices(self.mask), mask_to_vertices(self.complement)

    def __str__(self):
        a, b = self.sides()
        return ",".join(map(str, a)) + "|" + ",".join(map(str, b))


def all_bipartitions(n: int) -> list[Bipartition]:
    """The 2^(n-1) - 1 bipartitions, ascending by canonical mask."""
    return [Bipartition(n, m) for m in range(1, 1 << (n - 1))]


def partial_transpose(rho, n: int | None = None, side: int | Bipartition | Sequence[int] = 0) -> np.ndarray:
    """Transpose the qubits in ``side`` (bitmask, qubit list or Bipartition)."""
    mat = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if n is None:
        n = rho.n if isinstance(rho, DensityMatrix) else int(round(np.log2(mat.shape[0])))
    if mat.shape != (1 << n, 1 << n):
        raise ValueError(f"matrix shape {mat.shape} does not fit {n} qubits")
    if isinstance(side, Bipartition):
        mask = side.mask
    elif isinstance(side, int):
        mask = side
    else:
        mask = vertices_to_mask(side)
    if mask & ~((1 << n) - 1) or mask < 0:
        raise ValueError(f"transposed set {mask:#b} outside {n} qubits")
    t = mat.reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for i in mask_to_vertices(mask):
        # qubit i is bit i-1, i.e. axis n-i of the C-ordered row index
        r, c = n - i, 2 * n - i
        axes[r], axes[c] = axes[c], axes[r]
    return t.transpose(axes).reshape(1 << n, 1 << n)


# -- eigen-solvers ----------------------------------------------------------

def _round_robin(d: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint index pairings covering every pair once (circle method)."""
    m = d + (d % 2)
    idx = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(idx[i], idx[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < d and b < d]
        if pairs:
            p, q = zip(*pairs)
            rounds.append((np.array(p), np.array(q)))
        idx = [idx[0]] + [idx[-1]] + idx[1:-1]
    return rounds


def jacobi_eigh(mat: np.ndarray, vectors: bool = False, tol: float = 1e-13,
                max_sweeps: int = 60):
    """Cyclic Jacobi for Hermitian matrices, rotating disjoint pairs together.

    Stops once the off-diagonal Frobenius norm drops below ``tol * ||M||_F``.
    Returns ascending eigenvalues (and column eigenvectors if requested).
    """
    a = np.array(mat, dtype=complex)
    d = a.shape[0]
    v = np.eye(d, dtype=complex) if vectors else None
    scale = np.linalg.norm(a)
    if d == 1 or scale == 0:
        lam = np.real(np.diag(a)).copy()
        return (lam, v) if vectors else lam
    rounds = _round_robin(d)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p, q in rounds:
            app = a[p, p].real
            aqq = a[q, q].real
            apq = a[p, q]
            r = np.abs(apq)
            active = r > 1e-300
            if not np.any(active):
                continue
            phase = np.where(active, apq / np.where(active, r, 1.0), 1.0)
            theta = 0.5 * np.arctan2(2 * r, app - aqq)
            c = np.cos(theta)
            s = np.sin(theta)
            # columns of the 2x2 unitary: (c, s e^{-i phi}), (-s, c e^{-i phi})
            u00, u01 = c, -s
            u10, u11 = s * np.conj(phase), c * np.conj(phase)
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = ap * u00 + aq * u10
            a[:, q] = ap * u01 + aq * u11
            ap, aq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = np.conj(u00)[:, None] * ap + np.conj(u10)[:, None] * aq
            a[q, :] = np.conj(u01)[:, None] * ap + np.conj(u11)[:, None] * aq
            a[p, q] = 0
            a[q, p] = 0
            if vectors:
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = vp * u00 + vq * u10
                v[:, q] = vp * u01 + vq * u11
    lam = np.real(np.diag(a))
    order = np.argsort(lam)
    if vectors:
        return lam[order], v[:, order]
    return lam[order]


def eigenvalues_hermitian(mat: np.ndarray, method: str = "lapack",
                          herm_tol: float = 1e-10) -> np.ndarray:
    """Spectrum of a Hermitian matrix, descending.

    ``method="jacobi"`` runs the in-house solver above; ``"lapack"`` calls
    numpy's ``eigvalsh``.  The two are kept independent so each can check
    the other.
    """
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 1.0)
    if np.max(np.abs(mat - mat.conj().T)) > herm_tol * scale:
        raise ValueError("matrix is not Hermitian")
    herm = (mat + mat.conj().T) / 2
    if method == "lapack":
        lam = np.linalg.eigvalsh(herm)
    elif method == "jacobi":
        lam = jacobi_eigh(herm)
    else:
        raise ValueError(f"unknown eigen-solver {method!r}")
    return np.sort(lam)[::-1]


# -- measures ---------------------------------------------------------------

def _as_bipartition(rho: DensityMatrix, b) -> Bipartition:
    if isinstance(b, Bipartition):
        if b.n != rho.n:
            raise ValueError(f"bipartition is for {b.n} qubits, state has {rho.n}")
        return b
    if isinstance(b, str):
        return Bipartition.parse(b, rho.n)
    if isinstance(b, int):
        return Bipartition(rho.n, b)
    return Bipartition.from_side(rho.n, b)


def negativity_trace_norm(rho: DensityMatrix, b) -> float:
    """(||rho^T_B||_1 - 1) / 2 from singular values."""
    b = _as_bipartition(rho, b)
    sv = np.linalg.svd(partial_transpose(rho, side=b), compute_uv=False)
    return max(0.0, (float(np.sum(sv)) - float(np.real(np.trace(rho.data)))) / 2)


def negativity(rho: DensityMatrix, b, method: str = "lapack") -> float:
    """Absolute sum of the negative eigenvalues of rho^T_B.

    Eigenvalues in [-1e-10, 0) count as zero.  Either side of the
    bipartition may be transposed; the spectrum is the same.
    """
    b = _as_bipartition(rho, b)
    lam = eigenvalues_hermitian(partial_transpose(rho, side=b), method=method)
    neg = lam[lam < -_CLAMP]
    return float(-np.sum(neg)) if neg.size else 0.0


def min_pt_eigenvalue(rho: DensityMatrix, b, method: str = "lapack") -> float:
    b = _as_bipartition(rho, b)
    return float(eigenvalues_hermitian(partial_transpose(rho, side=b), method=method)[-1])


def is_ppt(rho: DensityMatrix, b, tol: float = PPT_TOL) -> bool:
    return min_pt_eigenvalue(rho, b) >= -tol
