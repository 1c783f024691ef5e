"""Randomized hypergraph states as exact mixtures over spanning subhypergraphs.

Each hyperedge of order ``k >= 2`` is applied independently with success
probability ``p_k``; order-1 loops are always applied.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .hypercore import CapacityError, Hypergraph, check_randomizable, popcount, spanning_subhypergraphs
from .polynomial import RationalPolynomial
from .statevec import MAX_DENSE_QUBITS, DensityMatrix, SignState, build_state

# below this a float product is recomputed exactly
_TINY_WEIGHT = 1e-14


@dataclass(frozen=True)
class RandomizationParams:
    """Success probability ``p[k]`` for hyperedges of order ``k``."""

    p: Mapping[int, float | Fraction]

    def __post_init__(self):
        for k, v in self.p.items():
            if not isinstance(k, int) or k < 2:
                raise ValueError(f"randomization orders start at 2, got {k!r}")
            if not 0 <= v <= 1:
                raise ValueError(f"p_{k} = {v} is not a probability")

    @classmethod
    def uniform(cls, value, orders) -> "RandomizationParams":
        return cls({k: value for k in orders})

    def get(self, k: int):
        try:
            return self.p[k]
        except KeyError:
            raise ValueError(f"no success probability given for order {k}") from None


@dataclass(frozen=True)
class Branch:
    weight: float
    state: SignState
    hypergraph: Hypergraph


@dataclass(frozen=True)
class BranchEnsemble:
    n: int
    branches: tuple[Branch, ...]

    @property
    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.branches])

    def __len__(self):
        return len(self.branches)

    def __iter__(self) -> Iterator[Branch]:
        return iter(self.branches)


def _order_counts(edges) -> dict[int, int]:
    counts: dict[int, int] = {}
    for e in edges:
        k = popcount(e)
        counts[k] = counts.get(k, 0) + 1
    return counts


def branch_weight(h: Hypergraph, f: Hypergraph, params: RandomizationParams) -> float:
    """prod_k p_k^|E_k,F| (1 - p_k)^|E_k,H minus E_k,F| for a spanning ``f``."""
    kept = _order_counts(f.randomizable_edges)
    total = _order_counts(h.randomizable_edges)
    w = 1.0
    for k, m in total.items():
        p = float(params.get(k))
        a = kept.get(k, 0)
        w *= p ** a * (1.0 - p) ** (m - a)
    if 0 < w < _TINY_WEIGHT:
        exact = Fraction(1)
        for k, m in total.items():
            p = Fraction(params.get(k))
            a = kept.get(k, 0)
            exact *= p ** a * (1 - p) ** (m - a)
        w = float(exact)
    return w


def randomize(h: Hypergraph, params: RandomizationParams) -> BranchEnsemble:
    """Weighted ensemble over all 2^m spanning subhypergraphs (subset order)."""
    check_randomizable(h)
    for k in {popcount(e) for e in h.randomizable_edges}:
        params.get(k)
    branches = tuple(
        Branch(branch_weight(h, f, params), build_state(f), f)
        for f in spanning_subhypergraphs(h)
    )
    return BranchEnsemble(h.n, branches)


def ensemble_to_density(ens: BranchEnsemble) -> DensityMatrix:
    """rho = sum_F w_F |F><F|, as a dense matrix."""
    if ens.n > MAX_DENSE_QUBITS:
        raise CapacityError(f"{ens.n} qubits exceed the dense-matrix cap of {MAX_DENSE_QUBITS}")
    ws = np.array([b.weight for b in ens.branches if b.weight > 0])
    if ws.size == 0:
        raise ValueError("ensemble has no branch with positive weight")
    amps = np.stack([b.state.amplitudes() for b in ens.branches if b.weight > 0])
    rho = (amps.T * ws) @ amps
    return DensityMatrix(ens.n, rho.astype(complex))


def randomized_density(h: Hypergraph, params: RandomizationParams) -> DensityMatrix:
    return ensemble_to_density(randomize(h, params))


def symbolic_weight(h: Hypergraph, f: Hypergraph) -> RationalPolynomial:
    kept = _order_counts(f.randomizable_edges)
    total = _order_counts(h.randomizable_edges)
    w = RationalPolynomial.constant(1)
    for k, m in sorted(total.items()):
        p = RationalPolynomial.var(k)
        a = kept.get(k, 0)
        w = w * p ** a * (1 - p) ** (m - a)
    return w


def symbolic_randomize(h: Hypergraph) -> list[tuple[RationalPolynomial, Hypergraph]]:
    """Branch weights kept as polynomials in p_2..p_n, in subset order."""
    check_randomizable(h)
    return [(symbolic_weight(h, f), f) for f in spanning_subhypergraphs(h)]
