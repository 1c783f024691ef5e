"""Shared fixtures and independent dense-matrix oracles."""
from __future__ import annotations

from functools import reduce

import numpy as np
import pytest

from hyperent.hypercore import Hypergraph, mask_to_vertices

I2 = np.eye(2)
P1 = np.diag([0.0, 1.0])
PLUS = np.ones(2) / np.sqrt(2)


def kron_all(factors):
    return reduce(np.kron, factors)


def kron_ce(n: int, edge: int) -> np.ndarray:
    """C_e = 1 - 2 * (|1><1| on every qubit of e), via Kronecker products.

    Qubit i is bit i-1 of the basis index, so the first kron factor is qubit n.
    """
    verts = set(mask_to_vertices(edge))
    proj = kron_all([P1 if q in verts else I2 for q in range(n, 0, -1)])
    return np.eye(1 << n) - 2 * proj


def kron_state(h: Hypergraph) -> np.ndarray:
    v = kron_all([PLUS] * h.n)
    for e in h.edges:
        v = kron_ce(h.n, e) @ v
    return v


def kron_partial_transpose(rho: np.ndarray, n: int, side: set[int]) -> np.ndarray:
    """Entry-by-entry partial transpose: swap row/column bits of qubits in ``side``."""
    d = 1 << n
    mask = sum(1 << (q - 1) for q in side)
    out = np.empty_like(rho)
    for r in range(d):
        for c in range(d):
            r2 = (r & ~mask) | (c & mask)
            c2 = (c & ~mask) | (r & mask)
            out[r2, c2] = rho[r, c]
    return out


def random_density(n: int, rng: np.random.Generator, rank: int | None = None,
                   real: bool = False) -> np.ndarray:
    d = 1 << n
    k = rank or d
    g = rng.normal(size=(d, k))
    if not real:
        g = g + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def h14():
    return Hypergraph.from_edges(4, [(1, 2, 3), (2, 3, 4), (3, 4, 1), (4, 1, 2)], "H14")


@pytest.fixture
def mixed_demo():
    return Hypergraph.from_edges(4, [(1, 2), (1, 2, 3, 4)], "demo")


# -- biseparable test states ------------------------------------------------

def _compress(x: int, verts) -> int:
    return sum(((x >> (v - 1)) & 1) << j for j, v in enumerate(verts))


def product_vector(n: int, side, psi_a: np.ndarray, psi_b: np.ndarray) -> np.ndarray:
    """|psi_a>_A |psi_b>_B with A = ``side`` and B its complement (qubit i = bit i-1)."""
    a = sorted(side)
    b = [q for q in range(1, n + 1) if q not in a]
    return np.array([psi_a[_compress(x, a)] * psi_b[_compress(x, b)] for x in range(1 << n)])


def _random_vector(k: int, rng) -> np.ndarray:
    v = rng.normal(size=1 << k) + 1j * rng.normal(size=1 << k)
    return v / np.linalg.norm(v)


def product_mixture(n: int, side, rng, rank: int = 2) -> np.ndarray:
    """Convex mixture of pure states that are all products across ``side``."""
    k = len(side)
    rho = np.zeros((1 << n, 1 << n), dtype=complex)
    for w in rng.dirichlet(np.ones(rank)):
        v = product_vector(n, side, _random_vector(k, rng), _random_vector(n - k, rng))
        rho += w * np.outer(v, v.conj())
    return rho


def ghz_noise(n: int, p: float) -> np.ndarray:
    d = 1 << n
    g = np.zeros(d)
    g[0] = g[-1] = 1 / np.sqrt(2)
    return p * np.outer(g, g) + (1 - p) * np.eye(d) / d


def biseparable_states(seed: int = 7) -> list[tuple[str, "DensityMatrix"]]:
    """Twenty states that are PPT mixtures by construction."""
    from hyperent.entmeasures import all_bipartitions
    from hyperent.hypercore import Hypergraph, clover
    from hyperent.randomizer import RandomizationParams, randomized_density
    from hyperent.statevec import DensityMatrix

    rng = np.random.default_rng(seed)
    out = []
    out.append(("clover3 at p=0", randomized_density(clover(3), RandomizationParams({3: 0}))))
    h14 = Hypergraph.from_edges(4, [(1, 2, 3), (2, 3, 4), (3, 4, 1), (4, 1, 2)])
    out.append(("H14 at p=0", randomized_density(h14, RandomizationParams({3: 0}))))
    out.append(("maximally mixed 3", DensityMatrix(3, np.eye(8) / 8)))
    out.append(("maximally mixed 4", DensityMatrix(4, np.eye(16) / 16)))
    for bp in all_bipartitions(3):
        out.append((f"product mixture {bp}", DensityMatrix(3, product_mixture(3, bp.sides()[0], rng))))
    for side in ([1], [1, 2], [1, 3], [1, 4]):
        out.append((f"product mixture {side}|rest (4)", DensityMatrix(4, product_mixture(4, side, rng))))
    mix3 = sum(product_mixture(3, bp.sides()[0], rng, rank=1) for bp in all_bipartitions(3)) / 3
    out.append(("equal mix over the three cuts", DensityMatrix(3, mix3)))
    bps4 = all_bipartitions(4)
    mix4 = sum(product_mixture(4, bp.sides()[0], rng, rank=1) for bp in bps4) / len(bps4)
    out.append(("equal mix over all seven cuts", DensityMatrix(4, mix4)))
    w = rng.dirichlet(np.ones(3))
    mix4b = sum(wi * product_mixture(4, bp.sides()[0], rng) for wi, bp in zip(w, bps4[2:5]))
    out.append(("random mix over three cuts", DensityMatrix(4, mix4b)))
    two_pairs = Hypergraph.from_edges(4, [(1, 2), (3, 4)])
    out.append(("two disjoint pairs, p2=0.7",
                randomized_density(two_pairs, RandomizationParams({2: 0.7}))))
    triple = Hypergraph.from_edges(4, [(1, 2, 3)])
    out.append(("triple plus free qubit", randomized_density(triple, RandomizationParams({3: 1}))))
    out.append(("GHZ3 with 80% white noise", DensityMatrix(3, ghz_noise(3, 0.2))))
    out.append(("GHZ4 with 80% white noise", DensityMatrix(4, ghz_noise(4, 0.2))))
    demo = Hypergraph.from_edges(4, [(1, 2), (1, 2, 3, 4)])
    out.append(("demo at p2=1, p4=0", randomized_density(demo, RandomizationParams({2: 1, 4: 0}))))
    out.append(("demo at p2=1/2, p4=0", randomized_density(demo, RandomizationParams({2: 0.5, 4: 0}))))
    return out


# -- acceptance summary -------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (ok, detail)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
