"""Randomization overlaps, projector witnesses and critical probabilities."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .hypercore import CapacityError, Hypergraph, check_randomizable, flower, popcount
from .polynomial import RationalPolynomial
from .statevec import MAX_STATE_QUBITS


def _edge_activation(h: Hypergraph, edges: tuple[int, ...]) -> np.ndarray:
    """For each basis string x, the bitmask of ``edges`` lying inside x."""
    x = np.arange(1 << h.n, dtype=np.int64)
    act = np.zeros(1 << h.n, dtype=np.int64)
    for j, e in enumerate(edges):
        act |= ((x & e) == e).astype(np.int64) << j
    return act


def _walsh_hadamard(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    h = 1
    while h < a.size:
        a = a.reshape(-1, 2, h)
        a = np.concatenate([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1)
        a = a.reshape(-1)
        h *= 2
    return a


def removal_overlaps(h: Hypergraph) -> np.ndarray:
    """Integer ``c[S]`` with <H|F_S> = c[S] / 2^n, F_S = H minus edge subset S.

    ``S`` indexes the randomizable edges.  <H|F> only sees the removed edges,
    so c is the Walsh-Hadamard transform of the activation histogram.
    """
    m = check_randomizable(h)
    if h.n > MAX_STATE_QUBITS:
        raise CapacityError(f"{h.n} qubits exceed the cap of {MAX_STATE_QUBITS}")
    act = _edge_activation(h, h.randomizable_edges)
    hist = np.bincount(act, minlength=1 << m).astype(np.int64)
    return _walsh_hadamard(hist)


def overlap_polynomial(h: Hypergraph) -> RationalPolynomial:
    """O = tr(|H><H| rho_H^P) = sum_F weight(F) <H|F>^2, exactly."""
    rand = h.randomizable_edges
    c = removal_overlaps(h)
    orders = sorted({popcount(e) for e in rand})
    order_bits = {k: sum(1 << j for j, e in enumerate(rand) if popcount(e) == k) for k in orders}
    totals = {k: popcount(b) for k, b in order_bits.items()}

    # group removal subsets by how many edges of each order they remove
    grouped: dict[tuple[int, ...], int] = {}
    for s in range(1 << len(rand)):
        key = tuple(popcount(s & order_bits[k]) for k in orders)
        grouped[key] = grouped.get(key, 0) + int(c[s]) ** 2

    norm = Fraction(1, 1 << (2 * h.n))
    result = RationalPolynomial()
    factors = {k: (RationalPolynomial.var(k), 1 - RationalPolynomial.var(k)) for k in orders}
    for key, sq in grouped.items():
        term = RationalPolynomial.constant(norm * sq)
        for k, removed in zip(orders, key):
            p, q = factors[k]
            term = term * p ** (totals[k] - removed) * q ** removed
        result = result + term
    return result


def flower_overlap_closed_form(n: int) -> RationalPolynomial:
    """O(Fl_n) = 2^-(n+1) sum_j C(m,j) (2^m + 2^j)^2 p^j (1-p)^(m-j), m = (n-1)/2."""
    m = len(flower(n).edges)
    p = RationalPolynomial.var(3)
    q = 1 - p
    total = RationalPolynomial()
    for j in range(m + 1):
        total = total + comb(m, j) * (2 ** m + 2 ** j) ** 2 * p ** j * q ** (m - j)
    return total / (1 << (n + 1))


def witness_alpha(kappa_max: int) -> Fraction:
    """Biseparable overlap bound (2^(k-1) - 1) / 2^(k-1)."""
    if kappa_max < 2:
        raise ValueError(f"witness offset needs kappa_max >= 2, got {kappa_max}")
    return Fraction((1 << (kappa_max - 1)) - 1, 1 << (kappa_max - 1))


def robustness_threshold(n: int, kappa_max: int) -> Fraction:
    """Noise threshold (2^(n-k) - 1) / 2^n of the pure-state projector witness."""
    if not 2 <= kappa_max <= n:
        raise ValueError(f"need 2 <= kappa_max <= n, got n={n}, kappa_max={kappa_max}")
    return Fraction((1 << (n - kappa_max)) - 1, 1 << n)


@dataclass(frozen=True)
class WitnessSpec:
    """W = alpha * 1 - |H><H| with alpha fixed by the largest edge order."""

    hypergraph: Hypergraph
    kappa_max: int
    alpha: Fraction

    @classmethod
    def for_hypergraph(cls, h: Hypergraph) -> "WitnessSpec":
        k = h.max_order
        return cls(h, k, witness_alpha(k))

    def matrix(self) -> np.ndarray:
        from .statevec import build_state
        d = 1 << self.hypergraph.n
        return float(self.alpha) * np.eye(d) - build_state(self.hypergraph).projector().real


def witness_expectation(h: Hypergraph) -> RationalPolynomial:
    """tr(W rho_H^P) = alpha - O(P)."""
    return witness_alpha(h.max_order) - overlap_polynomial(h)


class ThresholdError(ValueError):
    """The witness never changes sign on [0, 1]."""


@dataclass(frozen=True)
class CriticalProbability:
    value: float
    monotone: bool
    polynomial: RationalPolynomial


_PATH_KEY = 0  # variable key of the bound path p = p2 = p3 = ...


def _single_variable(h: Hypergraph) -> tuple[RationalPolynomial, RationalPolynomial]:
    w = witness_expectation(h).bind(_PATH_KEY)
    o = overlap_polynomial(h).bind(_PATH_KEY)
    return w, o


def _bisect(f, lo: Fraction, hi: Fraction, tol: float) -> Fraction:
    flo = f(lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = f(mid)
        if (fm > 0) == (flo > 0) and fm != 0:
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def critical_probability(h: Hypergraph, tol: float = 1e-9) -> CriticalProbability:
    """Smallest p in [0, 1] where alpha - O(p) turns negative, p = p2 = p3 = ...

    Monotonicity of O is checked on a 0.01 grid through its derivative; when
    it fails, roots are isolated by scanning for sign changes at 1e-4.
    """
    if not h.randomizable_edges:
        raise ThresholdError("hypergraph has no randomizable edge")
    w, o = _single_variable(h)
    f = lambda x: w({_PATH_KEY: x})  # noqa: E731
    do = o.derivative(_PATH_KEY).float_function(_PATH_KEY)
    monotone = all(do(i / 100) >= -1e-12 for i in range(101))
    if f(Fraction(0)) <= 0:
        return CriticalProbability(0.0, monotone, w)
    if f(Fraction(1)) >= 0:
        raise ThresholdError("witness expectation never becomes negative on [0, 1]")
    lo, hi = Fraction(0), Fraction(1)
    if not monotone:
        ff = w.float_function(_PATH_KEY)
        steps = 10_000
        prev = ff(0.0)
        for i in range(1, steps + 1):
            cur = ff(i / steps)
            if prev > 0 >= cur:
                lo, hi = Fraction(i - 1, steps), Fraction(i, steps)
                break
            prev = cur
    return CriticalProbability(float(_bisect(f, lo, hi, tol)), monotone, w)
