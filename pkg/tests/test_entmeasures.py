import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kron_partial_transpose, random_density
from hyperent.entmeasures import (
    Bipartition,
    all_bipartitions,
    eigenvalues_hermitian,
    is_ppt,
    jacobi_eigh,
    min_pt_eigenvalue,
    negativity,
    negativity_trace_norm,
    partial_transpose,
)
from hyperent.hypercore import family
from hyperent.randomizer import RandomizationParams, randomize, randomized_density
from hyperent.statevec import DensityMatrix, SignState, build_state


def pure(h) -> DensityMatrix:
    return DensityMatrix.from_state(build_state(h))


def gram_negativity(state: SignState) -> float:
    """Schmidt route for a {1}|rest cut: N = ((s0 + s1)^2 - 1) / 2.

    Splitting |psi> = |0>|a> + |1>|b> (qubit 1 is bit 0), the Schmidt
    coefficients squared are the eigenvalues of the 2x2 Gram matrix of a, b.
    """
    v = state.amplitudes()
    a, b = v[0::2], v[1::2]
    gram = np.array([[a @ a, a @ b], [b @ a, b @ b]])
    lam = np.clip(np.linalg.eigvalsh(gram), 0, None)
    s = np.sqrt(lam)
    return ((s[0] + s[1]) ** 2 - 1) / 2


# -- bipartitions -------------------------------------------------------------

def test_bipartition_canonical_and_parse():
    a = Bipartition.parse("1|2,3,4", 4)
    b = Bipartition.parse("2,3,4|1", 4)
    c = Bipartition.parse("1", 4)
    assert a == b == c
    assert str(a) == "1|2,3,4"
    assert Bipartition.from_side(4, [4]) == Bipartition.from_side(4, [1, 2, 3])
    assert len(all_bipartitions(4)) == 7
    assert len(set(all_bipartitions(5))) == 15
    for bad in ("1|2,3", "1,2,3,4|", "|", "1|1,2,3,4", "x|2"):
        with pytest.raises(ValueError):
            Bipartition.parse(bad, 4)


# -- partial transpose --------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_partial_transpose_matches_entrywise_oracle(n, rng):
    rho = random_density(n, rng)
    for bp in all_bipartitions(n):
        for side in bp.sides():
            got = partial_transpose(rho, n, list(side))
            np.testing.assert_array_equal(got, kron_partial_transpose(rho, n, set(side)))


def test_partial_transpose_properties(rng):
    rho = random_density(3, rng)
    t = partial_transpose(rho, 3, [1, 3])
    np.testing.assert_array_equal(partial_transpose(t, 3, [1, 3]), rho)
    assert np.trace(t) == pytest.approx(np.trace(rho))
    np.testing.assert_allclose(t, t.conj().T, atol=1e-15)
    with pytest.raises(ValueError):
        partial_transpose(rho, 3, 0b1000)
    with pytest.raises(ValueError):
        partial_transpose(rho, 2, 1)


def test_product_state_pt_spectrum_unchanged(rng):
    ra, rb = random_density(1, rng), random_density(2, rng)
    rho = np.kron(rb, ra)  # qubit 1 is the last kron factor
    lam = np.sort(np.linalg.eigvalsh(rho))
    lam_t = np.sort(np.linalg.eigvalsh(partial_transpose(rho, 3, [1])))
    np.testing.assert_allclose(lam, lam_t, atol=1e-14)


def test_h14_pt_has_negative_eigenvalue(h14):
    assert min_pt_eigenvalue(pure(h14), [1]) < -0.1


# -- eigen-solvers ------------------------------------------------------------

def test_eigen_examples():
    np.testing.assert_allclose(eigenvalues_hermitian(np.eye(4) / 4, "jacobi"), [0.25] * 4)
    np.testing.assert_allclose(eigenvalues_hermitian(np.diag([3.0, 1, -1]), "jacobi"), [3, 1, -1])
    with pytest.raises(ValueError, match="Hermitian"):
        eigenvalues_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        eigenvalues_hermitian(np.eye(2), method="qr")


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8, 16, 33, 64])
def test_jacobi_against_lapack(d, rng):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = m + m.conj().T
    lam, vec = jacobi_eigh(m, vectors=True)
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(m), atol=1e-11 * np.linalg.norm(m))
    resid = np.linalg.norm(m @ vec - vec * lam, axis=0)
    assert np.max(resid) <= 1e-9 * np.linalg.norm(m)
    assert abs(np.sum(lam) - np.trace(m).real) < 1e-10
    np.testing.assert_allclose(vec.conj().T @ vec, np.eye(d), atol=1e-12)


def test_jacobi_degenerate_and_real(rng):
    q, _ = np.linalg.qr(rng.normal(size=(8, 8)))
    m = q @ np.diag([2, 2, 2, 1, 1, 0, 0, -1.0]) @ q.T
    np.testing.assert_allclose(jacobi_eigh(m), [-1, 0, 0, 1, 1, 2, 2, 2], atol=1e-12)


def test_spectrum_equals_weighted_gram(h14):
    ens = randomize(h14, RandomizationParams({3: 0.4}))
    amps = np.stack([b.state.amplitudes() for b in ens])
    w = ens.weights
    # sum_F w_F |F><F| and sqrt(w) G sqrt(w) share their nonzero spectrum
    gram = np.sqrt(w)[:, None] * (amps @ amps.T) * np.sqrt(w)[None, :]
    rho = (amps.T * w) @ amps
    lam_rho = eigenvalues_hermitian(rho, "jacobi")
    lam_gram = eigenvalues_hermitian(gram, "jacobi")
    np.testing.assert_allclose(lam_rho, lam_gram, atol=1e-12)


# -- negativity ---------------------------------------------------------------

@pytest.mark.parametrize("bp", all_bipartitions(4), ids=str)
def test_zero_at_p_zero(h14, bp):
    rho = randomized_density(h14, RandomizationParams({3: 0}))
    assert negativity(rho, bp) == 0.0
    assert is_ppt(rho, bp)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_anchor_values(h14, method):
    rho = pure(h14)
    assert negativity(rho, "1|2,3,4", method) == pytest.approx(0.5, abs=1e-9)
    assert negativity_trace_norm(rho, [1]) == pytest.approx(0.5, abs=1e-9)
    assert gram_negativity(build_state(h14)) == pytest.approx(0.5, abs=1e-12)
    e3 = family("single-edge", 4)
    assert negativity(pure(e3), [1], method) == pytest.approx(np.sqrt(7) / 8, abs=1e-9)
    assert gram_negativity(build_state(e3)) == pytest.approx(np.sqrt(7) / 8, abs=1e-12)


def test_h14_not_ppt_anywhere(h14):
    assert not any(is_ppt(pure(h14), bp) for bp in all_bipartitions(4))
    assert is_ppt(DensityMatrix(4, np.eye(16) / 16), [1, 2])


def test_separable_mixture_is_ppt(rng):
    rho = np.zeros((8, 8), dtype=complex)
    for w in (0.2, 0.3, 0.5):
        rho += w * np.kron(random_density(2, rng, rank=1), random_density(1, rng, rank=1))
    dm = DensityMatrix(3, rho)
    assert is_ppt(dm, [1]) and negativity(dm, [1]) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_formula_agreement_random(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        rho = DensityMatrix(n, random_density(n, rng, rank=int(rng.integers(1, 4))))
        bp = all_bipartitions(n)[int(rng.integers(0, (1 << (n - 1)) - 1))]
        a = negativity(rho, bp)
        assert a == pytest.approx(negativity_trace_norm(rho, bp), abs=1e-9)
        assert a == pytest.approx(negativity(rho, bp, "jacobi"), abs=1e-9)
        # either side may be transposed
        assert a == pytest.approx(negativity(rho, list(bp.sides()[1])), abs=1e-12)


def test_convexity(rng):
    for _ in range(20):
        r1 = DensityMatrix(3, random_density(3, rng, rank=1))
        r2 = DensityMatrix(3, random_density(3, rng, rank=2))
        t = float(rng.uniform())
        mix = DensityMatrix(3, t * r1.data + (1 - t) * r2.data)
        assert negativity(mix, [2]) <= t * negativity(r1, [2]) + (1 - t) * negativity(r2, [2]) + 1e-12


def test_h14_negativity_monotone(h14):
    values = [negativity(randomized_density(h14, RandomizationParams({3: k / 20})), [1])
              for k in range(21)]
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(0.5)


@given(st.integers(2, 4), st.data())
@settings(max_examples=30, deadline=None)
def test_negativity_nonnegative(n, data):
    seed = data.draw(st.integers(0, 10_000))
    rho = DensityMatrix(n, random_density(n, np.random.default_rng(seed)))
    for bp in all_bipartitions(n):
        assert negativity(rho, bp) >= 0
