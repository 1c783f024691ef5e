import numpy as np
import pytest

from conftest import biseparable_states, random_density
from hyperent.entmeasures import Bipartition, all_bipartitions, partial_transpose
from hyperent.gmn import (
    SdpError,
    SdpProblem,
    check_certificate,
    clamp_gmn,
    gmn,
    solve_sdp,
    verify_witness,
)
from hyperent.hypercore import CapacityError, Hypergraph, clover, family
from hyperent.randomizer import RandomizationParams, randomized_density
from hyperent.statevec import DensityMatrix, build_state

cp = pytest.importorskip("cvxpy")


def pure(h):
    return DensityMatrix.from_state(build_state(h))


def cvxpy_pptmixer(rho: np.ndarray, n: int, mode: str, bipartitions=None) -> float:
    """Same program written directly in cvxpy and solved by Clarabel."""
    d = 1 << n
    hermitian = bool(np.max(np.abs(rho.imag)) > 1e-14)
    make = (lambda: cp.Variable((d, d), hermitian=True)) if hermitian else (
        lambda: cp.Variable((d, d), symmetric=True))
    W = make()
    cons = []
    for bp in bipartitions or all_bipartitions(n):
        Q = make()
        perm = partial_transpose(np.arange(d * d).reshape(d, d), n, bp.mask).reshape(-1)
        Qt = cp.reshape(cp.vec(Q, order="C")[perm], (d, d), order="C")
        P = W - Qt
        cons += [P >> 0, Q >> 0]
        if mode == "bounded":
            cons += [np.eye(d) - P >> 0, np.eye(d) - Q >> 0]
    re = cp.real if hermitian else (lambda e: e)
    if mode == "trace":
        cons.append(re(cp.trace(W)) == 1)
    data = rho if hermitian else rho.real
    prob = cp.Problem(cp.Minimize(re(cp.trace(W @ data))), cons)
    prob.solve(solver="CLARABEL")
    return float(prob.value)


CASES = [
    ("clover3", lambda: pure(clover(3))),
    ("H14", lambda: pure(Hypergraph.from_edges(4, [(1, 2, 3), (2, 3, 4), (3, 4, 1), (4, 1, 2)]))),
    ("single-edge4", lambda: pure(family("single-edge", 4))),
    ("demo p=(0.6,0.8)", lambda: randomized_density(
        Hypergraph.from_edges(4, [(1, 2), (1, 2, 3, 4)]), RandomizationParams({2: 0.6, 4: 0.8}))),
    ("H14 p3=0.5", lambda: randomized_density(
        Hypergraph.from_edges(4, [(1, 2, 3), (2, 3, 4), (3, 4, 1), (4, 1, 2)]), RandomizationParams({3: 0.5}))),
]


@pytest.mark.parametrize("mode", ["trace", "bounded"])
@pytest.mark.parametrize("name, make", CASES, ids=[c[0] for c in CASES])
def test_objective_matches_cvxpy(name, make, mode):
    rho = make()
    sol = solve_sdp(SdpProblem.full(rho, mode))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(cvxpy_pptmixer(rho.data, rho.n, mode), abs=2e-6)
    assert check_certificate(sol).ok


def test_complex_state_matches_cvxpy(rng):
    rho = DensityMatrix(3, random_density(3, rng, rank=1))
    sol = solve_sdp(SdpProblem.full(rho, "trace"))
    assert np.iscomplexobj(sol.witness)
    assert sol.objective == pytest.approx(cvxpy_pptmixer(rho.data, 3, "trace"), abs=2e-6)
    assert check_certificate(sol).ok


def test_regression_values(h14):
    # pinned after cross-checking against the cvxpy formulation above
    assert gmn(pure(h14), "trace") == pytest.approx(0.0718008290, abs=1e-7)
    assert gmn(pure(h14), "bounded") == pytest.approx(0.5, abs=1e-7)
    assert gmn(pure(family("single-edge", 4)), "trace") == pytest.approx(0.0474620287, abs=1e-7)


def test_single_bipartition_reduces_to_pt_spectrum(rng):
    # one cut: min tr[(P + Q^T) rho] over tr P + tr Q = 1 is min(lambda_min(rho), lambda_min(rho^T))
    for n, real in ((2, True), (3, False)):
        rho = random_density(n, rng, rank=2, real=real)
        bp = all_bipartitions(n)[0]
        sol = solve_sdp(SdpProblem(DensityMatrix(n, rho), [bp], "trace"))
        want = min(np.linalg.eigvalsh(rho)[0], np.linalg.eigvalsh(partial_transpose(rho, n, bp.mask))[0])
        assert sol.objective == pytest.approx(want, abs=1e-7)
    star2 = pure(family("star", 2))
    sol = solve_sdp(SdpProblem.full(star2, "trace"))
    assert sol.objective == pytest.approx(-0.5, abs=1e-7)


def test_maximally_mixed():
    sol = solve_sdp(SdpProblem.full(DensityMatrix(3, np.eye(8) / 8), "trace"))
    assert sol.objective >= 0
    assert sol.gmn == 0.0


@pytest.mark.parametrize("idx", [0, 4, 11, 16])
def test_ppt_mixtures_give_zero(idx):
    name, rho = biseparable_states()[idx]
    for mode in ("trace", "bounded"):
        sol = solve_sdp(SdpProblem.full(rho, mode))
        assert sol.gmn == 0.0, name
        assert check_certificate(sol).ok


def test_trace_mode_bounded_by_one(rng):
    for _ in range(3):
        rho = DensityMatrix(3, random_density(3, rng, rank=1))
        assert 0 <= gmn(rho, "trace") <= 1


def test_clamp():
    assert clamp_gmn(-5e-10) == 0.0
    assert clamp_gmn(0.3) == 0.0
    assert clamp_gmn(-0.25) == 0.25


def test_verify_witness(h14):
    bps = all_bipartitions(4)
    ok = verify_witness(np.eye(16) / 16, bps)
    assert ok.decomposable and min(ok.margins) > 0
    bad = verify_witness(-np.eye(16), bps)
    assert not bad.decomposable
    sol = solve_sdp(SdpProblem.full(pure(h14), "trace"))
    rep = verify_witness(sol.witness, bps)
    assert rep.decomposable, rep.messages
    for bp, P, Q in zip(bps, rep.P, rep.Q):
        np.testing.assert_allclose(P + partial_transpose(Q, 4, bp.mask), sol.witness, atol=1e-9)
    with pytest.raises(ValueError):
        verify_witness(np.array([[0, 1], [0, 0]]), [Bipartition(1 + 1, 1)])


def test_certificate_detects_tampering(h14):
    sol = solve_sdp(SdpProblem.full(pure(h14), "trace"))
    assert check_certificate(sol).ok
    sol.P[0] = sol.P[0] - 1e-3 * np.eye(16)
    rep = check_certificate(sol)
    assert not rep.ok and rep.messages


def test_problem_validation(h14):
    rho = pure(h14)
    with pytest.raises(ValueError, match="two qubits"):
        SdpProblem.full(DensityMatrix(1, np.eye(2) / 2))
    with pytest.raises(CapacityError):
        SdpProblem.full(DensityMatrix(6, np.eye(64) / 64))
    with pytest.raises(ValueError, match="empty"):
        SdpProblem(rho, [])
    with pytest.raises(ValueError, match="duplicates"):
        SdpProblem(rho, [Bipartition(4, 1), Bipartition(4, 0b1110)])
    with pytest.raises(ValueError, match="normalization"):
        SdpProblem.full(rho, "unit")


def test_non_convergence_is_reported(h14):
    with pytest.raises(SdpError, match="status"):
        solve_sdp(SdpProblem.full(pure(h14), "trace", max_iter=2))
