"""Genuine multipartite negativity via fully decomposable witnesses.

The PPT-mixer program minimizes tr(W rho) over Hermitian W such that for
every bipartition M there are P_M, Q_M >= 0 with W = P_M + Q_M^{T_M}.
Two normalizations are offered:

* ``"trace"``:   tr W = 1 (the default);
* ``"bounded"``: 0 <= P_M <= 1 and 0 <= Q_M <= 1.

The value ``|min(0, optimum)|`` is positive only for states that are not
PPT mixtures, hence genuinely multipartite entangled.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import ipm
from .entmeasures import Bipartition, all_bipartitions, eigenvalues_hermitian, partial_transpose
from .hypercore import CapacityError
from .statevec import DensityMatrix

MAX_GMN_QUBITS = 5
CERT_TOL = 1e-7
ZERO_CLAMP = 1e-9
NORMALIZATIONS = ("trace", "bounded")


class SdpError(RuntimeError):
    """Solver failed to reach an optimal point."""


@lru_cache(maxsize=None)
def _hermitian_basis(d: int, complex_part: bool, traceless: bool) -> sp.csc_matrix:
    """Orthonormal basis of (traceless) Hermitian d x d matrices, row-major vec."""
    rows, cols, vals = [], [], []
    col = 0
    if traceless:
        q, _ = np.linalg.qr(np.column_stack([np.ones(d), np.eye(d)[:, : d - 1]]))
        diag = q[:, 1:]
        for k in range(d - 1):
            for i in range(d):
                if abs(diag[i, k]) > 1e-15:
                    rows.append(i * d + i)
                    cols.append(col)
                    vals.append(diag[i, k])
            col += 1
    else:
        for i in range(d):
            rows.append(i * d + i)
            cols.append(col)
            vals.append(1.0)
            col += 1
    r = 1 / np.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            rows += [i * d + j, j * d + i]
            cols += [col, col]
            vals += [r, r]
            col += 1
    if complex_part:
        for i in range(d):
            for j in range(i + 1, d):
                rows += [i * d + j, j * d + i]
                cols += [col, col]
                vals += [1j * r, -1j * r]
                col += 1
    dtype = complex if complex_part else float
    return sp.csc_matrix((np.array(vals, dtype=dtype), (rows, cols)), shape=(d * d, col))


@lru_cache(maxsize=None)
def _pt_permutation(n: int, mask: int) -> np.ndarray:
    d = 1 << n
    idx = np.arange(d * d).reshape(d, d)
    return partial_transpose(idx, n, mask).reshape(-1)


@dataclass
class SdpProblem:
    rho: DensityMatrix
    bipartitions: list[Bipartition]
    normalization: str = "trace"
    tol: float = 1e-10
    max_iter: int = 100

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        if self.rho.n < 2:
            raise ValueError("GMN needs at least two qubits (no bipartition exists)")
        if self.rho.n > MAX_GMN_QUBITS:
            raise CapacityError(f"{self.rho.n} qubits exceed the GMN cap of {MAX_GMN_QUBITS}")
        if not self.bipartitions:
            raise ValueError("bipartition list is empty")
        for bp in self.bipartitions:
            if bp.n != self.rho.n:
                raise ValueError(f"bipartition {bp} does not match {self.rho.n} qubits")
        if len(set(self.bipartitions)) != len(self.bipartitions):
            raise ValueError("bipartition list has duplicates")

    @classmethod
    def full(cls, rho: DensityMatrix, normalization: str = "trace", **kw) -> "SdpProblem":
        return cls(rho, all_bipartitions(rho.n), normalization, **kw)


@dataclass
class SdpSolution:
    status: str
    objective: float
    witness: np.ndarray
    P: list[np.ndarray]
    Q: list[np.ndarray]
    bipartitions: list[Bipartition]
    normalization: str
    duality_gap: float
    iterations: int
    info: dict = field(default_factory=dict)

    @property
    def gmn(self) -> float:
        return clamp_gmn(self.objective)


def clamp_gmn(objective: float) -> float:
    """|min(0, objective)|, reported as exactly 0 within 1e-9 of zero."""
    if objective > -ZERO_CLAMP:
        return 0.0
    return -objective


def solve_sdp(prob: SdpProblem) -> SdpSolution:
    """Minimize tr(W rho) over fully decomposable W (see module docstring)."""
    rho = prob.rho.data
    n, d = prob.rho.n, prob.rho.dim
    use_complex = bool(np.max(np.abs(rho.imag)) > 1e-14)
    trace_mode = prob.normalization == "trace"
    EW = _hermitian_basis(d, use_complex, trace_mode)
    EQ = _hermitian_basis(d, use_complex, False)
    mW, mQ = EW.shape[1], EQ.shape[1]
    nb = len(prob.bipartitions)
    w_idx = np.arange(mW)
    q_idx = [mW + k * mQ + np.arange(mQ) for k in range(nb)]
    dtype = complex if use_complex else float
    zero = np.zeros((d, d), dtype=dtype)
    eye = np.eye(d, dtype=dtype)
    W0 = eye / d if trace_mode else zero

    blocks: list[ipm.Block] = []
    for k, bp in enumerate(prob.bipartitions):
        EQpt = EQ[_pt_permutation(n, bp.mask), :]
        var = np.concatenate([w_idx, q_idx[k]])
        # P_M = W - Q^T_M
        blocks.append(ipm.Block(W0.copy(), sp.hstack([-EW, EQpt]).tocsc(), var))
        blocks.append(ipm.Block(zero.copy(), (-EQ).tocsc(), q_idx[k]))
        if not trace_mode:
            blocks.append(ipm.Block(eye.copy(), sp.hstack([EW, -EQpt]).tocsc(), var))
            blocks.append(ipm.Block(eye.copy(), EQ.tocsc(), q_idx[k]))
    b = np.zeros(mW + nb * mQ)
    b[:mW] = -np.real(EW.conj().T @ rho.reshape(-1))
    res = ipm.solve(blocks, b, groups=[w_idx] + q_idx, tol=prob.tol, max_iter=prob.max_iter)

    y = res.y
    W = W0 + (EW @ y[w_idx]).reshape(d, d)
    W = (W + W.conj().T) / 2
    per = 4 if not trace_mode else 2
    P = [res.Z[per * k] for k in range(nb)]
    Q = [(EQ @ y[q_idx[k]]).reshape(d, d) for k in range(nb)]
    objective = float(np.real(np.trace(W @ rho)))
    if res.status != "optimal":
        raise SdpError(
            f"SDP solver stopped with status {res.status!r} after {res.iterations} "
            f"iterations (gap {res.gap:.2e}, primal inf {res.primal_infeasibility:.2e}, "
            f"dual inf {res.dual_infeasibility:.2e})")
    return SdpSolution(
        status=res.status, objective=objective, witness=W, P=P, Q=Q,
        bipartitions=list(prob.bipartitions), normalization=prob.normalization,
        duality_gap=res.gap, iterations=res.iterations,
        info={"primal_objective": res.primal_objective, "dual_objective": res.dual_objective,
              "primal_infeasibility": res.primal_infeasibility,
              "dual_infeasibility": res.dual_infeasibility})


def gmn(rho: DensityMatrix, normalization: str = "trace") -> float:
    """PPT-mixer GMN over all bipartitions."""
    return solve_sdp(SdpProblem.full(rho, normalization)).gmn


# -- certificates -----------------------------------------------------------

@dataclass
class CertificateReport:
    ok: bool
    min_eig_P: list[float]
    min_eig_Q: list[float]
    decomposition_residual: list[float]
    normalization_error: float
    messages: list[str]


def check_certificate(sol: SdpSolution, tol: float = CERT_TOL, method: str = "jacobi") -> CertificateReport:
    """Re-verify W = P_M + Q_M^T_M, P_M, Q_M >= 0 and the normalization."""
    n = sol.bipartitions[0].n
    d = 1 << n
    min_p, min_q, resid, msgs = [], [], [], []
    W = sol.witness
    for bp, P, Q in zip(sol.bipartitions, sol.P, sol.Q):
        lp = eigenvalues_hermitian((P + P.conj().T) / 2, method=method)
        lq = eigenvalues_hermitian((Q + Q.conj().T) / 2, method=method)
        r = float(np.max(np.abs(W - (P + partial_transpose(Q, n, bp.mask)))))
        min_p.append(float(lp[-1]))
        min_q.append(float(lq[-1]))
        resid.append(r)
        if lp[-1] < -tol:
            msgs.append(f"P for {bp} has eigenvalue {lp[-1]:.3g}")
        if lq[-1] < -tol:
            msgs.append(f"Q for {bp} has eigenvalue {lq[-1]:.3g}")
        if r > tol:
            msgs.append(f"decomposition residual {r:.3g} for {bp}")
        if sol.normalization == "bounded":
            if lp[0] > 1 + tol or lq[0] > 1 + tol:
                msgs.append(f"operator bound violated for {bp}")
    if sol.normalization == "trace":
        norm_err = abs(float(np.real(np.trace(W))) - 1.0)
    else:
        norm_err = max(max(0.0, float(eigenvalues_hermitian(P, method=method)[0]) - 1) for P in sol.P)
    if norm_err > tol:
        msgs.append(f"normalization off by {norm_err:.3g}")
    _ = d
    return CertificateReport(not msgs, min_p, min_q, resid, norm_err, msgs)


@dataclass
class WitnessReport:
    decomposable: bool
    margins: list[float]
    bipartitions: list[Bipartition]
    P: list[np.ndarray]
    Q: list[np.ndarray]
    messages: list[str]


def verify_witness(W: np.ndarray, bipartitions: Sequence[Bipartition],
                   tol: float = CERT_TOL) -> WitnessReport:
    """Search, per bipartition, for W = P + Q^T_M with P, Q >= 0.

    Each search maximizes t subject to W - Q^T_M >= t*1 and Q >= t*1; the
    optimal t is the margin, and W decomposes across M iff t >= -tol.
    """
    W = np.asarray(W)
    d = W.shape[0]
    n = int(round(np.log2(d)))
    if W.shape != (d, d) or (1 << n) != d:
        raise ValueError(f"witness shape {W.shape} is not a qubit operator")
    if np.max(np.abs(W - W.conj().T)) > 1e-10:
        raise ValueError("witness is not Hermitian")
    use_complex = bool(np.max(np.abs(W.imag)) > 1e-14) if np.iscomplexobj(W) else False
    dtype = complex if use_complex else float
    Wc = ((W + W.conj().T) / 2).astype(dtype) if use_complex else np.real((W + W.conj().T) / 2)
    EQ = _hermitian_basis(d, use_complex, False)
    mQ = EQ.shape[1]
    eye_vec = sp.csc_matrix(np.eye(d).reshape(-1, 1))
    margins, Ps, Qs, msgs = [], [], [], []
    for bp in bipartitions:
        EQpt = EQ[_pt_permutation(n, bp.mask), :]
        var = np.arange(1 + mQ)
        blocks = [
            ipm.Block(Wc.copy(), sp.hstack([eye_vec, EQpt]).tocsc(), var),
            ipm.Block(np.zeros((d, d), dtype=dtype), sp.hstack([eye_vec, -EQ]).tocsc(), var),
        ]
        b = np.zeros(1 + mQ)
        b[0] = 1.0
        res = ipm.solve(blocks, b, tol=1e-10)
        if res.status != "optimal":
            msgs.append(f"decomposition search for {bp} ended with status {res.status}")
        t = float(res.y[0])
        Q = (EQ @ res.y[1:]).reshape(d, d)
        P = W - partial_transpose(Q, n, bp.mask)
        margins.append(t)
        Ps.append(P)
        Qs.append(Q)
        if t < -tol:
            msgs.append(f"no decomposition across {bp} (margin {t:.3g})")
    ok = not msgs
    return WitnessReport(ok, margins, list(bipartitions), Ps, Qs, msgs)
