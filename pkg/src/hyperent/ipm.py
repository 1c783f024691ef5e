"""Dense primal-dual interior-point solver for block semidefinite programs.

Solves the pair

    (D)  maximize  b.y   s.t.  Z_j = C_j - sum_i y_i A_ji  >= 0   for every block j
    (P)  minimize  sum_j <C_j, X_j>   s.t.  sum_j <A_ji, X_j> = b_i,  X_j >= 0

with Hermitian (real or complex) blocks, Nesterov-Todd scaling and a
Mehrotra predictor-corrector.  Variables may be split into a hub group and
leaf groups such that every block touches the hub and at most one leaf;
the Schur complement then has arrow structure and is solved blockwise.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

log = logging.getLogger(__name__)


@dataclass
class Block:
    """One LMI block: ``C - sum_k y[var_idx[k]] * unvec(A[:, k])``.

    ``A`` holds row-major vectorized coefficient matrices as columns.
    """

    C: np.ndarray
    A: sp.csc_matrix
    var_idx: np.ndarray

    @property
    def dim(self) -> int:
        return self.C.shape[0]


@dataclass
class IpmResult:
    status: str
    y: np.ndarray
    X: list[np.ndarray]
    Z: list[np.ndarray]
    primal_objective: float
    dual_objective: float
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    history: list[tuple[float, float, float]] = field(default_factory=list)


class SolverError(RuntimeError):
    pass


def _vec(m: np.ndarray) -> np.ndarray:
    return m.reshape(-1)


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _cho(a: np.ndarray):
    """Cholesky factor, adding a growing diagonal shift if ``a`` is only
    numerically semidefinite; the CG loop in :meth:`_Layout.solve` absorbs
    the shift."""
    try:
        return sla.cho_factor(a)
    except np.linalg.LinAlgError:
        pass
    scale = max(float(np.max(np.abs(np.diag(a)))), 1e-300)
    shift = 1e-15
    while shift < 1e-2:
        try:
            return sla.cho_factor(a + shift * scale * np.eye(a.shape[0]))
        except np.linalg.LinAlgError:
            shift *= 10
    raise np.linalg.LinAlgError("Schur complement is not positive definite")


class _Layout:
    """Index bookkeeping for the hub/leaf split of the variables."""

    def __init__(self, m: int, blocks: list[Block], groups: list[np.ndarray] | None):
        if groups is None:
            groups = [np.arange(m)]
        self.groups = [np.asarray(g, dtype=int) for g in groups]
        owner = np.full(m, -1)
        pos = np.zeros(m, dtype=int)
        for gi, g in enumerate(self.groups):
            if np.any(owner[g] >= 0):
                raise ValueError("variable groups overlap")
            owner[g] = gi
            pos[g] = np.arange(g.size)
        if np.any(owner < 0):
            raise ValueError("variable groups do not cover every variable")
        self.owner, self.pos = owner, pos
        self.var_idx = [blk.var_idx for blk in blocks]
        self.block_maps = []
        for blk in blocks:
            own = owner[blk.var_idx]
            leaves = set(own[own > 0].tolist())
            if len(leaves) > 1:
                raise ValueError("a block touches more than one leaf group")
            leaf = leaves.pop() if leaves else None
            hub_local = np.flatnonzero(own == 0)
            leaf_local = np.flatnonzero(own > 0)
            self.block_maps.append((
                hub_local, pos[blk.var_idx[hub_local]],
                leaf, leaf_local, pos[blk.var_idx[leaf_local]],
            ))

    def factor(self, blocks_M: list[np.ndarray]):
        groups = self.groups
        h = groups[0].size
        H = np.zeros((h, h))
        B = [np.zeros((h, g.size)) for g in groups]
        D = [np.zeros((g.size, g.size)) for g in groups]
        for (hl, hg, leaf, ll, lg), Mj in zip(self.block_maps, blocks_M):
            H[np.ix_(hg, hg)] += Mj[np.ix_(hl, hl)]
            if leaf is not None:
                B[leaf][np.ix_(hg, lg)] += Mj[np.ix_(hl, ll)]
                D[leaf][np.ix_(lg, lg)] += Mj[np.ix_(ll, ll)]
        S = H.copy()
        factors = {}
        DinvBt = {}
        for leaf in range(1, len(groups)):
            cf = _cho(D[leaf])
            factors[leaf] = cf
            DinvBt[leaf] = sla.cho_solve(cf, B[leaf].T)
            S -= B[leaf] @ DinvBt[leaf]
        S = (S + S.T) / 2
        s_factor = _cho(S) if h else None
        self._fact = (B, factors, DinvBt, s_factor)
        self._blocks_M = blocks_M

    def _solve_once(self, rhs: np.ndarray) -> np.ndarray:
        groups = self.groups
        B, factors, DinvBt, s_factor = self._fact
        r_hub = rhs[groups[0]].copy()
        for leaf in range(1, len(groups)):
            r_hub -= DinvBt[leaf].T @ rhs[groups[leaf]]
        out = np.zeros_like(rhs)
        y_hub = sla.cho_solve(s_factor, r_hub) if s_factor is not None else np.zeros(0)
        out[groups[0]] = y_hub
        for leaf in range(1, len(groups)):
            out[groups[leaf]] = sla.cho_solve(factors[leaf], rhs[groups[leaf]] - B[leaf].T @ y_hub)
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        for var_idx, Mj in zip(self.var_idx, self._blocks_M):
            np.add.at(out, var_idx, Mj @ x[var_idx])
        return out

    def solve(self, rhs: np.ndarray, matvec=None, rtol: float = 1e-13, max_iter: int = 30) -> np.ndarray:
        """Solve M x = rhs by CG preconditioned with the (possibly shifted) factor.

        ``matvec`` (default: the assembled M) is the exact operator; with an
        unshifted factor CG stops after one or two steps.
        """
        matvec = matvec or self.matvec
        x = self._solve_once(rhs)
        nb = np.linalg.norm(rhs)
        if nb == 0:
            return x
        r = rhs - matvec(x)
        z = self._solve_once(r)
        p = z.copy()
        rz = r @ z
        best = np.linalg.norm(r)
        for _ in range(max_iter):
            if best <= rtol * nb or rz <= 0:
                break
            Ap = matvec(p)
            pAp = p @ Ap
            if pAp <= 0:
                break
            a = rz / pAp
            x = x + a * p
            r = r - a * Ap
            res = np.linalg.norm(r)
            if res > 0.5 * best and res <= 1e3 * rtol * nb:
                break  # stagnating at round-off level
            best = min(best, res)
            z = self._solve_once(r)
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        return x


def _max_step(lam: np.ndarray, T: np.ndarray, dS: np.ndarray) -> float:
    """Largest alpha with diag(lam) + alpha * T dS T^H >= 0 (lam > 0)."""
    t = T @ dS @ T.conj().T
    s = 1 / np.sqrt(lam)
    t = _herm(s[:, None] * t * s[None, :])
    mn = np.linalg.eigvalsh(t)[0]
    return np.inf if mn >= 0 else -1.0 / mn


def solve(blocks: list[Block], b: np.ndarray, groups: list[np.ndarray] | None = None,
          tol: float = 1e-10, gap_tol: float = 1e-6, max_iter: int = 100) -> IpmResult:
    """Run the interior-point method.

    Stops when relative gap and both relative infeasibilities fall below
    ``tol``.  The best iterate seen is returned; if the run stalls (no
    halving of the merit in five iterations) or hits a numerical failure,
    that iterate is still reported ``"optimal"`` provided <X, Z> and both
    relative infeasibilities are at most ``gap_tol``.  Otherwise the status
    is ``"stalled"``, ``"max-iterations"`` or ``"numerical-failure"``.
    """
    b = np.asarray(b, dtype=float)
    m = b.size
    if not blocks:
        raise ValueError("SDP needs at least one block")
    for blk in blocks:
        if blk.A.shape != (blk.dim ** 2, blk.var_idx.size):
            raise ValueError("block coefficient matrix has the wrong shape")
    layout = _Layout(m, blocks, groups)
    dtype = complex if any(np.iscomplexobj(blk.C) or np.iscomplexobj(blk.A.data) for blk in blocks) else float
    AH = [blk.A.conj().T.tocsr() for blk in blocks]
    N = sum(blk.dim for blk in blocks)

    def A_op(Ys):  # sum_j <A_ji, Y_j>
        out = np.zeros(m)
        for blk, ah, Y in zip(blocks, AH, Ys):
            np.add.at(out, blk.var_idx, np.real(ah @ _vec(Y)))
        return out

    def AT_op(y):  # per block sum_i y_i A_ji
        return [(blk.A @ y[blk.var_idx]).reshape(blk.dim, blk.dim) for blk in blocks]

    norm_b = np.linalg.norm(b)
    norm_C = np.sqrt(sum(np.linalg.norm(blk.C) ** 2 for blk in blocks))
    a_norms = np.zeros(m)
    for blk in blocks:
        np.add.at(a_norms, blk.var_idx, np.asarray(abs(blk.A).power(2).sum(axis=0)).ravel())
    a_norms = np.sqrt(a_norms)
    X, Z = [], []
    for blk in blocks:
        d = blk.dim
        xi_p = max(1.0, np.sqrt(d), d * np.max((1 + np.abs(b)) / (1 + a_norms)))
        xi_d = max(1.0, np.sqrt(d), np.max(a_norms), np.linalg.norm(blk.C))
        X.append(xi_p * np.eye(d, dtype=dtype))
        Z.append(xi_d * np.eye(d, dtype=dtype))
    y = np.zeros(m)

    history = []
    status = "max-iterations"
    best = None
    stall = 0
    it = 0
    for it in range(1, max_iter + 1):
        ATy = AT_op(y)
        Rd = [blk.C - aty - Zj for blk, aty, Zj in zip(blocks, ATy, Z)]
        rp = b - A_op(X)
        pobj = float(sum(np.real(np.vdot(blk.C, Xj)) for blk, Xj in zip(blocks, X)))
        dobj = float(b @ y)
        gap = float(sum(np.real(np.vdot(Xj, Zj)) for Xj, Zj in zip(X, Z)))
        pinf = float(np.linalg.norm(rp) / (1 + norm_b))
        dinf = float(np.sqrt(sum(np.linalg.norm(r) ** 2 for r in Rd)) / (1 + norm_C))
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        merit = max(relgap, gap / (1 + abs(pobj) + abs(dobj)), pinf, dinf)
        history.append((gap, pinf, dinf))
        log.debug("it %d pobj %.10g dobj %.10g gap %.2e pinf %.2e dinf %.2e",
                  it, pobj, dobj, gap, pinf, dinf)
        if best is None or merit < 0.5 * best[0]:
            stall = 0
        else:
            stall += 1
        if best is None or merit < best[0]:
            best = (merit, [x.copy() for x in X], y.copy(), [z.copy() for z in Z])
        if merit < tol:
            status = "optimal"
            break
        if stall >= 5:
            status = "stalled"
            break
        mu = gap / N

        # Nesterov-Todd scaling point per block
        scal = []
        Ms = []
        try:
            for blk, Xj, Zj in zip(blocks, X, Z):
                L = np.linalg.cholesky(Xj)
                R = np.linalg.cholesky(Zj)
                U, lam, Vh = np.linalg.svd(R.conj().T @ L)
                G = L @ Vh.conj().T / np.sqrt(lam)[None, :]
                G_inv = (np.sqrt(lam)[:, None] * Vh) @ sla.solve_triangular(L, np.eye(blk.dim), lower=True)
                Wj = G @ G.conj().T
                Wj = _herm(Wj)
                scal.append((G, G_inv, Wj, lam))
                K = np.kron(Wj, Wj.T)
                KA = (blk.A.T @ K.T).T
                Mj = np.real(blk.A.conj().T @ KA)
                Ms.append((Mj + Mj.T) / 2)
            layout.factor(Ms)
        except np.linalg.LinAlgError:
            status = "numerical-failure"
            break

        def schur_op(v):
            return A_op([Wj @ a @ Wj for (_, _, Wj, _), a in zip(scal, AT_op(v))])

        def direction(Rs_list):
            # Rs_list: scaled complementarity right-hand sides
            Rc = []
            for (G, G_inv, Wj, lam), Rs in zip(scal, Rs_list):
                T = 2 * Rs / (lam[:, None] + lam[None, :])
                Rc.append(G @ T @ G.conj().T)
            WRW = [Wj @ R @ Wj for (G, G_inv, Wj, lam), R in zip(scal, Rd)]
            rhs = rp - A_op(Rc) + A_op(WRW)
            dy = layout.solve(rhs, matvec=schur_op)
            ATdy = AT_op(dy)
            dZ = [_herm(R - a) for R, a in zip(Rd, ATdy)]
            dX = [_herm(rc - Wj @ dz @ Wj) for rc, (G, G_inv, Wj, lam), dz in zip(Rc, scal, dZ)]
            return dX, dy, dZ

        def steps(dX, dZ):
            ap = ad = np.inf
            for (G, G_inv, Wj, lam), dx, dz in zip(scal, dX, dZ):
                ap = min(ap, _max_step(lam, G_inv, dx))
                ad = min(ad, _max_step(lam, G.conj().T, dz))
            return ap, ad

        # predictor
        Rs_aff = [-np.diag(lam ** 2).astype(dtype) for (_, _, _, lam) in scal]
        dXa, dya, dZa = direction(Rs_aff)
        ap, ad = steps(dXa, dZa)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = sum(np.real(np.vdot(Xj + ap * dx, Zj + ad * dz))
                     for Xj, Zj, dx, dz in zip(X, Z, dXa, dZa)) / N
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # corrector
        Rs = []
        for (G, G_inv, Wj, lam), dx, dz in zip(scal, dXa, dZa):
            dxs = G_inv @ dx @ G_inv.conj().T
            dzs = G.conj().T @ dz @ G
            cross = (dxs @ dzs + dzs @ dxs) / 2
            Rs.append(-np.diag(lam ** 2).astype(dtype) + sigma * mu * np.eye(lam.size) - cross)
        dX, dy, dZ = direction(Rs)
        ap, ad = steps(dX, dZ)
        gamma = 0.9 + 0.09 * min(1.0, ap, ad)
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
        X = [_herm(Xj + ap * dx) for Xj, dx in zip(X, dX)]
        y = y + ad * dy
        Z = [_herm(Zj + ad * dz) for Zj, dz in zip(Z, dZ)]
        if max(ap, ad) < 1e-10:
            status = "numerical-failure"
            break

    _, X, y, Z = best
    ATy = AT_op(y)
    Rd = [blk.C - aty - Zj for blk, aty, Zj in zip(blocks, ATy, Z)]
    rp = b - A_op(X)
    pobj = float(sum(np.real(np.vdot(blk.C, Xj)) for blk, Xj in zip(blocks, X)))
    dobj = float(b @ y)
    gap = float(sum(np.real(np.vdot(Xj, Zj)) for Xj, Zj in zip(X, Z)))
    pinf = float(np.linalg.norm(rp) / (1 + norm_b))
    dinf = float(np.sqrt(sum(np.linalg.norm(r) ** 2 for r in Rd)) / (1 + norm_C))
    if status != "optimal" and max(gap, pinf, dinf) <= gap_tol:
        status = "optimal"
    return IpmResult(status, y, X, Z, pobj, dobj, gap, pinf, dinf, it, history)
