"""Dense primal-dual interior-point method for small conic programs.

Solves   min c.x  s.t.  A x = b,  x in K,
where K is a product of PSD cones (in scaled svec coordinates) and a
nonnegative orthant.  Nesterov-Todd scaling with a Mehrotra
predictor-corrector step; everything dense, aimed at problems with a few
dozen rows.  Infeasible start: the iterates satisfy the cone constraints
strictly at all times while the equality residuals are driven to zero.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["ConeSpec", "ConicResult", "IpmSettings", "smat", "solve_conic", "svec", "svec_dim"]

_SQRT2 = math.sqrt(2.0)


def svec_dim(d: int) -> int:
    return d * (d + 1) // 2


def svec(X: np.ndarray) -> np.ndarray:
    """Isometric vectorization of a symmetric matrix (upper triangle)."""
    d = X.shape[0]
    iu = np.triu_indices(d)
    out = np.asarray(X, dtype=float)[iu].copy()
    out[iu[0] != iu[1]] *= _SQRT2
    return out


def smat(x: np.ndarray, d: int) -> np.ndarray:
    """Inverse of svec."""
    X = np.zeros((d, d))
    iu = np.triu_indices(d)
    vals = np.asarray(x, dtype=float).copy()
    off = iu[0] != iu[1]
    vals[off] /= _SQRT2
    X[iu] = vals
    X[(iu[1], iu[0])] = vals
    return X


@dataclass(frozen=True)
class ConeSpec:
    """Ordered cone blocks: ("s", d) for a d x d PSD block, ("l", p) orthant."""

    blocks: tuple

    def __post_init__(self):
        for tag, size in self.blocks:
            if tag not in ("s", "l") or size < 1:
                raise ValueError(f"bad cone block ({tag!r}, {size})")

    @property
    def total_len(self) -> int:
        return sum(svec_dim(s) if t == "s" else s for t, s in self.blocks)

    @property
    def barrier_degree(self) -> int:
        return sum(s for _, s in self.blocks)

    def slices(self):
        out, at = [], 0
        for tag, size in self.blocks:
            ln = svec_dim(size) if tag == "s" else size
            out.append((tag, size, slice(at, at + ln)))
            at += ln
        return out


@dataclass(frozen=True)
class IpmSettings:
    max_iters: int = 200
    tol_feas: float = 1.0e-10
    tol_gap: float = 1.0e-10
    step_frac: float = 0.99
    min_step: float = 1.0e-8
    stall_limit: int = 4


@dataclass
class ConicResult:
    status: str
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    iterations: int
    rp_rel: float
    rd_rel: float
    gap_rel: float
    mu: float
    obj: float
    history: list = field(default_factory=list)


def _identity_point(cone: ConeSpec) -> np.ndarray:
    x = np.zeros(cone.total_len)
    for tag, size, sl in cone.slices():
        if tag == "s":
            x[sl] = svec(np.eye(size))
        else:
            x[sl] = 1.0
    return x


def _chol_psd(X: np.ndarray) -> np.ndarray:
    """Cholesky with an eigenvalue floor fallback for nearly singular input."""
    try:
        return np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        lam, Q = np.linalg.eigh(0.5 * (X + X.T))
        floor = max(np.max(lam), 1.0) * 1.0e-14
        lam = np.clip(lam, floor, None)
        return np.linalg.cholesky((Q * lam) @ Q.T)


class _Scaling:
    """Per-block NT scaling data for one iteration."""

    def __init__(self, cone: ConeSpec, x: np.ndarray, s: np.ndarray):
        self.cone = cone
        self.blocks = []
        for tag, size, sl in cone.slices():
            if tag == "s":
                X = smat(x[sl], size)
                S = smat(s[sl], size)
                Lx = _chol_psd(X)
                Ls = _chol_psd(S)
                U, sig, Vt = np.linalg.svd(Ls.T @ Lx)
                sig = np.clip(sig, 1.0e-150, None)
                R = Lx @ Vt.T @ np.diag(sig ** -0.5)
                Rinv = np.diag(sig ** -0.5) @ U.T @ Ls.T
                G = R @ R.T
                self.blocks.append(("s", size, sl, R, Rinv, G, sig))
            else:
                w = np.sqrt(x[sl] / s[sl])
                lam = np.sqrt(x[sl] * s[sl])
                self.blocks.append(("l", size, sl, w, None, w * w, lam))

    def wsq_matrix(self) -> np.ndarray:
        """Dense matrix of u -> svec(G smat(u) G) per block (W^T W)."""
        n = self.cone.total_len
        out = np.zeros((n, n))
        for blk in self.blocks:
            tag, size, sl = blk[0], blk[1], blk[2]
            if tag == "s":
                G = blk[5]
                k = svec_dim(size)
                T = np.zeros((k, k))
                basis = np.eye(k)
                for j in range(k):
                    T[:, j] = svec(G @ smat(basis[:, j], size) @ G)
                out[sl, sl] = 0.5 * (T + T.T)
            else:
                out[sl, sl] = np.diag(blk[5])
        return out

    def lam_vec(self) -> np.ndarray:
        v = np.zeros(self.cone.total_len)
        for blk in self.blocks:
            tag, size, sl = blk[0], blk[1], blk[2]
            if tag == "s":
                v[sl] = svec(np.diag(blk[6]))
            else:
                v[sl] = blk[6]
        return v

    def scale_x(self, dx: np.ndarray) -> np.ndarray:
        """W^{-T} dx: maps an x-space direction into scaled space."""
        out = np.zeros_like(dx)
        for blk in self.blocks:
            tag, size, sl = blk[0], blk[1], blk[2]
            if tag == "s":
                Rinv = blk[4]
                out[sl] = svec(Rinv @ smat(dx[sl], size) @ Rinv.T)
            else:
                out[sl] = dx[sl] / blk[3]
        return out

    def scale_s(self, ds: np.ndarray) -> np.ndarray:
        """W ds: maps an s-space direction into scaled space."""
        out = np.zeros_like(ds)
        for blk in self.blocks:
            tag, size, sl = blk[0], blk[1], blk[2]
            if tag == "s":
                R = blk[3]
                out[sl] = svec(R.T @ smat(ds[sl], size) @ R)
            else:
                out[sl] = ds[sl] * blk[3]
        return out

    def unscale_to_x(self, u: np.ndarray) -> np.ndarray:
        """W^T u: maps a scaled-space vector back to an x-space direction."""
        out = np.zeros_like(u)
        for blk in self.blocks:
            tag, size, sl = blk[0], blk[1], blk[2]
            if tag == "s":
                R = blk[3]
                out[sl] = svec(R @ smat(u[sl], size) @ R.T)
            else:
                out[sl] = u[sl] * blk[3]
        return out

    def jordan_prod(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(u)
        for blk in self.blocks:
            tag, size, sl = blk[0], blk[1], blk[2]
            if tag == "s":
                U = smat(u[sl], size)
                V = smat(v[sl], size)
                out[sl] = svec(0.5 * (U @ V + V @ U))
            else:
                out[sl] = u[sl] * v[sl]
        return out

    def jordan_solve_lam(self, k: np.ndarray) -> np.ndarray:
        """Solve L(lam) z = k where lam is the scaling's spectral point."""
        out = np.zeros_like(k)
        for blk in self.blocks:
            tag, size, sl = blk[0], blk[1], blk[2]
            if tag == "s":
                lam = blk[6]
                K = smat(k[sl], size)
                denom = 0.5 * (lam[:, None] + lam[None, :])
                out[sl] = svec(K / denom)
            else:
                out[sl] = k[sl] / blk[6]
        return out


def _max_step(cone: ConeSpec, x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha dx still in the (closed) cone."""
    alpha = np.inf
    for tag, size, sl in cone.slices():
        if tag == "s":
            X = smat(x[sl], size)
            DX = smat(dx[sl], size)
            L = _chol_psd(X)
            Linv = np.linalg.inv(L)
            Mfr = Linv @ DX @ Linv.T
            w = np.linalg.eigvalsh(0.5 * (Mfr + Mfr.T))
            wmin = w[0]
            if wmin < 0:
                alpha = min(alpha, -1.0 / wmin)
        else:
            neg = dx[sl] < 0
            if np.any(neg):
                alpha = min(alpha, float(np.min(-x[sl][neg] / dx[sl][neg])))
    return alpha


def _solve_normal(AWA: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Cholesky solve with escalating regularization."""
    scale = max(float(np.trace(AWA)) / max(AWA.shape[0], 1), 1.0e-300)
    reg = 0.0
    for _ in range(8):
        try:
            L = np.linalg.cholesky(AWA + reg * np.eye(AWA.shape[0]))
            z = np.linalg.solve(L, rhs)
            return np.linalg.solve(L.T, z)
        except np.linalg.LinAlgError:
            reg = scale * 1.0e-14 if reg == 0.0 else reg * 100.0
    return np.linalg.lstsq(AWA, rhs, rcond=None)[0]


def solve_conic(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    cone: ConeSpec,
    settings: Optional[IpmSettings] = None,
) -> ConicResult:
    """Run the predictor-corrector loop; returns the best iterate seen."""
    st = settings or IpmSettings()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    nrows = A.shape[0]
    nu = cone.barrier_degree

    x = _identity_point(cone)
    s = _identity_point(cone)
    y = np.zeros(nrows)

    if nrows == 0:
        return ConicResult(
            status="optimal", x=x, y=y, s=s, iterations=0, rp_rel=0.0, rd_rel=0.0,
            gap_rel=0.0, mu=float(x @ s) / nu, obj=float(c @ x),
        )

    bnorm = 1.0 + float(np.linalg.norm(b))
    cnorm = 1.0 + float(np.linalg.norm(c))

    best = None
    best_score = np.inf
    stalls = 0
    status = "max_iters"
    it = 0
    history = []

    for it in range(1, st.max_iters + 1):
        rp = b - A @ x
        rd = c - A.T @ y - s
        gap = float(x @ s)
        mu = gap / nu
        rp_rel = float(np.linalg.norm(rp)) / bnorm
        rd_rel = float(np.linalg.norm(rd)) / cnorm
        gap_rel = gap / (1.0 + abs(float(c @ x)) + abs(float(b @ y)))
        history.append((rp_rel, rd_rel, gap_rel))

        score = max(rp_rel, rd_rel, gap_rel)
        if score < best_score:
            best_score = score
            best = (x.copy(), y.copy(), s.copy(), rp_rel, rd_rel, gap_rel, mu)

        if rp_rel <= st.tol_feas and rd_rel <= st.tol_feas and gap_rel <= st.tol_gap:
            status = "optimal"
            break

        try:
            sc = _Scaling(cone, x, s)
        except np.linalg.LinAlgError:
            status = "stalled"
            break
        lam = sc.lam_vec()
        Wsq = sc.wsq_matrix()
        AW = A @ Wsq
        AWA = AW @ A.T
        AWA = 0.5 * (AWA + AWA.T)

        # predictor (affine scaling) direction
        rhs_aff = rp + A @ x + AW @ rd
        dy_aff = _solve_normal(AWA, rhs_aff)
        dx_aff = -x - Wsq @ rd + Wsq @ (A.T @ dy_aff)
        ds_aff = rd - A.T @ dy_aff

        a_x = min(1.0, _max_step(cone, x, dx_aff))
        a_s = min(1.0, _max_step(cone, s, ds_aff))
        a_aff = min(a_x, a_s)
        gap_aff = float((x + a_aff * dx_aff) @ (s + a_aff * ds_aff))
        sigma = min(1.0, max((gap_aff / gap) ** 3 if gap > 0 else 0.0, 1.0e-8))

        # corrector: target sigma*mu on the central path minus the
        # second-order term from the affine step
        eta = sc.jordan_prod(sc.scale_x(dx_aff), sc.scale_s(ds_aff))
        target = -sc.jordan_prod(lam, lam) - eta
        for tag, size, sl in cone.slices():
            if tag == "s":
                target[sl] += sigma * mu * svec(np.eye(size))
            else:
                target[sl] += sigma * mu
        dc = sc.jordan_solve_lam(target)
        wdc = sc.unscale_to_x(dc)

        rhs = rp - A @ wdc + AW @ rd
        dy = _solve_normal(AWA, rhs)
        dx = wdc - Wsq @ rd + Wsq @ (A.T @ dy)
        ds = rd - A.T @ dy

        a_x = st.step_frac * _max_step(cone, x, dx)
        a_s = st.step_frac * _max_step(cone, s, ds)
        a_p = min(1.0, a_x)
        a_d = min(1.0, a_s)

        if max(a_p, a_d) < st.min_step:
            stalls += 1
            if stalls >= st.stall_limit:
                status = "stalled"
                break
        else:
            stalls = 0

        x = x + a_p * dx
        y = y + a_d * dy
        s = s + a_d * ds

    else:
        it = st.max_iters

    if status != "optimal" and best is not None:
        x, y, s, rp_rel, rd_rel, gap_rel, mu = best
    else:
        rp = b - A @ x
        rd = c - A.T @ y - s
        gap = float(x @ s)
        mu = gap / nu
        rp_rel = float(np.linalg.norm(rp)) / bnorm
        rd_rel = float(np.linalg.norm(rd)) / cnorm
        gap_rel = gap / (1.0 + abs(float(c @ x)) + abs(float(b @ y)))

    return ConicResult(
        status=status,
        x=x,
        y=y,
        s=s,
        iterations=it,
        rp_rel=rp_rel,
        rd_rel=rd_rel,
        gap_rel=gap_rel,
        mu=mu,
        obj=float(c @ x),
        history=history,
    )
