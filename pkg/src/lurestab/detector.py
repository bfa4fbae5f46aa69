"""Certificate extraction and destabilizing nonlinearity construction.

Turns a feasible rank-reduced dual solution into explicit instability data:
the factor h of H = h h^T splits into a nonzero equilibrium candidate h1 and
the input w* = h2, the output is z* = C h1 + D h2, and a piecewise-linear
map interpolating (z*_i, w*_i) (plus mirrored points in the odd case) is
slope-restricted on [0, 1] and keeps h1 fixed under the closed loop.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    CertificateInconsistentError,
    InternalContradictionError,
    StructuralError,
)
from .linalg import numerical_rank_and_factor, spectral_norm
from .pwl import PiecewiseLinearMap
from .system import NonlinearityClass, StateSpaceSystem

__all__ = ["DualCertificate", "Inconclusive", "build_pwl", "extract_certificate"]


@dataclass(frozen=True)
class DualCertificate:
    """Instability evidence assembled from a rank-1 dual solution."""

    H: np.ndarray
    f: np.ndarray
    g: np.ndarray
    X: np.ndarray
    Z: Optional[np.ndarray]
    rank: int
    h1: np.ndarray
    h2: np.ndarray
    z_star: np.ndarray
    w_star: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return np.concatenate([self.h1, self.h2])


@dataclass(frozen=True)
class Inconclusive:
    """The dual solution did not yield a certificate; reason says why.

    reason is one of "rank" (numerical rank above one), "sign" (the proof's
    dichotomy resolved to the branch with no conclusion), or "degenerate"
    (h1 vanished on a loop where the nonvanishing argument does not apply).
    """

    reason: str
    detail: str = ""


def extract_certificate(
    sys: StateSpaceSystem,
    solve_result,
    nl_class: NonlinearityClass,
    rank_rel_tol: float = 1.0e-6,
    sign_tol: float = 1.0e-9,
    dyn_tol: float = 1.0e-6,
):
    """Apply the rank, sign, and dynamics gates to a feasible dual solution.

    Returns a DualCertificate, or Inconclusive when one of the theorem's
    hypotheses fails numerically.  A vanishing h1 raises an internal
    contradiction when ||D|| < 1 (the nonvanishing proof applies there, so
    it can only mean a solver or assembly defect); otherwise it is reported
    as inconclusive.
    """
    assignment = solve_result.assignment
    if "H" not in assignment:
        raise StructuralError("solve result carries no H block")
    want_z = nl_class is NonlinearityClass.SLOPE_ODD
    if want_z != ("Z" in assignment):
        raise StructuralError("dual kind does not match the nonlinearity class")

    H = np.asarray(assignment["H"], dtype=float)
    rank, V = numerical_rank_and_factor(H, rel_tol=rank_rel_tol)
    if rank != 1:
        return Inconclusive("rank", f"numerical rank {rank}")
    h = V[:, 0]
    n = sys.n
    h1, h2 = h[:n], h[n:]
    norm_h = float(np.linalg.norm(h))
    norm_h1 = float(np.linalg.norm(h1))
    if norm_h1 <= 1.0e-9 * norm_h:
        if spectral_norm(sys.D) < 1.0:
            raise InternalContradictionError(
                "dual factor has vanishing state part although ||D|| < 1 "
                "guarantees a nonzero equilibrium; solver or assembly defect"
            )
        return Inconclusive(
            "degenerate", "state part of the factor vanishes; no equilibrium argument"
        )

    # sign canonicalization: make the dominant state entry positive so both
    # factor signs produce the same certificate
    pick = int(np.argmax(np.abs(h1)))
    if h1[pick] < 0:
        h = -h
        h1, h2 = h[:n], h[n:]

    v = sys.A @ h1 + sys.B @ h2
    sign_min = float(np.min(v * h1))
    if sign_min < -sign_tol * norm_h1 ** 2:
        return Inconclusive(
            "sign",
            f"diagonal sign condition fails by {sign_min:.3e}; "
            "the dichotomy resolves to the branch with no conclusion",
        )
    dyn_residual = float(np.linalg.norm(v - h1))
    if dyn_residual > dyn_tol * norm_h1:
        return Inconclusive(
            "sign",
            f"state equation residual {dyn_residual:.3e} exceeds tolerance; "
            "the factor is not an equilibrium within tolerance",
        )

    z_star = sys.C @ h1 + sys.D @ h2
    return DualCertificate(
        H=H,
        f=np.asarray(assignment["f"], dtype=float),
        g=np.asarray(assignment["g"], dtype=float),
        X=np.asarray(assignment["X"], dtype=float),
        Z=np.asarray(assignment["Z"], dtype=float) if "Z" in assignment else None,
        rank=1,
        h1=h1,
        h2=h2,
        z_star=z_star,
        w_star=h2.copy(),
    )


def _merge_pairs(pairs, tol):
    """Deduplicate (z, w, is_origin) pairs; w must agree within groups."""
    pairs = sorted(pairs, key=lambda p: (p[0], not p[2]))
    merged = []
    for z, w, is_origin in pairs:
        if merged and abs(z - merged[-1][0]) <= tol:
            zr, wr, origin_r = merged[-1]
            if abs(w - wr) > tol:
                raise CertificateInconsistentError(
                    f"duplicate output value z = {zr:.6g} maps to both "
                    f"{wr:.6g} and {w:.6g}; interpolation data inconsistent"
                )
            if is_origin and not origin_r:
                merged[-1] = (z, w, True)  # prefer the exact origin node
            continue
        merged.append((z, w, is_origin))
    out = []
    for z, w, is_origin in merged:
        if is_origin:
            out.append((0.0, 0.0))
        else:
            out.append((z, w))
    return out


def build_pwl(cert: DualCertificate, odd: bool) -> PiecewiseLinearMap:
    """Interpolate the certificate data into a destabilizing map.

    Non-odd: breakpoints are the deduplicated (z, w) pairs plus the origin,
    sorted by z.  Odd: pairs are folded onto z >= 0 first (negating both
    coordinates), merged, then mirrored exactly, which makes antisymmetry
    hold to the last bit.  Nodes whose z values agree within
    1e-7 * max(1, ||z*||) must carry matching w values, otherwise the
    certificate-inconsistent error fires.
    """
    z = np.asarray(cert.z_star, dtype=float)
    w = np.asarray(cert.w_star, dtype=float)
    tol = 1.0e-7 * max(1.0, float(np.linalg.norm(z)))

    if odd:
        folded = [(0.0, 0.0, True)]
        for zi, wi in zip(z, w):
            if zi >= 0:
                folded.append((float(zi), float(wi), False))
            else:
                folded.append((float(-zi), float(-wi), False))
        half = _merge_pairs(folded, tol)
        pos = [(zi, wi) for zi, wi in half if zi > 0.0]
        pts = [(-zi, -wi) for zi, wi in reversed(pos)] + [(0.0, 0.0)] + pos
    else:
        raw = [(0.0, 0.0, True)] + [(float(zi), float(wi), False) for zi, wi in zip(z, w)]
        pts = _merge_pairs(raw, tol)

    return PiecewiseLinearMap(breakpoints=np.asarray(pts, dtype=float), odd=odd)
