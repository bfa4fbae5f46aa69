"""Analysis pipeline and canonical report serialization.

analyze() runs the primal first; a strict-margin win means absolute
stability.  Otherwise the dual is solved, rank-reduced, and pushed through
certificate extraction, nonlinearity construction, the slope audit, and an
equilibrium check by simulation.  Every verdict carries the residuals and
tolerances that produced it, and reports serialize to byte-stable canonical
JSON (sorted keys, fixed 17-significant-digit floats, no timestamps).
"""

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .detector import Inconclusive, build_pwl, extract_certificate
from .engine import SolverSettings, reduce_rank, solve
from .errors import NumericFailureError, UnsupportedModeError
from .lmi import LmiKind, build_dual, build_primal
from .pwl import PiecewiseLinearMap, verify_slope
from .simulate import simulate
from .system import NonlinearityClass, StateSpaceSystem, validate

__all__ = ["AnalysisReport", "analyze", "canonical_json"]

_EQ_CHECK_STEPS = 100
_EQ_CHECK_TOL = 1.0e-8


def _plain(obj):
    """Recursively convert numpy containers to plain python types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _fmt_float(x: float) -> str:
    if not np.isfinite(x):
        raise ValueError("non-finite value cannot enter a canonical report")
    return format(float(x), ".16e")


def _is_scalar(v) -> bool:
    return v is None or isinstance(v, (bool, int, float, str))


def _emit(obj, level: int) -> str:
    pad = "  " * level
    inner = "  " * (level + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [
            f"{inner}{json.dumps(str(k))}: {_emit(obj[k], level + 1)}"
            for k in sorted(obj)
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(_is_scalar(v) for v in obj):
            return "[" + ", ".join(_emit(v, 0) for v in obj) + "]"
        parts = [f"{inner}{_emit(v, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, .16e floats, trailing newline."""
    return _emit(_plain(obj), 0) + "\n"


@dataclass
class AnalysisReport:
    """Verdict plus the evidence that produced it."""

    verdict: str  # "absolutely_stable" | "not_absolutely_stable" | "inconclusive"
    primal: Optional[dict]
    dual: Optional[dict]
    phi: Optional[PiecewiseLinearMap]
    diagnostics: dict

    def to_dict(self) -> dict:
        phi = None
        if self.phi is not None:
            phi = {
                "odd": bool(self.phi.odd),
                "breakpoints": self.phi.breakpoints.tolist(),
            }
        return _plain(
            {
                "verdict": self.verdict,
                "primal": self.primal,
                "dual": self.dual,
                "phi": phi,
                "diagnostics": self.diagnostics,
            }
        )

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


def analyze(
    sys: StateSpaceSystem,
    settings: Optional[SolverSettings] = None,
    seed: Optional[int] = None,
) -> AnalysisReport:
    """Decide absolute stability or produce instability evidence.

    The seed is echoed into the diagnostics for provenance only; the whole
    pipeline is deterministic.
    """
    settings = settings or SolverSettings()
    vrep = validate(sys)  # raises on a non-Schur A

    diagnostics = {
        "system": {
            "n": vrep.n,
            "m": vrep.m,
            "spectral_radius": vrep.rho_a,
            "schur_margin": vrep.schur_margin,
            "d_norm": vrep.d_norm,
            "gain_margin": vrep.gain_margin,
            "well_posedness_guaranteed": vrep.well_posedness_guaranteed,
            "band": [sys.band.mu, sys.band.nu],
            "nonlinearity_class": sys.nl_class.value,
        },
        "tolerances": {
            "tol_rank": settings.tol_rank,
            "tol_eq": settings.tol_eq,
            "primal_margin": settings.primal_margin,
            "cone_tol": settings.cone_tol,
            "max_ipm_iters": settings.max_ipm_iters,
            "equilibrium_check_steps": _EQ_CHECK_STEPS,
            "equilibrium_check_tol": _EQ_CHECK_TOL,
        },
        "pipeline": {},
        "seed": seed,
    }
    pipe = diagnostics["pipeline"]
    is_odd = sys.nl_class is NonlinearityClass.SLOPE_ODD

    primal_problem = build_primal(
        sys, LmiKind("primal_dd" if is_odd else "primal_dhd", reduced=sys.band.is_reduced)
    )
    primal_res = solve(primal_problem, settings)
    pipe["primal_status"] = primal_res.status
    primal_dict = {
        "status": primal_res.status,
        "margin": primal_res.residuals.margin,
        "max_equality_residual": primal_res.residuals.max_equality,
        "max_cone_violation": primal_res.residuals.max_cone_violation,
    }
    if primal_res.status == "feasible":
        primal_dict["P"] = primal_res.assignment["P"]
        primal_dict["M"] = primal_problem.meta["multiplier_from"](primal_res.assignment)
        return AnalysisReport(
            verdict="absolutely_stable",
            primal=primal_dict,
            dual=None,
            phi=None,
            diagnostics=diagnostics,
        )

    if not sys.band.is_reduced:
        pipe["inconclusive_reason"] = "no_dual_outside_reduced_band"
        return AnalysisReport(
            verdict="inconclusive",
            primal=primal_dict,
            dual=None,
            phi=None,
            diagnostics=diagnostics,
        )

    dual_problem = build_dual(sys, LmiKind("dual_dd" if is_odd else "dual_dhd"))
    dual_res = solve(dual_problem, settings)
    pipe["dual_status"] = dual_res.status
    if dual_res.status != "feasible":
        pipe["inconclusive_reason"] = "dual_not_feasible"
        dual_dict = {
            "status": dual_res.status,
            "max_equality_residual": dual_res.residuals.max_equality,
            "max_cone_violation": dual_res.residuals.max_cone_violation,
        }
        return AnalysisReport(
            verdict="inconclusive",
            primal=primal_dict,
            dual=dual_dict,
            phi=None,
            diagnostics=diagnostics,
        )

    reduced = reduce_rank(dual_problem, dual_res, settings)
    pipe["rank_trail"] = list(reduced.diagnostics.get("rank_trail", []))
    pipe["rank_rounds"] = reduced.diagnostics.get("rounds", 0)
    pipe["rank_polished"] = reduced.diagnostics.get("polished", False)

    dual_dict = {
        "status": "feasible",
        "max_equality_residual": reduced.residuals.max_equality,
        "max_cone_violation": reduced.residuals.max_cone_violation,
        "rank_trail": pipe["rank_trail"],
        "H": reduced.assignment["H"],
    }

    outcome = extract_certificate(
        sys, reduced, sys.nl_class, rank_rel_tol=settings.tol_rank
    )
    if isinstance(outcome, Inconclusive):
        pipe["inconclusive_reason"] = outcome.reason
        pipe["inconclusive_detail"] = outcome.detail
        return AnalysisReport(
            verdict="inconclusive",
            primal=primal_dict,
            dual=dual_dict,
            phi=None,
            diagnostics=diagnostics,
        )
    cert = outcome
    v = sys.A @ cert.h1 + sys.B @ cert.h2
    dual_dict.update(
        {
            "rank": cert.rank,
            "h1": cert.h1,
            "h2": cert.h2,
            "z_star": cert.z_star,
            "w_star": cert.w_star,
            "f": cert.f,
            "g": cert.g,
            "X": cert.X,
            "Z": cert.Z,
            "dyn_residual": float(np.linalg.norm(v - cert.h1)),
            "sign_min": float(np.min(v * cert.h1)),
        }
    )

    phi = build_pwl(cert, odd=is_odd)
    srep = verify_slope(phi, sys.band)
    pipe["slope_check"] = {
        "ok": srep.ok,
        "min_slope": srep.min_slope,
        "max_slope": srep.max_slope,
        "origin_defect": srep.origin_defect,
        "odd_defect": srep.odd_defect,
    }
    if not srep.ok:
        pipe["inconclusive_reason"] = "slope_check"
        return AnalysisReport(
            verdict="inconclusive",
            primal=primal_dict,
            dual=dual_dict,
            phi=phi,
            diagnostics=diagnostics,
        )

    try:
        traj = simulate(sys, phi, cert.h1, _EQ_CHECK_STEPS)
        dev = float(
            np.max(np.linalg.norm(traj.states - cert.h1[None, :], axis=1))
        ) / float(np.linalg.norm(cert.h1))
        pipe["equilibrium_checked"] = True
        pipe["equilibrium_deviation"] = dev
        if dev > _EQ_CHECK_TOL:
            pipe["inconclusive_reason"] = "equilibrium_check"
            return AnalysisReport(
                verdict="inconclusive",
                primal=primal_dict,
                dual=dual_dict,
                phi=phi,
                diagnostics=diagnostics,
            )
    except UnsupportedModeError as exc:
        # the contraction-based loop solver does not apply; the theorem's
        # equilibrium statement stands on the certificate gates alone
        pipe["equilibrium_checked"] = False
        pipe["equilibrium_skip_reason"] = str(exc)
    except NumericFailureError as exc:
        pipe["equilibrium_checked"] = False
        pipe["inconclusive_reason"] = "equilibrium_check"
        pipe["inconclusive_detail"] = str(exc)
        return AnalysisReport(
            verdict="inconclusive",
            primal=primal_dict,
            dual=dual_dict,
            phi=phi,
            diagnostics=diagnostics,
        )

    return AnalysisReport(
        verdict="not_absolutely_stable",
        primal=primal_dict,
        dual=dual_dict,
        phi=phi,
        diagnostics=diagnostics,
    )
