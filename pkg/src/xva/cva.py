"""Credit valuation adjustments of an equity option seen from the buyer C.

CVA_B integrates the first-default density of B against the compound-call
exposure; CVA_C does the same for C with the compound-put exposure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .analytic import _cc, _cp
from .collateral import CollateralTerms
from .credit import PartyCredit, breakpoints, first_default_density
from .market_data import MarketEnvironment
from .trades import EquityOptionSpec


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class CvaResult:
    cva_B: float
    cva_C: float
    quadrature_error_estimate: float = 0.0

    def __post_init__(self):
        for name in ("cva_B", "cva_C", "quadrature_error_estimate"):
            object.__setattr__(self, name, float(getattr(self, name)))


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float,
                     max_depth: int = 30) -> tuple[float, float]:
    """Integral of ``f`` over [a, b] and an error estimate (sum of |S2 - S1| / 15)."""
    if b == a:
        return 0.0, 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    total, err = 0.0, 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        f1, f2 = f(0.5 * (lo + mid)), f(0.5 * (mid + hi))
        left = (mid - lo) * (flo + 4.0 * f1 + fmid) / 6.0
        right = (hi - mid) * (fmid + 4.0 * f2 + fhi) / 6.0
        delta = left + right - s
        # at the depth limit, halved tolerances sit below rounding noise (jumps,
        # knots); a piece whose error is negligible against the total is kept
        if abs(delta) <= 15.0 * eps or (depth >= max_depth and abs(delta) <= 15e-3 * tol):
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
        elif depth >= max_depth:
            raise QuadratureError(f"no convergence after depth {max_depth} on [{lo:.6g}, {hi:.6g}] "
                                  f"(local error {abs(delta) / 15:.3e})")
        else:
            stack.append((mid, hi, fmid, f2, fhi, right, eps / 2.0, depth + 1))
            stack.append((lo, mid, flo, f1, fmid, left, eps / 2.0, depth + 1))
    return total, err


def _segments(credit_B, credit_C, terms: CollateralTerms, T: float) -> list[float]:
    pts = set(breakpoints(credit_B, credit_C, 0.0, T))
    for sched in (terms.threshold, terms.min_transfer):
        pts.update(t for t in getattr(sched, "times", ()) if 0.0 < t < T)
    return sorted(pts)


def cva_equity(spec: EquityOptionSpec, env: MarketEnvironment, credit_B: PartyCredit,
               credit_C: PartyCredit, terms: CollateralTerms = CollateralTerms(),
               tol: float | None = None) -> CvaResult:
    """CVA_B and CVA_C by quadrature over the first-default densities.

    A CSA trade (positive threshold) counts collateral in full, so recoveries
    are 1 in the exposure formula; an uncollateralized trade uses the parties'
    recoveries with H = X = 0.
    """
    if terms.mtm_convention != "risk_free":
        raise ValueError("quadrature CVA uses the risk-free MTM; use solve_predefault_pde for pre-default MTM")
    T = spec.maturity
    tol = 1e-8 * spec.spot if tol is None else tol
    csa = terms.collateralized
    rec_B = 1.0 if csa else credit_B.recovery
    rec_C = 1.0 if csa else credit_C.recovery

    def hx(u):
        return terms.at(u) if csa else (0.0, 0.0)

    def integrand_B(u):
        H, X = hx(u)
        exposure = _cc(spec, env, u, 0.0, 0.0) - rec_B * _cc(spec, env, u, H, X)
        return first_default_density("B", credit_B, credit_C, u) * exposure

    def integrand_C(u):
        H, X = hx(u)
        exposure = _cp(spec, env, u, 0.0, 0.0) - rec_C * _cp(spec, env, u, H, X)
        return first_default_density("C", credit_B, credit_C, u) * exposure

    pts = _segments(credit_B, credit_C, terms, T)
    results = []
    err = 0.0
    for party, integrand, exposed in (
        (credit_B, integrand_B, spec.position > 0),
        (credit_C, integrand_C, spec.position < 0),
    ):
        value = 0.0
        # zero intensity or no exposure on this side: the adjustment is exactly zero
        if exposed and any(party.intensity_at(t) > 0 for t in pts[:-1]):
            for a, b in zip(pts, pts[1:]):
                v, e = adaptive_simpson(integrand, a, b, tol * (b - a) / T)
                value += v
                err += e
        results.append(-value)
    return CvaResult(results[0] + 0.0, results[1] + 0.0, err)


def cva_closed_form(V_e_plus: float, V_e_minus: float, credit_B: PartyCredit, credit_C: PartyCredit,
                    T: float) -> CvaResult:
    """Constant-intensity CVAs of a sign-definite derivative (first-default probability times loss)."""
    if not (credit_B.is_constant and credit_C.is_constant):
        raise ValueError("closed form needs constant intensities")
    lam_B, lam_C = credit_B.intensity, credit_C.intensity
    lam = lam_B + lam_C
    if lam == 0.0:
        return CvaResult(0.0, 0.0)
    p_first = -math.expm1(-lam * T) / lam
    cva_B = -lam_B * p_first * credit_B.loss_rate * V_e_plus
    cva_C = -lam_C * p_first * credit_C.loss_rate * V_e_minus
    return CvaResult(cva_B + 0.0, cva_C + 0.0)


def funding_spread(credit: PartyCredit, env: MarketEnvironment, t: float = 0.0) -> float:
    """Unsecured funding spread: expected loss rate lambda_i * L_i plus the market-wide spread."""
    return credit.intensity_at(t) * credit.loss_rate + env.market_funding_spread
