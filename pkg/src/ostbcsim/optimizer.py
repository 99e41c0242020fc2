"""Heuristic pilot-energy optimization under a per-coherence-interval
energy budget.

The base station fixes the pilot length to the port count, assumes a
full-rate square code on an uncorrelated channel, plugs in the large-scale
gain of the eps-percentile user, replaces the fading-dependent ||hhat||^2
by the eps-quantile of its scaled chi-square law, and picks the pilot
power maximizing the resulting deterministic outage rate.  No CSI of any
kind enters; only the cell geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .channel import UserGeometry, beta_from_distance, place_user

__all__ = [
    "golden_section_max",
    "beta_percentile",
    "PilotPowerResult",
    "optimize_pilot_power",
    "baseline_powers",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-4):
    """Golden-section search for the maximum of a unimodal f on [lo, hi].

    ``tol`` is relative to the bracket width.  Returns (x, f(x)).
    """
    a, b = min(lo, hi), max(lo, hi)
    h = b - a
    if h <= 0.0:
        return a, f(a)
    n = max(1, int(math.ceil(math.log(tol) / math.log(_INV_PHI))))
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)
    return (c, yc) if yc > yd else (d, yd)


def beta_percentile(geometry: UserGeometry, eps: float, rng=None,
                    n_samples: int = 10**6) -> float:
    """Large-scale gain beta_eps with P(beta < beta_eps) = eps.

    The disk has a closed form (beta decreases with distance, and the
    distance CDF is the area ratio); other shapes fall back to Monte
    Carlo placement.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    if geometry.shape == "disk":
        r0 = geometry.exclusion_radius
        d = math.sqrt(1.0 - eps * (1.0 - r0 * r0))
        return float(beta_from_distance(geometry, d))
    rng = np.random.default_rng(rng)
    _, beta, _ = place_user(geometry, rng, size=n_samples)
    return float(np.quantile(beta, eps))


@dataclass
class PilotPowerResult:
    pilot_power: float
    data_power: float
    pilot_len: int
    objective: float
    beta_eps: float
    trace: list = field(default_factory=list, repr=False)


def _square_rate_objective(rho_p, code, pilot_len, coherence_len, eps,
                           beta_eps):
    """Deterministic proxy for the outage rate at pilot power rho_p.

    Uses the square-code symbol SNR with the code's own symbol energy and
    block length (exact only for square codes, a deliberate approximation
    for the rectangular ones), the eps-percentile large-scale gain, and
    the eps-quantile of ||hhat||^2 under its scaled chi-square(2 n_t) law.
    """
    n_ports = code.n_ports
    data_uses = coherence_len - pilot_len
    rho_d = (coherence_len - pilot_len * rho_p) / data_uses
    if rho_d <= 0.0:
        return -np.inf
    pe = beta_eps * pilot_len * rho_p
    q = (n_ports + pe) / (2.0 * rho_p * pilot_len) * chi2.ppf(eps, 2 * n_ports)
    snr = (code.symbol_energy * rho_d * q
           / (rho_d * code.block_len * beta_eps / (n_ports + pe) + 1.0)
           * (pe / (pe + n_ports)) ** 2)
    rate = code.n_sym / code.block_len * math.log2(1.0 + snr)
    return data_uses / coherence_len * rate


def optimize_pilot_power(code, coherence_len: int, eps: float,
                         geometry: UserGeometry, beta_eps: float | None = None,
                         pilot_len: int | None = None, rng=None,
                         keep_trace: bool = False) -> PilotPowerResult:
    """Pilot/data powers maximizing the heuristic outage-rate proxy under
    the energy budget tau_p rho_p + (tau_c - tau_p) rho_d = tau_c.

    The pilot length defaults to the code's port count (the rate-optimal
    choice); multi-cell callers pass the reuse-scaled length.  The search
    runs a coarse log-spaced grid and refines the three best brackets by
    golden section, guarding against flat stretches of the objective.
    """
    n_ports = code.n_ports
    tau_p = n_ports if pilot_len is None else pilot_len
    if tau_p >= coherence_len:
        raise ValueError("energy budget infeasible: pilots fill the interval")
    if beta_eps is None:
        beta_eps = beta_percentile(geometry, eps, rng=rng)

    def objective(log_rho):
        return _square_rate_objective(10.0**log_rho, code, tau_p,
                                      coherence_len, eps, beta_eps)

    hi = min(1.0e4, 0.999 * coherence_len / tau_p)
    lo_log, hi_log = -2.0, math.log10(hi)
    grid = np.linspace(lo_log, hi_log, 48)
    vals = np.array([objective(x) for x in grid])
    trace = list(zip((10.0**grid).tolist(), vals.tolist())) if keep_trace else []
    order = np.argsort(vals)[::-1][:3]
    best_x, best_v = grid[order[0]], vals[order[0]]
    for idx in order:
        a = grid[max(idx - 1, 0)]
        b = grid[min(idx + 1, len(grid) - 1)]
        x, v = golden_section_max(objective, a, b, tol=1e-4)
        if keep_trace:
            trace.append((10.0**x, v))
        if v > best_v:
            best_x, best_v = x, v
    rho_p = 10.0**best_x
    rho_d = (coherence_len - tau_p * rho_p) / (coherence_len - tau_p)
    return PilotPowerResult(rho_p, rho_d, tau_p, best_v, beta_eps, trace)


def baseline_powers(code, coherence_len: int, pilot_len: int | None = None):
    """Uniform-power baseline: minimum pilots, rho_p = rho_d = 1."""
    tau_p = code.n_ports if pilot_len is None else pilot_len
    if tau_p >= coherence_len:
        raise ValueError("pilots fill the interval")
    return 1.0, 1.0, tau_p
