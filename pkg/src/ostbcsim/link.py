"""Single-cell link: downlink pilots, LS estimation, detection and the
worst-case-noise SNR of OSTBC transmission.

The receiver estimates the effective channel from pilots, detects each
symbol by correlating with the estimate, and the achievable SNR follows
from the conditional first and second moments of the residual noise.
Conditioned on the estimate hhat, the detected symbol is

    shat_n = (sqrt(rho_d) ||hhat||^2 + c_n) s_n + u_n + eta2,

where c_n collects the part of the estimation-error noise that is
perfectly correlated with s_n, u_n the uncorrelated remainder of power
U_n, and eta2 the thermal term with E|eta2|^2 = ||hhat||^2.  The symbol
SNR is then E_s |sqrt(rho_d)||hhat||^2 + c_n|^2 / (U_n + ||hhat||^2), and
the code operates at the minimum over symbols.

``SnrEvaluator`` evaluates c_n and U_n in closed form for arbitrary
effective-channel covariances by contracting precomputed Gram tensors of
the code with the conditional error moments; a cheaper exact path covers
spatially uncorrelated channels.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .codes import CodeId, OstbcCode, make_code

__all__ = [
    "make_pilot_matrix",
    "pilot_group",
    "ls_estimate",
    "error_variance",
    "ConditionalMoments",
    "conditional_moments",
    "detect_symbols",
    "SnrBreakdown",
    "SnrEvaluator",
    "get_evaluator",
    "symbol_snr",
    "snr_square",
    "snr_general",
    "mmse_estimate",
    "mmse_gain",
]


# ---------------------------------------------------------------------------
# Pilot phase
# ---------------------------------------------------------------------------

def make_pilot_matrix(n_ports: int, pilot_len: int) -> np.ndarray:
    """Semi-unitary pilot block X_p with X_p^H X_p = (pilot_len/n_ports) I.

    Built from the leading columns of the pilot_len-point unitary DFT, so
    every entry has modulus 1/sqrt(n_ports) and the per-use transmit power
    is flat.
    """
    return pilot_group(n_ports, pilot_len, 0)


def pilot_group(n_ports: int, pilot_len: int, group: int) -> np.ndarray:
    """One of the mutually orthogonal pilot blocks sharing pilot_len uses.

    Group g takes DFT columns [g*n_ports, (g+1)*n_ports); distinct groups
    satisfy X_p^(g)H X_p^(g') = 0 exactly.
    """
    if pilot_len < n_ports * (group + 1):
        raise ValueError(
            f"pilot length {pilot_len} too short for group {group} of "
            f"{n_ports} ports")
    t = np.arange(pilot_len)[:, None]
    k = np.arange(group * n_ports, (group + 1) * n_ports)[None, :]
    f = np.exp(-2j * np.pi * t * k / pilot_len) / np.sqrt(pilot_len)
    return np.sqrt(pilot_len / n_ports) * f


def ls_estimate(y_p, x_p: np.ndarray, pilot_power: float) -> np.ndarray:
    """Least-squares channel estimate from y_p = sqrt(rho_p) X_p h + w.

    ``y_p`` may carry leading batch dimensions: shape (..., pilot_len).
    """
    x_p = np.asarray(x_p)
    gram = x_p.conj().T @ x_p
    proj = np.linalg.solve(np.sqrt(pilot_power) * gram, x_p.conj().T)
    return np.asarray(y_p, dtype=complex) @ proj.T


def error_variance(n_ports: int, pilot_power: float, pilot_len: int) -> float:
    """Per-entry variance of the LS estimation error (its covariance is
    this scalar times the identity)."""
    return n_ports / (pilot_power * pilot_len)


# ---------------------------------------------------------------------------
# Conditional moments of the estimation error
# ---------------------------------------------------------------------------

@dataclass
class ConditionalMoments:
    """Moments of the error e given the estimate hhat = h + e.

    e | hhat ~ CN(U hhat, R) with U = C_e (C_e + C_h)^-1 and
    R = (C_e^-1 + C_h^-1)^-1; the transpose second moment has no central
    part (the conditional law stays circular).
    """

    u: np.ndarray
    r: np.ndarray
    hhat: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return self.hhat @ self.u.T

    @property
    def second_moment(self) -> np.ndarray:
        m = self.mean
        return self.r + np.outer(m, m.conj()) if m.ndim == 1 else None

    @property
    def second_moment_transpose(self) -> np.ndarray:
        m = self.mean
        return np.outer(m, m) if m.ndim == 1 else None


def conditional_gain_and_cov(c_h, c_e):
    """U = C_e (C_e + C_h)^-1 and R = C_e - C_e (C_e + C_h)^-1 C_e.

    The product form of R never inverts C_h, so rank-deficient channel
    covariances (fully correlated arrays) are handled exactly.  Accepts
    stacked inputs with leading batch dimensions.
    """
    c_h = np.asarray(c_h, dtype=complex)
    c_e = np.asarray(c_e, dtype=complex)
    c = c_h + c_e
    # U = C_e C^-1; solve on the transposed system keeps it batched
    u = np.linalg.solve(np.swapaxes(c, -1, -2), np.swapaxes(c_e, -1, -2))
    u = np.swapaxes(u, -1, -2)
    r = c_e - u @ c_e
    r = 0.5 * (r + np.swapaxes(r.conj(), -1, -2))
    return u, r


def conditional_moments(c_h, c_e, hhat) -> ConditionalMoments:
    u, r = conditional_gain_and_cov(c_h, c_e)
    return ConditionalMoments(u, r, np.asarray(hhat, dtype=complex))


# ---------------------------------------------------------------------------
# Detection
# ---------------------------------------------------------------------------

def detect_symbols(code: OstbcCode, hhat, y) -> np.ndarray:
    """Correlate the received block with the channel estimate:
    shat_n = Re(hhat^H A_n^H y) + 1j Im(hhat^H B_n^H y).

    ``hhat`` (..., n_ports) and ``y`` (..., block_len) broadcast; returns
    (..., n_sym).  Estimates are unnormalized: with perfect CSI and no
    noise, shat_n = sqrt(rho_d) ||h||^2 s_n.
    """
    hhat = np.asarray(hhat, dtype=complex)
    y = np.asarray(y, dtype=complex)
    ah = np.einsum("nti,...i->...nt", code.a.conj(), hhat.conj())
    bh = np.einsum("nti,...i->...nt", code.b.conj(), hhat.conj())
    re = np.einsum("...nt,...t->...n", ah, y).real
    im = np.einsum("...nt,...t->...n", bh, y).imag
    return re + 1j * im


# ---------------------------------------------------------------------------
# Closed-form symbol SNR
# ---------------------------------------------------------------------------

@dataclass
class SnrBreakdown:
    """Per-symbol SNR pieces for one or a batch of channel estimates."""

    c: np.ndarray        # (..., n_sym) correlated-noise coefficient
    u_power: np.ndarray  # (..., n_sym) uncorrelated residual power
    snr: np.ndarray      # (..., n_sym)

    @property
    def snr_ostbc(self) -> np.ndarray:
        return np.min(self.snr, axis=-1)


class SnrEvaluator:
    """Closed-form c_n / U_n machinery for one code.

    Precomputes the Gram blocks G^(XY)[n, k] = X_n^H Y_k for the four
    coefficient-matrix families and the fourth-order tensors

        T4a[n, i, j, q, r] = sum_k G[n, k][i, q] conj(G[n, k][j, r]),
        T4b[n, i, j, q, r] = sum_k G[n, k][i, q] G[n, k][j, r],

    so that the sums over interfering symbols reduce to one matrix product
    with the per-realization error moments.  Families that vanish
    identically (the stacked rate-1/2 codes have A_n^H B_k = 0) are
    dropped, and identical families are merged with weight 2.
    """

    _BLOCK = 256  # trials per contraction block (memory/GEMM tradeoff)

    def __init__(self, code: OstbcCode):
        self.code = code
        nt, ns = code.n_ports, code.n_sym
        gram = {
            "aa": np.einsum("nti,ktj->nkij", code.a.conj(), code.a),
            "ab": np.einsum("nti,ktj->nkij", code.a.conj(), code.b),
            "ba": np.einsum("nti,ktj->nkij", code.b.conj(), code.a),
            "bb": np.einsum("nti,ktj->nkij", code.b.conj(), code.b),
        }
        self.ab_diag = np.ascontiguousarray(
            gram["ab"][np.arange(ns), np.arange(ns)])  # (n_sym, nt, nt)

        # merge family list: (sign for the Re/Im split, weight, gram)
        fams = []
        re_type = {"aa": +1.0, "bb": +1.0, "ab": -1.0, "ba": -1.0}
        pending = dict(gram)
        for name in ("aa", "ab", "ba", "bb"):
            g = pending.pop(name, None)
            if g is None or not np.any(g):
                continue
            weight = 1.0
            for other in list(pending):
                if re_type[other] == re_type[name] and np.array_equal(
                        pending[other], g):
                    weight += 1.0
                    del pending[other]
            fams.append((re_type[name], weight, g))

        self._fams = []
        self._fams_real = []
        self.d_iid = np.zeros((ns, nt, nt), dtype=complex)
        for sign, weight, g in fams:
            t4a = np.einsum("nkiq,nkjr->nijqr", g, g.conj())
            t4b = np.einsum("nkiq,nkjr->nijqr", g, g)
            t4a_flat = t4a.reshape(ns * nt * nt, nt * nt)
            t4b_flat = t4b.reshape(ns * nt * nt, nt * nt)
            if not np.any(t4a_flat.imag) and not np.any(t4b_flat.imag):
                # real tensors (the stacked codes): pre-transpose once so
                # the per-block work is contiguous real GEMMs
                t4a_t = np.ascontiguousarray(t4a_flat.real.T)
                t4b_t = t4a_t if np.array_equal(t4a_flat, t4b_flat) \
                    else np.ascontiguousarray(t4b_flat.real.T)
                self._fams_real.append((sign, weight, t4a_t, t4b_t))
            else:
                self._fams.append((sign, weight, t4a_flat, t4b_flat))
            # sum_k G G^H per symbol, for the uncorrelated-channel path
            self.d_iid += weight * np.einsum(
                "nkiq,nkjq->nij", g, g.conj())
        self.d_iid = np.ascontiguousarray(self.d_iid.real)
        # every catalog code closes to D_n = d * I, making the SNR on
        # uncorrelated channels a function of ||hhat||^2 alone
        d0 = self.d_iid[0, 0, 0]
        if np.max(np.abs(self.d_iid - d0 * np.eye(nt))) < 1e-9:
            self.d_iid_scalar = float(d0)
        else:
            self.d_iid_scalar = None

    # -- generic correlated path -------------------------------------------

    def moment_sums(self, hhat, w, wt) -> np.ndarray:
        """S[t, n] = sum over families of F_a(W) +/- Re F_b(W~), where
        F contracts T4 with hhat* hhat (resp. hhat* hhat*) on the left and
        the given per-trial matrix on the right.  E|eta|^2 = rho_d Es/4 S.
        """
        hhat = np.asarray(hhat, dtype=complex)
        nt = self.code.n_ports
        ns = self.code.n_sym
        t = hhat.shape[0]
        out = np.zeros((t, ns))
        l_h = (hhat.conj()[:, :, None] * hhat[:, None, :]).reshape(t, nt * nt)
        l_t = (hhat.conj()[:, :, None] * hhat.conj()[:, None, :]).reshape(t, nt * nt)
        w_flat = np.asarray(w, dtype=complex).reshape(t, nt * nt)
        wt_flat = np.asarray(wt, dtype=complex).reshape(t, nt * nt)
        for lo in range(0, t, self._BLOCK):
            hi = min(lo + self._BLOCK, t)
            for sign, weight, t4a, t4b in self._fams:
                va = (t4a @ w_flat[lo:hi].T).T.reshape(hi - lo, ns, nt * nt)
                fa = np.einsum("tx,tnx->tn", l_h[lo:hi], va).real
                vb = (t4b @ wt_flat[lo:hi].T).T.reshape(hi - lo, ns, nt * nt)
                fb = np.einsum("tx,tnx->tn", l_t[lo:hi], vb).real
                out[lo:hi] += weight * (fa + sign * fb)
            for sign, weight, t4a_t, t4b_t in self._fams_real:
                # Re(l . (T4 w)) = l_re (T4 w_re) - l_im (T4 w_im): four
                # contiguous real GEMMs of shape (t, nt^2) @ (nt^2, ns nt^2)
                acc = np.zeros((hi - lo, ns))
                for lvec, rvec, s2 in ((l_h, w_flat, 1.0),
                                       (l_t, wt_flat, sign)):
                    t4_t = t4a_t if rvec is w_flat else t4b_t
                    vr = np.ascontiguousarray(rvec[lo:hi].real) @ t4_t
                    vi = np.ascontiguousarray(rvec[lo:hi].imag) @ t4_t
                    vr = vr.reshape(hi - lo, ns, nt * nt)
                    vi = vi.reshape(hi - lo, ns, nt * nt)
                    term = (np.einsum("tx,tnx->tn",
                                      np.ascontiguousarray(lvec[lo:hi].real), vr)
                            - np.einsum("tx,tnx->tn",
                                        np.ascontiguousarray(lvec[lo:hi].imag), vi))
                    acc += s2 * term
                out[lo:hi] += weight * acc
        return out

    def correlated_coeff(self, hhat, err_mean, data_power) -> np.ndarray:
        """c_n = -sqrt(rho_d) [Re(hhat^H mu) + 1j Im(hhat^H A_n^H B_n mu)]."""
        hhat = np.asarray(hhat, dtype=complex)
        err_mean = np.asarray(err_mean, dtype=complex)
        re = np.einsum("ti,ti->t", hhat.conj(), err_mean).real
        im = np.einsum("ti,nij,tj->tn", hhat.conj(), self.ab_diag, err_mean).imag
        return -np.sqrt(data_power) * (re[:, None] + 1j * im)

    def symbol_snr(self, hhat, u, r, data_power, extra_noise=None) -> SnrBreakdown:
        """Batched symbol SNR for general conditional error moments.

        hhat: (T, n_ports); u, r: (T, n_ports, n_ports) conditional gain
        and covariance of the effective estimation error; ``extra_noise``
        optionally adds a per-symbol uncorrelated power (T, n_sym), e.g.
        other-cell data interference.
        """
        hhat = np.atleast_2d(np.asarray(hhat, dtype=complex))
        t = hhat.shape[0]
        mu = np.einsum("tij,tj->ti", np.broadcast_to(
            u, (t,) + np.shape(u)[-2:]), hhat)
        r = np.broadcast_to(r, (t,) + np.shape(r)[-2:])
        w = mu[:, :, None] * mu.conj()[:, None, :] + r
        wt = mu[:, :, None] * mu[:, None, :]
        return self._assemble(hhat, mu, w, wt, data_power, extra_noise)

    def _assemble(self, hhat, mu, w, wt, data_power, extra_noise):
        es = self.code.symbol_energy
        h2 = np.sum(np.abs(hhat) ** 2, axis=1)
        c = self.correlated_coeff(hhat, mu, data_power)
        eta1_pow = data_power * es / 4.0 * self.moment_sums(hhat, w, wt)
        u_pow = np.maximum(eta1_pow - es * np.abs(c) ** 2, 0.0)
        denom = u_pow + h2[:, None]
        if extra_noise is not None:
            denom = denom + extra_noise
        num = es * np.abs(np.sqrt(data_power) * h2[:, None] + c) ** 2
        return SnrBreakdown(c=c, u_power=u_pow, snr=num / denom)

    # -- uncorrelated (scaled-identity covariance) fast path ----------------

    def symbol_snr_iid(self, hhat, beta, err_var, data_power) -> SnrBreakdown:
        """Exact SNR when C_h = beta I and C_e = err_var I (per-trial
        scalars).  The correlated coefficient collapses to a scalar gain
        and the residual power to a quadratic form in precomputed D_n."""
        hhat = np.atleast_2d(np.asarray(hhat, dtype=complex))
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        err_var = np.broadcast_to(np.asarray(err_var, dtype=float), beta.shape)
        es = self.code.symbol_energy
        h2 = np.sum(np.abs(hhat) ** 2, axis=1)
        u_gain = err_var / (err_var + beta)
        r_var = err_var * beta / (err_var + beta)
        c = (-np.sqrt(data_power) * u_gain * h2)[:, None]
        c = np.broadcast_to(c, (len(h2), self.code.n_sym))
        quad = np.einsum("ti,nij,tj->tn", hhat.conj(), self.d_iid, hhat).real
        u_pow = data_power * es / 4.0 * r_var[:, None] * quad
        num = es * (np.sqrt(data_power) * h2 + c[:, 0]) ** 2
        return SnrBreakdown(c=c + 0j, u_power=u_pow,
                            snr=num[:, None] / (u_pow + h2[:, None]))


    def snr_ostbc_iid_from_norm(self, h2, beta, err_var, data_power):
        """Code SNR on uncorrelated channels as a function of ||hhat||^2
        (valid whenever D_n is a scaled identity, which holds for the
        whole catalog; then all symbols share one SNR)."""
        if self.d_iid_scalar is None:
            raise ValueError("code has direction-dependent symbol SNRs")
        h2 = np.asarray(h2, dtype=float)
        beta = np.asarray(beta, dtype=float)
        es = self.code.symbol_energy
        u_gain = err_var / (err_var + beta)
        r_var = err_var * beta / (err_var + beta)
        u_pow = data_power * es * (r_var * self.d_iid_scalar / 4.0) * h2
        num = es * data_power * (1.0 - u_gain) ** 2 * h2 ** 2
        return num / (u_pow + h2)


@lru_cache(maxsize=None)
def get_evaluator(code_id: CodeId) -> SnrEvaluator:
    return SnrEvaluator(make_code(code_id))


def symbol_snr(code: OstbcCode, c_h, c_e, hhat, data_power) -> SnrBreakdown:
    """Single-realization symbol SNR from channel/error covariances."""
    u, r = conditional_gain_and_cov(c_h, c_e)
    ev = get_evaluator(code.code_id)
    out = ev.symbol_snr(np.atleast_2d(hhat), u[None], r[None], data_power)
    return SnrBreakdown(c=out.c[0], u_power=out.u_power[0], snr=out.snr[0])


# ---------------------------------------------------------------------------
# Reference SNR expressions
# ---------------------------------------------------------------------------

def snr_square(hhat, beta, n_ports, block_len, pilot_len, pilot_power,
               data_power, symbol_energy):
    """Symbol SNR of a square code on an uncorrelated channel:

        Es rho_d ||hhat||^2 / (rho_d tau_d beta / (n_t + beta rho_p tau_p) + 1)
        * (beta tau_p rho_p / (beta tau_p rho_p + n_t))^2.
    """
    hhat = np.asarray(hhat, dtype=complex)
    h2 = np.sum(np.abs(hhat) ** 2, axis=-1)
    pe = beta * pilot_len * pilot_power
    lead = symbol_energy * data_power * h2 / (
        data_power * block_len * beta / (n_ports + pe) + 1.0)
    return lead * (pe / (pe + n_ports)) ** 2


def mmse_gain(beta, n_ports, pilot_power, pilot_len) -> float:
    """Scalar mapping LS -> MMSE estimates on uncorrelated channels."""
    pe = beta * pilot_power * pilot_len
    return pe / (pe + n_ports)


def mmse_estimate(c_h, c_e, hhat_ls) -> np.ndarray:
    """Bayes-optimal estimate given the LS statistic:
    hhat_mmse = C_h (C_h + C_e)^-1 hhat_ls (rows of ``hhat_ls`` batched)."""
    c_h = np.asarray(c_h, dtype=complex)
    c_e = np.asarray(c_e, dtype=complex)
    # solve gives (C_h+C_e)^-1 C_h; its Hermitian transpose is the filter
    w = np.linalg.solve(c_h + c_e, c_h)
    return np.asarray(hhat_ls, dtype=complex) @ w.conj()


def snr_general(hhat_mmse, beta, n_ports, pilot_len, pilot_power, data_power):
    """Structure-free SNR bound:

        (rho_d / n_t) ||hhat_mmse||^2
        / (n_t rho_d beta / (n_t + tau_p rho_p beta) + 1).
    """
    hhat_mmse = np.asarray(hhat_mmse, dtype=complex)
    h2 = np.sum(np.abs(hhat_mmse) ** 2, axis=-1)
    denom = n_ports * data_power * beta / (n_ports + pilot_len * pilot_power * beta) + 1.0
    return (data_power / n_ports) * h2 / denom
