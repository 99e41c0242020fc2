"""Multi-cell layout, pilot reuse and the contaminated-estimation SNR.

Nineteen hexagonal cells (home cell plus two rings) share the band.  Cells
are partitioned into pilot groups; cells in the home group transmit the
same pilot block and contaminate the home user's channel estimate, which
becomes hhat = h + e + sum of contaminator channels.  During the data
phase every interfering cell transmits an independent codeword of the
same code, adding interference that is handled by conditioning all
channels jointly on the contaminated estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import UserGeometry, azimuth_from_broadside, beta_from_distance
from .codes import OstbcCode
from .link import SnrBreakdown, get_evaluator

__all__ = [
    "CellGrid",
    "build_grid",
    "mc_estimate",
    "mc_symbol_snr_from_covs",
    "mc_symbol_snr",
    "MultiCellRealization",
]

_SPACING = np.sqrt(3.0)  # center distance of hexagons with circumradius 1


@dataclass(frozen=True)
class CellGrid:
    """19-cell hexagonal layout with a pilot-reuse coloring.

    ``positions`` holds the base-station coordinates with the home cell
    first at the origin; ``contaminators`` indexes the interfering cells
    (into positions[1:]) that share the home cell's pilots.
    """

    reuse: int
    positions: np.ndarray          # (19, 2)
    axial: np.ndarray              # (19, 2) integer axial coordinates
    colors: np.ndarray             # (19,)
    contaminators: np.ndarray      # indices into the 18 interferers

    @property
    def n_interferers(self) -> int:
        return len(self.positions) - 1

    def interferer_positions(self) -> np.ndarray:
        return self.positions[1:]


def _color(a: int, b: int, reuse: int) -> int:
    if reuse == 1:
        return 0
    if reuse == 3:
        # rhombic 3-coloring; adjacent cells always differ
        return (a - b) % 3
    # reuse 4: cosets of the index-4 sublattice generated by (2,0), (1,2)
    return (2 * a + b) % 4


def build_grid(reuse: int) -> CellGrid:
    """Home cell at the origin plus two interfering rings, with the pilot
    groups of the requested reuse factor."""
    if reuse not in (1, 3, 4):
        raise ValueError(f"unsupported pilot reuse {reuse}")
    axial = [(0, 0)]
    for a in range(-2, 3):
        for b in range(-2, 3):
            if (a, b) != (0, 0) and abs(a + b) <= 2:
                axial.append((a, b))
    axial = np.array(axial)
    assert len(axial) == 19
    pos = np.stack([
        _SPACING * (axial[:, 0] + 0.5 * axial[:, 1]),
        _SPACING * (np.sqrt(3.0) / 2.0) * axial[:, 1],
    ], axis=1)
    colors = np.array([_color(a, b, reuse) for a, b in axial])
    contam = np.flatnonzero(colors[1:] == colors[0])
    return CellGrid(reuse, pos, axial, colors, contam)


@dataclass
class MultiCellRealization:
    """Per-interval channels of the home user in a multi-cell drop."""

    h: np.ndarray            # home effective channel
    e: np.ndarray            # estimation noise
    h_k: np.ndarray          # (K, n_ports) interferer channels
    contam: np.ndarray       # bool mask over the K interferers

    @property
    def h_sum(self) -> np.ndarray:
        return self.h_k[self.contam].sum(axis=0) if self.contam.any() \
            else np.zeros_like(self.h)


def mc_estimate(realization: MultiCellRealization) -> np.ndarray:
    """Contaminated LS estimate hhat = h + e + sum of contaminator
    channels (contaminators transmit the identical pilot block, so their
    channels add directly after pilot correlation)."""
    return realization.h + realization.e + realization.h_sum


def interferer_geometry(grid: CellGrid, user_pos, geometry: UserGeometry):
    """Large-scale gain and broadside azimuth from each interfering base
    station to home-cell users at ``user_pos`` (shape (..., 2))."""
    user_pos = np.asarray(user_pos, dtype=float)
    rel = user_pos[..., None, :] - grid.interferer_positions()  # (..., K, 2)
    d = np.hypot(rel[..., 0], rel[..., 1])
    beta = beta_from_distance(geometry, d)
    ang = azimuth_from_broadside(rel)
    return beta, ang


def mc_symbol_snr_from_covs(code: OstbcCode, hhat, c_h, err_var, covs_k,
                            contam, data_power) -> SnrBreakdown:
    """Multi-cell symbol SNR from covariance-level inputs.

    hhat: (T, n_ports) contaminated estimates; c_h: (T, n_ports, n_ports)
    home covariances; err_var: scalar or (T,) LS error variance; covs_k:
    (T, K, n_ports, n_ports) interferer covariances; contam: (K,) bool.

    All channels are conditioned jointly on hhat.  The combined error
    f = e + h_sum takes the single-cell role of e, and the other-cell data
    interference enters as an extra uncorrelated per-symbol power summed
    over all K cells (contaminated ones with their conditional mean and
    covariance, the rest with their prior).
    """
    hhat = np.atleast_2d(np.asarray(hhat, dtype=complex))
    t, nt = hhat.shape
    c_h = np.broadcast_to(np.asarray(c_h, dtype=complex), (t, nt, nt))
    covs_k = np.asarray(covs_k, dtype=complex)
    if covs_k.ndim == 3:
        covs_k = covs_k[None]
    covs_k = np.broadcast_to(covs_k, (t,) + covs_k.shape[-3:])
    contam = np.asarray(contam, dtype=bool)
    ev = get_evaluator(code.code_id)
    es = code.symbol_energy
    eye = np.eye(nt)
    err_var = np.broadcast_to(np.asarray(err_var, dtype=float), (t,))

    c_e = err_var[:, None, None] * eye
    c_sig = covs_k[:, contam].sum(axis=1) if contam.any() \
        else np.zeros((t, nt, nt), dtype=complex)
    c_obs = c_h + c_e + c_sig
    obs_inv = np.linalg.inv(c_obs)

    # combined estimation error f = e + h_sum given hhat
    f_cov = c_e + c_sig
    w_gain = f_cov @ obs_inv
    mu_f = np.einsum("tij,tj->ti", w_gain, hhat)
    r_f = f_cov - f_cov @ obs_inv @ f_cov
    r_f = 0.5 * (r_f + r_f.conj().transpose(0, 2, 1))

    # other-cell data interference, collapsed over cells
    x = np.einsum("tij,tj->ti", obs_inv, hhat)
    w4 = covs_k.sum(axis=1).astype(complex)
    w4t = np.zeros((t, nt, nt), dtype=complex)
    for k in np.flatnonzero(contam):
        ck = covs_k[:, k]
        mu_k = np.einsum("tij,tj->ti", ck, x)
        w4 += (mu_k[:, :, None] * mu_k.conj()[:, None, :]
               - ck @ obs_inv @ ck)
        w4t += mu_k[:, :, None] * mu_k[:, None, :]
    p4 = data_power * es / 4.0 * ev.moment_sums(hhat, w4, w4t)

    w = mu_f[:, :, None] * mu_f.conj()[:, None, :] + r_f
    wt = mu_f[:, :, None] * mu_f[:, None, :]
    return ev._assemble(hhat, mu_f, w, wt, data_power, extra_noise=p4)


def mc_symbol_snr(code: OstbcCode, grid: CellGrid, hhat, c_h, err_var,
                  covs_k, data_power) -> SnrBreakdown:
    """Convenience wrapper pairing a grid's contaminating set with
    covariance-level inputs for a single realization."""
    contam = np.zeros(grid.n_interferers, dtype=bool)
    contam[grid.contaminators] = True
    return mc_symbol_snr_from_covs(code, hhat, c_h, err_var, covs_k,
                                   contam, data_power)
