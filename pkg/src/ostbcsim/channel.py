"""Channel statistics, user geometry and random channel draws.

Small-scale fading is circularly symmetric complex Gaussian with an
exponential spatial correlation across the array; large-scale fading is
distance-dependent path loss normalized so a cell-edge user sees a chosen
single-antenna SNR (noise variance is 1 throughout).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CovarianceSpec",
    "UserGeometry",
    "exp_covariance",
    "sample_channel",
    "place_user",
    "beta_from_distance",
    "azimuth_from_broadside",
    "in_hexagon",
]

HEX_AREA = 3.0 * np.sqrt(3.0) / 2.0  # circumradius 1


@dataclass(frozen=True)
class CovarianceSpec:
    """Second-order statistics of the physical channel.

    ``r`` is the complex correlation between neighboring antennas;
    r = 0 gives i.i.d. fading, |r| = 1 a rank-one covariance.
    """

    n_antennas: int
    beta: float
    r: complex = 0j

    @property
    def iid(self) -> bool:
        return self.r == 0


@dataclass(frozen=True)
class UserGeometry:
    """Cell shape and large-scale fading parameters."""

    shape: str = "disk"  # "disk" | "hexagon", unit circumradius
    exclusion_radius: float = 0.035
    pathloss_exponent: float = 3.8
    cell_edge_snr_db: float = -5.0

    def __post_init__(self):
        if self.shape not in ("disk", "hexagon"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if not self.exclusion_radius < 1.0:
            raise ValueError("exclusion radius must be smaller than the cell")

    @property
    def beta0(self) -> float:
        # distance-1 gain giving the configured cell-edge SNR at unit power
        return 10.0 ** (self.cell_edge_snr_db / 10.0)


def exp_covariance(spec: CovarianceSpec) -> np.ndarray:
    """Exponential-correlation covariance, entry (i, j) equal to
    beta * |r|^|j-i| * exp(1j * arg(r) * (j-i))."""
    if abs(spec.r) > 1.0 + 1e-12:
        raise ValueError(f"|r| must be <= 1, got {abs(spec.r)}")
    d = np.arange(spec.n_antennas)
    diff = d[None, :] - d[:, None]  # j - i
    mag = np.abs(spec.r) ** np.abs(diff)
    return spec.beta * mag * np.exp(1j * np.angle(spec.r) * diff)


def sample_channel(c_g: np.ndarray, rng, size=None) -> np.ndarray:
    """Draw CN(0, c_g) vectors; shape (size, M) if size given, else (M,)."""
    c_g = np.asarray(c_g)
    m = c_g.shape[0]
    try:
        f = np.linalg.cholesky(c_g)
    except np.linalg.LinAlgError:
        # PSD but rank deficient (e.g. |r| = 1): factorize by eigenvalues
        w, v = np.linalg.eigh(c_g)
        if w.min() < -1e-10 * max(w.max(), 1.0):
            raise ValueError("covariance is not positive semi-definite")
        f = v * np.sqrt(np.clip(w, 0.0, None))
    n = size if size is not None else 1
    z = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m)))
    z *= np.sqrt(0.5)
    g = z @ f.T  # row g = (F z)^T, so cov(g) = F F^H
    return g if size is not None else g[0]


def beta_from_distance(geometry: UserGeometry, d) -> np.ndarray:
    """Large-scale gain at distance d (normalized cell units)."""
    return geometry.beta0 * np.asarray(d, dtype=float) ** (-geometry.pathloss_exponent)


def azimuth_from_broadside(xy) -> np.ndarray:
    """Angle of a position as seen from a linear array on the x axis;
    zero for a user due broadside (+y)."""
    xy = np.asarray(xy, dtype=float)
    return np.arctan2(xy[..., 0], xy[..., 1])


def in_hexagon(xy) -> np.ndarray:
    """Point-in-regular-hexagon test (circumradius 1, vertex at +y)."""
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    lim = np.sqrt(3.0) / 2.0 + 1e-12
    ok = np.abs(xy[:, 0]) <= lim
    for ang in (np.pi / 3.0, 2.0 * np.pi / 3.0):
        proj = xy[:, 0] * np.cos(ang) + xy[:, 1] * np.sin(ang)
        ok &= np.abs(proj) <= lim
    return ok


def sample_positions(geometry: UserGeometry, rng, n: int) -> np.ndarray:
    """Uniform positions over the cell shape minus the exclusion disk
    (rejection sampling from the bounding box)."""
    out = np.empty((n, 2))
    got = 0
    r0 = geometry.exclusion_radius
    while got < n:
        cand = rng.uniform(-1.0, 1.0, size=(max(2 * (n - got), 64), 2))
        d2 = np.sum(cand**2, axis=1)
        if geometry.shape == "disk":
            keep = (d2 <= 1.0) & (d2 >= r0**2)
        else:
            keep = in_hexagon(cand) & (d2 >= r0**2)
        cand = cand[keep]
        take = min(len(cand), n - got)
        out[got:got + take] = cand[:take]
        got += take
    return out


def place_user(geometry: UserGeometry, rng, size=None):
    """Drop users uniformly in the cell; returns (positions, beta, arg_r).

    beta follows the path-loss law and arg_r is the user azimuth seen from
    the array broadside (used as the phase of the correlation coefficient).
    """
    n = size if size is not None else 1
    pos = sample_positions(geometry, rng, n)
    d = np.hypot(pos[:, 0], pos[:, 1])
    beta = beta_from_distance(geometry, d)
    arg_r = azimuth_from_broadside(pos)
    if size is None:
        return pos[0], float(beta[0]), float(arg_r[0])
    return pos, beta, arg_r
