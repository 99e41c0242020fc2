"""Dimension-reducing matrices (DRMs).

A DRM is a semi-unitary n_ports x M precoder that maps the code's antenna
ports onto the physical array, so only the n_ports-dimensional effective
channel h = Phi g has to be estimated.  Three constructions are provided:

* ``drm_omni`` -- a Zadoff-Chu diagonal times evenly spaced DFT columns.
  Besides semi-unitarity it radiates equal power from every antenna and
  toward each of the M discrete DFT angles, and its per-antenna waveforms
  are constant-modulus.
* ``drm_rand`` -- rows of a Haar-distributed unitary matrix.
* ``drm_dft``  -- rows taken directly from spread-out DFT columns
  (spatially selective; kept as a comparison baseline).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Drm",
    "drm_omni",
    "drm_rand",
    "drm_dft",
    "make_drm",
    "effective_covariance",
    "zadoff_chu",
    "ToeplitzProjector",
    "export_drm",
]

DRM_KINDS = ("omni", "random", "dft")


@dataclass(frozen=True, eq=False)
class Drm:
    """A dimension-reducing matrix with its construction metadata."""

    kind: str
    phi: np.ndarray  # (n_ports, n_antennas)
    meta: dict

    @property
    def n_ports(self) -> int:
        return self.phi.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.phi.shape[1]


def _dft_column(m: int, k) -> np.ndarray:
    """Unit-norm column(s) k of the M-point DFT matrix."""
    n = np.arange(m)[:, None]
    k = np.atleast_1d(k)[None, :]
    return np.exp(-2j * np.pi * n * k / m) / np.sqrt(m)


def zadoff_chu(m: int, root: int | None = None) -> np.ndarray:
    """Unit-modulus Zadoff-Chu sequence of length m.

    Uses the even/odd-length chirp with the smallest root coprime to m
    unless one is given.  The DFT of the sequence has constant magnitude,
    which is what the omni DRM construction relies on.
    """
    if root is None:
        root = next(u for u in range(1, m + 1) if np.gcd(u, m) == 1)
    if np.gcd(root, m) != 1:
        raise ValueError(f"root {root} not coprime with {m}")
    n = np.arange(m)
    exponent = n * n if m % 2 == 0 else n * (n + 1)
    return np.exp(-1j * np.pi * root * exponent / m)


def drm_omni(n_antennas: int, n_ports: int, root: int | None = None) -> Drm:
    """Zadoff-Chu-masked DFT DRM: Phi^T = diag(z) F_sub with F_sub the
    n_ports evenly spaced unit-norm DFT columns."""
    if n_ports >= n_antennas:
        raise ValueError("need n_ports < n_antennas")
    if n_antennas % n_ports != 0:
        raise ValueError(
            f"n_ports={n_ports} must divide n_antennas={n_antennas}")
    z = zadoff_chu(n_antennas, root)
    cols = np.arange(n_ports) * (n_antennas // n_ports)
    f_sub = _dft_column(n_antennas, cols)
    phi = (z[:, None] * f_sub).T
    used_root = next(u for u in range(1, n_antennas + 1)
                     if np.gcd(u, n_antennas) == 1) if root is None else root
    return Drm("omni", _freeze(phi), {"zc_root": used_root, "dft_cols": cols.tolist()})


def drm_rand(n_antennas: int, n_ports: int, rng) -> Drm:
    """First n_ports rows of a Haar-distributed unitary matrix."""
    if n_ports >= n_antennas:
        raise ValueError("need n_ports < n_antennas")
    rng = np.random.default_rng(rng)
    z = (rng.standard_normal((n_antennas, n_antennas))
         + 1j * rng.standard_normal((n_antennas, n_antennas))) * np.sqrt(0.5)
    q, r = np.linalg.qr(z)
    # phase correction makes the distribution exactly Haar
    d = np.diagonal(r)
    q = q * (d / np.abs(d))[None, :]
    return Drm("random", _freeze(q[:, :n_ports].T.conj()), {})


def drm_dft(n_antennas: int, n_ports: int, snap: bool = False) -> Drm:
    """Rows are the unit-norm DFT columns with 1-based indices
    (M / (2 n_ports)) * (2n - 1).

    The index formula requires 2*n_ports to divide M; non-integer indices
    are rejected unless ``snap=True`` explicitly rounds them (recorded in
    the metadata so comparisons cannot silently drift).
    """
    if n_ports >= n_antennas:
        raise ValueError("need n_ports < n_antennas")
    exact = n_antennas % (2 * n_ports) == 0
    raw = (n_antennas / (2.0 * n_ports)) * (2 * np.arange(1, n_ports + 1) - 1)
    if not exact:
        if not snap:
            raise ValueError(
                f"column indices {raw.tolist()} are not integers for "
                f"M={n_antennas}, n_ports={n_ports}; pass snap=True to round")
        cols = np.unique(np.round(raw).astype(int) - 1)
        if len(cols) != n_ports:
            raise ValueError("snapped column indices collide")
    else:
        cols = raw.astype(int) - 1
    phi = _dft_column(n_antennas, cols).conj().T
    return Drm("dft", _freeze(phi), {"dft_cols": (cols + 1).tolist(),
                                     "snapped": not exact})


def make_drm(kind: str, n_antennas: int, n_ports: int, rng=None, **kw) -> Drm:
    if kind == "omni":
        return drm_omni(n_antennas, n_ports, **kw)
    if kind == "random":
        return drm_rand(n_antennas, n_ports, rng, **kw)
    if kind == "dft":
        return drm_dft(n_antennas, n_ports, **kw)
    raise ValueError(f"unknown DRM kind {kind!r}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def effective_covariance(drm_or_phi, c_g: np.ndarray) -> np.ndarray:
    """Covariance of the effective channel: C_h = Phi C_g Phi^H."""
    phi = drm_or_phi.phi if isinstance(drm_or_phi, Drm) else np.asarray(drm_or_phi)
    c_g = np.asarray(c_g)
    if phi.shape[1] != c_g.shape[0]:
        raise ValueError(f"dimension mismatch: {phi.shape} vs {c_g.shape}")
    return phi @ c_g @ phi.conj().T


class ToeplitzProjector:
    """Per-diagonal projections of a DRM, for fast effective covariances.

    An exponential-correlation covariance is Toeplitz,
    C_g = beta * sum_d t_d S_d with t_d = |r|^|d| e^{1j arg(r) d}, so
    C_h = beta * sum_d t_d K_d with K_d = Phi S_d Phi^H precomputed once.
    ``batch`` evaluates C_h for many (beta, arg_r) pairs at fixed |r|.
    """

    def __init__(self, phi: np.ndarray):
        phi = np.asarray(phi)
        self.n_ports, self.m = phi.shape
        ks = []
        for d in range(-(self.m - 1), self.m):
            if d >= 0:
                k = phi[:, : self.m - d] @ phi[:, d:].conj().T
            else:
                k = phi[:, -d:] @ phi[:, : self.m + d].conj().T
            ks.append(k)
        self.offsets = np.arange(-(self.m - 1), self.m)
        self.k_flat = np.stack(ks).reshape(2 * self.m - 1, -1)  # (D, nt*nt)

    def batch(self, beta, arg_r, r_abs: float) -> np.ndarray:
        """Effective covariances, shape (len(beta), n_ports, n_ports)."""
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        arg_r = np.atleast_1d(np.asarray(arg_r, dtype=float))
        t = (r_abs ** np.abs(self.offsets))[None, :] * np.exp(
            1j * arg_r[:, None] * self.offsets[None, :])
        c = (beta[:, None] * t) @ self.k_flat
        c = c.reshape(-1, self.n_ports, self.n_ports)
        # enforce exact Hermitian symmetry against rounding
        return 0.5 * (c + c.conj().transpose(0, 2, 1))


def export_drm(drm: Drm) -> str:
    """Text dump in the same row-major 're,im' format as the code catalog."""
    from .codes import format_matrix

    head = (f"drm {drm.kind}\nn_ports {drm.n_ports} "
            f"n_antennas {drm.n_antennas}")
    return head + "\n" + format_matrix(drm.phi) + "\n"
