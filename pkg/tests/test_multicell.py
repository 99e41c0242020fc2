import numpy as np
import pytest
from scipy.spatial.distance import cdist

from ostbcsim.channel import (CovarianceSpec, UserGeometry, exp_covariance,
                              sample_channel)
from ostbcsim.codes import CodeId, make_code
from ostbcsim.link import conditional_gain_and_cov, get_evaluator
from ostbcsim.multicell import (MultiCellRealization, build_grid,
                                interferer_geometry, mc_estimate,
                                mc_symbol_snr_from_covs, _SPACING)

from oracles import multicell_oracle


# ---------------------------------------------------------------------------
# Grid construction
# ---------------------------------------------------------------------------

def test_grid_has_19_cells_home_first():
    grid = build_grid(1)
    assert len(grid.positions) == 19
    assert np.allclose(grid.positions[0], 0.0)
    # two rings: 6 at spacing, 12 further out
    d = np.hypot(*grid.positions[1:].T)
    assert np.count_nonzero(np.isclose(d, _SPACING)) == 6


@pytest.mark.parametrize("reuse,n_contam", [(1, 18), (3, 6), (4, 4)])
def test_contaminator_counts(reuse, n_contam):
    grid = build_grid(reuse)
    assert len(grid.contaminators) == n_contam


@pytest.mark.parametrize("reuse", [3, 4])
def test_coloring_is_proper(reuse):
    grid = build_grid(reuse)
    d = cdist(grid.positions, grid.positions)
    adjacent = (d > 0.1) & (d < _SPACING + 0.1)
    same = grid.colors[:, None] == grid.colors[None, :]
    assert not np.any(adjacent & same)


def test_unsupported_reuse_rejected():
    with pytest.raises(ValueError):
        build_grid(2)


def test_interferer_geometry_distances():
    grid = build_grid(3)
    geo = UserGeometry(shape="hexagon")
    beta, ang = interferer_geometry(grid, np.zeros(2), geo)
    # user at the home center: nearest interferers one spacing away
    d = (geo.beta0 / beta) ** (1.0 / geo.pathloss_exponent)
    assert np.isclose(d.min(), _SPACING)
    assert beta.shape == (18,) and ang.shape == (18,)


# ---------------------------------------------------------------------------
# Contaminated estimation
# ---------------------------------------------------------------------------

def test_mc_estimate_no_contaminators():
    rng = np.random.default_rng(0)
    h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    e = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    hk = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    real = MultiCellRealization(h, e, hk, np.zeros(3, dtype=bool))
    assert np.allclose(mc_estimate(real), h + e)


def test_mc_estimate_one_contaminator_noiseless():
    rng = np.random.default_rng(1)
    h = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    h1 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    real = MultiCellRealization(h, np.zeros(2), h1[None, :],
                                np.ones(1, dtype=bool))
    assert np.allclose(mc_estimate(real), h + h1)


def test_mc_estimate_covariance():
    # cov(hhat_mc) = C_h + C_e + sum of contaminator covariances
    rng = np.random.default_rng(2)
    nt, n = 3, 120_000
    c_h = exp_covariance(CovarianceSpec(nt, 0.8, 0.5 * np.exp(0.4j)))
    c_1 = exp_covariance(CovarianceSpec(nt, 0.3, 0.6 * np.exp(-0.9j)))
    c_2 = exp_covariance(CovarianceSpec(nt, 0.15, 0.7 * np.exp(1.4j)))
    err_var = 0.2
    h = sample_channel(c_h, rng, size=n)
    e = sample_channel(err_var * np.eye(nt), rng, size=n)
    h1 = sample_channel(c_1, rng, size=n)
    h2 = sample_channel(c_2, rng, size=n)
    hhat = h + e + h1 + h2
    cov = hhat.T @ hhat.conj() / n
    target = c_h + err_var * np.eye(nt) + c_1 + c_2
    se = np.abs(np.diag(target)).max() / np.sqrt(n)
    assert np.max(np.abs(cov - target)) < 4 * se


# ---------------------------------------------------------------------------
# Multi-cell SNR
# ---------------------------------------------------------------------------

def test_mc_snr_degenerates_to_single_cell():
    rng = np.random.default_rng(3)
    code = make_code(CodeId.C4)
    nt = code.n_ports
    c_h = exp_covariance(CovarianceSpec(nt, 0.6, 0.7 * np.exp(0.4j)))
    err_var, rho_d = 0.3, 1.1
    hhat = rng.standard_normal((5, nt)) + 1j * rng.standard_normal((5, nt))
    covs = np.zeros((5, 3, nt, nt))
    mc = mc_symbol_snr_from_covs(code, hhat, np.broadcast_to(c_h, (5, nt, nt)),
                                 err_var, covs, np.zeros(3, bool), rho_d)
    u, r = conditional_gain_and_cov(c_h, err_var * np.eye(nt))
    sc = get_evaluator(code.code_id).symbol_snr(hhat, u[None], r[None], rho_d)
    assert np.max(np.abs(mc.snr - sc.snr) / sc.snr) < 1e-10


def test_mc_snr_continuous_in_interferer_power():
    # scaling every interferer covariance to 1e-6 of the home channel
    # reproduces the single-cell SNR to high accuracy
    rng = np.random.default_rng(4)
    code = make_code(CodeId.C2)
    nt = code.n_ports
    c_h = exp_covariance(CovarianceSpec(nt, 0.9, 0.4 * np.exp(0.2j)))
    covs = np.stack([
        exp_covariance(CovarianceSpec(nt, 1e-6, 0.5 * np.exp(0.3j))),
        exp_covariance(CovarianceSpec(nt, 1e-6, 0.8 * np.exp(-0.7j))),
    ])[None]
    err_var, rho_d = 0.25, 1.0
    hhat = rng.standard_normal((1, nt)) + 1j * rng.standard_normal((1, nt))
    contam = np.array([True, False])
    mc = mc_symbol_snr_from_covs(code, hhat, c_h[None], err_var, covs,
                                 contam, rho_d)
    u, r = conditional_gain_and_cov(c_h, err_var * np.eye(nt))
    sc = get_evaluator(code.code_id).symbol_snr(hhat, u[None], r[None], rho_d)
    assert np.max(np.abs(mc.snr - sc.snr) / sc.snr) < 1e-4


def test_higher_reuse_raises_snr():
    # same geometry, reuse 4 contaminates less than reuse 1 and the pilot
    # is longer: the median paired SNR difference is positive
    rng = np.random.default_rng(5)
    code = make_code(CodeId.C2)
    nt = code.n_ports
    n = 400
    c_h = np.broadcast_to(0.5 * np.eye(nt), (n, nt, nt))
    covs = np.broadcast_to(0.2 * np.eye(nt), (n, 18, nt, nt))
    rho_p, rho_d = 2.0, 1.0
    snrs = {}
    for reuse in (1, 4):
        grid = build_grid(reuse)
        contam = np.zeros(18, bool)
        contam[grid.contaminators] = True
        err_var = nt / (rho_p * reuse * nt)
        c_obs = c_h + err_var * np.eye(nt) + covs[:, contam].sum(axis=1)
        fac = np.linalg.cholesky(c_obs)
        z = (rng.standard_normal((n, nt)) + 1j * rng.standard_normal((n, nt)))
        hhat = np.einsum("tij,tj->ti", fac, z * np.sqrt(0.5))
        res = mc_symbol_snr_from_covs(code, hhat, c_h, err_var, covs,
                                      contam, rho_d)
        snrs[reuse] = res.snr_ostbc
    assert np.median(snrs[4] - snrs[1]) > 0


@pytest.mark.parametrize("cid,seed", [("c2", 21), ("c4", 22)])
def test_mc_snr_against_conditional_oracle(cid, seed):
    # closed form vs exact stacked-Gaussian conditional sampling plus full
    # detection with interfering codewords
    code = make_code(cid)
    nt = code.n_ports
    rng = np.random.default_rng(seed)
    c_h = exp_covariance(CovarianceSpec(
        nt, rng.uniform(0.5, 1.2),
        rng.uniform(0.3, 0.9) * np.exp(1j * rng.uniform(-np.pi, np.pi))))
    covs = np.stack([exp_covariance(CovarianceSpec(
        nt, rng.uniform(0.05, 0.5),
        rng.uniform(0.3, 0.9) * np.exp(1j * rng.uniform(-np.pi, np.pi))))
        for _ in range(3)])
    contam = np.array([True, True, False])
    err_var = rng.uniform(0.1, 0.4)
    rho_d = rng.uniform(0.6, 1.4)
    c_obs = c_h + err_var * np.eye(nt) + covs[contam].sum(axis=0)
    hhat = sample_channel(c_obs, rng)
    closed = mc_symbol_snr_from_covs(code, hhat[None], c_h[None], err_var,
                                     covs[None], contam, rho_d)
    mc, se = multicell_oracle(code, c_h, err_var, covs, contam, hhat, rho_d,
                              n_samples=240_000, rng=seed + 50)
    assert np.max(np.abs(closed.snr[0] - mc) / se) < 4.0
