import numpy as np
import pytest

from ostbcsim import codes
from ostbcsim.codes import (CodeId, encode, export_catalog,
                            hurwitz_radon_family, make_code, radon_number,
                            validate_code)

TABLE = {
    CodeId.C1: (1, 1, 1),
    CodeId.C2: (2, 2, 2),
    CodeId.C4: (4, 4, 3),
    CodeId.C8: (8, 16, 8),
    CodeId.C12: (12, 128, 64),
}


@pytest.mark.parametrize("cid", list(CodeId))
def test_catalog_parameters(cid):
    code = make_code(cid)
    assert (code.n_ports, code.block_len, code.n_sym) == TABLE[cid]
    assert code.a.shape == (code.n_sym, code.block_len, code.n_ports)
    assert code.b.shape == code.a.shape


def test_c8_parameters():
    code = make_code(CodeId.C8)
    assert code.block_len == 16
    assert code.code_rate == 0.5


def test_symbol_energy_normalization():
    # E[tr(X^H X)] = block_len when E|s_n|^2 = symbol_energy
    rng = np.random.default_rng(0)
    for cid in CodeId:
        code = make_code(cid)
        s = (rng.standard_normal((4000, code.n_sym))
             + 1j * rng.standard_normal((4000, code.n_sym)))
        s *= np.sqrt(code.symbol_energy / 2.0)
        x = encode(code, s)
        tr = np.sum(np.abs(x) ** 2, axis=(1, 2))
        se = tr.std() / np.sqrt(len(tr))
        assert abs(tr.mean() - code.block_len) < 3 * se


# ---------------------------------------------------------------------------
# Hurwitz-Radon families
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("p,rho", [(1, 1), (2, 2), (4, 4), (8, 8), (16, 9),
                                   (32, 10), (64, 12)])
def test_radon_number(p, rho):
    assert radon_number(p) == rho


def test_family_p2_is_rotation():
    fam = hurwitz_radon_family(2)
    assert len(fam) == 1
    assert np.array_equal(fam[0], [[0.0, 1.0], [-1.0, 0.0]])


def test_family_p1_empty():
    assert hurwitz_radon_family(1) == []


@pytest.mark.parametrize("p", [2, 4, 8, 16, 32, 64])
def test_family_defining_properties(p):
    fam = hurwitz_radon_family(p)
    assert len(fam) == radon_number(p) - 1
    eye = np.eye(p)
    for i, g in enumerate(fam):
        assert np.max(np.abs(g @ g.T - eye)) < 1e-12
        assert np.max(np.abs(g.T + g)) < 1e-12
        for h in fam[i + 1:]:
            assert np.max(np.abs(g @ h + h @ g)) < 1e-12


@pytest.mark.parametrize("p", [3, 5, 12, 128])
def test_family_rejects_bad_sizes(p):
    with pytest.raises(ValueError):
        hurwitz_radon_family(p)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def test_encode_scalar_code():
    code = make_code(CodeId.C1)
    assert np.allclose(encode(code, [3 + 4j]), [[3 + 4j]])


def test_encode_alamouti_form():
    code = make_code(CodeId.C2)
    s1, s2 = 0.3 - 1.1j, -0.7 + 0.2j
    x = encode(code, [s1, s2])
    expected = np.array([[s1, s2], [-np.conj(s2), np.conj(s1)]])
    assert np.allclose(x, expected)


def test_encode_alamouti_example():
    x = encode(make_code(CodeId.C2), [1.0, 1.0j])
    assert np.allclose(x, [[1.0, 1.0j], [1.0j, 1.0]])
    assert np.allclose(x.conj().T @ x, 2.0 * np.eye(2))


def test_encode_zero_symbols():
    for cid in CodeId:
        code = make_code(cid)
        assert not np.any(encode(code, np.zeros(code.n_sym)))


def test_encode_length_mismatch():
    with pytest.raises(ValueError):
        encode(make_code(CodeId.C4), [1.0, 2.0])


def test_encode_batched():
    code = make_code(CodeId.C4)
    rng = np.random.default_rng(1)
    s = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    batch = encode(code, s)
    for i in range(5):
        assert np.allclose(batch[i], encode(code, s[i]))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("cid", list(CodeId))
def test_validator_passes_catalog(cid):
    report = validate_code(make_code(cid), rng=0)
    assert report.max_violation < 1e-12


def test_validator_catches_corruption():
    good = make_code(CodeId.C4)
    a = good.a.copy()
    a[1] = a[0]  # duplicate kills anticommutation
    bad = codes.OstbcCode(good.code_id, good.n_ports, good.block_len,
                          good.n_sym, a, good.b.copy())
    report = validate_code(bad, rng=0)
    assert abs(report.violations["a_anticommute"] - 2.0) < 1e-12


def test_validator_c1_vacuous_cross_terms():
    report = validate_code(make_code(CodeId.C1), rng=0)
    assert report.violations["a_anticommute"] == 0.0
    assert report.max_violation < 1e-12


@pytest.mark.parametrize("cid", list(CodeId))
def test_codeword_orthogonality_random_symbols(cid):
    # X^H X = (sum |s_n|^2) I over many random draws
    code = make_code(cid)
    rng = np.random.default_rng(7)
    s = (rng.standard_normal((1000, code.n_sym))
         + 1j * rng.standard_normal((1000, code.n_sym)))
    x = encode(code, s)
    gram = np.einsum("dti,dtj->dij", x.conj(), x)
    target = np.sum(np.abs(s) ** 2, axis=1)[:, None, None] * np.eye(code.n_ports)
    assert np.max(np.abs(gram - target)) < 1e-10


@pytest.mark.parametrize("cid", list(CodeId))
def test_quadratic_form_identities(cid):
    # Re(v^H A_n^H A_k v) = ||v||^2 delta_nk and Im(v^H A_n^H B_k v) = 0
    code = make_code(cid)
    rng = np.random.default_rng(3)
    v = rng.standard_normal((100, code.n_ports)) \
        + 1j * rng.standard_normal((100, code.n_ports))
    gram_aa = np.einsum("nti,ktj->nkij", code.a.conj(), code.a)
    gram_ab = np.einsum("nti,ktj->nkij", code.a.conj(), code.b)
    quad_aa = np.einsum("vi,nkij,vj->vnk", v.conj(), gram_aa, v)
    idx = np.arange(code.n_sym)
    norms = np.sum(np.abs(v) ** 2, axis=1)
    assert np.max(np.abs(quad_aa.real[:, idx, idx] - norms[:, None])) < 1e-10
    off = ~np.eye(code.n_sym, dtype=bool)
    if off.any():
        assert np.max(np.abs(quad_aa.real[:, off])) < 1e-10
    quad_ab = np.einsum("vi,nkij,vj->vnk", v.conj(), gram_ab, v)
    assert np.max(np.abs(quad_ab.imag)) < 1e-10


def test_export_catalog_roundtrip_values():
    text = export_catalog([make_code(CodeId.C2)])
    lines = text.strip().split("\n")
    assert lines[0] == "code c2"
    assert lines[1] == "n_ports 2 block_len 2 n_sym 2"
    assert lines[2] == "A 1"
    first = [tuple(map(float, pair.split(","))) for pair in lines[3].split()]
    assert first == [(1.0, 0.0), (0.0, 0.0)]
    # every code block present, B matrices included
    assert sum(1 for ln in lines if ln.startswith("B ")) == 2
