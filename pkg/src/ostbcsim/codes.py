"""Orthogonal space-time block codes (OSTBC) and their algebraic validation.

A linear STBC maps n_sym complex symbols onto a (block_len x n_ports) matrix

    X = sum_n  Re(s_n) * A_n + 1j * Im(s_n) * B_n,

and a code is orthogonal when X^H X = (sum_n |s_n|^2) * I for every symbol
vector.  The catalog holds five codes: the trivial single-port code, the
Alamouti code, the classic rate-3/4 four-port design, and two rate-1/2 codes
(8 and 12 ports) built by stacking real orthogonal designs obtained from
Hurwitz-Radon matrix families (the construction of Tarokh et al., 1999).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

__all__ = [
    "CodeId",
    "OstbcCode",
    "make_code",
    "encode",
    "validate_code",
    "hurwitz_radon_family",
    "radon_number",
    "export_catalog",
]


class CodeId(str, Enum):
    """Identifiers of the five catalog codes (named by port count)."""

    C1 = "c1"
    C2 = "c2"
    C4 = "c4"
    C8 = "c8"
    C12 = "c12"


# (n_ports, block_len, n_sym) for each catalog code
CODE_PARAMS = {
    CodeId.C1: (1, 1, 1),
    CodeId.C2: (2, 2, 2),
    CodeId.C4: (4, 4, 3),
    CodeId.C8: (8, 16, 8),
    CodeId.C12: (12, 128, 64),
}


@dataclass(frozen=True, eq=False)
class OstbcCode:
    """An OSTBC given by its coefficient matrices.

    Attributes
    ----------
    code_id : CodeId
    n_ports : int
        Antenna ports spanned by a codeword (code size).
    block_len : int
        Channel uses per codeword (decoding delay).
    n_sym : int
        Complex symbols carried per codeword.
    a, b : ndarray, shape (n_sym, block_len, n_ports)
        Coefficient matrices for the real and imaginary symbol parts.
    """

    code_id: CodeId
    n_ports: int
    block_len: int
    n_sym: int
    a: np.ndarray
    b: np.ndarray

    @property
    def code_rate(self) -> Fraction:
        return Fraction(self.n_sym, self.block_len)

    @property
    def symbol_energy(self) -> float:
        # E|s_n|^2 that gives E[tr(X^H X)] = block_len
        return self.block_len / (self.n_sym * self.n_ports)

    def __repr__(self):
        return (f"OstbcCode({self.code_id.value}, n_ports={self.n_ports}, "
                f"block_len={self.block_len}, n_sym={self.n_sym})")


# ---------------------------------------------------------------------------
# Hurwitz-Radon families
# ---------------------------------------------------------------------------

_R = np.array([[0.0, 1.0], [-1.0, 0.0]])   # rotation; antisymmetric
_P = np.array([[0.0, 1.0], [1.0, 0.0]])    # swap; symmetric
_Q = np.array([[1.0, 0.0], [0.0, -1.0]])   # sign flip; symmetric


def radon_number(p: int) -> int:
    """The Hurwitz-Radon number: for p = 2^(4a+b) * odd, rho = 8a + 2^b."""
    if p < 1:
        raise ValueError("p must be positive")
    two = 0
    while p % 2 == 0:
        p //= 2
        two += 1
    a, b = divmod(two, 4)
    return 8 * a + 2**b


def _kron_all(mats, family):
    return [np.kron(m, f) for m in mats for f in family]


def hurwitz_radon_family(p: int) -> list[np.ndarray]:
    """Maximal family of p x p Hurwitz-Radon matrices, p a power of two <= 64.

    Returns rho(p) - 1 real matrices G_j, each orthogonal and antisymmetric,
    pairwise anticommuting.  Together with the identity they generate a p x m
    real orthogonal design in p variables for any m <= rho(p) via
    G(x) = [x | G_2 x | ... | G_m x].
    """
    if p not in (1, 2, 4, 8, 16, 32, 64):
        raise ValueError(f"p must be a power of two <= 64, got {p}")
    if p == 1:
        return []
    if p == 2:
        return [_R.copy()]
    if p == 4:
        return [np.kron(_R, np.eye(2)), np.kron(_P, _R), np.kron(_Q, _R)]
    if p == 8:
        base = hurwitz_radon_family(4)
        # commutant of `base` inside the 4x4 orthogonal group
        comm = [np.kron(_R, _Q), np.kron(_R, _P), np.kron(np.eye(2), _R)]
        return ([np.kron(_R, np.eye(4))]
                + _kron_all([_Q], base)
                + _kron_all([_P], comm))
    if p in (16, 32):
        sub = hurwitz_radon_family(p // 2)
        return [np.kron(_R, np.eye(p // 2))] + _kron_all([_Q], sub)
    # p == 64: the doubling step saturates at 10 matrices, one short of
    # rho(64) - 1 = 11.  Use the +8 periodicity instead: take the full
    # 16-dimensional family, its (symmetric, orthogonal) volume element
    # gamma, and graft the 4-dimensional family onto the second factor.
    f16 = hurwitz_radon_family(16)
    gamma = np.eye(16)
    for f in f16:
        gamma = gamma @ f
    return (_kron_all(f16, [np.eye(4)])
            + _kron_all([gamma], hurwitz_radon_family(4)))


def _real_design(p: int, m: int) -> np.ndarray:
    """Coefficient matrices G_n of a p x m real orthogonal design in p vars.

    Returns shape (p, p, m); G(x) = sum_n x_n G[n] satisfies
    G(x)^T G(x) = ||x||^2 I_m.  Requires m <= rho(p).
    """
    if m > radon_number(p):
        raise ValueError(f"no {p}x{m} full-variable design: m > rho({p})")
    cols = [np.eye(p)] + hurwitz_radon_family(p)[: m - 1]
    g = np.empty((p, p, m))
    for n in range(p):
        for i, mat in enumerate(cols):
            g[n, :, i] = mat[:, n]
    return g


def _stacked_halfrate(p: int, m: int):
    """Rate-1/2 complex code from a real design: top block carries the
    symbols, bottom block their conjugates, normalized so A_n^H A_n = I."""
    g = _real_design(p, m)
    s = 1.0 / np.sqrt(2.0)
    a = np.concatenate([g, g], axis=1) * s
    b = np.concatenate([g, -g], axis=1) * s
    return a.astype(complex), b.astype(complex)


# ---------------------------------------------------------------------------
# Code construction
# ---------------------------------------------------------------------------

def _alamouti():
    a = np.zeros((2, 2, 2), dtype=complex)
    b = np.zeros((2, 2, 2), dtype=complex)
    # X = [[s1, s2], [-s2*, s1*]]
    a[0] = np.eye(2)
    b[0] = [[1, 0], [0, -1]]
    a[1] = [[0, 1], [-1, 0]]
    b[1] = [[0, 1], [1, 0]]
    return a, b


def _rate34_four_port():
    # X = [[ s1,   s2,   s3,   0 ],
    #      [-s2*,  s1*,  0,    s3],
    #      [-s3*,  0,    s1*, -s2],
    #      [ 0,   -s3*,  s2*,  s1]]
    a = np.zeros((3, 4, 4), dtype=complex)
    b = np.zeros((3, 4, 4), dtype=complex)
    a[0] = np.eye(4)
    b[0] = np.diag([1.0, -1.0, -1.0, 1.0])
    a[1][0, 1], a[1][1, 0], a[1][2, 3], a[1][3, 2] = 1, -1, -1, 1
    b[1][0, 1], b[1][1, 0], b[1][2, 3], b[1][3, 2] = 1, 1, -1, -1
    a[2][0, 2], a[2][1, 3], a[2][2, 0], a[2][3, 1] = 1, 1, -1, -1
    b[2][0, 2], b[2][1, 3], b[2][2, 0], b[2][3, 1] = 1, 1, 1, 1
    return a, b


_CODE_CACHE: dict[CodeId, OstbcCode] = {}


def make_code(code_id) -> OstbcCode:
    """Construct one of the catalog codes (cached; codes are immutable)."""
    code_id = CodeId(code_id)
    if code_id in _CODE_CACHE:
        return _CODE_CACHE[code_id]
    if code_id is CodeId.C1:
        a = np.ones((1, 1, 1), dtype=complex)
        ab = (a, a.copy())
    elif code_id is CodeId.C2:
        ab = _alamouti()
    elif code_id is CodeId.C4:
        ab = _rate34_four_port()
    elif code_id is CodeId.C8:
        ab = _stacked_halfrate(8, 8)
    else:
        ab = _stacked_halfrate(64, 12)
    n_ports, block_len, n_sym = CODE_PARAMS[code_id]
    a, b = ab
    for arr in (a, b):
        arr.setflags(write=False)
    code = OstbcCode(code_id, n_ports, block_len, n_sym, a, b)
    assert a.shape == (n_sym, block_len, n_ports)
    _CODE_CACHE[code_id] = code
    return code


def all_codes() -> list[OstbcCode]:
    return [make_code(cid) for cid in CodeId]


def encode(code: OstbcCode, s) -> np.ndarray:
    """Map a symbol vector (or batch, shape (..., n_sym)) to codewords."""
    s = np.asarray(s, dtype=complex)
    if s.shape[-1] != code.n_sym:
        raise ValueError(f"expected {code.n_sym} symbols, got {s.shape[-1]}")
    return (np.einsum("...n,nti->...ti", s.real, code.a)
            + 1j * np.einsum("...n,nti->...ti", s.imag, code.b))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    code_id: CodeId
    violations: dict

    @property
    def max_violation(self) -> float:
        return max(self.violations.values())

    def ok(self, tol: float = 1e-10) -> bool:
        return self.max_violation < tol

    def __str__(self):
        lines = [f"{self.code_id.value}: max violation {self.max_violation:.3e}"]
        lines += [f"  {k:24s} {v:.3e}" for k, v in self.violations.items()]
        return "\n".join(lines)


def _max_abs(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def validate_code(code: OstbcCode, n_vectors: int = 100, n_symbol_draws: int = 200,
                  rng=None) -> ValidationReport:
    """Measure the worst absolute violation of every defining identity.

    Checks, for all n, k:
        A_n^H A_n = I,  B_n^H B_n = I,
        A_n^H A_k = -A_k^H A_n  and likewise for B (n != k),
        A_n^H B_k = B_k^H A_n,
    the codeword identity X^H X = (sum |s_n|^2) I on random symbol draws, and
    the quadratic-form identities Re(v^H A_n^H A_k v) = ||v||^2 delta_nk and
    Im(v^H A_n^H B_k v) = 0 on random complex vectors.
    """
    rng = np.random.default_rng(rng)
    a, b = code.a, code.b
    eye = np.eye(code.n_ports)

    gram_aa = np.einsum("nti,ktj->nkij", a.conj(), a)
    gram_bb = np.einsum("nti,ktj->nkij", b.conj(), b)
    gram_ab = np.einsum("nti,ktj->nkij", a.conj(), b)

    v = {}
    idx = np.arange(code.n_sym)
    v["a_unitary"] = _max_abs(gram_aa[idx, idx] - eye)
    v["b_unitary"] = _max_abs(gram_bb[idx, idx] - eye)
    anti_a = gram_aa + np.swapaxes(gram_aa, 0, 1)
    anti_b = gram_bb + np.swapaxes(gram_bb, 0, 1)
    off = ~np.eye(code.n_sym, dtype=bool)
    v["a_anticommute"] = _max_abs(anti_a[off])
    v["b_anticommute"] = _max_abs(anti_b[off])
    # A_n^H B_k = B_k^H A_n  <=>  gram_ab[n, k] Hermitian
    v["ab_symmetry"] = _max_abs(gram_ab - gram_ab.conj().transpose(0, 1, 3, 2))

    s = (rng.standard_normal((n_symbol_draws, code.n_sym))
         + 1j * rng.standard_normal((n_symbol_draws, code.n_sym))) * np.sqrt(0.5)
    x = encode(code, s)
    gram = np.einsum("dti,dtj->dij", x.conj(), x)
    target = np.einsum("dn->d", np.abs(s) ** 2)[:, None, None] * eye
    v["codeword_orthogonality"] = _max_abs(gram - target)

    vecs = (rng.standard_normal((n_vectors, code.n_ports))
            + 1j * rng.standard_normal((n_vectors, code.n_ports)))
    quad_aa = np.einsum("vi,nkij,vj->vnk", vecs.conj(), gram_aa, vecs)
    norms = np.sum(np.abs(vecs) ** 2, axis=1)
    diag_err = _max_abs(quad_aa.real[:, idx, idx] - norms[:, None])
    v["re_quadratic_diag"] = diag_err
    v["re_quadratic_off"] = _max_abs(quad_aa.real[:, off])
    quad_ab = np.einsum("vi,nkij,vj->vnk", vecs.conj(), gram_ab, vecs)
    v["im_cross"] = _max_abs(quad_ab.imag)

    return ValidationReport(code.code_id, v)


# ---------------------------------------------------------------------------
# Text export (for cross-implementation diffing)
# ---------------------------------------------------------------------------

def format_matrix(m: np.ndarray) -> str:
    """Row-major text dump with 're,im' entries."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return "\n".join(
        " ".join(f"{z.real:.12e},{z.imag:.12e}" for z in row) for row in m
    )


def export_catalog(codes=None) -> str:
    """Dump every code's A_n/B_n matrices in a diff-friendly text format."""
    out = []
    for code in (codes or all_codes()):
        out.append(f"code {code.code_id.value}")
        out.append(f"n_ports {code.n_ports} block_len {code.block_len} "
                   f"n_sym {code.n_sym}")
        for name, mats in (("A", code.a), ("B", code.b)):
            for n in range(code.n_sym):
                out.append(f"{name} {n + 1}")
                out.append(format_matrix(mats[n]))
    return "\n".join(out) + "\n"
