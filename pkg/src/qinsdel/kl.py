"""Knill-Laflamme checks, theorem sweeps and recovery channels."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    DEFAULT_FAMILY_CAP,
    InsdelSpec,
    MixtureChannel,
    apply_channel,
    apply_insdel,
    spanning_kraus_family,
)
from .tensor import DEFAULT_TOL, DensityMatrix, Tolerance, random_ket
from .words import KrausWord, adjoint_word, apply_word, materialize


class CodeError(ValueError):
    pass


class RecoveryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuantumCode:
    """Orthonormal codewords, stored as the rows of ``codewords`` (d x q^N)."""

    q: int
    N: int
    codewords: np.ndarray = field(repr=False)
    label: str = ""
    ortho_tol: float = field(default=1e-8, repr=False)

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.codewords, dtype=complex))
        if c.shape[1] != self.q**self.N:
            raise CodeError(f"codewords have dimension {c.shape[1]}, expected {self.q ** self.N}")
        gram = c.conj() @ c.T
        for a in range(c.shape[0]):
            if abs(gram[a, a] - 1) > self.ortho_tol:
                raise CodeError(f"codeword {a} has squared norm {gram[a, a].real:.12g}")
            for b in range(a + 1, c.shape[0]):
                if abs(gram[a, b]) > self.ortho_tol:
                    raise CodeError(f"codewords {a} and {b} overlap: |<{a}|{b}>| = {abs(gram[a, b]):.3e}")
        object.__setattr__(self, "codewords", c)

    @property
    def d(self) -> int:
        return self.codewords.shape[0]

    @property
    def isometry(self) -> np.ndarray:
        """Columns are the codewords (q^N x d)."""
        return self.codewords.T

    def projector(self) -> np.ndarray:
        c = self.isometry
        return c @ c.conj().T


def random_code(q: int, N: int, d: int, rng: np.random.Generator, label: str = "random") -> QuantumCode:
    z = rng.standard_normal((q**N, d)) + 1j * rng.standard_normal((q**N, d))
    qm, _ = np.linalg.qr(z)
    return QuantumCode(q, N, qm.T, label)


# ---------------------------------------------------------------------------
# Gram data


def _check_word(code: QuantumCode, w: KrausWord) -> None:
    if w.q != code.q or w.sites_in != code.N:
        raise ValueError(f"word acts on {w.sites_in} qudits of dimension {w.q}; code has N={code.N}, q={code.q}")


def gram_matrix(code: QuantumCode, eu: KrausWord, ev: KrausWord) -> np.ndarray:
    """``G[a, b] = <a_L| eu^dag ev |b_L>`` computed on the codewords."""
    _check_word(code, eu)
    _check_word(code, ev)
    if eu.sites_out != ev.sites_out:
        raise ValueError("words have different output dimensions")
    xu = apply_word(eu, code.isometry)
    xv = apply_word(ev, code.isometry)
    return xu.conj().T @ xv


def gram_matrix_dense(code: QuantumCode, eu: KrausWord, ev: KrausWord) -> np.ndarray:
    c = code.isometry
    return c.conj().T @ materialize(adjoint_word(eu) @ ev) @ c


@dataclass(frozen=True, eq=False)
class GramReport:
    """Gram blocks over all compatible word pairs.

    ``gram[u, v]`` is the raw d x d block; pairs whose output dimensions
    differ are NaN. Violations are measured on blocks of words rescaled to
    unit operator norm on the code.
    """

    gram: np.ndarray = field(repr=False)
    g_values: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    max_offdiag: float
    max_diag_spread: float
    worst_offdiag_pair: tuple[int, int] | None
    worst_diag_pair: tuple[int, int] | None


@dataclass(frozen=True, eq=False)
class KLVerdict:
    passed: bool
    tolerance: float
    report: GramReport
    family_size: int

    @property
    def orthogonality(self) -> bool:
        return self.report.max_offdiag <= self.tolerance

    @property
    def non_deformation(self) -> bool:
        return self.report.max_diag_spread <= self.tolerance


def _images(code: QuantumCode, family, workers: int) -> list[np.ndarray]:
    c = code.isometry
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda w: apply_word(w, c), family))
    return [apply_word(w, c) for w in family]


def check_kl(
    code: QuantumCode,
    family: list[KrausWord],
    tol: float = DEFAULT_TOL.eq,
    workers: int = 1,
    policy: Tolerance = DEFAULT_TOL,
) -> KLVerdict:
    """Knill-Laflamme conditions for ``code`` against every pair of ``family``."""
    if not family:
        raise ValueError("empty Kraus family")
    for w in family:
        _check_word(code, w)
    d, F = code.d, len(family)
    images = _images(code, family, workers)
    norms = np.array([np.linalg.norm(x, 2) if x.size else 0.0 for x in images])
    unit = [x / n if n > policy.spectral_cutoff else np.zeros_like(x) for x, n in zip(images, norms)]

    gram = np.full((F, F, d, d), np.nan, dtype=complex)
    normed = np.full((F, F, d, d), np.nan, dtype=complex)
    outs = np.array([w.sites_out for w in family])
    for sites in sorted(set(outs.tolist())):
        idx = np.flatnonzero(outs == sites)
        y = np.stack([unit[i] for i in idx])
        block = np.einsum("kia,lib->klab", y.conj(), y)
        # exact Hermitian symmetry: lower triangle mirrors the upper one
        mirrored = np.conj(np.swapaxes(np.swapaxes(block, 0, 1), 2, 3))
        lower = np.tril(np.ones((len(idx), len(idx)), dtype=bool), -1)
        block = np.where(lower[:, :, None, None], mirrored, block)
        normed[np.ix_(idx, idx)] = block
        gram[np.ix_(idx, idx)] = block * np.multiply.outer(norms[idx], norms[idx])[:, :, None, None]

    valid = ~np.isnan(normed[:, :, 0, 0].real)
    filled = np.where(valid[:, :, None, None], normed, 0.0)
    diag = np.diagonal(filled, axis1=2, axis2=3)  # (F, F, d)
    off = np.abs(filled - np.eye(d) * filled).reshape(F, F, -1).max(axis=2)
    off_max = np.where(valid, off, -1.0)
    spread = np.where(valid, np.max(np.abs(diag - diag.mean(axis=2, keepdims=True)), axis=2), -1.0)
    g_values = np.where(valid, np.diagonal(gram, axis1=2, axis2=3).mean(axis=2), np.nan)

    def worst(a):
        flat = int(np.argmax(a))
        u, v = divmod(flat, F)
        return (u, v) if a[u, v] >= 0 else None

    max_off = float(max(off_max.max(), 0.0))
    max_spread = float(max(spread.max(), 0.0))
    report = GramReport(gram, g_values, norms, max_off, max_spread, worst(off_max), worst(spread))
    return KLVerdict(max_off <= tol and max_spread <= tol, tol, report, F)


def check_insdel_code(
    code: QuantumCode,
    t1: int,
    t2: int,
    tol: float = DEFAULT_TOL.eq,
    cap: int = DEFAULT_FAMILY_CAP,
    workers: int = 1,
) -> KLVerdict:
    """KL check against the spanning family of the (t1, t2)-insdel channel."""
    if t2 >= code.N:
        raise ValueError(f"t2 = {t2} must be smaller than N = {code.N}")
    return check_kl(code, spanning_kraus_family(code.N, code.q, t1, t2, cap), tol, workers)


@dataclass(frozen=True)
class SweepRow:
    s1: int
    s2: int
    verdict: KLVerdict


def theorem_sweep(
    code: QuantumCode,
    T: int,
    tol: float = DEFAULT_TOL.eq,
    cap: int = DEFAULT_FAMILY_CAP,
    workers: int = 1,
) -> list[SweepRow]:
    """Check every (s1, s2) with s1 + s2 = T, ordered by increasing s2."""
    if not 0 <= T < code.N:
        raise ValueError(f"T = {T} must satisfy 0 <= T < N = {code.N}")
    return [SweepRow(T - s2, s2, check_insdel_code(code, T - s2, s2, tol, cap, workers)) for s2 in range(T + 1)]


def agreement(rows: list[SweepRow]) -> bool:
    return len({r.verdict.passed for r in rows}) <= 1


# ---------------------------------------------------------------------------
# recovery


def _polar_isometry(z: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(z, full_matrices=False)
    return u @ vh


def build_recovery(
    code: QuantumCode,
    family: list[KrausWord],
    tol: float = DEFAULT_TOL.eq,
    policy: Tolerance = DEFAULT_TOL,
) -> list[np.ndarray]:
    """Recovery Kraus operators for a family that passes the KL check.

    The matrix of g values is diagonalised, each rotated Kraus operator
    restricted to the code is replaced by the isometric factor of its polar
    decomposition, and the operators ``code <- image`` are completed to a
    channel. When input and output spaces coincide the completion is the
    projector onto the unused part of the output space; it is merged into an
    operator whose image is the code itself if there is one, so that
    operator acts as the identity on the complement.
    """
    verdict = check_kl(code, family, tol)
    if not verdict.passed:
        raise RecoveryError(
            f"code fails the KL check (offdiag {verdict.report.max_offdiag:.3e}, "
            f"spread {verdict.report.max_diag_spread:.3e})"
        )
    if len({w.sites_out for w in family}) != 1:
        raise RecoveryError("all family members must share an output dimension")
    c = code.isometry
    images = np.stack([apply_word(w, c) for w in family])  # (F, D_out, d)
    g = verdict.report.g_values
    g = (g + g.conj().T) / 2
    lam, vecs = np.linalg.eigh(g)
    keep = lam > max(policy.spectral_cutoff, tol) * max(lam.max(), 0.0)
    isometries = [_polar_isometry(np.tensordot(vecs[:, k], images, axes=(0, 0))) for k in np.flatnonzero(keep)]

    d_in, d_out = c.shape[0], images.shape[1]
    ops = [c @ w.conj().T for w in isometries]
    stacked = np.hstack(isometries) if isometries else np.zeros((d_out, 0))
    u, s, _ = np.linalg.svd(stacked, full_matrices=True)
    rank = int(np.sum(s > 0.5))
    comp = u[:, rank:]  # orthonormal basis of the unused output space
    if comp.shape[1] == 0:
        return ops
    if d_in == d_out:
        proj = comp @ comp.conj().T
        code_proj = code.projector()
        for k, w in enumerate(isometries):
            if np.max(np.abs(w @ w.conj().T - code_proj)) <= max(tol, 1e-9):
                ops[k] = ops[k] + proj
                return ops
        return ops + [proj]
    for start in range(0, comp.shape[1], d_in):
        chunk = comp[:, start : start + d_in]
        ops.append(np.eye(d_in, chunk.shape[1], dtype=complex) @ chunk.conj().T)
    return ops


def completeness_violation(ops: list[np.ndarray]) -> float:
    total = sum(r.conj().T @ r for r in ops)
    return float(np.max(np.abs(total - np.eye(total.shape[0]))))


def apply_kraus(ops: list[np.ndarray], rho: np.ndarray) -> np.ndarray:
    return sum(r @ rho @ r.conj().T for r in ops)


def random_code_state(code: QuantumCode, rng: np.random.Generator) -> DensityMatrix:
    """Random mixture of random pure states in the code space."""
    k = int(rng.integers(1, code.d + 1))
    weights = rng.dirichlet(np.ones(k))
    c = code.isometry
    m = np.zeros((c.shape[0],) * 2, dtype=complex)
    for w in weights:
        v = c @ random_ket(code.d, rng)
        m += w * np.outer(v, v.conj())
    return DensityMatrix(code.q, code.N, m)


@dataclass(frozen=True)
class RecoveryReport:
    max_deviation: float
    samples: int
    tolerance: float
    completeness: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def verify_recovery(
    code: QuantumCode,
    channel: MixtureChannel | InsdelSpec | None,
    recovery: list[np.ndarray],
    samples: int = 50,
    tol: float = 1e-8,
    rng: np.random.Generator | None = None,
) -> RecoveryReport:
    """Max entrywise deviation of ``R(N(rho))`` from ``rho`` over random code states."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(samples):
        rho = random_code_state(code, rng)
        if channel is None:
            noisy = rho
        elif isinstance(channel, InsdelSpec):
            noisy = apply_insdel(rho, channel)
        else:
            noisy = apply_channel(rho, channel)
        out = apply_kraus(recovery, noisy.matrix)
        worst = max(worst, float(np.max(np.abs(out - rho.matrix))))
    return RecoveryReport(worst, samples, tol, completeness_violation(recovery))
