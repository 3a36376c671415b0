"""Dense complex linear algebra shared by the rest of the package.

Operators are plain 2-D ``complex128`` numpy arrays and qudit vectors are
1-D arrays. Sites are numbered from 1, with site 1 the most significant
tensor factor (standard ``np.kron`` ordering).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DimensionCapError(ValueError):
    """Raised when an operator would exceed the configured dimension cap."""


@dataclass(frozen=True)
class Tolerance:
    """Numeric policy used by every check in the package."""

    eq: float = 1e-10
    psd_floor: float = -1e-10
    spectral_cutoff: float = 1e-12
    dim_cap: int = 2**14


DEFAULT_TOL = Tolerance()


def _check_cap(rows: int, cols: int, cap: int) -> None:
    if rows > cap or cols > cap:
        raise DimensionCapError(f"{rows}x{cols} operator exceeds dimension cap {cap}")


def kron(a, b, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
    """Kronecker product of two matrices (1-D inputs are treated as columns)."""
    a = as_matrix(a)
    b = as_matrix(b)
    _check_cap(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1], cap)
    return np.kron(a, b)


def kron_all(factors, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = kron(out, f, cap)
    return out


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected a vector or matrix, got shape {a.shape}")
    return a


def dagger(a) -> np.ndarray:
    """Conjugate transpose. A 1-D ket becomes a 1 x dim row."""
    return as_matrix(a).conj().T


def identity(q: int, n: int) -> np.ndarray:
    return np.eye(q**n, dtype=complex)


def basis_ket(q: int, index: int) -> np.ndarray:
    v = np.zeros(q, dtype=complex)
    v[index] = 1.0
    return v


def basis_state(q: int, digits) -> np.ndarray:
    """|x_1 x_2 ... x_N> for a digit sequence."""
    digits = list(digits)
    v = np.zeros(q ** len(digits), dtype=complex)
    v[int(np.ravel_multi_index(tuple(digits), (q,) * len(digits))) if digits else 0] = 1.0
    return v


def n_sites(dim: int, q: int) -> int:
    """Number of qudits in a space of dimension ``dim``; raises if not a power of q."""
    n, d = 0, 1
    while d < dim:
        d *= q
        n += 1
    if d != dim:
        raise ValueError(f"dimension {dim} is not a power of {q}")
    return n


def partial_trace_site(m, q: int, N: int, p: int) -> np.ndarray:
    """Trace out site ``p`` (1-based) of an operator on ``N`` qudits."""
    m = as_matrix(m)
    if N < 1:
        raise ValueError("N must be at least 1")
    if not 1 <= p <= N:
        raise ValueError(f"site {p} out of range [1, {N}]")
    if m.shape != (q**N, q**N):
        raise ValueError(f"expected a {q**N}x{q**N} matrix, got {m.shape}")
    t = m.reshape((q,) * (2 * N))
    out = np.trace(t, axis1=p - 1, axis2=N + p - 1)
    return out.reshape(q ** (N - 1), q ** (N - 1))


def hermitian_violation(m) -> float:
    m = as_matrix(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def spectral_decompose(sigma, tol: Tolerance = DEFAULT_TOL) -> list[tuple[float, np.ndarray]]:
    """Eigen-ensemble of a one-qudit density matrix.

    Returns ``(probability, ket)`` pairs in decreasing probability order,
    dropping eigenvalues below ``tol.spectral_cutoff``.
    """
    sigma = as_matrix(getattr(sigma, "matrix", sigma))
    if sigma.shape[0] != sigma.shape[1]:
        raise ValueError(f"density matrix must be square, got {sigma.shape}")
    herm = hermitian_violation(sigma)
    if herm > tol.eq:
        raise ValueError(f"matrix is not Hermitian (worst violation {herm:.3e})")
    evals, evecs = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    if evals.min() < tol.psd_floor:
        raise ValueError(f"matrix is not PSD (min eigenvalue {evals.min():.3e})")
    pairs = [
        (float(evals[i]), evecs[:, i].copy())
        for i in np.argsort(-evals, kind="stable")
        if evals[i] >= tol.spectral_cutoff
    ]
    return pairs


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A state on ``sites`` qudits of dimension ``q``."""

    q: int
    sites: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dim = self.q**self.sites
        if m.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix for q={self.q}, N={self.sites}, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix has non-finite entries")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.q**self.sites

    def violation(self) -> float:
        """Worst deviation from Hermitian / PSD / unit trace (0 for a valid state)."""
        m = self.matrix
        herm = hermitian_violation(m)
        min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
        return max(herm, max(0.0, -min_eig), abs(np.trace(m) - 1))

    def is_valid(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        m = self.matrix
        min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
        return (
            hermitian_violation(m) <= tol.eq
            and min_eig >= tol.psd_floor
            and abs(np.trace(m) - 1) <= tol.eq
        )


def pure(ket, q: int) -> DensityMatrix:
    ket = np.asarray(ket, dtype=complex)
    return DensityMatrix(q, n_sites(ket.size, q), np.outer(ket, ket.conj()))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    qm, r = np.linalg.qr(z)
    d = np.diag(r)
    return qm * (d / np.abs(d))


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(q: int, N: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    dim = q**N
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(q, N, m / np.trace(m))
