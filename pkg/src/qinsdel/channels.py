"""Insertion, erasure/deletion and insdel channels on density matrices.

Channels are finite mixtures of position-resolved error maps. Each map has
two independent implementations: a direct one (splicing a state into the
tensor factors, or iterated partial traces) and a Kraus-sum one built from
``InsertionOp`` / ``DeletionOp`` matrices. The KL verifier works with
``spanning_kraus_family``, the computational-basis Kraus words whose linear
span contains every Kraus operator of every (t1, t2)-insdel channel.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .kraus import DeletionOp, InsertionOp, build_deletion, build_insertion, check_positions
from .tensor import (
    DEFAULT_TOL,
    DensityMatrix,
    Tolerance,
    as_matrix,
    basis_ket,
    partial_trace_site,
    random_density,
    spectral_decompose,
)
from .words import KrausWord, materialize, word_from_ops

DEFAULT_FAMILY_CAP = 10**5


class ChannelKind(str, enum.Enum):
    INSERTION = "insertion"
    DELETION = "deletion"


class EnumerationCapError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SeparableState:
    """Product of one-qudit density matrices, one per inserted qudit."""

    factors: tuple[DensityMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if any(f.sites != 1 for f in self.factors):
            raise ValueError("every factor must be a one-qudit state")
        if len({f.q for f in self.factors}) > 1:
            raise ValueError("factors have different qudit dimensions")

    @property
    def t(self) -> int:
        return len(self.factors)

    @classmethod
    def pure(cls, kets) -> SeparableState:
        out = []
        for k in kets:
            k = np.asarray(k, dtype=complex)
            out.append(DensityMatrix(k.size, 1, np.outer(k, k.conj())))
        return cls(tuple(out))


@dataclass(frozen=True, eq=False)
class MixtureTerm:
    weight: float
    positions: tuple[int, ...]
    state: SeparableState | None = None


@dataclass(frozen=True, eq=False)
class MixtureChannel:
    kind: ChannelKind
    t: int
    terms: tuple[MixtureTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        object.__setattr__(self, "terms", tuple(self.terms))
        total = 0.0
        for term in self.terms:
            if term.weight < 0:
                raise ValueError(f"negative weight {term.weight}")
            if len(term.positions) != self.t:
                raise ValueError(f"term positions {term.positions} do not have {self.t} entries")
            if self.kind is ChannelKind.INSERTION and (term.state is None or term.state.t != self.t):
                raise ValueError("insertion terms need a separable state with one factor per position")
            if self.kind is ChannelKind.DELETION and term.state is not None:
                raise ValueError("deletion terms carry no state")
            total += term.weight
        if self.terms and abs(total - 1) > 1e-9:
            raise ValueError(f"weights sum to {total}, not 1")
        if not self.terms and self.t:
            raise ValueError("a non-trivial channel needs at least one term")


@dataclass(frozen=True, eq=False)
class InsdelSpec:
    """Deletions (``del_mixture``) followed by insertions (``ins_mixture``)."""

    t1: int
    t2: int
    del_mixture: MixtureChannel
    ins_mixture: MixtureChannel

    def __post_init__(self):
        if self.del_mixture.kind is not ChannelKind.DELETION or self.del_mixture.t != self.t2:
            raise ValueError("del_mixture must be a deletion channel with t = t2")
        if self.ins_mixture.kind is not ChannelKind.INSERTION or self.ins_mixture.t != self.t1:
            raise ValueError("ins_mixture must be an insertion channel with t = t1")


def identity_channel(kind: ChannelKind) -> MixtureChannel:
    return MixtureChannel(kind, 0, (MixtureTerm(1.0, (), SeparableState(()) if kind == ChannelKind.INSERTION else None),))


# ---------------------------------------------------------------------------
# single error maps


def insert_one(rho: DensityMatrix, p: int, sigma: DensityMatrix) -> DensityMatrix:
    """Splice the one-qudit state ``sigma`` into slot ``p`` of ``rho``."""
    q, N = rho.q, rho.sites
    if not 1 <= p <= N + 1:
        raise ValueError(f"slot {p} out of range [1, {N + 1}]")
    if sigma.sites != 1 or sigma.q != q:
        raise ValueError("sigma must be a one-qudit state of the same dimension")
    t = np.multiply.outer(rho.matrix.reshape((q,) * (2 * N)), sigma.matrix)
    rows = list(range(p - 1)) + [2 * N] + list(range(p - 1, N))
    cols = [N + j for j in range(p - 1)] + [2 * N + 1] + [N + j for j in range(p - 1, N)]
    out = np.transpose(t, rows + cols).reshape(q ** (N + 1), q ** (N + 1))
    return DensityMatrix(q, N + 1, out)


def insert_one_kraus(rho: DensityMatrix, p: int, sigma: DensityMatrix, tol: Tolerance = DEFAULT_TOL) -> DensityMatrix:
    q, N = rho.q, rho.sites
    out = np.zeros((q ** (N + 1),) * 2, dtype=complex)
    for c, ket in spectral_decompose(sigma, tol):
        k = build_insertion(InsertionOp(N, (p,), (ket,)), q)
        out += c * k @ rho.matrix @ k.conj().T
    return DensityMatrix(q, N + 1, out)


def ins_error(rho: DensityMatrix, positions, sigma: SeparableState) -> DensityMatrix:
    """Insert the factors of ``sigma`` at ``positions``, smallest slot first."""
    positions = check_positions(positions, rho.sites)
    if len(positions) != sigma.t:
        raise ValueError(f"{len(positions)} positions for {sigma.t} inserted qudits")
    for p, s in zip(positions, sigma.factors):
        rho = insert_one(rho, p, s)
    return rho


def ins_error_kraus(rho: DensityMatrix, positions, sigma: SeparableState, tol: Tolerance = DEFAULT_TOL) -> DensityMatrix:
    """Same map as ``ins_error`` via the product eigen-ensemble of ``sigma``."""
    positions = check_positions(positions, rho.sites)
    q, N, t = rho.q, rho.sites, len(positions)
    ensembles = [spectral_decompose(s, tol) for s in sigma.factors]
    out = np.zeros((q ** (N + t),) * 2, dtype=complex)
    for combo in itertools.product(*ensembles):
        prob = float(np.prod([c for c, _ in combo]))
        k = build_insertion(InsertionOp(N, positions, [v for _, v in combo]), q)
        out += prob * k @ rho.matrix @ k.conj().T
    return DensityMatrix(q, N + t, out)


def era_error(rho: DensityMatrix, positions) -> DensityMatrix:
    """Partial trace over ``positions``, largest slot first."""
    N = rho.sites
    positions = tuple(int(p) for p in positions)
    check_positions(positions, N - len(positions))
    m = rho.matrix
    for k, p in enumerate(reversed(positions)):
        m = partial_trace_site(m, rho.q, N - k, p)
    return DensityMatrix(rho.q, N - len(positions), m)


def era_error_kraus(rho: DensityMatrix, positions) -> DensityMatrix:
    q, N = rho.q, rho.sites
    positions = tuple(int(p) for p in positions)
    t = len(positions)
    out = np.zeros((q ** (N - t),) * 2, dtype=complex)
    for digits in itertools.product(range(q), repeat=t):
        k = build_deletion(DeletionOp(N - t, positions, [basis_ket(q, a) for a in digits]), q)
        out += k @ rho.matrix @ k.conj().T
    return DensityMatrix(q, N - t, out)


# ---------------------------------------------------------------------------
# channels


def apply_channel(rho: DensityMatrix, ch: MixtureChannel) -> DensityMatrix:
    if ch.t == 0:
        return rho
    if ch.kind is ChannelKind.DELETION and ch.t > rho.sites:
        raise ValueError(f"cannot delete {ch.t} of {rho.sites} qudits")
    out = None
    for term in ch.terms:
        if ch.kind is ChannelKind.INSERTION:
            part = ins_error(rho, term.positions, term.state)
        else:
            part = era_error(rho, term.positions)
        out = term.weight * part.matrix if out is None else out + term.weight * part.matrix
    sites = rho.sites + ch.t if ch.kind is ChannelKind.INSERTION else rho.sites - ch.t
    return DensityMatrix(rho.q, sites, out)


def apply_insdel(rho: DensityMatrix, spec: InsdelSpec) -> DensityMatrix:
    if spec.t2 >= rho.sites:
        raise ValueError(f"t2 = {spec.t2} must be smaller than N = {rho.sites}")
    return apply_channel(apply_channel(rho, spec.del_mixture), spec.ins_mixture)


def insdel_kraus_operators(N: int, q: int, spec: InsdelSpec, tol: Tolerance = DEFAULT_TOL) -> list[tuple[float, np.ndarray]]:
    """``(weight, I_{P,U|a>} D_{Q,<b|})`` pairs whose weighted sum reproduces the channel."""
    m = N - spec.t2
    out = []
    for dterm in spec.del_mixture.terms:
        for bdigits in itertools.product(range(q), repeat=spec.t2):
            d = DeletionOp(m, dterm.positions, [basis_ket(q, b) for b in bdigits])
            for iterm in spec.ins_mixture.terms:
                ensembles = [spectral_decompose(s, tol) for s in iterm.state.factors]
                for combo in itertools.product(*ensembles):
                    prob = float(np.prod([c for c, _ in combo]))
                    word = word_from_ops(q, InsertionOp(m, iterm.positions, [v for _, v in combo]), d)
                    out.append((dterm.weight * iterm.weight * prob, materialize(word)))
    return out


def apply_insdel_kraus(rho: DensityMatrix, spec: InsdelSpec, tol: Tolerance = DEFAULT_TOL) -> DensityMatrix:
    N, q = rho.sites, rho.q
    out = np.zeros((q ** (N + spec.t1 - spec.t2),) * 2, dtype=complex)
    for w, k in insdel_kraus_operators(N, q, spec, tol):
        out += w * k @ rho.matrix @ k.conj().T
    return DensityMatrix(q, N + spec.t1 - spec.t2, out)


def uniform_deletion(N: int, t: int) -> MixtureChannel:
    subsets = list(itertools.combinations(range(1, N + 1), t))
    return MixtureChannel(ChannelKind.DELETION, t, [MixtureTerm(1 / len(subsets), s) for s in subsets])


def uniform_insertion(N: int, t: int, states) -> MixtureChannel:
    """Uniform over slot sets of ``N + t`` qudits and over the given separable states."""
    states = list(states)
    subsets = list(itertools.combinations(range(1, N + t + 1), t))
    w = 1 / (len(subsets) * len(states))
    return MixtureChannel(ChannelKind.INSERTION, t, [MixtureTerm(w, s, st) for s in subsets for st in states])


def random_separable(q: int, t: int, rng: np.random.Generator) -> SeparableState:
    return SeparableState(tuple(random_density(q, 1, rng) for _ in range(t)))


def uniform_insdel(N: int, q: int, t1: int, t2: int, rng: np.random.Generator, n_states: int = 2) -> InsdelSpec:
    """Uniform deletion slots, uniform insertion slots, ``n_states`` random mixed separable states."""
    if t2 >= N:
        raise ValueError(f"t2 = {t2} must be smaller than N = {N}")
    states = [random_separable(q, t1, rng) for _ in range(n_states if t1 else 1)]
    return InsdelSpec(t1, t2, uniform_deletion(N, t2), uniform_insertion(N - t2, t1, states))


# ---------------------------------------------------------------------------
# spanning Kraus family


def family_size(N: int, q: int, t1: int, t2: int) -> int:
    return comb(N - t2 + t1, t1) * comb(N, t2) * q ** (t1 + t2)


def spanning_kraus_family(N: int, q: int, t1: int, t2: int, cap: int = DEFAULT_FAMILY_CAP) -> list[KrausWord]:
    """All words ``I_{P,|a>} D_{Q,<b|}`` with computational-basis vectors ``a``, ``b``."""
    if t1 < 0 or t2 < 0:
        raise ValueError("t1 and t2 must be non-negative")
    if t2 >= N:
        raise ValueError(f"t2 = {t2} must be smaller than N = {N}")
    size = family_size(N, q, t1, t2)
    if size > cap:
        raise EnumerationCapError(f"family of {size} words exceeds the enumeration cap {cap}")
    m = N - t2
    basis = [basis_ket(q, a) for a in range(q)]
    out = []
    for Q in itertools.combinations(range(1, N + 1), t2):
        for b in itertools.product(range(q), repeat=t2):
            d = DeletionOp(m, Q, [basis[x] for x in b])
            for P in itertools.combinations(range(1, m + t1 + 1), t1):
                for a in itertools.product(range(q), repeat=t1):
                    out.append(word_from_ops(q, InsertionOp(m, P, [basis[x] for x in a]), d))
    return out


def span_residual(target, family_mats) -> float:
    """Least-squares residual of ``target`` against the span of ``family_mats``."""
    a = np.stack([as_matrix(f).reshape(-1) for f in family_mats], axis=1)
    b = as_matrix(target).reshape(-1)
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    return float(np.linalg.norm(a @ coef - b))
