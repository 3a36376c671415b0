"""Insertion and deletion operators.

``InsertionOp(n, P, kets)`` is the q^(n+t) x q^n map that splices the kets
into slots ``P`` (1-based, strictly increasing) of an n-qudit state;
``DeletionOp(n, P, bras)`` is its adjoint shape, projecting slots ``P`` of
an (n+t)-qudit state onto the conjugated vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import DEFAULT_TOL, identity, kron, kron_all


def check_positions(positions, n: int) -> tuple[int, ...]:
    positions = tuple(int(p) for p in positions)
    t = len(positions)
    if any(b <= a for a, b in zip(positions, positions[1:])):
        raise ValueError(f"positions {positions} are not strictly increasing")
    if positions and (positions[0] < 1 or positions[-1] > n + t):
        raise ValueError(f"positions {positions} not contained in [1, {n + t}]")
    return positions


def _vectors(vecs, t: int) -> tuple[np.ndarray, ...]:
    vecs = tuple(np.asarray(v, dtype=complex).reshape(-1) for v in vecs)
    if len(vecs) != t:
        raise ValueError(f"expected {t} vectors, got {len(vecs)}")
    if len({v.size for v in vecs}) > 1:
        raise ValueError("vectors have different dimensions")
    return vecs


@dataclass(frozen=True, eq=False)
class InsertionOp:
    n: int
    positions: tuple[int, ...]
    kets: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        object.__setattr__(self, "positions", check_positions(self.positions, self.n))
        object.__setattr__(self, "kets", _vectors(self.kets, len(self.positions)))

    @property
    def t(self) -> int:
        return len(self.positions)

    def adjoint(self) -> DeletionOp:
        return DeletionOp(self.n, self.positions, self.kets)


@dataclass(frozen=True, eq=False)
class DeletionOp:
    n: int
    positions: tuple[int, ...]
    bras: tuple[np.ndarray, ...] = field(repr=False)  # stored as kets, applied conjugated

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        object.__setattr__(self, "positions", check_positions(self.positions, self.n))
        object.__setattr__(self, "bras", _vectors(self.bras, len(self.positions)))

    @property
    def t(self) -> int:
        return len(self.positions)

    def adjoint(self) -> InsertionOp:
        return InsertionOp(self.n, self.positions, self.bras)


def single_insertion(n: int, p: int, ket, q: int, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
    """I^n_{p,|ket>} = 1_{q^(p-1)} (x) |ket> (x) 1_{q^(n+1-p)}."""
    if not 1 <= p <= n + 1:
        raise ValueError(f"position {p} not in [1, {n + 1}]")
    return kron(kron(identity(q, p - 1), np.asarray(ket).reshape(q, 1), cap), identity(q, n + 1 - p), cap)


def single_deletion(n: int, p: int, bra, q: int, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
    if not 1 <= p <= n + 1:
        raise ValueError(f"position {p} not in [1, {n + 1}]")
    row = np.asarray(bra).reshape(1, q).conj()
    return kron(kron(identity(q, p - 1), row, cap), identity(q, n + 1 - p), cap)


def build_insertion(op: InsertionOp, q: int, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
    """Dense matrix of ``op``, assembled as the product of single-slot insertions.

    The slot with the smallest position is inserted first, each later one
    acting on one more qudit.
    """
    out = identity(q, op.n)
    for k, (p, ket) in enumerate(zip(op.positions, op.kets)):
        out = single_insertion(op.n + k, p, ket, q, cap) @ out
    return out


def build_deletion(op: DeletionOp, q: int, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
    out = identity(q, op.n)
    for k, (p, bra) in enumerate(zip(op.positions, op.bras)):
        out = out @ single_deletion(op.n + k, p, bra, q, cap)
    return out


def build_insertion_direct(op: InsertionOp, q: int, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
    """Reference construction: one Kronecker factor per slot."""
    slots = dict(zip(op.positions, op.kets))
    factors = [slots[j].reshape(q, 1) if j in slots else np.eye(q) for j in range(1, op.n + op.t + 1)]
    return kron_all(factors, cap)


def build_deletion_direct(op: DeletionOp, q: int, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
    slots = dict(zip(op.positions, op.bras))
    factors = [slots[j].reshape(1, q).conj() if j in slots else np.eye(q) for j in range(1, op.n + op.t + 1)]
    return kron_all(factors, cap)


def _as_columns(v, dim: int) -> tuple[np.ndarray, bool]:
    v = np.asarray(v, dtype=complex)
    vec = v.ndim == 1
    m = v.reshape(-1, 1) if vec else v
    if m.shape[0] != dim:
        raise ValueError(f"dimension mismatch: operator expects {dim}, got {m.shape[0]}")
    return m, vec


def apply_insertion(op: InsertionOp, v, q: int) -> np.ndarray:
    """``build_insertion(op) @ v`` without building the operator.

    ``v`` may be a ket or a matrix whose columns are kets.
    """
    m, vec = _as_columns(v, q**op.n)
    cols = m.shape[1]
    # axis 0 indexes columns, axis j is qudit j
    t = m.T.reshape((cols,) + (q,) * op.n)
    for ket in op.kets:
        t = np.multiply.outer(t, ket)
    t = np.moveaxis(t, range(1 + op.n, 1 + op.n + op.t), [p for p in op.positions])
    out = t.reshape(cols, q ** (op.n + op.t)).T
    return out[:, 0].copy() if vec else out


def apply_deletion(op: DeletionOp, v, q: int) -> np.ndarray:
    """``build_deletion(op) @ v`` without building the operator."""
    m, vec = _as_columns(v, q ** (op.n + op.t))
    cols = m.shape[1]
    t = m.T.reshape((cols,) + (q,) * (op.n + op.t))
    # contract from the largest slot down so earlier axis indices stay put
    for p, bra in sorted(zip(op.positions, op.bras), key=lambda x: -x[0]):
        t = np.tensordot(t, bra.conj(), axes=([p], [0]))
    out = t.reshape(cols, q**op.n).T
    return out[:, 0].copy() if vec else out


def materialize_op(op, q: int, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
    if isinstance(op, InsertionOp):
        return build_insertion(op, q, cap)
    return build_deletion(op, q, cap)

