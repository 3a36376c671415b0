"""Symbolic words in single-slot insertion (I) and deletion (D) letters.

A word is stored in matrix order: ``letters[0]`` is the leftmost factor and
acts last. Every letter carries its superscript ``n`` (the number of identity
factors) and its 1-based slot ``p``; ``I^n_p`` maps n qudits to n+1 and
``D^n_p`` maps n+1 qudits to n, with ``1 <= p <= n+1`` in both cases.

The rewrite rules below act on the adjacent pair ``(letters[i], letters[i+1])``
and never change the operator the word denotes:

==============  =============  ==========================================
rule            pattern         effect
==============  =============  ==========================================
``swap_ii``     I I             reorder two insertions
``swap_dd``     D D             reorder two deletions
``contract_di`` D I             move the deletion right, or contract to a scalar
``swap_id``     I D             move the insertion right
==============  =============  ==========================================
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .kraus import (
    DeletionOp,
    InsertionOp,
    apply_deletion,
    apply_insertion,
    single_deletion,
    single_insertion,
)
from .tensor import DEFAULT_TOL, identity


class RewriteError(ValueError):
    """The requested rule does not match the letters at the given index."""


class Kind(str, enum.Enum):
    INS = "I"
    DEL = "D"


@dataclass(frozen=True, eq=False)
class Letter:
    kind: Kind
    n: int
    p: int
    vec: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "vec", np.asarray(self.vec, dtype=complex).reshape(-1))
        if self.n < 0:
            raise ValueError(f"negative superscript {self.n}")
        if not 1 <= self.p <= self.n + 1:
            raise ValueError(f"{self.kind.value}^{self.n}: position {self.p} not in [1, {self.n + 1}]")

    @property
    def sites_in(self) -> int:
        return self.n if self.kind is Kind.INS else self.n + 1

    @property
    def sites_out(self) -> int:
        return self.n + 1 if self.kind is Kind.INS else self.n

    def adjoint(self) -> Letter:
        other = Kind.DEL if self.kind is Kind.INS else Kind.INS
        return Letter(other, self.n, self.p, self.vec)

    def matrix(self, q: int, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
        if self.kind is Kind.INS:
            return single_insertion(self.n, self.p, self.vec, q, cap)
        return single_deletion(self.n, self.p, self.vec, q, cap)

    def op(self) -> InsertionOp | DeletionOp:
        cls = InsertionOp if self.kind is Kind.INS else DeletionOp
        return cls(self.n, (self.p,), (self.vec,))

    def __eq__(self, other):
        if not isinstance(other, Letter):
            return NotImplemented
        return (
            self.kind is other.kind
            and self.n == other.n
            and self.p == other.p
            and np.array_equal(self.vec, other.vec)
        )

    __hash__ = None


def ins(n: int, p: int, vec) -> Letter:
    return Letter(Kind.INS, n, p, vec)


def dele(n: int, p: int, vec) -> Letter:
    return Letter(Kind.DEL, n, p, vec)


@dataclass(frozen=True, eq=False)
class KrausWord:
    """``scalar * letters[0] @ letters[1] @ ...`` acting on ``sites_in`` qudits."""

    q: int
    sites_in: int
    letters: tuple[Letter, ...] = ()
    scalar: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        object.__setattr__(self, "scalar", complex(self.scalar))
        sites = self.sites_in
        for k in range(len(self.letters) - 1, -1, -1):
            letter = self.letters[k]
            if letter.vec.size != self.q:
                raise ValueError(f"letter {k} has a vector of dimension {letter.vec.size}, expected {self.q}")
            if letter.sites_in != sites:
                raise ValueError(
                    f"letter {k} ({letter.kind.value}^{letter.n}) expects {letter.sites_in} qudits, receives {sites}"
                )
            sites = letter.sites_out

    @property
    def sites_out(self) -> int:
        return self.letters[0].sites_out if self.letters else self.sites_in

    @property
    def dim_in(self) -> int:
        return self.q**self.sites_in

    @property
    def dim_out(self) -> int:
        return self.q**self.sites_out

    def counts(self) -> tuple[int, int]:
        """(number of insertions, number of deletions)."""
        n_ins = sum(1 for x in self.letters if x.kind is Kind.INS)
        return n_ins, len(self.letters) - n_ins

    def scaled(self, c: complex) -> KrausWord:
        return KrausWord(self.q, self.sites_in, self.letters, self.scalar * c)

    def __matmul__(self, other: KrausWord) -> KrausWord:
        if other.sites_out != self.sites_in or other.q != self.q:
            raise ValueError(f"cannot compose: {other.sites_out} output qudits vs {self.sites_in} input qudits")
        return KrausWord(self.q, other.sites_in, self.letters + other.letters, self.scalar * other.scalar)

    def __eq__(self, other):
        if not isinstance(other, KrausWord):
            return NotImplemented
        return (
            self.q == other.q
            and self.sites_in == other.sites_in
            and self.scalar == other.scalar
            and self.letters == other.letters
        )

    __hash__ = None

    def __str__(self) -> str:
        return render(self)


def render(w: KrausWord) -> str:
    """Debug text: ``<scalar> [q=<q>, <in>-><out>]: L(p=..,n=..) -> ...`` in application order."""
    body = " -> ".join(f"{x.kind.value}(p={x.p},n={x.n})" for x in reversed(w.letters)) or "id"
    return f"{w.scalar:.6g} [q={w.q}, {w.sites_in}->{w.sites_out}]: {body}"


def empty_word(q: int, sites: int, scalar: complex = 1.0) -> KrausWord:
    return KrausWord(q, sites, (), scalar)


def decompose_multi(op: InsertionOp | DeletionOp, q: int | None = None) -> KrausWord:
    """Rewrite a multi-slot operator as a product of single-slot letters."""
    return word_from_ops(
        q,
        op if isinstance(op, InsertionOp) else None,
        op if isinstance(op, DeletionOp) else None,
    )


def word_from_ops(q: int | None, ins_op: InsertionOp | None, del_op: DeletionOp | None, scalar: complex = 1.0) -> KrausWord:
    """Word for ``scalar * I_P D_Q``; either block may be absent."""
    letters: list[Letter] = []
    if ins_op is not None:
        # largest slot leftmost; the smallest acts first with superscript n
        for k in range(ins_op.t - 1, -1, -1):
            letters.append(ins(ins_op.n + k, ins_op.positions[k], ins_op.kets[k]))
    if del_op is not None:
        for k in range(del_op.t):
            letters.append(dele(del_op.n + k, del_op.positions[k], del_op.bras[k]))
    if del_op is not None:
        sites_in = del_op.n + del_op.t
        if ins_op is not None and ins_op.n != del_op.n:
            raise ValueError(f"insertion block expects {ins_op.n} qudits, deletion block yields {del_op.n}")
    elif ins_op is not None:
        sites_in = ins_op.n
    else:
        raise ValueError("at least one block is required")
    if q is None:
        if not letters:
            raise ValueError("q is required for an empty word")
        q = letters[0].vec.size
    return KrausWord(q, sites_in, letters, scalar)


def adjoint_word(w: KrausWord) -> KrausWord:
    return KrausWord(
        w.q,
        w.sites_out,
        tuple(x.adjoint() for x in reversed(w.letters)),
        np.conj(w.scalar),
    )


def materialize(w: KrausWord, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
    """Dense matrix of the word (dim_out x dim_in)."""
    out = identity(w.q, w.sites_in)
    for letter in reversed(w.letters):
        out = letter.matrix(w.q, cap) @ out
    return w.scalar * out


def apply_word(w: KrausWord, v) -> np.ndarray:
    """Apply the word to a ket or to the columns of a matrix, letter by letter."""
    out = np.asarray(v, dtype=complex)
    for letter in reversed(w.letters):
        op = letter.op()
        out = apply_insertion(op, out, w.q) if letter.kind is Kind.INS else apply_deletion(op, out, w.q)
    return w.scalar * out


# ---------------------------------------------------------------------------
# rewrite rules


def _pair(w: KrausWord, i: int, first: Kind, second: Kind, rule: str) -> tuple[Letter, Letter]:
    if not 0 <= i < len(w.letters) - 1:
        raise RewriteError(f"{rule}: index {i} out of range for a word of length {len(w.letters)}")
    a, b = w.letters[i], w.letters[i + 1]
    if a.kind is not first or b.kind is not second:
        raise RewriteError(
            f"{rule}: expected {first.value}{second.value} at {i}, found {a.kind.value}{b.kind.value}"
        )
    return a, b


def _replace(w: KrausWord, i: int, new: tuple[Letter, ...], factor: complex = 1.0) -> KrausWord:
    return KrausWord(w.q, w.sites_in, w.letters[:i] + new + w.letters[i + 2 :], w.scalar * factor)


def swap_ii(w: KrausWord, i: int) -> KrausWord:
    """Reorder the insertion pair at ``i``; applying it twice restores the word."""
    a, b = _pair(w, i, Kind.INS, Kind.INS, "swap_ii")
    n = b.n
    if a.p <= b.p:
        new = (ins(n + 1, b.p + 1, b.vec), ins(n, a.p, a.vec))
    else:
        new = (ins(n + 1, b.p, b.vec), ins(n, a.p - 1, a.vec))
    return _replace(w, i, new)


def swap_dd(w: KrausWord, i: int) -> KrausWord:
    """Reorder the deletion pair at ``i``; applying it twice restores the word."""
    a, b = _pair(w, i, Kind.DEL, Kind.DEL, "swap_dd")
    n = a.n
    if b.p <= a.p:
        new = (dele(n, b.p, b.vec), dele(n + 1, a.p + 1, a.vec))
    else:
        new = (dele(n, b.p - 1, b.vec), dele(n + 1, a.p, a.vec))
    return _replace(w, i, new)


def contract_di(w: KrausWord, i: int) -> KrausWord:
    """Move a deletion past the insertion it follows, or contract the two.

    At equal slots the pair is replaced by the overlap of the deleted bra
    with the inserted ket, folded into the scalar.
    """
    d, e = _pair(w, i, Kind.DEL, Kind.INS, "contract_di")
    n = d.n
    if e.p < d.p:
        return _replace(w, i, (ins(n - 1, e.p, e.vec), dele(n - 1, d.p - 1, d.vec)))
    if e.p > d.p:
        return _replace(w, i, (ins(n - 1, e.p - 1, e.vec), dele(n - 1, d.p, d.vec)))
    return _replace(w, i, (), np.vdot(d.vec, e.vec))


def swap_id(w: KrausWord, i: int, branch: str | None = None) -> KrausWord:
    """Rewrite the pair ``I D`` at ``i`` as ``D I``.

    Slots ``p1`` (insertion) and ``p2`` (deletion) select the branch; at
    ``p1 == p2`` both apply and ``branch="ge"`` picks the second one.
    """
    a, b = _pair(w, i, Kind.INS, Kind.DEL, "swap_id")
    n = a.n
    if branch is None:
        branch = "le" if a.p <= b.p else "ge"
    if branch == "le" and a.p <= b.p:
        return _replace(w, i, (dele(n + 1, b.p + 1, b.vec), ins(n + 1, a.p, a.vec)))
    if branch == "ge" and a.p >= b.p:
        return _replace(w, i, (dele(n + 1, b.p, b.vec), ins(n + 1, a.p + 1, a.vec)))
    raise RewriteError(f"swap_id: branch {branch!r} does not apply to p1={a.p}, p2={b.p}")


# ---------------------------------------------------------------------------
# normal forms


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """``scalar * I_P D_Q`` with both slot sets strictly increasing."""

    q: int
    scalar: complex
    insertion: InsertionOp
    deletion: DeletionOp

    def word(self) -> KrausWord:
        return word_from_ops(self.q, self.insertion, self.deletion, self.scalar)

    def matrix(self, cap: int = DEFAULT_TOL.dim_cap) -> np.ndarray:
        return materialize(self.word(), cap)


def _find(w: KrausWord, pred) -> list[int]:
    return [i for i in range(len(w.letters) - 1) if pred(w.letters[i], w.letters[i + 1])]


def _is_di(a: Letter, b: Letter) -> bool:
    return a.kind is Kind.DEL and b.kind is Kind.INS


def _ii_unsorted(a: Letter, b: Letter) -> bool:
    return a.kind is Kind.INS and b.kind is Kind.INS and a.p <= b.p


def _dd_unsorted(a: Letter, b: Letter) -> bool:
    return a.kind is Kind.DEL and b.kind is Kind.DEL and b.p <= a.p


def _pick(sites: list[int], rng) -> int:
    return sites[0] if rng is None else sites[int(rng.integers(len(sites)))]


def normal_word(w: KrausWord, rng: np.random.Generator | None = None, trace: list | None = None) -> KrausWord:
    """Rewrite ``w`` into the canonical ``I...I D...D`` letter layout.

    First every ``D I`` adjacency is eliminated with ``contract_di``, leftmost
    first; then each block is sorted with ``swap_ii`` / ``swap_dd``. Each step
    removes one D-before-I inversion or one out-of-order pair, so the loop
    terminates. Passing ``rng`` picks a random applicable site at every step
    instead of the leftmost one.
    """
    limit = 4 * (len(w.letters) + 1) ** 2
    steps = 0
    for pred, rule in ((_is_di, contract_di), (_ii_unsorted, swap_ii), (_dd_unsorted, swap_dd)):
        while sites := _find(w, pred):
            i = _pick(sites, rng)
            w = rule(w, i)
            if trace is not None:
                trace.append((rule.__name__, i))
            steps += 1
            if steps > limit:
                raise RuntimeError(f"normalization did not terminate within {limit} steps")
    return w


def normalize(w: KrausWord, rng: np.random.Generator | None = None) -> CanonicalForm:
    nw = normal_word(w, rng)
    n_ins, n_del = nw.counts()
    mid = nw.sites_in - n_del
    ins_letters = nw.letters[:n_ins][::-1]
    del_letters = nw.letters[n_ins:]
    return CanonicalForm(
        nw.q,
        nw.scalar,
        InsertionOp(mid, tuple(x.p for x in ins_letters), tuple(x.vec for x in ins_letters)),
        DeletionOp(mid, tuple(x.p for x in del_letters), tuple(x.vec for x in del_letters)),
    )


def is_kraus_shaped(w: KrausWord) -> bool:
    """True when no insertion acts before a deletion."""
    kinds = [x.kind for x in w.letters]
    return Kind.DEL not in kinds or Kind.INS not in kinds[kinds.index(Kind.DEL) :]


# ---------------------------------------------------------------------------
# Gram products of two Kraus words


@dataclass(frozen=True, eq=False)
class GramRegroup:
    """``adjoint(eu) @ ev == scalar * adjoint(left) @ right``.

    ``left`` and ``right`` are canonical Kraus words; ``steps`` lists the
    rewrites applied as ``(rule, index)`` pairs.
    """

    scalar: complex
    left: KrausWord
    right: KrausWord
    steps: tuple[tuple[str, int], ...]

    def word(self) -> KrausWord:
        return adjoint_word(self.left) @ self.right.scaled(self.scalar)


def _blocks(w: KrausWord) -> tuple[int, int]:
    if not is_kraus_shaped(w):
        raise ValueError(f"not a Kraus word (insertions after deletions): {render(w)}")
    return w.counts()


def _split(w: KrausWord, mid: int, steps: list) -> GramRegroup:
    right = KrausWord(w.q, w.sites_in, w.letters[mid:])
    left = KrausWord(w.q, right.sites_out, w.letters[:mid])
    return GramRegroup(
        w.scalar,
        normal_word(adjoint_word(left)),
        normal_word(right),
        tuple(steps),
    )


def trade_deletion_for_insertion(eu: KrausWord, ev: KrausWord) -> GramRegroup:
    """Regroup ``adjoint(eu) @ ev`` for words with ``a`` insertions and ``b >= 1`` deletions.

    The product equals ``adjoint(A_u) @ A_v`` where both ``A`` words have
    ``a + 1`` insertions and ``b - 1`` deletions. Only ``swap_id`` is used:
    the last letter of the leading I block travels right through the D block,
    the first letter of the trailing D block travels left through the I block,
    and the two are exchanged where they meet.
    """
    a, b = _blocks(eu)
    if _blocks(ev) != (a, b):
        raise ValueError("both words must have the same numbers of insertions and deletions")
    if b < 1:
        raise ValueError("at least one deletion is required")
    w = adjoint_word(eu) @ ev  # layout I^b D^a | I^a D^b
    steps: list = []
    for j in range(b - 1, b - 1 + a):
        w = swap_id(w, j)
        steps.append(("swap_id", j))
    for j in range(b + 2 * a - 1, b + a - 2, -1):
        w = swap_id(w, j)
        steps.append(("swap_id", j))
    return _split(w, a + b, steps)


def trade_insertion_for_deletion(eu: KrausWord, ev: KrausWord) -> GramRegroup:
    """Regroup ``adjoint(eu) @ ev`` for words with ``a >= 1`` insertions and ``b`` deletions.

    Generic outcome: both regrouped words have ``a - 1`` insertions and
    ``b + 1`` deletions. Only ``contract_di`` is used, so an equal-slot
    contraction may occur on the way; it folds an overlap into ``scalar`` and
    shortens the corresponding side.
    """
    a, b = _blocks(eu)
    if _blocks(ev) != (a, b):
        raise ValueError("both words must have the same numbers of insertions and deletions")
    if a < 1:
        raise ValueError("at least one insertion is required")
    w = adjoint_word(eu) @ ev  # layout I^b D^a | I^a D^b
    steps: list = []
    mid = a + b
    centre = a + b - 1
    before = len(w.letters)
    w = contract_di(w, centre)
    steps.append(("contract_di", centre))
    if len(w.letters) < before:
        return _split(w, mid - 1, steps)
    # deletion now sits at index mid and walks right through the I block
    j = mid
    while j + 1 < len(w.letters) and w.letters[j + 1].kind is Kind.INS:
        before = len(w.letters)
        w = contract_di(w, j)
        steps.append(("contract_di", j))
        if len(w.letters) < before:
            break
        j += 1
    # insertion sits at index mid-1 and walks left through the D block
    k = mid - 1
    while k - 1 >= 0 and w.letters[k - 1].kind is Kind.DEL:
        before = len(w.letters)
        w = contract_di(w, k - 1)
        steps.append(("contract_di", k - 1))
        if len(w.letters) < before:
            mid -= 2
            break
        k -= 1
    return _split(w, mid, steps)
