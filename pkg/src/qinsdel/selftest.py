"""Randomized property suites: symbolic results against dense matrices.

Every suite draws its instances from its own seeded generator, so a suite's
result depends only on the seed and the instance count, not on which other
suites run or in which order.
"""

from __future__ import annotations

import itertools
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import channels as ch
from .kraus import (
    DeletionOp,
    InsertionOp,
    build_deletion,
    build_deletion_direct,
    build_insertion,
    build_insertion_direct,
)
from .tensor import basis_ket, dagger, random_density, random_ket, random_unitary
from .words import (
    KrausWord,
    adjoint_word,
    contract_di,
    decompose_multi,
    dele,
    ins,
    is_kraus_shaped,
    materialize,
    normalize,
    render,
    swap_dd,
    swap_id,
    swap_ii,
    trade_deletion_for_insertion,
    trade_insertion_for_deletion,
    word_from_ops,
)


def _dev(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.size(a) else 0.0


def _q(rng) -> int:
    return int(rng.choice([2, 3]))


def _vec(q: int, rng, pool=None) -> np.ndarray:
    """Random unit vector; with a pool, sometimes reuse one so overlaps of 1 occur."""
    if pool is not None and pool and rng.random() < 0.3:
        return pool[int(rng.integers(len(pool)))]
    if rng.random() < 0.2:
        v = basis_ket(q, int(rng.integers(q)))
    else:
        v = random_ket(q, rng)
    if pool is not None:
        pool.append(v)
    return v


def _subset(rng, n: int, k: int) -> tuple[int, ...]:
    return tuple(sorted(int(x) for x in rng.choice(np.arange(1, n + 1), size=k, replace=False)))


def random_insertion_op(rng, q: int, n: int, t: int) -> InsertionOp:
    return InsertionOp(n, _subset(rng, n + t, t), [_vec(q, rng) for _ in range(t)])


def random_kraus_word(rng, q: int, N: int, t1: int, t2: int, pool=None) -> KrausWord:
    """Canonical Kraus word ``I_P D_Q`` on N qudits with random unit vectors."""
    m = N - t2
    d = DeletionOp(m, _subset(rng, N, t2), [_vec(q, rng, pool) for _ in range(t2)])
    i = InsertionOp(m, _subset(rng, m + t1, t1), [_vec(q, rng, pool) for _ in range(t1)])
    return word_from_ops(q, i, d)


# ---------------------------------------------------------------------------
# individual instances; each returns (deviation, description)


def inst_adjoint(rng):
    q, n, t = _q(rng), int(rng.integers(0, 4)), int(rng.integers(1, 3))
    op = random_insertion_op(rng, q, n, t)
    direct = _dev(dagger(build_insertion_direct(op, q)), build_deletion_direct(op.adjoint(), q))
    composed = _dev(dagger(build_insertion(op, q)), build_deletion(op.adjoint(), q))
    return max(direct, composed), f"q={q} n={n} P={op.positions}"


def inst_factor_ins(rng):
    q, n, t = _q(rng), int(rng.integers(0, 5)), int(rng.integers(1, 4))
    q = q if q_fits(q, n + t) else 2
    op = random_insertion_op(rng, q, n, t)
    return _dev(materialize(decompose_multi(op)), build_insertion_direct(op, q)), f"q={q} n={n} P={op.positions}"


def inst_factor_del(rng):
    q, n, t = _q(rng), int(rng.integers(0, 5)), int(rng.integers(1, 4))
    q = q if q_fits(q, n + t) else 2
    op = random_insertion_op(rng, q, n, t).adjoint()
    return _dev(materialize(decompose_multi(op)), build_deletion_direct(op, q)), f"q={q} n={n} P={op.positions}"


def _rewrite_dev(w: KrausWord, rule, i: int = 0, **kw):
    out = rule(w, i, **kw)
    return _dev(materialize(out), materialize(w)), f"{render(w)}  =>  {render(out)}"


def inst_reorder_ii(rng):
    q, n = _q(rng), int(rng.integers(0, 4))
    p2 = int(rng.integers(1, n + 2))
    p1 = int(rng.integers(1, p2 + 1))
    w = KrausWord(q, n, (ins(n + 1, p1, _vec(q, rng)), ins(n, p2, _vec(q, rng))))
    return _rewrite_dev(w, swap_ii)


def inst_reorder_dd(rng):
    q, n = _q(rng), int(rng.integers(0, 4))
    p2 = int(rng.integers(1, n + 2))
    p1 = int(rng.integers(1, p2 + 1))
    w = KrausWord(q, n + 2, (dele(n, p2, _vec(q, rng)), dele(n + 1, p1, _vec(q, rng))))
    return _rewrite_dev(w, swap_dd)


def _delete_insert(rng, case: str):
    q, n = _q(rng), int(rng.integers(1, 5))
    a, b = sorted(int(x) for x in rng.choice(np.arange(1, n + 2), size=2, replace=False))
    p1, p2 = {"lt": (a, b), "gt": (b, a), "eq": (a, a)}[case]
    w = KrausWord(q, n, (dele(n, p2, _vec(q, rng)), ins(n, p1, _vec(q, rng))))
    return _rewrite_dev(w, contract_di)


def _insert_delete(rng, branch: str):
    q, n = _q(rng), int(rng.integers(0, 5))
    a, b = sorted(int(x) for x in rng.integers(1, n + 2, size=2))
    p1, p2 = (a, b) if branch == "le" else (b, a)
    w = KrausWord(q, n + 1, (ins(n, p1, _vec(q, rng)), dele(n, p2, _vec(q, rng))))
    return _rewrite_dev(w, swap_id, branch=branch)


def _state_case(rng):
    q = _q(rng)
    N = int(rng.integers(1, 4))
    return q, N, random_density(q, N, rng, rank=int(rng.integers(1, q**N + 1)))


def inst_insertion_kraus(rng):
    q, N, rho = _state_case(rng)
    t = int(rng.integers(1, 3))
    P = _subset(rng, N + t, t)
    sigma = ch.SeparableState(tuple(random_density(q, 1, rng, rank=int(rng.integers(1, q + 1))) for _ in range(t)))
    a, b = ch.ins_error(rho, P, sigma), ch.ins_error_kraus(rho, P, sigma)
    return _dev(a.matrix, b.matrix), f"q={q} N={N} P={P}"


def inst_erasure_kraus(rng):
    q, N, rho = _state_case(rng)
    N += 1
    rho = random_density(q, N, rng)
    t = int(rng.integers(1, min(2, N - 1) + 1))
    P = _subset(rng, N, t)
    return _dev(ch.era_error(rho, P).matrix, ch.era_error_kraus(rho, P).matrix), f"q={q} N={N} P={P}"


def inst_delete_inserted(rng):
    q, N, rho = _state_case(rng)
    p = int(rng.integers(1, N + 2))
    sigma = ch.SeparableState((random_density(q, 1, rng),))
    out = ch.era_error(ch.ins_error(rho, (p,), sigma), (p,))
    return _dev(out.matrix, rho.matrix), f"q={q} N={N} p={p}"


def inst_trace(rng):
    q = _q(rng)
    N = int(rng.integers(2, 4))
    rho = random_density(q, N, rng)
    t2 = int(rng.integers(0, N))
    t1 = int(rng.integers(0, 3 - min(t2, 1)))
    spec = ch.uniform_insdel(N, q, t1, t2, rng, n_states=1)
    outs = [ch.apply_insdel(rho, spec), ch.apply_channel(rho, spec.del_mixture)]
    return max(abs(np.trace(o.matrix) - 1) for o in outs), f"q={q} N={N} t1={t1} t2={t2}"


def _span(rng, kind: str):
    """A slot vector rotated by a random unitary lies in the span of the basis-vector family."""
    q = _q(rng)
    n = int(rng.integers(0, 3))
    t = int(rng.integers(1, 3))
    P = _subset(rng, n + t, t)
    factors = [random_unitary(q, rng)[:, int(rng.integers(q))] for _ in range(t)]
    basis = [basis_ket(q, x) for x in range(q)]
    combos = itertools.product(range(q), repeat=t)
    if kind == "ins":
        target = build_insertion(InsertionOp(n, P, factors), q)
        fam = [build_insertion(InsertionOp(n, P, [basis[x] for x in b]), q) for b in combos]
    else:
        target = build_deletion(DeletionOp(n, P, factors), q)
        fam = [build_deletion(DeletionOp(n, P, [basis[x] for x in b]), q) for b in combos]
    return ch.span_residual(target, fam), f"q={q} n={n} P={P}"


def _gram_case(rng, t1: int, t2: int):
    """``adjoint(eu) @ ev`` for two (t1, t2) Kraus words: normal form and both regroupings.

    Returns the worst deviation and whether an equal-slot contraction
    shortened the product.
    """
    N = int(rng.integers(t2 + 1, 5))
    q = 3 if q_fits(3, N + t1) and rng.random() < 0.3 else 2
    pool: list = []
    eu = random_kraus_word(rng, q, N, t1, t2, pool)
    ev = eu if rng.random() < 0.3 else random_kraus_word(rng, q, N, t1, t2, pool)
    product = adjoint_word(eu) @ ev
    ref = materialize(product)
    canon = normalize(product)
    words = [canon.word()]
    devs = [_dev(canon.matrix(), ref)]
    shape_ok = is_kraus_shaped(words[0])
    if t2 >= 1:
        g = trade_deletion_for_insertion(eu, ev)
        words.append(g.word())
        devs.append(_dev(materialize(g.word()), ref))
        shape_ok &= is_kraus_shaped(g.left) and is_kraus_shaped(g.right) and g.left.counts() == (t1 + 1, t2 - 1)
    if t1 >= 1:
        g = trade_insertion_for_deletion(eu, ev)
        words.append(g.word())
        devs.append(_dev(materialize(g.word()), ref))
        shape_ok &= is_kraus_shaped(g.left) and is_kraus_shaped(g.right)
    contracted = any(len(w.letters) < len(product.letters) for w in words)
    desc = f"(t1,t2)=({t1},{t2}) N={N} q={q} {render(product)}"
    return (max(devs) if shape_ok else float("inf")), desc, contracted


def q_fits(q: int, sites: int) -> bool:
    return q**sites <= 729


# ---------------------------------------------------------------------------
# suites


@dataclass
class SuiteResult:
    name: str
    count: int
    worst: float
    threshold: float
    passed: bool
    contractions: int | None = None
    counterexample: str | None = field(default=None)


SUITES = {
    # name: (instance fn, default count, threshold)
    "adjoint_pair": (inst_adjoint, 500, 1e-12),
    "factor_insertions": (inst_factor_ins, 500, 1e-12),
    "factor_deletions": (inst_factor_del, 500, 1e-12),
    "reorder_insertions": (inst_reorder_ii, 500, 1e-12),
    "reorder_deletions": (inst_reorder_dd, 500, 1e-12),
    "delete_insert_lt": (lambda r: _delete_insert(r, "lt"), 500, 1e-12),
    "delete_insert_eq": (lambda r: _delete_insert(r, "eq"), 500, 1e-12),
    "delete_insert_gt": (lambda r: _delete_insert(r, "gt"), 500, 1e-12),
    "insert_delete_le": (lambda r: _insert_delete(r, "le"), 500, 1e-12),
    "insert_delete_ge": (lambda r: _insert_delete(r, "ge"), 500, 1e-12),
    "insertion_kraus_sum": (inst_insertion_kraus, 200, 1e-12),
    "erasure_kraus_sum": (inst_erasure_kraus, 200, 1e-12),
    "delete_inserted_qudit": (inst_delete_inserted, 200, 1e-13),
    "trace_preservation": (inst_trace, 100, 1e-11),
    "span_insertion": (lambda r: _span(r, "ins"), 100, 1e-10),
    "span_deletion": (lambda r: _span(r, "del"), 100, 1e-10),
}
for _t1, _t2 in [(a, b) for a in range(4) for b in range(4) if a + b <= 3]:
    SUITES[f"normal_form_{_t1}_{_t2}"] = (lambda r, a=_t1, b=_t2: _gram_case(r, a, b), 200, 1e-12)


def suite_seed(seed: int, name: str) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, zlib.crc32(name.encode())])


def run_suite(name: str, seed: int = 0, count: int | None = None) -> SuiteResult:
    fn, default, threshold = SUITES[name]
    count = default if count is None else count
    rng = np.random.default_rng(suite_seed(seed, name))
    worst, contractions, example = 0.0, 0, None
    for i in range(count):
        out = fn(rng)
        dev, desc = out[0], out[1]
        if len(out) > 2:
            contractions += int(out[2])
        if not dev <= threshold and example is None:
            example = f"seed={seed} suite={name} instance={i}: {desc} (deviation {dev:.3e})"
        worst = max(worst, dev)
    return SuiteResult(
        name,
        count,
        worst,
        threshold,
        example is None,
        contractions if name.startswith("normal_form") else None,
        example,
    )


def run_all(seed: int = 0, workers: int = 1, scale: float = 1.0, names=None) -> list[SuiteResult]:
    names = list(SUITES) if names is None else list(names)

    def job(name):
        return run_suite(name, seed, max(1, int(round(SUITES[name][1] * scale))))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(job, names))
    return [job(n) for n in names]


def summary(results: list[SuiteResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "worst_deviation": max(r.worst for r in results),
        "suites": [asdict(r) for r in results],
    }
