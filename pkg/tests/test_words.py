import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qinsdel.kraus import DeletionOp, InsertionOp, build_deletion, build_insertion
from qinsdel.tensor import basis_ket, basis_state, random_ket
from qinsdel.words import (
    Kind,
    KrausWord,
    RewriteError,
    adjoint_word,
    contract_di,
    decompose_multi,
    dele,
    empty_word,
    ins,
    is_kraus_shaped,
    materialize,
    normal_word,
    normalize,
    render,
    swap_dd,
    swap_id,
    swap_ii,
    trade_deletion_for_insertion,
    trade_insertion_for_deletion,
    word_from_ops,
)

seeds = st.integers(0, 2**32 - 1)


def random_word(rng, q, sites_in, length, max_sites=4):
    """Random chain of letters, kept within ``max_sites`` qudits."""
    letters = []
    sites = sites_in
    for _ in range(length):
        grow = sites == 0 or (sites < max_sites and rng.random() < 0.5)
        if grow:
            letters.append(ins(sites, int(rng.integers(1, sites + 2)), random_ket(q, rng)))
            sites += 1
        else:
            letters.append(dele(sites - 1, int(rng.integers(1, sites + 1)), random_ket(q, rng)))
            sites -= 1
    return KrausWord(q, sites_in, tuple(reversed(letters)), complex(*rng.normal(size=2)))


def applicable_sites(w):
    for i in range(len(w.letters) - 1):
        a, b = w.letters[i].kind, w.letters[i + 1].kind
        if a is Kind.INS and b is Kind.INS:
            yield swap_ii, i, {}
        elif a is Kind.DEL and b is Kind.DEL:
            yield swap_dd, i, {}
        elif a is Kind.DEL and b is Kind.INS:
            yield contract_di, i, {}
        else:
            yield swap_id, i, {"branch": "le"}
            yield swap_id, i, {"branch": "ge"}


def close(a, b, tol=1e-12):
    return a.shape == b.shape and np.max(np.abs(a - b), initial=0.0) <= tol


# ---------------------------------------------------------------------------
# worked example: N=4, P={2,3,5}, Q={1,3}


@pytest.fixture
def example():
    rng = np.random.default_rng(7)
    psi = [random_ket(2, rng) for _ in range(3)]
    phi = [random_ket(2, rng) for _ in range(2)]
    return psi, phi


def test_decompose_worked_example(example):
    psi, _ = example
    op = InsertionOp(2, (2, 3, 5), psi)
    w = decompose_multi(op)
    assert render(w) == "1+0j [q=2, 2->5]: I(p=2,n=2) -> I(p=3,n=3) -> I(p=5,n=4)"
    I2 = np.eye(2)
    col = [p.reshape(2, 1) for p in psi]
    ref = np.kron(np.kron(np.kron(np.kron(I2, col[0]), col[1]), I2), col[2])
    assert close(materialize(w), ref, 1e-13)


def test_worked_example_product(example):
    psi, phi = example
    w = word_from_ops(2, InsertionOp(2, (2, 3, 5), psi), DeletionOp(2, (1, 3), phi))
    m = materialize(w)
    assert m.shape == (32, 16)
    I2 = np.eye(2)
    col = [p.reshape(2, 1) for p in psi]
    row = [f.conj().reshape(1, 2) for f in phi]
    factors = [row[0], I2, col[0], col[1], row[1], I2, col[2]]
    ref = factors[0]
    for f in factors[1:]:
        ref = np.kron(ref, f)
    assert close(m, ref, 1e-13)
    # basis action: |x1 x2 x3 x4> -> <phi1|x1><phi2|x3> |x2 psi1 psi2 x4 psi3>
    for x in itertools.product(range(2), repeat=4):
        amp = np.conj(phi[0][x[0]]) * np.conj(phi[1][x[2]])
        parts = [basis_ket(2, x[1]), psi[0], psi[1], basis_ket(2, x[3]), psi[2]]
        v = parts[0]
        for p in parts[1:]:
            v = np.kron(v, p)
        np.testing.assert_allclose(m @ basis_state(2, x), amp * v, atol=1e-14)


# ---------------------------------------------------------------------------
# single rules


def test_swap_ii_example_and_involution(rng):
    psi, phi = random_ket(2, rng), random_ket(2, rng)
    w = KrausWord(2, 0, (ins(1, 1, psi), ins(0, 1, phi)))
    out = swap_ii(w, 0)
    assert out.letters == (ins(1, 2, phi), ins(0, 1, psi))
    assert swap_ii(out, 0) == w
    assert close(materialize(out), materialize(w))


def test_swap_dd_involution(rng):
    w = KrausWord(3, 3, (dele(1, 2, random_ket(3, rng)), dele(2, 1, random_ket(3, rng))))
    out = swap_dd(w, 0)
    assert swap_dd(out, 0) == w
    assert close(materialize(out), materialize(w))


def test_contract_examples(rng):
    psi, phi = random_ket(2, rng), random_ket(2, rng)
    eq = contract_di(KrausWord(2, 1, (dele(1, 1, phi), ins(1, 1, psi))), 0)
    assert eq.letters == () and eq.sites_in == 1
    assert eq.scalar == pytest.approx(np.vdot(phi, psi), abs=1e-15)
    lt = contract_di(KrausWord(2, 1, (dele(1, 2, phi), ins(1, 1, psi))), 0)
    assert lt.letters == (ins(0, 1, psi), dele(0, 1, phi))


def test_swap_id_both_branches_at_equal_slots(rng):
    psi, phi = random_ket(2, rng), random_ket(2, rng)
    w = KrausWord(2, 1, (ins(0, 1, psi), dele(0, 1, phi)))
    le = swap_id(w, 0, branch="le")
    ge = swap_id(w, 0, branch="ge")
    assert le.letters == (dele(1, 2, phi), ins(1, 1, psi))
    assert ge.letters == (dele(1, 1, phi), ins(1, 2, psi))
    assert close(materialize(le), materialize(w)) and close(materialize(ge), materialize(w))


def test_swap_id_rejects_wrong_branch(rng):
    w = KrausWord(2, 2, (ins(1, 1, random_ket(2, rng)), dele(1, 2, random_ket(2, rng))))
    with pytest.raises(RewriteError):
        swap_id(w, 0, branch="ge")


def test_rules_reject_mismatched_patterns(rng):
    w = KrausWord(2, 1, (ins(0, 1, random_ket(2, rng)), dele(0, 1, random_ket(2, rng))))
    for rule in (swap_ii, swap_dd, contract_di):
        with pytest.raises(RewriteError):
            rule(w, 0)
    with pytest.raises(RewriteError):
        swap_id(w, 1)


def test_word_chain_validation(rng):
    with pytest.raises(ValueError):
        KrausWord(2, 2, (ins(0, 1, random_ket(2, rng)),))


@given(seeds, st.sampled_from([2, 3]), st.integers(0, 3), st.integers(2, 6))
def test_every_rewrite_step_is_sound(seed, q, sites, length):
    rng = np.random.default_rng(seed)
    w = random_word(rng, q, sites, length, max_sites=4 if q == 2 else 3)
    ref = materialize(w)
    for rule, i, kw in applicable_sites(w):
        try:
            out = rule(w, i, **kw)
        except RewriteError:
            continue  # branch not applicable to these slots
        assert close(materialize(out), ref), f"{rule.__name__} at {i}: {render(w)}"


# ---------------------------------------------------------------------------
# adjoint and materialize


def test_adjoint_single_letter(rng):
    v = random_ket(2, rng)
    w = KrausWord(2, 1, (ins(1, 2, v),))
    assert adjoint_word(w).letters == (dele(1, 2, v),)


@given(seeds, st.integers(0, 3), st.integers(0, 6))
def test_adjoint_word_properties(seed, sites, length):
    rng = np.random.default_rng(seed)
    w = random_word(rng, 2, sites, length)
    assert adjoint_word(adjoint_word(w)) == w
    assert close(materialize(adjoint_word(w)), materialize(w).conj().T)


def test_materialize_small_cases(rng):
    assert close(materialize(empty_word(3, 2, 2 - 1j)), (2 - 1j) * np.eye(9))
    v = random_ket(3, rng)
    assert close(materialize(KrausWord(3, 2, (ins(2, 1, v),))), build_insertion(InsertionOp(2, (1,), [v]), 3), 0)
    assert close(materialize(KrausWord(3, 3, (dele(2, 3, v),))), build_deletion(DeletionOp(2, (3,), [v]), 3), 0)


# ---------------------------------------------------------------------------
# normal forms


def test_canonical_word_is_fixed(rng):
    w = word_from_ops(2, InsertionOp(1, (1, 3), [random_ket(2, rng)] * 2), DeletionOp(1, (2, 3), [random_ket(2, rng)] * 2))
    canon = normalize(w)
    assert canon.scalar == 1
    assert canon.word() == w


@given(seeds, st.sampled_from([2, 3]), st.integers(0, 3), st.integers(0, 7))
def test_normalize_sound_shaped_and_confluent(seed, q, sites, length):
    rng = np.random.default_rng(seed)
    w = random_word(rng, q, sites, length, max_sites=4 if q == 2 else 3)
    ref = materialize(w)
    canon = normalize(w)
    cw = canon.word()
    assert is_kraus_shaped(cw)
    assert list(canon.insertion.positions) == sorted(set(canon.insertion.positions))
    assert list(canon.deletion.positions) == sorted(set(canon.deletion.positions))
    assert close(canon.matrix(), ref)
    for k in range(3):
        other = normalize(w, rng=np.random.default_rng(seed + k))
        assert close(other.matrix(), ref)


def test_same_slot_pair_contracts_to_overlap(rng):
    psi, phi, chi = (random_ket(2, rng) for _ in range(3))
    w = KrausWord(2, 2, (ins(1, 1, chi), dele(1, 2, phi), ins(1, 2, psi), dele(1, 1, chi)))
    trace = []
    normal_word(w, trace=trace)
    canon = normalize(w)
    assert ("contract_di", 1) in trace
    assert canon.scalar == pytest.approx(np.vdot(phi, psi))
    assert close(canon.matrix(), materialize(w))


def test_gram_of_one_one_words_at_three_qubits(rng):
    def kraus(P, Q):
        return word_from_ops(2, InsertionOp(2, P, [random_ket(2, rng)]), DeletionOp(2, Q, [random_ket(2, rng)]))

    eu, ev = kraus((1,), (2,)), kraus((3,), (3,))
    product = adjoint_word(eu) @ ev
    ref = materialize(product)
    assert ref.shape == (8, 8)
    canon = normalize(product)
    assert close(canon.matrix(), ref)
    for trade in (trade_deletion_for_insertion, trade_insertion_for_deletion):
        g = trade(eu, ev)
        assert is_kraus_shaped(g.left) and is_kraus_shaped(g.right)
        assert close(materialize(g.word()), ref)
    g = trade_deletion_for_insertion(eu, ev)
    assert g.left.counts() == (2, 0) and g.right.counts() == (2, 0)
    assert {rule for rule, _ in g.steps} == {"swap_id"}


@given(seeds, st.integers(1, 3), st.integers(0, 2))
def test_trades_match_dense(seed, a, b):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(b + 1, 5))
    pool = [random_ket(2, rng)]

    def vec():
        return pool[0] if rng.random() < 0.4 else random_ket(2, rng)

    def kraus():
        m = N - b
        Q = tuple(sorted(rng.choice(np.arange(1, N + 1), size=b, replace=False).tolist()))
        P = tuple(sorted(rng.choice(np.arange(1, m + a + 1), size=a, replace=False).tolist()))
        return word_from_ops(2, InsertionOp(m, P, [vec() for _ in P]), DeletionOp(m, Q, [vec() for _ in Q]))

    eu, ev = kraus(), kraus()
    ref = materialize(adjoint_word(eu) @ ev)
    g = trade_insertion_for_deletion(eu, ev)
    assert close(materialize(g.word()), ref)
    assert all(rule == "contract_di" for rule, _ in g.steps)
    if b >= 1:
        h = trade_deletion_for_insertion(eu, ev)
        assert close(materialize(h.word()), ref)
        assert h.left.counts() == (a + 1, b - 1)


def test_trades_reject_wrong_shapes(rng):
    v = random_ket(2, rng)
    only_ins = KrausWord(2, 1, (ins(1, 1, v),))
    with pytest.raises(ValueError):
        trade_deletion_for_insertion(only_ins, only_ins)
    only_del = KrausWord(2, 2, (dele(1, 1, v),))
    with pytest.raises(ValueError):
        trade_insertion_for_deletion(only_del, only_del)
