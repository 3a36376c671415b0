import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qinsdel import channels as ch
from qinsdel.kraus import DeletionOp, InsertionOp, build_deletion, build_insertion
from qinsdel.tensor import DensityMatrix, basis_ket, basis_state, pure, random_density, random_unitary, spectral_decompose
from qinsdel.words import materialize

seeds = st.integers(0, 2**32 - 1)


def splice_oracle(rho, P, factors):
    """Tensor rho with the factors at the end, then move those sites to slots P."""
    q, N, t = rho.q, rho.sites, len(P)
    full = rho.matrix
    for f in factors:
        full = np.kron(full, f.matrix)
    total = N + t
    others = [s for s in range(1, total + 1) if s not in P]
    # current site order: the original sites, then the inserted ones
    order = others + list(P)
    perm = [order.index(s) for s in range(1, total + 1)]
    tens = full.reshape((q,) * (2 * total))
    tens = tens.transpose(perm + [total + x for x in perm])
    return tens.reshape(q**total, q**total)


def erase_oracle(rho, P):
    q, N = rho.q, rho.sites
    keep = [s for s in range(N) if s + 1 not in P]
    letters = "abcdefghij"
    rows = [letters[s] for s in range(N)]
    cols = [letters[s] if s + 1 in P else letters[s].upper() for s in range(N)]
    out = "".join(rows[s] for s in keep) + "".join(cols[s] for s in keep)
    m = np.einsum("".join(rows) + "".join(cols) + "->" + out, rho.matrix.reshape((q,) * (2 * N)))
    return m.reshape(q ** len(keep), q ** len(keep))


def test_insert_one_basis_example():
    k0, k1 = basis_ket(2, 0), basis_ket(2, 1)
    out = ch.insert_one(pure(k0, 2), 1, pure(k1, 2))
    np.testing.assert_array_equal(out.matrix, pure(basis_state(2, [1, 0]), 2).matrix)


def test_ins_error_basis_splice():
    rho = pure(basis_state(2, [1, 1]), 2)
    sigma = ch.SeparableState.pure([basis_ket(2, 0), basis_ket(2, 0)])
    out = ch.ins_error(rho, (1, 4), sigma)
    np.testing.assert_array_equal(out.matrix, pure(basis_state(2, [0, 1, 1, 0]), 2).matrix)


def test_empty_insertion_is_identity(rng):
    rho = random_density(2, 2, rng)
    np.testing.assert_array_equal(ch.ins_error(rho, (), ch.SeparableState(())).matrix, rho.matrix)


def test_era_basis_example():
    out = ch.era_error(pure(basis_state(2, [0, 1]), 2), (1,))
    np.testing.assert_array_equal(out.matrix, np.diag([0, 1]))


@given(seeds, st.sampled_from([2, 3]), st.integers(1, 3), st.integers(1, 2))
def test_insertion_paths_agree(seed, q, N, t):
    rng = np.random.default_rng(seed)
    rho = random_density(q, N, rng)
    P = tuple(sorted(rng.choice(np.arange(1, N + t + 1), size=t, replace=False).tolist()))
    sigma = ch.SeparableState(tuple(random_density(q, 1, rng, rank=int(rng.integers(1, q + 1))) for _ in range(t)))
    ref = splice_oracle(rho, P, sigma.factors)
    np.testing.assert_allclose(ch.ins_error(rho, P, sigma).matrix, ref, atol=1e-12)
    np.testing.assert_allclose(ch.ins_error_kraus(rho, P, sigma).matrix, ref, atol=1e-12)


def test_insert_one_kraus_sum(rng):
    rho = random_density(3, 2, rng)
    tau = random_density(3, 1, rng)
    direct = ch.insert_one(rho, 2, tau).matrix
    total = sum(c * build_insertion(InsertionOp(2, (2,), [v]), 3) @ rho.matrix @ build_insertion(InsertionOp(2, (2,), [v]), 3).conj().T for c, v in spectral_decompose(tau.matrix))
    np.testing.assert_allclose(direct, total, atol=1e-12)


@given(seeds, st.sampled_from([2, 3]), st.integers(2, 4), st.integers(1, 2))
def test_erasure_paths_agree(seed, q, N, t):
    if q == 3 and N == 4:
        N = 3
    rng = np.random.default_rng(seed)
    rho = random_density(q, N, rng)
    P = tuple(sorted(rng.choice(np.arange(1, N + 1), size=min(t, N - 1), replace=False).tolist()))
    ref = erase_oracle(rho, P)
    np.testing.assert_allclose(ch.era_error(rho, P).matrix, ref, atol=1e-12)
    np.testing.assert_allclose(ch.era_error_kraus(rho, P).matrix, ref, atol=1e-12)


@given(seeds, st.sampled_from([2, 3]), st.integers(1, 3))
def test_deleting_inserted_qudit_restores_state(seed, q, N):
    rng = np.random.default_rng(seed)
    rho = random_density(q, N, rng)
    sigma = ch.SeparableState((random_density(q, 1, rng),))
    for p in range(1, N + 2):
        out = ch.era_error(ch.ins_error(rho, (p,), sigma), (p,))
        np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-13)


def test_uniform_deletion_of_bell_pair():
    phi = (basis_state(2, [0, 0]) + basis_state(2, [1, 1])) / np.sqrt(2)
    out = ch.apply_channel(pure(phi, 2), ch.uniform_deletion(2, 1))
    np.testing.assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-15)


def test_single_term_mixture_equals_error_map(rng):
    rho = random_density(2, 3, rng)
    chan = ch.MixtureChannel(ch.ChannelKind.DELETION, 1, [ch.MixtureTerm(1.0, (2,))])
    np.testing.assert_array_equal(ch.apply_channel(rho, chan).matrix, ch.era_error(rho, (2,)).matrix)


def test_mixture_validation():
    with pytest.raises(ValueError):
        ch.MixtureChannel(ch.ChannelKind.DELETION, 1, [ch.MixtureTerm(0.5, (1,))])
    with pytest.raises(ValueError):
        ch.MixtureChannel(ch.ChannelKind.INSERTION, 1, [ch.MixtureTerm(1.0, (1,))])
    with pytest.raises(ValueError):
        ch.MixtureChannel(ch.ChannelKind.DELETION, 1, [ch.MixtureTerm(1.0, (1, 2))])


@given(seeds, st.sampled_from([2, 3]), st.integers(2, 3), st.integers(0, 2), st.integers(0, 1))
def test_insdel_trace_and_positivity(seed, q, N, t1, t2):
    rng = np.random.default_rng(seed)
    rho = random_density(q, N, rng)
    spec = ch.uniform_insdel(N, q, t1, t2, rng)
    out = ch.apply_insdel(rho, spec)
    assert out.sites == N + t1 - t2
    assert abs(np.trace(out.matrix) - 1) < 1e-11
    assert out.is_valid()


def test_insdel_identity(rng):
    rho = random_density(2, 2, rng)
    spec = ch.uniform_insdel(2, 2, 0, 0, rng)
    np.testing.assert_array_equal(ch.apply_insdel(rho, spec).matrix, rho.matrix)


def test_insdel_reinsert_at_deleted_slot(rng):
    # a qudit in a product state deleted and the same state reinserted at its slot
    a, tau, b = (random_density(2, 1, rng) for _ in range(3))
    rho = DensityMatrix(2, 3, np.kron(np.kron(a.matrix, tau.matrix), b.matrix))
    spec = ch.InsdelSpec(
        1,
        1,
        ch.MixtureChannel(ch.ChannelKind.DELETION, 1, [ch.MixtureTerm(1.0, (2,))]),
        ch.MixtureChannel(ch.ChannelKind.INSERTION, 1, [ch.MixtureTerm(1.0, (2,), ch.SeparableState((tau,)))]),
    )
    np.testing.assert_allclose(ch.apply_insdel(rho, spec).matrix, rho.matrix, atol=1e-14)


@given(seeds, st.sampled_from([2, 3]))
def test_insdel_kraus_path(seed, q):
    rng = np.random.default_rng(seed)
    rho = random_density(q, 3, rng)
    spec = ch.uniform_insdel(3, q, 1, 1, rng)
    np.testing.assert_allclose(ch.apply_insdel_kraus(rho, spec).matrix, ch.apply_insdel(rho, spec).matrix, atol=1e-12)


def test_family_sizes():
    assert len(ch.spanning_kraus_family(2, 2, 0, 1)) == 4
    assert len(ch.spanning_kraus_family(4, 2, 0, 1)) == 8
    assert len(ch.spanning_kraus_family(4, 2, 1, 0)) == 10
    for N, q, t1, t2 in [(3, 3, 1, 1), (4, 2, 2, 1), (3, 2, 0, 2)]:
        assert len(ch.spanning_kraus_family(N, q, t1, t2)) == ch.family_size(N, q, t1, t2)


def test_family_cap_and_range():
    with pytest.raises(ch.EnumerationCapError):
        ch.spanning_kraus_family(4, 2, 2, 1, cap=100)
    with pytest.raises(ValueError):
        ch.spanning_kraus_family(2, 2, 0, 2)


@given(seeds, st.sampled_from([2, 3]))
def test_rotated_kraus_operators_lie_in_family_span(seed, q):
    rng = np.random.default_rng(seed)
    N, t1, t2 = 3, 1, 1
    fam = [
        build_insertion(InsertionOp(2, P, [basis_ket(q, a)]), q) @ build_deletion(DeletionOp(2, Q, [basis_ket(q, b)]), q)
        for P in [(1,), (2,), (3,)]
        for Q in [(1,), (2,), (3,)]
        for a, b in itertools.product(range(q), repeat=2)
    ]
    assert len(fam) == ch.family_size(N, q, t1, t2)
    u, v = random_unitary(q, rng), random_unitary(q, rng)
    P, Q = (int(rng.integers(1, 4)),), (int(rng.integers(1, 4)),)
    target = build_insertion(InsertionOp(2, P, [u[:, 0]]), q) @ build_deletion(DeletionOp(2, Q, [v[:, 1]]), q)
    assert ch.span_residual(target, fam) < 1e-10
    lib = [materialize(w) for w in ch.spanning_kraus_family(N, q, t1, t2)]
    assert ch.span_residual(target, lib) < 1e-10
