import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csppke.cspsampler import (
    KxorInstance,
    LarpInstance,
    RandomFunctionStore,
    domain_digits,
    enumerate_preimages,
    honest_larp_values,
    instance_dumps,
    instance_loads,
    random_mnk_matrix,
    sample_kxor,
    sample_larp,
    to_hypergraph,
)
from csppke.f2core import BudgetError, SparseRowMatrix, matvec
from csppke.params import SchemeParams
from csppke.rng import stream

try:
    from scipy.stats import chisquare
except ImportError:  # pragma: no cover
    chisquare = None


def make_params(**overrides) -> SchemeParams:
    base = dict(
        n=4, m=32, k=2, sigma_size=8, gamma_size=16, alpha=0.2, beta=0.1, m_prime=256, seed=5
    )
    base.update(overrides)
    return SchemeParams(**base)


# --- random function store --------------------------------------------------


def test_store_is_deterministic():
    a = RandomFunctionStore(8, 2, 8, 16, seed=42)
    b = RandomFunctionStore(8, 2, 8, 16, seed=42)
    assert np.array_equal(a.all_row_values(), b.all_row_values())
    assert a.evaluate(3, (1, 7)) == b.evaluate(3, (1, 7))


def test_store_rows_differ():
    store = RandomFunctionStore(4, 2, 8, 16, seed=42)
    values = store.all_row_values()
    assert not np.array_equal(values[0], values[1])


@pytest.mark.skipif(chisquare is None, reason="scipy not installed")
def test_store_uniformity_chi_square():
    store = RandomFunctionStore(1, 2, 128, 10, seed=9)
    values = store.row_values(0)  # 16384 evaluations over 10 targets
    counts = np.bincount(values, minlength=10)
    assert chisquare(counts).pvalue > 0.001


def test_evaluate_matches_row_values():
    store = RandomFunctionStore(5, 3, 4, 7, seed=17)
    table = store.row_values(2)
    for idx in (0, 13, 63):
        assert store.evaluate(2, store.index_tuple(idx)) == table[idx]


@given(st.integers(0, 2**32))
def test_tuple_index_round_trip(seed):
    rng = stream(seed, "tuples")
    store = RandomFunctionStore(1, 3, 11, 4, seed=0)
    symbols = tuple(int(v) for v in rng.integers(0, 11, size=3))
    assert store.index_tuple(store.tuple_index(symbols)) == symbols


def test_domain_digits_are_lexicographic():
    digits = domain_digits(3, 2)
    assert digits.tolist() == [[i, j] for i in range(3) for j in range(3)]


# --- planted sampler ----------------------------------------------------------


def test_planted_alpha_zero_is_fully_honest():
    p = make_params(alpha=0.0)
    H = random_mnk_matrix(p.m, p.n, p.k, stream(1, "H"))
    inst = sample_larp(p, H, "planted", stream(2, "larp"))
    assert not inst.corrupted_mask.any()
    assert np.array_equal(inst.b, honest_larp_values(inst.F, H, inst.secret))


def test_planted_consistency_on_honest_rows():
    p = make_params(alpha=0.5)
    H = random_mnk_matrix(p.m, p.n, p.k, stream(3, "H"))
    inst = sample_larp(p, H, "planted", stream(4, "larp"))
    honest = honest_larp_values(inst.F, H, inst.secret)
    untouched = ~inst.corrupted_mask
    assert np.array_equal(inst.b[untouched], honest[untouched])


def test_full_corruption_couples_to_null():
    p = make_params(alpha=1.0, m=10_000)
    H = random_mnk_matrix(p.m, p.n, p.k, stream(5, "H"))
    null = sample_larp(p, H, "null", stream(6, "arm"))
    planted = sample_larp(p, H, "planted", stream(6, "arm"))
    assert np.array_equal(null.b, planted.b)  # coupled coordinate keys


@pytest.mark.skipif(chisquare is None, reason="scipy not installed")
def test_full_corruption_marginal_is_uniform():
    p = make_params(alpha=1.0, m=10_000)
    H = random_mnk_matrix(p.m, p.n, p.k, stream(7, "H"))
    inst = sample_larp(p, H, "planted", stream(8, "larp"))
    counts = np.bincount(inst.b, minlength=p.gamma_size)
    assert chisquare(counts).pvalue > 0.001


def test_worked_example_constraint_evaluations(worked_matrix):
    # secret (4,2,5,7) on supports {1,3},{3,4},{1,2},{1,4} evaluates the
    # constraint functions at (4,5), (5,7), (4,2), (4,7)
    s = np.array([4, 2, 5, 7])
    store = RandomFunctionStore(4, 2, 8, 16, seed=33)
    values = honest_larp_values(store, worked_matrix, s)
    expected_tuples = [(4, 5), (5, 7), (4, 2), (4, 7)]
    for i, expected in enumerate(expected_tuples):
        assert values[i] == store.evaluate(i, expected)


def test_larp_erasure_marginal():
    p = make_params(alpha=0.3, m=100_000)
    H = random_mnk_matrix(p.m, p.n, p.k, stream(9, "H"))
    inst = sample_larp(p, H, "planted", stream(10, "larp"))
    assert abs(inst.corrupted_mask.mean() - 0.3) < 0.01


# --- preimage enumeration -------------------------------------------------------


def test_preimage_sizes_match_binomial_mean():
    store = RandomFunctionStore(100, 2, 8, 16, seed=21)
    rng = stream(11, "targets")
    sizes = []
    for i in range(100):
        target = int(rng.integers(0, 16))
        sizes.append(len(enumerate_preimages(store, i, target)))
    expected = 8**2 / 16
    se = np.sqrt(expected * (1 - 1 / 16) / 100)
    assert abs(np.mean(sizes) - expected) < 3 * se


def test_preimages_map_back_to_target():
    store = RandomFunctionStore(4, 2, 8, 16, seed=22)
    for i in range(4):
        for target in (0, 7, 15):
            for symbols in enumerate_preimages(store, i, target):
                assert store.evaluate(i, symbols) == target


def test_preimages_are_lexicographic_and_complete_when_gamma_one():
    store = RandomFunctionStore(1, 2, 3, 1, seed=23)
    pre = enumerate_preimages(store, 0, 0)
    assert pre == [(i, j) for i in range(3) for j in range(3)]


def test_distinct_only_drops_repeats():
    store = RandomFunctionStore(1, 2, 2, 1, seed=24)
    pre = enumerate_preimages(store, 0, 0, distinct_only=True)
    assert pre == [(0, 1), (1, 0)]


def test_preimage_budget():
    store = RandomFunctionStore(1, 4, 64, 16, seed=25)
    with pytest.raises(BudgetError):
        enumerate_preimages(store, 0, 3, budget=1 << 20)


# --- noisy parity sampler --------------------------------------------------------


def test_kxor_noiseless_is_exact_parity():
    p = make_params(beta=0.0, m=500)
    H = random_mnk_matrix(p.m, p.n, p.k, stream(12, "H"))
    inst = sample_kxor(p, H, "planted", stream(13, "kxor"))
    assert inst.b == matvec(H, inst.secret)


def test_kxor_full_corruption_couples_to_null_and_is_unbiased():
    p = make_params(beta=1.0, m=100_000)
    H = random_mnk_matrix(p.m, p.n, p.k, stream(14, "H"))
    null = sample_kxor(p, H, "null", stream(15, "arm"))
    planted = sample_kxor(p, H, "planted", stream(15, "arm"))
    assert null.b == planted.b
    parity = matvec(H, planted.secret).to_array()
    agreement = (planted.b.to_array() == parity).mean()
    assert abs(agreement - 0.5) < 0.01


def test_kxor_half_corruption_agreement():
    p = make_params(beta=0.5, m=100_000)
    H = random_mnk_matrix(p.m, p.n, p.k, stream(16, "H"))
    inst = sample_kxor(p, H, "planted", stream(17, "kxor"))
    parity = matvec(H, inst.secret).to_array()
    agreement = (inst.b.to_array() == parity).mean()
    assert abs(agreement - 0.75) < 0.01  # 1 - beta/2


def test_random_mnk_matrix_shape():
    H = random_mnk_matrix(200, 10, 3, stream(18, "H"))
    assert (H.m, H.n, H.k) == (200, 10, 3)
    assert (np.diff(H.rows, axis=1) > 0).all()


# --- hypergraph view --------------------------------------------------------------


def _distinct_support_matrix(m, n, k, label) -> SparseRowMatrix:
    for seed in range(50):
        H = random_mnk_matrix(m, n, k, stream(seed, label))
        supports = {H.row_support(i) for i in range(m)}
        if len(supports) == m:
            return H
    raise AssertionError("no distinct-support matrix found")


def test_null_edge_density():
    # distinct supports, so every candidate edge is a single Bernoulli(1/16)
    p = make_params(n=32, m=20, k=2, sigma_size=8, gamma_size=16)
    H = _distinct_support_matrix(p.m, p.n, p.k, "hg")
    inst = sample_larp(p, H, "null", stream(19, "null"))
    hg = to_hypergraph(inst)
    candidates = p.m * p.sigma_size**p.k
    density = len(hg.edges) / candidates
    se = np.sqrt((1 / 16) * (15 / 16) / candidates)
    assert abs(density - 1 / 16) < 3 * se


def test_planted_edges_present_at_alpha_zero():
    p = make_params(alpha=0.0)
    H = random_mnk_matrix(p.m, p.n, p.k, stream(20, "H"))
    inst = sample_larp(p, H, "planted", stream(21, "larp"))
    hg = to_hypergraph(inst)
    for i in range(p.m):
        support = H.row_support(i)
        edge = tuple((j, int(inst.secret[j])) for j in support)
        assert edge in hg.edges


def test_hypergraph_edge_supports_come_from_rows():
    p = make_params()
    H = random_mnk_matrix(p.m, p.n, p.k, stream(22, "H"))
    inst = sample_larp(p, H, "null", stream(23, "larp"))
    hg = to_hypergraph(inst)
    row_supports = {H.row_support(i) for i in range(p.m)}
    assert hg.edge_supports() <= row_supports


def test_hypergraph_empty_when_targets_unreachable():
    # sigma=2, k=1 means each function's image has at most 2 of 64 values;
    # point b at values outside every image
    store = RandomFunctionStore(3, 1, 2, 64, seed=26)
    b = []
    for i in range(3):
        image = set(store.row_values(i).tolist())
        b.append(next(v for v in range(64) if v not in image))
    H = SparseRowMatrix(3, 2, 1, [[0], [1], [0]])
    inst = LarpInstance(H, store, np.array(b), "null")
    assert to_hypergraph(inst).edges == frozenset()


# --- serialization -----------------------------------------------------------------


def test_instances_are_reproducible_byte_for_byte():
    p = make_params()
    H = random_mnk_matrix(p.m, p.n, p.k, stream(p.seed, "H"))
    first = instance_dumps(sample_larp(p, H, "planted", stream(p.seed, "i")), p, True)
    second = instance_dumps(sample_larp(p, H, "planted", stream(p.seed, "i")), p, True)
    assert first == second


@pytest.mark.parametrize("which", ["null", "planted"])
@pytest.mark.parametrize("kind", ["larp", "kxor"])
def test_instance_file_round_trip(kind, which):
    p = make_params()
    H = random_mnk_matrix(p.m, p.n, p.k, stream(24, "H"))
    sampler = sample_larp if kind == "larp" else sample_kxor
    inst = sampler(p, H, which, stream(25, kind, which))
    text = instance_dumps(inst, p, include_witness=True)
    again, p2 = instance_loads(text)
    assert p2 == p
    assert instance_dumps(again, p, include_witness=True) == text
    assert type(again) is type(inst)


def test_instance_loads_rejects_out_of_range_targets():
    p = make_params()
    H = random_mnk_matrix(p.m, p.n, p.k, stream(28, "H"))
    inst = sample_kxor(p, H, "null", stream(29, "kxor"))
    text = instance_dumps(inst, p)
    lines = text.splitlines()
    values = lines[-1].split()
    values[0] = "7"
    lines[-1] = " ".join(values)
    with pytest.raises(Exception, match="outside"):
        instance_loads("\n".join(lines) + "\n")


def test_witness_gating():
    p = make_params()
    H = random_mnk_matrix(p.m, p.n, p.k, stream(26, "H"))
    inst = sample_larp(p, H, "planted", stream(27, "larp"))
    text = instance_dumps(inst, p, include_witness=False)
    assert "SECRET" not in text and "MASK" not in text
    again, _ = instance_loads(text)
    assert again.secret is None
