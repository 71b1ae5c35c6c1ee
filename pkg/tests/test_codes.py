import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genldpc.codes import (
    AlistError,
    ParityCheckMatrix,
    StructureTemplate,
    apply_template,
    format_alist,
    format_dense,
    gf2_rank,
    gf2_rref,
    girth_and_cycles,
    parse_alist,
    parse_dense,
    profile,
    random_left_block,
    random_regular,
)
from oracles import malformed_alists


def dense_matrices(max_m=8, max_n=12):
    return st.integers(1, max_m).flatmap(
        lambda m: st.integers(1, max_n).flatmap(
            lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                               min_size=m, max_size=m)))


def rank_by_span(d: np.ndarray) -> int:
    # brute force: log2 of the size of the row space
    m = d.shape[0]
    span = set()
    for coeffs in itertools.product((0, 1), repeat=m):
        span.add(tuple((np.array(coeffs) @ d) % 2))
    return int(np.log2(len(span)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7).flatmap(lambda m: st.lists(
    st.lists(st.integers(0, 1), min_size=9, max_size=9), min_size=m, max_size=m)))
def test_gf2_rank_matches_span_size(rows):
    d = np.array(rows, dtype=np.uint8)
    assert gf2_rank(d) == rank_by_span(d)


@settings(max_examples=60, deadline=None)
@given(dense_matrices())
def test_rref_is_reduced_and_same_rank(rows):
    d = np.array(rows, dtype=np.uint8)
    r, piv = gf2_rref(d)
    assert r.shape[0] == gf2_rank(d) == len(piv)
    for i, c in enumerate(piv):
        col = r[:, c]
        assert col[i] == 1 and col.sum() == 1


def test_profile_of_hamming():
    H = ParityCheckMatrix.from_dense([[1, 1, 0, 1, 1, 0, 0], [1, 0, 1, 1, 0, 1, 0], [0, 1, 1, 1, 0, 0, 1]])
    p = profile(H)
    assert (p.n, p.m, p.rank, p.k) == (7, 3, 3, 4)
    assert p.rate == pytest.approx(4 / 7)
    assert p.vn_degrees == {1: 3, 2: 3, 3: 1}
    assert p.cn_degrees == {4: 3}
    assert p.num_edges == 12


def test_duplicate_edges_rejected():
    with pytest.raises(ValueError):
        ParityCheckMatrix(2, 2, [0, 0], [1, 1])


def test_matrix_is_immutable():
    H = random_regular(12, 3, 6, seed=0)
    with pytest.raises(ValueError):
        H.dense[0, 0] = 1
    with pytest.raises(ValueError):
        H.rows[0] = 3


@pytest.mark.parametrize("n,dv,dc", [(12, 3, 6), (64, 3, 6), (128, 3, 6), (30, 2, 5), (40, 4, 8)])
def test_random_regular_degrees(n, dv, dc):
    H = random_regular(n, dv, dc, seed=7)
    assert H.shape == (n * dv // dc, n)
    assert set(H.col_weights.tolist()) == {dv}
    assert set(H.row_weights.tolist()) == {dc}


def test_random_regular_is_seeded():
    assert random_regular(64, 3, 6, 3).key == random_regular(64, 3, 6, 3).key
    assert random_regular(64, 3, 6, 3).key != random_regular(64, 3, 6, 4).key


def test_templates_right_block():
    m = 6
    ira = StructureTemplate("ira").right_block(m)
    assert np.array_equal(ira, np.eye(m, dtype=np.uint8) + np.eye(m, k=-1, dtype=np.uint8))
    tb = StructureTemplate("tbira").right_block(m)
    assert tb[0, m - 1] == 1 and tb.sum() == 2 * m
    ptb = StructureTemplate("ptbira").right_block(m)
    assert np.flatnonzero(ptb[:, 0]).tolist() == [0, 2, 5]
    for j in range(1, m):
        assert np.flatnonzero(ptb[:, j]).tolist() == [j - 1, j]


@pytest.mark.parametrize("kind", ["ira", "tbira", "ptbira"])
def test_apply_template_and_validation(kind):
    rng = np.random.default_rng(0)
    t = StructureTemplate(kind)
    H = apply_template(random_left_block(8, 8, 3, rng), t)
    assert H.shape == (8, 16)
    assert np.array_equal(H.dense[:, 8:], t.right_block(8))
    bad = H.dense.copy()
    bad[0, 15] ^= 1
    with pytest.raises(ValueError):
        ParityCheckMatrix.from_dense(bad, t)


def _shortest_cycle_oracle(d: np.ndarray, v: int) -> float:
    """Shortest cycle through VN v: for each edge (v, c), BFS from c to v with that edge removed."""
    m, n = d.shape
    adj = {("v", j): [("c", i) for i in np.flatnonzero(d[:, j])] for j in range(n)}
    adj.update({("c", i): [("v", j) for j in np.flatnonzero(d[i])] for i in range(m)})
    best = np.inf
    for c in adj[("v", v)]:
        dist = {c: 0}
        q = deque([c])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if (u, w) in ((c, ("v", v)),):
                    continue
                if w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        if ("v", v) in dist:
            best = min(best, dist[("v", v)] + 1)
    return best


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6), st.integers(4, 12))
def test_girth_matches_edge_removal_oracle(seed, m, n):
    rng = np.random.default_rng(seed)
    d = (rng.random((m, n)) < 0.35).astype(np.uint8)
    H = ParityCheckMatrix.from_dense(d)
    info = girth_and_cycles(H)
    oracle = [_shortest_cycle_oracle(d, v) for v in range(n)]
    assert info.vn_shortest.tolist() == oracle
    assert info.girth == min(oracle)
    # 4-cycles: pairs of rows sharing a pair of columns
    four = sum(1 for r1, r2 in itertools.combinations(range(m), 2)
               for c1, c2 in itertools.combinations(range(n), 2)
               if d[r1, c1] and d[r1, c2] and d[r2, c1] and d[r2, c2])
    assert info.four_cycles == four


@settings(max_examples=50, deadline=None)
@given(dense_matrices(6, 10))
def test_alist_round_trip(rows):
    H = ParityCheckMatrix.from_dense(np.array(rows, dtype=np.uint8))
    back = parse_alist(format_alist(H))
    assert np.array_equal(back.dense, H.dense)
    assert np.array_equal(parse_dense(format_dense(H)).dense, H.dense)


def test_alist_format_layout():
    H = ParityCheckMatrix.from_dense([[1, 1, 0], [0, 1, 1]])
    text = format_alist(H)
    assert text.splitlines()[:4] == ["3 2", "2 2", "1 2 1", "2 2"]
    assert text.splitlines()[4] == "1 0"  # column 1 padded with zero


@pytest.mark.parametrize("name", list(malformed_alists()))
def test_alist_corruption_raises(name):
    with pytest.raises(AlistError):
        parse_alist(malformed_alists()[name])


def test_rank_examples():
    assert gf2_rank(np.eye(7, dtype=np.uint8)) == 7
    d = np.eye(5, 9, dtype=np.uint8)
    d[4] = d[1]
    assert gf2_rank(d) == 4
    from oracles import nullspace

    rng = np.random.default_rng(0)
    for _ in range(20):
        d = (rng.random((10, 20)) < 0.5).astype(np.uint8)
        # nullity from an elimination that scans columns instead of rows
        assert gf2_rank(d) == 20 - nullspace(d).shape[0]


def test_profile_examples():
    ones = profile(ParityCheckMatrix.from_dense(np.ones((1, 9), dtype=np.uint8)))
    assert (ones.rank, ones.k) == (1, 8)
    d = np.zeros((4, 8), dtype=np.uint8)
    d[0, [0, 1, 4]] = d[1, [1, 2, 5]] = d[2, [2, 3, 6]] = 1
    d[3] = d[0] ^ d[1]
    p = profile(ParityCheckMatrix.from_dense(d))
    assert (p.rank, p.k, p.rate, p.design_rate) == (3, 5, 0.625, 0.5)
    for seed in range(10):
        H = random_regular(128, 3, 6, seed)
        q = profile(H)
        assert q.num_edges == 384 and q.m == 64
        if q.rank == 64:
            assert (q.k, q.rate) == (64, 0.5)


def test_random_regular_small_matching():
    H = random_regular(4, 1, 2, seed=0)
    assert H.shape == (2, 4) and H.col_weights.tolist() == [1] * 4 and H.row_weights.tolist() == [2, 2]


def test_template_examples_one_based():
    ira = StructureTemplate("ira").right_block(4)
    ones = {(int(r) + 1, int(c) + 1) for r, c in zip(*np.nonzero(ira))}
    assert ones == {(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 3), (4, 4)}
    tb = StructureTemplate("tbira").right_block(4)
    assert {(int(r) + 1, int(c) + 1) for r, c in zip(*np.nonzero(tb))} == ones | {(1, 4)}
    ptb = StructureTemplate("ptbira").right_block(7)
    assert (np.flatnonzero(ptb[:, 0]) + 1).tolist() == [1, 4, 7]


def test_girth_examples():
    assert girth_and_cycles(ParityCheckMatrix.from_dense([[1, 1, 0], [1, 1, 1]])).girth == 4
    from oracles import repetition

    assert girth_and_cycles(repetition(6)).girth == float("inf")
    H = random_regular(32, 3, 6, seed=3)
    info = girth_and_cycles(H)
    assert info.vn_shortest.tolist() == [_shortest_cycle_oracle(H.dense, v) for v in range(32)]


def test_alist_weight_declared_but_short_list():
    H = ParityCheckMatrix.from_dense([[1, 0], [1, 1], [0, 1], [1, 1]])
    lines = format_alist(H).splitlines()
    lines[4] = "1 2"  # column 1 declares weight 3
    with pytest.raises(AlistError, match="line 5"):
        parse_alist("\n".join(lines))
