"""Parity-check matrices, GF(2) helpers, code templates and alist I/O.

A :class:`ParityCheckMatrix` is immutable. Every edit (mutation, crossover,
repair) builds a new instance, so cached quantities such as the GF(2) rank
never go stale and instances can be shared freely between workers.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

TEMPLATE_KINDS = ("none", "ira", "tbira", "ptbira")


class AlistError(ValueError):
    """Raised for malformed alist input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class StructureTemplate:
    """Prescribed right-hand m x m block ``H_R`` of ``H = [H_L  H_R]``.

    ``ptb_rows`` overrides the three row positions (1-based) of the
    weight-three column used by ``ptbira``; the default is
    ``(1, ceil(m/2), m)``.
    """

    kind: str = "none"
    ptb_rows: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.kind not in TEMPLATE_KINDS:
            raise ValueError(f"unknown template kind {self.kind!r}; expected one of {TEMPLATE_KINDS}")

    @property
    def structured(self) -> bool:
        return self.kind != "none"

    def right_block(self, m: int) -> np.ndarray:
        """Return the fixed ``H_R`` as a dense uint8 (m, m) array."""
        if not self.structured:
            return np.zeros((m, 0), dtype=np.uint8)
        if m < 2:
            raise ValueError("structured templates need m >= 2")
        hr = np.zeros((m, m), dtype=np.uint8)
        if self.kind in ("ira", "tbira"):
            idx = np.arange(m)
            hr[idx, idx] = 1
            hr[idx[1:], idx[:-1]] = 1
            if self.kind == "tbira":
                hr[0, m - 1] = 1
            return hr
        # ptbira: column j (j >= 1, 0-based) has ones in rows j-1 and j,
        # column 0 carries the weight-three column.
        for j in range(1, m):
            hr[j - 1, j] = 1
            hr[j, j] = 1
        rows = self.ptb_rows or (1, math.ceil(m / 2), m)
        if len(set(rows)) != 3 or not all(1 <= r <= m for r in rows):
            raise ValueError(f"invalid ptb_rows {rows} for m={m}")
        for r in rows:
            hr[r - 1, 0] = 1
        return hr

    def mask(self, m: int, n: int) -> np.ndarray | None:
        if not self.structured:
            return None
        mask = np.zeros((m, n), dtype=bool)
        mask[:, n - m:] = True
        return mask


class ParityCheckMatrix:
    """Binary m x n parity-check matrix stored as a row-major edge list.

    Parameters
    ----------
    m, n : int
        Number of check nodes (rows) and variable nodes (columns).
    rows, cols : array_like
        0-based coordinates of the nonzero entries. Duplicates are rejected.
    template : StructureTemplate, optional
        When structured, the right m x m block must equal the template
        exactly and is reported by :attr:`structure_mask`.
    """

    def __init__(self, m: int, n: int, rows, cols, template: StructureTemplate | None = None):
        m, n = int(m), int(n)
        if m < 1 or n < 1:
            raise ValueError(f"matrix dimensions must be positive, got {m}x{n}")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n):
            raise ValueError("edge index out of range")
        key = rows * n + cols
        order = np.argsort(key, kind="stable")
        key = key[order]
        if key.size > 1 and np.any(key[1:] == key[:-1]):
            raise ValueError("duplicate edges are not allowed in a binary matrix")
        self.m = m
        self.n = n
        self.rows = rows[order].astype(np.int32)
        self.cols = cols[order].astype(np.int32)
        self.rows.setflags(write=False)
        self.cols.setflags(write=False)
        self.template = template if template is not None and template.structured else None
        if self.template is not None:
            if n <= m:
                raise ValueError("structured templates need n > m")
            hr = self.template.right_block(m)
            if not np.array_equal(self.dense[:, n - m:], hr):
                raise ValueError(f"right block does not match the {self.template.kind} template")

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_dense(cls, dense, template: StructureTemplate | None = None) -> "ParityCheckMatrix":
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise ValueError("dense matrix must be 2-D")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("dense matrix must be binary")
        r, c = np.nonzero(arr)
        return cls(arr.shape[0], arr.shape[1], r, c, template)

    @classmethod
    def from_edges(cls, m: int, n: int, edges: Iterable[tuple[int, int]],
                   template: StructureTemplate | None = None) -> "ParityCheckMatrix":
        edges = list(edges)
        if not edges:
            return cls(m, n, [], [], template)
        r, c = zip(*edges)
        return cls(m, n, r, c, template)

    # -- basic views ------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    @property
    def num_edges(self) -> int:
        return int(self.rows.size)

    @cached_property
    def dense(self) -> np.ndarray:
        d = np.zeros((self.m, self.n), dtype=np.uint8)
        d[self.rows, self.cols] = 1
        d.setflags(write=False)
        return d

    @cached_property
    def structure_mask(self) -> np.ndarray | None:
        if self.template is None:
            return None
        return self.template.mask(self.m, self.n)

    @cached_property
    def col_weights(self) -> np.ndarray:
        return np.bincount(self.cols, minlength=self.n)

    @cached_property
    def row_weights(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.m)

    @property
    def edges(self) -> set[tuple[int, int]]:
        return set(zip(self.rows.tolist(), self.cols.tolist()))

    @cached_property
    def key(self) -> bytes:
        """Hashable identity of the edge set (dimensions included)."""
        return np.array([self.m, self.n], dtype=np.int32).tobytes() + self.rows.tobytes() + self.cols.tobytes()

    def __eq__(self, other):
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        kind = self.template.kind if self.template else "none"
        return f"ParityCheckMatrix(m={self.m}, n={self.n}, E={self.num_edges}, template={kind})"

    def is_connected(self) -> bool:
        """Every row and every column has at least one edge."""
        return bool(self.col_weights.min() >= 1 and self.row_weights.min() >= 1)

    @cached_property
    def rank(self) -> int:
        return gf2_rank(self)

    @cached_property
    def tanner(self) -> "TannerArrays":
        return TannerArrays.build(self)

    def with_dense(self, dense) -> "ParityCheckMatrix":
        """New matrix with the same template and the given entries."""
        return ParityCheckMatrix.from_dense(dense, self.template)


@dataclass(frozen=True)
class TannerArrays:
    """Flat adjacency arrays used by the decoder kernels.

    Edges are indexed in row-major order, so the edges of check ``j`` are
    ``chk_ptr[j]:chk_ptr[j+1]``. ``var_edges[var_ptr[i]:var_ptr[i+1]]`` lists
    the edges of variable ``i``.
    """

    m: int
    n: int
    edge_var: np.ndarray
    chk_ptr: np.ndarray
    var_ptr: np.ndarray
    var_edges: np.ndarray

    @classmethod
    def build(cls, H: ParityCheckMatrix) -> "TannerArrays":
        edge_var = H.cols.astype(np.int64)
        chk_ptr = np.zeros(H.m + 1, dtype=np.int64)
        np.cumsum(H.row_weights, out=chk_ptr[1:])
        var_edges = np.argsort(edge_var, kind="stable").astype(np.int64)
        var_ptr = np.zeros(H.n + 1, dtype=np.int64)
        np.cumsum(H.col_weights, out=var_ptr[1:])
        return cls(H.m, H.n, edge_var, chk_ptr, var_ptr, var_edges)


# -- GF(2) ---------------------------------------------------------------

def _row_ints(dense: np.ndarray) -> list[int]:
    """Pack each row into a Python int, column 0 as the most significant bit."""
    packed = np.packbits(np.asarray(dense, dtype=np.uint8), axis=1)
    pad = packed.shape[1] * 8 - dense.shape[1]
    return [int.from_bytes(r.tobytes(), "big") >> pad for r in packed]


def gf2_rank(H) -> int:
    """Rank over GF(2) of a :class:`ParityCheckMatrix` or a dense 0/1 array."""
    dense = H.dense if isinstance(H, ParityCheckMatrix) else np.asarray(H, dtype=np.uint8)
    if dense.size == 0:
        raise ValueError("rank of an empty matrix is undefined")
    basis: dict[int, int] = {}
    for r in _row_ints(dense):
        while r:
            lead = r.bit_length() - 1
            if lead in basis:
                r ^= basis[lead]
            else:
                basis[lead] = r
                break
    return len(basis)


def gf2_rref(dense: np.ndarray, col_order: Iterable[int] | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2).

    Columns are scanned in ``col_order`` (default: left to right). Returns the
    reduced matrix (zero rows dropped) and the pivot columns in row order.
    """
    a = np.array(dense, dtype=np.uint8) & 1
    m, n = a.shape
    order = range(n) if col_order is None else col_order
    pivots: list[int] = []
    r = 0
    for c in order:
        if r == m:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(int(c))
        r += 1
    return a[:r], pivots


@dataclass(frozen=True)
class CodeProfile:
    n: int
    m: int
    rank: int
    k: int
    rate: float
    design_rate: float
    vn_degrees: dict[int, int]
    cn_degrees: dict[int, int]
    num_edges: int


def profile(H: ParityCheckMatrix) -> CodeProfile:
    k = H.n - H.rank
    return CodeProfile(
        n=H.n,
        m=H.m,
        rank=H.rank,
        k=k,
        rate=k / H.n,
        design_rate=(H.n - H.m) / H.n,
        vn_degrees=dict(sorted(Counter(H.col_weights.tolist()).items())),
        cn_degrees=dict(sorted(Counter(H.row_weights.tolist()).items())),
        num_edges=H.num_edges,
    )


# -- random construction ---------------------------------------------------

def _socket_match(col_deg: np.ndarray, row_deg: np.ndarray, rng: np.random.Generator,
                  max_restarts: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Random bipartite matching of edge sockets without multi-edges."""
    col_sock = np.repeat(np.arange(col_deg.size), col_deg)
    row_sock_base = np.repeat(np.arange(row_deg.size), row_deg)
    n_edges = col_sock.size
    ncols = col_deg.size
    for _ in range(max_restarts):
        row_sock = rng.permutation(row_sock_base)
        keys = row_sock * ncols + col_sock
        counts = Counter(keys.tolist())
        bad = [i for i in range(n_edges) if counts[int(keys[i])] > 1]
        tries = 0
        while bad and tries < 50 * n_edges:
            tries += 1
            i = bad[-1]
            if counts[int(keys[i])] <= 1:
                bad.pop()
                continue
            j = int(rng.integers(n_edges))
            ki_new = int(row_sock[j] * ncols + col_sock[i])
            kj_new = int(row_sock[i] * ncols + col_sock[j])
            if i == j or ki_new == kj_new or counts[ki_new] or counts[kj_new]:
                continue
            counts[int(keys[i])] -= 1
            counts[int(keys[j])] -= 1
            row_sock[i], row_sock[j] = row_sock[j], row_sock[i]
            keys[i], keys[j] = ki_new, kj_new
            counts[ki_new] += 1
            counts[kj_new] += 1
            bad.pop()
        if not any(counts[int(k)] > 1 for k in keys):
            return row_sock, col_sock
    raise RuntimeError("socket matching failed to avoid multi-edges")


def random_regular(n: int, vn_degree: int, cn_degree: int, seed) -> ParityCheckMatrix:
    """Random (vn_degree, cn_degree)-regular matrix via socket matching."""
    if n < 1 or vn_degree < 1 or cn_degree < 1:
        raise ValueError("n and degrees must be positive")
    if (n * vn_degree) % cn_degree:
        raise ValueError(f"n*vn_degree={n * vn_degree} is not divisible by cn_degree={cn_degree}")
    m = n * vn_degree // cn_degree
    if vn_degree > m or cn_degree > n:
        raise ValueError(f"degree pair ({vn_degree},{cn_degree}) infeasible for n={n}")
    rng = np.random.default_rng(seed)
    r, c = _socket_match(np.full(n, vn_degree), np.full(m, cn_degree), rng)
    return ParityCheckMatrix(m, n, r, c)


def random_left_block(m: int, cols: int, vn_degree: int, rng: np.random.Generator) -> np.ndarray:
    """Dense m x cols block with column weight ``vn_degree`` and near-even rows."""
    if vn_degree > m:
        raise ValueError(f"column weight {vn_degree} exceeds m={m}")
    total = cols * vn_degree
    row_deg = np.full(m, total // m)
    row_deg[rng.permutation(m)[: total % m]] += 1
    if row_deg.max() > cols:
        raise ValueError("left block too narrow for the requested column weight")
    r, c = _socket_match(np.full(cols, vn_degree), row_deg, rng)
    block = np.zeros((m, cols), dtype=np.uint8)
    block[r, c] = 1
    return block


def apply_template(H_L, template: StructureTemplate) -> ParityCheckMatrix:
    """Concatenate a left block with the template's fixed right block."""
    left = H_L.dense if isinstance(H_L, ParityCheckMatrix) else np.asarray(H_L, dtype=np.uint8)
    if left.ndim != 2:
        raise ValueError("H_L must be 2-D")
    m = left.shape[0]
    if not template.structured:
        return ParityCheckMatrix.from_dense(left)
    hr = template.right_block(m)
    if left.shape[1] < 1:
        raise ValueError("H_L must have at least one column")
    return ParityCheckMatrix.from_dense(np.hstack([left, hr]), template)


# -- Tanner graph cycles ---------------------------------------------------

@dataclass(frozen=True)
class CycleInfo:
    girth: float
    four_cycles: int
    vn_shortest: np.ndarray  # shortest cycle through each VN, inf if none


def _adjacency(H: ParityCheckMatrix) -> list[list[int]]:
    """Tanner graph adjacency; VNs are 0..n-1, CNs are n..n+m-1."""
    adj: list[list[int]] = [[] for _ in range(H.n + H.m)]
    for r, c in zip(H.rows.tolist(), H.cols.tolist()):
        adj[c].append(H.n + r)
        adj[H.n + r].append(c)
    return adj


def _shortest_cycle_through(adj: list[list[int]], root: int) -> float:
    dist = {root: 0}
    branch = {root: -1}
    parent = {root: -1}
    queue = deque([root])
    best = math.inf
    while queue:
        u = queue.popleft()
        if 2 * dist[u] + 1 >= best:
            break
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                parent[w] = u
                branch[w] = w if u == root else branch[u]
                queue.append(w)
            elif parent[u] != w and branch[w] != branch[u] and w != root:
                best = min(best, dist[u] + dist[w] + 1)
    return best


def girth_and_cycles(H: ParityCheckMatrix) -> CycleInfo:
    adj = _adjacency(H)
    vn_short = np.array([_shortest_cycle_through(adj, v) for v in range(H.n)], dtype=float)
    girth = float(vn_short.min()) if vn_short.size else math.inf
    d = H.dense.astype(np.int64)
    overlap = d @ d.T
    iu = np.triu_indices(H.m, k=1)
    c = overlap[iu]
    four = int(np.sum(c * (c - 1) // 2))
    return CycleInfo(girth=girth, four_cycles=four, vn_shortest=vn_short)


# -- alist -----------------------------------------------------------------

def write_alist(H: ParityCheckMatrix, path) -> None:
    Path(path).write_text(format_alist(H))


def format_alist(H: ParityCheckMatrix) -> str:
    d = H.dense
    cw, rw = H.col_weights, H.row_weights
    max_c, max_r = int(cw.max(initial=0)), int(rw.max(initial=0))
    lines = [f"{H.n} {H.m}", f"{max_c} {max_r}",
             " ".join(map(str, cw.tolist())), " ".join(map(str, rw.tolist()))]
    for i in range(H.n):
        idx = (np.flatnonzero(d[:, i]) + 1).tolist()
        lines.append(" ".join(map(str, idx + [0] * max(max_c - len(idx), 0 if idx else 1))))
    for j in range(H.m):
        idx = (np.flatnonzero(d[j]) + 1).tolist()
        lines.append(" ".join(map(str, idx + [0] * max(max_r - len(idx), 0 if idx else 1))))
    return "\n".join(lines) + "\n"


def _ints(text: str, lineno: int) -> list[int]:
    try:
        return [int(t) for t in text.split()]
    except ValueError:
        raise AlistError(f"non-integer token in {text.strip()!r}", lineno) from None


def _index_list(tokens: list[int], weight: int, max_weight: int, bound: int, what: str,
                lineno: int) -> list[int]:
    # an empty list is written as a single 0 so that the line is not blank
    if len(tokens) < weight or len(tokens) > max(weight, max_weight, 1):
        raise AlistError(f"{what} declares weight {weight} but lists {len(tokens)} entries", lineno)
    entries, padding = tokens[:weight], tokens[weight:]
    if any(t != 0 for t in padding):
        raise AlistError(f"{what} has nonzero entries beyond its weight {weight}", lineno)
    for t in entries:
        if not 1 <= t <= bound:
            raise AlistError(f"{what} index {t} outside 1..{bound}", lineno)
    if len(set(entries)) != len(entries):
        raise AlistError(f"{what} lists a duplicate index", lineno)
    return entries


def parse_alist(text: str) -> ParityCheckMatrix:
    """Parse MacKay alist text. Blank lines are ignored."""
    lines = [(no, ln) for no, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    if len(lines) < 4:
        raise AlistError("file truncated: header needs four lines", lines[-1][0] if lines else None)

    def header(pos: int, count: int, what: str) -> list[int]:
        no, ln = lines[pos]
        vals = _ints(ln, no)
        if len(vals) != count:
            raise AlistError(f"{what}: expected {count} values, found {len(vals)}", no)
        if any(v < 0 for v in vals):
            raise AlistError(f"{what}: negative value", no)
        return vals

    n, m = header(0, 2, "dimensions")
    if n < 1 or m < 1:
        raise AlistError("dimensions must be positive", lines[0][0])
    max_c, max_r = header(1, 2, "maximum weights")
    cw = header(2, n, "column weights")
    rw = header(3, m, "row weights")
    if max(cw) > max_c:
        raise AlistError(f"column weight {max(cw)} exceeds declared maximum {max_c}", lines[2][0])
    if max(rw) > max_r:
        raise AlistError(f"row weight {max(rw)} exceeds declared maximum {max_r}", lines[3][0])
    if sum(cw) != sum(rw):
        raise AlistError(f"column weights sum to {sum(cw)} but row weights sum to {sum(rw)}", lines[3][0])
    if len(lines) < 4 + n + m:
        raise AlistError(f"file truncated: expected {n} column and {m} row lines", lines[-1][0])
    if len(lines) > 4 + n + m:
        raise AlistError("unexpected trailing data", lines[4 + n + m][0])

    col_edges = set()
    for i in range(n):
        no, ln = lines[4 + i]
        for r in _index_list(_ints(ln, no), cw[i], max_c, m, f"column {i + 1}", no):
            col_edges.add((r - 1, i))
    row_edges = set()
    for j in range(m):
        no, ln = lines[4 + n + j]
        for c in _index_list(_ints(ln, no), rw[j], max_r, n, f"row {j + 1}", no):
            row_edges.add((j, c - 1))
    if col_edges != row_edges:
        r, c = min(col_edges ^ row_edges)
        no = lines[4 + n + r][0]
        raise AlistError(f"row list and column list disagree at entry ({r + 1}, {c + 1})", no)
    return ParityCheckMatrix.from_edges(m, n, sorted(col_edges))


def read_alist(path) -> ParityCheckMatrix:
    return parse_alist(Path(path).read_text())


def format_dense(H: ParityCheckMatrix) -> str:
    return "\n".join(" ".join(map(str, row)) for row in H.dense.tolist()) + "\n"


def parse_dense(text: str) -> ParityCheckMatrix:
    rows = []
    for no, ln in enumerate(text.splitlines(), start=1):
        if not ln.strip():
            continue
        vals = ln.split() if " " in ln.strip() else list(ln.strip())
        try:
            rows.append([int(v) for v in vals])
        except ValueError:
            raise AlistError(f"non-binary token in {ln.strip()!r}", no) from None
        if rows[-1] and len(rows[-1]) != len(rows[0]):
            raise AlistError("ragged dense matrix", no)
    if not rows:
        raise AlistError("empty dense matrix")
    arr = np.array(rows)
    if not np.all((arr == 0) | (arr == 1)):
        raise AlistError("dense matrix must be binary")
    return ParityCheckMatrix.from_dense(arr)
