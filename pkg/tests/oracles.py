"""Independent reference implementations used to validate the package.

Everything here deliberately avoids the production code paths it checks:
dense elimination instead of sparse, node-sequence DFS on the expanded
graph instead of base-walk projection, exhaustive codeword search instead
of message passing.
"""

from __future__ import annotations

import itertools

import numpy as np

from nbqc.codec import SparseGfMatrix
from nbqc.gf import Field
from nbqc.lift import QcCode
from nbqc.protograph import Protograph


def ring_protograph(half: int) -> Protograph:
    """Cycle of length 2*half: check i joins var i and var i+1 (mod half)."""
    edges = []
    for i in range(half):
        edges.append((i, i, 2 * i))
        edges.append((i, (i + 1) % half, 2 * i + 1))
    return Protograph(half, half, edges)


def decorated_ring(half: int, extra_per_var, rng) -> Protograph:
    """Ring plus degree-1 pendant checks, raising variable degrees (ACE)."""
    edges = []
    for i in range(half):
        edges.append((i, i, 2 * i))
        edges.append((i, (i + 1) % half, 2 * i + 1))
    eid = 2 * half
    check_id = half
    for v in range(half):
        for _ in range(int(extra_per_var[v])):
            edges.append((check_id, v, eid))
            eid += 1
            check_id += 1
    return Protograph(check_id, half, edges)


def lifted_cycle_matrix(half, Z, field: Field, lam, shifts, rhos) -> SparseGfMatrix:
    """Banded block matrix of a length-2*half cycle, built directly.

    Block row i holds the blocks of edges 2i (column i) and 2i+1 (column
    i+1 mod half); each block is the circulant with row r holding
    alpha^(rho + r*lam) at column (r + d) mod Z.
    """
    qm1 = field.q - 1
    entries = []
    for i in range(half):
        for k, col in ((2 * i, i), (2 * i + 1, (i + 1) % half)):
            d, rho = shifts[k], rhos[k]
            for row in range(Z):
                entries.append(
                    (
                        i * Z + row,
                        col * Z + (row + d) % Z,
                        field.pow_alpha((rho + row * lam) % qm1),
                    )
                )
    return SparseGfMatrix.from_entries(half * Z, half * Z, entries, field)


def clmul_mod(a: int, b: int, poly: int, r: int) -> int:
    """Carry-less multiply then polynomial reduction, no tables."""
    prod = 0
    aa = a
    while b:
        if b & 1:
            prod ^= aa
        aa <<= 1
        b >>= 1
    for bit in range(prod.bit_length() - 1, r - 1, -1):
        if prod >> bit & 1:
            prod ^= poly << (bit - r)
    return prod


def dense_rank(mat, field: Field) -> int:
    """Gaussian elimination on a dense list-of-lists copy."""
    m = [list(row) for row in mat]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    row = 0
    for col in range(n_cols):
        pivot = None
        for i in range(row, n_rows):
            if m[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = field.inv(m[row][col])
        for i in range(n_rows):
            if i != row and m[i][col]:
                factor = field.mul(m[i][col], inv)
                for j in range(n_cols):
                    m[i][j] ^= _mul(field, factor, m[row][j])
        row += 1
        rank += 1
        if row == n_rows:
            break
    return rank


def _mul(field: Field, a: int, b: int) -> int:
    return field.mul(a, b)


def count_closed_walks_by_node_dfs(n_checks: int, n_vars: int, max_len: int):
    """Closed-walk class counts on the complete bipartite graph K_{m,n}.

    Walks are enumerated as node sequences (simple complete graph, so node
    sequences determine edges), made non-backtracking including the wrap,
    primitive, and deduplicated under rotation and reversal.  Returns
    {length: class count}.
    """
    classes: set[tuple] = set()

    def canon(seq: tuple) -> tuple:
        n = len(seq)
        cands = []
        for base in (seq, tuple(reversed(seq))):
            start = 0 if base[0][0] == "c" else 1
            for i in range(start, n, 2):
                cands.append(base[i:] + base[:i])
        return min(cands)

    def periodic(seq: tuple) -> bool:
        n = len(seq)
        for p in range(2, n, 2):
            if n % p == 0 and all(seq[i] == seq[(i + p) % n] for i in range(n)):
                return True
        return False

    def dfs(path: list, start):
        L = len(path)
        if L >= 4 and L % 2 == 0 and path[-1][0] == "v":
            # wrap edge (path[-1], start): non-backtracking at both ends
            if path[1] != path[-1] and path[-2] != start:
                word = tuple(path)
                if not periodic(word):
                    classes.add(canon(word))
        if L == max_len:
            return
        kind, _ = path[-1]
        nxt_kind = "v" if kind == "c" else "c"
        span = n_vars if nxt_kind == "v" else n_checks
        for i in range(span):
            node = (nxt_kind, i)
            if L >= 2 and node == path[-2]:
                continue
            path.append(node)
            dfs(path, start)
            path.pop()

    for c in range(n_checks):
        dfs([("c", c)], ("c", c))
    counts: dict[int, int] = {}
    for word in classes:
        counts[len(word)] = counts.get(len(word), 0) + 1
    return counts


class LiftedGraph:
    """Explicit expansion of a QC code as a labeled bipartite multigraph.

    Vertices are (check block, copy) and (var block, copy); edge copies are
    (base edge id, row index) with the row's GF label attached.
    """

    def __init__(self, code: QcCode):
        self.code = code
        proto, Z = code.proto, code.Z
        f = code.field
        lam = code.lambda_mult
        qm1 = max(f.q - 1, 1)
        self.Z = Z
        self.n_check_nodes = proto.n_checks * Z
        self.n_var_nodes = proto.n_vars * Z
        # adjacency: per check node and var node, list of (edge_copy_id)
        self.check_adj: list[list[int]] = [[] for _ in range(self.n_check_nodes)]
        self.var_adj: list[list[int]] = [[] for _ in range(self.n_var_nodes)]
        self.copy_check: list[int] = []
        self.copy_var: list[int] = []
        self.copy_base: list[int] = []
        self.copy_label: list[int] = []
        for e in range(proto.n_edges):
            c, v = proto.edge_check[e], proto.edge_var[e]
            d = code.shifts[e]
            rho = code.labels[e] if code.labels is not None else 0
            for i in range(Z):
                cid = len(self.copy_base)
                self.copy_check.append(c * Z + i)
                self.copy_var.append(v * Z + (i + d) % Z)
                self.copy_base.append(e)
                self.copy_label.append(f.pow_alpha((rho + i * lam) % qm1))
                self.check_adj[c * Z + i].append(cid)
                self.var_adj[v * Z + (i + d) % Z].append(cid)
        self.var_block = [vn // Z for vn in range(self.n_var_nodes)]

    def var_degree(self, var_node: int) -> int:
        return len(self.var_adj[var_node])

    def simple_cycles(self, max_len: int):
        """All vertex-simple cycles up to max_len, as edge-copy tuples.

        DFS from each check node (ascending), restricted to vertices not
        less than the start, deduplicated by frozen edge-copy set.
        """
        seen: set[frozenset] = set()
        cycles: list[tuple[int, ...]] = []

        def dfs(start_check, node, at_var, prev_copy, path, visited_c, visited_v):
            adj = self.var_adj[node] if at_var else self.check_adj[node]
            for cid in adj:
                if cid == prev_copy:
                    continue
                nxt = self.copy_check[cid] if at_var else self.copy_var[cid]
                if at_var:
                    if nxt == start_check and len(path) >= 3:
                        key = frozenset(path + [cid])
                        if len(key) == len(path) + 1 and key not in seen:
                            seen.add(key)
                            cycles.append(tuple(path + [cid]))
                        continue
                    if nxt <= start_check or nxt in visited_c:
                        continue
                else:
                    if nxt in visited_v:
                        continue
                if len(path) + 1 >= max_len:
                    continue
                (visited_c if at_var else visited_v).add(nxt)
                path.append(cid)
                dfs(start_check, nxt, not at_var, cid, path, visited_c,
                    visited_v)
                path.pop()
                (visited_c if at_var else visited_v).remove(nxt)

        for start in range(self.n_check_nodes):
            for cid in self.check_adj[start]:
                v = self.copy_var[cid]
                dfs(start, v, True, cid, [cid], {start}, {v})
        return cycles

    def cycle_ace(self, cycle: tuple[int, ...]) -> int:
        ace = 0
        for i in range(0, len(cycle), 2):
            ace += self.var_degree(self.copy_var[cycle[i]]) - 2
        return ace

    def cycle_canceled(self, cycle: tuple[int, ...]) -> bool:
        """Cancellation read off the expanded graph itself.

        A cycle is canceled when it is minimal in the lifted graph (its
        vertex support induces exactly the cycle's own edge copies) and the
        submatrix of the expanded H on its support has full rank; chorded
        cycles are never canceled.
        """
        if self.code.labels is None:
            raise ValueError("unlabeled code")
        rows = sorted({self.copy_check[cid] for cid in cycle})
        cols = sorted({self.copy_var[cid] for cid in cycle})
        induced = [
            cid
            for cid in range(len(self.copy_base))
            if self.copy_check[cid] in set(rows) and self.copy_var[cid] in set(cols)
        ]
        if len(induced) != len(cycle):
            return False
        ri = {r: i for i, r in enumerate(rows)}
        cj = {c: j for j, c in enumerate(cols)}
        f = self.code.field
        sub = [[0] * len(cols) for _ in rows]
        for cid in induced:
            sub[ri[self.copy_check[cid]]][cj[self.copy_var[cid]]] ^= (
                self.copy_label[cid]
            )
        return dense_rank(sub, f) == len(rows)

    def spectrum(self, depth: int, skip_canceled: bool) -> dict[int, float]:
        spec = {i: float("inf") for i in range(2, depth + 1, 2)}
        for cyc in self.simple_cycles(depth):
            if skip_canceled and self.cycle_canceled(cyc):
                continue
            L = len(cyc)
            spec[L] = min(spec[L], self.cycle_ace(cyc))
        return spec


def map_decode(H_dense, field: Field, priors: np.ndarray) -> np.ndarray:
    """Exhaustive MAP block decoding over every vector with zero syndrome."""
    n = H_dense.shape[1]
    best, best_p = None, -1.0
    for word in itertools.product(range(field.q), repeat=n):
        syndrome_ok = True
        for row in H_dense:
            s = 0
            for h, x in zip(row, word):
                if h and x:
                    s ^= field.mul(int(h), int(x))
            if s:
                syndrome_ok = False
                break
        if not syndrome_ok:
            continue
        p = 1.0
        for i, x in enumerate(word):
            p *= priors[i, x]
        if p > best_p:
            best_p, best = p, word
    return np.array(best, dtype=np.int64)


def traverse_lifted_cycle_set(code: QcCode, base_edges: list[int]):
    """Explicit traversal of the lifted copies of one simple base cycle.

    Follows the circulant index maps copy by copy and returns the list of
    distinct lifted cycles as (length, ace) pairs.
    """
    proto, Z = code.proto, code.Z
    # orient the base cycle: edge list alternates check->var, var->check
    cycles = []
    visited_states = set()
    for z0 in range(Z):
        if (0, z0) in visited_states:
            continue
        # walk until back at (position 0, copy z0)
        pos, copy = 0, z0
        length = 0
        ace = 0
        states = []
        while True:
            e = base_edges[pos]
            states.append((pos, copy))
            if pos % 2 == 0:
                # check side -> var side through edge e
                copy = (copy + code.shifts[e]) % Z
                ace += proto.var_degree(proto.edge_var[e]) - 2
            else:
                copy = (copy - code.shifts[e]) % Z
            pos = (pos + 1) % len(base_edges)
            length += 1
            if pos == 0 and copy == z0:
                break
        for st in states:
            visited_states.add(st)
        cycles.append((length, ace))
    return cycles
