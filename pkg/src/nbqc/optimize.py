"""ACE-constrained shift and label assignment by iterative edge sweeps.

Both stages share one skeleton: collect the problematic base walks (those a
bad assignment could turn into short low-ACE lifted cycles), start from a
seeded random assignment, then repeatedly scan the edges and give each edge
the candidate value that minimizes the number of still-violating walks.
The shift stage works on cyclic shifts in [0, Z-1]; the label stage works
on exponents in [0, q-2] with the full-rank cancellation condition deciding
violations.  Restarts redraw the initial assignment (and the edge order,
under the shuffled policy).

Success is never taken from internal bookkeeping alone: a reported success
re-verifies the achieved spectrum through the lifting module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .gf import Field
from .lift import (
    AceConstraint,
    QcCode,
    binary_ace_spectrum,
    lift_cycle,
    lift_is_minimal,
    nb_ace_spectrum,
)
from .protograph import CycleRecord, Protograph, enumerate_closed_walks


@dataclass
class OptimizerConfig:
    rng_seed: int
    max_sweeps: int = 50
    max_restarts: int = 20
    edge_order_policy: str = "shuffled"

    def __post_init__(self):
        if self.max_sweeps < 1 or self.max_restarts < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.edge_order_policy not in ("fixed", "shuffled"):
            raise ValueError("edge_order_policy must be 'fixed' or 'shuffled'")


@dataclass
class ProblemSet:
    """Problematic walks plus the edge -> walk membership index."""

    cycles: list[CycleRecord]
    index: dict[int, list[int]]

    @classmethod
    def from_cycles(cls, cycles: list[CycleRecord]) -> "ProblemSet":
        index: dict[int, list[int]] = {}
        for i, rec in enumerate(cycles):
            for e in sorted(set(rec.edge_seq)):
                index.setdefault(e, []).append(i)
        return cls(cycles, index)


@dataclass
class OptimizeResult:
    success: bool
    assignment: dict[int, int]
    residual: int
    sweeps_used: int
    restarts_used: int
    worst_cycle: dict | None

    def to_json_dict(self) -> dict:
        return {
            "success": self.success,
            "residual": self.residual,
            "sweeps_used": self.sweeps_used,
            "restarts_used": self.restarts_used,
            "worst_cycle": self.worst_cycle,
        }


def find_problematic_binary(
    proto: Protograph,
    Z: int,
    constraint: AceConstraint,
    walks: list[CycleRecord] | None = None,
) -> ProblemSet:
    """Base walks that some shift assignment could turn into violations.

    A walk of length l is problematic when a divisor O of Z (every divisor
    is a reachable cycle order) gives a lifted length l*O within the
    constraint depth with lifted ACE below the constraint there.  All other
    walks satisfy the constraint under every assignment.
    """
    if walks is None:
        walks = enumerate_closed_walks(proto, constraint.depth)
    divisors = [o for o in range(1, Z + 1) if Z % o == 0]
    problematic = []
    for rec in walks:
        for o in divisors:
            ll = rec.length * o
            if ll > constraint.depth:
                continue
            if rec.ace * o < constraint.values[ll]:
                problematic.append(rec)
                break
    return ProblemSet.from_cycles(problematic)


def _walk_signs(rec: CycleRecord) -> tuple[np.ndarray, np.ndarray]:
    edges = np.array(rec.edge_seq, dtype=np.int64)
    signs = np.array([1 if p % 2 == 0 else -1 for p in range(rec.length)],
                     dtype=np.int64)
    return edges, signs


def _node_groups(rec: CycleRecord) -> list[list[int]]:
    """Edge-sequence positions grouped by repeated base node."""
    groups: dict[tuple[int, int], list[int]] = {}
    for p in range(rec.length):
        node = rec.check_seq[p // 2] if p % 2 == 0 else rec.var_seq[p // 2]
        groups.setdefault((p % 2, node), []).append(p)
    return [ps for ps in groups.values() if len(ps) >= 2]


def _pair_functionals(rec: CycleRecord) -> list[dict[int, int]]:
    """Edge coefficient maps of the partial-sum difference of each node pair."""
    edges, signs = _walk_signs(rec)
    funcs = []
    for group in _node_groups(rec):
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                p1, p2 = group[a], group[b]
                coef: dict[int, int] = {}
                for p in range(p1, p2):
                    e = int(edges[p])
                    coef[e] = coef.get(e, 0) + int(signs[p])
                funcs.append({e: c for e, c in coef.items() if c})
    return funcs


class _ShiftTracker:
    """Incremental violation counting for the shift stage."""

    def __init__(self, cycles: list[CycleRecord], Z: int,
                 constraint: AceConstraint):
        self.Z = Z
        self.n = len(cycles)
        self.cycles = cycles
        gcd_by_d = np.array([math.gcd(Z, d) for d in range(Z)], dtype=np.int64)
        order_by_d = Z // gcd_by_d
        self.gcd_by_d = gcd_by_d

        # violation-by-total-shift lookup (length/ACE part only)
        depth = constraint.depth
        thr = np.full(depth // 2 + 1, -1.0)
        for ll in constraint.lengths():
            thr[ll // 2] = constraint.values[ll]
        self.viol_by_d = np.zeros((self.n, Z), dtype=bool)
        self.coef: list[dict[int, int]] = []
        self.pairs: list[list[dict[int, int]]] = []
        for i, rec in enumerate(cycles):
            ll = rec.length * order_by_d
            ok = ll <= depth
            t = np.where(ok, thr[np.minimum(ll, depth) // 2], -1.0)
            self.viol_by_d[i] = ok & (rec.ace * order_by_d < t)
            edges, signs = _walk_signs(rec)
            cmap: dict[int, int] = {}
            for e, s in zip(edges.tolist(), signs.tolist()):
                cmap[e] = cmap.get(e, 0) + s
            self.coef.append({e: c for e, c in cmap.items() if c})
            self.pairs.append(_pair_functionals(rec))

        # per-edge incidence split into a fast path (no node collisions to
        # track) and a slow path
        self.simple_ids: dict[int, np.ndarray] = {}
        self.simple_coefs: dict[int, np.ndarray] = {}
        self.slow_ids: dict[int, list[int]] = {}
        touched: dict[int, set[int]] = {}
        for i, rec in enumerate(cycles):
            dep = set(self.coef[i])
            for f in self.pairs[i]:
                dep |= set(f)
            for e in dep:
                touched.setdefault(e, set()).add(i)
        for e, ids in touched.items():
            fast, slow = [], []
            for i in sorted(ids):
                (slow if self.pairs[i] else fast).append(i)
            if fast:
                self.simple_ids[e] = np.array(fast, dtype=np.int64)
                self.simple_coefs[e] = np.array(
                    [self.coef[i].get(e, 0) for i in fast], dtype=np.int64
                )
            if slow:
                self.slow_ids[e] = slow

        self.d_cur = np.zeros(self.n, dtype=np.int64)
        self.pair_vals: list[list[int]] = [[] for _ in range(self.n)]
        self.violated = np.zeros(self.n, dtype=bool)
        self.total = 0
        self._shifts: np.ndarray | None = None

    def reset(self, shifts: np.ndarray) -> None:
        self._shifts = shifts
        for i, rec in enumerate(self.cycles):
            edges, signs = _walk_signs(rec)
            self.d_cur[i] = int(np.dot(signs, shifts[edges])) % self.Z
            self.pair_vals[i] = [
                sum(c * int(shifts[e]) for e, c in f.items())
                for f in self.pairs[i]
            ]
            self.violated[i] = self._violates(i, self.d_cur[i], self.pair_vals[i])
        self.total = int(self.violated.sum())

    def _violates(self, i: int, d: int, pvals: list[int]) -> bool:
        if not self.viol_by_d[i, d]:
            return False
        g = int(self.gcd_by_d[d])
        return all(pv % g != 0 for pv in pvals)

    def eval_edge(self, e: int) -> tuple[int, np.ndarray] | None:
        """Violation count among affected cycles, per candidate shift."""
        fast = self.simple_ids.get(e)
        slow = self.slow_ids.get(e)
        if fast is None and slow is None:
            return None
        x = int(self._shifts[e])
        counts = np.zeros(self.Z, dtype=np.int64)
        for y in range(self.Z):
            delta = y - x
            cnt = 0
            if fast is not None:
                d_new = (self.d_cur[fast] + self.simple_coefs[e] * delta) % self.Z
                cnt += int(self.viol_by_d[fast, d_new].sum())
            if slow is not None:
                for i in slow:
                    d_new = (self.d_cur[i] + self.coef[i].get(e, 0) * delta) % self.Z
                    pv = [
                        v + f.get(e, 0) * delta
                        for v, f in zip(self.pair_vals[i], self.pairs[i])
                    ]
                    cnt += self._violates(i, int(d_new), pv)
            counts[y] = cnt
        return x, counts

    def apply(self, e: int, y: int) -> None:
        x = int(self._shifts[e])
        if y == x:
            return
        delta = y - x
        self._shifts[e] = y
        fast = self.simple_ids.get(e)
        if fast is not None:
            d_new = (self.d_cur[fast] + self.simple_coefs[e] * delta) % self.Z
            self.d_cur[fast] = d_new
            new_viol = self.viol_by_d[fast, d_new]
            self.total += int(new_viol.sum()) - int(self.violated[fast].sum())
            self.violated[fast] = new_viol
        for i in self.slow_ids.get(e, ()):
            self.d_cur[i] = (self.d_cur[i] + self.coef[i].get(e, 0) * delta) % self.Z
            self.pair_vals[i] = [
                v + f.get(e, 0) * delta
                for v, f in zip(self.pair_vals[i], self.pairs[i])
            ]
            new_v = self._violates(i, int(self.d_cur[i]), self.pair_vals[i])
            self.total += int(new_v) - int(self.violated[i])
            self.violated[i] = new_v

    def worst_violated(self) -> dict | None:
        if self.total == 0:
            return None
        best = None
        for i in np.flatnonzero(self.violated):
            rec = self.cycles[int(i)]
            key = (rec.length, rec.ace, rec.edge_seq)
            if best is None or key < best[0]:
                best = (key, int(self.d_cur[int(i)]))
        (length, ace, _), d = best
        return {"length": length, "ace": ace, "total_shift": d}


def _sweep(tracker, order: np.ndarray, values: np.ndarray,
           max_sweeps: int, history: list | None) -> int:
    """Edge sweeps until clean, converged, or the sweep cap; returns sweeps."""
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        changed = False
        for e in order:
            e = int(e)
            ev = tracker.eval_edge(e)
            if ev is not None:
                x, counts = ev
                best_y = int(np.argmin(counts))  # argmin takes the smallest tie
                if best_y != x:
                    tracker.apply(e, best_y)
                    values[e] = best_y
                    changed = True
            if history is not None:
                history.append(tracker.total)
        if tracker.total == 0 or not changed:
            break
    return sweeps


def assign_shifts(
    proto: Protograph,
    Z: int,
    constraint: AceConstraint,
    cfg: OptimizerConfig,
    walks: list[CycleRecord] | None = None,
    history: list | None = None,
) -> OptimizeResult:
    """Search shift assignments whose lifted binary spectrum meets the constraint."""
    if walks is None:
        walks = enumerate_closed_walks(proto, constraint.depth)
    problem = find_problematic_binary(proto, Z, constraint, walks)
    tracker = _ShiftTracker(problem.cycles, Z, constraint)
    rng = np.random.default_rng(cfg.rng_seed)
    n_edges = proto.n_edges

    best: tuple[int, np.ndarray, dict | None] | None = None
    sweeps_total = 0
    for restart in range(1, cfg.max_restarts + 1):
        shifts = rng.integers(0, Z, size=n_edges, dtype=np.int64)
        order = (
            rng.permutation(n_edges)
            if cfg.edge_order_policy == "shuffled"
            else np.arange(n_edges)
        )
        tracker.reset(shifts)
        if tracker.total > 0:
            sweeps_total += _sweep(tracker, order, shifts,
                                   cfg.max_sweeps, history)
        if tracker.total == 0:
            result = OptimizeResult(
                success=True,
                assignment={e: int(shifts[e]) for e in range(n_edges)},
                residual=0,
                sweeps_used=sweeps_total,
                restarts_used=restart,
                worst_cycle=None,
            )
            _verify_binary(proto, Z, result.assignment, constraint, walks)
            return result
        if best is None or tracker.total < best[0]:
            best = (tracker.total, shifts.copy(), tracker.worst_violated())
    residual, shifts, worst = best
    return OptimizeResult(
        success=False,
        assignment={e: int(shifts[e]) for e in range(n_edges)},
        residual=residual,
        sweeps_used=sweeps_total,
        restarts_used=cfg.max_restarts,
        worst_cycle=worst,
    )


def _verify_binary(proto, Z, shifts, constraint, walks) -> None:
    code = QcCode(proto, Z, Field(1), shifts)
    achieved = binary_ace_spectrum(code, constraint.depth, walks=walks)
    if not achieved.achieves(constraint):
        raise RuntimeError(
            "internal bookkeeping error: reported success but spectrum "
            f"{achieved.format()} misses the constraint {constraint.format()}"
        )


class _LabelTracker:
    """Incremental violation counting for the label stage.

    Violation of a problematic cycle means its lift stays uncanceled: the
    alternating exponent sum is 0 modulo (q-1)/gcd(q-1, O).  Cycles whose
    lifts have chorded supports (or a modulus of 1, as over GF(2)) can
    never be canceled and count as permanent violations.
    """

    def __init__(self, items: list[tuple[CycleRecord, int, int, bool]], q: int):
        # items: (record, order, total_shift, lift_minimal) per cycle
        self.q = q
        self.items = items
        self.n = len(items)
        self.mod = np.ones(self.n, dtype=np.int64)
        self.coef: list[dict[int, int]] = []
        self.permanent = np.zeros(self.n, dtype=bool)
        for i, (rec, order, _d, minimal) in enumerate(items):
            m = (q - 1) // math.gcd(q - 1, order) if q > 2 else 1
            cancelable = minimal and m > 1
            self.mod[i] = m if cancelable else 1
            self.permanent[i] = not cancelable
            edges, signs = _walk_signs(rec)
            cmap: dict[int, int] = {}
            for e, s in zip(edges.tolist(), signs.tolist()):
                cmap[e] = cmap.get(e, 0) + s
            self.coef.append({e: c for e, c in cmap.items() if c})

        self.by_edge: dict[int, np.ndarray] = {}
        self.by_edge_coefs: dict[int, np.ndarray] = {}
        touched: dict[int, list[int]] = {}
        for i in range(self.n):
            if self.permanent[i]:
                continue
            for e, c in self.coef[i].items():
                touched.setdefault(e, []).append(i)
        for e, ids in touched.items():
            self.by_edge[e] = np.array(ids, dtype=np.int64)
            self.by_edge_coefs[e] = np.array(
                [self.coef[i][e] for i in ids], dtype=np.int64
            )

        self.n_permanent = int(self.permanent.sum())
        self.s_cur = np.zeros(self.n, dtype=np.int64)
        self.violated = np.zeros(self.n, dtype=bool)
        self.total = 0
        self._labels: np.ndarray | None = None

    def reset(self, labels: np.ndarray) -> None:
        self._labels = labels
        for i, (rec, _o, _d, _minimal) in enumerate(self.items):
            edges, signs = _walk_signs(rec)
            self.s_cur[i] = int(np.dot(signs, labels[edges])) % self.mod[i]
        self.violated = self.permanent | (self.s_cur % self.mod == 0)
        self.total = int(self.violated.sum())

    def eval_edge(self, e: int):
        ids = self.by_edge.get(e)
        if ids is None:
            return None
        x = int(self._labels[e])
        coefs = self.by_edge_coefs[e]
        n_cand = self.q - 1
        counts = np.zeros(n_cand, dtype=np.int64)
        for y in range(n_cand):
            s_new = (self.s_cur[ids] + coefs * (y - x)) % self.mod[ids]
            counts[y] = int((s_new == 0).sum())
        return x, counts

    def apply(self, e: int, y: int) -> None:
        x = int(self._labels[e])
        if y == x:
            return
        self._labels[e] = y
        ids = self.by_edge[e]
        s_new = (self.s_cur[ids] + self.by_edge_coefs[e] * (y - x)) % self.mod[ids]
        self.s_cur[ids] = s_new
        new_viol = s_new == 0
        self.total += int(new_viol.sum()) - int(self.violated[ids].sum())
        self.violated[ids] = new_viol

    def worst_violated(self) -> dict | None:
        if self.total == 0:
            return None
        best = None
        for i in np.flatnonzero(self.violated):
            rec, _o, d, _minimal = self.items[int(i)]
            key = (rec.length, rec.ace, rec.edge_seq)
            if best is None or key < best[0]:
                best = (key, d)
        (length, ace, _), d = best
        return {"length": length, "ace": ace, "total_shift": d}


def assign_labels(
    code: QcCode,
    constraint_nb: AceConstraint,
    cfg: OptimizerConfig,
    walks: list[CycleRecord] | None = None,
    history: list | None = None,
) -> OptimizeResult:
    """Search label exponents whose NB spectrum meets the constraint.

    Shifts are frozen; the problematic set is fixed by the lift and only
    cancellation statuses move.  If any problematic cycle is outside the
    cancellation hypothesis (chorded lift support) the search cannot
    succeed and a single best-effort restart produces the failure report.
    """
    proto = code.proto
    q = code.field.q
    if walks is None:
        walks = enumerate_closed_walks(proto, constraint_nb.depth)
    items = []
    for rec in walks:
        lc = lift_cycle(rec, code)
        if not lc.realized or lc.lifted_len > constraint_nb.depth:
            continue
        if lc.lifted_ace < constraint_nb.values[lc.lifted_len]:
            items.append((rec, lc.order, lc.total_shift,
                          lift_is_minimal(rec, code)))
    tracker = _LabelTracker(items, q)
    rng = np.random.default_rng(cfg.rng_seed)
    n_edges = proto.n_edges
    restart_cap = 1 if tracker.n_permanent > 0 else cfg.max_restarts

    best: tuple[int, np.ndarray, dict | None] | None = None
    sweeps_total = 0
    for restart in range(1, restart_cap + 1):
        labels = rng.integers(0, q - 1, size=n_edges, dtype=np.int64)
        order = (
            rng.permutation(n_edges)
            if cfg.edge_order_policy == "shuffled"
            else np.arange(n_edges)
        )
        tracker.reset(labels)
        if tracker.total > 0 and tracker.n_permanent < tracker.n:
            sweeps_total += _sweep(tracker, order, labels,
                                   cfg.max_sweeps, history)
        if tracker.total == 0:
            result = OptimizeResult(
                success=True,
                assignment={e: int(labels[e]) for e in range(n_edges)},
                residual=0,
                sweeps_used=sweeps_total,
                restarts_used=restart,
                worst_cycle=None,
            )
            achieved = nb_ace_spectrum(
                code.with_labels(result.assignment), constraint_nb.depth,
                walks=walks,
            )
            if not achieved.achieves(constraint_nb):
                raise RuntimeError(
                    "internal bookkeeping error: reported success but NB "
                    f"spectrum {achieved.format()} misses "
                    f"{constraint_nb.format()}"
                )
            return result
        if best is None or tracker.total < best[0]:
            best = (tracker.total, labels.copy(), tracker.worst_violated())
    residual, labels, worst = best
    return OptimizeResult(
        success=False,
        assignment={e: int(labels[e]) for e in range(n_edges)},
        residual=residual,
        sweeps_used=sweeps_total,
        restarts_used=restart_cap,
        worst_cycle=worst,
    )


@dataclass
class SearchCandidate:
    binary: AceConstraint
    nb: AceConstraint
    code: QcCode


@dataclass
class SearchResult:
    best: SearchCandidate
    candidates: list[SearchCandidate]


def _smallest_finite(spec: AceConstraint) -> int | None:
    for i in spec.lengths():
        if spec.values[i] != math.inf:
            return i
    return None


def _bump(spec: AceConstraint, length: int) -> AceConstraint:
    vals = dict(spec.values)
    vals[length] = vals[length] + 1
    return AceConstraint(spec.depth, vals)


def _raise_to(nb: AceConstraint, b: AceConstraint) -> AceConstraint:
    vals = dict(nb.values)
    for i in b.lengths():
        if i in vals:
            vals[i] = max(vals[i], b.values[i])
    return AceConstraint(nb.depth, vals)


def spectrum_search(
    proto: Protograph,
    Z: int,
    field: Field,
    cfg: OptimizerConfig,
    max_depth: int,
    lambda_mult: int | None = None,
    max_rounds: int = 200,
) -> SearchResult:
    """Greedy search for good achievable constraint pairs.

    Starts from the spectra of an unconstrained (random) construction, then
    repeatedly tries to raise the smallest finite component of the NB or
    binary constraint by one, or to extend the depth by two, keeping each
    amendment that still constructs.  Every adopted candidate is recorded
    and the Pareto-incomparable set is returned alongside the final one.
    """
    if max_depth < 2 or max_depth % 2:
        raise ValueError("max_depth must be even and >= 2")
    walks = enumerate_closed_walks(proto, max_depth)
    depth = min(4, max_depth)

    attempt_idx = 0

    def attempt(tb: AceConstraint, tnb: AceConstraint) -> SearchCandidate | None:
        nonlocal attempt_idx
        attempt_idx += 1
        sub = replace(cfg, rng_seed=(cfg.rng_seed * 1_000_003 + attempt_idx)
                      % (1 << 63))
        wb = [w for w in walks if w.length <= tb.depth]
        wnb = [w for w in walks if w.length <= tnb.depth]
        rs = assign_shifts(proto, Z, tb, sub, walks=wb)
        if not rs.success:
            return None
        code = QcCode(proto, Z, field, rs.assignment, None, lambda_mult)
        rl = assign_labels(code, tnb, sub, walks=wnb)
        if not rl.success:
            return None
        code = code.with_labels(rl.assignment)
        achieved_b = binary_ace_spectrum(code, tb.depth, walks=wb)
        achieved_nb = nb_ace_spectrum(code, tnb.depth, walks=wnb)
        return SearchCandidate(achieved_b, achieved_nb, code)

    current = attempt(AceConstraint.all_zero(depth), AceConstraint.all_zero(depth))
    if current is None:
        raise RuntimeError("unconstrained construction cannot fail")
    candidates = [current]

    for _ in range(max_rounds):
        adopted = None
        target = _smallest_finite(current.nb)
        if target is not None:
            adopted = attempt(current.binary, _bump(current.nb, target))
        if adopted is None:
            target = _smallest_finite(current.binary)
            if target is not None:
                tb = _bump(current.binary, target)
                adopted = attempt(tb, _raise_to(current.nb, tb))
        if adopted is None and current.binary.depth + 2 <= max_depth:
            new_depth = current.binary.depth + 2
            wd = [w for w in walks if w.length <= new_depth]
            adopted = SearchCandidate(
                binary_ace_spectrum(current.code, new_depth, walks=wd),
                nb_ace_spectrum(current.code, new_depth, walks=wd),
                current.code,
            )
        if adopted is None:
            break
        current = adopted
        candidates.append(adopted)

    def strictly_dominates(a: SearchCandidate, b: SearchCandidate) -> bool:
        if not (a.binary.dominates(b.binary) and a.nb.dominates(b.nb)):
            return False
        return not (b.binary.dominates(a.binary) and b.nb.dominates(a.nb))

    pareto: list[SearchCandidate] = []
    for cand in candidates:
        if any(strictly_dominates(other, cand) for other in candidates):
            continue
        if any(p.binary == cand.binary and p.nb == cand.nb for p in pareto):
            continue
        pareto.append(cand)
    return SearchResult(best=current, candidates=pareto)
