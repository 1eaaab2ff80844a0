"""Quasi-cyclic lifting of a protograph over GF(2^r).

Each base edge carries a cyclic shift d in [0, Z-1] (its Z copies form a
circulant permutation block) and, once labeled, an exponent rho in
[0, q-2]; the expanded block is then the alpha-multiplied circulant whose
row i holds alpha^(rho + i*lambda).  A single global multiplier lambda with
(q-1) | lambda*Z is shared by all blocks.

A base closed walk of length l with total (alternating) shift d lifts to
gcd(Z, d) closed walks of length l * O, O = Z / gcd(Z, d).  For a simple
base cycle these are always vertex-simple cycles; for a walk that revisits
nodes they are cycles only when no two visits of the same node land on the
same copy, which this module tests exactly.  ACE spectra of the lifted
graph are computed from base walks through that projection.

Cancellation: the full-rank condition applies to every cycle of the lifted
graph that is simple and minimal there (no repeated vertices, no chords
through its support).  Around any such cycle the row-dependent lambda terms
cancel within each check copy, so the condition is always
O * (alternating sum of label exponents) != 0 mod (q-1); for cycles induced
by simple minimal protograph cycles this is the classical statement, and
lifts of simple minimal base cycles are chordless automatically.  Cycles
with chorded supports are conservatively never canceled.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from .codec import SparseGfMatrix
from .gf import Field, min_lambda
from .protograph import (
    CycleRecord,
    Protograph,
    enumerate_closed_walks,
    from_base_matrix,
)

INF = math.inf


class ShiftCollisionError(ValueError):
    """Two parallel edges with equal shift would overlap in the expansion."""


class UnsupportedStructureError(ValueError):
    """Algebraic cancellation requested for a walk outside its hypothesis."""


class AceSpectrum:
    """Minimum-ACE value per even cycle length, up to a depth.

    ``values[i]`` is the minimum ACE over cycles of length i (INF when no
    such cycle exists).  The same class serves as a constraint; a spectrum
    achieves a constraint when it is componentwise >= on every constraint
    index.
    """

    def __init__(self, depth: int, values=None):
        if depth < 2 or depth % 2 != 0:
            raise ValueError("depth must be an even integer >= 2")
        self.depth = depth
        self.values: dict[int, float] = {i: INF for i in range(2, depth + 1, 2)}
        if values is not None:
            for k, v in dict(values).items():
                if k not in self.values:
                    raise ValueError(f"invalid spectrum index {k}")
                self._check_value(v)
                self.values[k] = v

    @staticmethod
    def _check_value(v):
        if v == INF:
            return
        if not isinstance(v, (int, float)) or v != int(v) or v < 0:
            raise ValueError(f"spectrum values are nonnegative integers or inf: {v}")

    @classmethod
    def from_list(cls, vals) -> "AceSpectrum":
        vals = list(vals)
        if not vals:
            raise ValueError("empty spectrum")
        return cls(2 * len(vals), {2 * (i + 1): v for i, v in enumerate(vals)})

    @classmethod
    def parse(cls, text: str) -> "AceSpectrum":
        """Parse 'inf,inf,4' style text (optionally parenthesized)."""
        text = text.strip().strip("()")
        vals = []
        for tok in text.split(","):
            tok = tok.strip().lower()
            vals.append(INF if tok in ("inf", "infinity") else int(tok))
        return cls.from_list(vals)

    @classmethod
    def all_zero(cls, depth: int) -> "AceSpectrum":
        return cls(depth, {i: 0 for i in range(2, depth + 1, 2)})

    def __getitem__(self, length: int) -> float:
        return self.values[length]

    def min_update(self, length: int, ace: float) -> None:
        if self.values[length] > ace:
            self.values[length] = ace

    def lengths(self):
        return range(2, self.depth + 1, 2)

    def achieves(self, constraint: "AceSpectrum") -> bool:
        if self.depth < constraint.depth:
            raise ValueError(
                f"spectrum depth {self.depth} < constraint depth {constraint.depth}"
            )
        return all(self.values[i] >= constraint.values[i] for i in constraint.lengths())

    def dominates(self, other: "AceSpectrum") -> bool:
        """Componentwise >= on the other's indices with at least as much depth."""
        if self.depth < other.depth:
            return False
        return all(self.values[i] >= other.values[i] for i in other.lengths())

    def to_list(self) -> list:
        return [self.values[i] for i in self.lengths()]

    def to_json_list(self) -> list:
        return ["inf" if v == INF else int(v) for v in self.to_list()]

    @classmethod
    def from_json_list(cls, vals) -> "AceSpectrum":
        return cls.from_list([INF if v == "inf" else int(v) for v in vals])

    def format(self) -> str:
        return "(" + ",".join(
            "inf" if v == INF else str(int(v)) for v in self.to_list()
        ) + ")"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, AceSpectrum)
            and self.depth == other.depth
            and self.values == other.values
        )

    def __repr__(self) -> str:
        return f"AceSpectrum(depth={self.depth}, {self.format()})"


AceConstraint = AceSpectrum


class QcCode:
    """A complete QC code: protograph, lifting order, shifts, labels, field.

    ``labels`` may be None during the binary construction stage; everything
    except NB spectra and NB expansion works without them.
    """

    def __init__(
        self,
        proto: Protograph,
        Z: int,
        field: Field,
        shifts: dict[int, int],
        labels: dict[int, int] | None = None,
        lambda_mult: int | None = None,
    ):
        if Z < 1:
            raise ValueError("lifting order Z must be >= 1")
        for v in range(proto.n_vars):
            if proto.var_degree(v) < 2:
                raise ValueError(
                    f"variable {v} has degree {proto.var_degree(v)} < 2; "
                    "degree-1 variables cannot be lifted meaningfully"
                )
        if lambda_mult is None:
            lambda_mult = min_lambda(field.q, Z)
        if lambda_mult < 1 or (lambda_mult * Z) % (field.q - 1) != 0:
            raise ValueError(
                f"lambda={lambda_mult} violates (q-1) | lambda*Z "
                f"(q={field.q}, Z={Z})"
            )
        if sorted(shifts) != list(range(proto.n_edges)):
            raise ValueError("every edge needs exactly one shift")
        for e, d in shifts.items():
            if not 0 <= d < Z:
                raise ValueError(f"shift {d} of edge {e} outside [0, Z-1]")
        if labels is not None:
            if sorted(labels) != list(range(proto.n_edges)):
                raise ValueError("labels must cover every edge or be absent")
            for e, rho in labels.items():
                if not 0 <= rho <= field.q - 2:
                    raise ValueError(f"label exponent {rho} of edge {e} out of range")
        self.proto = proto
        self.Z = Z
        self.field = field
        self.shifts = dict(shifts)
        self.labels = dict(labels) if labels is not None else None
        self.lambda_mult = lambda_mult

    def with_labels(self, labels: dict[int, int]) -> "QcCode":
        return QcCode(self.proto, self.Z, self.field, self.shifts, labels,
                      self.lambda_mult)

    @property
    def n_symbols(self) -> int:
        return self.proto.n_vars * self.Z

    @property
    def n_checks_expanded(self) -> int:
        return self.proto.n_checks * self.Z

    def to_json_dict(self) -> dict:
        edges = []
        for e in range(self.proto.n_edges):
            entry = {
                "check": self.proto.edge_check[e],
                "var": self.proto.edge_var[e],
                "shift": self.shifts[e],
            }
            if self.labels is not None:
                entry["rho"] = self.labels[e]
            edges.append(entry)
        return {
            "field": {"r": self.field.r, "poly": self.field.primitive_poly},
            "Z": self.Z,
            "lambda": self.lambda_mult,
            "base_matrix": self.proto.base_matrix(),
            "edges": edges,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "QcCode":
        field = Field(d["field"]["r"], d["field"].get("poly"))
        proto = from_base_matrix(d["base_matrix"])
        edges = d["edges"]
        if len(edges) != proto.n_edges:
            raise ValueError("edge list length does not match base matrix")
        shifts = {}
        labels = {}
        has_labels = any("rho" in e for e in edges)
        for eid, entry in enumerate(edges):
            if (
                entry["check"] != proto.edge_check[eid]
                or entry["var"] != proto.edge_var[eid]
            ):
                raise ValueError(
                    f"edge {eid} endpoints do not match row-major base order"
                )
            shifts[eid] = entry["shift"]
            if has_labels:
                if "rho" not in entry:
                    raise ValueError("either all edges carry rho or none")
                labels[eid] = entry["rho"]
        return cls(proto, d["Z"], field, shifts, labels if has_labels else None,
                   d["lambda"])

    def digest(self) -> str:
        payload = json.dumps(self.to_json_dict(), sort_keys=True,
                             separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class LiftedCycleClass:
    """Lift-derived attributes of one base walk under fixed shifts.

    ``realized`` is True when the lift actually consists of vertex-simple
    cycles; only realized classes contribute to spectra.  ``canceled`` is
    None when the code has no labels, False for walks outside the
    simple-and-minimal hypothesis.
    """

    base: CycleRecord
    total_shift: int
    order: int
    count: int
    lifted_len: int
    lifted_ace: int
    realized: bool
    canceled: bool | None

    @property
    def lifted_length(self) -> int:
        return self.lifted_len


def _signed_partials(record: CycleRecord, shifts: dict[int, int]):
    """Per-visit partial shift sums and the signed total.

    Edge at position p is traversed check-to-variable for even p (sign +1)
    and variable-to-check for odd p (sign -1).  partials[p] is the
    accumulated sum when the p-th node of the traversal is visited.
    """
    partials = [0] * len(record.edge_seq)
    acc = 0
    for p, e in enumerate(record.edge_seq):
        partials[p] = acc
        acc += shifts[e] if p % 2 == 0 else -shifts[e]
    return partials, acc


def _is_realized(record: CycleRecord, partials, g: int) -> bool:
    """No two visits of one base node may share a copy modulo gcd(Z, d)."""
    groups: dict[tuple[int, int], list[int]] = {}
    for p in range(len(record.edge_seq)):
        node = record.check_seq[p // 2] if p % 2 == 0 else record.var_seq[p // 2]
        groups.setdefault((p % 2, node), []).append(p)
    for positions in groups.values():
        if len(positions) < 2:
            continue
        residues = {partials[p] % g for p in positions}
        if len(residues) < len(positions):
            return False
    return True


def _alternating_label_sum(record: CycleRecord, labels: dict[int, int]) -> int:
    s = 0
    for p, e in enumerate(record.edge_seq):
        s += labels[e] if p % 2 == 0 else -labels[e]
    return s


def _lift_chordless(record: CycleRecord, code: QcCode, partials, d: int,
                    g: int) -> bool:
    """Minimality of the realized lifted cycles in the lifted graph.

    Builds one lifted cycle's vertex support and counts the edge copies
    induced inside it.  Exactly two per check copy means the induced
    subgraph is the cycle itself: the check-side count already accounts for
    every induced copy, so the variable side needs no separate pass.
    """
    proto, Z = code.proto, code.Z
    order = Z // g
    check_copies: set[tuple[int, int]] = set()
    var_copies: set[tuple[int, int]] = set()
    for t in range(order):
        off = (t * d) % Z
        for p in range(record.length):
            copy = (off + partials[p]) % Z
            if p % 2 == 0:
                check_copies.add((record.check_seq[p // 2], copy))
            else:
                var_copies.add((record.var_seq[p // 2], copy))
    for c, i in check_copies:
        cnt = 0
        for e in proto.check_edges[c]:
            if (proto.edge_var[e], (i + code.shifts[e]) % Z) in var_copies:
                cnt += 1
                if cnt > 2:
                    return False
        if cnt != 2:
            return False
    return True


def lift_is_minimal(base: CycleRecord, code: QcCode) -> bool:
    """Whether the realized lifts of a base walk are chordless in the lift.

    Lifts of simple minimal base cycles always are; other walks need the
    explicit support check.  Only meaningful for realized lifts.
    """
    if base.is_simple_minimal:
        return True
    partials, signed_total = _signed_partials(base, code.shifts)
    d = signed_total % code.Z
    g = math.gcd(code.Z, d)
    return _lift_chordless(base, code, partials, d, g)


def lift_cycle(base: CycleRecord, code: QcCode) -> LiftedCycleClass:
    """Order, multiplicity, realizability and cancellation of a walk's lift."""
    Z = code.Z
    partials, signed_total = _signed_partials(base, code.shifts)
    d = signed_total % Z
    g = math.gcd(Z, d)
    order = Z // g
    realized = _is_realized(base, partials, g)
    canceled: bool | None = None
    if code.labels is not None:
        minimal = realized and (
            base.is_simple_minimal
            or _lift_chordless(base, code, partials, d, g)
        )
        if minimal:
            qm1 = code.field.q - 1
            s = _alternating_label_sum(base, code.labels)
            canceled = (order * s) % qm1 != 0
        else:
            canceled = False
    return LiftedCycleClass(
        base=base,
        total_shift=d,
        order=order,
        count=g,
        lifted_len=base.length * order,
        lifted_ace=base.ace * order,
        realized=realized,
        canceled=canceled,
    )


@dataclass(frozen=True)
class CanonicalCycleMatrix:
    """The banded cycle matrix of a simple minimal cycle, stored as labels.

    Row i of the l/2 x l/2 matrix holds beta_{2i} and beta_{2i+1} in
    columns i and i+1 (last row wraps: beta_{l-1} in column 0, beta_{l-2}
    in column l/2 - 1).
    """

    betas: tuple[int, ...]

    def __post_init__(self):
        if len(self.betas) < 4 or len(self.betas) % 2 != 0:
            raise ValueError("canonical cycle matrix needs an even length >= 4")
        if any(b == 0 for b in self.betas):
            raise ValueError("cycle labels must be nonzero")

    def to_sparse(self, field: Field) -> SparseGfMatrix:
        half = len(self.betas) // 2
        entries = []
        for i in range(half):
            entries.append((i, i, self.betas[2 * i]))
            entries.append((i, (i + 1) % half, self.betas[2 * i + 1]))
        return SparseGfMatrix.from_entries(half, half, entries, field)


def frc_canonical(betas, field: Field) -> bool:
    """Full-rank condition on a canonical cycle matrix.

    True (the cycle is canceled) exactly when the product of odd-position
    labels differs from the product of even-position labels.
    """
    betas = tuple(betas.betas if isinstance(betas, CanonicalCycleMatrix) else betas)
    if len(betas) < 4 or len(betas) % 2 != 0:
        raise ValueError("need an even number of labels, at least 4")
    if any(b == 0 for b in betas):
        raise ValueError("cycle labels must be nonzero")
    odd = 1
    even = 1
    for i, b in enumerate(betas):
        if i % 2:
            odd = field.mul(odd, b)
        else:
            even = field.mul(even, b)
    return odd != even


def frc_lifted(base: CycleRecord, code: QcCode) -> bool:
    """Cancellation of every lifted cycle induced by a simple minimal cycle.

    True exactly when O * (alternating sum of label exponents) is nonzero
    mod (q-1), i.e. the lifted cycle matrices have full rank.
    """
    if not base.is_simple_minimal:
        raise UnsupportedStructureError(
            "cancellation is defined only for simple minimal cycles; "
            f"walk of length {base.length} does not qualify"
        )
    if code.labels is None:
        raise ValueError("code has no label assignment")
    lc = lift_cycle(base, code)
    qm1 = code.field.q - 1
    s = _alternating_label_sum(base, code.labels)
    return (lc.order * s) % qm1 != 0


def _spectrum(code: QcCode, depth: int, walks, skip_canceled: bool) -> AceSpectrum:
    spectrum = AceSpectrum(depth)
    for rec in walks:
        lc = lift_cycle(rec, code)
        if not lc.realized or lc.lifted_len > depth:
            continue
        if skip_canceled and lc.canceled:
            continue
        spectrum.min_update(lc.lifted_len, lc.lifted_ace)
    return spectrum


def binary_ace_spectrum(
    code: QcCode, depth: int, walks=None, max_records: int | None = None
) -> AceSpectrum:
    """Minimum lifted-cycle ACE per even length, labels ignored."""
    if walks is None:
        kwargs = {} if max_records is None else {"max_records": max_records}
        walks = enumerate_closed_walks(code.proto, depth, **kwargs)
    return _spectrum(code, depth, walks, skip_canceled=False)


def nb_ace_spectrum(
    code: QcCode, depth: int, walks=None, max_records: int | None = None
) -> AceSpectrum:
    """Like the binary spectrum, but canceled cycles leave the minimum."""
    if code.labels is None:
        raise ValueError("NB spectrum requires a label assignment")
    if walks is None:
        kwargs = {} if max_records is None else {"max_records": max_records}
        walks = enumerate_closed_walks(code.proto, depth, **kwargs)
    return _spectrum(code, depth, walks, skip_canceled=True)


def _check_collisions(code: QcCode) -> None:
    by_cell: dict[tuple[int, int], dict[int, int]] = {}
    for e in range(code.proto.n_edges):
        cell = (code.proto.edge_check[e], code.proto.edge_var[e])
        seen = by_cell.setdefault(cell, {})
        d = code.shifts[e]
        if d in seen:
            raise ShiftCollisionError(
                f"edges {seen[d]} and {e} share cell {cell} with equal shift {d}"
            )
        seen[d] = e


def expand(code: QcCode) -> SparseGfMatrix:
    """Expanded mZ x nZ parity-check matrix over GF(q).

    Edge e becomes a Z x Z block: row i holds alpha^(rho_e + i*lambda) in
    column (i + d_e) mod Z of its cell.
    """
    if code.labels is None:
        raise ValueError("expansion over GF(q) requires labels; "
                         "use expand_binary for the mother matrix")
    _check_collisions(code)
    f, Z, lam = code.field, code.Z, code.lambda_mult
    qm1 = f.q - 1
    entries = []
    for e in range(code.proto.n_edges):
        c, v = code.proto.edge_check[e], code.proto.edge_var[e]
        d, rho = code.shifts[e], code.labels[e]
        for i in range(Z):
            entries.append(
                (c * Z + i, v * Z + (i + d) % Z, f.pow_alpha((rho + i * lam) % qm1))
            )
    return SparseGfMatrix.from_entries(
        code.proto.n_checks * Z, code.proto.n_vars * Z, entries, f
    )


def expand_binary(code: QcCode) -> SparseGfMatrix:
    """Binary mother matrix of the expansion (same support, all-ones)."""
    _check_collisions(code)
    Z = code.Z
    gf2 = Field(1)
    entries = []
    for e in range(code.proto.n_edges):
        c, v = code.proto.edge_check[e], code.proto.edge_var[e]
        d = code.shifts[e]
        for i in range(Z):
            entries.append((c * Z + i, v * Z + (i + d) % Z, 1))
    return SparseGfMatrix.from_entries(
        code.proto.n_checks * Z, code.proto.n_vars * Z, entries, gf2
    )
