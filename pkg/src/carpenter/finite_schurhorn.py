"""Finite-dimensional diagonal realization inside majorization blocks.

Given current diagonal values that majorize a target (as multisets), a
short sequence of two-index transfers reaches the target positionally;
each transfer becomes one two-by-two rotation of the corresponding
vectors.  Blocks are independent: a partition of the window realizes its
targets block by block, leaving everything else untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .moves import FrameVector, MoveLog, PairMove, apply_pair_move, pair_value, solve_two_by_two
from .operators import DiagonalOracle, EntryOracle, compressed_entry
from .sequences import BlockPartition, SequenceLike, check_finite_majorization, values_of


@dataclass(frozen=True)
class Transfer:
    """Move ``amount`` of diagonal mass between two 1-based positions."""

    source: int
    dest: int
    amount: float

    def to_json_dict(self) -> dict:
        return {"from": self.source, "to": self.dest, "amount": self.amount}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Transfer":
        return cls(int(data["from"]), int(data["to"]), float(data["amount"]))


@dataclass(frozen=True)
class TransferPlan:
    transfers: tuple[Transfer, ...]
    start: tuple[float, ...]
    target: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.transfers)

    def apply(self, values: Sequence[float] | None = None) -> list[float]:
        out = list(self.start if values is None else values)
        for t in self.transfers:
            out[t.source - 1] -= t.amount
            out[t.dest - 1] += t.amount
        return out

    def to_json_dict(self) -> dict:
        return {
            "transfers": [t.to_json_dict() for t in self.transfers],
            "start": list(self.start),
            "target": list(self.target),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TransferPlan":
        return cls(
            tuple(Transfer.from_json_dict(t) for t in data.get("transfers", [])),
            tuple(float(x) for x in data.get("start", [])),
            tuple(float(x) for x in data.get("target", [])),
        )


def robin_hood_plan(
    dtilde: SequenceLike,
    d: SequenceLike,
    *,
    tol: float | None = None,
) -> TransferPlan:
    """Transfer plan from diagonal dtilde to a majorized positional target d.

    Phase one drives the sorted value profile to the sorted target profile:
    with both profiles nonincreasing, pairing the first surplus rank with
    the first deficit rank keeps every transfer inside the pair's current
    range, preserves the rank order and the majorization, and zeroes one
    rank gap per step, so at most n - 1 transfers are spent.  Phase two
    routes each value to the position that wants it along permutation
    cycles; a swap of two positions is a single boundary transfer, so at
    most n - 1 more.  Every transfer is realizable by one rotation.
    """
    cur = list(values_of(dtilde))
    tgt = list(values_of(d))
    if len(cur) != len(tgt):
        raise ValidationError(f"length mismatch: {len(cur)} vs {len(tgt)}")
    scale = max([1.0] + [abs(x) for x in cur + tgt])
    if tol is None:
        tol = 1e-12 * scale
    verdict = check_finite_majorization(cur, tgt, tol=tol)
    if not verdict.ok:
        raise ValidationError(f"target is not majorized by start: {verdict.detail}")
    n = len(cur)
    transfers: list[Transfer] = []
    sigma = sorted(range(n), key=lambda i: (-cur[i], i))
    tau = sorted(range(n), key=lambda i: (-tgt[i], i))
    y = [cur[i] for i in sigma]
    x = [tgt[i] for i in tau]
    for _ in range(max(n - 1, 0)):
        j = next((r for r in range(n) if y[r] > x[r] + tol), None)
        k = next((r for r in range(n) if y[r] < x[r] - tol), None)
        if j is None or k is None:
            break
        amount = min(y[j] - x[j], x[k] - y[k])
        transfers.append(Transfer(sigma[j] + 1, sigma[k] + 1, amount))
        y[j] -= amount
        y[k] += amount
    held = {sigma[r]: y[r] for r in range(n)}
    dest = {sigma[r]: tau[r] for r in range(n)}
    seen: set[int] = set()
    for start in range(n):
        if start in seen or dest[start] == start:
            seen.add(start)
            continue
        cycle = [start]
        p = dest[start]
        while p != start:
            cycle.append(p)
            p = dest[p]
        seen.update(cycle)
        home = cycle[0]
        for other in cycle[1:]:
            a, b = held[home], held[other]
            if abs(a - b) > tol:
                src, dst = (home, other) if a > b else (other, home)
                transfers.append(Transfer(src + 1, dst + 1, abs(a - b)))
            held[home], held[other] = b, a
    deviation = max((abs(held[i] - tgt[i]) for i in range(n)), default=0.0)
    if deviation > 10.0 * tol:
        raise ValidationError(f"plan did not converge: residual gap {deviation!r}")
    return TransferPlan(tuple(transfers), tuple(values_of(dtilde)), tuple(values_of(d)))


@dataclass(frozen=True)
class BlockCompression:
    """The operator compressed to one block of current vectors."""

    indices: tuple[int, ...]
    entries: np.ndarray

    def __post_init__(self):
        a = self.entries
        if a.ndim != 2 or a.shape != (len(self.indices), len(self.indices)):
            raise ValidationError("compression shape does not match indices")
        scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
        if float(np.max(np.abs(a - a.T))) > 1e-9 * scale:
            raise ValidationError("compression is not symmetric")

    def diagonal(self) -> list[float]:
        return [float(x) for x in np.diag(self.entries)]


def block_compression(
    oracle: EntryOracle,
    indices: Sequence[int],
    vectors: Sequence[FrameVector],
) -> BlockCompression:
    if len(indices) != len(vectors):
        raise ValidationError("one index label per vector required")
    n = len(vectors)
    a = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            a[i, j] = a[j, i] = compressed_entry(oracle, vectors[i], vectors[j])
    return BlockCompression(tuple(int(i) for i in indices), a)


def realize_block(
    oracle: EntryOracle,
    block: BlockCompression,
    vectors: Sequence[FrameVector],
    d: SequenceLike,
    *,
    chain_id: str | None = None,
) -> tuple[list[FrameVector], MoveLog]:
    """Rotate a block of orthonormal vectors until their values match d.

    Positions are matched: the vector at block position i ends with value
    d_i.  The off-diagonal entry feeding each rotation is recomputed from
    the evolving vectors through the oracle.
    """
    targets = list(values_of(d))
    if len(targets) != len(vectors):
        raise ValidationError("one target per block vector required")
    if chain_id is None:
        lo, hi = (block.indices[0], block.indices[-1]) if block.indices else (0, 0)
        chain_id = f"b{lo}-{hi}"
    cur = block.diagonal()
    scale = max([1.0] + [abs(x) for x in cur + targets])
    plan = robin_hood_plan(cur, targets, tol=1e-12 * scale)
    out = [v.copy() for v in vectors]
    log = MoveLog(chain_id=chain_id)
    for step, t in enumerate(plan.transfers, start=1):
        p, q = t.source - 1, t.dest - 1
        u, v = out[p], out[q]
        dt1, dt2 = cur[p], cur[q]
        d1 = dt1 - t.amount
        beta = compressed_entry(oracle, u, v)
        alpha, sign = solve_two_by_two(dt1, dt2, beta, d1)
        e, etilde = apply_pair_move(u, v, alpha, sign)
        achieved = pair_value(dt1, dt2, beta, sign, alpha)
        e.id, etilde.id = u.id, v.id
        out[p], out[q] = e, etilde
        cur[p] = achieved
        cur[q] = dt1 + dt2 - achieved
        log.moves.append(PairMove(step, u.id, v.id, alpha, sign, beta, d1, achieved))
    deviation = max((abs(a - b) for a, b in zip(cur, targets)), default=0.0)
    if deviation > 1e-10 * scale:
        raise ValidationError(f"block realization drifted: residual gap {deviation!r}")
    return out, log


def block_apply(
    oracle: EntryOracle,
    partition: BlockPartition,
    vectors: Mapping[int, FrameVector],
    per_block_targets: Sequence[Sequence[float]],
) -> tuple[dict[int, FrameVector], dict[str, MoveLog]]:
    """Realize targets on every closed block of a partition.

    ``vectors`` maps window slots to current unit vectors; only slots inside
    closed blocks are touched.  Returns the updated slots and one move log
    per block.
    """
    closed = partition.closed()
    if len(per_block_targets) != len(closed):
        raise ValidationError(
            f"expected targets for {len(closed)} closed blocks, got {len(per_block_targets)}"
        )
    updates: dict[int, FrameVector] = {}
    logs: dict[str, MoveLog] = {}
    for (lo, hi), targets in zip(closed, per_block_targets):
        slots = list(range(lo, hi + 1))
        if len(targets) != len(slots):
            raise ValidationError(f"block ({lo},{hi}) expects {len(slots)} targets")
        try:
            vecs = [vectors[s] for s in slots]
        except KeyError as exc:
            raise ValidationError(f"no vector available at slot {exc}") from exc
        comp = block_compression(oracle, slots, vecs)
        realized, log = realize_block(oracle, comp, vecs, targets)
        for s, v in zip(slots, realized):
            updates[s] = v
        logs[log.chain_id] = log
    return updates, logs


def eigen_to_diagonal(
    lam: SequenceLike,
    d: SequenceLike,
) -> tuple[list[FrameVector], MoveLog]:
    """Finite case: realize diagonal d in the eigenbasis of diag(lam)."""
    lv, dv = values_of(lam), values_of(d)
    if len(lv) != len(dv):
        raise ValidationError(f"length mismatch: {len(lv)} vs {len(dv)}")
    oracle = DiagonalOracle(lv)
    vectors = [FrameVector.basis(i, id=f"e{i}") for i in range(1, len(lv) + 1)]
    comp = block_compression(oracle, range(1, len(lv) + 1), vectors)
    return realize_block(oracle, comp, vectors, dv, chain_id="finite")
