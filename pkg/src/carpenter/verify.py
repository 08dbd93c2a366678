"""Independent verification of construction results.

Every verdict quantity is recomputed from vector coefficients and oracle
entries.  Logged targets, achieved values and residual masses are treated
as claims to cross-check, never as evidence.  The replay pass rebuilds
the whole family from the move logs alone and flags any divergence from
the shipped coefficients, so a corrupted coefficient or rotation weight
cannot hide behind its own bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .carpenter import (
    ConstructionResult,
    Operation,
    expand_through,
    replay_target_assignment,
    replay_transforms,
)
from .errors import ValidationError
from .moves import FrameVector, MoveLog, apply_pair_move, pair_value
from .operators import EntryOracle, compressed_entry

GRAM_TOL = 1e-9
DIAG_TOL = 1e-9
LEDGER_TOL = 1e-8  # times the consumed-mass scale
REPLAY_TOL = 1e-9
MOVE_TOL = 1e-9  # times the per-move value scale


@dataclass(frozen=True)
class PerVectorCheck:
    """One constructed vector's re-measured diagonal entry."""

    vector_id: str
    slot: int
    target: float
    achieved: float
    dev: float

    def to_json_dict(self) -> dict:
        return {
            "vector_id": self.vector_id,
            "slot": self.slot,
            "target": self.target,
            "achieved": self.achieved,
            "dev": self.dev,
        }


@dataclass(frozen=True)
class DefectRow:
    """Unrealized mass of one frame vector against the constructed family.

    ``closed_form`` carries the rotation-weight product prediction when the
    result is a single chain, and None otherwise.
    """

    frame_index: int
    defect: float
    closed_form: float | None

    def to_json_dict(self) -> dict:
        return {
            "frame_index": self.frame_index,
            "defect": self.defect,
            "closed_form": self.closed_form,
        }


@dataclass(frozen=True)
class ReplayOutcome:
    """What rebuilding the family from the move logs produced."""

    by_slot: dict[int, FrameVector]
    coeff_max_dev: float
    move_max_dev: float
    problems: tuple[str, ...]


@dataclass(frozen=True)
class VerificationReport:
    """All verification measurements plus the verdict.

    ``passed`` requires the Gram, diagonal and ledger deviations to sit
    under their tolerances, the replayed coefficients and per-move values
    to agree with the shipped ones, and an empty problem list.
    """

    route: str
    window: int
    gram_max_dev: float
    diag_max_dev: float
    per_vector: tuple[PerVectorCheck, ...]
    defect_table: tuple[DefectRow, ...]
    ledger_dev: float
    replay_max_dev: float
    move_max_dev: float
    problems: tuple[str, ...]
    tolerances: dict
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "route": self.route,
            "window": self.window,
            "gram_max_dev": self.gram_max_dev,
            "diag_max_dev": self.diag_max_dev,
            "per_vector": [row.to_json_dict() for row in self.per_vector],
            "defect_table": [row.to_json_dict() for row in self.defect_table],
            "ledger_dev": self.ledger_dev,
            "replay_max_dev": self.replay_max_dev,
            "move_max_dev": self.move_max_dev,
            "problems": list(self.problems),
            "tolerances": dict(self.tolerances),
            "pass": self.passed,
        }


def gram_check(vectors: Iterable[FrameVector]) -> float:
    """Max deviation of the family's Gram matrix from the identity."""
    vecs = list(vectors)
    if not vecs:
        return 0.0
    support = sorted({i for v in vecs for i in v.support})
    pos = {idx: k for k, idx in enumerate(support)}
    matrix = np.zeros((len(vecs), len(support)))
    for row, vec in enumerate(vecs):
        for idx, coeff in vec.coeffs.items():
            matrix[row, pos[idx]] = coeff
    gram = matrix @ matrix.T
    return float(np.max(np.abs(gram - np.eye(len(vecs)))))


def diagonal_check(
    oracle: EntryOracle,
    result: ConstructionResult,
    targets: Sequence[float] | None = None,
) -> tuple[PerVectorCheck, ...]:
    """Re-measure every constructed vector's diagonal entry.

    The achieved column is computed from coefficients and oracle entries
    only; the result's own achieved table is ignored here.
    """
    want = tuple(targets) if targets is not None else result.targets
    rows: list[PerVectorCheck] = []
    for slot in sorted(result.constructed):
        vec = result.constructed[slot]
        measured = compressed_entry(oracle, vec, vec)
        target = want[slot - 1]
        rows.append(
            PerVectorCheck(vec.id, slot, target, measured, abs(measured - target))
        )
    return tuple(rows)


def ledger_check(result: ConstructionResult, oracle: EntryOracle | None = None) -> float:
    """Mass balance: constructed plus residual minus consumed, re-measured.

    Every consumed slot's original mass is read from the oracle when one
    is supplied, else from the result's eigenvalue prefix.
    """
    touched = set(result.constructed) | {res.slot for res in result.residuals}
    if oracle is None:
        consumed = math.fsum(result.lam[s - 1] for s in touched)
        lhs = math.fsum(
            compressed_entry_diag(result.lam, vec)
            for vec in result.constructed.values()
        ) + math.fsum(
            compressed_entry_diag(result.lam, res.vector) for res in result.residuals
        )
    else:
        consumed = math.fsum(oracle.entry(s, s) for s in touched)
        lhs = math.fsum(
            compressed_entry(oracle, vec, vec) for vec in result.constructed.values()
        ) + math.fsum(
            compressed_entry(oracle, res.vector, res.vector)
            for res in result.residuals
        )
    return abs(lhs - consumed)


def compressed_entry_diag(lam: Sequence[float], vec: FrameVector) -> float:
    """Quadratic form of a diagonal sequence at one vector."""
    return math.fsum(c * c * lam[i - 1] for i, c in sorted(vec.coeffs.items()))


def mass_scale(result: ConstructionResult) -> float:
    """Size of the consumed mass, for relative ledger tolerances."""
    touched = set(result.constructed) | {res.slot for res in result.residuals}
    return max(1.0, math.fsum(abs(result.lam[s - 1]) for s in touched))


def completeness_defect(
    result: ConstructionResult, limit: int | None = None
) -> tuple[DefectRow, ...]:
    """Unrealized mass of each frame vector in the constructed family.

    Reports 1 minus the captured mass for every frame index up to the
    limit (default: the whole window).  Untouched indices show defect 1;
    that is information, not failure.  For single-chain results the
    rotation-weight product prediction is attached for comparison.
    """
    top = result.window if limit is None else min(int(limit), result.window)
    parts: dict[int, list[float]] = {}
    for vec in result.constructed.values():
        for idx, coeff in vec.coeffs.items():
            if idx <= top:
                parts.setdefault(idx, []).append(coeff * coeff)
    closed = _single_chain_closed_form(result)
    rows = []
    for j in range(1, top + 1):
        defect = 1.0 - math.fsum(parts.get(j, ()))
        rows.append(DefectRow(j, defect, closed.get(j)))
    return tuple(rows)


def _single_chain_closed_form(result: ConstructionResult) -> dict[int, float]:
    """Predicted defects from the rotation weights of a lone chain.

    The vector feeding move k keeps weight alpha_k on entry and loses the
    factor (1 - alpha_m) at every later move m; the start vector only
    loses factors.  Products are accumulated right to left so each index
    costs one multiply.
    """
    if len(result.ops) != 1 or result.ops[0].kind != "chain":
        return {}
    op = result.ops[0]
    log = result.logs.get(op.chain_id)
    if log is None or len(log.moves) != len(op.slots) - 1:
        return {}
    alphas = log.alphas()
    n = len(alphas)
    suffix = [1.0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] * (1.0 - alphas[k])
    out: dict[int, float] = {op.slots[0]: suffix[0]}
    for p in range(2, n + 2):
        out[op.slots[p - 1]] = alphas[p - 2] * suffix[p - 1]
    return out


def _replay_chain(
    oracle: EntryOracle,
    snapshot: Mapping[int, FrameVector],
    op: Operation,
    log: MoveLog,
) -> tuple[list[FrameVector], FrameVector, float]:
    """Re-run one chain from its log, measuring each move against the oracle.

    The rotation runs in slot coordinates exactly as constructed, while
    the measured per-move value uses the flattened vectors and the true
    oracle, so planned stand-in values get re-checked here.  Returns the
    flattened vectors, the flattened pending remainder and the worst
    relative gap between the measured move value and the recorded target.
    """
    pending = FrameVector.basis(op.slots[0])
    move_dev = 0.0
    flat: list[FrameVector] = []
    for k, move in enumerate(log.moves, start=1):
        feed_slot = op.slots[k]
        u_flat = expand_through(pending, snapshot)
        v_flat = snapshot.get(feed_slot, FrameVector.basis(feed_slot))
        dt1 = compressed_entry(oracle, u_flat, u_flat)
        dt2 = compressed_entry(oracle, v_flat, v_flat)
        beta = compressed_entry(oracle, u_flat, v_flat)
        measured = pair_value(dt1, dt2, beta, move.sign, move.alpha)
        scale = max(1.0, abs(dt1), abs(dt2))
        move_dev = max(move_dev, abs(measured - op.targets[k - 1]) / scale)
        e, pending = apply_pair_move(pending, FrameVector.basis(feed_slot), move.alpha, move.sign)
        if move.renormalized:
            nrm = pending.norm()
            if nrm > 0.0:
                pending = pending.scaled(1.0 / nrm)
        e.id = f"{log.chain_id}.e{k}"
        pending.id = f"{log.chain_id}.r{k}"
        flat.append(expand_through(e, snapshot))
    return flat, expand_through(pending, snapshot), move_dev


def _replay_block(
    oracle: EntryOracle,
    current: Mapping[int, FrameVector],
    op: Operation,
    log: MoveLog,
    problems: list[str],
) -> tuple[dict[int, FrameVector], float]:
    """Re-run one block from its log; moves address vectors by id."""
    slot_of: dict[str, int] = {}
    vecs: dict[str, FrameVector] = {}
    for s in op.slots:
        vec = current[s]
        if vec.id in vecs:
            problems.append(f"block {op.chain_id}: duplicate vector id {vec.id!r}")
            return {}, 0.0
        vecs[vec.id] = vec
        slot_of[vec.id] = s
    move_dev = 0.0
    for move in log.moves:
        u = vecs.get(move.left_id)
        v = vecs.get(move.right_id)
        if u is None or v is None:
            problems.append(
                f"block {op.chain_id} step {move.step}: move references "
                f"unknown vector ids ({move.left_id!r}, {move.right_id!r})"
            )
            return {}, 0.0
        dt1 = compressed_entry(oracle, u, u)
        dt2 = compressed_entry(oracle, v, v)
        beta = compressed_entry(oracle, u, v)
        measured = pair_value(dt1, dt2, beta, move.sign, move.alpha)
        scale = max(1.0, abs(dt1), abs(dt2))
        move_dev = max(move_dev, abs(measured - move.target) / scale)
        e, etilde = apply_pair_move(u, v, move.alpha, move.sign)
        e.id, etilde.id = u.id, v.id
        vecs[move.left_id] = e
        vecs[move.right_id] = etilde
    return {slot_of[vid]: vec for vid, vec in vecs.items()}, move_dev


def replay_operations(oracle: EntryOracle, result: ConstructionResult) -> ReplayOutcome:
    """Rebuild the family from the move logs and compare coefficients.

    Operations replay in pipeline order; chains whose inputs are earlier
    outputs flatten through the replayed state, never the shipped one.
    Structural mismatches (missing logs, feed disagreements, move counts)
    are reported as problems rather than raising.
    """
    by_slot: dict[int, FrameVector] = {}
    problems: list[str] = []
    move_dev = 0.0
    for op in result.ops:
        log = result.logs.get(op.chain_id)
        if log is None:
            problems.append(f"operation {op.chain_id}: no move log shipped")
            continue
        try:
            if op.kind == "chain":
                if log.start_index is not None and log.start_index != op.slots[0]:
                    problems.append(
                        f"chain {op.chain_id}: log starts at {log.start_index}, "
                        f"operation at {op.slots[0]}"
                    )
                if tuple(log.feed) != op.slots[1:]:
                    problems.append(
                        f"chain {op.chain_id}: logged feed disagrees with the "
                        f"operation slots"
                    )
                    continue
                if len(log.moves) != len(op.slots) - 1:
                    problems.append(
                        f"chain {op.chain_id}: {len(log.moves)} moves for "
                        f"{len(op.slots)} slots"
                    )
                    continue
                snapshot = {s: by_slot.get(s, FrameVector.basis(s)) for s in op.slots}
                flat, pending, dev = _replay_chain(oracle, snapshot, op, log)
                move_dev = max(move_dev, dev)
                for slot, vec in zip(op.slots, flat):
                    by_slot[slot] = vec
                by_slot[op.slots[-1]] = pending
            else:
                current = {s: by_slot.get(s, FrameVector.basis(s)) for s in op.slots}
                updates, dev = _replay_block(oracle, current, op, log, problems)
                move_dev = max(move_dev, dev)
                by_slot.update(updates)
        except ValidationError as exc:
            problems.append(f"operation {op.chain_id}: replay failed: {exc}")
    shipped: dict[int, FrameVector] = dict(result.constructed)
    for res in result.residuals:
        shipped[res.slot] = res.vector
    coeff_dev = 0.0
    if set(shipped) != set(by_slot):
        missing = sorted(set(shipped) ^ set(by_slot))
        problems.append(f"replayed slots disagree with shipped slots: {missing[:6]}")
    for slot in sorted(set(shipped) & set(by_slot)):
        a, b = shipped[slot].coeffs, by_slot[slot].coeffs
        for idx in set(a) | set(b):
            coeff_dev = max(coeff_dev, abs(a.get(idx, 0.0) - b.get(idx, 0.0)))
    return ReplayOutcome(by_slot, coeff_dev, move_dev, tuple(problems))


def verify_construction(
    oracle: EntryOracle | None,
    result: ConstructionResult,
    *,
    tol_gram: float = GRAM_TOL,
    tol_diag: float = DIAG_TOL,
    tol_ledger: float | None = None,
    tol_replay: float = REPLAY_TOL,
    tol_move: float = MOVE_TOL,
    defect_limit: int | None = None,
) -> VerificationReport:
    """Full audit of a construction result against its oracle.

    With no oracle the eigenvalue prefix acts as a diagonal one.  The
    ledger tolerance defaults to LEDGER_TOL times the consumed mass.
    """
    if oracle is None:
        from .operators import DiagonalOracle

        oracle = DiagonalOracle(result.lam)
    if tol_ledger is None:
        tol_ledger = LEDGER_TOL * mass_scale(result)

    problems: list[str] = []
    per_vector = diagonal_check(oracle, result)
    diag_dev = max((row.dev for row in per_vector), default=0.0)
    gram_dev = gram_check(result.all_vectors().values())
    ledger_dev = ledger_check(result, oracle)
    replay = replay_operations(oracle, result)
    problems.extend(replay.problems)
    problems.extend(
        replay_transforms(result.lam, result.targets, result.transforms_applied)
    )
    problems.extend(
        replay_target_assignment(result.targets, result.ops, result.constructed)
    )
    for res in result.residuals:
        measured = compressed_entry(oracle, res.vector, res.vector)
        scale = max(1.0, abs(measured))
        if abs(measured - res.value) > 1e-8 * scale:
            problems.append(
                f"residual at slot {res.slot}: recorded mass {res.value!r} "
                f"is not the measured {measured!r}"
            )
    defect_table = completeness_defect(result, defect_limit)
    tolerances = {
        "gram": tol_gram,
        "diag": tol_diag,
        "ledger": tol_ledger,
        "replay": tol_replay,
        "move": tol_move,
    }
    passed = (
        gram_dev <= tol_gram
        and diag_dev <= tol_diag
        and ledger_dev <= tol_ledger
        and replay.coeff_max_dev <= tol_replay
        and replay.move_max_dev <= tol_move
        and not problems
    )
    return VerificationReport(
        route=result.route,
        window=result.window,
        gram_max_dev=gram_dev,
        diag_max_dev=diag_dev,
        per_vector=per_vector,
        defect_table=defect_table,
        ledger_dev=ledger_dev,
        replay_max_dev=replay.coeff_max_dev,
        move_max_dev=replay.move_max_dev,
        problems=tuple(problems),
        tolerances=tolerances,
        passed=passed,
    )
