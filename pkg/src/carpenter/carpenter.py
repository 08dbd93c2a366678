"""Truncated rotation-chain constructions for prescribed diagonals.

Given eigenvalues ``lam`` (nondecreasing on a window) and a requested
diagonal ``d``, the routines here build an orthonormal family of finitely
supported vectors whose Rayleigh quotients against the operator equal the
requested values.  Each tail regime gets its own pipeline:

* ``decay``: one rotation chain walking down a strictly decreasing surplus.
* ``conservation``: flatten a prefix, splice it against the tail, average
  the surplus between strict-decrease records, run one chain on the spliced
  sequence, then undo the averaging with finite blocks.
* ``pointwise``: greedy domination chains, each slot's running mass staying
  below its target until the next eigenvalue more than doubles it.
* ``eventually_above``: shift a prefix down to the conservation regime,
  then lift the shifted slots back up with chains over the constructed
  basis.
* ``dips``: bump the diagonal up to its certified running tail minima,
  chain the bumps into place, then resolve each inter-record block.
* ``zeros``: the surplus vanishes repeatedly, so closed blocks suffice.

Every pipeline records its moves, block plans, and sequence transforms so
that verification can replay the whole construction from logs alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CarpenterError, RegimeError, ValidationError, WindowError
from .finite_schurhorn import block_compression, realize_block
from .moves import FrameVector, MoveLog, chain_execute
from .operators import (
    CompressedBasisOracle,
    DiagonalOracle,
    EntryOracle,
    compressed_entry,
)
from .sequences import (
    BlockPartition,
    DeltaProfile,
    SequenceLike,
    SequenceSpec,
    TailRegime,
    alpha_floor_shift,
    averaged_interpolant,
    check_weak_majorization,
    decay_chain_data,
    delta_profile,
    flat_prefix_transform,
    floor_shift_bounds,
    running_sums,
    tail_minima_transform,
    validate_regime,
    values_of,
    zero_partition,
)

__all__ = [
    "ChainState",
    "ConstructionResult",
    "Operation",
    "Residual",
    "conservation_construct",
    "construct_dispatch",
    "decay_chain_construct",
    "dips_construct",
    "domination_construct",
    "eventually_above_construct",
    "expand_through",
    "plan_domination_chains",
    "plan_targeted_chains",
    "reduce_prefix",
    "replay_target_assignment",
    "replay_transforms",
]

# Orthonormality of the output family, checked against the identity Gram.
FRAME_TOL = 1e-10
# Full frame re-check cadence, counted in executed pair moves.
_SPOT_EVERY = 32
# Default cap on simultaneously open domination chains.
MAX_CHAINS = 16

_ROUTES = ("zeros", "decay", "conservation", "eventually_above", "dips", "pointwise")


@dataclass(frozen=True)
class Residual:
    """A chain's pending remainder, parked at the last slot it consumed."""

    chain_id: str
    slot: int
    value: float
    vector: FrameVector


@dataclass(frozen=True)
class Operation:
    """One executed chain or block, in pipeline order.

    For a chain, ``slots[0]`` is the start, ``slots[1:]`` the feeds, the
    k-th constructed vector lands at ``slots[k-1]``, and the pending
    remainder at ``slots[-1]``; ``targets`` aligns with ``slots[:-1]``.
    For a block, ``targets`` aligns with all of ``slots``.
    """

    kind: str
    chain_id: str
    stage: int
    slots: tuple[int, ...]
    targets: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("chain", "block"):
            raise ValidationError(f"unknown operation kind {self.kind!r}")
        want = len(self.slots) - 1 if self.kind == "chain" else len(self.slots)
        if len(self.targets) != want:
            raise ValidationError(
                f"operation {self.chain_id}: {len(self.targets)} targets "
                f"for {len(self.slots)} slots"
            )

    def realized_slots(self) -> tuple[int, ...]:
        if self.kind == "chain":
            return self.slots[:-1]
        return self.slots

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "chain_id": self.chain_id,
            "stage": self.stage,
            "slots": list(self.slots),
            "targets": list(self.targets),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Operation":
        return cls(
            kind=str(data["kind"]),
            chain_id=str(data["chain_id"]),
            stage=int(data["stage"]),
            slots=tuple(int(s) for s in data["slots"]),
            targets=tuple(float(t) for t in data["targets"]),
        )


@dataclass(frozen=True)
class ChainState:
    """Selection bookkeeping for one domination chain.

    ``x_values[k]`` is the running mass at ``selected_indices[k]``: the
    first entry is that slot's eigenvalue, and each join adds the new
    eigenvalue and retires the previous target.
    """

    chain_id: str
    selected_indices: tuple[int, ...]
    x_values: tuple[float, ...]
    pending: FrameVector

    def __post_init__(self) -> None:
        if len(self.selected_indices) != len(self.x_values):
            raise ValidationError(
                f"chain {self.chain_id}: {len(self.x_values)} masses for "
                f"{len(self.selected_indices)} indices"
            )


@dataclass(frozen=True)
class ConstructionResult:
    """Everything a finished pipeline produced.

    ``constructed`` maps slots to the vectors realizing ``targets`` there;
    ``achieved`` holds their measured Rayleigh quotients.  Residuals are
    the chains' pending remainders, disjoint from the constructed slots.
    ``untouched`` lists window slots still carrying their original basis
    vector.  ``transforms_applied`` and ``ops`` are replayable records.
    """

    route: str
    window: int
    lam: tuple[float, ...]
    targets: tuple[float, ...]
    constructed: dict[int, FrameVector]
    achieved: dict[int, float]
    residuals: tuple[Residual, ...]
    untouched: tuple[int, ...]
    logs: dict[str, MoveLog]
    transforms_applied: tuple[dict, ...]
    ops: tuple[Operation, ...]
    chain_states: dict[str, ChainState]
    params: dict
    notes: tuple[str, ...]

    def all_vectors(self) -> dict[str, FrameVector]:
        """Constructed vectors and residuals, keyed by vector id."""
        out: dict[str, FrameVector] = {}
        for slot in sorted(self.constructed):
            vec = self.constructed[slot]
            out[vec.id] = vec
        for res in self.residuals:
            out[res.vector.id] = res.vector
        return out


def expand_through(vector: FrameVector, by_slot: Mapping[int, FrameVector]) -> FrameVector:
    """Rewrite a slot-coordinate vector into frame coordinates.

    Slots absent from ``by_slot`` are taken to still hold their basis
    vector, so the coefficient passes through unchanged.
    """
    out: dict[int, float] = {}
    for slot in sorted(vector.coeffs):
        coeff = vector.coeffs[slot]
        base = by_slot.get(slot)
        if base is None:
            out[slot] = out.get(slot, 0.0) + coeff
            continue
        for idx in sorted(base.coeffs):
            out[idx] = out.get(idx, 0.0) + coeff * base.coeffs[idx]
    cleaned = {i: v for i, v in sorted(out.items()) if v != 0.0}
    return FrameVector(cleaned, id=vector.id)


class _NominalDiagonal(EntryOracle):
    """Planned diagonal values override measured ones at chosen indices.

    Later stages treat earlier stages' targets as exact, so rotation
    weights stay the planned ones; verification re-measures everything.
    """

    def __init__(self, base: EntryOracle, overrides: Mapping[int, float]):
        self.window = base.window
        self._base = base
        self._overrides = {int(k): float(v) for k, v in overrides.items()}

    def entry(self, i: int, j: int) -> float:
        self._check(i, j)
        if i == j and i in self._overrides:
            return self._overrides[i]
        return self._base.entry(i, j)


class _Build:
    """Mutable pipeline state: one orthonormal family under construction."""

    def __init__(self, oracle: EntryOracle, lam: tuple[float, ...],
                 d: tuple[float, ...], window: int, zero_tol: float | None):
        self.oracle = oracle
        self.lam = lam
        self.d = d
        self.window = window
        self.zero_tol = zero_tol
        self.by_slot: dict[int, FrameVector] = {}
        self.touched: set[int] = set()
        self.residuals: list[Residual] = []
        self.logs: dict[str, MoveLog] = {}
        self.ops: list[Operation] = []
        self.transforms: list[dict] = []
        self.chain_states: dict[str, ChainState] = {}
        self.params: dict = {}
        self.notes: list[str] = []
        self._chain_counter = 0
        self._moves_since_check = 0

    @classmethod
    def create(cls, oracle: EntryOracle | None, lam: SequenceLike,
               d: SequenceLike, window: int | None,
               zero_tol: float | None = None) -> "_Build":
        lv = values_of(lam)
        dv = values_of(d)
        if window is None:
            window = min(len(lv), len(dv))
        if window < 1:
            raise WindowError("window must be at least 1")
        if len(lv) < window or len(dv) < window:
            raise WindowError(
                f"window {window} exceeds the given prefixes "
                f"({len(lv)} eigenvalues, {len(dv)} targets)"
            )
        lt = tuple(lv[:window])
        dt = tuple(dv[:window])
        for i in range(1, window):
            if lt[i] < lt[i - 1]:
                raise ValidationError(
                    f"eigenvalues must be nondecreasing; index {i + 1} drops"
                )
        verdict = check_weak_majorization(lt, dt, window)
        if not verdict.ok:
            raise ValidationError(f"weak majorization fails: {verdict.detail}")
        if oracle is None:
            oracle = DiagonalOracle(lt)
        else:
            if oracle.window < window:
                raise WindowError(
                    f"oracle window {oracle.window} below requested {window}"
                )
            scale = max(1.0, max(abs(x) for x in lt))
            for i in range(1, window + 1):
                dev = abs(oracle.entry(i, i) - lt[i - 1])
                if dev > 1e-9 * scale:
                    raise ValidationError(
                        f"oracle diagonal disagrees with the eigenvalue "
                        f"sequence at index {i} (deviation {dev:.3e})"
                    )
        return cls(oracle, lt, dt, window, zero_tol)

    def vector_at(self, slot: int) -> FrameVector:
        vec = self.by_slot.get(slot)
        if vec is not None:
            return vec
        return FrameVector.basis(slot)

    def next_chain_id(self) -> str:
        self._chain_counter += 1
        return f"c{self._chain_counter}"

    def _residual_slots(self) -> set[int]:
        return {res.slot for res in self.residuals}

    def run_chain(self, slots: Sequence[int], targets: Sequence[float],
                  *, chain_id: str | None = None, stage: int = 1
                  ) -> tuple[list[FrameVector], FrameVector, MoveLog]:
        """Execute a rotation chain on untouched basis slots."""
        slots = tuple(int(s) for s in slots)
        targets = tuple(float(t) for t in targets)
        if len(targets) != len(slots) - 1:
            raise ValidationError(
                f"chain needs one target per consumed slot: "
                f"{len(targets)} targets, {len(slots)} slots"
            )
        for s in slots:
            if s in self.touched:
                raise ValidationError(f"slot {s} already consumed")
        cid = chain_id if chain_id is not None else self.next_chain_id()
        start = FrameVector.basis(slots[0])
        vectors, pending, log = chain_execute(
            self.oracle, start, slots[1:], targets, chain_id=cid
        )
        log.start_index = slots[0]
        self._place_chain(cid, stage, slots, targets, vectors, pending, log)
        return vectors, pending, log

    def run_compressed_chain(self, slots: Sequence[int],
                             targets: Sequence[float],
                             overrides: Mapping[int, float],
                             *, chain_id: str | None = None
                             ) -> tuple[list[FrameVector], FrameVector, MoveLog]:
        """Execute a chain whose start and feeds may be constructed vectors.

        The chain runs in slot coordinates against the compression of the
        oracle by the current family, with planned diagonal values standing
        in for measured ones, then the outputs are flattened back into
        frame coordinates.
        """
        slots = tuple(int(s) for s in slots)
        targets = tuple(float(t) for t in targets)
        if len(targets) != len(slots) - 1:
            raise ValidationError(
                f"chain needs one target per consumed slot: "
                f"{len(targets)} targets, {len(slots)} slots"
            )
        residual_slots = self._residual_slots()
        for s in slots:
            if s in residual_slots:
                raise ValidationError(
                    f"slot {s} holds a pending remainder; chains may not "
                    f"consume it"
                )
        if slots[-1] in self.touched:
            raise ValidationError(
                f"terminal slot {slots[-1]} must be untouched"
            )
        snapshot = {s: self.vector_at(s) for s in slots}
        compressed = CompressedBasisOracle(self.oracle, snapshot)
        oracle: EntryOracle = compressed
        if overrides:
            oracle = _NominalDiagonal(compressed, overrides)
        cid = chain_id if chain_id is not None else self.next_chain_id()
        start = FrameVector.basis(slots[0])
        cvecs, cpend, log = chain_execute(
            oracle, start, slots[1:], targets, chain_id=cid
        )
        log.start_index = slots[0]
        vectors = [expand_through(v, snapshot) for v in cvecs]
        pending = expand_through(cpend, snapshot)
        self._place_chain(cid, 2, slots, targets, vectors, pending, log)
        return vectors, pending, log

    def _place_chain(self, cid: str, stage: int, slots: tuple[int, ...],
                     targets: tuple[float, ...], vectors: list[FrameVector],
                     pending: FrameVector, log: MoveLog) -> None:
        if cid in self.logs:
            raise ValidationError(f"duplicate chain id {cid}")
        for slot, vec in zip(slots, vectors):
            self.by_slot[slot] = vec
        self.by_slot[slots[-1]] = pending
        self.touched.update(slots)
        value = compressed_entry(self.oracle, pending, pending)
        self.residuals.append(Residual(cid, slots[-1], value, pending))
        self.logs[cid] = log
        self.ops.append(Operation("chain", cid, stage, slots, targets))
        self._after_moves(len(log.moves))

    def run_block(self, slots: Sequence[int], targets: Sequence[float],
                  *, stage: int = 1) -> dict[int, FrameVector]:
        """Realize exact targets on a trace-balanced block of slots."""
        slots = tuple(int(s) for s in slots)
        targets = tuple(float(t) for t in targets)
        residual_slots = self._residual_slots()
        for s in slots:
            if s in residual_slots:
                raise ValidationError(
                    f"slot {s} holds a pending remainder; blocks may not "
                    f"consume it"
                )
        vectors = [self.vector_at(s) for s in slots]
        block = block_compression(self.oracle, slots, vectors)
        cid = f"b{slots[0]}-{slots[-1]}"
        if cid in self.logs:
            raise ValidationError(f"duplicate block id {cid}")
        realized, log = realize_block(
            self.oracle, block, vectors, targets, chain_id=cid
        )
        out: dict[int, FrameVector] = {}
        for slot, vec in zip(slots, realized):
            self.by_slot[slot] = vec
            out[slot] = vec
        self.touched.update(slots)
        self.logs[cid] = log
        self.ops.append(Operation("block", cid, stage, slots, targets))
        self._after_moves(len(log.moves))
        return out

    def _after_moves(self, count: int) -> None:
        self._moves_since_check += count
        if self._moves_since_check >= _SPOT_EVERY:
            self._moves_since_check = 0
            self.check_frame()

    def check_frame(self, tol: float = FRAME_TOL) -> float:
        """Assert the family plus untouched basis stays orthonormal.

        Support containment in the touched set is what makes the family
        orthonormal to every unused basis vector, so both are checked.
        """
        if not self.by_slot:
            return 0.0
        slots = sorted(self.by_slot)
        for slot in slots:
            extra = set(self.by_slot[slot].support) - self.touched
            if extra:
                raise ValidationError(
                    f"vector at slot {slot} leaks onto unused indices "
                    f"{sorted(extra)[:4]}"
                )
        matrix = np.zeros((len(slots), self.window))
        for row, slot in enumerate(slots):
            for idx, coeff in self.by_slot[slot].coeffs.items():
                if idx < 1 or idx > self.window:
                    raise ValidationError(
                        f"vector at slot {slot} has support {idx} outside "
                        f"the window"
                    )
                matrix[row, idx - 1] = coeff
        gram = matrix @ matrix.T
        dev = float(np.max(np.abs(gram - np.eye(len(slots)))))
        if dev > tol:
            raise ValidationError(
                f"frame invariant broken: Gram deviation {dev:.3e} "
                f"exceeds {tol:.1e}"
            )
        return dev

    def finalize(self, route: str) -> ConstructionResult:
        if route not in _ROUTES:
            raise ValidationError(f"unknown route {route!r}")
        self.check_frame()
        residual_slots = self._residual_slots()
        constructed: dict[int, FrameVector] = {}
        achieved: dict[int, float] = {}
        for slot in sorted(self.by_slot):
            if slot in residual_slots:
                continue
            vec = self.by_slot[slot]
            constructed[slot] = vec
            achieved[slot] = compressed_entry(self.oracle, vec, vec)
        consumed = sorted(self.touched)
        lhs = math.fsum(achieved.values()) + math.fsum(
            res.value for res in self.residuals
        )
        rhs = math.fsum(self.lam[s - 1] for s in consumed)
        scale = max(1.0, math.fsum(abs(self.lam[s - 1]) for s in consumed))
        if abs(lhs - rhs) > 1e-10 * scale:
            raise ValidationError(
                f"mass ledger broken: constructed plus residual mass "
                f"{lhs!r} vs consumed {rhs!r}"
            )
        untouched = tuple(
            s for s in range(1, self.window + 1) if s not in self.touched
        )
        return ConstructionResult(
            route=route,
            window=self.window,
            lam=self.lam,
            targets=self.d,
            constructed=constructed,
            achieved=achieved,
            residuals=tuple(self.residuals),
            untouched=untouched,
            logs=self.logs,
            transforms_applied=tuple(self.transforms),
            ops=tuple(self.ops),
            chain_states=self.chain_states,
            params=self.params,
            notes=tuple(self.notes),
        )


def _assert_join(chain: Sequence[int], x_prev: float, target: float,
                 x_next: float, value_next: float, tol: float) -> None:
    # (4in) x_k <= d_k < x_{k+1} <= lam_{k+1}, the window invariant that
    # keeps every join's rotation bracket alive.
    if x_prev > target + tol:
        raise ValidationError(
            f"chain {tuple(chain)}: running mass {x_prev!r} exceeds "
            f"target {target!r}"
        )
    if not x_next > target:
        raise ValidationError(
            f"chain {tuple(chain)}: next mass {x_next!r} fails to clear "
            f"target {target!r}"
        )
    if x_next > value_next + tol:
        raise ValidationError(
            f"chain {tuple(chain)}: next mass {x_next!r} exceeds its "
            f"eigenvalue {value_next!r}"
        )
    # (2in) the rotation weight stays above one half, so pending mass
    # never dominates a constructed vector.
    alpha = (value_next - target) / (value_next - x_prev)
    if not alpha > 0.5:
        raise ValidationError(
            f"chain {tuple(chain)}: rotation weight {alpha!r} not above "
            f"one half at join {chain[-1]}"
        )


def plan_domination_chains(lam: SequenceLike, d: SequenceLike,
                           *, window: int | None = None,
                           max_chains: int = MAX_CHAINS
                           ) -> tuple[list[tuple[int, ...]],
                                      list[tuple[float, ...]],
                                      tuple[int, ...]]:
    """Greedy full-cover chain plan for a pointwise dominated diagonal.

    Each chain starts at the least unused slot and repeatedly joins the
    least unused later slot whose eigenvalue more than doubles the current
    target, provided at least one unused slot is skipped in between; the
    skipped slot seeds a later chain.  Returns the chains, their running
    masses, and the leftover slots no chain consumed.
    """
    lv = values_of(lam)
    dv = values_of(d)
    if window is None:
        window = min(len(lv), len(dv))
    if window < 1 or len(lv) < window or len(dv) < window:
        raise WindowError(f"window {window} exceeds the given prefixes")
    if max_chains < 1:
        raise ValidationError("max_chains must be positive")
    scale = max(1.0, max(abs(x) for x in lv[:window]),
                max(abs(x) for x in dv[:window]))
    tol = 1e-12 * scale
    for i in range(window):
        if dv[i] < lv[i] - tol:
            raise ValidationError(
                f"pointwise domination fails at index {i + 1}: "
                f"target {dv[i]!r} below eigenvalue {lv[i]!r}"
            )
    unused = list(range(1, window + 1))
    chains: list[tuple[int, ...]] = []
    masses: list[tuple[float, ...]] = []
    leftovers: list[int] = []
    while unused and len(chains) < max_chains:
        start = unused.pop(0)
        chain = [start]
        x = [lv[start - 1]]
        if x[0] > dv[start - 1] + tol:
            raise ValidationError(
                f"slot {start}: eigenvalue {x[0]!r} exceeds target "
                f"{dv[start - 1]!r}"
            )
        while True:
            target = dv[chain[-1] - 1]
            nxt = None
            for pos, cand in enumerate(unused):
                if cand <= chain[-1]:
                    continue
                # pos > 0 means an unused slot sits strictly between the
                # current end and the candidate: the skip-one rule.
                if lv[cand - 1] > 2.0 * target and pos > 0:
                    nxt = pos
                    break
            if nxt is None:
                break
            cand = unused.pop(nxt)
            x_next = lv[cand - 1] + x[-1] - target
            chain.append(cand)
            _assert_join(chain, x[-1], target, x_next, lv[cand - 1], tol)
            x.append(x_next)
        if len(chain) == 1:
            leftovers.append(start)
        else:
            chains.append(tuple(chain))
            masses.append(tuple(x))
    leftovers.extend(unused)
    return chains, masses, tuple(sorted(leftovers))


def plan_targeted_chains(needed: Sequence[int], targets: Mapping[int, float],
                         values: Mapping[int, float],
                         available: Sequence[int], *, horizon: int,
                         tol: float | None = None
                         ) -> tuple[list[tuple[int, ...]],
                                    list[tuple[float, ...]],
                                    tuple[int, ...]]:
    """Chain plan touching only the slots that still need lifting.

    ``needed`` slots carry ``values`` below their ``targets``; chains join
    needed slots whose value more than doubles the previous target and
    which still have an eligible continuation, else they close on the
    least available slot beyond ``horizon``.  Slots with no eligible chain
    are returned as skipped rather than realized.
    """
    pending = sorted(int(s) for s in needed)
    avail = sorted(int(s) for s in available)
    if tol is None:
        pool = [abs(v) for v in values.values()] or [1.0]
        tol = 1e-12 * max(1.0, max(pool))
    chains: list[tuple[int, ...]] = []
    masses: list[tuple[float, ...]] = []
    skipped: list[int] = []

    def terminal_for(last: int, target: float) -> int | None:
        for cand in avail:
            if cand > max(last, horizon) and values[cand] > 2.0 * target:
                return cand
        return None

    def has_continuation(slot: int, target: float) -> bool:
        if terminal_for(slot, target) is not None:
            return True
        return any(
            other > slot and values[other] > 2.0 * target
            for other in pending
        )

    while pending:
        start = pending.pop(0)
        if values[start] > targets[start] + tol:
            raise ValidationError(
                f"slot {start}: current value {values[start]!r} exceeds "
                f"target {targets[start]!r}"
            )
        chain = [start]
        x = [values[start]]
        closed = False
        while not closed:
            last = chain[-1]
            target = targets[last]
            ext = None
            for pos, cand in enumerate(pending):
                if cand <= last:
                    continue
                if values[cand] > 2.0 * target and \
                        has_continuation(cand, targets[cand]):
                    ext = pos
                    break
            if ext is not None:
                cand = pending.pop(ext)
                x_next = values[cand] + x[-1] - target
                chain.append(cand)
                _assert_join(chain, x[-1], target, x_next, values[cand], tol)
                x.append(x_next)
                continue
            term = terminal_for(last, target)
            if term is None:
                if len(chain) > 1:
                    # every join checked its continuation, so a closed
                    # terminal can only vanish through a planner bug
                    raise ValidationError(
                        f"chain {tuple(chain)}: no terminal beyond "
                        f"{horizon} for target {target!r}"
                    )
                skipped.append(start)
                break
            x_next = values[term] + x[-1] - target
            chain.append(term)
            _assert_join(chain, x[-1], target, x_next, values[term], tol)
            x.append(x_next)
            avail.remove(term)
            chains.append(tuple(chain))
            masses.append(tuple(x))
            closed = True
    return chains, masses, tuple(skipped)


def reduce_prefix(lam: SequenceLike, d: SequenceLike,
                  profile: DeltaProfile | None = None, *,
                  window: int | None = None,
                  zero_tol: float | None = None
                  ) -> tuple[BlockPartition, int]:
    """Split off the closed blocks where the surplus returns to zero.

    Returns the partition of closed blocks together with the first index
    of the remaining suffix (one past the last zero, or 1 when the surplus
    never vanishes).  If the zeros are cofinal on the window the suffix is
    empty and the blocks alone settle every slot.
    """
    if profile is None:
        profile = delta_profile(lam, d, window, zero_tol=zero_tol)
    neg = min(profile.deltas)
    scale = max(1.0, max(abs(v) for v in profile.deltas))
    if neg < -1e-12 * scale:
        raise ValidationError(
            f"surplus goes negative ({neg!r}); weak majorization fails"
        )
    part = zero_partition(profile)
    closed = part.closed()
    suffix_start = closed[-1][1] + 1 if closed else 1
    # every surviving block ends at a certified zero, so the reduced
    # partition is covered on its own range [1, suffix_start - 1]
    return BlockPartition(tuple(closed), bool(closed)), suffix_start


def _chain_pendings(slots: tuple[int, ...], log: MoveLog) -> list[FrameVector]:
    """Replay a basis-start chain, returning the pending vector after
    every move."""
    pending = FrameVector.basis(slots[0])
    out: list[FrameVector] = []
    for move, feed_index in zip(log.moves, slots[1:]):
        feed = FrameVector.basis(feed_index)
        root = math.sqrt(max(move.alpha, 0.0))
        coroot = math.sqrt(max(1.0 - move.alpha, 0.0))
        new_pending = FrameVector.combine(
            coroot, pending, -move.sign * root, feed, id=pending.id
        )
        if move.renormalized:
            norm = new_pending.norm()
            if norm > 0.0:
                new_pending = new_pending.scaled(1.0 / norm)
        pending = new_pending
        out.append(pending)
    return out


def _assert_chain_pendings(build: _Build, slots: tuple[int, ...],
                           log: MoveLog, expected: Sequence[float],
                           alpha_floor: Sequence[float]) -> None:
    # Pending mass after move k must equal the predicted value, and each
    # rotation weight must clear its predicted floor.
    scale = max(1.0, max(abs(v) for v in expected))
    pendings = _chain_pendings(slots, log)
    for k, (move, pending) in enumerate(zip(log.moves, pendings), start=1):
        measured = compressed_entry(build.oracle, pending, pending)
        want = expected[k]
        if abs(measured - want) > 1e-10 * scale:
            raise ValidationError(
                f"chain {log.chain_id}: pending mass {measured!r} after "
                f"step {k} should be {want!r}"
            )
        if move.alpha < alpha_floor[k - 1] - 1e-10:
            raise ValidationError(
                f"chain {log.chain_id}: weight {move.alpha!r} at step {k} "
                f"fell below the decay bound {alpha_floor[k - 1]!r}"
            )


def _record_transform(build: _Build, name: str, offset: int, params: dict,
                      **after: Sequence[float]) -> None:
    record = {"name": name, "offset": offset, "params": dict(params)}
    for key, values in after.items():
        record[key] = [float(v) for v in values]
    build.transforms.append(record)


def _decay_run(build: _Build, lam_l: tuple[float, ...],
               d_l: tuple[float, ...], offset: int,
               steps: int | None) -> int:
    """One rotation chain down a strictly decreasing surplus."""
    w = len(lam_l)
    if steps is None:
        steps = w - 1
    if steps < 1:
        raise ValidationError("need at least one step")
    if steps > w - 1:
        raise WindowError(
            f"window {w} cannot feed {steps} steps; needs steps+1 slots"
        )
    lam_tilde, tails, alpha_tilde = decay_chain_data(lam_l, d_l, steps + 1)
    slots = tuple(range(offset + 1, offset + steps + 2))
    targets = tuple(d_l[:steps])
    cid = build.next_chain_id()
    _, _, log = build.run_chain(slots, targets, chain_id=cid)
    _assert_chain_pendings(build, slots, log, lam_tilde, alpha_tilde)
    build.params["decay"] = {
        "offset": offset,
        "steps": steps,
        "pending_values": [float(v) for v in lam_tilde],
        "tail_masses": [float(v) for v in tails],
        "alpha_floor": [float(v) for v in alpha_tilde],
    }
    return offset + steps


def _conservation_run(build: _Build, lam_l: tuple[float, ...],
                      d_l: tuple[float, ...], offset: int,
                      steps: int | None) -> int:
    """Flatten, splice, average between records, chain, then undo."""
    w = len(lam_l)
    if w < 3:
        raise WindowError("conservation needs at least three slots")
    increments = [d_l[i] - lam_l[i] for i in range(w)]
    deltas = running_sums(increments)
    if min(deltas) <= 0.0:
        k = deltas.index(min(deltas)) + 1
        raise ValidationError(
            f"surplus is not positive at index {offset + k}; close the "
            f"zero blocks first"
        )
    floor = None
    for m in range(2, w + 1):
        if lam_l[m - 1] > lam_l[0]:
            floor = m
            break
    if floor is None:
        raise RegimeError(
            "eigenvalues are constant on the window; a vanishing surplus "
            "needs a strictly larger eigenvalue to trade against"
        )
    gap = lam_l[floor - 1] - lam_l[0]
    prefix = None
    running_min = min(deltas[:floor])
    for n in range(floor + 1, w):
        if deltas[n - 1] <= running_min and deltas[n - 1] < gap:
            prefix = n
            break
        running_min = min(running_min, deltas[n - 1])
    if prefix is None:
        raise WindowError(
            "no admissible flattening prefix on the window; the surplus "
            "never dips below the first eigenvalue gap"
        )
    flat = flat_prefix_transform(lam_l, d_l, prefix)
    _record_transform(
        build, "flat_prefix", offset, {"prefix": prefix},
        after=flat.values[:prefix],
    )
    mu = (lam_l[0],) + tuple(lam_l[prefix:])
    spliced = (flat.values[0],) + tuple(d_l[prefix:])
    _record_transform(
        build, "splice_prefix", offset, {"prefix": prefix},
        after_lam=mu, after_targets=spliced,
    )
    sp_profile = delta_profile(mu, spliced, len(mu), zero_tol=build.zero_tol)
    records = sp_profile.decrease_records
    if len(records) < 1:
        raise WindowError("spliced surplus has no strict decrease records")
    need = max(1, (steps - prefix + 1) if steps is not None else 0)
    chosen = None
    if steps is None:
        for idx in range(len(records) - 1, -1, -1):
            if prefix + records[idx] <= w:
                chosen = idx
                break
    else:
        for idx, rec in enumerate(records):
            if rec >= need:
                chosen = idx
                break
        if chosen is not None and prefix + records[chosen] > w:
            chosen = None
    if chosen is None:
        raise WindowError(
            f"window {w} has no strict decrease record reaching "
            f"{need} spliced slots"
        )
    used = records[:chosen + 1]
    depth = used[-1]
    dhat = averaged_interpolant(mu, spliced, used)
    _record_transform(
        build, "averaged_interpolant", offset,
        {"records": [int(r) for r in used]},
        after=dhat.values,
    )
    # Chain hypotheses on the interpolated sequence, padded one step so
    # the final surplus is still a strict decrease.
    dh = list(dhat.values[:depth])
    sp_deltas = running_sums([dh[i] - mu[i] for i in range(depth)])
    pad = mu[depth] - 0.5 * sp_deltas[-1]
    lam_tilde, tails, alpha_tilde = decay_chain_data(
        mu[:depth + 1], tuple(dh) + (pad,), depth + 1
    )
    slots = (offset + 1,) + tuple(
        offset + prefix + k for k in range(1, depth + 1)
    )
    cid = build.next_chain_id()
    _, _, log = build.run_chain(slots, tuple(dh), chain_id=cid)
    _assert_chain_pendings(build, slots, log, lam_tilde, alpha_tilde)
    # Undo the flattening: the prefix block returns to the original
    # targets, which majorize the flattened ones by the prefix-minimality
    # of the surplus at the flattening index.
    undo_slots = tuple(range(offset + 1, offset + prefix + 1))
    build.run_block(undo_slots, d_l[:prefix])
    # Undo the averaging between consecutive records; the surplus agrees
    # with the original at every record, so each block balances.
    for a, b in zip(used, used[1:]):
        block_slots = tuple(
            offset + prefix + k - 1 for k in range(a + 1, b + 1)
        )
        block_targets = tuple(spliced[a:b])
        build.run_block(block_slots, block_targets)
    build.params["conservation"] = {
        "offset": offset,
        "floor_index": floor,
        "flatten_prefix": prefix,
        "records": [int(r) for r in used],
        "alpha_floor": [float(v) for v in alpha_tilde],
    }
    return offset + prefix + depth - 1


def _pointwise_run(build: _Build, lam_l: tuple[float, ...],
                   d_l: tuple[float, ...], offset: int,
                   max_chains: int) -> int:
    """Greedy domination chains covering as much of the window as the
    chain cap allows."""
    chains, masses, leftovers = plan_domination_chains(
        lam_l, d_l, window=len(lam_l), max_chains=max_chains
    )
    if not chains:
        raise WindowError(
            "window admits no domination chain; every candidate join "
            "fails the doubling rule"
        )
    for chain, x in zip(chains, masses):
        slots = tuple(s + offset for s in chain)
        targets = tuple(d_l[s - 1] for s in chain[:-1])
        cid = build.next_chain_id()
        _, pending, _ = build.run_chain(slots, targets, chain_id=cid)
        build.chain_states[cid] = ChainState(cid, slots, x, pending)
    if leftovers:
        build.notes.append(
            f"{len(leftovers)} slots left on their basis vectors "
            f"(first: {leftovers[0] + offset})"
        )
    build.params["pointwise"] = {
        "offset": offset,
        "chains": [list(c) for c in chains],
        "leftovers": [int(s) for s in leftovers],
        "max_chains": max_chains,
    }
    realized = [s for c in chains for s in c[:-1]]
    return offset + max(realized)


def _eventually_above_run(build: _Build, lam_l: tuple[float, ...],
                          d_l: tuple[float, ...], offset: int,
                          steps: int | None, alpha: float) -> int:
    """Shift a prefix down by its eventual excess, settle the shifted
    sequence, then lift the prefix back with compressed chains."""
    w = len(lam_l)
    if alpha <= 0.0:
        raise ValidationError("the eventual excess must be positive")
    m_floor, n_min = floor_shift_bounds(lam_l, d_l, alpha, w)
    count = n_min
    if count > w:
        raise WindowError(
            f"floor shift needs {count} slots but the window has {w}"
        )
    shifted = alpha_floor_shift(lam_l, d_l, alpha, count)
    _record_transform(
        build, "floor_shift", offset,
        {"alpha": float(alpha), "count": count},
        after=shifted.values[:count],
    )
    stage1_steps = max(steps, count) if steps is not None else None
    cover = _conservation_run(
        build, lam_l, tuple(shifted.values), offset, stage1_steps
    )
    cover_local = cover - offset
    if cover_local < count:
        raise WindowError(
            f"stage one realized {cover_local} slots but the shifted "
            f"prefix spans {count}"
        )
    needed = [
        i for i in range(1, count + 1)
        if shifted.values[i - 1] != d_l[i - 1]
    ]
    values: dict[int, float] = {i: shifted.values[i - 1] for i in needed}
    available: list[int] = []
    for s in range(1, w + 1):
        if (s + offset) not in build.touched:
            available.append(s)
            values[s] = lam_l[s - 1]
    chains, masses, skipped = plan_targeted_chains(
        needed, {i: d_l[i - 1] for i in needed}, values, available,
        horizon=cover_local,
    )
    for chain, x in zip(chains, masses):
        slots = tuple(s + offset for s in chain)
        targets = tuple(d_l[s - 1] for s in chain[:-1])
        overrides = {
            s + offset: shifted.values[s - 1] for s in chain[:-1]
        }
        cid = build.next_chain_id()
        _, pending, _ = build.run_compressed_chain(
            slots, targets, overrides, chain_id=cid
        )
        build.chain_states[cid] = ChainState(cid, slots, x, pending)
    if skipped:
        build.notes.append(
            f"{len(skipped)} shifted slots kept their stage-one values; "
            f"no eligible lift chain (first: {skipped[0] + offset})"
        )
    build.params["eventually_above"] = {
        "offset": offset,
        "alpha": float(alpha),
        "floor_index": m_floor,
        "shift_count": count,
        "skipped": [int(s) for s in skipped],
    }
    return cover


def _dips_run(build: _Build, lam_l: tuple[float, ...],
              d_l: tuple[float, ...], offset: int,
              steps: int | None, guard: int | None) -> int:
    """Bump the diagonal up to its certified tail minima, chain the bumps
    into place, then resolve each inter-record block."""
    w = len(lam_l)
    g = guard if guard is not None else w // 2
    if g < 0 or g >= w:
        raise ValidationError(f"guard {g} must lie in [0, {w})")
    profile = delta_profile(lam_l, d_l, w, zero_tol=build.zero_tol, guard=g)
    minima = profile.tail_minima
    if not minima:
        raise RegimeError(
            "no certifiable running minima on the window; shrink the "
            "guard or enlarge the window"
        )
    depth = minima[-1]
    steps_eff = steps if steps is not None else depth
    if steps_eff > depth:
        raise WindowError(
            f"certified minima reach slot {depth}; cannot promise "
            f"{steps_eff} slots"
        )
    bumped = tail_minima_transform(lam_l, d_l, minima)
    _record_transform(
        build, "tail_minima_bump", offset,
        {"records": [int(m) for m in minima]},
        after=bumped.values[:depth],
    )
    needed = [m for m in minima if bumped.values[m - 1] != lam_l[m - 1]]
    values: dict[int, float] = {m: lam_l[m - 1] for m in needed}
    available: list[int] = []
    needed_set = set(needed)
    for s in range(1, w + 1):
        if s in needed_set or (s + offset) in build.touched:
            continue
        available.append(s)
        values[s] = lam_l[s - 1]
    chains, masses, skipped = plan_targeted_chains(
        needed, {m: bumped.values[m - 1] for m in needed}, values,
        available, horizon=depth,
    )
    for chain, x in zip(chains, masses):
        slots = tuple(s + offset for s in chain)
        targets = tuple(bumped.values[s - 1] for s in chain[:-1])
        cid = build.next_chain_id()
        _, pending, _ = build.run_chain(slots, targets, chain_id=cid)
        build.chain_states[cid] = ChainState(cid, slots, x, pending)
    skipped_set = set(skipped)
    residual_slots = {res.slot - offset for res in build.residuals}
    bounds = (0,) + tuple(minima)
    realized_through = 0
    for a, b in zip(bounds, bounds[1:]):
        if b in skipped_set:
            build.notes.append(
                f"block {a + 1}..{b} skipped: record {b + offset} has no "
                f"eligible lift chain"
            )
            continue
        block_range = range(a + 1, b + 1)
        clash = [k for k in block_range if k in residual_slots]
        if clash:
            build.notes.append(
                f"block {a + 1}..{b} skipped: slot {clash[0] + offset} "
                f"holds a pending remainder"
            )
            continue
        slots = tuple(offset + k for k in block_range)
        build.run_block(slots, tuple(d_l[a:b]))
        realized_through = b
    build.params["dips"] = {
        "offset": offset,
        "guard": g,
        "records": [int(m) for m in minima],
        "skipped": [int(s) for s in skipped],
    }
    return offset + realized_through


def _zeros_run(build: _Build, lam_l: tuple[float, ...],
               d_l: tuple[float, ...], offset: int,
               steps: int | None) -> int:
    """Closed zero blocks settle everything; no chains needed."""
    profile = delta_profile(lam_l, d_l, len(lam_l), zero_tol=build.zero_tol)
    part, _ = reduce_prefix(lam_l, d_l, profile)
    closed = part.closed()
    if not closed:
        raise RegimeError("no closed zero blocks on the window")
    for lo, hi in closed:
        slots = tuple(offset + k for k in range(lo, hi + 1))
        build.run_block(slots, tuple(d_l[lo - 1:hi]))
    cover = offset + closed[-1][1]
    if steps is not None and cover - offset < steps:
        build.notes.append(
            f"zero blocks close at slot {cover}; {steps} requested"
        )
    build.params["zeros"] = {
        "offset": offset,
        "blocks": [[int(lo), int(hi)] for lo, hi in closed],
    }
    return cover


def _coerce_spec(seq: SequenceLike) -> SequenceSpec:
    if isinstance(seq, SequenceSpec):
        return seq
    return SequenceSpec(tuple(float(v) for v in values_of(seq)))


def _resolve_regime(d_spec: SequenceSpec, regime: str | TailRegime | None
                    ) -> TailRegime:
    if regime is None:
        return d_spec.regime
    if isinstance(regime, TailRegime):
        return regime
    try:
        return TailRegime(str(regime))
    except ValueError:
        names = ", ".join(r.value for r in TailRegime)
        raise RegimeError(f"unknown regime {regime!r}; expected one of {names}")


def _infer_route(profile: DeltaProfile, lam: tuple[float, ...],
                 d: tuple[float, ...], steps: int | None) -> str:
    window = profile.window
    threshold = steps if steps is not None else window
    if profile.zero_indices and profile.zero_indices[-1] >= threshold:
        return "zeros"
    deltas = profile.deltas
    if min(deltas) > profile.zero_tol and all(
        deltas[i] <= deltas[i - 1] for i in range(1, window)
    ):
        return "decay"
    scale = max(1.0, max(abs(v) for v in lam), max(abs(v) for v in d))
    if all(d[i] >= lam[i] - 1e-12 * scale for i in range(window)):
        return "pointwise"
    raise RegimeError(
        "explicit targets fit no implemented regime: the surplus neither "
        "closes at zero, decreases strictly, nor dominates pointwise"
    )


def decay_chain_construct(oracle: EntryOracle | None, lam: SequenceLike,
                          d: SequenceLike, steps: int | None = None, *,
                          window: int | None = None,
                          zero_tol: float | None = None
                          ) -> ConstructionResult:
    """Realize a strictly-decreasing-surplus diagonal with one chain."""
    build = _Build.create(oracle, lam, d, window, zero_tol)
    cover = _decay_run(build, build.lam, build.d, 0, steps)
    build.params["realized_through"] = cover
    return build.finalize("decay")


def conservation_construct(oracle: EntryOracle | None, lam: SequenceLike,
                           d: SequenceLike, window: int | None = None, *,
                           steps: int | None = None,
                           zero_tol: float | None = None
                           ) -> ConstructionResult:
    """Realize a vanishing-surplus diagonal by flatten, splice, average,
    chain, undo."""
    build = _Build.create(oracle, lam, d, window, zero_tol)
    cover = _conservation_run(build, build.lam, build.d, 0, steps)
    build.params["realized_through"] = cover
    return build.finalize("conservation")


def domination_construct(oracle: EntryOracle | None, lam: SequenceLike,
                         d: SequenceLike, window: int | None = None, *,
                         max_chains: int = MAX_CHAINS,
                         zero_tol: float | None = None
                         ) -> ConstructionResult:
    """Realize a pointwise dominating diagonal with greedy chains."""
    build = _Build.create(oracle, lam, d, window, zero_tol)
    cover = _pointwise_run(build, build.lam, build.d, 0, max_chains)
    build.params["realized_through"] = cover
    return build.finalize("pointwise")


def eventually_above_construct(oracle: EntryOracle | None, lam: SequenceLike,
                               d: SequenceLike, alpha: float,
                               window: int | None = None, *,
                               steps: int | None = None,
                               zero_tol: float | None = None
                               ) -> ConstructionResult:
    """Realize a diagonal whose surplus converges to a positive excess."""
    build = _Build.create(oracle, lam, d, window, zero_tol)
    cover = _eventually_above_run(
        build, build.lam, build.d, 0, steps, float(alpha)
    )
    build.params["realized_through"] = cover
    return build.finalize("eventually_above")


def dips_construct(oracle: EntryOracle | None, lam: SequenceLike,
                   d: SequenceLike, window: int | None = None, *,
                   steps: int | None = None, guard: int | None = None,
                   zero_tol: float | None = None) -> ConstructionResult:
    """Realize a diagonal whose surplus dips without converging."""
    build = _Build.create(oracle, lam, d, window, zero_tol)
    cover = _dips_run(build, build.lam, build.d, 0, steps, guard)
    build.params["realized_through"] = cover
    return build.finalize("dips")


def construct_dispatch(oracle: EntryOracle | None, lam: SequenceLike,
                       d: SequenceLike, window: int | None = None, *,
                       steps: int | None = None,
                       regime: str | TailRegime | None = None,
                       alpha: float | None = None,
                       zero_tol: float | None = None,
                       guard: int | None = None,
                       max_chains: int = MAX_CHAINS) -> ConstructionResult:
    """Route a diagonal problem to its regime pipeline.

    Declared regimes are validated against the window before any move;
    explicit targets are routed by inspecting the surplus.  Regimes with
    a vanishing surplus first close the zero blocks, then run their
    pipeline on the remaining suffix.
    """
    lam_spec = _coerce_spec(lam)
    d_spec = _coerce_spec(d)
    resolved = _resolve_regime(d_spec, regime)
    if alpha is None:
        alpha = d_spec.alpha
    build = _Build.create(oracle, lam_spec, d_spec, window, zero_tol)
    w = build.window
    if steps is not None and not 1 <= steps <= w - 1:
        raise WindowError(
            f"steps must satisfy 1 <= steps <= window-1; got {steps} "
            f"with window {w}"
        )
    d_checked = SequenceSpec(build.d, regime=resolved, alpha=alpha)
    problems = validate_regime(
        SequenceSpec(build.lam), d_checked, w, zero_tol=zero_tol
    )
    if problems:
        raise RegimeError("; ".join(problems))
    profile = delta_profile(build.lam, build.d, w, zero_tol=zero_tol,
                            guard=guard or 0)
    if resolved is TailRegime.EXPLICIT:
        route = _infer_route(profile, build.lam, build.d, steps)
        build.notes.append(f"explicit targets routed as {route}")
    elif resolved is TailRegime.EVENTUALLY_ABOVE and alpha == 0.0:
        route = "conservation"
        build.notes.append("zero eventual excess handled as conservation")
    else:
        route = resolved.value
    build.params["window"] = w
    build.params["steps"] = steps
    try:
        if route == "zeros":
            cover = _zeros_run(build, build.lam, build.d, 0, steps)
        elif route == "decay":
            cover = _decay_run(build, build.lam, build.d, 0, steps)
        elif route == "pointwise":
            cover = _pointwise_run(build, build.lam, build.d, 0, max_chains)
        else:
            part, suffix_start = reduce_prefix(build.lam, build.d, profile)
            offset = suffix_start - 1
            for lo, hi in part.closed():
                build.run_block(
                    tuple(range(lo, hi + 1)), build.d[lo - 1:hi]
                )
            if steps is not None and offset >= steps:
                build.notes.append(
                    f"zero blocks already cover the requested {steps} slots"
                )
                cover = offset
            else:
                lam_l = build.lam[offset:]
                d_l = build.d[offset:]
                steps_l = steps - offset if steps is not None else None
                if route == "conservation":
                    cover = _conservation_run(
                        build, lam_l, d_l, offset, steps_l
                    )
                elif route == "eventually_above":
                    cover = _eventually_above_run(
                        build, lam_l, d_l, offset, steps_l, float(alpha)
                    )
                elif route == "dips":
                    cover = _dips_run(
                        build, lam_l, d_l, offset, steps_l, guard
                    )
                else:
                    raise RegimeError(f"unroutable regime {route!r}")
    except CarpenterError as exc:
        if str(exc).startswith("route "):
            raise
        raise type(exc)(f"route {route}: {exc}") from exc
    build.params["realized_through"] = cover
    if steps is not None and cover < steps:
        build.notes.append(
            f"realized through slot {cover} of the {steps} requested"
        )
    return build.finalize(route)


def replay_transforms(lam: SequenceLike, d: SequenceLike,
                      transforms: Sequence[Mapping]) -> list[str]:
    """Recompute every recorded sequence transform and compare bitwise.

    Returns a list of discrepancies; empty means the records reproduce
    exactly.  Streams are kept per offset, since suffix pipelines operate
    on shifted copies of the input.
    """
    lv = list(values_of(lam))
    dv = list(values_of(d))
    streams: dict[int, tuple[list[float], list[float]]] = {}
    problems: list[str] = []
    for pos, rec in enumerate(transforms):
        name = rec.get("name")
        offset = int(rec.get("offset", 0))
        if offset not in streams:
            streams[offset] = (lv[offset:], dv[offset:])
        cur_lam, cur_d = streams[offset]
        params = rec.get("params", {})
        try:
            if name == "flat_prefix":
                prefix = int(params["prefix"])
                out = flat_prefix_transform(cur_lam, cur_d, prefix)
                got = list(out.values[:prefix])
                want = [float(v) for v in rec["after"]]
                if got != want:
                    problems.append(
                        f"transform {pos} ({name}): recomputed prefix "
                        f"differs"
                    )
                streams[offset] = (cur_lam, list(out.values))
            elif name == "splice_prefix":
                prefix = int(params["prefix"])
                mu = [cur_lam[0]] + cur_lam[prefix:]
                spliced = [cur_d[0]] + cur_d[prefix:]
                want_lam = [float(v) for v in rec["after_lam"]]
                want_d = [float(v) for v in rec["after_targets"]]
                if mu != want_lam or spliced != want_d:
                    problems.append(
                        f"transform {pos} ({name}): recomputed splice "
                        f"differs"
                    )
                streams[offset] = (mu, spliced)
            elif name == "averaged_interpolant":
                records = tuple(int(r) for r in params["records"])
                out = averaged_interpolant(cur_lam, cur_d, records)
                got = list(out.values)
                want = [float(v) for v in rec["after"]]
                if got != want:
                    problems.append(
                        f"transform {pos} ({name}): recomputed averages "
                        f"differ"
                    )
                new_d = list(cur_d)
                new_d[:len(got)] = got
                streams[offset] = (cur_lam, new_d)
            elif name == "floor_shift":
                shift_alpha = float(params["alpha"])
                count = int(params["count"])
                out = alpha_floor_shift(cur_lam, cur_d, shift_alpha, count)
                got = list(out.values[:count])
                want = [float(v) for v in rec["after"]]
                if got != want:
                    problems.append(
                        f"transform {pos} ({name}): recomputed shift "
                        f"differs"
                    )
                streams[offset] = (cur_lam, list(out.values))
            elif name == "tail_minima_bump":
                records = tuple(int(r) for r in params["records"])
                out = tail_minima_transform(cur_lam, cur_d, records)
                got = list(out.values[:records[-1]])
                want = [float(v) for v in rec["after"]]
                if got != want:
                    problems.append(
                        f"transform {pos} ({name}): recomputed bumps "
                        f"differ"
                    )
                streams[offset] = (cur_lam, list(out.values))
            else:
                problems.append(f"transform {pos}: unknown name {name!r}")
        except (CarpenterError, KeyError, IndexError, TypeError) as exc:
            problems.append(f"transform {pos} ({name}): replay failed: {exc}")
    return problems


def replay_target_assignment(d: SequenceLike, ops: Sequence[Operation],
                             constructed_slots: Iterable[int]) -> list[str]:
    """Fold the recorded operations and check the final assignment.

    Chains assign their targets to all consumed slots but the last; blocks
    assign to every slot.  After folding in pipeline order, every
    constructed slot must carry exactly the requested diagonal value.
    """
    dv = values_of(d)
    assign: dict[int, float] = {}
    for op in ops:
        for slot, target in zip(op.realized_slots(), op.targets):
            assign[slot] = target
    problems: list[str] = []
    for slot in sorted(constructed_slots):
        if slot not in assign:
            problems.append(f"slot {slot}: constructed but never assigned")
            continue
        if assign[slot] != dv[slot - 1]:
            problems.append(
                f"slot {slot}: final assignment {assign[slot]!r} is not "
                f"the requested {dv[slot - 1]!r}"
            )
    return problems
