"""Transfer plans and block realizations on finite windows."""

import math

import numpy as np
import pytest

from carpenter.errors import ValidationError
from carpenter.finite_schurhorn import (
    BlockCompression,
    Transfer,
    TransferPlan,
    block_apply,
    block_compression,
    eigen_to_diagonal,
    realize_block,
    robin_hood_plan,
)
from carpenter.moves import FrameVector
from carpenter.operators import DenseSymmetricOracle, DiagonalOracle, compressed_entry
from carpenter.sequences import BlockPartition


def mix_steps(rng, values, steps):
    """Average random pairs; every step preserves majorization downward."""
    out = list(values)
    for _ in range(steps):
        i, j = rng.choice(len(out), size=2, replace=False)
        t = rng.uniform(0.0, 1.0)
        a, b = out[i], out[j]
        out[i] = t * a + (1.0 - t) * b
        out[j] = (1.0 - t) * a + t * b
    return out


class TestTransferJson:
    def test_transfer_round_trip(self):
        t = Transfer(3, 1, 0.25)
        assert Transfer.from_json_dict(t.to_json_dict()) == t

    def test_plan_round_trip(self):
        plan = robin_hood_plan([3.0, 1.0], [2.0, 2.0])
        back = TransferPlan.from_json_dict(plan.to_json_dict())
        assert back == plan

    def test_plan_apply_uses_start_by_default(self):
        plan = TransferPlan((Transfer(1, 2, 1.0),), (3.0, 1.0), (2.0, 2.0))
        assert plan.apply() == [2.0, 2.0]
        assert plan.apply([5.0, 0.0]) == [4.0, 1.0]


class TestRobinHoodPlan:
    def test_two_point_instance(self):
        plan = robin_hood_plan([3.0, 1.0], [2.0, 2.0])
        assert plan.transfers == (Transfer(1, 2, 1.0),)
        assert plan.apply() == [2.0, 2.0]

    def test_identity_needs_no_transfers(self):
        plan = robin_hood_plan([2.0, 1.0, 0.0], [2.0, 1.0, 0.0])
        assert len(plan) == 0

    def test_gaps_below_tolerance_are_ignored(self):
        plan = robin_hood_plan([1.0 + 1e-14, 1.0 - 1e-14], [1.0, 1.0])
        assert len(plan) == 0

    def test_four_point_instance_zeroes_a_gap_each_step(self):
        start = [4.0, 3.0, 2.0, 1.0]
        target = [3.0, 3.0, 2.0, 2.0]
        plan = robin_hood_plan(start, target)
        assert len(plan) <= 3
        got = plan.apply()
        assert max(abs(a - b) for a, b in zip(got, target)) <= 1e-12
        cur = list(start)
        for t in plan.transfers:
            assert t.amount > 0.0
            lo = min(cur[t.source - 1], cur[t.dest - 1])
            hi = max(cur[t.source - 1], cur[t.dest - 1])
            cur[t.source - 1] -= t.amount
            cur[t.dest - 1] += t.amount
            # each new value stays inside the pair's old range
            assert lo - 1e-12 <= cur[t.source - 1] <= hi + 1e-12
            assert lo - 1e-12 <= cur[t.dest - 1] <= hi + 1e-12

    def test_seeded_sorted_targets_need_under_n_transfers(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(2, 9))
            start = sorted(rng.uniform(-5, 5, size=n), reverse=True)
            target = sorted(
                mix_steps(rng, start, int(rng.integers(1, 2 * n))), reverse=True
            )
            plan = robin_hood_plan(start, target)
            assert len(plan) <= n - 1
            got = plan.apply()
            assert max(abs(a - b) for a, b in zip(got, target)) <= 1e-9

    def test_seeded_positional_targets_stay_inside_pair_ranges(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            n = int(rng.integers(2, 9))
            start = list(rng.uniform(-5, 5, size=n))
            target = mix_steps(rng, start, int(rng.integers(1, 2 * n)))
            plan = robin_hood_plan(start, target)
            assert len(plan) <= 2 * (n - 1)
            cur = list(start)
            for t in plan.transfers:
                lo = min(cur[t.source - 1], cur[t.dest - 1])
                hi = max(cur[t.source - 1], cur[t.dest - 1])
                cur[t.source - 1] -= t.amount
                cur[t.dest - 1] += t.amount
                assert lo - 1e-12 <= cur[t.source - 1] <= hi + 1e-12
                assert lo - 1e-12 <= cur[t.dest - 1] <= hi + 1e-12
            assert max(abs(a - b) for a, b in zip(cur, target)) <= 1e-9

    def test_pure_permutation_realized_by_swaps(self):
        plan = robin_hood_plan([1.0, 2.0, 3.0], [3.0, 1.0, 2.0])
        assert len(plan) == 2
        assert plan.apply() == [3.0, 1.0, 2.0]

    def test_not_majorized_rejected(self):
        with pytest.raises(ValidationError):
            robin_hood_plan([2.0, 2.0], [3.0, 1.0])

    def test_unequal_totals_rejected(self):
        with pytest.raises(ValidationError):
            robin_hood_plan([3.0, 1.0], [2.0, 1.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            robin_hood_plan([3.0, 1.0], [2.0])


class TestBlockCompression:
    def test_diagonal_oracle_compression(self):
        oracle = DiagonalOracle([5.0, 7.0])
        vecs = [FrameVector.basis(1), FrameVector.basis(2)]
        comp = block_compression(oracle, [1, 2], vecs)
        assert comp.indices == (1, 2)
        assert comp.diagonal() == [5.0, 7.0]
        assert comp.entries[0, 1] == comp.entries[1, 0] == 0.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            BlockCompression((1, 2), np.zeros((3, 3)))

    def test_asymmetric_entries_rejected(self):
        with pytest.raises(ValidationError):
            BlockCompression((1, 2), np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_one_label_per_vector_required(self):
        oracle = DiagonalOracle([5.0, 7.0])
        with pytest.raises(ValidationError):
            block_compression(oracle, [1, 2], [FrameVector.basis(1)])


class TestRealizeBlock:
    def test_dense_two_by_two_single_move(self):
        # [[0, 1], [1, 2]] has eigenvalues 1 +- sqrt(2); its diagonal (0, 2)
        # reaches (1, 1) with one rotation at the reference alpha
        oracle = DenseSymmetricOracle([[0.0, 1.0], [1.0, 2.0]])
        vecs = [FrameVector.basis(1, id="e1"), FrameVector.basis(2, id="e2")]
        comp = block_compression(oracle, [1, 2], vecs)
        out, log = realize_block(oracle, comp, vecs, [1.0, 1.0])
        assert len(log.moves) == 1
        move = log.moves[0]
        assert abs(move.alpha - (1.0 + 1.0 / math.sqrt(2.0)) / 2.0) <= 1e-12
        for v in out:
            assert abs(compressed_entry(oracle, v, v) - 1.0) <= 1e-10
        # the rotated pair stays orthonormal; the operator keeps its
        # spectrum, so the compressed off-diagonal moves to sqrt(2)
        assert abs(out[0].dot(out[1])) <= 1e-12
        assert abs(abs(compressed_entry(oracle, out[0], out[1])) - math.sqrt(2.0)) <= 1e-10

    def test_ids_stay_attached_to_block_positions(self):
        oracle = DenseSymmetricOracle([[0.0, 1.0], [1.0, 2.0]])
        vecs = [FrameVector.basis(1, id="e1"), FrameVector.basis(2, id="e2")]
        comp = block_compression(oracle, [1, 2], vecs)
        out, _ = realize_block(oracle, comp, vecs, [1.0, 1.0])
        assert [v.id for v in out] == ["e1", "e2"]

    def test_default_chain_id_names_the_block(self):
        oracle = DiagonalOracle([0.0, 2.0])
        vecs = [FrameVector.basis(1), FrameVector.basis(2)]
        comp = block_compression(oracle, [4, 5], vecs)
        _, log = realize_block(oracle, comp, vecs, [1.0, 1.0])
        assert log.chain_id == "b4-5"

    def test_wrong_target_count_rejected(self):
        oracle = DiagonalOracle([0.0, 2.0])
        vecs = [FrameVector.basis(1), FrameVector.basis(2)]
        comp = block_compression(oracle, [1, 2], vecs)
        with pytest.raises(ValidationError):
            realize_block(oracle, comp, vecs, [1.0])


class TestBlockApply:
    def test_two_closed_blocks_realized_independently(self):
        lam = [0.0, 2.0, 10.0, 11.0, 12.0]
        oracle = DiagonalOracle(lam)
        vectors = {i: FrameVector.basis(i, id=f"e{i}") for i in range(1, 6)}
        partition = BlockPartition(blocks=((1, 2), (3, 5)), covered=True)
        targets = [[1.0, 1.0], [11.0, 11.0, 11.0]]
        updates, logs = block_apply(oracle, partition, vectors, targets)
        assert set(updates) == {1, 2, 3, 4, 5}
        assert set(logs) == {"b1-2", "b3-5"}
        flat = [1.0, 1.0, 11.0, 11.0, 11.0]
        for slot, want in zip(range(1, 6), flat):
            got = compressed_entry(oracle, updates[slot], updates[slot])
            assert abs(got - want) <= 1e-9
        # cross terms between realized vectors stay zero across block edges
        assert abs(compressed_entry(oracle, updates[2], updates[3])) <= 1e-10

    def test_target_count_must_match_closed_blocks(self):
        oracle = DiagonalOracle([0.0, 2.0])
        vectors = {1: FrameVector.basis(1), 2: FrameVector.basis(2)}
        partition = BlockPartition(blocks=((1, 2),), covered=True)
        with pytest.raises(ValidationError):
            block_apply(oracle, partition, vectors, [[1.0, 1.0], [3.0]])

    def test_open_tail_block_left_untouched(self):
        oracle = DiagonalOracle([0.0, 2.0, 5.0])
        vectors = {i: FrameVector.basis(i) for i in (1, 2, 3)}
        partition = BlockPartition(blocks=((1, 2), (3, 3)), covered=False)
        updates, logs = block_apply(oracle, partition, vectors, [[1.0, 1.0]])
        assert set(updates) == {1, 2}
        assert set(logs) == {"b1-2"}

    def test_missing_slot_vector_rejected(self):
        oracle = DiagonalOracle([0.0, 2.0])
        partition = BlockPartition(blocks=((1, 2),), covered=True)
        with pytest.raises(ValidationError):
            block_apply(oracle, partition, {1: FrameVector.basis(1)}, [[1.0, 1.0]])


class TestEigenToDiagonal:
    def test_three_point_realization(self):
        lam = [0.0, 1.0, 5.0]
        d = [2.0, 2.0, 2.0]
        out, log = eigen_to_diagonal(lam, d)
        assert log.chain_id == "finite"
        oracle = DiagonalOracle(lam)
        for v, want in zip(out, d):
            assert abs(compressed_entry(oracle, v, v) - want) <= 1e-10
        gram = np.array([[u.dot(v) for v in out] for u in out])
        assert float(np.max(np.abs(gram - np.eye(3)))) <= 1e-12

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            eigen_to_diagonal([1.0, 2.0], [1.5])

    def test_seeded_batch_realizes_spectral_mixes(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            n = int(rng.integers(2, 7))
            lam = sorted(rng.uniform(-3, 3, size=n), reverse=True)
            d = mix_steps(rng, lam, int(rng.integers(1, n + 2)))
            out, log = eigen_to_diagonal(lam, d)
            oracle = DiagonalOracle(lam)
            dev = max(
                abs(compressed_entry(oracle, v, v) - want)
                for v, want in zip(out, d)
            )
            assert dev <= 1e-9
            assert len(log.moves) <= 2 * (n - 1)
            gram = np.array([[u.dot(v) for v in out] for u in out])
            assert float(np.max(np.abs(gram - np.eye(n)))) <= 1e-11
