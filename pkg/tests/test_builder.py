"""Sequence builders: MAG to PR-sequence, PR to SNPR conversion."""

import itertools
import random

import pytest

from netdist import TaxaSet, canonical_key
from netdist.agreement import agreement_distance
from netdist.builder import mag_to_pr_sequence, pr_to_snpr_sequence
from netdist.generate import enumerate_trees, random_network, random_walk
from netdist.rearrange import OpKind, OpSet, apply_op, candidate_ops
from netdist.sequences import sequence_from_ops, verify_sequence


def build_and_verify(a, b):
    res = agreement_distance(a, b)
    seq = mag_to_pr_sequence(a, b, res.witness)
    rep = verify_sequence(seq)
    assert rep.ok, rep.violations
    assert seq.end_key == canonical_key(b)
    assert len(seq) <= 3 * res.value, f"length {len(seq)} exceeds 3*{res.value}"
    return res.value, seq


class TestMagToPr:
    def test_identity(self, tree123):
        d, seq = build_and_verify(tree123, tree123)
        assert d == 0 and len(seq) == 0

    def test_three_leaf_trees(self, tree123, tree132):
        d, seq = build_and_verify(tree123, tree132)
        assert d == 1

    def test_all_three_leaf_tree_pairs(self):
        trees = enumerate_trees(TaxaSet.numbered(3))
        for a, b in itertools.product(trees, repeat=2):
            build_and_verify(a, b)

    def test_all_four_leaf_tree_pairs(self):
        trees = enumerate_trees(TaxaSet.numbered(4))
        for a, b in itertools.combinations(trees, 2):
            build_and_verify(a, b)

    def test_plus_one_reticulation(self, tree123):
        plus = [op for op in candidate_ops(tree123, OpSet.PR) if op.kind is OpKind.PLUS][0]
        other = apply_op(tree123, plus)
        d, seq = build_and_verify(tree123, other)
        assert d == 1
        # and in the reticulation-reducing direction
        build_and_verify(other, tree123)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_network_pairs(self, seed):
        rng = random.Random(seed)
        n = rng.choice([3, 4])
        r = rng.choice([0, 1, 2])
        a = random_network(TaxaSet.numbered(n), r, seed)
        b = random_walk(a, rng.choice([1, 2, 3]), OpSet.PR, seed + 1000, cap=2)
        build_and_verify(a, b)

    @pytest.mark.parametrize("seed", range(10))
    def test_independent_pairs(self, seed):
        rng = random.Random(seed + 31)
        n = rng.choice([3, 4])
        a = random_network(TaxaSet.numbered(n), rng.choice([0, 1]), seed)
        b = random_network(TaxaSet.numbered(n), rng.choice([0, 1, 2]), seed + 500)
        build_and_verify(a, b)


class TestPrToSnpr:
    def test_sequence_without_heads_is_unchanged(self, tree123):
        ops = []
        cur = tree123
        rng = random.Random(3)
        for _ in range(3):
            cands = [
                op
                for op in candidate_ops(cur, OpSet.SNPR)
                if op.kind in (OpKind.TAIL, OpKind.PLUS)
            ]
            op = rng.choice(cands)
            ops.append(op)
            cur = apply_op(cur, op)
        seq = sequence_from_ops(tree123, ops, OpSet.PR)
        converted = pr_to_snpr_sequence(seq)
        assert len(converted) == len(seq)
        assert converted.end_key == seq.end_key
        assert verify_sequence(converted).ok

    def test_single_head_becomes_two_steps(self):
        net = random_network(TaxaSet.numbered(3), 1, 11)
        heads = [op for op in candidate_ops(net, OpSet.PR) if op.kind is OpKind.HEAD]
        assert heads
        op = heads[0]
        seq = sequence_from_ops(net, [op], OpSet.PR)
        converted = pr_to_snpr_sequence(seq)
        assert len(converted) == 2
        assert [o.kind for o, _ in converted.steps] == [OpKind.PLUS, OpKind.MINUS]
        assert converted.end_key == seq.end_key
        assert verify_sequence(converted).ok

    @pytest.mark.parametrize("seed", range(15))
    def test_random_sequences(self, seed):
        rng = random.Random(seed)
        n = rng.choice([3, 4])
        start = random_network(TaxaSet.numbered(n), rng.choice([0, 1, 2]), seed)
        ops = []
        cur = start
        for _ in range(rng.choice([1, 2, 3])):
            cands = candidate_ops(cur, OpSet.PR)
            heads = [op for op in cands if op.kind is OpKind.HEAD]
            pool = heads if heads and rng.random() < 0.6 else cands
            op = rng.choice(pool)
            ops.append(op)
            cur = apply_op(cur, op)
        seq = sequence_from_ops(start, ops, OpSet.PR)
        converted = pr_to_snpr_sequence(seq)
        assert verify_sequence(converted).ok
        assert converted.end_key == seq.end_key
        assert len(converted) <= 2 * len(seq)
        assert all(o.kind is not OpKind.HEAD for o, _ in converted.steps)
