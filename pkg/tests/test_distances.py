"""BFS distances: examples, tree-space equalities, and bound checks."""

import itertools

import pytest

from netdist import NonTreeError, TaxaSet, canonical_key
from netdist.agreement import agreement_distance
from netdist.distances import pr_distance, rspr_distance, snpr_distance
from netdist.generate import enumerate_trees, random_network, random_walk
from netdist.rearrange import OpKind, OpSet, apply_op, candidate_ops
from netdist.sequences import verify_sequence


class TestBasics:
    def test_zero_distance(self, tree123):
        for fn in (pr_distance, snpr_distance, rspr_distance):
            res = fn(tree123, tree123)
            assert res.value == 0
            assert res.exhausted

    def test_three_leaf_trees_distance_one(self, tree123, tree132):
        assert pr_distance(tree123, tree132).value == 1
        assert snpr_distance(tree123, tree132).value == 1
        assert rspr_distance(tree123, tree132).value == 1

    def test_witness_sequence_verifies(self, tree123, tree132):
        res = pr_distance(tree123, tree132)
        assert verify_sequence(res.witness).ok
        assert res.witness.end_key == canonical_key(tree132)

    def test_two_step_pair(self, tree123):
        plus = [op for op in candidate_ops(tree123, OpSet.PR) if op.kind is OpKind.PLUS][0]
        mid = apply_op(tree123, plus)
        tails = [op for op in candidate_ops(mid, OpSet.PR) if op.kind is OpKind.TAIL]
        far = None
        for op in tails:
            cand = apply_op(mid, op)
            if canonical_key(cand) not in (canonical_key(mid), canonical_key(tree123)):
                far = cand
                break
        assert far is not None
        res = pr_distance(tree123, far)
        assert 1 <= res.value <= 2
        ad = agreement_distance(tree123, far).value
        assert ad <= res.value

    def test_rspr_rejects_networks(self, tree123):
        net = random_network(TaxaSet.numbered(3), 1, 5)
        with pytest.raises(NonTreeError):
            rspr_distance(net, net)

    def test_snpr_at_least_pr(self):
        for seed in range(5):
            a = random_network(TaxaSet.numbered(3), 1, seed)
            b = random_walk(a, 2, OpSet.PR, seed + 100, cap=2)
            dpr = pr_distance(a, b).value
            dsnpr = snpr_distance(a, b).value
            assert dpr <= dsnpr <= 2 * dpr


class TestTreeSpace:
    def test_pr_snpr_rspr_agree_on_trees(self):
        trees = enumerate_trees(TaxaSet.numbered(4))
        pairs = list(itertools.combinations(range(len(trees)), 2))[:20]
        for i, j in pairs:
            a, b = trees[i], trees[j]
            r = rspr_distance(a, b).value
            assert pr_distance(a, b).value == r
            assert snpr_distance(a, b).value == r

    def test_ad_equals_rspr_on_three_leaves(self):
        trees = enumerate_trees(TaxaSet.numbered(3))
        for a, b in itertools.combinations(trees, 2):
            assert agreement_distance(a, b).value == rspr_distance(a, b).value
