"""Rearrangement sequences, their replay verification, and distance results."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .canonical import canonical_key
from .enewick import write_enewick
from .errors import InvalidOperationError
from .network import PhyloNetwork, ValidationReport, validate
from .rearrange import OpSet, RearrangementOp, apply_op


@dataclass(frozen=True)
class RearrangementSequence:
    """A validated chain of rearrangement operations.

    Each step pairs the operation applied to the previous network with the
    canonical key of its result; the length of the sequence is the number
    of steps.
    """

    start: PhyloNetwork
    steps: tuple[tuple[RearrangementOp, bytes], ...]
    opset: OpSet

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def end_key(self) -> bytes:
        if not self.steps:
            return canonical_key(self.start)
        return self.steps[-1][1]

    def networks(self) -> list[PhyloNetwork]:
        """Replay the sequence, returning every intermediate network."""
        out = [self.start]
        for op, _ in self.steps:
            out.append(apply_op(out[-1], op))
        return out

    def to_json(self) -> dict:
        nets = self.networks()
        return {
            "opset": self.opset.value,
            "length": len(self.steps),
            "start": write_enewick(self.start),
            "steps": [
                {"op": op.to_json(), "result": write_enewick(net)}
                for (op, _), net in zip(self.steps, nets[1:])
            ],
        }


def sequence_from_ops(
    start: PhyloNetwork, ops: list[RearrangementOp], opset: OpSet
) -> RearrangementSequence:
    steps = []
    cur = start
    for op in ops:
        cur = apply_op(cur, op)
        steps.append((op, canonical_key(cur)))
    return RearrangementSequence(start, tuple(steps), opset)


def verify_sequence(seq: RearrangementSequence) -> ValidationReport:
    """Replay every step with validity checks; ok iff all pass.

    Checks that each operation belongs to the declared operation set, that
    it applies cleanly, that every intermediate is a valid network, and
    that each step's canonical key matches the declared one.
    """
    bad: list[str] = []
    rep = validate(seq.start)
    if not rep.ok:
        bad.append("start network invalid: " + "; ".join(rep.violations))
        return ValidationReport(False, bad)
    cur = seq.start
    for i, (op, declared) in enumerate(seq.steps):
        if op.kind not in seq.opset.kinds:
            bad.append(f"step {i}: op kind {op.kind.value} not in opset {seq.opset.value}")
            break
        try:
            cur = apply_op(cur, op)
        except InvalidOperationError as exc:
            bad.append(f"step {i}: {exc}")
            break
        rep = validate(cur)
        if not rep.ok:
            bad.append(f"step {i}: result invalid: " + "; ".join(rep.violations))
            break
        if canonical_key(cur) != declared:
            bad.append(f"step {i}: result key differs from declared key (endpoint mismatch)")
            break
    return ValidationReport(not bad, bad)


@dataclass
class DistanceResult:
    """A distance value with its witness.

    ``exhausted`` is True when the reticulation cap never pruned a state,
    so the value is exact over the unrestricted space; when False the
    value is exact only among sequences whose intermediates respect the
    cap, an upper bound for the unrestricted distance.
    """

    value: int
    witness: Any
    exhausted: bool = True
    metric: str = ""

    def to_json(self, include_witness: bool = True) -> dict:
        out = {"metric": self.metric, "value": self.value, "exhausted": self.exhausted}
        if include_witness and self.witness is not None:
            w = self.witness
            out["witness"] = w.to_json() if hasattr(w, "to_json") else w
        return out
