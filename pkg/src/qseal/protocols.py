"""Sealed-message protocol constructions: seal, honest unseal, and verify.

Each protocol produces a ``SealedInstance`` holding the sealer's reference
state, the recipient's honest unseal procedure, and the parameters needed to
rebuild the instance from its serialized form. The sealer's verification is
always the rank-1 projector onto the reference state, so an honest return is
accepted with probability exactly 1 (zero completeness error) in every
protocol here.

The decode table maps measurement outcomes to messages; outcomes that carry
no message map to ``None``, the distinguished garbage marker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .states import (
    Ensemble,
    Label,
    LocalUnitary,
    ProjPartition,
    SparseState,
    apply_unitary_c,
    measure_partition,
    project_accept_probability,
    state_from_dict,
    state_to_dict,
)

NAIVE = "naive"
GARBAGE = "garbage"
MULTIPICTURE = "multipicture"
OAEP = "oaep"


class ProtocolError(Exception):
    """Base class for protocol construction failures."""


class LabelCollision(ProtocolError):
    """A garbage label collides with a message label or another garbage label."""


class EmptyGarbageSet(ProtocolError):
    pass


class DuplicatePicture(ProtocolError):
    pass


class TooFewPictures(ProtocolError):
    pass


@dataclass(frozen=True)
class UnsealSpec:
    """Honest unseal procedure: unitary, projective partition, decode table.

    ``pre_unitary`` is ``None`` for a plain computational-basis measurement;
    storing the identity implicitly keeps large instances cheap. ``decode``
    maps outcome labels to messages, with ``None`` marking garbage outcomes.
    """

    pre_unitary: LocalUnitary | None
    partition: ProjPartition
    decode: dict[Label, str | None]

    def __post_init__(self) -> None:
        messages = [m for m in self.decode.values() if m is not None]
        if len(messages) != len(set(messages)):
            raise ValueError("decode must be injective on message outcomes")


@dataclass(frozen=True)
class SealedInstance:
    """One sealed message: reference state, honest unseal, and parameters."""

    protocol: str
    reference: SparseState
    unseal: UnsealSpec
    params: dict
    completeness_error: float = 0.0


def _validate_message(m: str) -> str:
    if not isinstance(m, str) or not m:
        raise ValueError("messages must be nonempty strings")
    return m


def seal_naive(m: str, garbage: Label = "0") -> SealedInstance:
    """Equal superposition of the message branch and one garbage branch.

    The honest unseal is a computational-basis measurement of register C,
    which recovers the message with probability 1/2.
    """
    _validate_message(m)
    if garbage == m:
        raise LabelCollision(f"garbage label {garbage!r} equals the message label")
    amp = 1.0 / math.sqrt(2.0)
    reference = SparseState({(garbage, garbage): amp, (m, m): amp})
    unseal = UnsealSpec(
        pre_unitary=None,
        partition=ProjPartition.finest([garbage, m]),
        decode={m: m, garbage: None},
    )
    return SealedInstance(NAIVE, reference, unseal, {"message": m, "garbage": garbage})


def seal_garbage(m: str, garbage_set: Sequence[Label]) -> SealedInstance:
    """Message branch superposed with a uniform bundle of garbage branches."""
    _validate_message(m)
    garbage_set = list(garbage_set)
    if not garbage_set:
        raise EmptyGarbageSet("need at least one garbage label")
    if len(set(garbage_set)) != len(garbage_set):
        raise LabelCollision("garbage labels must be distinct")
    if m in garbage_set:
        raise LabelCollision(f"garbage label {m!r} equals the message label")
    n_g = len(garbage_set)
    amps: dict[tuple[Label, Label], complex] = {(m, m): 1.0 / math.sqrt(2.0)}
    g_amp = 1.0 / math.sqrt(2.0 * n_g)
    for g in garbage_set:
        amps[(g, g)] = g_amp
    reference = SparseState(amps)
    decode: dict[Label, str | None] = {g: None for g in garbage_set}
    decode[m] = m
    unseal = UnsealSpec(
        pre_unitary=None,
        partition=ProjPartition.finest(garbage_set + [m]),
        decode=decode,
    )
    return SealedInstance(
        GARBAGE, reference, unseal, {"message": m, "garbage_set": list(garbage_set)}
    )


def seal_multipicture(pictures: Sequence[str]) -> SealedInstance:
    """Uniform superposition over indexed pictures; reading collapses the index.

    B labels are the indices "1".."n", C labels the picture identifiers. The
    honest unseal measures C and always recovers exactly one intact picture.
    """
    pictures = [_validate_message(p) for p in pictures]
    if len(pictures) < 2:
        raise TooFewPictures("need at least two pictures")
    if len(set(pictures)) != len(pictures):
        raise DuplicatePicture("pictures must be pairwise distinct")
    n = len(pictures)
    amp = 1.0 / math.sqrt(n)
    reference = SparseState({(str(i + 1), p): amp for i, p in enumerate(pictures)})
    unseal = UnsealSpec(
        pre_unitary=None,
        partition=ProjPartition.finest(pictures),
        decode={p: p for p in pictures},
    )
    return SealedInstance(MULTIPICTURE, reference, unseal, {"pictures": list(pictures)})


def honest_unseal(inst: SealedInstance, rng_seed: int) -> tuple[str | None, bool]:
    """Run the honest unseal once; returns (message or None, success flag).

    OAEP instances delegate to the inversion-oracle path; a private context is
    rebuilt from the instance parameters, so callers that care about the query
    log should use ``oaep.unseal_oaep`` with their own context instead.
    """
    if inst.protocol == OAEP:
        from . import oaep

        ctx = oaep.OaepContext.create(
            k0=inst.params["k0"],
            n=inst.params["n"],
            master_key=bytes.fromhex(inst.params["key"]),
        )
        y, _r = oaep.unseal_oaep(inst, ctx, rng_seed)
        return format(y, f"0{inst.params['n']}b"), True
    state = inst.reference
    if inst.unseal.pre_unitary is not None:
        state = apply_unitary_c(state, inst.unseal.pre_unitary)
    outcome, _post, _dist = measure_partition(state, inst.unseal.partition, rng_seed)
    message = inst.unseal.decode.get(outcome)
    return message, message is not None


def verify_return(
    inst: SealedInstance, returned: Ensemble, rng_seed: int
) -> tuple[bool, float]:
    """Project the returned state onto the reference and sample belief.

    Returns (believe, exact acceptance probability); the belief bit is drawn
    deterministically from ``rng_seed``.
    """
    accept = project_accept_probability(inst.reference, returned)
    believe = bool(np.random.default_rng(rng_seed).random() < accept)
    return believe, accept


def instance_to_dict(inst: SealedInstance) -> dict:
    """JSON-ready form: protocol, params, reference state, decode table."""
    return {
        "protocol": inst.protocol,
        "params": inst.params,
        "reference": state_to_dict(inst.reference),
        "decode": dict(sorted(inst.unseal.decode.items(), key=lambda kv: kv[0])),
    }


def instance_from_dict(data: Mapping) -> SealedInstance:
    """Rebuild an instance; the honest measurement is the finest C partition.

    All four protocols unseal with an identity pre-unitary over the active C
    labels, so only the decode table needs to be stored.
    """
    protocol = data["protocol"]
    if protocol not in (NAIVE, GARBAGE, MULTIPICTURE, OAEP):
        raise ValueError(f"unknown protocol {protocol!r}")
    reference = state_from_dict(data["reference"])
    decode = {str(k): (None if v is None else str(v)) for k, v in data["decode"].items()}
    unseal = UnsealSpec(
        pre_unitary=None,
        partition=ProjPartition.finest(sorted(reference.c_labels())),
        decode=decode,
    )
    return SealedInstance(protocol, reference, unseal, dict(data["params"]))
