"""Cheating strategies against sealed instances, with exact bookkeeping.

Every strategy here follows the measure-and-uncompute template: apply a
unitary to register C, make a projective measurement, apply the adjoint, and
hand the resulting mixture back for verification. For any strategy of that
shape the branch overlaps with the reference obey |<ref|branch_i>| = sqrt(q_i)
exactly, which is what makes the closed-form detection bound

    s <= completeness_error + p*sqrt(1-p) + (1-p)

hold trial after trial.

Two recovery numbers appear in a report. ``p`` counts every outcome that
pinpoints some message (for an indexed-picture instance the honest basis
measurement pinpoints one picture every time, so p = 1). ``p_bound`` is the
mass of the single best outcome pinpointing one fixed message, which is the
quantity the closed-form bound is stated for; the two coincide whenever the
instance seals a single message.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .protocols import MULTIPICTURE, SealedInstance
from .states import (
    DENSE_DIM_CAP,
    DimensionTooLarge,
    Ensemble,
    Label,
    LocalUnitary,
    ProjPartition,
    SparseState,
    apply_unitary_c,
    collapse_branches,
    project_accept_probability,
    random_unitary,
    squared_overlap,
    trace_distance_pure,
    trace_distance_pure_vs_ensemble,
)


class AdversaryError(Exception):
    pass


class PartialPredicate(AdversaryError):
    """The predicate does not cover every active C label."""


class InvalidIndex(AdversaryError):
    """The collapsed index label does not belong to the instance."""


Predicate = Mapping[Label, int]


def soundness_bound(p: float, completeness_error: float = 0.0) -> float:
    """Closed-form ceiling on detection for a recovery probability ``p``."""
    return completeness_error + p * math.sqrt(max(0.0, 1.0 - p)) + (1.0 - p)


@dataclass(frozen=True)
class CheatReport:
    """Exact outcome of one cheating strategy.

    ``outcome_table`` rows are (outcome label, branch probability q_i, branch
    acceptance |<ref|phi_i>|^2). ``returned`` is the mixture handed back for
    verification. ``margin`` is the slack left under the closed-form bound.
    """

    p: float
    s: float
    bound: float
    outcome_table: tuple[tuple[Label, float, float], ...]
    returned: Ensemble
    p_bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.s

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "s": self.s,
            "bound": self.bound,
            "margin": self.margin,
            "outcome_table": [list(row) for row in self.outcome_table],
        }


def strategy_report(
    inst: SealedInstance,
    unitary: LocalUnitary | None = None,
    partition: ProjPartition | None = None,
    *,
    undo: bool = True,
) -> CheatReport:
    """Evaluate one measure-and-uncompute strategy exactly.

    ``unitary=None`` means the identity; ``partition=None`` means the finest
    computational-basis partition over the active C labels. ``undo=False``
    skips the final adjoint, which is only useful for regression comparisons.
    """
    reference = inst.reference
    work = reference if unitary is None else apply_unitary_c(reference, unitary)
    if partition is None:
        partition = ProjPartition.finest(sorted(work.c_labels()))
    branches = collapse_branches(work, partition)

    cell_labels: dict[Label, set[Label]] = {}
    for c in work.c_labels():
        cell_labels.setdefault(partition.outcome_of[c], set()).add(c)

    undo_u = unitary.adjoint() if (undo and unitary is not None) else None
    members: list[tuple[float, SparseState]] = []
    table: list[tuple[Label, float, float]] = []
    recovery_mass: dict[str, float] = {}
    for outcome in sorted(branches):
        prob, post = branches[outcome]
        if undo_u is not None:
            post = apply_unitary_c(post, undo_u)
        acceptance = squared_overlap(reference, post)
        members.append((prob, post))
        table.append((outcome, prob, acceptance))
        active = cell_labels[outcome]
        if len(active) == 1:
            message = inst.unseal.decode.get(next(iter(active)))
            if message is not None:
                recovery_mass[message] = recovery_mass.get(message, 0.0) + prob

    p = min(1.0, float(sum(recovery_mass.values())))
    p_bound = min(1.0, float(max(recovery_mass.values(), default=0.0)))
    returned = Ensemble(tuple(members))
    accept = project_accept_probability(reference, returned)
    s = 1.0 - accept
    bound = soundness_bound(p_bound, inst.completeness_error)
    return CheatReport(p, s, bound, tuple(table), returned, p_bound)


def generic_cheat(inst: SealedInstance) -> CheatReport:
    """Run the honest measurement coherently, then uncompute it."""
    return strategy_report(inst, inst.unseal.pre_unitary, inst.unseal.partition)


def basis_cheat(inst: SealedInstance) -> CheatReport:
    """Measure register C outright in the computational basis."""
    return strategy_report(inst, None, None)


def predicate_cheat(inst: SealedInstance, g: Predicate) -> CheatReport:
    """Measure a two-valued classical predicate of the C label.

    The partition is diagonal in the computational basis, so no uncomputation
    is needed; a predicate constant on the support leaves the state untouched.
    """
    active = inst.reference.c_labels()
    missing = sorted(active - set(g))
    if missing:
        raise PartialPredicate(f"predicate undefined on labels {missing}")
    bad = {label: v for label, v in g.items() if v not in (0, 1)}
    if bad:
        raise PartialPredicate(f"predicate values must be 0 or 1, got {bad}")
    partition = ProjPartition({label: f"g={g[label]}" for label in active})
    return strategy_report(inst, None, partition)


def optimal_post_collapse_response(
    inst: SealedInstance, collapsed_b: Label
) -> tuple[float, SparseState]:
    """Best acceptance reachable once register B has collapsed to one index.

    Whatever is returned in register C, the acceptance is capped by the
    squared norm of the reference's component on that index; the cap is met
    by returning the matching branch itself.
    """
    if inst.protocol != MULTIPICTURE:
        raise InvalidIndex(f"instance protocol is {inst.protocol!r}, not multipicture")
    block = {k: a for k, a in inst.reference.amps.items() if k[0] == collapsed_b}
    if not block:
        raise InvalidIndex(f"no branch with index label {collapsed_b!r}")
    best_accept = sum(abs(a) ** 2 for a in block.values())
    scale = 1.0 / math.sqrt(best_accept)
    best_state = SparseState({k: a * scale for k, a in block.items()})
    return best_accept, best_state


def random_partition(labels: Sequence[Label], rng: np.random.Generator) -> ProjPartition:
    """Random assignment of labels to between 1 and len(labels) outcomes."""
    labels = sorted(labels)
    n_cells = int(rng.integers(1, len(labels) + 1))
    assignment = rng.integers(0, n_cells, size=len(labels))
    return ProjPartition(
        {label: f"cell{cell}" for label, cell in zip(labels, assignment)}
    )


def random_strategy_sweep(
    inst: SealedInstance, trials: int, rng_seed: int
) -> list[CheatReport]:
    """Stress the bound with random unitaries and random partitions.

    Trial t is seeded with rng_seed + t, so sweeps are reproducible and
    trials could be evaluated independently.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    labels = sorted(inst.reference.c_labels())
    joint_dim = len(inst.reference.b_labels()) * len(labels)
    if joint_dim > DENSE_DIM_CAP:
        raise DimensionTooLarge(
            f"sweep joint dimension {joint_dim} exceeds cap {DENSE_DIM_CAP}"
        )
    reports = []
    for t in range(trials):
        rng = np.random.default_rng(rng_seed + t)
        u = random_unitary(labels, rng)
        partition = random_partition(labels, rng)
        reports.append(strategy_report(inst, u, partition))
    return reports


@dataclass(frozen=True)
class ProofChain:
    """The four quantities whose chain of inequalities backs the bound.

    acceptance_gap <= trace_distance <= convex_sum <= closed_form, each
    within numerical tolerance.
    """

    acceptance_gap: float
    trace_distance: float
    convex_sum: float
    closed_form: float

    def holds(self, tol: float = 1e-8) -> bool:
        return (
            self.acceptance_gap <= self.trace_distance + tol
            and self.trace_distance <= self.convex_sum + tol
            and self.convex_sum <= self.closed_form + tol
        )


def proof_chain(inst: SealedInstance, report: CheatReport) -> ProofChain:
    """Evaluate the inequality chain for one report (dense step included).

    Raises DimensionTooLarge when the joint active basis exceeds the dense
    eigensolver cap.
    """
    reference = inst.reference
    acceptance_gap = report.s - inst.completeness_error
    distance = trace_distance_pure_vs_ensemble(reference, report.returned)
    convex = sum(
        q * trace_distance_pure(reference, member)
        for q, member in report.returned.members
    )
    closed = soundness_bound(report.p_bound)
    return ProofChain(acceptance_gap, distance, convex, closed)
