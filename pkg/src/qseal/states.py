"""Sparse bipartite pure states and the exact linear algebra behind the protocol analyses.

States live on two registers: register B stays with the sealer, register C is
handed over. Basis labels are opaque strings, and amplitudes are stored as a
sparse map from (b_label, c_label) to a complex number. Encodings whose label
space is exponentially large but whose support is small therefore stay exact
and cheap.

Dense linear algebra (the mixed-state trace distance) is confined to the span
of the labels actually in use and capped at ``DENSE_DIM_CAP`` dimensions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

Label = str

NORM_TOL = 1e-9
PRUNE_TOL = 1e-15
LOAD_NORM_TOL = 1e-6
DENSE_DIM_CAP = 512
UNITARY_TOL = 1e-9


class StateError(Exception):
    """Base class for state-level failures."""


class DimensionTooLarge(StateError):
    """A dense computation would exceed the supported dimension cap."""


class UnknownLabel(StateError):
    """A unitary declared total does not cover a label the state uses."""


class UncoveredLabel(StateError):
    """A measurement partition does not cover a label the state uses."""


@dataclass(frozen=True)
class SparseState:
    """Normalized pure state on registers B and C, stored sparsely.

    ``amps`` maps (b_label, c_label) pairs to complex amplitudes. Amplitudes
    below ``PRUNE_TOL`` in modulus are dropped at construction; the remaining
    amplitudes must have squared moduli summing to 1 within ``NORM_TOL``.
    Instances are treated as immutable.
    """

    amps: dict[tuple[Label, Label], complex]

    def __post_init__(self) -> None:
        pruned = {
            key: complex(a)
            for key, a in self.amps.items()
            if abs(a) >= PRUNE_TOL
        }
        total = sum(abs(a) ** 2 for a in pruned.values())
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(
                f"state is not normalized: sum of squared moduli is {total!r}"
            )
        object.__setattr__(self, "amps", pruned)

    @classmethod
    def uniform(cls, keys: Iterable[tuple[Label, Label]]) -> "SparseState":
        """Equal-amplitude superposition of the given (b, c) basis pairs."""
        keys = list(keys)
        amp = 1.0 / math.sqrt(len(keys))
        return cls({key: amp for key in keys})

    def b_labels(self) -> set[Label]:
        return {b for b, _ in self.amps}

    def c_labels(self) -> set[Label]:
        return {c for _, c in self.amps}

    def b_weights(self) -> dict[Label, float]:
        """Probability of each B label under a computational-basis readout."""
        weights: dict[Label, float] = {}
        for (b, _), a in self.amps.items():
            weights[b] = weights.get(b, 0.0) + abs(a) ** 2
        return weights

    def max_abs_diff(self, other: "SparseState") -> float:
        """Largest amplitude-wise deviation from ``other``."""
        keys = set(self.amps) | set(other.amps)
        return max(
            abs(self.amps.get(k, 0.0) - other.amps.get(k, 0.0)) for k in keys
        )


@dataclass(frozen=True)
class Ensemble:
    """Mixture of pure states with outcome probabilities as weights."""

    members: tuple[tuple[float, SparseState], ...]

    def __post_init__(self) -> None:
        members = tuple((float(q), state) for q, state in self.members)
        if any(q < 0.0 for q, _ in members):
            raise ValueError("ensemble weights must be nonnegative")
        total = sum(q for q, _ in members)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"ensemble weights sum to {total!r}, expected 1")
        object.__setattr__(self, "members", members)

    @classmethod
    def pure(cls, state: SparseState) -> "Ensemble":
        return cls(((1.0, state),))


@dataclass(frozen=True)
class LocalUnitary:
    """Unitary acting on register C over an explicit label basis.

    ``matrix[j, i]`` is the amplitude sent from basis label i to basis label j.
    Labels outside ``basis`` are left alone (identity extension); the basis may
    also list labels the state has no support on, which is how callers bring
    ancilla-style work labels into register C.
    """

    basis: tuple[Label, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        n = len(self.basis)
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match basis size {n}")
        if len(set(self.basis)) != n:
            raise ValueError("basis labels must be distinct")
        defect = np.abs(m.conj().T @ m - np.eye(n)).max() if n else 0.0
        if defect > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (defect {defect:.3e})")
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, labels: Iterable[Label]) -> "LocalUnitary":
        labels = tuple(labels)
        return cls(labels, np.eye(len(labels), dtype=np.complex128))

    def adjoint(self) -> "LocalUnitary":
        return LocalUnitary(self.basis, self.matrix.conj().T)


@dataclass(frozen=True)
class ProjPartition:
    """Partition of C labels into named projective-measurement outcomes."""

    outcome_of: dict[Label, Label]

    @classmethod
    def finest(cls, labels: Iterable[Label]) -> "ProjPartition":
        """One outcome per label, named after the label itself."""
        return cls({label: label for label in labels})

    @classmethod
    def from_groups(cls, groups: Mapping[Label, Iterable[Label]]) -> "ProjPartition":
        outcome_of: dict[Label, Label] = {}
        for outcome, labels in groups.items():
            for label in labels:
                if label in outcome_of:
                    raise ValueError(f"label {label!r} assigned to two outcomes")
                outcome_of[label] = outcome
        return cls(outcome_of)


def inner_product(a: SparseState, b: SparseState) -> complex:
    """<a|b> over the shared support."""
    small, big, conj_small = (
        (a.amps, b.amps, True) if len(a.amps) <= len(b.amps) else (b.amps, a.amps, False)
    )
    total = 0.0 + 0.0j
    for key, amp in small.items():
        other = big.get(key)
        if other is None:
            continue
        total += amp.conjugate() * other if conj_small else other.conjugate() * amp
    return total


def squared_overlap(a: SparseState, b: SparseState) -> float:
    """|<a|b>|^2 divided by both squared norms, cancelling representation round-off."""
    raw = abs(inner_product(a, b)) ** 2
    norms = inner_product(a, a).real * inner_product(b, b).real
    return raw / norms


def trace_distance_pure(a: SparseState, b: SparseState) -> float:
    """Trace distance between two pure states, sqrt(1 - |<a|b>|^2)."""
    return math.sqrt(max(0.0, 1.0 - squared_overlap(a, b)))


def hermitian_eigenvalues(
    matrix: np.ndarray, *, off_tol: float = 1e-12, max_sweeps: int = 100
) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps run until every off-diagonal magnitude drops below ``off_tol``.
    Returns the eigenvalues in ascending order.
    """
    a = np.array(matrix, dtype=np.complex128)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError("matrix must be square")
    if n > DENSE_DIM_CAP:
        raise DimensionTooLarge(f"dimension {n} exceeds cap {DENSE_DIM_CAP}")
    if n <= 1:
        return a.real.reshape(-1)[:1].copy()

    skip_tol = off_tol * 1e-2
    for _ in range(max_sweeps):
        if np.abs(np.triu(a, 1)).max() < off_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                mag = abs(a[p, q])
                if mag < skip_tol:
                    continue
                phase = a[p, q] / mag
                # Twiddle so the pivot becomes real, then rotate it away.
                a[:, q] *= phase.conjugate()
                a[q, :] *= phase
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                a[[p, q], :] = rot.T @ a[[p, q], :]
                a[:, [p, q]] = a[:, [p, q]] @ rot
        a = (a + a.conj().T) / 2.0
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    return np.sort(a.diagonal().real)


def _joint_basis(psi: SparseState, sigma: Ensemble) -> list[tuple[Label, Label]]:
    keys = set(psi.amps)
    for _, member in sigma.members:
        keys |= set(member.amps)
    return sorted(keys)


def _dense_vector(state: SparseState, index: dict[tuple[Label, Label], int]) -> np.ndarray:
    v = np.zeros(len(index), dtype=np.complex128)
    for key, a in state.amps.items():
        v[index[key]] = a
    return v


def trace_distance_pure_vs_ensemble(psi: SparseState, sigma: Ensemble) -> float:
    """Trace distance between |psi><psi| and the ensemble's density operator.

    Builds both density matrices on the joint active basis and feeds their
    difference to the Jacobi eigensolver; half the absolute eigenvalue sum is
    the trace distance.

    Raises:
        DimensionTooLarge: the joint active basis exceeds ``DENSE_DIM_CAP``.
    """
    basis = _joint_basis(psi, sigma)
    if len(basis) > DENSE_DIM_CAP:
        raise DimensionTooLarge(
            f"joint basis has dimension {len(basis)}, cap is {DENSE_DIM_CAP}"
        )
    index = {key: i for i, key in enumerate(basis)}
    v = _dense_vector(psi, index)
    delta = np.outer(v, v.conj())
    for q, member in sigma.members:
        if q == 0.0:
            continue
        w = _dense_vector(member, index)
        delta -= q * np.outer(w, w.conj())
    eigs = hermitian_eigenvalues(delta)
    return min(1.0, max(0.0, 0.5 * float(np.abs(eigs).sum())))


def apply_unitary_c(s: SparseState, u: LocalUnitary, *, total: bool = False) -> SparseState:
    """Apply ``u`` to register C, leaving register B untouched.

    Labels outside ``u.basis`` ride along unchanged unless ``total`` is set,
    in which case support on an uncovered label raises ``UnknownLabel``.
    """
    col_of = {label: i for i, label in enumerate(u.basis)}
    out: dict[tuple[Label, Label], complex] = {}
    for (b, c), a in s.amps.items():
        i = col_of.get(c)
        if i is None:
            if total:
                raise UnknownLabel(f"C label {c!r} is not covered by the unitary")
            out[(b, c)] = out.get((b, c), 0.0) + a
            continue
        column = u.matrix[:, i]
        for j in np.nonzero(np.abs(column) >= PRUNE_TOL)[0]:
            key = (b, u.basis[j])
            out[key] = out.get(key, 0.0) + column[j] * a
    return SparseState(out)


def collapse_branches(
    s: SparseState, p: ProjPartition
) -> dict[Label, tuple[float, SparseState]]:
    """Exact outcome probabilities and renormalized post-states for a partition.

    Raises:
        UncoveredLabel: the state has support on a label the partition omits.
    """
    buckets: dict[Label, dict[tuple[Label, Label], complex]] = {}
    for (b, c), a in s.amps.items():
        outcome = p.outcome_of.get(c)
        if outcome is None:
            raise UncoveredLabel(f"C label {c!r} is not covered by the partition")
        buckets.setdefault(outcome, {})[(b, c)] = a
    branches: dict[Label, tuple[float, SparseState]] = {}
    for outcome, amps in buckets.items():
        prob = sum(abs(a) ** 2 for a in amps.values())
        if prob <= 0.0:
            continue
        scale = 1.0 / math.sqrt(prob)
        post = SparseState({key: a * scale for key, a in amps.items()})
        branches[outcome] = (prob, post)
    return branches


def measure_partition(
    s: SparseState, p: ProjPartition, rng_seed: int
) -> tuple[Label, SparseState, dict[Label, float]]:
    """Sample one projective outcome; deterministic for a fixed ``rng_seed``.

    Returns the sampled outcome label, the renormalized post-state, and the
    exact outcome distribution.
    """
    branches = collapse_branches(s, p)
    distribution = {outcome: prob for outcome, (prob, _) in branches.items()}
    outcomes = sorted(distribution)
    total = sum(distribution[o] for o in outcomes)
    draw = np.random.default_rng(rng_seed).random() * total
    acc = 0.0
    sampled = outcomes[-1]
    for outcome in outcomes:
        acc += distribution[outcome]
        if draw < acc:
            sampled = outcome
            break
    return sampled, branches[sampled][1], distribution


def project_accept_probability(reference: SparseState, returned: Ensemble) -> float:
    """Probability that projecting the returned state onto ``reference`` accepts.

    Sum over members of weight times squared overlap. Overlaps are divided by
    the computed squared norms and the total is clamped to [0, 1], so an
    untouched reference is accepted with probability exactly 1.
    """
    ref_norm = inner_product(reference, reference).real
    total = 0.0
    for q, state in returned.members:
        if q == 0.0:
            continue
        raw = abs(inner_product(reference, state)) ** 2
        total += q * raw / (ref_norm * inner_product(state, state).real)
    return min(1.0, max(0.0, total))


def random_unitary(labels: Iterable[Label], rng: np.random.Generator | int) -> LocalUnitary:
    """Haar-ish random unitary from Gram-Schmidt on a seeded complex Gaussian."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    labels = tuple(labels)
    n = len(labels)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q = np.zeros_like(m)
    for j in range(n):
        v = m[:, j].copy()
        for _ in range(2):  # second pass keeps orthogonality at machine precision
            for i in range(j):
                v -= (q[:, i].conj() @ v) * q[:, i]
        q[:, j] = v / np.linalg.norm(v)
    return LocalUnitary(labels, q)


def state_to_dict(state: SparseState) -> dict:
    """JSON-ready form: {"amps": [[b, c, re, im], ...]} sorted by key."""
    rows = [
        [b, c, a.real, a.imag] for (b, c), a in sorted(state.amps.items())
    ]
    return {"amps": rows}


def state_from_dict(data: Mapping, *, norm_tol: float = LOAD_NORM_TOL) -> SparseState:
    """Rebuild a state from its JSON form, rejecting badly normalized input."""
    amps: dict[tuple[Label, Label], complex] = {}
    for b, c, re, im in data["amps"]:
        key = (str(b), str(c))
        if key in amps:
            raise ValueError(f"duplicate amplitude entry for {key}")
        amps[key] = complex(re, im)
    total = sum(abs(a) ** 2 for a in amps.values())
    if abs(total - 1.0) > norm_tol:
        raise ValueError(f"serialized state is not normalized (sum {total!r})")
    return SparseState(amps)


def state_to_json(state: SparseState) -> str:
    return json.dumps(state_to_dict(state))


def state_from_json(text: str) -> SparseState:
    return state_from_dict(json.loads(text))
