"""Builders and decoders for the three cluster-assignment circuits.

* QC1 interferes one record with one centroid; the ancilla's post-selected
  |0> frequency encodes their squared Euclidean distance.
* QC2 loads one record against all k centroids in superposition over a
  cluster register; the most frequent cluster pattern is the assignment.
* QC3 additionally batches M1 records over a batch register, assigning every
  record in the batch from a single circuit.

All three share the interference skeleton: H on the ancilla, uniform
superposition over the addressing registers, amplitude-encode the record(s)
in the ancilla-0 branch and the centroid(s) in the ancilla-1 branch, final H
on the ancilla.  Decoding post-selects the encoding register qubit on 1 and
the ancilla on 0, then discards patterns that do not address anything
actually loaded (non-power-of-two record or cluster counts leave such slots
empty).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .encoding import EncodingContext, encode_vector
from .simulator import (
    Analytic,
    Gate,
    Histogram,
    MeasureMode,
    StateVector,
    apply_circuit,
    h,
    measure,
    new_state,
    probabilities,
)


class EstimationFailure(RuntimeError):
    """No usable shots survived post-selection; the caller must raise t."""


@dataclass(frozen=True)
class Layout:
    """Qubit assignment for an assignment circuit.

    Order: ancilla, index register, batch register (QC3 only), encoding
    register qubit, cluster register (QC2/QC3 only).
    """

    ancilla: int
    index: tuple[int, ...]
    batch: tuple[int, ...]
    register: int
    cluster: tuple[int, ...]

    @property
    def num_qubits(self) -> int:
        return 2 + len(self.index) + len(self.batch) + len(self.cluster)


def _make_layout(n_index: int, n_batch: int = 0, n_cluster: int = 0) -> Layout:
    pos = 0
    ancilla = pos
    pos += 1
    index = tuple(range(pos, pos + n_index))
    pos += n_index
    batch = tuple(range(pos, pos + n_batch))
    pos += n_batch
    register = pos
    pos += 1
    cluster = tuple(range(pos, pos + n_cluster))
    return Layout(ancilla, index, batch, register, cluster)


@dataclass
class CircuitPlan:
    """An ordered gate list plus the register layout it acts on."""

    layout: Layout
    gates: list[Gate] = field(default_factory=list)
    num_records: int = 1
    num_clusters: int = 1

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits


def _check_angles(angles, n_index: int, what: str) -> np.ndarray:
    angles = np.asarray(angles, dtype=float)
    if angles.shape[-1] != (1 << n_index):
        raise ValueError(
            f"{what} needs {1 << n_index} angle slots, got {angles.shape[-1]}"
        )
    return angles


def build_qc1(record_angles, centroid_angles, n_index: int) -> CircuitPlan:
    """Pairwise-distance circuit: 1 + n_index + 1 qubits."""
    record_angles = _check_angles(record_angles, n_index, "record")
    centroid_angles = _check_angles(centroid_angles, n_index, "centroid")
    layout = _make_layout(n_index)
    plan = CircuitPlan(layout)
    plan.gates.append(h(layout.ancilla))
    plan.gates.extend(h(q) for q in layout.index)
    encode_vector(plan, record_angles, EncodingContext(
        layout.index, layout.register, ((layout.ancilla, 0),)))
    encode_vector(plan, centroid_angles, EncodingContext(
        layout.index, layout.register, ((layout.ancilla, 1),)))
    plan.gates.append(h(layout.ancilla))
    return plan


def build_qc2(record_angles, centroids_angles, n_index: int,
              n_cluster: int) -> CircuitPlan:
    """One-record-vs-k-centroids circuit: 1 + n_index + 1 + n_cluster qubits.

    The record rotations are controlled by the ancilla only; each centroid's
    rotations carry its cluster bit pattern as extra controls.
    """
    record_angles = _check_angles(record_angles, n_index, "record")
    centroids_angles = _check_angles(centroids_angles, n_index, "centroids")
    k = centroids_angles.shape[0]
    if k > (1 << n_cluster):
        raise ValueError(f"{k} centroids do not fit in {n_cluster} cluster qubits")
    layout = _make_layout(n_index, n_cluster=n_cluster)
    plan = CircuitPlan(layout, num_clusters=k)
    plan.gates.append(h(layout.ancilla))
    plan.gates.extend(h(q) for q in layout.index)
    plan.gates.extend(h(q) for q in layout.cluster)
    encode_vector(plan, record_angles, EncodingContext(
        layout.index, layout.register, ((layout.ancilla, 0),)))
    for j in range(k):
        pattern = tuple((qb, (j >> b) & 1) for b, qb in enumerate(layout.cluster))
        encode_vector(plan, centroids_angles[j], EncodingContext(
            layout.index, layout.register, ((layout.ancilla, 1),) + pattern))
    plan.gates.append(h(layout.ancilla))
    return plan


def build_qc3(records_angles, centroids_angles, n_index: int, n_batch: int,
              n_cluster: int) -> CircuitPlan:
    """Batched circuit: 1 + n_index + n_batch + 1 + n_cluster qubits.

    Record v's rotations carry v's bit pattern on the batch register (and are
    not controlled by the cluster register); centroids are loaded once, with
    cluster-pattern controls only.
    """
    records_angles = _check_angles(records_angles, n_index, "records")
    centroids_angles = _check_angles(centroids_angles, n_index, "centroids")
    m1 = records_angles.shape[0]
    k = centroids_angles.shape[0]
    if m1 > (1 << n_batch):
        raise ValueError(f"{m1} records do not fit in {n_batch} batch qubits")
    if k > (1 << n_cluster):
        raise ValueError(f"{k} centroids do not fit in {n_cluster} cluster qubits")
    layout = _make_layout(n_index, n_batch=n_batch, n_cluster=n_cluster)
    plan = CircuitPlan(layout, num_records=m1, num_clusters=k)
    plan.gates.append(h(layout.ancilla))
    plan.gates.extend(h(q) for q in layout.index)
    plan.gates.extend(h(q) for q in layout.batch)
    plan.gates.extend(h(q) for q in layout.cluster)
    for v in range(m1):
        pattern = tuple((qb, (v >> b) & 1) for b, qb in enumerate(layout.batch))
        encode_vector(plan, records_angles[v], EncodingContext(
            layout.index, layout.register, ((layout.ancilla, 0),) + pattern))
    for j in range(k):
        pattern = tuple((qb, (j >> b) & 1) for b, qb in enumerate(layout.cluster))
        encode_vector(plan, centroids_angles[j], EncodingContext(
            layout.index, layout.register, ((layout.ancilla, 1),) + pattern))
    plan.gates.append(h(layout.ancilla))
    return plan


def simulate(plan: CircuitPlan) -> StateVector:
    return apply_circuit(new_state(plan.num_qubits), plan.gates)


def execute(plan: CircuitPlan, mode: MeasureMode) -> Histogram:
    """Run the plan and measure all qubits under the given mode."""
    return measure(simulate(plan), mode)


def estimate_distance(plan: CircuitPlan, hist: Histogram) -> tuple[float, float]:
    """Distance estimate from a QC1 histogram.

    Post-selects the register qubit on 1, takes the surviving ancilla-0
    frequency p and returns (sqrt(max(0, 4 - 4p)), kept shots).  This is the
    distance between the encoded (projected) unit vectors.
    """
    layout = plan.layout
    kept = hist.postselect([(layout.register, 1)])
    t_prime = kept.shots
    if t_prime <= 0.0:
        raise EstimationFailure("no shots survived register post-selection")
    zeros = kept.postselect([(layout.ancilla, 0)]).shots
    p_hat = zeros / t_prime
    return math.sqrt(max(0.0, 4.0 - 4.0 * p_hat)), t_prime


@dataclass
class AssignmentHistogram:
    """Meaningful (record slot -> cluster -> weight) counts of an assignment
    circuit run, after post-selection and pattern filtering."""

    per_record: dict[int, dict[int, float]]
    kept_shots: float
    wasted_fraction: float


def assignment_histogram(plan: CircuitPlan, hist: Histogram) -> AssignmentHistogram:
    """Post-select register=1 and ancilla=0, then bucket the surviving counts
    by (record slot, cluster), discarding patterns beyond the loaded counts."""
    layout = plan.layout
    total = hist.shots
    kept = hist.postselect([(layout.register, 1), (layout.ancilla, 0)])
    per_record: dict[int, dict[int, float]] = {}
    meaningful = 0.0
    for basis, weight in kept.counts.items():
        v = 0
        for b, qb in enumerate(layout.batch):
            v |= ((basis >> qb) & 1) << b
        j = 0
        for b, qb in enumerate(layout.cluster):
            j |= ((basis >> qb) & 1) << b
        if v >= plan.num_records or j >= plan.num_clusters:
            continue
        meaningful += weight
        per_record.setdefault(v, {})
        per_record[v][j] = per_record[v].get(j, 0.0) + weight
    wasted = 1.0 - meaningful / total if total > 0 else 1.0
    return AssignmentHistogram(per_record, meaningful, wasted)


def _argmax_label(cluster_counts: dict[int, float], k: int) -> int:
    best_j, best_w = 0, -1.0
    for j in range(k):
        w = cluster_counts.get(j, 0.0)
        if w > best_w:
            best_j, best_w = j, w
    return best_j


def decode_qc2(plan: CircuitPlan, hist: Histogram) -> int:
    """Most frequent meaningful cluster pattern; ties break to the lowest
    index.  Raises EstimationFailure if nothing survives."""
    buckets = assignment_histogram(plan, hist)
    if buckets.kept_shots <= 0.0:
        raise EstimationFailure("no meaningful shots for cluster assignment")
    return _argmax_label(buckets.per_record.get(0, {}), plan.num_clusters)


def decode_qc3(plan: CircuitPlan, hist: Histogram) -> list[int | None]:
    """Per-record most frequent cluster; record slots with zero surviving
    counts come back as None for the caller to reassign."""
    buckets = assignment_histogram(plan, hist)
    labels: list[int | None] = []
    for v in range(plan.num_records):
        counts = buckets.per_record.get(v)
        if not counts:
            labels.append(None)
        else:
            labels.append(_argmax_label(counts, plan.num_clusters))
    return labels


def postselection_probability(plan: CircuitPlan, qubit: int | None = None,
                              value: int = 1) -> float:
    """Exact probability that ``qubit`` (default: the encoding register)
    measures ``value`` in the final state."""
    if qubit is None:
        qubit = plan.layout.register
    probs = probabilities(simulate(plan))
    basis = np.arange(probs.shape[0])
    return float(probs[((basis >> qubit) & 1) == value].sum())


@dataclass(frozen=True)
class CircuitStats:
    qubits: int
    gate_count: int
    depth: int


def circuit_stats(plan: CircuitPlan) -> CircuitStats:
    """Qubit, gate and depth counts of the plan as built.

    Depth schedules two gates in the same layer iff their qubit sets
    (target plus controls) are disjoint.
    """
    levels: dict[int, int] = {}
    depth = 0
    for gate in plan.gates:
        qubits = gate.qubits
        level = 1 + max((levels.get(q, 0) for q in qubits), default=0)
        for q in qubits:
            levels[q] = level
        depth = max(depth, level)
    return CircuitStats(plan.num_qubits, len(plan.gates), depth)
