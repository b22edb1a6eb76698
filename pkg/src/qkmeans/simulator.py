"""Dense statevector simulator for the restricted gate set {H, X, RY}.

Conventions, used everywhere in this package:

* qubit ``j`` is bit ``j`` (least significant) of the basis-state index;
* ``RY(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]]``,
  so ``RY(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>``;
* controls carry an explicit polarity, so a gate can fire on a control
  being |0> without X-sandwiching it.

Multi-controlled gates are applied natively on the statevector (the control
pattern selects the amplitude pairs), never decomposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS = 26

_H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_X_MATRIX = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class Gate:
    """One gate: kind in {"h", "x", "ry"}, a target qubit and optional
    polarity-annotated controls ``((qubit, polarity), ...)``."""

    kind: str
    target: int
    theta: float = 0.0
    controls: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.kind not in ("h", "x", "ry"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if not math.isfinite(self.theta):
            raise ValueError("gate angle must be finite")
        cq = [q for q, _ in self.controls]
        if len(set(cq)) != len(cq):
            raise ValueError("control qubits must be pairwise distinct")
        if self.target in cq:
            raise ValueError("target qubit cannot also be a control")
        for _, pol in self.controls:
            if pol not in (0, 1):
                raise ValueError("control polarity must be 0 or 1")

    @property
    def qubits(self) -> set[int]:
        """All qubits the gate touches (target plus controls)."""
        return {self.target, *(q for q, _ in self.controls)}

    def matrix(self) -> np.ndarray:
        if self.kind == "h":
            return _H_MATRIX
        if self.kind == "x":
            return _X_MATRIX
        half = 0.5 * self.theta
        c, s = math.cos(half), math.sin(half)
        return np.array([[c, -s], [s, c]])


def h(target: int, controls=()) -> Gate:
    return Gate("h", target, controls=tuple(controls))


def x(target: int, controls=()) -> Gate:
    return Gate("x", target, controls=tuple(controls))


def ry(theta: float, target: int, controls=()) -> Gate:
    return Gate("ry", target, theta=theta, controls=tuple(controls))


@dataclass
class StateVector:
    """2^q complex amplitudes of a q-qubit register."""

    num_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())


def new_state(num_qubits: int) -> StateVector:
    """Fresh |0...0> state on ``num_qubits`` qubits (1 <= q <= 26)."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(
            f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}"
        )
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply ``gate`` to ``state`` in place and return it.

    The 2x2 block acts on the amplitude pairs whose control bits match the
    declared polarities; all other amplitudes are untouched.
    """
    q = state.num_qubits
    if not 0 <= gate.target < q:
        raise ValueError(f"target qubit {gate.target} out of range for {q} qubits")
    for cq, _ in gate.controls:
        if not 0 <= cq < q:
            raise ValueError(f"control qubit {cq} out of range for {q} qubits")

    base = 0
    control_qubits = set()
    for cq, pol in gate.controls:
        control_qubits.add(cq)
        base |= pol << cq

    free = [j for j in range(q) if j != gate.target and j not in control_qubits]
    offsets = np.arange(1 << len(free), dtype=np.int64)
    i0 = np.full(offsets.shape, base, dtype=np.int64)
    for b, pos in enumerate(free):
        i0 |= ((offsets >> b) & 1) << pos
    i1 = i0 | (1 << gate.target)

    (u00, u01), (u10, u11) = gate.matrix()
    amps = state.amplitudes
    a0 = amps[i0]
    a1 = amps[i1]
    amps[i0] = u00 * a0 + u01 * a1
    amps[i1] = u10 * a0 + u11 * a1
    return state


def apply_circuit(state: StateVector, gates) -> StateVector:
    for gate in gates:
        apply_gate(state, gate)
    return state


def probabilities(state: StateVector) -> np.ndarray:
    """|amplitude|^2 per basis state."""
    return np.abs(state.amplitudes) ** 2


@dataclass(frozen=True)
class Analytic:
    """Exact final-state distribution; the t -> infinity oracle."""


@dataclass(frozen=True)
class Sampled:
    """t i.i.d. shots drawn from the final-state distribution."""

    shots: int
    seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")


MeasureMode = Analytic | Sampled


@dataclass
class Histogram:
    """Counts of measured basis states over all qubits.

    ``counts`` maps basis index -> weight.  Sampled measurements produce
    integer-valued weights summing to the shot count; analytic measurements
    produce the exact probabilities (weights summing to 1), so post-selection
    and marginalization work identically in both modes.
    """

    num_qubits: int
    counts: dict[int, float] = field(default_factory=dict)

    @property
    def shots(self) -> float:
        return sum(self.counts.values())

    def postselect(self, conditions) -> "Histogram":
        """Keep only outcomes whose ``(qubit, bit)`` conditions all match."""
        kept = {}
        for basis, weight in self.counts.items():
            if all((basis >> qb) & 1 == bit for qb, bit in conditions):
                kept[basis] = weight
        return Histogram(self.num_qubits, kept)

    def marginal(self, qubits) -> "Histogram":
        """Sum counts over all qubits not listed; the result is keyed by the
        sub-pattern on ``qubits`` in the given order (qubits[0] -> bit 0)."""
        qubits = list(qubits)
        if len(set(qubits)) != len(qubits):
            raise ValueError("duplicate qubit index in marginal")
        out: dict[int, float] = {}
        for basis, weight in self.counts.items():
            key = 0
            for b, qb in enumerate(qubits):
                key |= ((basis >> qb) & 1) << b
            out[key] = out.get(key, 0.0) + weight
        return Histogram(len(qubits), out)


def measure(state: StateVector, mode: MeasureMode) -> Histogram:
    """Measure all qubits.

    Analytic mode returns the exact distribution; Sampled mode draws
    ``mode.shots`` i.i.d. outcomes, reproducibly for a fixed seed.  Partial
    measurement is realized downstream via ``postselect``/``marginal``.
    """
    probs = probabilities(state)
    if isinstance(mode, Analytic):
        counts = {int(b): float(p) for b, p in enumerate(probs) if p > 0.0}
        return Histogram(state.num_qubits, counts)
    rng = np.random.default_rng(mode.seed)
    draws = rng.multinomial(mode.shots, probs / probs.sum())
    nonzero = np.nonzero(draws)[0]
    counts = {int(b): float(draws[b]) for b in nonzero}
    return Histogram(state.num_qubits, counts)


def postselect(hist: Histogram, conditions) -> Histogram:
    return hist.postselect(conditions)


def marginal(hist: Histogram, qubits) -> Histogram:
    return hist.marginal(qubits)
