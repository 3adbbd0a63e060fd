"""Dense statevector over at most 16 qubits.

The state is an ``n``-dimensional array of shape ``(2,) * n``. Axis ``k``
belongs to the ``k``-th live handle in allocation order; measuring a qubit
removes its axis, so the remaining axes keep their relative order.
"""

from __future__ import annotations

import math

import numpy as np

from qimp.sim.errors import QImpRuntimeError
from qimp.sim.rng import ShotRng

CAPACITY = 16
_R2 = 1 / math.sqrt(2)

GATES = {
    "h": np.array([[_R2, _R2], [_R2, -_R2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "t": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
}


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


class QuantumState:
    def __init__(self, rng: ShotRng | None = None, capacity: int = CAPACITY):
        self.amps = np.ones((), dtype=complex)
        self.wires: list[int] = []  # handle at each axis
        self.dead: set[int] = set()
        self.next_handle = 0
        self.capacity = capacity
        self.rng = rng if rng is not None else ShotRng(0)

    @property
    def n(self) -> int:
        return len(self.wires)

    def is_live(self, h: int) -> bool:
        return h in self.wires

    def _axis(self, h: int) -> int:
        try:
            return self.wires.index(h)
        except ValueError:
            raise QImpRuntimeError("UseAfterFree", f"qubit #{h} is no longer alive") from None

    def alloc(self) -> int:
        if self.n >= self.capacity:
            raise QImpRuntimeError("CapacityExceeded", f"more than {self.capacity} live qubits")
        new = np.zeros(self.amps.shape + (2,), dtype=complex)
        new[..., 0] = self.amps
        self.amps = new
        h = self.next_handle
        self.next_handle += 1
        self.wires.append(h)
        return h

    def apply(self, gate: str, targets, theta: float | None = None):
        if len(set(targets)) != len(targets):
            raise QImpRuntimeError("DoubleBorrowAlias", f"{gate} applied to the same qubit twice")
        axes = [self._axis(h) for h in targets]
        if gate in ("cx", "cz"):
            c, t = axes
            sl = [slice(None)] * self.n
            sl[c] = 1
            sl[t] = 1
            i11 = tuple(sl)
            if gate == "cz":
                self.amps[i11] *= -1
            else:
                sl[t] = 0
                i10 = tuple(sl)
                tmp = self.amps[i10].copy()
                self.amps[i10] = self.amps[i11]
                self.amps[i11] = tmp
            return
        m = rz_matrix(theta) if gate == "rz" else GATES[gate]
        (k,) = axes
        pre = (slice(None),) * k
        a = self.amps[pre + (0,)]
        b = self.amps[pre + (1,)]
        na = m[0, 0] * a + m[0, 1] * b
        nb = m[1, 0] * a + m[1, 1] * b
        self.amps[pre + (0,)] = na
        self.amps[pre + (1,)] = nb

    def prob_one(self, h: int) -> float:
        k = self._axis(h)
        sub = self.amps[(slice(None),) * k + (1,)]
        return float(np.vdot(sub, sub).real)

    def measure(self, h: int) -> int:
        """Destructive measurement: samples a bit and removes the qubit."""
        k = self._axis(h)
        p1 = self.prob_one(h)
        bit = 1 if self.rng.uniform() < p1 else 0
        keep = self.amps[(slice(None),) * k + (bit,)]
        p = p1 if bit else 1.0 - p1
        self.amps = np.array(keep / math.sqrt(p))
        self.wires.pop(k)
        self.dead.add(h)
        return bit

    def discard(self, h: int) -> None:
        self.measure(h)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps.ravel()))

    def vector(self) -> np.ndarray:
        """Amplitudes as a flat vector; the first live handle is the most significant bit."""
        return self.amps.reshape(-1).copy()


def apply_gate(state: QuantumState, gate: str, targets, theta: float | None = None) -> QuantumState:
    state.apply(gate, list(targets), theta)
    return state


def measure_qubit(state: QuantumState, target: int) -> tuple[int, QuantumState]:
    return state.measure(target), state
