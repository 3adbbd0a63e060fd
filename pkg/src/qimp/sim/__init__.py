"""Statevector backend and the two interpreters used for differential testing."""

from qimp.sim.errors import KINDS, SAFETY_KINDS, QImpRuntimeError
from qimp.sim.imperative import run_imperative
from qimp.sim.ir_eval import CompiledProgram, run_ir
from qimp.sim.rng import ShotRng, shot_seed
from qimp.sim.statevector import QuantumState, apply_gate, measure_qubit
from qimp.sim.transcript import Shot, Transcript, first_divergence

__all__ = [
    "KINDS",
    "SAFETY_KINDS",
    "CompiledProgram",
    "QImpRuntimeError",
    "QuantumState",
    "Shot",
    "ShotRng",
    "Transcript",
    "apply_gate",
    "first_divergence",
    "measure_qubit",
    "run_imperative",
    "run_ir",
    "shot_seed",
]
