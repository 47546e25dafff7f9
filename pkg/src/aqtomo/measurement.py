"""Finite-shot measurement simulation: Born-rule sampling and POVM families.

Randomness is driven by :class:`SeededRng`, a (seed, stream_id) pair mapped
onto ``numpy``'s PCG64 through ``SeedSequence(seed, spawn_key=(stream_id,))``.
Identical pairs reproduce identical count sequences across runs; concurrent
trials get disjoint stream ids and never share randomness.  Multinomial
sampling itself is numpy's sequential conditional-binomial routine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import DimensionError, as_generator
from .quantum_objects import DensityMatrix, Povm, born_probabilities, pure_state

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class SeededRng:
    """Reproducible randomness source keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome counts for one POVM applied ``shots`` times to one state.

    ``null_count`` absorbs the missing probability mass when a sub-unit
    pseudo-state is measured; counts plus null always sum to ``shots``.
    """

    counts: np.ndarray
    shots: int
    povm_id: str = ""
    null_count: int = 0

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or np.any(counts < 0):
            raise ValueError("counts must be a vector of non-negative integers")
        if int(counts.sum()) + self.null_count != self.shots:
            raise ValueError("counts + null_count must equal shots")
        object.__setattr__(self, "counts", counts)

    @property
    def frequencies(self) -> np.ndarray:
        if self.shots == 0:
            return np.zeros(self.counts.shape[0])
        return self.counts / self.shots


def sample_counts(probs, shots: int, rng) -> np.ndarray:
    """Multinomial counts over the declared outcomes of a probability vector.

    Probabilities may sum to less than 1; the residual mass goes to an
    implicit null outcome whose count is ``shots - counts.sum()``.
    """
    p = np.asarray(probs, dtype=float)
    if np.any(p < -1e-9):
        raise ValueError(f"negative probability {p.min()}")
    p = np.clip(p, 0.0, None)
    total = float(p.sum())
    if total > 1.0 + 1e-9:
        raise ValueError(f"probabilities sum to {total} > 1")
    if total > 1.0:  # 1e-9-level float overshoot only
        p = p / total
        total = 1.0
    if shots == 0:
        return np.zeros(p.shape[0], dtype=np.int64)
    gen = as_generator(rng)
    full = np.append(p, max(1.0 - total, 0.0))
    return gen.multinomial(shots, full)[: p.shape[0]].astype(np.int64)


def _single_qubit_cube():
    povms = []
    for label, sigma in (("x", SIGMA_X), ("y", SIGMA_Y), ("z", SIGMA_Z)):
        plus = (np.eye(2) + sigma) / 2.0
        minus = (np.eye(2) - sigma) / 2.0
        povms.append(Povm((plus, minus), name=f"cube-{label}"))
    return povms


@lru_cache(maxsize=None)
def cube_povm(n_qubits: int):
    """All 3^n Pauli-eigenbasis POVMs on n qubits, each with 2^n elements.

    Settings are lexicographic over axis strings (x, y, z)^n and elements
    lexicographic over outcome signs, so ordering is stable across runs.
    """
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    singles = _single_qubit_cube()
    povms = []
    for combo in itertools.product(singles, repeat=n_qubits):
        elements = []
        for parts in itertools.product(*(p.elements for p in combo)):
            acc = parts[0]
            for factor in parts[1:]:
                acc = np.kron(acc, factor)
            elements.append(acc)
        name = "".join(p.name[-1] for p in combo)
        povms.append(Povm(tuple(elements), name=f"cube-{name}"))
    return tuple(povms)


def measure_state(rho: DensityMatrix, povm: Povm, shots: int, rng) -> MeasurementRecord:
    """Sample ``shots`` Born-rule outcomes of ``povm`` on ``rho``.

    For sub-unit pseudo-states the missing trace shows up as the record's
    null outcome.
    """
    probs = born_probabilities(rho, povm)
    counts = sample_counts(probs, shots, rng)
    return MeasurementRecord(
        counts=counts,
        shots=shots,
        povm_id=povm.name,
        null_count=shots - int(counts.sum()),
    )


def random_pure_probes(count: int, d: int, rng) -> list:
    """Haar-random pure probe states |psi><psi|.

    Normalized complex Gaussian vectors are Haar-uniform on the sphere, which
    is all a rank-1 probe needs.
    """
    gen = as_generator(rng)
    probes = []
    for _ in range(count):
        v = gen.standard_normal(d) + 1j * gen.standard_normal(d)
        probes.append(pure_state(v))
    return probes


def state_sampler(rho: DensityMatrix):
    """Measurement oracle hiding ``rho``: callable (povm, shots, rng) -> record."""

    def sample(povm: Povm, shots: int, rng) -> MeasurementRecord:
        if povm.dim != rho.dim:
            raise DimensionError("POVM dimension does not match the hidden state")
        return measure_state(rho, povm, shots, rng)

    return sample


@dataclass(frozen=True)
class ExactRecord:
    """Noise-free record whose frequencies equal the Born probabilities.

    Stands in for a :class:`MeasurementRecord` in the infinite-copy limit;
    estimators fed exact records must recover the true object exactly.
    """

    probabilities: np.ndarray
    shots: int = 1
    povm_id: str = ""

    @property
    def counts(self) -> np.ndarray:
        return self.probabilities

    @property
    def frequencies(self) -> np.ndarray:
        return np.asarray(self.probabilities, dtype=float)

    @property
    def null_count(self) -> float:
        return self.shots - float(np.sum(self.probabilities))


def exact_state_sampler(rho: DensityMatrix):
    """Zero-noise oracle: ignores the shot budget and returns exact records."""

    def sample(povm: Povm, shots: int, rng=None) -> ExactRecord:
        return ExactRecord(born_probabilities(rho, povm), shots=max(shots, 1), povm_id=povm.name)

    return sample


def exact_detector_sampler(povm: Povm):
    """Zero-noise probe oracle for detector tomography."""

    def sample(probe: DensityMatrix, shots: int, rng=None) -> ExactRecord:
        return ExactRecord(born_probabilities(probe, povm), shots=max(shots, 1))

    return sample


def detector_sampler(povm: Povm):
    """Probe oracle hiding a detector: callable (probe, shots, rng) -> record."""

    def sample(probe: DensityMatrix, shots: int, rng) -> MeasurementRecord:
        return measure_state(probe, povm, shots, rng)

    return sample
