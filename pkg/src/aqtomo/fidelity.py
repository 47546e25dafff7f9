"""Fidelity and infidelity measures for states, POVM elements and processes.

The classical Uhlmann fidelity reports 1 for certain unequal operators once
they are trace-normalized (e.g. I/3 against I/4).  The corrected family used
here removes that distortion by subtracting a squared trace-mismatch term and
renormalizing the range back to [0, 1]:

    F_dp(A, B) = [Tr sqrt(sqrt(A) B sqrt(A))]^2 / (Tr(A) Tr(B))
    F_1(A, B)  = F_dp(A, B) - [Tr(B - A)]^2 / d^2
    F(A, B)    = (F_1 - f) / (1 - f)

where ``f`` is the tight lower bound of F_1 for the scenario at hand: 0 for
unit-trace states, 1/d - 1 for POVM elements on a d-dimensional space, and
-1 for process matrices of a d-dimensional system.  F equals 1 exactly when
the arguments are equal, and reduces to the Uhlmann fidelity for states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg
from .linalg import DimensionError, hermitian_eig, hermitian_part, matrix_sqrt

# eigenvalues of sqrt(A) B sqrt(A) may dip this far below zero from roundoff
_UHLMANN_EIG_SLOP = -1e-10


@dataclass(frozen=True)
class FidelityScenario:
    """Which tomography task a fidelity is evaluated for.

    ``dim`` is the POVM-element dimension for detectors and the system
    dimension d (not d^2) for processes; the trace-mismatch term divides by
    ``dim ** 2`` in both cases, which is what makes ``f_lower`` tight.
    """

    kind: str  # "state" | "detector_element" | "process"
    dim: int = 0

    def __post_init__(self):
        if self.kind not in ("state", "detector_element", "process"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.kind != "state" and self.dim < 2:
            raise ValueError("detector/process scenarios need dim >= 2")

    @property
    def f_lower(self) -> float:
        if self.kind == "state":
            return 0.0
        if self.kind == "detector_element":
            return 1.0 / self.dim - 1.0
        return -1.0


def state_scenario() -> FidelityScenario:
    return FidelityScenario("state")


def detector_scenario(d: int) -> FidelityScenario:
    return FidelityScenario("detector_element", d)


def process_scenario(d: int) -> FidelityScenario:
    return FidelityScenario("process", d)


def _check_pair(a: np.ndarray, b: np.ndarray):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError("fidelity needs two square matrices of equal size")
    return a, b


def _sqrt_eig_sum(inner: np.ndarray) -> float:
    """Tr sqrt of a numerically-PSD matrix, robust near rank deficiency.

    Eigenvalues below machine precision relative to the largest are exact
    zeros up to roundoff; taking their square roots would inject O(sqrt(eps))
    bias, so they are dropped.
    """
    w = hermitian_eig(inner).eigenvalues
    top = max(float(w[0]), 0.0)
    if w[-1] < _UHLMANN_EIG_SLOP * max(1.0, top):
        raise linalg.NotPSDError("fidelity operand is not PSD")
    cutoff = len(w) * np.finfo(float).eps * top
    w = np.where(w > cutoff, w, 0.0)
    return float(np.sum(np.sqrt(w)))


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Raw Uhlmann overlap [Tr sqrt(sqrt(a) b sqrt(a))]^2 for PSD a, b.

    Unit traces are not required; for density matrices this is the standard
    state fidelity, symmetric in its arguments.
    """
    a, b = _check_pair(a, b)
    ra = matrix_sqrt(a)
    inner = hermitian_part(ra @ b @ ra, check=False)
    return _sqrt_eig_sum(inner) ** 2


def fidelity_dp(hat_s: np.ndarray, s: np.ndarray) -> float:
    """Trace-normalized Uhlmann fidelity (the distortion-prone classic form)."""
    hat_s, s = _check_pair(hat_s, s)
    tr_hat = float(np.trace(hat_s).real)
    tr_s = float(np.trace(s).real)
    if tr_hat <= 0.0 or tr_s <= 0.0:
        raise ValueError("fidelity_dp needs positive traces")
    val = state_fidelity(hat_s, s) / (tr_hat * tr_s)
    return float(min(val, 1.0))


def fidelity_f1(hat_s: np.ndarray, s: np.ndarray, d: int) -> float:
    """Distortion-corrected fidelity F_dp - [Tr(s - hat_s)]^2 / d^2.

    Equals 1 iff the arguments are equal; ``d`` sets the normalization of
    the trace-mismatch penalty (see :class:`FidelityScenario`).
    """
    hat_s, s = _check_pair(hat_s, s)
    mismatch = float(np.trace(s - hat_s).real) ** 2 / d**2
    return fidelity_dp(hat_s, s) - mismatch


def fidelity(
    hat_s: np.ndarray, s: np.ndarray, scenario: FidelityScenario, clamp: bool = True
) -> float:
    """Scenario-normalized fidelity (F_1 - f) / (1 - f), clamped into [0, 1].

    For the state scenario both arguments must have unit trace, and the value
    coincides with :func:`state_fidelity` exactly.  ``clamp=False`` skips the
    final clamp that absorbs 1e-10-level roundoff overshoot, which is useful
    when diagnosing near-boundary values.
    """
    hat_s, s = _check_pair(hat_s, s)
    if scenario.kind == "state":
        if abs(np.trace(hat_s).real - 1.0) > 1e-6 or abs(np.trace(s).real - 1.0) > 1e-6:
            raise ValueError("state-scenario fidelity needs unit traces")
        d = hat_s.shape[0]
    else:
        d = scenario.dim
    f = scenario.f_lower
    raw = (fidelity_f1(hat_s, s, d) - f) / (1.0 - f)
    if not clamp:
        return float(raw)
    return float(min(max(raw, 0.0), 1.0))


def infidelity(hat_s: np.ndarray, s: np.ndarray, scenario: FidelityScenario) -> float:
    """1 - F, the error index whose scaling the adaptive protocols optimize."""
    return 1.0 - fidelity(hat_s, s, scenario)


def pseudo_state_fidelity(hat_s: np.ndarray, s: np.ndarray) -> float:
    """F_1 with f = 0 for (possibly sub-unit-trace) reconstructed states.

    Reduces to the Uhlmann fidelity when both traces are 1; used to score
    pseudo-state reconstructions where neither the detector nor the process
    lower bound applies.
    """
    hat_s, s = _check_pair(hat_s, s)
    return float(min(fidelity_f1(hat_s, s, hat_s.shape[0]), 1.0))


def detector_fidelity_h(p, q) -> float:
    """Whole-detector fidelity via the block-embedding construction.

    Both detectors are embedded as block-diagonal states
    ``sigma = (1/d) diag(P_1, ..., P_n)`` and compared with the Uhlmann
    fidelity, which factorizes over blocks:
    ``F_H = [sum_j Tr sqrt(sqrt(P_j) Q_j sqrt(P_j)) / d]^2``.
    """
    if len(p) != len(q):
        raise DimensionError("detectors must have equal element counts")
    if p.dim != q.dim:
        raise DimensionError("detectors must share one dimension")
    d = p.dim
    total = 0.0
    for pj, qj in zip(p.elements, q.elements):
        rp = matrix_sqrt(pj)
        total += _sqrt_eig_sum(hermitian_part(rp @ qj @ rp, check=False))
    return float(min((total / d) ** 2, 1.0))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Trace norm ||a - b||_tr (sum of singular values of the difference)."""
    a, b = _check_pair(a, b)
    return float(np.sum(np.abs(np.linalg.svd(a - b, compute_uv=False))))


class FuchsCheck(NamedTuple):
    lower: float  # 1 - sqrt(F)
    half_trace_distance: float
    upper: float  # sqrt(1 - F)
    holds: bool


def fuchs_check(a: np.ndarray, b: np.ndarray, slack: float = 1e-9) -> FuchsCheck:
    """Evaluate the Fuchs - van de Graaf sandwich for two density matrices.

    Returns the three chain values and whether
    ``1 - sqrt(F) <= ||a-b||_tr / 2 <= sqrt(1-F)`` holds within ``slack``.
    """
    f = min(state_fidelity(a, b), 1.0)
    half_tr = trace_distance(a, b) / 2.0
    lower = 1.0 - np.sqrt(f)
    upper = float(np.sqrt(max(1.0 - f, 0.0)))
    holds = (lower <= half_tr + slack) and (half_tr <= upper + slack)
    return FuchsCheck(float(lower), half_tr, upper, bool(holds))
