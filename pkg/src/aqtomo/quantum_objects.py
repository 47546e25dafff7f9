"""Quantum-domain value types and representation conversions.

Covers density matrices (including sub-unit-trace pseudo-states), POVMs,
channels as Kraus operators, the natural-basis process matrix, the Choi
state, and bipartite pure states with their Schmidt data.

Conventions fixed here and relied on everywhere else:

* natural operator basis ``E_i = |j><k|`` with ``i = j*d + k`` (0-based),
  so the coefficient row of a Kraus operator is just its row-major ravel;
* composite space ``A (x) B`` with flat index ``a * d_B + b``;
* a process matrix ``X`` lives on (output system) (x) (index system) and
  satisfies ``X >= 0`` and ``Tr_1(X) <= I``, with equality exactly for
  trace-preserving channels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import (
    DimensionError,
    dagger,
    hermitian_eig,
    hermitian_part,
    kron,
    partial_trace_1,
    partial_trace_2,
)

TRACE_ATOL = 1e-9
PSD_ATOL = 1e-9
COMPLETENESS_ATOL = 1e-8


class DegenerateInputError(ValueError):
    """A Schmidt coefficient is (numerically) zero where positivity is required."""


@dataclass(frozen=True)
class DensityMatrix:
    """A PSD operator with unit trace, or sub-unit trace for pseudo-states."""

    mat: np.ndarray
    sub_unit: bool = False

    def __post_init__(self):
        mat = hermitian_part(np.asarray(self.mat, dtype=complex))
        w = np.linalg.eigvalsh(mat)
        if w[0] < -PSD_ATOL:
            raise linalg.NotPSDError(f"density matrix eigenvalue {w[0]:.3e} < 0")
        tr = float(np.trace(mat).real)
        if self.sub_unit:
            if not (0.0 < tr <= 1.0 + TRACE_ATOL):
                raise ValueError(f"pseudo-state trace {tr} outside (0, 1]")
        elif abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix trace {tr} != 1")
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def eig(self) -> linalg.HermitianEig:
        return hermitian_eig(self.mat)


def pure_state(psi: np.ndarray) -> DensityMatrix:
    """|psi><psi| for a (re)normalized state vector."""
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class Povm:
    """Ordered list of PSD elements summing to the identity."""

    elements: tuple
    name: str = ""

    def __post_init__(self):
        elems = tuple(hermitian_part(np.asarray(e, dtype=complex)) for e in self.elements)
        if not elems:
            raise ValueError("a POVM needs at least one element")
        d = elems[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for e in elems:
            if e.shape != (d, d):
                raise DimensionError("POVM elements must share one dimension")
            if np.linalg.eigvalsh(e)[0] < -PSD_ATOL:
                raise linalg.NotPSDError("POVM element is not PSD")
            total += e
        if np.max(np.abs(total - np.eye(d))) > COMPLETENESS_ATOL:
            raise ValueError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", elems)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class KrausChannel:
    """A completely positive map given by Kraus operators A_i.

    ``sum A_i^dag A_i <= I`` is enforced; ``tp_flag`` records whether the
    bound is saturated (trace-preserving channel).
    """

    operators: tuple
    tp_flag: bool = field(init=False, default=False)

    def __post_init__(self):
        ops = tuple(np.asarray(a, dtype=complex) for a in self.operators)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for a in ops:
            if a.shape != (d, d):
                raise DimensionError("Kraus operators must be square with equal size")
        total = sum(dagger(a) @ a for a in ops)
        w = np.linalg.eigvalsh(hermitian_part(total))
        if w[-1] > 1.0 + COMPLETENESS_ATOL:
            raise ValueError(f"sum A^dag A has eigenvalue {w[-1]} > 1")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "tp_flag", bool(w[0] > 1.0 - COMPLETENESS_ATOL))

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]


@dataclass(frozen=True)
class ProcessMatrix:
    """d^2 x d^2 PSD process matrix X with Tr_1(X) <= I_d."""

    x: np.ndarray
    dim: int

    def __post_init__(self):
        x = hermitian_part(np.asarray(self.x, dtype=complex))
        d = self.dim
        if x.shape != (d * d, d * d):
            raise DimensionError(f"process matrix must be {d * d} x {d * d}")
        if np.linalg.eigvalsh(x)[0] < -1e-8:
            raise linalg.NotPSDError("process matrix is not PSD")
        q = hermitian_part(partial_trace_1(x, d, d))
        if np.linalg.eigvalsh(q)[-1] > 1.0 + 1e-8:
            raise ValueError("Tr_1(X) exceeds the identity")
        object.__setattr__(self, "x", x)

    @property
    def trace_preserving(self) -> bool:
        q = partial_trace_1(self.x, self.dim, self.dim)
        return bool(np.max(np.abs(q - np.eye(self.dim))) <= 1e-8)


@dataclass(frozen=True)
class BipartitePureState:
    """Unit vector on A (x) B together with its Schmidt decomposition.

    ``coefficients`` are non-increasing and >= 0; ``sum_i h_i U|i> (x) V|i>``
    reconstructs the amplitudes.
    """

    amplitudes: np.ndarray
    dim_a: int
    dim_b: int
    coefficients: np.ndarray = field(init=False)
    basis_a: np.ndarray = field(init=False)
    basis_b: np.ndarray = field(init=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amp.size != self.dim_a * self.dim_b:
            raise DimensionError("amplitude length must be dim_a * dim_b")
        if abs(np.linalg.norm(amp) - 1.0) > 1e-6:
            raise ValueError("amplitudes must have unit norm")
        amp = amp / np.linalg.norm(amp)
        h, u, v = schmidt_decompose(amp, self.dim_a, self.dim_b)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "coefficients", h)
        object.__setattr__(self, "basis_a", u)
        object.__setattr__(self, "basis_b", v)

    @property
    def schmidt_number(self) -> int:
        return int(np.sum(self.coefficients > 1e-10))

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def operator_schmidt_number(self, tol: float = 1e-10) -> int:
        """Schmidt number of |phi><phi| in the operator sense (counts s_l > tol)."""
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        da, db = self.dim_a, self.dim_b
        # realign rho[(a,b),(a',b')] -> R[(a,a'),(b,b')]; singular values of R
        # are the operator-Schmidt coefficients.
        r = rho.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
        return int(np.sum(np.linalg.svd(r, compute_uv=False) > tol))


def schmidt_decompose(psi: np.ndarray, d_a: int, d_b: int):
    """Schmidt data (h, U, V) of a bipartite unit vector via SVD.

    ``h`` is non-increasing, and ``sum_i h_i U|i> (x) V|i>`` rebuilds ``psi``.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != d_a * d_b:
        raise DimensionError("state vector length must be d_a * d_b")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-6:
        raise ValueError("state vector must have unit norm")
    amp = psi.reshape(d_a, d_b)  # amp[a, b] with flat index a * d_b + b
    u, h, vh = np.linalg.svd(amp)
    # amp = u diag(h) vh = sum_i h_i (u|i>)(vh^T|i>)^T, so V = vh.T
    return h, u, vh.T


def maximally_entangled_input(d: int) -> BipartitePureState:
    """|Psi> = sum_j |j>|j> / sqrt(d); the canonical full-Schmidt channel probe."""
    if d < 2:
        raise DimensionError("need d >= 2")
    amp = np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)
    return BipartitePureState(amp, d, d)


def kraus_to_process(ch: KrausChannel) -> ProcessMatrix:
    """Natural-basis process matrix ``X = C^T C^*``.

    Row i of C holds the expansion coefficients of the i-th Kraus operator in
    the basis ``E_{j*d+k} = |j><k|``, i.e. its row-major ravel.
    """
    d = ch.dim
    c = np.array([a.reshape(d * d) for a in ch.operators])
    x = c.T @ c.conj()
    return ProcessMatrix(x, d)


def apply_channel(ch: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    """Kraus operator-sum action ``sum_i A_i rho A_i^dag``."""
    if ch.dim != rho.dim:
        raise DimensionError("channel and state dimensions differ")
    out = sum(a @ rho.mat @ dagger(a) for a in ch.operators)
    return DensityMatrix(out, sub_unit=not ch.tp_flag or rho.sub_unit)


def apply_extended_channel(ch: KrausChannel, sigma: DensityMatrix) -> DensityMatrix:
    """Action of (channel (x) identity) on a state of the composite space."""
    d = ch.dim
    total = sigma.dim
    if total % d != 0:
        raise DimensionError("composite dimension is not a multiple of the channel's")
    d_b = total // d
    eye_b = np.eye(d_b)
    out = np.zeros((total, total), dtype=complex)
    for a in ch.operators:
        ka = kron(a, eye_b)
        out += ka @ sigma.mat @ dagger(ka)
    return DensityMatrix(out, sub_unit=not ch.tp_flag or sigma.sub_unit)


def apply_process_matrix(pm: ProcessMatrix, rho: DensityMatrix) -> DensityMatrix:
    """Channel action through the process matrix: Tr_2[X (I (x) rho^T)].

    Cross-validates the Kraus path; both agree for matching representations.
    """
    d = pm.dim
    if rho.dim != d:
        raise DimensionError("state dimension does not match the process matrix")
    out = partial_trace_2(pm.x @ kron(np.eye(d), rho.mat.T), d, d)
    return DensityMatrix(hermitian_part(out), sub_unit=not pm.trace_preserving or rho.sub_unit)


def choi_state(ch: KrausChannel) -> DensityMatrix:
    """Channel applied to half of the maximally entangled state.

    Satisfies ``X = d * choi`` for the natural-basis process matrix; the
    trace is 1 exactly for trace-preserving channels and below 1 otherwise.
    """
    probe = maximally_entangled_input(ch.dim)
    return apply_extended_channel(ch, probe.density())


def born_probabilities(rho: DensityMatrix, povm: Povm) -> np.ndarray:
    """Outcome probabilities p_i = Tr(P_i rho), clamped into [0, 1].

    They sum to the trace of ``rho`` (below 1 for pseudo-states).
    """
    if rho.dim != povm.dim:
        raise DimensionError("state and POVM dimensions differ")
    elems = np.stack(povm.elements)
    p = np.einsum("aij,ji->a", elems, rho.mat).real
    return np.clip(p, 0.0, 1.0)
