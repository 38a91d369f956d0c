"""Pauli channels, Choi matrices, and entanglement-breaking certification.

A Pauli channel is stored as the four probabilities (w_I, w_X, w_Y, w_Z) of
conjugating the state by I, X, Y, Z. Kraus amplitudes are the square roots
of these probabilities, so a channel quoted through amplitudes (a_0, ..,
a_3) with unit sum of squares has weights w_l = a_l**2 here. Probabilities
compose linearly under the Pauli multiplication table, which keeps channel
composition free of sign ambiguities.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import qcore
from .qcore import (
    ATOL,
    CompletenessError,
    DensityMatrix,
    DimensionMismatchError,
    Operator,
    ValidityError,
)

#: Tolerance for Pauli-channel weight normalization.
WEIGHT_ATOL = 1e-12

PAULI_LABELS = ("I", "X", "Y", "Z")
_PAULI_MATS = (qcore.I2.entries, qcore.X.entries, qcore.Y.entries, qcore.Z.entries)

# sigma_a sigma_b = i**phase * sigma_c, encoded as (a, b) -> (phase mod 4, c).
_MULT = {
    (0, 0): (0, 0), (0, 1): (0, 1), (0, 2): (0, 2), (0, 3): (0, 3),
    (1, 0): (0, 1), (1, 1): (0, 0), (1, 2): (1, 3), (1, 3): (3, 2),
    (2, 0): (0, 2), (2, 1): (3, 3), (2, 2): (0, 0), (2, 3): (1, 1),
    (3, 0): (0, 3), (3, 1): (1, 2), (3, 2): (3, 1), (3, 3): (0, 0),
}


def pauli_product(a: int, b: int) -> tuple[int, int]:
    """Return (i-power phase, index) of the product sigma_a sigma_b."""
    return _MULT[(a, b)]


def paulis_anticommute(a: int, b: int) -> bool:
    return a != b and a != 0 and b != 0


@functools.lru_cache(maxsize=None)
def _string_matrix(labels: tuple[str, ...]) -> np.ndarray:
    mat = np.array([[1.0 + 0j]])
    for label in labels:
        mat = np.kron(mat, _PAULI_MATS[PAULI_LABELS.index(label)])
    mat.setflags(write=False)
    return mat


def pauli_string(labels: Sequence[str]) -> Operator:
    """Tensor product of single-qubit Paulis, e.g. ("Z", "I", "Z")."""
    labels = tuple(labels)
    if not labels or any(l not in PAULI_LABELS for l in labels):
        raise ValueError(f"invalid Pauli string {labels!r}")
    return Operator(_string_matrix(labels), (2,) * len(labels))


@dataclass(frozen=True)
class PauliChannel:
    """Probabilities of applying I, X, Y, Z respectively."""

    w_i: float
    w_x: float
    w_y: float
    w_z: float

    def __post_init__(self):
        weights = self.weights
        if any(w < 0 for w in weights):
            raise ValidityError(f"negative Pauli weight in {weights}")
        if abs(sum(weights) - 1.0) > WEIGHT_ATOL:
            raise ValidityError(f"Pauli weights {weights} do not sum to 1")

    @property
    def weights(self) -> tuple[float, float, float, float]:
        return (self.w_i, self.w_x, self.w_y, self.w_z)


IDENTITY = PauliChannel(1.0, 0.0, 0.0, 0.0)
#: Equal mixture of X and Y conjugation; entanglement-breaking (certified below).
N_XY = PauliChannel(0.0, 0.5, 0.5, 0.0)
FULL_DEPHASING = PauliChannel(0.5, 0.0, 0.0, 0.5)


def pauli_kraus(ch: PauliChannel) -> list[Operator]:
    """Kraus operators sqrt(w_l) sigma_l, omitting zero-weight terms."""
    return [
        Operator(np.sqrt(w) * mat, (2,))
        for w, mat in zip(ch.weights, _PAULI_MATS)
        if w > 0.0
    ]


def product_pauli_kraus(factors: Sequence[PauliChannel]) -> list[Operator]:
    """Kraus set of the tensor product of single-qubit Pauli channels."""
    ops = [Operator(np.array([[1.0 + 0j]]), (1,))]
    for ch in factors:
        ops = [qcore.tensor(op, k) for op in ops for k in pauli_kraus(ch)]
    n = len(factors)
    return [Operator(op.entries, (2,) * n) for op in ops]


def compose(a: PauliChannel, b: PauliChannel) -> PauliChannel:
    """Sequential composition: apply ``a`` first, then ``b``.

    Phases from the Pauli multiplication table drop out of the conjugation
    weights, so the weights simply convolve through the table.
    """
    out = [0.0, 0.0, 0.0, 0.0]
    for l, wa in enumerate(a.weights):
        if wa == 0.0:
            continue
        for m, wb in enumerate(b.weights):
            _, c = pauli_product(m, l)
            out[c] += wa * wb
    return PauliChannel(*out)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """State dual to a channel, on output (x) reference, normalized to trace 1."""

    op: DensityMatrix

    def __post_init__(self):
        if len(self.op.dims) != 2:
            raise DimensionMismatchError(
                f"Choi matrix needs (output, reference) dims, got {self.op.dims}"
            )

    @property
    def output_dim(self) -> int:
        return self.op.dims[0]

    @property
    def input_dim(self) -> int:
        return self.op.dims[1]

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix


def choi(kraus: Sequence[Operator]) -> ChoiMatrix:
    """Apply (channel x identity) to a maximally entangled pair.

    The reference factor has the channel's input dimension; the result is
    normalized to unit trace.
    """
    defect = qcore.kraus_defect(kraus)
    if defect > ATOL:
        raise CompletenessError(f"Kraus set incomplete (defect {defect:.3e})")
    d_out, d_in = kraus[0].shape
    flat = np.stack([k.entries.reshape(-1) for k in kraus])
    mat = np.einsum("ka,kb->ab", flat, flat.conj()) / d_in
    return ChoiMatrix(DensityMatrix.from_matrix(mat, (d_out, d_in)))


class EBVerdict(NamedTuple):
    entanglement_breaking: bool
    witness: float  # minimum eigenvalue of the partially transposed Choi matrix


def is_entanglement_breaking_qubit(ch: ChoiMatrix, atol: float = ATOL) -> EBVerdict:
    """PPT test on a qubit-channel Choi matrix.

    Positivity under partial transposition is equivalent to separability for
    two qubits, so the verdict is exact here. The witness is the minimum
    eigenvalue of the partial transpose.
    """
    if ch.op.dims != (2, 2):
        raise DimensionMismatchError(f"need a 2x2 Choi matrix, got dims {ch.op.dims}")
    swapped = ch.matrix.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
    witness = float(np.linalg.eigvalsh(swapped).min())
    return EBVerdict(witness >= -atol, witness)


def random_pauli_channel(rng: np.random.Generator) -> PauliChannel:
    """Uniform draw from the weight simplex via sorted spacings."""
    cuts = np.sort(rng.uniform(size=3))
    weights = np.diff(np.concatenate(([0.0], cuts, [1.0])))
    return PauliChannel(*(float(w) for w in weights))
