"""Quantum SWITCH of two channels with a qubit order control.

``switch_generic`` applies the standard Kraus construction for arbitrary
channel pairs: with Kraus sets {A_j} and {B_k}, the switched channel acts on
message (x) control through the operators

    A_j B_k (x) |0><0|  +  B_k A_j (x) |1><1|,

with the control in the last tensor slot.

When both channels are products of Pauli channels, every pair product
A_j B_k is a Pauli string up to a phase, and reversing the order changes at
most its sign. Grouping the pairs by that sign gives an exact decomposition

    p_plus * C_plus(rho) (x) omega  +  p_minus * C_minus(rho) (x) Z omega Z

into two normalized Pauli-string channels correlated with the control.
``closed_form_two_party`` builds it for the switch of a two-qubit product
channel with itself by enumerating all 16 x 16 ordered Kraus pairs.
``closed_form_nxy_n`` covers n parallel equal-X/Y mixtures, where C_plus
collects the even-weight Z strings and C_minus the odd-weight ones, each Z
string carrying weight 2**-n. ``validate_closed_forms`` cross-checks the
closed forms against ``switch_generic`` at the level of Choi matrices, which
is the only trusted route: the closed forms are derived here from the Pauli
pair algebra, not transcribed from any external table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import channels, qcore
from .qcore import (
    ATOL,
    MAX_RECEIVERS,
    PROB_FLOOR,
    CompletenessError,
    DensityMatrix,
    DimensionMismatchError,
    Operator,
    ValidityError,
)

StringTable = dict[tuple[str, ...], float]


def _check_channel_pair(a: Sequence[Operator], b: Sequence[Operator]) -> tuple[int, ...]:
    if not a or not b:
        raise CompletenessError("empty Kraus list")
    dims = a[0].dims
    for op in list(a) + list(b):
        if not op.is_square or op.dims != dims:
            raise DimensionMismatchError("channel Kraus sets act on different registers")
    for name, ops in (("first", a), ("second", b)):
        defect = qcore.kraus_defect(ops)
        if defect > ATOL:
            raise CompletenessError(f"{name} Kraus set incomplete (defect {defect:.3e})")
    return dims


def switch_kraus(a: Sequence[Operator], b: Sequence[Operator]) -> list[Operator]:
    """Kraus operators of the switch of two channels, on message (x) control."""
    dims = _check_channel_pair(a, b)
    p0 = qcore.PROJ0.entries
    p1 = qcore.PROJ1.entries
    out = []
    for aj in a:
        for bk in b:
            ab = aj.entries @ bk.entries
            ba = bk.entries @ aj.entries
            out.append(Operator(np.kron(ab, p0) + np.kron(ba, p1), dims + (2,)))
    return out


def switch_generic(
    a: Sequence[Operator],
    b: Sequence[Operator],
    input: DensityMatrix,
    omega: DensityMatrix,
) -> DensityMatrix:
    """Output state of the switched channel for a given message and control state."""
    dims = _check_channel_pair(a, b)
    if input.dim != a[0].shape[0]:
        raise DimensionMismatchError(
            f"message dimension {input.dim} does not match channels on {dims}"
        )
    if omega.dim != 2:
        raise DimensionMismatchError("the order control must be a qubit")
    return qcore.apply_kraus(input.tensor(omega), switch_kraus(a, b))


def switched_kraus(
    a: Sequence[Operator], b: Sequence[Operator], omega: DensityMatrix
) -> list[Operator]:
    """Kraus set of the message -> message (x) control map with the control
    state absorbed (via its spectral decomposition)."""
    dims = _check_channel_pair(a, b)
    if omega.dim != 2:
        raise DimensionMismatchError("the order control must be a qubit")
    side = a[0].shape[0]
    vals, vecs = np.linalg.eigh(omega.matrix)
    out = []
    for s in switch_kraus(a, b):
        for lam, vec in zip(vals, vecs.T):
            if lam < PROB_FLOOR:
                continue
            lift = np.kron(np.eye(side), np.sqrt(lam) * vec.reshape(2, 1))
            out.append(Operator(s.entries @ lift, dims + (2,), dims))
    return out


def _string_kraus(table: StringTable) -> tuple[Operator, ...]:
    return tuple(
        channels.pauli_string(s) * float(np.sqrt(w)) for s, w in sorted(table.items())
    )


@dataclass(frozen=True, eq=False)
class SwitchedChannel:
    """Decomposition of a switched Pauli-product channel.

    The output on input rho is
    p_plus * C_plus(rho) (x) omega_plus + p_minus * C_minus(rho) (x) omega_minus,
    where C_plus/C_minus are the normalized Pauli-string channels given by
    ``plus_strings``/``minus_strings`` and omega_minus = Z omega_plus Z.
    """

    p_plus: float
    p_minus: float
    c_plus: tuple[Operator, ...]
    c_minus: tuple[Operator, ...]
    omega_plus: DensityMatrix
    omega_minus: DensityMatrix
    plus_strings: StringTable
    minus_strings: StringTable

    def __post_init__(self):
        if self.p_plus < -ATOL or self.p_minus < -ATOL:
            raise ValidityError("negative branch probability")
        if abs(self.p_plus + self.p_minus - 1.0) > ATOL:
            raise ValidityError(
                f"branch probabilities sum to {self.p_plus + self.p_minus}, not 1"
            )
        for name, ops in (("C_plus", self.c_plus), ("C_minus", self.c_minus)):
            defect = qcore.kraus_defect(ops)
            if defect > ATOL:
                raise CompletenessError(f"{name} incomplete (defect {defect:.3e})")
        flipped = qcore.Z.entries @ self.omega_plus.matrix @ qcore.Z.entries
        if np.abs(flipped - self.omega_minus.matrix).max() > ATOL:
            raise ValidityError("omega_minus is not Z omega_plus Z")

    @property
    def num_qubits(self) -> int:
        return len(self.c_plus[0].dims)

    def apply_matrix(self, mat: np.ndarray) -> np.ndarray:
        """Raw (linear) action on a message matrix; used for Choi comparisons."""
        acc = np.zeros((mat.shape[0] * 2, mat.shape[1] * 2), dtype=complex)
        for prob, table, omega in (
            (self.p_plus, self.plus_strings, self.omega_plus),
            (self.p_minus, self.minus_strings, self.omega_minus),
        ):
            if prob <= 0.0:
                continue
            branch = np.zeros_like(mat)
            for s, w in table.items():
                sigma = channels.pauli_string(s).entries
                branch += w * (sigma @ mat @ sigma)
            acc += np.kron(prob * branch, omega.matrix)
        return acc

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        """Total switched-channel output on message (x) control."""
        if rho.dim != 2**self.num_qubits:
            raise DimensionMismatchError(
                f"message dimension {rho.dim} does not match {self.num_qubits} qubits"
            )
        out = self.apply_matrix(rho.matrix)
        out = (out + out.conj().T) / 2
        return DensityMatrix.from_matrix(out, rho.dims + (2,), rho.tolerance)

    def output_kraus(self) -> list[Operator]:
        """Kraus set of the message -> message (x) control map."""
        n = self.num_qubits
        dims = (2,) * n
        side = 2**n
        out = []
        for prob, table, omega in (
            (self.p_plus, self.plus_strings, self.omega_plus),
            (self.p_minus, self.minus_strings, self.omega_minus),
        ):
            if prob <= 0.0:
                continue
            vals, vecs = np.linalg.eigh(omega.matrix)
            for lam, vec in zip(vals, vecs.T):
                if lam < PROB_FLOOR:
                    continue
                lift = np.kron(np.eye(side), vec.reshape(2, 1))
                for s, w in sorted(table.items()):
                    k = np.sqrt(prob * w * lam) * (
                        np.kron(channels.pauli_string(s).entries, np.eye(2)) @ lift
                    )
                    out.append(Operator(k, dims + (2,), dims))
        return out


def _default_omega() -> DensityMatrix:
    return qcore.KET_PLUS.density()


def _from_tables(
    plus: StringTable, minus: StringTable, n: int, omega: DensityMatrix | None
) -> SwitchedChannel:
    omega = _default_omega() if omega is None else omega
    sides = []
    for table in (plus, minus):
        total = sum(table.values())
        if total <= PROB_FLOOR:
            # degenerate branch: zero probability, identity channel placeholder
            sides.append((0.0, {("I",) * n: 1.0}))
        else:
            sides.append(
                (total, {s: w / total for s, w in sorted(table.items()) if w > 0.0})
            )
    (p_plus, plus_n), (p_minus, minus_n) = sides
    omega_minus = DensityMatrix.from_matrix(
        qcore.Z.entries @ omega.matrix @ qcore.Z.entries, (2,), omega.tolerance
    )
    return SwitchedChannel(
        p_plus=p_plus,
        p_minus=p_minus,
        c_plus=_string_kraus(plus_n),
        c_minus=_string_kraus(minus_n),
        omega_plus=omega,
        omega_minus=omega_minus,
        plus_strings=plus_n,
        minus_strings=minus_n,
    )


def closed_form_two_party(
    e1: channels.PauliChannel,
    e2: channels.PauliChannel,
    omega: DensityMatrix | None = None,
) -> SwitchedChannel:
    """Switched-channel decomposition for the switch of e1 (x) e2 with itself.

    Enumerates the 16 x 16 ordered pairs of product Kraus operators. A pair
    whose single-qubit factors anticommute an odd number of times flips the
    control coherence and lands in C_minus; the rest land in C_plus.
    """
    w1, w2 = e1.weights, e2.weights
    plus: StringTable = {}
    minus: StringTable = {}
    labels = channels.PAULI_LABELS
    for l1 in range(4):
        if w1[l1] == 0.0:
            continue
        for l2 in range(4):
            if w1[l2] == 0.0:
                continue
            _, first = channels.pauli_product(l1, l2)
            flip1 = channels.paulis_anticommute(l1, l2)
            for m1 in range(4):
                if w2[m1] == 0.0:
                    continue
                for m2 in range(4):
                    if w2[m2] == 0.0:
                        continue
                    _, second = channels.pauli_product(m1, m2)
                    weight = w1[l1] * w1[l2] * w2[m1] * w2[m2]
                    key = (labels[first], labels[second])
                    table = minus if flip1 ^ channels.paulis_anticommute(m1, m2) else plus
                    table[key] = table.get(key, 0.0) + weight
    return _from_tables(plus, minus, 2, omega)


def closed_form_nxy_n(n: int, omega: DensityMatrix | None = None) -> SwitchedChannel:
    """Switched channel for n parallel equal-X/Y mixtures against themselves.

    Every Z string on the n qubits appears with weight 2**-n; even-weight
    strings leave the control untouched (C_plus), odd-weight strings flip its
    coherence (C_minus). Both branch probabilities are 1/2.
    """
    if not 1 <= n <= MAX_RECEIVERS:
        raise ValueError(f"receiver count {n} outside 1..{MAX_RECEIVERS}")
    weight = 2.0 ** (-n)
    plus: StringTable = {}
    minus: StringTable = {}
    for mask in range(2**n):
        key = tuple("Z" if (mask >> (n - 1 - k)) & 1 else "I" for k in range(n))
        table = minus if bin(mask).count("1") % 2 else plus
        table[key] = weight
    return _from_tables(plus, minus, n, omega)


def _identity_switched(n: int, omega: DensityMatrix | None = None) -> SwitchedChannel:
    """Switch of the identity channel with itself (orders coincide)."""
    return _from_tables({("I",) * n: 1.0}, {}, n, omega)


def _generic_choi_matrix(
    a: Sequence[Operator], b: Sequence[Operator], omega: DensityMatrix
) -> np.ndarray:
    """Choi matrix of the generic switched map, computed on stacked arrays.

    Equivalent to ``channels.choi(switched_kraus(a, b, omega)).matrix`` but
    without per-operator bookkeeping, which keeps bulk validation fast.
    """
    _check_channel_pair(a, b)
    side = a[0].shape[0]
    stack_a = np.stack([op.entries for op in a])
    stack_b = np.stack([op.entries for op in b])
    ab = np.einsum("jxy,kyz->jkxz", stack_a, stack_b).reshape(-1, side, side)
    ba = np.einsum("kxy,jyz->jkxz", stack_b, stack_a).reshape(-1, side, side)
    vals, vecs = np.linalg.eigh(omega.matrix)
    blocks = []
    for lam, vec in zip(vals, vecs.T):
        if lam < PROB_FLOOR:
            continue
        lifted = np.zeros((ab.shape[0], 2 * side, side), dtype=complex)
        # control is the last factor, so its index interleaves the rows
        lifted[:, 0::2, :] = np.sqrt(lam) * vec[0] * ab
        lifted[:, 1::2, :] = np.sqrt(lam) * vec[1] * ba
        blocks.append(lifted)
    flat = np.concatenate(blocks).reshape(-1, 2 * side * side)
    return np.einsum("ka,kb->ab", flat, flat.conj()) / side


def choi_deviation(
    sw: SwitchedChannel, a: Sequence[Operator], b: Sequence[Operator]
) -> float:
    """Max-entry Choi difference between a closed form and the generic switch."""
    generic = _generic_choi_matrix(a, b, sw.omega_plus)
    closed = channels.choi(sw.output_kraus())
    return float(np.abs(generic - closed.matrix).max())


@dataclass(frozen=True)
class ValidationRecord:
    kind: str
    n: int
    detail: str
    deviation: float


@dataclass(frozen=True)
class ClosedFormValidation:
    seed: int
    trials: int
    tolerance: float
    records: tuple[ValidationRecord, ...]
    max_deviation: float
    passed: bool


def validate_closed_forms(
    seed: int,
    trials: int,
    ns: Sequence[int] = (1, 2, 3),
    tolerance: float = ATOL,
) -> ClosedFormValidation:
    """Cross-validate the closed-form decompositions against the generic switch.

    For each requested receiver count n (capped at 3, where the generic
    construction stays cheap) this compares Choi matrices for the identity
    sanity case and the equal-X/Y mixture, runs ``trials`` random-input spot
    checks of the latter, and at n = 2 additionally draws ``trials`` random
    two-party Pauli channel pairs with random pure control states.
    """
    rng = np.random.default_rng(seed)
    records: list[ValidationRecord] = []
    for n in ns:
        if not 1 <= n <= 3:
            raise ValueError(f"generic validation supports n in 1..3, got {n}")
        ident = [qcore.identity((2,) * n)]
        records.append(
            ValidationRecord(
                "identity", n, "", choi_deviation(_identity_switched(n), ident, ident)
            )
        )
        nxy_ops = channels.product_pauli_kraus([channels.N_XY] * n)
        sw = closed_form_nxy_n(n)
        records.append(
            ValidationRecord("nxy-choi", n, "", choi_deviation(sw, nxy_ops, nxy_ops))
        )
        for t in range(trials):
            rho = qcore.random_density((2,) * n, rng)
            out = switch_generic(nxy_ops, nxy_ops, rho, sw.omega_plus)
            dev = float(np.abs(sw.apply(rho).matrix - out.matrix).max())
            records.append(ValidationRecord("nxy-input", n, f"trial {t}", dev))
        if n == 2:
            for t in range(trials):
                e1 = channels.random_pauli_channel(rng)
                e2 = channels.random_pauli_channel(rng)
                omega = qcore.random_ket((2,), rng).density()
                pair = channels.product_pauli_kraus([e1, e2])
                sw2 = closed_form_two_party(e1, e2, omega)
                records.append(
                    ValidationRecord(
                        "two-party", 2, f"trial {t}", choi_deviation(sw2, pair, pair)
                    )
                )
    max_dev = max(r.deviation for r in records)
    return ClosedFormValidation(
        seed=seed,
        trials=trials,
        tolerance=tolerance,
        records=tuple(records),
        max_deviation=max_dev,
        passed=max_dev < tolerance,
    )
