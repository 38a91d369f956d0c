import numpy as np
import pytest

from rrqc import channels, qcore, qswitch
from rrqc.channels import IDENTITY, N_XY, pauli_kraus, product_pauli_kraus
from rrqc.qcore import CompletenessError, DimensionMismatchError, ValidityError

PLUS = qcore.KET_PLUS.density()


def nxy_product(n):
    return product_pauli_kraus([N_XY] * n)


def conj(mat, rho):
    return mat @ rho @ mat.conj().T


# ---------------------------------------------------------------------------
# generic switch
# ---------------------------------------------------------------------------


def test_switch_of_identity_channels_is_product_with_control():
    rng = np.random.default_rng(0)
    rho = qcore.random_density((2,), rng)
    omega = qcore.random_density((2,), rng)
    out = qswitch.switch_generic([qcore.I2], [qcore.I2], rho, omega)
    np.testing.assert_allclose(out.matrix, np.kron(rho.matrix, omega.matrix), atol=1e-12)


def test_switch_single_qubit_nxy_against_brute_force():
    # the four Kraus pair products are XX = I, XY = iZ, YX = -iZ, YY = I;
    # the equal-order pairs keep omega, the mixed ones conjugate it by Z
    rho = qcore.random_density((2,), np.random.default_rng(1))
    out = qswitch.switch_generic(pauli_kraus(N_XY), pauli_kraus(N_XY), rho, PLUS)
    z = qcore.Z.entries
    expected = 0.5 * np.kron(rho.matrix, qcore.PROJ_PLUS.entries) + 0.5 * np.kron(
        conj(z, rho.matrix), qcore.PROJ_MINUS.entries
    )
    np.testing.assert_allclose(out.matrix, expected, atol=1e-12)


def two_qubit_switch_expected(rho):
    """Four-term structure of the switched two-qubit equal-X/Y noise."""
    ii = np.eye(4)
    zz = channels.pauli_string(("Z", "Z")).entries
    iz = channels.pauli_string(("I", "Z")).entries
    zi = channels.pauli_string(("Z", "I")).entries
    plus_part = (conj(ii, rho) + conj(zz, rho)) / 4
    minus_part = (conj(iz, rho) + conj(zi, rho)) / 4
    return np.kron(plus_part, qcore.PROJ_PLUS.entries) + np.kron(
        minus_part, qcore.PROJ_MINUS.entries
    )


def test_switch_two_qubit_nxy_four_term_structure():
    rho = qcore.random_density((2, 2), np.random.default_rng(2))
    out = qswitch.switch_generic(nxy_product(2), nxy_product(2), rho, PLUS)
    np.testing.assert_allclose(out.matrix, two_qubit_switch_expected(rho.matrix), atol=1e-12)


def test_control_measurement_postselects_branch_channels():
    rho = qcore.random_density((2, 2), np.random.default_rng(3))
    out = qswitch.switch_generic(nxy_product(2), nxy_product(2), rho, PLUS)
    measured = qcore.measure_projective(out, (qcore.PROJ_PLUS, qcore.PROJ_MINUS), 2)
    assert [o.label for o in measured] == [0, 1]
    zz = channels.pauli_string(("Z", "Z")).entries
    iz = channels.pauli_string(("I", "Z")).entries
    zi = channels.pauli_string(("Z", "I")).entries
    conditionals = {
        0: (rho.matrix + conj(zz, rho.matrix)) / 2,
        1: (conj(iz, rho.matrix) + conj(zi, rho.matrix)) / 2,
    }
    for outcome in measured:
        assert abs(outcome.probability - 0.5) < 1e-12
        reduced = qcore.partial_trace(outcome.state, {0, 1})
        np.testing.assert_allclose(reduced.matrix, conditionals[outcome.label], atol=1e-12)


def test_switch_output_is_valid_state_for_random_channel_pairs():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        a = product_pauli_kraus([channels.random_pauli_channel(rng)])
        b = product_pauli_kraus([channels.random_pauli_channel(rng)])
        rho = qcore.random_density((2,), rng)
        omega = qcore.random_density((2,), rng)
        out = qswitch.switch_generic(a, b, rho, omega)
        assert abs(np.trace(out.matrix) - 1.0) < 1e-9
        assert np.linalg.eigvalsh(out.matrix).min() > -1e-9


def test_switch_invariant_under_kraus_recombination():
    rng = np.random.default_rng(4)
    a = pauli_kraus(N_XY)
    b = pauli_kraus(channels.random_pauli_channel(rng))
    rho = qcore.random_density((2,), rng)
    omega = qcore.random_density((2,), rng)
    base = qswitch.switch_generic(a, b, rho, omega)
    for trial in range(10):
        mixing = (
            qcore.random_unitary(2, rng)
            if trial % 2
            else qcore.random_unitary(3, rng)[:, :2]
        )
        out = qswitch.switch_generic(qcore.recombine_kraus(a, mixing), b, rho, omega)
        assert np.abs(out.matrix - base.matrix).max() < 1e-9


def test_switch_rejects_bad_inputs():
    rho = qcore.random_density((2,), np.random.default_rng(5))
    with pytest.raises(CompletenessError):
        qswitch.switch_generic([qcore.X * 0.5], [qcore.I2], rho, PLUS)
    with pytest.raises(DimensionMismatchError):
        qswitch.switch_generic(
            nxy_product(2), nxy_product(2), rho, PLUS
        )
    with pytest.raises(DimensionMismatchError):
        qswitch.switch_generic(
            [qcore.I2], [qcore.I2], rho, qcore.random_density((2, 2), np.random.default_rng(6))
        )


def test_discarding_control_gives_definite_order_cascade():
    # Pauli channels commute, so the traced switch equals applying the
    # product channel twice in sequence
    rng = np.random.default_rng(7)
    for _ in range(5):
        e1 = channels.random_pauli_channel(rng)
        e2 = channels.random_pauli_channel(rng)
        ops = product_pauli_kraus([e1, e2])
        rho = qcore.random_density((2, 2), rng)
        omega = qcore.random_density((2,), rng)
        traced = qcore.partial_trace(qswitch.switch_generic(ops, ops, rho, omega), {0, 1})
        cascade = product_pauli_kraus(
            [channels.compose(e1, e1), channels.compose(e2, e2)]
        )
        np.testing.assert_allclose(
            traced.matrix, qcore.apply_kraus(rho, cascade).matrix, atol=1e-9
        )


def test_control_marginal_does_not_depend_on_message():
    rng = np.random.default_rng(8)
    ops = nxy_product(2)
    marginals = []
    for _ in range(20):
        rho = qcore.random_ket((2, 2), rng).density()
        out = qswitch.switch_generic(ops, ops, rho, PLUS)
        marginals.append(qcore.partial_trace(out, {2}).matrix)
    for marginal in marginals[1:]:
        assert np.abs(marginal - marginals[0]).max() < 1e-9


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def test_two_party_closed_form_for_nxy_pair():
    sw = qswitch.closed_form_two_party(N_XY, N_XY)
    assert sw.plus_strings == {("I", "I"): 0.5, ("Z", "Z"): 0.5}
    assert sw.minus_strings == {("I", "Z"): 0.5, ("Z", "I"): 0.5}
    assert sw.p_plus == 0.5 and sw.p_minus == 0.5


def test_two_party_closed_form_for_identity_channels():
    sw = qswitch.closed_form_two_party(IDENTITY, IDENTITY)
    assert sw.p_plus == 1.0 and sw.p_minus == 0.0
    assert sw.plus_strings == {("I", "I"): 1.0}


def test_two_party_closed_form_matches_generic_on_random_inputs():
    rng = np.random.default_rng(9)
    e1 = channels.random_pauli_channel(rng)
    e2 = channels.random_pauli_channel(rng)
    sw = qswitch.closed_form_two_party(e1, e2)
    ops = product_pauli_kraus([e1, e2])
    for _ in range(20):
        rho = qcore.random_density((2, 2), rng)
        generic = qswitch.switch_generic(ops, ops, rho, sw.omega_plus)
        assert np.abs(sw.apply(rho).matrix - generic.matrix).max() < 1e-9


def test_nxy_closed_form_single_qubit():
    sw = qswitch.closed_form_nxy_n(1)
    assert sw.plus_strings == {("I",): 1.0}
    assert sw.minus_strings == {("Z",): 1.0}
    assert sw.p_plus == 0.5 and sw.p_minus == 0.5


def test_nxy_closed_form_two_qubits_equals_two_party_form():
    sw = qswitch.closed_form_nxy_n(2)
    two_party = qswitch.closed_form_two_party(N_XY, N_XY)
    assert sw.plus_strings == two_party.plus_strings
    assert sw.minus_strings == two_party.minus_strings


def test_nxy_closed_form_three_qubits_matches_generic():
    sw = qswitch.closed_form_nxy_n(3)
    assert qswitch.choi_deviation(sw, nxy_product(3), nxy_product(3)) < 1e-9


def test_nxy_closed_form_string_parity_classification():
    for n in range(1, 7):
        sw = qswitch.closed_form_nxy_n(n)
        for s in sw.plus_strings:
            assert s.count("Z") % 2 == 0
        for s in sw.minus_strings:
            assert s.count("Z") % 2 == 1
        # every Z string is present with uniform conditional weight
        assert len(sw.plus_strings) + len(sw.minus_strings) == 2**n
        for w in list(sw.plus_strings.values()) + list(sw.minus_strings.values()):
            assert w == 2.0 ** (1 - n)


def test_nxy_closed_form_rejects_out_of_range():
    with pytest.raises(ValueError):
        qswitch.closed_form_nxy_n(0)
    with pytest.raises(ValueError):
        qswitch.closed_form_nxy_n(7)


def test_switched_channel_validates_control_pair():
    sw = qswitch.closed_form_nxy_n(1)
    with pytest.raises(ValidityError):
        qswitch.SwitchedChannel(
            p_plus=sw.p_plus,
            p_minus=sw.p_minus,
            c_plus=sw.c_plus,
            c_minus=sw.c_minus,
            omega_plus=sw.omega_plus,
            omega_minus=sw.omega_plus,  # must be Z omega Z
            plus_strings=sw.plus_strings,
            minus_strings=sw.minus_strings,
        )
    with pytest.raises(ValidityError):
        qswitch.SwitchedChannel(
            p_plus=0.7,
            p_minus=0.7,
            c_plus=sw.c_plus,
            c_minus=sw.c_minus,
            omega_plus=sw.omega_plus,
            omega_minus=sw.omega_minus,
            plus_strings=sw.plus_strings,
            minus_strings=sw.minus_strings,
        )


def test_switched_kraus_agrees_with_stacked_choi_path():
    rng = np.random.default_rng(10)
    ops = product_pauli_kraus(
        [channels.random_pauli_channel(rng), channels.random_pauli_channel(rng)]
    )
    omega = qcore.random_density((2,), rng)
    from_operators = channels.choi(qswitch.switched_kraus(ops, ops, omega)).matrix
    stacked = qswitch._generic_choi_matrix(ops, ops, omega)
    assert np.abs(from_operators - stacked).max() < 1e-12


def test_validate_closed_forms_report():
    report = qswitch.validate_closed_forms(seed=1, trials=10)
    assert report.passed
    assert report.max_deviation < 1e-9
    kinds = {rec.kind for rec in report.records}
    assert kinds == {"identity", "nxy-choi", "nxy-input", "two-party"}
    identity_devs = [rec.deviation for rec in report.records if rec.kind == "identity"]
    assert max(identity_devs) < 1e-12
    assert len([rec for rec in report.records if rec.kind == "two-party"]) == 10


def test_validate_closed_forms_rejects_large_n():
    with pytest.raises(ValueError):
        qswitch.validate_closed_forms(seed=1, trials=1, ns=(4,))
