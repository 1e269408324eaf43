"""Protocol containers, exact message enumeration, execution of quantum
protocols, lifting, parallel repetition, and cost accounting."""

import json
from fractions import Fraction

import numpy as np
import pytest

from cdslab.classical import and_cds, and_function, double_secret, neq_cds, table_psm
from cdslab.framework import (
    CdsProtocol,
    CostReport,
    PromiseFunction,
    cds_decode_failure,
    classical_to_quantum_lift,
    decoded_entanglement_fidelity,
    describe,
    enumerate_message_distribution,
    joint_channel,
    mid_protocol_state,
    parallel_repeat,
    protocol_cost,
    psm_to_cds,
    run_cdqs,
    serialize_protocol,
    transcript_block_checks,
    transcript_form,
)
from cdslab.qcore import DensityMatrix, apply_channel, partial_trace
from cdslab.quantum import neq_promise_cdqs
from cdslab.toys import gated_forwarding, lifted_neq, trivial_forwarding


# ---------------------------------------------------------------------------
# PromiseFunction
# ---------------------------------------------------------------------------

def test_promise_function_value_and_pairs():
    f = PromiseFunction(1, lambda x, y: 1 if x != y else None, "strict_neq")
    assert f.value(0, 1) == 1
    assert f.value(0, 0) is None
    assert list(f.promise_pairs()) == [(0, 1), (1, 0)]

def test_promise_function_range_check():
    f = PromiseFunction(1, lambda x, y: 0, "zero")
    with pytest.raises(ValueError):
        f.value(2, 0)

def test_promise_function_ones_zeros_listing():
    f = PromiseFunction(1, lambda x, y: 1 if x != y else None, "strict_neq")
    assert f.ones() == [(0, 1), (1, 0)]
    assert f.zeros() == []


# ---------------------------------------------------------------------------
# CostReport
# ---------------------------------------------------------------------------

def test_cost_report_totals_and_scaling():
    c = CostReport(comm_bits=5, comm_qubits=1, shared_random_bits=8, shared_epr_pairs=2)
    assert c.total_communication == 6
    doubled = c.scaled(2)
    assert doubled.comm_bits == 10 and doubled.shared_epr_pairs == 4
    assert c.as_dict()["comm_qubits"] == 1

def test_cost_report_rejects_negative():
    with pytest.raises(ValueError):
        CostReport(comm_bits=-1, comm_qubits=0, shared_random_bits=0, shared_epr_pairs=0)


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------

def test_enumeration_budget_guard():
    big = CdsProtocol(
        n=1, randomness_bits=25, secret_alphabet=2,
        message_a=lambda x, s, r: 0, message_b=lambda y, r: 0,
        decoder=lambda ma, x, mb, y: 0,
        message_bits_a=1, message_bits_b=1,
    )
    with pytest.raises(ValueError):
        enumerate_message_distribution(big, 0, 0, 0)

def test_decode_failure_counts_mass():
    # decoder that answers 1 - s half the time: failure exactly 1/2
    flaky = CdsProtocol(
        n=1, randomness_bits=1, secret_alphabet=2,
        message_a=lambda x, s, r: (s ^ r, r), message_b=lambda y, r: 0,
        decoder=lambda ma, x, mb, y: ma[0] ^ ma[1] ^ (ma[1] & 1 & x),
        message_bits_a=2, message_bits_b=1,
    )
    assert cds_decode_failure(flaky, 0, 0, 1) == 0
    assert cds_decode_failure(flaky, 1, 0, 1) == Fraction(1, 2)


# ---------------------------------------------------------------------------
# dense CDQS execution
# ---------------------------------------------------------------------------

def test_run_cdqs_forwards_the_secret():
    p = trivial_forwarding()
    plus = DensityMatrix(np.full((2, 2), 0.5, dtype=complex), [("Q", 2)])
    out = run_cdqs(p, 0, 0, plus)
    decoded = np.asarray(out.entries)
    assert np.allclose(decoded, plus.entries, atol=1e-12)

def test_mid_state_and_entanglement_fidelity():
    p = trivial_forwarding()
    mid = mid_protocol_state(p, 0, 0)
    assert abs(np.trace(np.asarray(mid.entries)) - 1) < 1e-12
    assert abs(decoded_entanglement_fidelity(p, 0, 0) - 1.0) < 1e-12

def test_gated_forwarding_only_on_allowed_pair():
    p = gated_forwarding()
    assert abs(decoded_entanglement_fidelity(p, 1, 1) - 1.0) < 1e-12
    # on the erased branch the message is |0><0| whatever the secret was
    mid = mid_protocol_state(p, 0, 0).permuted(["Qbar", "MA"])
    want = np.kron(np.eye(2) / 2, [[1, 0], [0, 0]])
    assert np.allclose(np.asarray(mid.entries), want, atol=1e-11)

def test_joint_channel_matches_sequential_run():
    p = gated_forwarding()
    ch = joint_channel(p, 1, 1)
    rng = np.random.default_rng(3)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    secret = DensityMatrix(rho, [("Q", 2)])
    via_channel = apply_channel(ch, secret)
    direct = run_cdqs(p, 1, 1, secret)
    assert np.allclose(
        np.asarray(via_channel.entries), np.asarray(direct.entries), atol=1e-10
    )


# ---------------------------------------------------------------------------
# lifting a classical CDS to a quantum one
# ---------------------------------------------------------------------------

def test_lift_requires_four_letter_secret():
    with pytest.raises(ValueError):
        classical_to_quantum_lift(neq_cds(1))

def test_lifted_protocol_is_perfect_on_promise():
    p = lifted_neq()
    assert abs(decoded_entanglement_fidelity(p, 0, 1) - 1.0) < 1e-11
    assert abs(decoded_entanglement_fidelity(p, 1, 0) - 1.0) < 1e-11

def test_lifted_protocol_hides_on_equal_inputs():
    p = lifted_neq()
    mid = mid_protocol_state(p, 1, 1)
    # the Qbar marginal of the padded mid-state is maximally mixed
    reduced = partial_trace(mid, keep=["Qbar"])
    assert np.allclose(np.asarray(reduced.entries), np.eye(2) / 2, atol=1e-11)


# ---------------------------------------------------------------------------
# parallel repetition
# ---------------------------------------------------------------------------

def test_parallel_repeat_identity_at_one():
    p = gated_forwarding()
    assert parallel_repeat(p, 1) is p

def test_parallel_repeat_exact_on_gated_toy():
    p = parallel_repeat(gated_forwarding(), 2)
    assert p.d_q == 4
    assert abs(decoded_entanglement_fidelity(p, 1, 1) - 1.0) < 1e-10
    assert protocol_cost(p).comm_qubits == 2 * protocol_cost(gated_forwarding()).comm_qubits

def test_parallel_repeat_budget_guard():
    with pytest.raises(ValueError, match="dense budget"):
        parallel_repeat(lifted_neq(), 2)


# ---------------------------------------------------------------------------
# transcript-form protocols
# ---------------------------------------------------------------------------

def test_transcript_blocks_are_distributions():
    p = transcript_form(double_secret(neq_cds(1)))
    for x in range(2):
        for y in range(2):
            transcript_block_checks(p, x, y)

def test_transcript_methods_delegate():
    p = transcript_form(double_secret(neq_cds(1)))
    assert p.entanglement_fidelity(0, 1) == Fraction(1)
    assert p.product_distance(0, 0) == Fraction(0)

def test_transcript_form_agrees_with_dense_lift():
    key = double_secret(neq_cds(1))
    exact = transcript_form(key)
    dense = classical_to_quantum_lift(key)
    for x in range(2):
        for y in range(2):
            fid = decoded_entanglement_fidelity(dense, x, y) if x != y else None
            if fid is not None:
                assert abs(float(exact.entanglement_fidelity(x, y)) - fid) < 1e-10

def test_hybrid_exposes_the_same_exact_interface():
    p = neq_promise_cdqs(2)
    assert p.kind == "cdqs-transcript"
    assert p.entanglement_fidelity(0, 1) == Fraction(1)  # distance n/2 = 1
    assert p.product_distance(2, 2) == Fraction(0)


# ---------------------------------------------------------------------------
# PSM -> CDS and cost accounting
# ---------------------------------------------------------------------------

def test_psm_to_cds_on_and():
    p = psm_to_cds(table_psm, and_function())
    f = and_function()
    for x in range(2):
        for y in range(2):
            if f.value(x, y) == 1:
                for s in range(2):
                    assert cds_decode_failure(p, x, y, s) == 0
            else:
                assert enumerate_message_distribution(p, x, y, 0) == \
                    enumerate_message_distribution(p, x, y, 1)

def test_protocol_cost_classical():
    c = protocol_cost(and_cds())
    assert c.comm_bits == 2 and c.comm_qubits == 0 and c.shared_random_bits == 1

def test_protocol_cost_dense_quantum():
    c = protocol_cost(lifted_neq())
    assert c.comm_qubits == 1
    assert c.comm_bits == protocol_cost(double_secret(neq_cds(1))).comm_bits

def test_describe_and_serialize():
    d = describe(neq_cds(2))
    assert d["kind"] == "cds" and d["n"] == 2
    blob = serialize_protocol(neq_cds(2))
    assert json.loads(blob)["cost"]["comm_bits"] == 5
    # canonical: keys sorted
    assert blob == json.dumps(json.loads(blob), sort_keys=True, indent=2)
