"""Tests for labeled-ensemble protocols: discrimination, superposition,
linear simulation, Helstrom bound and computation tasks."""

import numpy as np
import pytest

from ctcsim.circuit import (Circuit, Gate, build_bhw2, build_bhw_multi,
                            build_epr_swap, builtin_matrix,
                            pad_with_ancillas)
from ctcsim.oracle import random_density, random_unitary
from ctcsim.protocol import (ComputationTask, DiscriminationOutcome,
                             LabeledEnsemble, helstrom_bound, labeled_ensemble,
                             run_computation_mixture, run_discrimination,
                             run_superposition, simulate_without_ctc)
from ctcsim.qmat import (ValidationError, kron, mutual_information,
                         partial_trace, trace_distance)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


def proj(v):
    return np.outer(v, v.conj())


def basis(i, d):
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def uniform_ensemble(states):
    n = len(states)
    return labeled_ensemble([(i, 1.0 / n, s) for i, s in enumerate(states)])


# --- labeled ensembles -------------------------------------------------------

def test_ensemble_state_is_classical_quantum():
    ens, rho_ra = uniform_ensemble([KET0, KET1])
    assert isinstance(ens, LabeledEnsemble)
    assert ens.n == 2 and ens.a_dim == 2
    expected = (kron(proj(basis(0, 2)), proj(KET0))
                + kron(proj(basis(1, 2)), proj(KET1))) / 2
    assert np.allclose(rho_ra, expected)
    assert abs(mutual_information(rho_ra, (2, 2)) - 1.0) < 1e-12


def test_single_entry_ensemble_is_pure_marginal():
    ens, rho_ra = labeled_ensemble([(0, 1.0, PLUS)])
    assert ens.n == 1
    assert np.allclose(partial_trace(rho_ra, (1, 2), keep=[1]), proj(PLUS))


def test_zero_plus_marginal():
    _, rho_ra = uniform_ensemble([KET0, PLUS])
    marginal = partial_trace(rho_ra, (2, 2), keep=[1])
    assert np.allclose(marginal, [[0.75, 0.25], [0.25, 0.25]])


def test_duplicate_states_allowed():
    ens, _ = uniform_ensemble([PLUS, PLUS])
    assert ens.n == 2


def test_ensemble_validation():
    with pytest.raises(ValidationError):
        labeled_ensemble([])
    with pytest.raises(ValidationError):
        labeled_ensemble([(0, 0.5, KET0), (2, 0.5, KET1)])  # gap in labels
    with pytest.raises(ValidationError):
        labeled_ensemble([(0, 0.5, KET0), (0, 0.5, KET1)])  # duplicate label
    with pytest.raises(ValidationError):
        labeled_ensemble([(0, 0.6, KET0), (1, 0.6, KET1)])  # sum > 1
    with pytest.raises(ValidationError):
        labeled_ensemble([(0, 1.0, 2 * KET0)])  # not normalized
    with pytest.raises(ValidationError):
        labeled_ensemble([(0, 0.0, KET0), (1, 1.0, KET1)])  # zero weight
    with pytest.raises(ValidationError):
        labeled_ensemble([(0, 0.5, KET0), (1, 0.5, basis(1, 3))])  # mixed dims


# --- discrimination ----------------------------------------------------------

def test_bhw2_mixture_fails_even_for_orthogonal_pair():
    # the discriminator swaps the fixed point onto the output register, so a
    # labeled mixture loses all label correlation even when the two states
    # are orthogonal; only the separate pure runs read out correctly
    circuit = build_bhw2(KET1)
    ens, _ = uniform_ensemble([KET0, KET1])
    outcome = run_discrimination(circuit, ens)
    assert isinstance(outcome, DiscriminationOutcome)
    assert not outcome.success
    assert abs(outcome.success_prob - 0.5) < 1e-9
    assert outcome.mutual_info_bits < 1e-9
    for label, out in outcome.per_pure_outputs:
        assert trace_distance(out, proj(basis(label, 2))) < 1e-9


def test_bhw2_fails_on_labeled_mixture():
    # uniform {|0>, |+>}: each pure input maps to its basis tag, but the
    # labeled mixture leaves the output uncorrelated with the label
    circuit = build_bhw2(PLUS)
    ens, _ = uniform_ensemble([KET0, PLUS])
    outcome = run_discrimination(circuit, ens)
    assert outcome.mutual_info_bits < 1e-9
    assert outcome.product_distance < 1e-9
    assert not outcome.success
    assert abs(outcome.success_prob - 0.5) < 1e-9
    for label, out in outcome.per_pure_outputs:
        assert trace_distance(out, proj(basis(label, 2))) < 1e-9


def test_per_pure_outputs_align_with_labels():
    circuit = build_bhw2(PLUS)
    ens, _ = uniform_ensemble([KET0, PLUS])
    outcome = run_discrimination(circuit, ens)
    assert [label for label, _ in outcome.per_pure_outputs] == [0, 1]


def test_identity_circuit_keeps_label_correlation():
    # a do-nothing circuit on A leaves the classical copy in R intact, so
    # orthogonal inputs stay perfectly distinguishable
    circuit = Circuit(cr_dims=(2,), ctc_dims=(2,), gates=())
    ens, _ = uniform_ensemble([KET0, KET1])
    outcome = run_discrimination(circuit, ens)
    assert outcome.success
    assert abs(outcome.mutual_info_bits - 1.0) < 1e-9


def test_four_state_pairwise_outputs():
    states = [KET0, KET1, PLUS, MINUS]
    circuit = build_bhw_multi(states)
    padded = [pad_with_ancillas(s, circuit.cr_dim) for s in states]
    ens, _ = uniform_ensemble(padded)
    outcome = run_discrimination(circuit, ens)
    outs = [out for _, out in outcome.per_pure_outputs]
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(trace_distance(outs[i], outs[j]) - 1.0) < 1e-9


def test_discrimination_dimension_mismatch():
    circuit = build_bhw2(PLUS)
    ens, _ = uniform_ensemble([basis(0, 3), basis(1, 3)])
    with pytest.raises(ValidationError):
        run_discrimination(circuit, ens)


def test_success_requires_room_for_labels():
    # three labels cannot be read out of a 2-dimensional output register
    circuit = build_bhw2(PLUS)
    ens, _ = uniform_ensemble([KET0, KET1, PLUS])
    with pytest.raises(ValidationError):
        run_discrimination(circuit, ens)


def test_mixture_output_is_product_for_uniform_families():
    # once the time-machine state is fixed by the mixture, the joint output
    # factorizes into (label marginal) x (common output state)
    thetas = [0.3, 0.8, 1.2]
    for theta in thetas:
        psi = np.cos(theta) * KET0 + np.sin(theta) * KET1
        circuit = build_bhw2(psi)
        for p0 in (0.25, 0.5, 0.75):
            ens, _ = labeled_ensemble([(0, p0, KET0), (1, 1 - p0, psi)])
            outcome = run_discrimination(circuit, ens)
            assert outcome.product_distance < 1e-9
            assert outcome.mutual_info_bits < 1e-9
    states = [KET0, KET1, PLUS, MINUS]
    circuit = build_bhw_multi(states)
    padded = [pad_with_ancillas(s, circuit.cr_dim) for s in states]
    ens, _ = uniform_ensemble(padded)
    outcome = run_discrimination(circuit, ens)
    assert outcome.product_distance < 1e-9


def test_output_weights_enter_nonlinearly():
    # swapping the ensemble weights 3/4 <-> 1/4 moves the output register by
    # a full 0.5 in trace distance: the channel the mixture experiences is
    # itself set by the mixture
    circuit = build_bhw2(PLUS)
    ens_a, _ = labeled_ensemble([(0, 0.75, KET0), (1, 0.25, PLUS)])
    ens_b, _ = labeled_ensemble([(0, 0.25, KET0), (1, 0.75, PLUS)])
    out_a = run_discrimination(circuit, ens_a)
    out_b = run_discrimination(circuit, ens_b)
    a_a = partial_trace(out_a.rho_out, (2, 2), keep=[1])
    a_b = partial_trace(out_b.rho_out, (2, 2), keep=[1])
    assert trace_distance(a_a, np.diag([0.75, 0.25])) < 1e-9
    assert trace_distance(a_b, np.diag([0.25, 0.75])) < 1e-9
    gap = trace_distance(a_a, a_b)
    assert gap > 1e-3
    assert abs(gap - 0.5) < 1e-9


# --- superposed labels -------------------------------------------------------

def test_superposition_also_defeats_discrimination():
    circuit = build_bhw2(PLUS)
    ens, _ = uniform_ensemble([KET0, PLUS])
    outcome = run_superposition(circuit, ens)
    assert outcome.mutual_info_bits < 1e-6
    assert not outcome.success


def test_superposition_single_entry_matches_pure_run():
    circuit = build_bhw2(PLUS)
    ens, _ = labeled_ensemble([(0, 1.0, PLUS)])
    sup = run_superposition(circuit, ens)
    mix = run_discrimination(circuit, ens)
    assert trace_distance(sup.rho_out, mix.rho_out) < 1e-12


def test_superposition_through_bare_swap():
    # sqrt(1/2)(|0>|0> + |1>|1>) with A swapped into the time machine: the
    # fixed point is I/2 and the R-A entanglement is fully broken
    circuit = Circuit(cr_dims=(2,), ctc_dims=(2,),
                      gates=(Gate("swap", (0, 1), None),))
    ens, _ = uniform_ensemble([KET0, KET1])
    outcome = run_superposition(circuit, ens)
    assert trace_distance(outcome.rho_out,
                          np.eye(4, dtype=complex) / 4) < 1e-9
    assert outcome.mutual_info_bits < 1e-9
    assert outcome.product_distance < 1e-9


def test_superposition_validates_dimensions():
    circuit = build_bhw2(PLUS)
    ens, _ = uniform_ensemble([basis(0, 3), basis(1, 3)])
    with pytest.raises(ValidationError):
        run_superposition(circuit, ens)


# --- simulation without the time machine -------------------------------------

def test_simulation_reproduces_mixture_run():
    circuit = build_bhw2(PLUS)
    ens, _ = uniform_ensemble([KET0, PLUS])
    real = run_discrimination(circuit, ens)
    sim = simulate_without_ctc(circuit, ens)
    assert trace_distance(real.rho_out, sim.rho_out) < 1e-8
    assert abs(real.mutual_info_bits - sim.mutual_info_bits) < 1e-8
    assert abs(real.success_prob - sim.success_prob) < 1e-8
    # the linear stand-in keeps the channel frozen, so its per-state outputs
    # need not match the per-state runs with their own fixed points; only
    # the labels line up
    assert ([label for label, _ in sim.per_pure_outputs]
            == [label for label, _ in real.per_pure_outputs])


def test_simulation_of_disentangler():
    circuit = build_epr_swap()
    bell = (np.kron(KET0, KET0) + np.kron(KET1, KET1)) / np.sqrt(2)
    ens, _ = labeled_ensemble([(0, 1.0, bell)])
    sim = simulate_without_ctc(circuit, ens)
    a_out = partial_trace(sim.rho_out, (1, 4), keep=[1])
    assert trace_distance(a_out, np.eye(4) / 4) < 1e-9


def test_simulation_matches_on_random_instances():
    for trial in range(10):
        rng = np.random.default_rng([101, trial])
        u = random_unitary(4, rng)
        circuit = Circuit(cr_dims=(2,), ctc_dims=(2,),
                          gates=(Gate("v", (0, 1), u),))
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        s0, s1 = g[0] / np.linalg.norm(g[0]), g[1] / np.linalg.norm(g[1])
        p0 = rng.uniform(0.1, 0.9)
        ens, _ = labeled_ensemble([(0, p0, s0), (1, 1 - p0, s1)])
        real = run_discrimination(circuit, ens)
        sim = simulate_without_ctc(circuit, ens)
        assert trace_distance(real.rho_out, sim.rho_out) < 1e-8


# --- Helstrom bound ----------------------------------------------------------

def test_helstrom_orthogonal_pair():
    ens, _ = uniform_ensemble([KET0, KET1])
    assert abs(helstrom_bound(ens) - 1.0) < 1e-12


def test_helstrom_identical_pair():
    ens, _ = uniform_ensemble([PLUS, PLUS])
    assert abs(helstrom_bound(ens) - 0.5) < 1e-12


def test_helstrom_zero_plus():
    ens, _ = uniform_ensemble([KET0, PLUS])
    assert abs(helstrom_bound(ens) - 0.8535533905932737) < 1e-12


def test_helstrom_needs_exactly_two_entries():
    ens, _ = labeled_ensemble([(0, 1.0, KET0)])
    with pytest.raises(ValidationError):
        helstrom_bound(ens)
    ens3, _ = uniform_ensemble([KET0, KET1, PLUS])
    with pytest.raises(ValidationError):
        helstrom_bound(ens3)


def test_linear_channel_cannot_beat_helstrom():
    # the CTC-free simulation is an ordinary quantum channel, so its success
    # probability must respect the two-state distinguishability bound
    circuit = build_bhw2(PLUS)
    ens, _ = uniform_ensemble([KET0, PLUS])
    sim = simulate_without_ctc(circuit, ens)
    assert sim.success_prob <= helstrom_bound(ens) + 1e-9
    for trial in range(20):
        rng = np.random.default_rng([202, trial])
        u = random_unitary(4, rng)
        c = Circuit(cr_dims=(2,), ctc_dims=(2,), gates=(Gate("v", (0, 1), u),))
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        s0, s1 = g[0] / np.linalg.norm(g[0]), g[1] / np.linalg.norm(g[1])
        p0 = rng.uniform(0.1, 0.9)
        e, _ = labeled_ensemble([(0, p0, s0), (1, 1 - p0, s1)])
        sim = simulate_without_ctc(c, e)
        assert sim.success_prob <= helstrom_bound(e) + 1e-9


# --- computation on labeled mixtures ------------------------------------------

def test_computation_task_validation():
    circuit = build_bhw_multi([basis(i, 4) for i in range(4)])
    ComputationTask(domain_size=4, truth_table=(0, 1, 2, 3), circuit=circuit)
    with pytest.raises(ValidationError):
        ComputationTask(domain_size=4, truth_table=(0, 1, 2), circuit=circuit)
    with pytest.raises(ValidationError):
        ComputationTask(domain_size=4, truth_table=(0, 1, 2, 4),
                        circuit=circuit)
    with pytest.raises(ValidationError):
        ComputationTask(domain_size=0, truth_table=(), circuit=circuit)


def test_identity_computation_on_uniform_mixture_fails():
    # per-input runs compute F perfectly, yet the uniform labeled mixture
    # produces an output with no label correlation at all
    circuit = build_bhw_multi([basis(i, 4) for i in range(4)])
    task = ComputationTask(domain_size=4, truth_table=(0, 1, 2, 3),
                           circuit=circuit)
    result = run_computation_mixture(task)
    assert not result.success
    assert result.mutual_info_bits < 1e-9
    for x, out in result.per_pure_outputs:
        assert trace_distance(out, proj(basis(x, 4))) < 1e-9


def test_two_point_computation_with_swap_gate():
    # X = 2 with F = bit flip done by a plain CR unitary: no time machine
    # involved, so the mixture computes F honestly
    assert builtin_matrix("x", (2,)).shape == (2, 2)
    circuit = Circuit(cr_dims=(2,), ctc_dims=(2,),
                      gates=(Gate("x", (0,), None),))
    task = ComputationTask(domain_size=2, truth_table=(1, 0), circuit=circuit)
    result = run_computation_mixture(task)
    assert result.success
    assert abs(result.mutual_info_bits - 1.0) < 1e-9


def test_computation_checks_circuit_dimension():
    circuit = build_bhw2(PLUS)
    with pytest.raises(ValidationError):
        ComputationTask(domain_size=4, truth_table=(0, 1, 2, 3),
                        circuit=circuit)
