import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optigrover import oracle
from optigrover.circuits import birefringent_variant, build_grover_compiled, detector_probabilities, input_state
from optigrover.elements import Element
from optigrover.errors import InvalidArgumentError, ModelInconsistencyError
from optigrover.oracle import (
    ElectroOpticOracle, IdealOracle, NoiseModel, electro_optic_oracle_net, ideal_oracle_unitary,
    noisy_oracle_unitary, oracle_marked_element, parse_oracle,
)
from optigrover.state import uniform_superposition

E = np.eye(4)


def images(u):
    return [u[:, k] for k in range(4)]


def test_ideal_oracle_examples():
    out = ideal_oracle_unitary("01", 2) @ uniform_superposition(2).amplitudes
    assert np.allclose(out, np.array([1, -1, 1, 1]) / 2)
    assert np.array_equal(ideal_oracle_unitary("00", 2), np.diag([-1, 1, 1, 1]))
    for m in ("000", "101", "111"):
        u = ideal_oracle_unitary(m, 3)
        assert np.array_equal(u @ u, np.eye(8))
    with pytest.raises(InvalidArgumentError):
        ideal_oracle_unitary("0", 2)


@pytest.mark.parametrize("pc,lc,expected", [
    # aH, aV, bH, bV images
    ("0kV", "2.2V", [E[0], -E[1], -E[3], -E[2]]),
    ("3.9kV", "5.6V", [E[0], -E[1], E[3], E[2]]),
    ("0kV", "5.6V", [E[0], E[1], E[3], -E[2]]),
])
def test_net_unitary_basis_maps(pc, lc, expected):
    for got, want in zip(images(electro_optic_oracle_net(pc, lc)), expected):
        assert np.array_equal(got, want)


@pytest.mark.parametrize("pc,lc", oracle.EO_SETTINGS)
def test_net_unitary_properties(pc, lc):
    u = electro_optic_oracle_net(pc, lc)
    assert np.abs(u.conj().T @ u - E).max() < 1e-12
    # each path's block squares to a phase times identity; the rotator on
    # path b alone makes that phase -1 there and +1 on path a
    sq = u @ u
    for p in range(2):
        blk = sq[2 * p:2 * p + 2, 2 * p:2 * p + 2]
        assert np.abs(blk - blk[0, 0] * np.eye(2)).max() < 1e-12 and abs(abs(blk[0, 0]) - 1) < 1e-12
    assert np.abs(sq[:2, 2:]).max() == 0 and np.abs(sq[2:, :2]).max() == 0


def test_rotator_settings_square_to_relative_path_phase():
    for pc, lc in (("0kV", "5.6V"), ("3.9kV", "2.2V")):
        u = electro_optic_oracle_net(pc, lc)
        assert np.array_equal(u @ u, np.diag([1, 1, -1, -1]).astype(complex))


def test_marked_bijection():
    got = {(pc, lc): oracle_marked_element(pc, lc) for pc, lc in oracle.EO_SETTINGS}
    assert got == {("0kV", "2.2V"): "00", ("0kV", "5.6V"): "10", ("3.9kV", "2.2V"): "11", ("3.9kV", "5.6V"): "01"}
    for _, _, ov in oracle.orthogonality_pairs():
        assert ov < 1e-12


def test_marked_element_inconsistency(monkeypatch):
    monkeypatch.setattr(oracle, "electro_optic_oracle_net", lambda pc, lc: np.eye(4, dtype=complex))
    with pytest.raises(ModelInconsistencyError):
        oracle_marked_element("0kV", "2.2V")


def test_end_to_end_single_query():
    for pc, lc in oracle.EO_SETTINGS:
        s = ElectroOpticOracle(pc, lc)
        out = detector_probabilities(build_grover_compiled(2, s), input_state(2))
        k = int(oracle_marked_element(pc, lc), 2)
        assert abs(out[k].probability - 1) < 1e-9


def test_parse_oracle():
    assert parse_oracle("ideal:101") == IdealOracle("101")
    assert parse_oracle("eo:3.9kV,2.2V") == ElectroOpticOracle("3.9kV", "2.2V")
    for bad in ("ideal:", "ideal:012", "eo:1kV,2.2V", "eo:0kV", "magic:1"):
        with pytest.raises(InvalidArgumentError):
            parse_oracle(bad)


def test_noise_model_validation():
    with pytest.raises(InvalidArgumentError):
        NoiseModel(-0.1, 0)


@pytest.mark.parametrize("setting", [ElectroOpticOracle(pc, lc) for pc, lc in oracle.EO_SETTINGS] + [IdealOracle("10")])
def test_sigma_zero_is_bit_identical(setting):
    assert np.array_equal(noisy_oracle_unitary(setting, NoiseModel(0.0, 3)), oracle.oracle_unitary(setting, 2))


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2), st.integers(0, 10**6))
def test_noisy_oracle_is_unitary_and_seeded(sigma, seed):
    s = ElectroOpticOracle("3.9kV", "5.6V")
    u = noisy_oracle_unitary(s, NoiseModel(sigma, seed))
    assert np.abs(u.conj().T @ u - E).max() < 1e-12
    assert np.array_equal(u, noisy_oracle_unitary(s, NoiseModel(sigma, seed)))


def test_noise_draws_match_monte_carlo_kernel():
    s = ElectroOpticOracle("0kV", "5.6V")
    errs = oracle.oracle_error_samples(s, 0.3, range(20))
    c = build_grover_compiled(2, s)
    pre, post = oracle._split_at_oracle(c)
    from optigrover.elements import evolve
    psi = evolve(pre, 2, input_state(2).amplitudes)
    post_u = evolve(post, 2, np.eye(4, dtype=complex))
    k = int(oracle_marked_element(s.pc, s.lc), 2)
    for seed, err in zip(range(20), errs):
        amp = (post_u @ noisy_oracle_unitary(s, NoiseModel(0.3, seed)) @ psi)[k]
        assert abs((1 - abs(amp) ** 2) - err) < 1e-12


def test_noise_sweep_monotone_small_grid():
    rows = oracle.noise_sweep([0, 0.1, 0.2, 0.4], n_seeds=300, seed=5)
    means = [m for _, m, _ in rows]
    assert means[0] < 1e-12 and all(b > a for a, b in zip(means, means[1:]))


def test_detector_matrix_rows_sum_to_one():
    for sigma in (0.0, 0.2):
        for row in oracle.detector_matrix(sigma, n_seeds=50, seed=1):
            assert abs(sum(row[2:]) - 1) < 1e-9
    noiseless = oracle.detector_matrix(0.0)
    for label, marked, *p in noiseless:
        assert abs(p[int(marked, 2)] - 1) < 1e-9


def test_calibration_hits_target():
    sigma = oracle.calibrate_sigma(0.028, n_seeds=200, seed=0)
    mean, _ = oracle.mean_error(sigma, n_seeds=200, seed=0)
    assert abs(mean - 0.028) < 1e-6


@pytest.mark.parametrize("phi", [0, math.pi / 7, math.pi / 3, math.pi / 2, math.pi, 3 * math.pi / 2])
def test_birefringence_invariance(phi):
    assert oracle.common_birefringence_invariance_check(phi)


def test_naive_single_path_birefringence_is_not_invariant():
    # the phase must be common to every path; on path a alone it leaks
    s = ElectroOpticOracle("0kV", "2.2V")
    base = build_grover_compiled(2, s)
    k = next(i for i, e in enumerate(base.elements) if e.kind == "HWP" and e.theta == 45.0)
    leaky = base.with_elements(base.elements[:k] + (Element("PHASE", modes=(1,), phi=math.pi / 3),) + base.elements[k:])
    p0 = [o.probability for o in detector_probabilities(base, input_state(2))]
    p1 = [o.probability for o in detector_probabilities(leaky, input_state(2))]
    assert max(abs(a - b) for a, b in zip(p0, p1)) > 1e-3


def test_birefringent_variant_structure():
    c = birefringent_variant(build_grover_compiled(2, IdealOracle("00")), 0.4)
    kinds = [e.kind for e in c.elements]
    assert kinds.count("HWP") == 3
    with pytest.raises(InvalidArgumentError):
        birefringent_variant(c.with_elements([]), 0.4)
