import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circuitgen import random_element
from optigrover.elements import (
    Element, apply_element, branches, bs_matrix, commutes, element_unitary, format_element,
    hwp_matrix, parse_element, rotator_matrix, support,
)
from optigrover.errors import InvalidArgumentError
from optigrover.state import PureState, path_labels

S = 1 / math.sqrt(2)
LABELS4 = path_labels(4)

ONE_OF_EACH = [
    Element("HWP", paths=(1,), theta=22.5),
    Element("BS", pairs=((0, 3),)),
    Element("PHASE", modes=(1, 4), phi=0.7),
    Element("PBS", pairs=((2, 1),)),
    Element("PBS", paths=(0,)),
    Element("ROT", paths=(2,)),
    Element("PC", paths=None, state="on"),
    Element("LC", paths=(0, 3), state="hwp0"),
]


def test_hwp_examples():
    assert np.allclose(hwp_matrix(22.5), S * np.array([[1, 1], [1, -1]]))
    assert np.allclose(hwp_matrix(0), np.diag([1, -1]))
    assert np.allclose(hwp_matrix(45), [[0, 1], [1, 0]])


def test_bs_convention():
    assert np.allclose(bs_matrix() @ [1, 0], [S, 1j * S])
    assert np.allclose(bs_matrix().conj().T @ bs_matrix(), np.eye(2))
    shift = np.diag([1, -1j])  # -pi/2 on b
    assert np.allclose(shift @ bs_matrix() @ shift, S * np.array([[1, 1], [1, -1]]))


def test_rotator_signs():
    r = rotator_matrix()
    assert np.array_equal(r @ [1, 0], [0, 1])
    assert np.array_equal(r @ [0, 1], [-1, 0])
    assert np.array_equal(r @ r, -np.eye(2))


@pytest.mark.parametrize("e", ONE_OF_EACH, ids=lambda e: e.kind)
def test_every_kind_is_unitary(e):
    u = element_unitary(e, 4)
    assert np.abs(u.conj().T @ u - np.eye(8)).max() < 1e-12


@pytest.mark.parametrize("e", ONE_OF_EACH, ids=lambda e: e.kind)
def test_apply_matches_unitary_on_random_states(e):
    rng = np.random.default_rng(11)
    u = element_unitary(e, 4)
    for _ in range(1000):
        v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        s = PureState(v / np.linalg.norm(v))
        out = apply_element(s, e)
        assert np.abs(out.amplitudes - u @ s.amplitudes).max() < 1e-12
        assert abs(out.norm - 1) < 1e-12


@pytest.mark.parametrize("e", ONE_OF_EACH, ids=lambda e: e.kind)
def test_identity_outside_binding(e):
    u = element_unitary(e, 4)
    touched = set(support(e, 4))
    for m in set(range(8)) - touched:
        assert np.array_equal(u[:, m], np.eye(8)[:, m])


def test_apply_examples():
    out = apply_element(PureState.basis(2), Element("HWP", paths=(0,), theta=22.5))
    assert np.allclose(out.amplitudes, [S, S, 0, 0])
    s = PureState(np.array([S, 0, S, 0]))
    out = apply_element(s, Element("PHASE", modes=(2, 3), phi=math.pi))
    assert np.allclose(out.amplitudes, [S, 0, -S, 0])


def test_pbs_routes_v_between_paths():
    u = element_unitary(Element("PBS", pairs=((0, 1),)), 2)
    # H transmits; V of path a exits in path b and vice versa
    assert np.array_equal(np.abs(u), np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]]))


def test_trivial_unitaries():
    assert np.array_equal(element_unitary(Element("PHASE", modes=None, phi=0.0), 2), np.eye(4))
    hh = element_unitary(Element("HWP", paths=(0,), theta=22.5), 2) @ element_unitary(Element("HWP", paths=(0,), theta=22.5), 2)
    assert np.allclose(hh, np.eye(4), atol=1e-15)


@settings(max_examples=300, deadline=None)
@given(st.floats(-360, 360, allow_nan=False))
def test_hwp_is_involution(theta):
    m = hwp_matrix(theta)
    assert np.abs(m @ m - np.eye(2)).max() < 1e-12


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_disjoint_elements_commute(seed):
    rng = np.random.default_rng(seed)
    e1, e2 = random_element(rng, 4), random_element(rng, 4)
    if set(support(e1, 4)) & set(support(e2, 4)):
        return
    u1, u2 = element_unitary(e1, 4), element_unitary(e2, 4)
    assert np.abs(u1 @ u2 - u2 @ u1).max() < 1e-12
    assert commutes(e1, e2, 4)


def test_commutes_detects_noncommuting():
    assert not commutes(Element("HWP", paths=(0,), theta=22.5), Element("HWP", paths=(0,), theta=0.0), 2)
    assert commutes(Element("HWP", paths=None, theta=22.5), Element("BS", pairs=((0, 1),)), 2)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_text_round_trip(seed):
    e = random_element(np.random.default_rng(seed), 4)
    back = parse_element(format_element(e, LABELS4), LABELS4)
    assert back == e


def test_parse_examples():
    labels = ("a", "b")
    assert parse_element("HWP theta=22.5 path=a", labels) == Element("HWP", paths=(0,), theta=22.5)
    assert parse_element("BS paths=a,b", labels) == Element("BS", pairs=((0, 1),))
    assert parse_element("PHASE phi=-1.5707963 modes=b:*", labels) == Element("PHASE", modes=(2, 3), phi=-1.5707963)
    assert parse_element("ROT path=b", labels) == Element("ROT", paths=(1,))
    assert parse_element("PC state=on path=*", labels) == Element("PC", paths=None, state="on")
    assert parse_element("LC state=hwp0 path=* tag=oracle", labels).tag == "oracle"


@pytest.mark.parametrize("line", [
    "HWP theta=22.5 path=z", "FOO path=a", "PC state=maybe path=a", "BS paths=a,a", "HWP theta=x path=a",
])
def test_parse_errors(line):
    with pytest.raises(InvalidArgumentError):
        parse_element(line, ("a", "b"))


def test_binding_to_missing_path():
    with pytest.raises(InvalidArgumentError):
        apply_element(PureState.basis(2), Element("HWP", paths=(3,), theta=10))


@pytest.mark.parametrize("e", ONE_OF_EACH, ids=lambda e: e.kind)
def test_branch_table_reproduces_matrix(e):
    u = element_unitary(e, 4)
    rebuilt = np.eye(8, dtype=complex)
    for src, outs in branches(e, 4).items():
        rebuilt[:, src] = 0
        for dst, f in outs:
            rebuilt[dst, src] += f
    assert np.abs(rebuilt - u).max() < 1e-15
