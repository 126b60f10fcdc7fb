"""Circuit IR, Grover builders, simulation and detector readout."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple

import numpy as np

from .elements import Element, evolve, format_element, parse_element
from .errors import InvalidArgumentError, InvalidStateError
from .oracle import IdealOracle, OracleSetting, oracle_elements
from .state import POLS, PureState, mode_of, path_labels

MAX_QUBITS = 10
HALF_PI = np.pi / 2


@dataclass(frozen=True)
class Circuit:
    labels: tuple[str, ...]
    elements: tuple[Element, ...]
    name: str = "circuit"
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.labels or len(set(self.labels)) != len(self.labels):
            raise InvalidArgumentError(f"path labels must be unique and non-empty: {self.labels}")
        for lab in self.labels:
            if not lab or any(ch in lab for ch in ",;:=* \t"):
                raise InvalidArgumentError(f"bad path label {lab!r}")
        if self.n is not None and 2 ** (self.n - 1) != len(self.labels):
            raise InvalidArgumentError(f"n={self.n} needs {2 ** (self.n - 1)} paths, got {len(self.labels)}")
        for e in self.elements:
            for p in e.touched_paths(len(self.labels)):
                if not 0 <= p < len(self.labels):
                    raise InvalidArgumentError(f"{e.kind} binds path {p}; registry has {len(self.labels)} paths")

    @property
    def n_paths(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return 2 * self.n_paths

    def with_elements(self, elements: Iterable[Element], **changes) -> "Circuit":
        return replace(self, elements=tuple(elements), **changes)

    def unitary(self) -> np.ndarray:
        return evolve(self.elements, self.n_paths, np.eye(self.dim, dtype=np.complex128))

    def to_text(self) -> str:
        n = "-" if self.n is None else str(self.n)
        lines = [f"CIRCUIT name={self.name} n={n} paths={','.join(self.labels)}"]
        lines += [format_element(e, self.labels) for e in self.elements]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines or not lines[0].startswith("CIRCUIT"):
            raise InvalidArgumentError("circuit file must start with a CIRCUIT header line")
        header = dict(tok.partition("=")[::2] for tok in lines[0].split()[1:])
        if "paths" not in header:
            raise InvalidArgumentError("CIRCUIT header needs paths=")
        paths = header["paths"]
        labels = path_labels(int(paths)) if paths.isdigit() else tuple(paths.split(","))
        n = header.get("n", "-")
        elements = [parse_element(ln, labels) for ln in lines[1:]]
        return cls(labels, tuple(elements), name=header.get("name", "circuit"),
                   n=None if n in ("-", "") else int(n))


class DetectorOutcome(NamedTuple):
    detector: int
    port: str
    pol: str
    probability: float


def input_state(n_or_paths: int | Circuit) -> PureState:
    """Single H-polarized photon in the first path.

    An int is read as a qubit count; a circuit supplies its own path count.
    """
    if isinstance(n_or_paths, Circuit):
        return PureState.basis(n_or_paths.n_paths)
    return PureState.basis(2 ** (n_or_paths - 1))


def simulate(c: Circuit, state: PureState) -> PureState:
    if state.dim != c.dim:
        raise InvalidArgumentError(f"state has {state.dim} modes, circuit has {c.dim}")
    return PureState(evolve(c.elements, c.n_paths, state.amplitudes))


def readout_paths(c: Circuit) -> set[int]:
    covered: set[int] = set()
    for e in reversed(c.elements):
        if not e.is_readout:
            break
        covered |= set(e.touched_paths(c.n_paths))
    return covered


def detector_probabilities(c: Circuit, state: PureState) -> list[DetectorOutcome]:
    """Probability per (port, polarization); detector k reads mode k-1."""
    if readout_paths(c) != set(range(c.n_paths)):
        raise InvalidStateError(f"circuit {c.name!r} does not end in a PBS readout layer on every path")
    probs = simulate(c, state).probabilities()
    out = []
    for k, p in enumerate(probs):
        mode = mode_of(k)
        out.append(DetectorOutcome(k + 1, c.labels[mode.path], mode.pol, float(p)))
    return out


def with_readout(labels, elements) -> tuple[Element, ...]:
    return tuple(elements) + tuple(Element("PBS", paths=(p,)) for p in range(len(labels)))


# -- builders -----------------------------------------------------------------

def _phase_path(phi: float, path: int) -> Element:
    return Element("PHASE", modes=(2 * path, 2 * path + 1), phi=phi)


def wh_stage(n: int) -> list[Element]:
    """Walsh-Hadamard on every qubit, one element per path or path pair.

    Polarization: HWP at 22.5 degrees in every path.  Spatial qubit j (the
    j-th beamsplitter level): on each pair of paths differing in that bit, a
    -pi/2 shifter on the '1' path, a 50-50 BS, and another -pi/2 shifter.
    """
    n_paths = 2 ** (n - 1)
    out = [Element("HWP", paths=(p,), theta=22.5) for p in range(n_paths)]
    for j in range(n - 1):
        bit = 1 << (n - 2 - j)
        pairs = [(p, p | bit) for p in range(n_paths) if not p & bit]
        shifters = [_phase_path(-HALF_PI, q) for _, q in pairs]
        out += shifters
        out += [Element("BS", pairs=(pq,)) for pq in pairs]
        out += shifters
    return out


def inversion_stage(n: int) -> list[Element]:
    """pi phase on every element except |0...0>.

    Glass (pi) in every path but the first, then a fast-axis-horizontal HWP in
    the first path to flip the sign of its V mode.
    """
    n_paths = 2 ** (n - 1)
    return [_phase_path(np.pi, p) for p in range(1, n_paths)] + [Element("HWP", paths=(0,), theta=0.0)]


def default_iterations(n: int) -> int:
    return max(1, round(math.pi * math.sqrt(2**n) / 8))


def _check_oracle(n: int, oracle: OracleSetting) -> None:
    if isinstance(oracle, IdealOracle) and len(oracle.marked) != n:
        raise InvalidArgumentError(f"oracle marks {oracle.marked!r}, circuit has {n} qubits")


def build_grover_generic(n: int, oracle: OracleSetting, iterations: int | None = None) -> Circuit:
    if not 2 <= n <= MAX_QUBITS:
        raise InvalidArgumentError(f"n must be in [2, {MAX_QUBITS}], got {n}")
    k = default_iterations(n) if iterations is None else iterations
    if k < 1:
        raise InvalidArgumentError(f"iterations must be >= 1, got {k}")
    _check_oracle(n, oracle)
    labels = path_labels(2 ** (n - 1))
    elements = wh_stage(n)
    for _ in range(k):
        elements += list(oracle_elements(oracle, n)) + wh_stage(n) + inversion_stage(n) + wh_stage(n)
    return Circuit(labels, with_readout(labels, elements), name=f"grover{n}", n=n)


def build_grover_uncompiled(n: int, oracle: OracleSetting) -> Circuit:
    """One-to-one coding: every operation realized by its own element(s)."""
    if n != 2:
        raise InvalidArgumentError(f"the one-to-one layout is defined for n=2, got {n}")
    return replace(build_grover_generic(2, oracle, 1), name="grover2-uncompiled")


def build_grover_compiled(n: int, oracle: OracleSetting) -> Circuit:
    """Consolidated n=2 layout.

    The second-stage HWPs move past the second BS; HWP.pi_V.HWP in path a
    becomes one HWP at 45 degrees, HWP.HWP in path b vanishes, and the
    shifters around the inversion (-pi/2 + pi - pi/2) cancel.
    """
    if n != 2:
        raise InvalidArgumentError(f"the compiled layout is defined for n=2, got {n}")
    _check_oracle(2, oracle)
    b = 1
    elements = [
        Element("HWP", paths=None, theta=22.5),
        _phase_path(-HALF_PI, b),
        Element("BS", pairs=((0, 1),)),
        _phase_path(-HALF_PI, b),
        *oracle_elements(oracle, 2),
        _phase_path(-HALF_PI, b),
        Element("BS", pairs=((0, 1),)),
        Element("HWP", paths=(0,), theta=45.0),
        Element("BS", pairs=((0, 1),)),
        _phase_path(-HALF_PI, b),
    ]
    labels = path_labels(2)
    return Circuit(labels, with_readout(labels, elements), name="grover2-compiled", n=2)


def birefringent_variant(c: Circuit, phi: float) -> Circuit:
    """Compiled n=2 circuit with retro-reflector birefringence diag(1, e^{i phi}).

    The 45 degree HWP in path a is replaced by its three-path physical form:
    HWP45 on b, reflection, HWP45 on a and b, reflection.
    """
    out = []
    found = False
    for e in c.elements:
        if e.kind == "HWP" and e.paths == (0,) and abs(e.theta - 45.0) < 1e-12 and not found:
            refl = Element("PHASE", modes=tuple(range(1, c.dim, 2)), phi=phi)
            out += [Element("HWP", paths=(1,), theta=45.0), refl, Element("HWP", paths=(0, 1), theta=45.0), refl]
            found = True
        else:
            out.append(e)
    if not found:
        raise InvalidArgumentError("circuit has no 45 degree HWP in path a")
    return c.with_elements(out, name=c.name + "-birefringent")


BUILTIN_NAMES = ("grover2-uncompiled", "grover2-compiled", "grover<n>")


def builtin_circuit(name: str, oracle: OracleSetting, iterations: int | None = None) -> Circuit:
    if name == "grover2-uncompiled":
        return build_grover_uncompiled(2, oracle)
    if name == "grover2-compiled":
        return build_grover_compiled(2, oracle)
    if name.startswith("grover") and name[6:].isdigit():
        return build_grover_generic(int(name[6:]), oracle, iterations)
    raise InvalidArgumentError(f"unknown built-in circuit {name!r}; known: {', '.join(BUILTIN_NAMES)}")


__all__ = [
    "Circuit", "DetectorOutcome", "simulate", "detector_probabilities", "input_state",
    "build_grover_generic", "build_grover_uncompiled", "build_grover_compiled",
    "builtin_circuit", "birefringent_variant", "wh_stage", "inversion_stage", "POLS",
]
