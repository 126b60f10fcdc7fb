"""Verification engines and the discussion-level studies.

* path sums: amplitudes accumulated trajectory by trajectory
* abstract Grover iteration and its closed-form success law
* interaction-free measurement with the search circuit in a Mach-Zehnder arm
* adjustable decoherence from an interferometer path-length imbalance
* entanglement between the spatial and polarization qubits
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .circuits import Circuit, build_grover_compiled, with_readout
from .elements import Element, branches, evolve
from .errors import InvalidArgumentError
from .oracle import IdealOracle
from .state import DensityMatrix, PureState, mode_index, partial_trace


@dataclass(frozen=True)
class PathContribution:
    steps: tuple[tuple[int, int], ...]  # (element position, mode after it)
    amplitude: complex


def path_contributions(c: Circuit, input_mode: int, output_mode: int, prune: float = 1e-15) -> list[PathContribution]:
    """Every trajectory from ``input_mode`` to ``output_mode``.

    Branches with |factor| < ``prune`` are dropped (they carry amplitude at
    the level of the rounding error of the element matrices).
    """
    tables = [branches(e, c.n_paths) for e in c.elements]
    done: list[PathContribution] = []
    stack = [(0, input_mode, 1.0 + 0j, ())]
    while stack:
        pos, mode, amp, steps = stack.pop()
        if pos == len(tables):
            if mode == output_mode:
                done.append(PathContribution(steps, amp))
            continue
        for out, factor in tables[pos].get(mode, [(mode, 1.0 + 0j)]):
            if abs(factor) >= prune:
                stack.append((pos + 1, out, amp * factor, steps + ((pos, out),)))
    return done


def path_sum_amplitude(c: Circuit, input_mode: int, output_mode: int) -> complex:
    return sum((p.amplitude for p in path_contributions(c, input_mode, output_mode)), 0j)


def path_sum_probability(c: Circuit, input_mode: int, output_mode: int) -> float:
    return abs(path_sum_amplitude(c, input_mode, output_mode)) ** 2


# -- abstract Grover --------------------------------------------------------------

def grover_success_closed_form(N: int, k: int) -> float:
    if N < 2 or k < 0:
        raise InvalidArgumentError(f"need N >= 2 and k >= 0, got N={N}, k={k}")
    return math.sin((2 * k + 1) * math.asin(1 / math.sqrt(N))) ** 2


def abstract_grover_simulate(N: int, marked: int, k: int) -> np.ndarray:
    """Real amplitude vector after k rounds of sign flip plus inversion about the mean."""
    if N < 2 or N & (N - 1):
        raise InvalidArgumentError(f"N must be a power of two >= 2, got {N}")
    if not 0 <= marked < N:
        raise InvalidArgumentError(f"marked index {marked} out of range for N={N}")
    a = np.full(N, 1 / math.sqrt(N))
    for _ in range(k):
        a[marked] = -a[marked]
        a = 2 * a.mean() - a
    return a


def iteration_counts(N: int) -> dict[str, int]:
    """pi sqrt(N) / 8 under floor, round and ceil."""
    x = math.pi * math.sqrt(N) / 8
    return {"floor": math.floor(x), "round": round(x), "ceil": math.ceil(x)}


# -- interaction-free measurement -----------------------------------------------------

IFM_PORTS = {0: "port1", 2: "port2", 1: "grover-other"}


@dataclass(frozen=True)
class IfmResult:
    marked: str
    probabilities: dict[tuple[str, str], float]

    @property
    def dark_port(self) -> float:
        return self.probabilities[("port2", "H")] + self.probabilities[("port2", "V")]

    @property
    def counterfactual(self) -> float:
        """Port 2 with H polarization: the photon never entered the search arm."""
        return self.probabilities[("port2", "H")]

    @property
    def ran(self) -> float:
        """Port 2 with V polarization: the photon went through the search arm."""
        return self.probabilities[("port2", "V")]

    @staticmethod
    def computer_ran(port: str, pol: str) -> bool | None:
        if port != "port2":
            return None
        return pol == "V"


def _embedded(c: Circuit) -> list[Element]:
    """Non-readout elements of ``c`` with all-path bindings made explicit."""
    out = []
    for e in c.elements:
        if e.is_readout:
            continue
        if e.kind == "PHASE" and e.modes is None:
            e = replace(e, modes=tuple(range(c.dim)))
        elif e.kind != "PHASE" and not e.pairs and e.paths is None:
            e = replace(e, paths=tuple(range(c.n_paths)))
        out.append(e)
    return out


def ifm_circuit(marked: str, empty_arm_phase: float | None = None) -> Circuit:
    """Compiled n=2 search circuit inside one arm of an outer Mach-Zehnder.

    Paths: a, b (search circuit), e (empty arm).  The photon enters path a
    and meets the outer splitter (a, e) first; the recombining splitter
    joins e with the search circuit's a output.  By default the empty-arm
    phase makes port 2 dark when '00' is marked.
    """
    core = _embedded(build_grover_compiled(2, IdealOracle(marked)))
    if empty_arm_phase is None:
        empty_arm_phase = dark_port_phase()
    labels = ("a", "b", "e")
    elements = [Element("BS", pairs=((0, 2),)), *core,
                Element("PHASE", modes=(4, 5), phi=empty_arm_phase),
                Element("BS", pairs=((0, 2),))]
    return Circuit(labels, with_readout(labels, elements), name=f"ifm-{marked}")


def dark_port_phase() -> float:
    """Empty-arm phase zeroing the port-2 H amplitude when '00' is marked.

    With search-arm amplitude g at aH, port 2 receives i(g + e^{i phi})/2,
    so phi = arg(-g).
    """
    core = _embedded(build_grover_compiled(2, IdealOracle("00")))
    g = evolve(core, 2, PureState.basis(2).amplitudes)[mode_index(0, "H")]
    return float(np.angle(-g))


def ifm_simulate(marked: str) -> IfmResult:
    if marked not in ("00", "01", "10", "11"):
        raise InvalidArgumentError(f"marked must be a 2-bit string, got {marked!r}")
    c = ifm_circuit(marked)
    probs = np.abs(evolve(c.elements, c.n_paths, PureState.basis(3).amplitudes)) ** 2
    table = {}
    for path, port in IFM_PORTS.items():
        for k, pol in enumerate("HV"):
            table[(port, pol)] = float(probs[2 * path + k])
    return IfmResult(marked, table)


# -- decoherence --------------------------------------------------------------------------

def coherence_factor(delta_L: float, L_c: float) -> float:
    """Gaussian-lineshape visibility exp(-dL^2 / (2 Lc^2))."""
    if L_c <= 0:
        raise InvalidArgumentError(f"coherence length must be > 0, got {L_c}")
    if delta_L < 0:
        raise InvalidArgumentError(f"path imbalance must be >= 0, got {delta_L}")
    return math.exp(-(delta_L**2) / (2 * L_c**2))


def _arm_modes(n_paths: int, arm_paths) -> np.ndarray:
    return np.array(sorted(m for p in arm_paths for m in (2 * p, 2 * p + 1)), dtype=np.intp)


def dephase(rho: DensityMatrix, arm1, arm2, gamma: float) -> DensityMatrix:
    """Scale coherences between the two arms' modes by gamma."""
    n_paths = rho.dim // 2
    m = np.array(rho.matrix)
    i1, i2 = _arm_modes(n_paths, arm1), _arm_modes(n_paths, arm2)
    m[np.ix_(i1, i2)] *= gamma
    m[np.ix_(i2, i1)] *= gamma
    return DensityMatrix(m)


def decohere(c: Circuit, state: PureState, split: int, arm1, arm2, delta_L: float, L_c: float) -> DensityMatrix:
    """Run ``c`` with the two arms made partially incoherent at element ``split``.

    Elements before ``split`` act coherently; the state is then dephased
    between paths ``arm1`` and ``arm2`` and the rest of the circuit acts on
    the resulting density matrix.
    """
    return dephased_run(c, state, split, arm1, arm2, coherence_factor(delta_L, L_c))


def dephased_run(c: Circuit, state: PureState, split: int, arm1, arm2, gamma: float) -> DensityMatrix:
    """As ``decohere`` but with the coherence factor given directly (0 <= gamma <= 1)."""
    if not 0.0 <= gamma <= 1.0:
        raise InvalidArgumentError(f"gamma must be in [0, 1], got {gamma}")
    psi = evolve(c.elements[:split], c.n_paths, state.amplitudes)
    rho = dephase(DensityMatrix(np.outer(psi, psi.conj())), arm1, arm2, gamma)
    u = evolve(c.elements[split:], c.n_paths, np.eye(c.dim, dtype=np.complex128))
    return DensityMatrix(u @ rho.matrix @ u.conj().T)


def incoherent_mixture(c: Circuit, state: PureState, split: int, arm1, arm2) -> np.ndarray:
    """Detector distribution when each arm is propagated on its own and the results are added."""
    psi = evolve(c.elements[:split], c.n_paths, state.amplitudes)
    total = np.zeros(c.dim)
    for arm in (arm1, arm2):
        part = np.zeros_like(psi)
        idx = _arm_modes(c.n_paths, arm)
        part[idx] = psi[idx]
        total += np.abs(evolve(c.elements[split:], c.n_paths, part)) ** 2
    return total


# outer interferometer of an IFM circuit: dephase after the first splitter,
# search arm (paths a, b) against the empty arm (path e)
IFM_SPLIT = 1
IFM_ARMS = ((0, 1), (2,))


def fringe_visibility(marked: str, gamma: float, points: int = 64) -> float:
    """Port-2 fringe visibility of the outer Mach-Zehnder as the empty-arm phase is scanned."""
    vals = []
    for phi in np.linspace(0, 2 * np.pi, points, endpoint=False):
        c = ifm_circuit(marked, empty_arm_phase=float(phi))
        probs = dephased_run(c, PureState.basis(3), IFM_SPLIT, *IFM_ARMS, gamma).probabilities()
        vals.append(probs[4] + probs[5])
    hi, lo = max(vals), min(vals)
    return float((hi - lo) / (hi + lo))


# -- entanglement ----------------------------------------------------------------------------

def entanglement_witness(state: PureState) -> float:
    """Linear entropy 2(1 - purity) of the polarization reduction (n=2)."""
    if state.dim != 4:
        raise InvalidArgumentError(f"expected an n=2 state (4 modes), got {state.dim}")
    return 2.0 * (1.0 - partial_trace(state, "polarization").purity)
