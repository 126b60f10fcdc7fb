"""Oracle models: ideal phase marking, the electro-optic device, and phase noise.

The electro-optic Oracle sits in a displaced Sagnac loop.  Both paths share
the Pockels cell (PC) and liquid-crystal retarder (LC) but traverse them in
opposite order; only path b meets the quartz rotator.  Per-path traversal:

    path a: LC, PC
    path b: PC, ROT, LC

PC at 3.9 kV and LC at 2.2 V act as diag(1, -1); PC at 0 kV and LC at 5.6 V
act as glass.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _accel
from .elements import Element, retarder_matrix, rotator_matrix
from .errors import InvalidArgumentError, ModelInconsistencyError
from .state import BasisConvention, PureState, uniform_superposition

PC_VOLTAGES = {"0kV": "off", "3.9kV": "on"}
LC_VOLTAGES = {"2.2V": "hwp0", "5.6V": "glass"}
EO_SETTINGS = tuple((pc, lc) for pc in PC_VOLTAGES for lc in LC_VOLTAGES)

# component -> paths it intercepts; traversal order per path (path index -> names)
EO_LAYOUT = {0: ("LC", "PC"), 1: ("PC", "ROT", "LC")}
EO_COMPONENTS = ("PC", "ROT", "LC")

RNG_ALGORITHM = "numpy.random.default_rng (PCG64) seeded with the integer seed"


@dataclass(frozen=True)
class IdealOracle:
    marked: str

    def __post_init__(self):
        if not self.marked or set(self.marked) - {"0", "1"}:
            raise InvalidArgumentError(f"marked element must be a bit string, got {self.marked!r}")

    def label(self) -> str:
        return f"ideal:{self.marked}"


@dataclass(frozen=True)
class ElectroOpticOracle:
    pc: str
    lc: str

    def __post_init__(self):
        if self.pc not in PC_VOLTAGES:
            raise InvalidArgumentError(f"Pockels cell voltage must be one of {list(PC_VOLTAGES)}, got {self.pc!r}")
        if self.lc not in LC_VOLTAGES:
            raise InvalidArgumentError(f"liquid crystal voltage must be one of {list(LC_VOLTAGES)}, got {self.lc!r}")

    def label(self) -> str:
        return f"eo:{self.pc},{self.lc}"


OracleSetting = IdealOracle | ElectroOpticOracle


def parse_oracle(text: str) -> OracleSetting:
    """``ideal:<bits>`` or ``eo:<pc>,<lc>``."""
    kind, _, rest = text.partition(":")
    if kind == "ideal":
        return IdealOracle(rest)
    if kind == "eo":
        pc, _, lc = rest.partition(",")
        return ElectroOpticOracle(pc, lc)
    raise InvalidArgumentError(f"oracle must be 'ideal:<bits>' or 'eo:<pc>,<lc>', got {text!r}")


def ideal_oracle_unitary(marked: str, n: int) -> np.ndarray:
    if len(marked) != n:
        raise InvalidArgumentError(f"marked element {marked!r} does not have {n} bits")
    diag = np.ones(2**n, dtype=np.complex128)
    diag[BasisConvention(n).index(marked)] = -1.0
    return np.diag(diag)


def _component_matrix(name: str, setting: ElectroOpticOracle) -> np.ndarray:
    if name == "PC":
        return retarder_matrix(PC_VOLTAGES[setting.pc] == "on")
    if name == "LC":
        return retarder_matrix(LC_VOLTAGES[setting.lc] == "hwp0")
    return rotator_matrix()


def _per_path_blocks(setting: OracleSetting, n: int, deltas: np.ndarray | None = None):
    """Per-path 2x2 products of the oracle components, noise optional.

    ``deltas`` has shape (components, paths, 2); component k on path p is
    replaced by diag(e^{i d[k,p,0]}, e^{i d[k,p,1]}) @ component.
    """
    n_paths = 2 ** (n - 1)
    names, layout = oracle_components(setting, n)
    blocks = []
    for p in range(n_paths):
        m = np.eye(2, dtype=np.complex128)
        for name in layout[p]:
            k = names.index(name)
            comp = _component_block(setting, name, p, n)
            if deltas is not None:
                comp = np.diag(np.exp(1j * deltas[k, p])) @ comp
            m = comp @ m
        blocks.append(m)
    return blocks


def oracle_components(setting: OracleSetting, n: int):
    """Component names and per-path traversal order."""
    if isinstance(setting, IdealOracle):
        return ("MARK",), {p: ("MARK",) for p in range(2 ** (n - 1))}
    if n != 2:
        raise InvalidArgumentError("the electro-optic oracle is defined for n=2 only")
    return EO_COMPONENTS, EO_LAYOUT


def _component_block(setting: OracleSetting, name: str, path: int, n: int) -> np.ndarray:
    if isinstance(setting, IdealOracle):
        idx = BasisConvention(n).index(setting.marked)
        d = np.ones(2, dtype=np.complex128)
        if idx // 2 == path:
            d[idx % 2] = -1.0
        return np.diag(d)
    return _component_matrix(name, setting)


def _block_diag(blocks) -> np.ndarray:
    u = np.zeros((2 * len(blocks), 2 * len(blocks)), dtype=np.complex128)
    for p, b in enumerate(blocks):
        u[2 * p:2 * p + 2, 2 * p:2 * p + 2] = b
    return u


def electro_optic_oracle_net(pc: str, lc: str) -> np.ndarray:
    """Net 4x4 unitary of the Sagnac Oracle over (aH, aV, bH, bV)."""
    return _block_diag(_per_path_blocks(ElectroOpticOracle(pc, lc), 2))


def oracle_unitary(setting: OracleSetting, n: int) -> np.ndarray:
    if isinstance(setting, IdealOracle):
        return ideal_oracle_unitary(setting.marked, n)
    return _block_diag(_per_path_blocks(setting, n))


def oracle_marked_element(pc: str, lc: str) -> str:
    """Which database element the electro-optic setting marks.

    Determined by comparing the post-oracle uniform state with each ideal
    oracle's output up to global phase.
    """
    psi = uniform_superposition(2).amplitudes
    out = electro_optic_oracle_net(pc, lc) @ psi
    basis = BasisConvention(2)
    hits = []
    for idx in range(4):
        ideal = ideal_oracle_unitary(basis.bits(idx), 2) @ psi
        if abs(abs(np.vdot(ideal, out)) - 1.0) < 1e-12:
            hits.append(basis.bits(idx))
    if len(hits) != 1:
        raise ModelInconsistencyError(f"setting ({pc}, {lc}) matches ideal oracles {hits}")
    return hits[0]


def marked_element(setting: OracleSetting) -> str:
    if isinstance(setting, IdealOracle):
        return setting.marked
    return oracle_marked_element(setting.pc, setting.lc)


def post_oracle_overlaps() -> np.ndarray:
    """|<out_i|out_j>| for the four electro-optic settings on uniform input."""
    psi = uniform_superposition(2).amplitudes
    outs = [electro_optic_oracle_net(pc, lc) @ psi for pc, lc in EO_SETTINGS]
    return np.array([[abs(np.vdot(a, b)) for b in outs] for a in outs])


def oracle_elements(setting: OracleSetting, n: int) -> tuple[Element, ...]:
    """Circuit elements realizing the oracle; all carry ``tag='oracle'``.

    The Sagnac device is laid out as PC (both paths), ROT (path b), LC (both
    paths).  Path a then sees PC before LC rather than LC before PC; both are
    diagonal, so the net unitary matches the traversal order above.
    """
    if isinstance(setting, IdealOracle):
        idx = BasisConvention(n).index(setting.marked)
        return (Element("PHASE", modes=(idx,), phi=np.pi, tag="oracle"),)
    if n != 2:
        raise InvalidArgumentError("the electro-optic oracle is defined for n=2 only")
    return (
        Element("PC", paths=None, state=PC_VOLTAGES[setting.pc], tag="oracle"),
        Element("ROT", paths=(1,), tag="oracle"),
        Element("LC", paths=None, state=LC_VOLTAGES[setting.lc], tag="oracle"),
    )


# -- noise --------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """I.i.d. Gaussian phase error per component, per path, per polarization."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidArgumentError(f"sigma must be >= 0, got {self.sigma}")


def _noise_shape(setting: OracleSetting, n: int) -> tuple[int, int, int]:
    names, _ = oracle_components(setting, n)
    return len(names), 2 ** (n - 1), 2


def draw_standard_deltas(setting: OracleSetting, n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(_noise_shape(setting, n))


def noisy_oracle_unitary(setting: OracleSetting, noise: NoiseModel, n: int = 2) -> np.ndarray:
    deltas = noise.sigma * draw_standard_deltas(setting, n, noise.seed)
    return _block_diag(_per_path_blocks(setting, n, deltas))


def _split_at_oracle(circuit):
    idx = [k for k, e in enumerate(circuit.elements) if e.tag == "oracle"]
    if not idx or idx != list(range(idx[0], idx[-1] + 1)):
        raise InvalidArgumentError("circuit must contain one contiguous oracle block")
    return circuit.elements[: idx[0]], circuit.elements[idx[-1] + 1:]


def _mc_inputs(setting: OracleSetting, n: int):
    from .circuits import build_grover_compiled, build_grover_generic, input_state
    from .elements import evolve

    if n == 2:
        circuit = build_grover_compiled(2, setting)
    else:
        circuit = build_grover_generic(n, setting, 1)
    pre, post = _split_at_oracle(circuit)
    n_paths = circuit.n_paths
    psi = evolve(pre, n_paths, input_state(circuit).amplitudes).reshape(n_paths, 2)
    post_u = evolve(post, n_paths, np.eye(2 * n_paths, dtype=np.complex128))
    names, layout = oracle_components(setting, n)
    blocks = np.zeros((len(names), n_paths, 2, 2), dtype=np.complex128)
    order = -np.ones((n_paths, len(names)), dtype=np.intp)
    for p in range(n_paths):
        for k, name in enumerate(names):
            blocks[k, p] = _component_block(setting, name, p, n)
        for j, name in enumerate(layout[p]):
            order[p, j] = names.index(name)
    target = BasisConvention(n).index(marked_element(setting))
    return psi, blocks, order, post_u, target


def oracle_error_samples(setting: OracleSetting, sigma: float, seeds, n: int = 2,
                         standard: np.ndarray | None = None) -> np.ndarray:
    """Wrong-detector probability for each seed's noise draw.

    Seed ``s`` uses the same draw as ``noisy_oracle_unitary(setting,
    NoiseModel(sigma, s))``, so sweeps over sigma share random numbers.
    """
    psi, blocks, order, post_u, target = _mc_inputs(setting, n)
    if standard is None:
        standard = np.stack([draw_standard_deltas(setting, n, s) for s in seeds])
    deltas = np.ascontiguousarray(sigma * standard)
    return _accel.oracle_errors(psi, blocks, order, deltas, post_u, target)


def detector_matrix(sigma: float = 0.0, n_seeds: int = 1000, seed: int = 0) -> list[tuple]:
    """Rows (setting label, marked, p1..p4) for the compiled n=2 circuit with the electro-optic oracle.

    With sigma > 0 each row averages the detector distribution over seeds
    ``seed .. seed + n_seeds - 1``.
    """
    from .circuits import build_grover_compiled, input_state
    from .elements import evolve

    rows = []
    for s in all_settings(2, True):
        c = build_grover_compiled(2, s)
        pre, post = _split_at_oracle(c)
        psi = evolve(pre, 2, input_state(c).amplitudes)
        post_u = evolve(post, 2, np.eye(4, dtype=np.complex128))
        if sigma == 0:
            probs = np.abs(post_u @ oracle_unitary(s, 2) @ psi) ** 2
        else:
            probs = np.mean([np.abs(post_u @ noisy_oracle_unitary(s, NoiseModel(sigma, seed + k)) @ psi) ** 2
                             for k in range(n_seeds)], axis=0)
        rows.append((s.label(), marked_element(s), *(float(x) for x in probs)))
    return rows


def all_settings(n: int = 2, electro_optic: bool = True):
    if electro_optic and n == 2:
        return [ElectroOpticOracle(pc, lc) for pc, lc in EO_SETTINGS]
    return [IdealOracle(BasisConvention(n).bits(i)) for i in range(2**n)]


def mean_error(sigma: float, n_seeds: int = 1000, seed: int = 0, electro_optic: bool = True):
    """(mean, standard error) of the wrong-detector probability over settings and seeds."""
    seeds = range(seed, seed + n_seeds)
    samples = []
    for setting in all_settings(2, electro_optic):
        std = np.stack([draw_standard_deltas(setting, 2, s) for s in seeds])
        samples.append(oracle_error_samples(setting, sigma, seeds, standard=std))
    per_seed = np.mean(samples, axis=0)
    return float(per_seed.mean()), float(per_seed.std(ddof=1) / np.sqrt(n_seeds))


def noise_sweep(sigmas, n_seeds: int = 1000, seed: int = 0, electro_optic: bool = True):
    """Rows of (sigma, mean error, standard error)."""
    seeds = range(seed, seed + n_seeds)
    settings = all_settings(2, electro_optic)
    std = {s.label(): np.stack([draw_standard_deltas(s, 2, k) for k in seeds]) for s in settings}
    rows = []
    for sigma in sigmas:
        per_seed = np.mean(
            [oracle_error_samples(s, sigma, seeds, standard=std[s.label()]) for s in settings], axis=0
        )
        rows.append((float(sigma), float(per_seed.mean()), float(per_seed.std(ddof=1) / np.sqrt(n_seeds))))
    return rows


def calibrate_sigma(target: float = 0.028, n_seeds: int = 1000, seed: int = 0,
                    electro_optic: bool = True, hi: float = 1.5) -> float:
    """Sigma at which the mean error reaches ``target`` (common random numbers, Brent's method)."""
    from scipy.optimize import brentq

    seeds = range(seed, seed + n_seeds)
    settings = all_settings(2, electro_optic)
    std = {s.label(): np.stack([draw_standard_deltas(s, 2, k) for k in seeds]) for s in settings}

    def excess(sigma):
        errs = [oracle_error_samples(s, sigma, seeds, standard=std[s.label()]) for s in settings]
        return float(np.mean(errs)) - target

    return float(brentq(excess, 0.0, hi, xtol=1e-10))


def common_birefringence_invariance_check(phi: float, tol: float = 1e-9) -> bool:
    """Do common retro-reflector birefringent phases leave detection unchanged?

    The second interferometer of the compiled n=2 circuit is expanded to its
    physical form: two retro-reflections, each adding diag(1, e^{i phi}) on
    every path, with the 45 degree HWP crossed once by path a (between the
    reflections) and twice by path b (once before each reflection).
    """
    from .circuits import build_grover_compiled, birefringent_variant, detector_probabilities, input_state

    for pc, lc in EO_SETTINGS:
        setting = ElectroOpticOracle(pc, lc)
        base = build_grover_compiled(2, setting)
        probe = birefringent_variant(base, phi)
        p0 = detector_probabilities(base, input_state(2))
        p1 = detector_probabilities(probe, input_state(2))
        if max(abs(a.probability - b.probability) for a, b in zip(p0, p1)) > tol:
            return False
    return True


def orthogonality_pairs() -> list[tuple[str, str, float]]:
    labels = [f"{pc},{lc}" for pc, lc in EO_SETTINGS]
    ov = post_oracle_overlaps()
    return [(labels[i], labels[j], float(ov[i, j])) for i, j in combinations(range(4), 2)]
