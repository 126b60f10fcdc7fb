"""Random circuits for soundness and property tests."""
import numpy as np

from optigrover.circuits import Circuit, with_readout
from optigrover.elements import Element
from optigrover.state import path_labels

LOCAL_KINDS = ("HWP", "PHASE", "ROT", "PC", "LC")


def random_element(rng, n_paths, allow_mixing=True, allow_oracle=True):
    roll = rng.random()
    paths = sorted(rng.choice(n_paths, size=int(rng.integers(1, n_paths + 1)), replace=False).tolist())
    if rng.random() < 0.15:
        paths = None
    if allow_mixing and roll < 0.25:
        perm = rng.permutation(n_paths).tolist()
        n_pairs = int(rng.integers(1, n_paths // 2 + 1))
        pairs = tuple((perm[2 * k], perm[2 * k + 1]) for k in range(n_pairs))
        return Element("BS" if rng.random() < 0.75 else "PBS", pairs=pairs)
    if allow_oracle and roll > 0.96:
        return Element("PHASE", modes=(int(rng.integers(2 * n_paths)),), phi=np.pi, tag="oracle")
    kind = LOCAL_KINDS[int(rng.integers(len(LOCAL_KINDS)))]
    if kind == "HWP":
        theta = float(rng.choice([0.0, 22.5, 45.0, 67.5, -22.5])) if rng.random() < 0.6 else float(rng.uniform(-90, 90))
        return Element("HWP", paths=paths, theta=theta)
    if kind == "PHASE":
        if paths is None:
            modes = None
        elif rng.random() < 0.5:
            modes = tuple(m for p in paths for m in (2 * p, 2 * p + 1))
        else:
            modes = tuple(2 * p + int(rng.integers(2)) for p in paths)
        phi = float(rng.choice([np.pi, -np.pi / 2, np.pi / 2])) if rng.random() < 0.6 else float(rng.uniform(-np.pi, np.pi))
        return Element("PHASE", modes=modes, phi=phi)
    if kind == "ROT":
        return Element("ROT", paths=paths)
    if kind == "PC":
        return Element("PC", paths=paths, state=str(rng.choice(["off", "on"])))
    return Element("LC", paths=paths, state=str(rng.choice(["glass", "hwp0"])))


def random_circuit(seed, n=None, length=None, readout=None):
    rng = np.random.default_rng(seed)
    n = int(rng.choice([2, 3])) if n is None else n
    n_paths = 2 ** (n - 1)
    length = int(rng.integers(1, 25)) if length is None else length
    labels = path_labels(n_paths)
    elements = [random_element(rng, n_paths) for _ in range(length)]
    if readout is None:
        readout = rng.random() < 0.5
    if readout:
        elements = list(with_readout(labels, elements))
    return Circuit(labels, tuple(elements), name=f"random{seed}", n=n)
