"""Mode space, pure and mixed single-photon states.

A photon occupies one of ``P`` spatial paths with polarization H or V.  Mode
index is ``2 * path + pol`` (path-major, polarization-minor).  For an n-qubit
register there are ``2**(n-1)`` paths: the spatial bits (first beamsplitter
outcome is the most significant) followed by the polarization bit, so the
mode index of a basis state equals its bit string read as a binary number.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal, NamedTuple, Union

import numpy as np

from .errors import InvalidArgumentError

POLS = ("H", "V")

ALGEBRA_TOL = 1e-12
CIRCUIT_TOL = 1e-9


class ModeId(NamedTuple):
    path: int
    pol: str

    @property
    def index(self) -> int:
        return 2 * self.path + POLS.index(self.pol)


def mode_index(path: int, pol: str | int) -> int:
    if isinstance(pol, str):
        pol = POLS.index(pol)
    return 2 * path + pol


def mode_of(index: int) -> ModeId:
    return ModeId(index // 2, POLS[index % 2])


def path_labels(n_paths: int) -> tuple[str, ...]:
    """Default labels: letters while they last, then ``p<k>``."""
    if n_paths <= 26:
        return tuple(chr(ord("a") + k) for k in range(n_paths))
    return tuple(f"p{k}" for k in range(n_paths))


@dataclass(frozen=True)
class BasisConvention:
    """Bijection between n-bit strings and optical modes."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError(f"qubit count must be >= 1, got {self.n}")

    @property
    def n_paths(self) -> int:
        return 2 ** (self.n - 1)

    @property
    def dim(self) -> int:
        return 2**self.n

    def index(self, bits: str) -> int:
        if len(bits) != self.n or set(bits) - {"0", "1"}:
            raise InvalidArgumentError(f"expected a {self.n}-bit string, got {bits!r}")
        return int(bits, 2)

    def bits(self, index: int) -> str:
        if not 0 <= index < self.dim:
            raise InvalidArgumentError(f"basis index {index} out of range for n={self.n}")
        return format(index, f"0{self.n}b")

    def mode(self, bits: str) -> ModeId:
        return mode_of(self.index(bits))

    def descriptor(self) -> dict:
        return {
            "n": self.n,
            "paths": list(path_labels(self.n_paths)),
            "order": "path-major, polarization-minor",
            "bits": "spatial bits (first split most significant), then polarization (H=0, V=1)",
        }


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Complex amplitudes over the ``2 * n_paths`` optical modes."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0 or amps.size % 2:
            raise InvalidArgumentError("amplitude vector must be 1-D with an even, nonzero length")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, n_paths: int, path: int = 0, pol: str = "H") -> "PureState":
        amps = np.zeros(2 * n_paths, dtype=np.complex128)
        amps[mode_index(path, pol)] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def n_paths(self) -> int:
        return self.dim // 2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def canonical(self) -> "PureState":
        """Global phase fixed so the first nonzero amplitude is real positive."""
        amps = self.amplitudes
        nz = np.flatnonzero(np.abs(amps) > ALGEBRA_TOL)
        if nz.size == 0:
            return self
        ref = amps[nz[0]]
        return PureState(amps * (abs(ref) / ref))

    def to_json(self, n: int | None = None) -> str:
        amps = self.canonical().amplitudes
        basis = BasisConvention(n).descriptor() if n else {
            "paths": list(path_labels(self.n_paths)),
            "order": "path-major, polarization-minor",
        }
        return json.dumps({
            "schema_version": 1,
            "basis": basis,
            "amplitudes": [[float(z.real), float(z.imag)] for z in amps],
        })

    @classmethod
    def from_json(cls, text: str) -> "PureState":
        payload = json.loads(text)
        return cls(np.array([complex(re, im) for re, im in payload["amplitudes"]]))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidArgumentError("density matrix must be square")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        a = state.amplitudes
        return cls(np.outer(a, a.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def purity(self) -> float:
        m = self.matrix
        return float(np.vdot(m, m).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_valid(self, tol: float = ALGEBRA_TOL) -> bool:
        m = self.matrix
        return (
            np.max(np.abs(m - m.conj().T)) <= tol
            and abs(self.trace - 1.0) <= tol
            and float(self.eigenvalues().min()) >= -tol
        )

    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()


def uniform_superposition(n: int) -> PureState:
    """Equal superposition of all ``2**n`` database elements, phase 0."""
    if n < 1:
        raise InvalidArgumentError(f"qubit count must be >= 1, got {n}")
    dim = 2**n
    return PureState(np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128))


def partial_trace(
    state: Union[PureState, DensityMatrix],
    keep: Literal["polarization", "spatial"],
) -> DensityMatrix:
    """Reduced density matrix of one degree of freedom.

    The mode space factorizes as (paths) x (H, V); keeping ``"spatial"``
    traces out polarization and vice versa.
    """
    if keep not in ("polarization", "spatial"):
        raise InvalidArgumentError(f"keep must be 'polarization' or 'spatial', got {keep!r}")
    dim = state.dim
    if dim < 2 or dim % 2:
        raise InvalidArgumentError(f"dimension {dim} does not factorize as paths x 2")
    n_paths = dim // 2
    if isinstance(state, PureState):
        m = state.amplitudes.reshape(n_paths, 2)
        if keep == "spatial":
            red = m @ m.conj().T
        else:
            red = m.T @ m.conj()
    else:
        r = state.matrix.reshape(n_paths, 2, n_paths, 2)
        if keep == "spatial":
            red = np.einsum("ajbj->ab", r)
        else:
            red = np.einsum("iaib->ab", r)
    return DensityMatrix(red)


def fidelity_up_to_global_phase(s1: PureState, s2: PureState) -> float:
    """|<s1|s2>|, equal to 1 exactly when the states differ by a global phase."""
    if s1.dim != s2.dim:
        raise InvalidArgumentError(f"dimension mismatch: {s1.dim} vs {s2.dim}")
    return float(min(1.0, abs(np.vdot(s1.amplitudes, s2.amplitudes))))
