"""Optical elements as unitary actions on the mode space.

Every element reduces to a list of primitive ops, each either a 2x2 matrix
on a pair of mode indices or a phase factor on a set of mode indices.  The
same op list drives state evolution, dense unitaries and the path-sum
branch tables, so all three share one convention.

Phase conventions:

* HWP at angle theta (degrees): [[cos 2t, sin 2t], [sin 2t, -cos 2t]]
* BS: a -> (a + ib)/sqrt2, b -> (ia + b)/sqrt2
* ROT (90 degree quartz rotator): H -> V, V -> -H
* PC / LC in their active state: diag(1, -1); inactive: identity
* PBS with two paths: H transmits, V reflects (V modes swap paths).
  PBS on single paths is the readout analyzer and acts as identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _accel
from .errors import InvalidArgumentError
from .state import POLS, PureState, mode_index, mode_of

KINDS = ("HWP", "BS", "PHASE", "PBS", "ROT", "PC", "LC")
PC_STATES = ("off", "on")
LC_STATES = ("glass", "hwp0")

SQRT_HALF = 1.0 / np.sqrt(2.0)


def hwp_matrix(theta: float) -> np.ndarray:
    t = np.deg2rad(2.0 * theta)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


def bs_matrix() -> np.ndarray:
    return SQRT_HALF * np.array([[1, 1j], [1j, 1]], dtype=np.complex128)


def rotator_matrix() -> np.ndarray:
    return np.array([[0, -1], [1, 0]], dtype=np.complex128)


def retarder_matrix(active: bool) -> np.ndarray:
    """Pockels cell or liquid crystal: fast-axis-horizontal HWP when active."""
    return np.diag([1.0, -1.0]).astype(np.complex128) if active else np.eye(2, dtype=np.complex128)


_SWAP = np.array([[0, 1], [1, 0]], dtype=np.complex128)


@dataclass(frozen=True)
class Element:
    """One optical component.

    ``paths`` binds HWP/ROT/PC/LC and readout PBS to a set of paths
    (``None`` means every path).  ``pairs`` binds BS and two-path PBS.
    ``modes`` binds PHASE to mode indices (``None`` means every mode).
    ``tag="oracle"`` marks the element as part of the opaque Oracle.
    """

    kind: str
    paths: tuple[int, ...] | None = None
    pairs: tuple[tuple[int, int], ...] = ()
    modes: tuple[int, ...] | None = None
    theta: float = 0.0
    phi: float = 0.0
    state: str = ""
    tag: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown element kind {self.kind!r}")
        if self.paths is not None:
            object.__setattr__(self, "paths", tuple(sorted(set(int(p) for p in self.paths))))
        if self.modes is not None:
            object.__setattr__(self, "modes", tuple(sorted(set(int(m) for m in self.modes))))
        object.__setattr__(self, "pairs", tuple(tuple(int(x) for x in pq) for pq in self.pairs))
        if self.kind in ("BS",) and not self.pairs:
            raise InvalidArgumentError("BS needs at least one path pair")
        if self.kind == "PBS" and not self.pairs and self.paths is not None and not self.paths:
            raise InvalidArgumentError("PBS needs paths")
        for p, q in self.pairs:
            if p == q:
                raise InvalidArgumentError(f"{self.kind} pair binds path {p} twice")
        if self.kind == "PC" and self.state not in PC_STATES:
            raise InvalidArgumentError(f"PC state must be one of {PC_STATES}, got {self.state!r}")
        if self.kind == "LC" and self.state not in LC_STATES:
            raise InvalidArgumentError(f"LC state must be one of {LC_STATES}, got {self.state!r}")

    @property
    def is_readout(self) -> bool:
        return self.kind == "PBS" and not self.pairs

    @property
    def is_barrier(self) -> bool:
        return self.tag == "oracle" or self.is_readout

    @property
    def is_mixing(self) -> bool:
        return self.kind == "BS" or (self.kind == "PBS" and bool(self.pairs))

    @property
    def is_local(self) -> bool:
        """Acts within each path's (H, V) pair and is not an Oracle part."""
        return not self.is_barrier and not self.is_mixing

    def touched_paths(self, n_paths: int) -> tuple[int, ...]:
        if self.kind == "PHASE":
            if self.modes is None:
                return tuple(range(n_paths))
            return tuple(sorted({m // 2 for m in self.modes}))
        if self.pairs:
            return tuple(sorted({p for pq in self.pairs for p in pq}))
        return tuple(range(n_paths)) if self.paths is None else self.paths


def _check_binding(e: Element, n_paths: int) -> None:
    for p in e.touched_paths(n_paths):
        if not 0 <= p < n_paths:
            raise InvalidArgumentError(f"{e.kind} binds path {p}, registry has {n_paths} paths")
    if e.pairs:
        seen = [p for pq in e.pairs for p in pq]
        if len(seen) != len(set(seen)):
            raise InvalidArgumentError(f"{e.kind} pairs overlap: {e.pairs}")


def local_matrix(e: Element) -> np.ndarray | None:
    """Per-path 2x2 Jones matrix for polarization elements, else None."""
    if e.kind == "HWP":
        return hwp_matrix(e.theta)
    if e.kind == "ROT":
        return rotator_matrix()
    if e.kind == "PC":
        return retarder_matrix(e.state == "on")
    if e.kind == "LC":
        return retarder_matrix(e.state == "hwp0")
    return None


@lru_cache(maxsize=65536)
def element_ops(e: Element, n_paths: int) -> tuple:
    """Primitive ops as ("pair", m, i0, i1) or ("phase", factor, idx)."""
    _check_binding(e, n_paths)
    idx = np.intp
    if e.kind == "PHASE":
        modes = np.arange(2 * n_paths) if e.modes is None else np.array(e.modes)
        if e.phi == 0.0:
            return ()
        return (("phase", np.exp(1j * e.phi), modes.astype(idx)),)
    if e.kind == "BS" or (e.kind == "PBS" and e.pairs):
        a = np.array([p for p, _ in e.pairs], dtype=idx)
        b = np.array([q for _, q in e.pairs], dtype=idx)
        if e.kind == "BS":
            return (("pair", bs_matrix(), np.concatenate([2 * a, 2 * a + 1]), np.concatenate([2 * b, 2 * b + 1])),)
        return (("pair", _SWAP, 2 * a + 1, 2 * b + 1),)
    if e.kind == "PBS":
        return ()
    m = local_matrix(e)
    if np.array_equal(m, np.eye(2)):
        return ()
    paths = np.array(e.touched_paths(n_paths), dtype=idx)
    if m[0, 1] == 0 and m[1, 0] == 0:
        ops = []
        for k in range(2):
            if m[k, k] != 1:
                ops.append(("phase", m[k, k], 2 * paths + k))
        return tuple(ops)
    return (("pair", m, 2 * paths, 2 * paths + 1),)


def support(e: Element, n_paths: int) -> tuple[int, ...]:
    """Mode indices the element can change."""
    modes: set[int] = set()
    for op in element_ops(e, n_paths):
        if op[0] == "pair":
            modes.update(op[2].tolist())
            modes.update(op[3].tolist())
        else:
            modes.update(op[2].tolist())
    return tuple(sorted(modes))


def apply_ops(ops, arr: np.ndarray) -> None:
    """Apply primitive ops in place to a (dim, cols) array."""
    for op in ops:
        if op[0] == "pair":
            _accel.apply_pair(arr, op[1], op[2], op[3])
        else:
            _accel.apply_phase(arr, op[2], op[1])


def evolve(elements, n_paths: int, arr: np.ndarray) -> np.ndarray:
    """Left fold of the elements over a (dim,) or (dim, cols) array; returns a new array."""
    work = np.array(arr, dtype=np.complex128, order="C")
    vec = work.ndim == 1
    if vec:
        work = work.reshape(-1, 1)
    if work.shape[0] != 2 * n_paths:
        raise InvalidArgumentError(f"array has {work.shape[0]} rows, registry has {2 * n_paths} modes")
    for e in elements:
        apply_ops(element_ops(e, n_paths), work)
    return work[:, 0].copy() if vec else work


def apply_element(state: PureState, e: Element) -> PureState:
    return PureState(evolve((e,), state.n_paths, state.amplitudes))


def element_unitary(e: Element, n_paths: int) -> np.ndarray:
    return evolve((e,), n_paths, np.eye(2 * n_paths, dtype=np.complex128))


def restricted_unitary(elements, n_paths: int, modes: tuple[int, ...]) -> np.ndarray:
    """Unitary of ``elements`` restricted to ``modes`` (must be an invariant subspace)."""
    pos = {m: k for k, m in enumerate(modes)}
    work = np.eye(len(modes), dtype=np.complex128)
    for e in elements:
        for op in element_ops(e, n_paths):
            if op[0] == "pair":
                i0 = np.array([pos[m] for m in op[2].tolist()], dtype=np.intp)
                i1 = np.array([pos[m] for m in op[3].tolist()], dtype=np.intp)
                _accel.apply_pair(work, op[1], i0, i1)
            else:
                idx = np.array([pos[m] for m in op[2].tolist()], dtype=np.intp)
                _accel.apply_phase(work, idx, op[1])
    return work


def commutes(e1: Element, e2: Element, n_paths: int, tol: float = 1e-12) -> bool:
    s1, s2 = support(e1, n_paths), support(e2, n_paths)
    if not s1 or not s2 or not set(s1) & set(s2):
        return True
    modes = tuple(sorted(set(s1) | set(s2)))
    u1 = restricted_unitary((e1,), n_paths, modes)
    u2 = restricted_unitary((e2,), n_paths, modes)
    return float(np.max(np.abs(u1 @ u2 - u2 @ u1))) < tol


def branches(e: Element, n_paths: int) -> dict[int, list[tuple[int, complex]]]:
    """Per-input-mode branch table: mode -> [(output mode, amplitude factor)].

    Modes missing from the table pass through with factor 1.
    """
    table: dict[int, list[tuple[int, complex]]] = {}
    for op in element_ops(e, n_paths):
        if op[0] == "pair":
            m = op[1]
            for a, b in zip(op[2].tolist(), op[3].tolist()):
                table[a] = [(a, complex(m[0, 0])), (b, complex(m[1, 0]))]
                table[b] = [(a, complex(m[0, 1])), (b, complex(m[1, 1]))]
        else:
            for a in op[2].tolist():
                prev = table.get(a, [(a, 1.0 + 0j)])
                table[a] = [(out, f * complex(op[1])) for out, f in prev]
    return table


# -- textual syntax -----------------------------------------------------------

def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt_paths(paths, labels) -> str:
    return "*" if paths is None else ",".join(labels[p] for p in paths)


def _fmt_modes(modes, labels, n_paths) -> str:
    if modes is None:
        return "*"
    parts = []
    mset = set(modes)
    for p in range(n_paths):
        h, v = 2 * p in mset, 2 * p + 1 in mset
        if h and v:
            parts.append(f"{labels[p]}:*")
        elif h:
            parts.append(f"{labels[p]}:H")
        elif v:
            parts.append(f"{labels[p]}:V")
    return ",".join(parts)


def format_element(e: Element, labels: tuple[str, ...]) -> str:
    n_paths = len(labels)
    if e.kind == "HWP":
        s = f"HWP theta={_fmt_float(e.theta)} path={_fmt_paths(e.paths, labels)}"
    elif e.kind == "PHASE":
        s = f"PHASE phi={_fmt_float(e.phi)} modes={_fmt_modes(e.modes, labels, n_paths)}"
    elif e.kind == "BS" or (e.kind == "PBS" and e.pairs):
        s = f"{e.kind} paths=" + ";".join(f"{labels[p]},{labels[q]}" for p, q in e.pairs)
    elif e.kind == "PBS":
        s = f"PBS path={_fmt_paths(e.paths, labels)}"
    elif e.kind == "ROT":
        s = f"ROT path={_fmt_paths(e.paths, labels)}"
    else:
        s = f"{e.kind} state={e.state} path={_fmt_paths(e.paths, labels)}"
    if e.tag:
        s += f" tag={e.tag}"
    return s


def _resolve(label: str, labels: tuple[str, ...]) -> int:
    if label in labels:
        return labels.index(label)
    if label.isdigit() and int(label) < len(labels):
        return int(label)
    raise InvalidArgumentError(f"unknown path {label!r}; registry is {','.join(labels)}")


def _parse_paths(value: str, labels) -> tuple[int, ...] | None:
    if value == "*":
        return None
    return tuple(_resolve(v.strip(), labels) for v in value.split(","))


def _parse_modes(value: str, labels) -> tuple[int, ...] | None:
    if value == "*":
        return None
    modes = []
    for item in value.split(","):
        path, _, pol = item.strip().partition(":")
        p = _resolve(path, labels)
        if pol in ("", "*"):
            modes += [2 * p, 2 * p + 1]
        elif pol in POLS:
            modes.append(mode_index(p, pol))
        else:
            raise InvalidArgumentError(f"bad polarization {pol!r} in {item!r}")
    return tuple(modes)


def parse_element(line: str, labels: tuple[str, ...]) -> Element:
    """Parse e.g. ``HWP theta=22.5 path=a`` against a path registry."""
    tokens = line.split()
    if not tokens:
        raise InvalidArgumentError("empty element line")
    kind, fields = tokens[0].upper(), {}
    for tok in tokens[1:]:
        key, sep, value = tok.partition("=")
        if not sep:
            raise InvalidArgumentError(f"expected key=value, got {tok!r}")
        fields[key] = value
    try:
        tag = fields.pop("tag", "")
        if kind == "HWP":
            e = Element("HWP", paths=_parse_paths(fields.pop("path"), labels), theta=float(fields.pop("theta")), tag=tag)
        elif kind == "PHASE":
            e = Element("PHASE", modes=_parse_modes(fields.pop("modes"), labels), phi=float(fields.pop("phi")), tag=tag)
        elif kind in ("BS", "PBS") and "paths" in fields:
            pairs = []
            for chunk in fields.pop("paths").split(";"):
                pq = _parse_paths(chunk, labels)
                if pq is None or len(pq) != 2:
                    raise InvalidArgumentError(f"{kind} needs path pairs, got {chunk!r}")
                pairs.append(pq)
            e = Element(kind, pairs=tuple(pairs), tag=tag)
        elif kind == "PBS":
            e = Element("PBS", paths=_parse_paths(fields.pop("path"), labels), tag=tag)
        elif kind == "ROT":
            e = Element("ROT", paths=_parse_paths(fields.pop("path"), labels), tag=tag)
        elif kind in ("PC", "LC"):
            e = Element(kind, paths=_parse_paths(fields.pop("path"), labels), state=fields.pop("state"), tag=tag)
        else:
            raise InvalidArgumentError(f"unknown element kind {kind!r}")
    except KeyError as exc:
        raise InvalidArgumentError(f"{kind}: missing field {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, InvalidArgumentError):
            raise
        raise InvalidArgumentError(f"{kind}: {exc}") from None
    if fields:
        raise InvalidArgumentError(f"{kind}: unexpected fields {sorted(fields)}")
    _check_binding(e, len(labels))
    return e


__all__ = [
    "Element", "KINDS", "hwp_matrix", "bs_matrix", "rotator_matrix", "retarder_matrix",
    "apply_element", "element_unitary", "element_ops", "evolve", "commutes", "support",
    "branches", "format_element", "parse_element", "mode_of",
]
