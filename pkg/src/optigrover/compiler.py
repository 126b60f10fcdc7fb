"""Peephole compiler for optical circuits.

Rules fire leftmost-first in a fixed priority order; after each application
the scan restarts.  When no rule fires, a canonicalizing commute pass runs
and, if it changed anything, the rules get another sweep.  Oracle elements
and readout analyzers are barriers: nothing is rewritten across them.

A "segment" is a maximal run of local elements (polarization optics and
phase shifters that act inside each path).  Within a segment the action is
a direct sum of per-path 2x2 matrices, which is what the waveplate-fusion
rule resynthesizes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuits import Circuit
from .elements import Element, commutes, element_ops, restricted_unitary, support
from .errors import CompileError, InvalidArgumentError
from .state import CIRCUIT_TOL

RULE_TOL = 1e-12
_ZERO = 1e-12

Rewrite = tuple[int, tuple[Element, ...]]


@dataclass(frozen=True)
class RewriteRule:
    """``find`` returns (position, rewritten element tuple) for the leftmost match."""

    name: str
    find: Callable[[Circuit], Rewrite | None]
    sample: Callable[[np.random.Generator], Circuit]


@dataclass
class CompileReport:
    input_count: int
    output_count: int
    rule_applications: list[tuple[str, int]] = field(default_factory=list)
    equivalence_verified: bool = False
    max_unitary_deviation: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "input_count": self.input_count,
            "output_count": self.output_count,
            "rule_applications": [{"rule": r, "position": p} for r, p in self.rule_applications],
            "equivalence_verified": self.equivalence_verified,
            "max_unitary_deviation": self.max_unitary_deviation,
        }


def count_elements(c: Circuit) -> int:
    """One per element; readout analyzers are not counted."""
    return sum(1 for e in c.elements if not e.is_readout)


def unitary_equiv(c1: Circuit, c2: Circuit, tol: float = CIRCUIT_TOL) -> tuple[bool, float]:
    """Compare circuit unitaries up to a global phase.

    The phase comes from the ratio of the two matrices at the largest
    entry of the second.
    """
    if c1.n_paths != c2.n_paths:
        raise InvalidArgumentError(f"registries differ: {c1.n_paths} vs {c2.n_paths} paths")
    u1, u2 = c1.unitary(), c2.unitary()
    return _equiv(u1, u2, tol)


def _equiv(u1: np.ndarray, u2: np.ndarray, tol: float) -> tuple[bool, float]:
    k = np.unravel_index(np.argmax(np.abs(u2)), u2.shape)
    if abs(u1[k]) < _ZERO:
        dev = float(np.max(np.abs(u1 - u2)))
        return False, max(dev, 1.0)
    ratio = u1[k] / u2[k]
    dev = float(np.max(np.abs(u1 - (ratio / abs(ratio)) * u2)))
    return dev < tol, dev


def _wrap(phi: float) -> float:
    w = float(np.angle(np.exp(1j * phi)))
    return 0.0 if abs(w) < _ZERO else w


def _segments(elements) -> list[tuple[int, int]]:
    out, start = [], None
    for k, e in enumerate(elements):
        if e.is_local:
            if start is None:
                start = k
        elif start is not None:
            out.append((start, k))
            start = None
    if start is not None:
        out.append((start, len(elements)))
    return out


def _can_move_back(elements, i: int, j: int, n_paths: int) -> bool:
    """Can element j be moved to sit right after position i?"""
    ej = elements[j]
    for k in range(i + 1, j):
        ek = elements[k]
        if ek.is_barrier or not commutes(ej, ek, n_paths):
            return False
    return True


def _replace(elements, i: int, new: tuple[Element, ...], drop=()) -> tuple[Element, ...]:
    out = []
    for k, e in enumerate(elements):
        if k == i:
            out += new
        elif k not in drop:
            out.append(e)
    return tuple(out)


# -- rules --------------------------------------------------------------------

def _covers_all_modes(e: Element, dim: int) -> bool:
    return e.modes is None or len(e.modes) == dim


def find_global_phase(c: Circuit) -> Rewrite | None:
    for i, e in enumerate(c.elements):
        if e.kind == "PHASE" and not e.is_barrier and _covers_all_modes(e, c.dim):
            return i, _replace(c.elements, i, ())
    return None


def find_identity(c: Circuit) -> Rewrite | None:
    for i, e in enumerate(c.elements):
        if e.is_barrier:
            continue
        sup = support(e, c.n_paths)
        if not sup or np.max(np.abs(restricted_unitary((e,), c.n_paths, sup) - np.eye(len(sup)))) < RULE_TOL:
            return i, _replace(c.elements, i, ())
    return None


def find_phase_merge(c: Circuit) -> Rewrite | None:
    els = c.elements
    for i, e in enumerate(els):
        if e.kind != "PHASE" or e.is_barrier:
            continue
        for j in range(i + 1, len(els)):
            f = els[j]
            if f.is_barrier:
                break
            if f.kind == "PHASE" and f.modes == e.modes and _can_move_back(els, i, j, c.n_paths):
                phi = _wrap(e.phi + f.phi)
                new = () if phi == 0.0 else (Element("PHASE", modes=e.modes, phi=phi),)
                return i, _replace(els, i, new, drop={j})
    return None


def _same_params(e: Element, f: Element) -> bool:
    if e.kind != f.kind or e.tag or f.tag or e.is_barrier or f.is_barrier:
        return False
    if e.kind == "HWP":
        return abs(e.theta - f.theta) < RULE_TOL
    if e.kind == "PHASE":
        return abs(_wrap(e.phi - f.phi)) < RULE_TOL
    if e.kind in ("PC", "LC"):
        return e.state == f.state
    return True


def _merged(e: Element, f: Element, n_paths: int) -> Element | None:
    """Single element doing both e and f when their bindings are disjoint."""
    if e.kind == "PHASE":
        if e.modes is None or f.modes is None or set(e.modes) & set(f.modes):
            return None
        return Element("PHASE", modes=e.modes + f.modes, phi=e.phi)
    if e.pairs or f.pairs:
        pe = {p for pq in e.pairs for p in pq}
        pf = {p for pq in f.pairs for p in pq}
        if not e.pairs or not f.pairs or pe & pf:
            return None
        return Element(e.kind, pairs=tuple(sorted(e.pairs + f.pairs)))
    if e.paths is None or f.paths is None or set(e.paths) & set(f.paths):
        return None
    paths = tuple(sorted(e.paths + f.paths))
    return Element(e.kind, paths=None if len(paths) == n_paths else paths, theta=e.theta, state=e.state)


def find_sibling_merge(c: Circuit) -> Rewrite | None:
    els = c.elements
    for i, e in enumerate(els):
        if e.is_barrier:
            continue
        for j in range(i + 1, len(els)):
            f = els[j]
            if f.is_barrier:
                break
            if not _same_params(e, f):
                continue
            m = _merged(e, f, c.n_paths)
            if m is not None and _can_move_back(els, i, j, c.n_paths):
                return i, _replace(els, i, (m,), drop={j})
    return None


def _decompose(u: np.ndarray):
    """u = diag(e^{ia}, e^{ib}) . HWP(theta) . diag(1, e^{ic}), or diagonal.

    Returns (theta or None, c, a, b).
    """
    if abs(u[0, 1]) < _ZERO and abs(u[1, 0]) < _ZERO:
        return None, 0.0, float(np.angle(u[0, 0])), float(np.angle(u[1, 1]))
    theta = float(np.degrees(np.arctan2(abs(u[0, 1]), abs(u[0, 0])))) / 2.0
    if abs(u[0, 0]) < _ZERO:
        return 45.0, 0.0, float(np.angle(u[0, 1])), float(np.angle(u[1, 0]))
    a = float(np.angle(u[0, 0]))
    return theta, _wrap(float(np.angle(u[0, 1])) - a), a, float(np.angle(u[1, 0]))


def _group_phases(values: dict[int, float]) -> list[Element]:
    groups: dict[float, list[int]] = {}
    reps: dict[float, float] = {}
    for mode, phi in sorted(values.items()):
        phi = _wrap(phi)
        if phi == 0.0:
            continue
        key = round(phi, 9)
        groups.setdefault(key, []).append(mode)
        reps.setdefault(key, phi)
    return [Element("PHASE", modes=tuple(groups[k]), phi=reps[k]) for k in sorted(groups)]


def resynthesize(blocks: dict[int, np.ndarray], n_paths: int) -> list[Element]:
    """Fewest-element realization (up to global phase) of per-path 2x2 blocks.

    Emits V-mode pre-phases, one HWP per distinct angle spanning all paths
    that need it, then post-phases grouped by value after removing the most
    common phase as a global phase.
    """
    pre: dict[int, float] = {}
    plates: dict[float, list[int]] = {}
    angle: dict[float, float] = {}
    post = {m: 0.0 for m in range(2 * n_paths)}
    for p, u in sorted(blocks.items()):
        theta, c, a, b = _decompose(u)
        if theta is not None:
            key = round(theta, 9)
            plates.setdefault(key, []).append(p)
            angle.setdefault(key, theta)
            if c != 0.0:
                pre[2 * p + 1] = c
        post[2 * p], post[2 * p + 1] = _wrap(a), _wrap(b)
    keys = [round(v, 9) for v in post.values()]
    counts = {k: keys.count(k) for k in set(keys)}
    # ties prefer no offset, then the smallest value
    offset_key = max(counts, key=lambda k: (counts[k], k == 0.0, -k))
    offset = next(v for v in post.values() if round(v, 9) == offset_key)
    post = {m: v - offset for m, v in post.items()}
    out = _group_phases(pre)
    for key in sorted(plates):
        paths = tuple(plates[key])
        out.append(Element("HWP", paths=None if len(paths) == n_paths else paths, theta=angle[key]))
    return out + _group_phases(post)


def segment_blocks(elements, n_paths: int) -> dict[int, np.ndarray]:
    paths = sorted({p for e in elements for p in e.touched_paths(n_paths)})
    modes = tuple(m for p in paths for m in (2 * p, 2 * p + 1))
    u = restricted_unitary(elements, n_paths, modes)
    return {p: u[2 * k:2 * k + 2, 2 * k:2 * k + 2].copy() for k, p in enumerate(paths)}


def find_waveplate_fusion(c: Circuit) -> Rewrite | None:
    els = c.elements
    for start, end in _segments(els):
        if end - start < 2:
            continue
        new = resynthesize(segment_blocks(els[start:end], c.n_paths), c.n_paths)
        if len(new) < end - start:
            return start, els[:start] + tuple(new) + els[end:]
    return None


_PLATES = ("HWP", "ROT", "PC", "LC")


def find_hoist(c: Circuit) -> Rewrite | None:
    """Move a polarization plate forward past a mixer it commutes with."""
    els = c.elements
    for i, e in enumerate(els):
        if not e.is_local or e.kind not in _PLATES:
            continue
        mine = set(e.touched_paths(c.n_paths))
        for j in range(i + 1, len(els)):
            f = els[j]
            if f.is_barrier:
                break
            if f.is_mixing and mine & set(f.touched_paths(c.n_paths)):
                if commutes(e, f, c.n_paths):
                    out = els[:i] + els[i + 1:j + 1] + (e,) + els[j + 1:]
                    return i, out
                break
            if not commutes(e, f, c.n_paths):
                break
    return None


# -- pattern samples for registration checks ------------------------------------

def _labels(n_paths: int) -> tuple[str, ...]:
    return tuple(chr(ord("a") + k) for k in range(n_paths))


def _random_local(rng: np.random.Generator, n_paths: int) -> Element:
    kind = rng.choice(["HWP", "PHASE", "ROT", "PC", "LC"])
    p = int(rng.integers(n_paths))
    if kind == "HWP":
        return Element("HWP", paths=(p,), theta=float(rng.uniform(-90, 90)))
    if kind == "PHASE":
        modes = (2 * p,) if rng.random() < 0.3 else (2 * p + 1,) if rng.random() < 0.5 else (2 * p, 2 * p + 1)
        return Element("PHASE", modes=modes, phi=float(rng.uniform(-np.pi, np.pi)))
    if kind == "ROT":
        return Element("ROT", paths=(p,))
    if kind == "PC":
        return Element("PC", paths=(p,), state=str(rng.choice(["off", "on"])))
    return Element("LC", paths=(p,), state=str(rng.choice(["glass", "hwp0"])))


def _sample_global(rng):
    els = (_random_local(rng, 2), Element("PHASE", modes=None, phi=float(rng.uniform(-np.pi, np.pi))), _random_local(rng, 2))
    return Circuit(_labels(2), els)


def _sample_identity(rng):
    ident = [Element("PC", paths=(0,), state="off"), Element("LC", paths=(1,), state="glass"),
             Element("PHASE", modes=(1,), phi=0.0), Element("PHASE", modes=(2, 3), phi=2 * np.pi)]
    return Circuit(_labels(2), (_random_local(rng, 2), ident[int(rng.integers(4))], _random_local(rng, 2)))


def _sample_phase_merge(rng):
    p = int(rng.integers(2))
    modes = (2 * p, 2 * p + 1)
    between = Element("HWP", paths=(1 - p,), theta=float(rng.uniform(0, 90)))
    return Circuit(_labels(2), (
        Element("PHASE", modes=modes, phi=float(rng.uniform(-np.pi, np.pi))),
        between,
        Element("PHASE", modes=modes, phi=float(rng.uniform(-np.pi, np.pi))),
    ))


def _sample_sibling(rng):
    if rng.random() < 0.5:
        theta = float(rng.uniform(0, 90))
        return Circuit(_labels(4), (Element("HWP", paths=(0,), theta=theta), Element("PHASE", modes=(4,), phi=1.0),
                                    Element("HWP", paths=(1, 3), theta=theta)))
    return Circuit(_labels(4), (Element("BS", pairs=((0, 2),)), Element("BS", pairs=((1, 3),))))


def _sample_fusion(rng):
    return Circuit(_labels(2), tuple(_random_local(rng, 2) for _ in range(int(rng.integers(2, 6)))))


def _sample_hoist(rng):
    theta = float(rng.uniform(0, 90))
    return Circuit(_labels(2), (Element("HWP", paths=None, theta=theta), Element("PHASE", modes=(2, 3), phi=-np.pi / 2),
                                Element("BS", pairs=((0, 1),)), _random_local(rng, 2)))


RULES: list[RewriteRule] = []


def register(rule: RewriteRule, checks: int = 8, seed: int = 1234) -> RewriteRule:
    """Add a rule after checking it on instances of its own pattern."""
    rng = np.random.default_rng(seed)
    for _ in range(checks):
        ok, dev = check_rule(rule, rule.sample(rng))
        if not ok:
            raise CompileError(f"rule {rule.name!r} is unsound on its own pattern (deviation {dev:.3g})")
    RULES.append(rule)
    return rule


def check_rule(rule: RewriteRule, c: Circuit, tol: float = RULE_TOL) -> tuple[bool, float]:
    hit = rule.find(c)
    if hit is None:
        return True, 0.0
    return _equiv(c.unitary(), c.with_elements(hit[1]).unitary(), tol)


register(RewriteRule("global-phase-strip", find_global_phase, _sample_global))
register(RewriteRule("identity-elimination", find_identity, _sample_identity))
register(RewriteRule("phase-merge", find_phase_merge, _sample_phase_merge))
register(RewriteRule("sibling-merge", find_sibling_merge, _sample_sibling))
register(RewriteRule("waveplate-fusion", find_waveplate_fusion, _sample_fusion))
register(RewriteRule("hoist", find_hoist, _sample_hoist))


# -- canonicalization -------------------------------------------------------------

def _pol_acting(e: Element, n_paths: int) -> bool:
    if e.kind in _PLATES:
        return True
    if e.kind == "PHASE":
        modes = set(range(2 * n_paths)) if e.modes is None else set(e.modes)
        return any((m ^ 1) not in modes for m in modes)
    return False


def _key(e: Element, n_paths: int) -> tuple[int, int]:
    paths = e.touched_paths(n_paths)
    return (min(paths) if paths else -1, 0 if _pol_acting(e, n_paths) else 1)


def commute_pass(c: Circuit, across_dof: bool = False) -> Circuit:
    """Sort adjacent elements with disjoint bindings into canonical order.

    Order is by lowest path index, polarization-acting before spatial-acting.
    Adjacent phase shifters on identical modes merge.  Barriers never move.
    With ``across_dof`` overlapping pairs that commute (a plate common to
    both arms of a BS, say) are sorted too.  ``compile`` leaves it off: its
    hoist rule moves plates the other way when that exposes a fusion.
    """
    els = list(c.elements)
    changed = True
    while changed:
        changed = False
        k = 0
        while k < len(els) - 1:
            e, f = els[k], els[k + 1]
            if e.is_barrier or f.is_barrier:
                k += 1
                continue
            if e.kind == "PHASE" and f.kind == "PHASE" and e.modes == f.modes:
                phi = _wrap(e.phi + f.phi)
                els[k:k + 2] = [Element("PHASE", modes=e.modes, phi=phi)] if phi else []
                changed = True
                continue
            pe, pf = set(e.touched_paths(c.n_paths)), set(f.touched_paths(c.n_paths))
            movable = not pe & pf or (across_dof and commutes(e, f, c.n_paths))
            if movable and _key(f, c.n_paths) < _key(e, c.n_paths):
                els[k], els[k + 1] = f, e
                changed = True
            k += 1
    return c.with_elements(els)


def compile(c: Circuit, verify: bool = True, tol: float = CIRCUIT_TOL) -> tuple[Circuit, CompileReport]:
    """Rewrite to fixpoint; raises CompileError past 10 x element-count steps."""
    report = CompileReport(count_elements(c), count_elements(c))
    bound = 10 * max(1, len(c.elements))
    cur = c
    steps = 0
    while True:
        for rule in RULES:
            hit = rule.find(cur)
            if hit is not None:
                cur = cur.with_elements(hit[1])
                report.rule_applications.append((rule.name, hit[0]))
                break
        else:
            canon = commute_pass(cur)
            if canon.elements == cur.elements:
                break
            cur = canon
            report.rule_applications.append(("commute-pass", 0))
        steps += 1
        if steps > bound:
            raise CompileError(f"no fixpoint after {bound} rewrite steps on {c.name!r}")
    name = c.name if c.name.endswith("-compiled") else f"{c.name}-compiled"
    out = cur.with_elements(cur.elements, name=name)
    report.output_count = count_elements(out)
    if report.output_count > report.input_count:
        raise CompileError(f"element count grew from {report.input_count} to {report.output_count}")
    if verify:
        report.equivalence_verified, report.max_unitary_deviation = unitary_equiv(c, out, tol)
    return out, report
