"""Discretized su(2) connections along qubit paths.

A path is a sequence of segments, each carrying a constant field coefficient
vector A (three su(2) components, units 1/length), a length ds and a charge
q. A segment transports a qubit by exp(i q ds A.t) with t_a = sigma_a / 2;
a path transports by the ordered product with later segments on the left.
Closed-path traces are invariant under lattice gauge transforms exactly, and
under first-order field-level transforms up to second order in the transform
size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import frames, qmath


@dataclass(frozen=True)
class PathSegment:
    coeffs: tuple[float, float, float]
    length: float
    charge: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (3,) or not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be three finite reals")
        if not (self.length > 0.0 and np.isfinite(self.length)):
            raise ValueError("segment length must be positive")
        object.__setattr__(self, "coeffs", tuple(float(x) for x in c))


@dataclass(frozen=True)
class GaugePath:
    segments: tuple[PathSegment, ...]
    closed: bool

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a path needs at least one segment")
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def node_count(self) -> int:
        return len(self.segments) + 1


@dataclass(frozen=True)
class LatticeGaugeTransform:
    """One SU(2) element per node; for closed paths the first equals the last."""

    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        elems = tuple(np.asarray(g, dtype=complex) for g in self.elements)
        for g in elems:
            qmath.check_su2(g)
        object.__setattr__(self, "elements", elems)


def segment_transport(seg: PathSegment) -> np.ndarray:
    """exp(i q A.t ds) in closed form."""
    a = np.asarray(seg.coeffs)
    magnitude = float(np.linalg.norm(a))
    if magnitude == 0.0:
        return np.eye(2, dtype=complex)
    axis = a / magnitude
    angle = seg.charge * seg.length * magnitude
    return qmath.su2_from_axis_angle(axis, angle)


def path_transport(path: GaugePath) -> np.ndarray:
    """Ordered product of segment transports, later segments applied on the left."""
    product = np.eye(2, dtype=complex)
    for seg in path.segments:
        product = segment_transport(seg) @ product
    return product


def wilson_loop(path: GaugePath) -> complex:
    if not path.closed:
        raise ValueError("a loop trace needs a closed path")
    return complex(np.trace(path_transport(path)))


@dataclass(frozen=True)
class TransformedTransport:
    links: tuple[np.ndarray, ...]
    composite: np.ndarray


def gauge_transform(path: GaugePath, lgt: LatticeGaugeTransform) -> TransformedTransport:
    """Link-level transform L_i -> g_{i+1} L_i g_i^dag.

    For closed paths (matching first and last node elements) the composite is
    conjugated by the base-node element, so its trace never moves.
    """
    if len(lgt.elements) != path.node_count:
        raise ValueError("one group element per node is required")
    if path.closed and np.max(np.abs(lgt.elements[0] - lgt.elements[-1])) > 1e-12:
        raise ValueError("closed paths need matching first and last node elements")
    links = []
    for i, seg in enumerate(path.segments):
        links.append(lgt.elements[i + 1] @ segment_transport(seg) @ lgt.elements[i].conj().T)
    composite = np.eye(2, dtype=complex)
    for link in links:
        composite = link @ composite
    return TransformedTransport(tuple(links), composite)


def _cross_matrix(a: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]]
    )


def _phi_inverse(m: np.ndarray) -> np.ndarray:
    """Matrix function z / (e^z - 1) of a real antisymmetric 3x3 matrix."""
    h = 1j * m  # Hermitian
    vals, vecs = np.linalg.eigh(h)
    out = np.zeros(3, dtype=complex)
    for i, lam in enumerate(vals):
        z = -1j * lam
        if abs(z) < 1e-6:
            out[i] = 1.0 - z / 2.0 + z * z / 12.0
        else:
            out[i] = z / (np.exp(z) - 1.0)
    return (vecs @ np.diag(out) @ vecs.conj().T).real


def infinitesimal_gauge_delta(path: GaugePath, alpha: np.ndarray) -> GaugePath:
    """First-order field-level gauge transform with per-node parameters.

    ``alpha`` has one 3-vector per node (already scaled by the small
    transform size; closed paths repeat the first node at the end). The
    derivative term uses the forward node difference dressed so that the
    transformed link matches the exact node transform to first order; the
    remaining term is the structure-constant commutator A x alpha at the
    segment start. Closed-loop traces then move only at second order in the
    transform size.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (path.node_count, 3):
        raise ValueError("alpha needs one 3-vector per node")
    if path.closed and np.max(np.abs(alpha[0] - alpha[-1])) > 1e-15:
        raise ValueError("closed paths need matching first and last node parameters")
    new_segments = []
    for i, seg in enumerate(path.segments):
        a = np.asarray(seg.coeffs)
        q, ds = seg.charge, seg.length
        d_alpha = alpha[i + 1] - alpha[i]
        dressing = _phi_inverse(-q * ds * _cross_matrix(a))
        delta = dressing @ d_alpha / (q * ds) + np.cross(a, alpha[i])
        new_segments.append(PathSegment(tuple(a + delta), ds, q))
    return GaugePath(tuple(new_segments), path.closed)


def channels_to_path(
    net: frames.Network,
    cycle: Sequence,
    segments_per_hop: int = 1,
    hop_length: float = 1.0,
    charge: float = 1.0,
) -> GaugePath:
    """Closed path whose transport reproduces the cycle's loop rotation.

    Each hop becomes a constant field (the principal logarithm of the hop
    rotation in the base party's basis, split evenly over the requested
    number of segments), so the path transport equals the base party's loop
    holonomy for the same cycle.
    """
    if segments_per_hop < 1:
        raise ValueError("segments_per_hop must be at least 1")
    parties = [net.party(p) for p in cycle]
    if len(parties) < 2:
        raise ValueError("a cycle needs at least two parties")
    base = parties[0]
    f = net.frame(base)
    route = parties + [parties[0]]
    segments = []
    for src, dst in zip(route, route[1:]):
        hop = f.conj().T @ net.channel(dst, src) @ f
        coeffs = 2.0 * qmath.su2_log(hop) / (charge * hop_length)
        ds = hop_length / segments_per_hop
        for _ in range(segments_per_hop):
            segments.append(PathSegment(tuple(coeffs), ds, charge))
    return GaugePath(tuple(segments), closed=True)


def path_to_json(path: GaugePath) -> str:
    doc = {
        "closed": path.closed,
        "segments": [
            {"A": list(seg.coeffs), "ds": seg.length, "q": seg.charge}
            for seg in path.segments
        ],
    }
    return json.dumps(doc, indent=2)


def path_from_json(text: str) -> GaugePath:
    doc = json.loads(text)
    segments = tuple(
        PathSegment(tuple(entry["A"]), entry["ds"], entry["q"])
        for entry in doc["segments"]
    )
    return GaugePath(segments, bool(doc["closed"]))
