"""Communication worlds: private party frames, directed channels, observables.

Ground truth lives in a hidden fiducial basis. Each party k carries a frame
unitary F_k whose columns are that party's basis vectors expressed in the
fiducial basis; each ordered pair (receiver k, sender l) carries an
independent channel unitary V_kl applied to a qubit in flight. Relative
frames R_kl = F_k F_l^dag are always derived, never stored, which makes the
composition rules R_kl R_lm = R_km and R_kl^dag = R_lk automatic.

A ``LocalDescription`` is one party's account of a set of labelled qubits:
the amplitudes of the global state in that party's basis on every wire.
Transmitting a wire re-expresses the whole account in the receiver's basis
and applies the channel rotation to the moved wire only, so the underlying
physical state changes exactly where the channel acts and nowhere else.

Ground-truth accessors (frames, channels, relative frames, observable
evaluators) are refused while a protocol seal is active; parties then act
only through :class:`PartyHandle`, which exposes exactly what a party can
physically do and know.
"""

from __future__ import annotations

import contextvars
import json
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import qmath

PARTY_NAMES = ("Alice", "Bob", "Charlie", "Dave", "Erin", "Frank", "Grace", "Heidi")


class FrameRestriction(Enum):
    FULL = "full"
    Z_ROTATION_ONLY = "zrot"


class ObservableKind(Enum):
    PRIVATE_FRAME_DEPENDENT = "private-frame-dependent"
    PRIVATE_FRAME_INDEPENDENT = "private-frame-independent"
    PUBLIC_FRAME_INDEPENDENT = "public-frame-independent"


class ProtocolViolationError(RuntimeError):
    """A party attempted an action outside its capabilities or ownership."""


_SEAL = contextvars.ContextVar("gaugecomm_seal", default=False)


@contextmanager
def sealed():
    """Deny ground-truth access for the duration (protocol execution mode)."""
    token = _SEAL.set(True)
    try:
        yield
    finally:
        _SEAL.reset(token)


def seal_active() -> bool:
    return _SEAL.get()


def _require_open(what: str) -> None:
    if _SEAL.get():
        raise ProtocolViolationError(
            f"{what} is ground truth and is not accessible while a protocol runs"
        )


@dataclass(frozen=True)
class Party:
    index: int
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ObservableValue:
    kind: ObservableKind
    value: object
    owner: Party | None = None  # None means known to everyone


@dataclass(frozen=True)
class LocalDescription:
    """One party's amplitudes for a set of labelled qubits, in its own basis."""

    owner: Party
    state: np.ndarray
    wires: tuple[str, ...]

    def __post_init__(self):
        state = np.asarray(self.state, dtype=complex)
        n = qmath.check_state(state)
        if n != len(self.wires):
            raise ValueError("wire count does not match the state dimension")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError("wire labels must be unique")
        object.__setattr__(self, "state", state)

    @property
    def n(self) -> int:
        return len(self.wires)

    def wire_index(self, wire: str) -> int:
        try:
            return self.wires.index(wire)
        except ValueError:
            raise ValueError(f"no wire labelled {wire!r}") from None


def _z_rotation(rng: np.random.Generator) -> np.ndarray:
    phi = rng.uniform(0.0, 2.0 * np.pi)
    return np.diag([np.exp(0.5j * phi), np.exp(-0.5j * phi)])


def _is_z_rotation(u: np.ndarray, atol: float = 1e-10) -> bool:
    return abs(u[0, 1]) < atol and abs(u[1, 0]) < atol


@dataclass(eq=False, frozen=True)
class Network:
    """Immutable ground truth of a simulation run."""

    parties: tuple[Party, ...]
    restriction: FrameRestriction
    seed: int | None
    reciprocal: bool
    frames_internal: tuple[np.ndarray, ...]
    channels_internal: dict[tuple[int, int], np.ndarray]

    # -- party lookup ------------------------------------------------------

    def party(self, key) -> Party:
        if isinstance(key, Party):
            return key
        if isinstance(key, int):
            return self.parties[key]
        for p in self.parties:
            if p.name == key:
                return p
        raise ValueError(f"unknown party {key!r}")

    def handle(self, key) -> "PartyHandle":
        return PartyHandle(self, self.party(key))

    # -- internal (ungated) ground truth ----------------------------------

    def _frame(self, key) -> np.ndarray:
        return self.frames_internal[self.party(key).index]

    def _channel(self, receiver, sender) -> np.ndarray:
        k, l = self.party(receiver).index, self.party(sender).index
        if k == l:
            raise ValueError("no channel from a party to itself")
        return self.channels_internal[(k, l)]

    # -- gated ground-truth accessors (test/analysis surface) -------------

    def frame(self, key) -> np.ndarray:
        _require_open("a party frame")
        return self._frame(key).copy()

    def channel(self, receiver, sender) -> np.ndarray:
        _require_open("a channel unitary")
        return self._channel(receiver, sender).copy()


def build_network(
    seed: int,
    party_count: int = 2,
    restriction: FrameRestriction = FrameRestriction.FULL,
    reciprocal: bool = False,
) -> Network:
    """Draw frames and all ordered-pair channels; deterministic in the seed.

    Frames are Haar random (z rotations only under the restriction); channels
    are Haar random and independent per ordered pair unless ``reciprocal``
    forces V_kl = V_lk^dag, the case of a single physical line used both ways.
    """
    if party_count < 2:
        raise ValueError("a network needs at least two parties")
    if party_count > len(PARTY_NAMES):
        raise ValueError(f"at most {len(PARTY_NAMES)} parties are supported")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    parties = tuple(Party(i, PARTY_NAMES[i]) for i in range(party_count))
    if restriction is FrameRestriction.Z_ROTATION_ONLY:
        frames = tuple(_z_rotation(rng) for _ in parties)
    else:
        frames = tuple(qmath.haar_random_su2(rng) for _ in parties)
    channels: dict[tuple[int, int], np.ndarray] = {}
    for k in range(party_count):
        for l in range(party_count):
            if k == l:
                continue
            if reciprocal and (l, k) in channels:
                channels[(k, l)] = channels[(l, k)].conj().T
            else:
                channels[(k, l)] = qmath.haar_random_su2(rng)
    return Network(parties, restriction, seed, reciprocal, frames, channels)


def network_from_components(
    frames: Sequence[np.ndarray],
    channels: dict[tuple[int, int], np.ndarray],
    restriction: FrameRestriction = FrameRestriction.FULL,
    seed: int | None = None,
    reciprocal: bool = False,
) -> Network:
    """Assemble a network from explicit matrices (validated)."""
    parties = tuple(Party(i, PARTY_NAMES[i]) for i in range(len(frames)))
    if len(parties) < 2:
        raise ValueError("a network needs at least two parties")
    frames = tuple(np.asarray(f, dtype=complex) for f in frames)
    for f in frames:
        qmath.check_su2(f)
    channels = {k: np.asarray(v, dtype=complex) for k, v in channels.items()}
    for (k, l), v in channels.items():
        if k == l:
            raise ValueError("channels connect distinct parties")
        qmath.check_su2(v)
    expected = {(k, l) for k in range(len(parties)) for l in range(len(parties)) if k != l}
    if set(channels) != expected:
        raise ValueError("one channel per ordered pair is required")
    return Network(parties, restriction, seed, reciprocal, frames, channels)


def identity_network(party_count: int = 2) -> Network:
    """All frames and channels trivial; useful as a no-mismatch baseline."""
    eye = np.eye(2, dtype=complex)
    channels = {
        (k, l): eye.copy()
        for k in range(party_count)
        for l in range(party_count)
        if k != l
    }
    return network_from_components([eye.copy() for _ in range(party_count)], channels)


# ---------------------------------------------------------------------------
# description dynamics


def _hop_ops(net: Network, basis_from: Party, holder: Party, receiver: Party):
    """Per-wire maps for a transmission: moved wire and bystander wires."""
    f_from = net._frame(basis_from)
    f_to = net._frame(receiver)
    channel = net._channel(receiver, holder)
    bystander = f_to.conj().T @ f_from
    moved = f_to.conj().T @ channel @ f_from
    return moved, bystander


def _transmit_description(
    net: Network, holder: Party, receiver: Party, desc: LocalDescription, wire: str
) -> LocalDescription:
    if holder == receiver:
        raise ValueError("sender and receiver must differ")
    pos = desc.wire_index(wire)
    moved, bystander = _hop_ops(net, desc.owner, holder, receiver)
    ops = [moved if i == pos else bystander for i in range(desc.n)]
    return LocalDescription(receiver, qmath.kron_chain(ops) @ desc.state, desc.wires)


def transmit(
    net: Network, sender, receiver, desc: LocalDescription, wire: str
) -> LocalDescription:
    """Send one wire of ``desc`` from its owner to ``receiver``.

    The moved wire picks up the channel rotation; every other wire is only
    re-expressed from the sender's basis to the receiver's, so the global
    physical state is untouched away from the channel.
    """
    sender = net.party(sender)
    receiver = net.party(receiver)
    if desc.owner != sender:
        raise ProtocolViolationError(
            f"{sender.name} cannot transmit a description owned by {desc.owner.name}"
        )
    return _transmit_description(net, sender, receiver, desc, wire)


def apply_local(desc: LocalDescription, gate: np.ndarray, wires: Sequence[str]) -> LocalDescription:
    """Apply a unitary, given in the owner's basis, to the listed wires."""
    gate = np.asarray(gate, dtype=complex)
    qmath.check_unitary(gate)
    positions = [desc.wire_index(w) for w in wires]
    state = qmath.apply_to_wires(desc.state, gate, positions)
    return LocalDescription(desc.owner, state, desc.wires)


def lift_to_fiducial(net: Network, desc: LocalDescription) -> np.ndarray:
    """Ground-truth physical amplitudes of a description (test surface)."""
    _require_open("the fiducial representation")
    f = net._frame(desc.owner)
    return qmath.kron_chain([f] * desc.n) @ desc.state


# ---------------------------------------------------------------------------
# observables


def relative_frame(net: Network, k, l) -> np.ndarray:
    """R_kl = F_k F_l^dag; test-only ground truth, never a protocol input."""
    _require_open("a relative frame")
    return net._frame(k) @ net._frame(l).conj().T


def observable_g1(net: Network, a, b, phi: np.ndarray, psi: np.ndarray) -> ObservableValue:
    """One-hop probe: what receiver b reconstructs when a declares psi and
    b projects on phi, both states given as coefficient vectors."""
    _require_open("a one-hop probe value")
    a, b = net.party(a), net.party(b)
    qmath.check_state(np.asarray(phi))
    qmath.check_state(np.asarray(psi))
    if np.asarray(phi).shape != (2,) or np.asarray(psi).shape != (2,):
        raise ValueError("probe states must be single qubit")
    matrix = net._frame(b).conj().T @ net._channel(b, a) @ net._frame(a)
    value = complex(np.vdot(np.asarray(phi), matrix @ np.asarray(psi)))
    return ObservableValue(ObservableKind.PRIVATE_FRAME_DEPENDENT, value, owner=b)


def observable_g2(
    net: Network, a, b, u_b: np.ndarray, phi: np.ndarray, psi: np.ndarray
) -> ObservableValue:
    """Round-trip probe: a sends psi to b, b applies u_b in its own basis and
    returns the qubit, a projects on phi."""
    _require_open("a round-trip probe value")
    a, b = net.party(a), net.party(b)
    u_b = np.asarray(u_b, dtype=complex)
    qmath.check_unitary(u_b)
    f_a, f_b = net._frame(a), net._frame(b)
    middle = f_b @ u_b @ f_b.conj().T
    matrix = f_a.conj().T @ net._channel(a, b) @ middle @ net._channel(b, a) @ f_a
    value = complex(np.vdot(np.asarray(phi), matrix @ np.asarray(psi)))
    return ObservableValue(ObservableKind.PRIVATE_FRAME_DEPENDENT, value, owner=a)


def _loop_product(net: Network, route: Sequence) -> np.ndarray:
    parties = [net.party(p) for p in route]
    if len(parties) < 3:
        raise ValueError("a loop needs at least two hops")
    if parties[0] != parties[-1]:
        raise ValueError("route must start and end at the same party")
    product = np.eye(2, dtype=complex)
    for src, dst in zip(parties, parties[1:]):
        if src == dst:
            raise ValueError("consecutive route entries must differ")
        product = net._channel(dst, src) @ product
    return product


def loop_holonomy(net: Network, route: Sequence) -> ObservableValue:
    """Net rotation around a closed route, in the base party's own basis."""
    _require_open("a loop holonomy")
    owner = net.party(route[0])
    product = _loop_product(net, route)
    f = net._frame(owner)
    value = f.conj().T @ product @ f
    return ObservableValue(ObservableKind.PRIVATE_FRAME_INDEPENDENT, value, owner=owner)


def wilson_trace(net: Network, cycle: Sequence) -> ObservableValue:
    """Trace of the loop rotation; the same number for every party and frame."""
    parties = [net.party(p) for p in cycle]
    if len(parties) < 2:
        raise ValueError("a cycle needs at least two parties")
    route = parties + [parties[0]]
    value = complex(np.trace(_loop_product(net, route)))
    return ObservableValue(ObservableKind.PUBLIC_FRAME_INDEPENDENT, value, owner=None)


def is_known_to(net: Network, party, observable: ObservableValue) -> bool:
    """Public values are known to everyone, private ones to their owner only."""
    if observable.kind is ObservableKind.PUBLIC_FRAME_INDEPENDENT:
        return True
    return observable.owner == net.party(party)


# ---------------------------------------------------------------------------
# frame changes and the equivalent channel-side view


def _check_restricted_rotation(net: Network, rotation: np.ndarray) -> None:
    qmath.check_su2(rotation)
    if net.restriction is FrameRestriction.Z_ROTATION_ONLY and not _is_z_rotation(rotation):
        raise ValueError("frame changes are restricted to z rotations here")


def apply_frame_change(net: Network, party, rotation: np.ndarray) -> Network:
    """New network in which one party's basis is rotated by ``rotation``
    (expressed in that party's old basis). Channels are untouched."""
    p = net.party(party)
    rotation = np.asarray(rotation, dtype=complex)
    _check_restricted_rotation(net, rotation)
    frames = list(net.frames_internal)
    frames[p.index] = frames[p.index] @ rotation
    return Network(
        net.parties, net.restriction, net.seed, net.reciprocal,
        tuple(frames), dict(net.channels_internal),
    )


def frame_change_channel_view(net: Network, party, rotation: np.ndarray) -> Network:
    """The same frame change presented as a remapping of that party's
    channels, with every frame left alone. All observables agree with
    :func:`apply_frame_change` exactly."""
    p = net.party(party)
    rotation = np.asarray(rotation, dtype=complex)
    _check_restricted_rotation(net, rotation)
    f = net.frames_internal[p.index]
    rho = f @ rotation @ f.conj().T
    channels = dict(net.channels_internal)
    for (k, l), v in net.channels_internal.items():
        if k == p.index:
            channels[(k, l)] = rho.conj().T @ v
        elif l == p.index:
            channels[(k, l)] = v @ rho
    return Network(
        net.parties, net.restriction, net.seed, net.reciprocal,
        tuple(net.frames_internal), channels,
    )


# ---------------------------------------------------------------------------
# party capabilities


@dataclass(frozen=True)
class PartyHandle:
    """What one party can do: local preparation, local gates, sending wires,
    collective-rotation-invariant measurements, measurements in its own
    basis, and its own loop holonomies. Nothing here reads another party's
    frame, so every method stays legal while a protocol seal is active."""

    net: Network
    party: Party

    def prepare(self, amplitudes: np.ndarray, wires: Sequence[str]) -> LocalDescription:
        return LocalDescription(self.party, np.asarray(amplitudes, dtype=complex), tuple(wires))

    def apply(self, desc: LocalDescription, gate: np.ndarray, wires: Sequence[str]) -> LocalDescription:
        """Apply a gate, written in this party's basis, to wires it holds."""
        gate = np.asarray(gate, dtype=complex)
        qmath.check_unitary(gate)
        if desc.owner == self.party:
            return apply_local(desc, gate, wires)
        # Re-express the actor's gate in the description owner's basis. This
        # is bookkeeping inside the simulator, not knowledge the owner gains.
        g_rel = self.net._frame(desc.owner).conj().T @ self.net._frame(self.party)
        m = len(list(wires))
        conj = qmath.kron_chain([g_rel] * m)
        gate_in_owner = conj @ gate @ conj.conj().T
        positions = [desc.wire_index(w) for w in wires]
        state = qmath.apply_to_wires(desc.state, gate_in_owner, positions)
        return LocalDescription(desc.owner, state, desc.wires)

    def send(self, desc: LocalDescription, wire: str, receiver) -> LocalDescription:
        """Send a wire this party holds; the description may be owned by
        anyone, the channel used is (receiver <- this party)."""
        return _transmit_description(self.net, self.party, self.net.party(receiver), desc, wire)

    def measure_invariant(
        self, desc: LocalDescription, povm, wires: Sequence[str], rng: np.random.Generator
    ) -> tuple[str, LocalDescription]:
        """Sample a collective-rotation-invariant projective measurement.

        Invariance makes the outcome statistics identical in every party's
        account, which is what allows a party to perform it without any
        frame information.
        """
        if not getattr(povm, "collective_invariant", False):
            raise ProtocolViolationError(
                "only collective-rotation-invariant measurements are frame free"
            )
        positions = [desc.wire_index(w) for w in wires]
        probs = []
        projected = []
        for element in povm.elements:
            full = qmath.embed(element, positions, desc.n)
            vec = full @ desc.state
            probs.append(max(float(np.real(np.vdot(desc.state, vec))), 0.0))
            projected.append(vec)
        probs = np.array(probs)
        probs = probs / probs.sum()
        choice = int(rng.choice(len(probs), p=probs))
        post = projected[choice] / np.linalg.norm(projected[choice])
        return povm.labels[choice], LocalDescription(desc.owner, post, desc.wires)

    def invariant_distribution(self, desc: LocalDescription, povm, wires: Sequence[str]) -> np.ndarray:
        """Exact outcome distribution of an invariant measurement."""
        if not getattr(povm, "collective_invariant", False):
            raise ProtocolViolationError(
                "only collective-rotation-invariant measurements are frame free"
            )
        positions = [desc.wire_index(w) for w in wires]
        out = []
        for element in povm.elements:
            full = qmath.embed(element, positions, desc.n)
            out.append(max(float(np.real(np.vdot(desc.state, full @ desc.state))), 0.0))
        return np.array(out)

    def measure_computational(
        self, desc: LocalDescription, wire: str, rng: np.random.Generator, discard: bool = False
    ) -> tuple[int, LocalDescription]:
        """Measure one held wire in this party's own basis."""
        pos = desc.wire_index(wire)
        if desc.owner == self.party:
            g_rel = np.eye(2, dtype=complex)
        else:
            g_rel = self.net._frame(desc.owner).conj().T @ self.net._frame(self.party)
        outcomes = []
        for bit in (0, 1):
            proj = np.zeros((2, 2), dtype=complex)
            proj[bit, bit] = 1.0
            proj = g_rel @ proj @ g_rel.conj().T
            vec = qmath.apply_to_wires(desc.state, proj, [pos])
            outcomes.append((max(float(np.real(np.vdot(desc.state, vec))), 0.0), vec))
        probs = np.array([p for p, _ in outcomes])
        probs = probs / probs.sum()
        bit = int(rng.choice(2, p=probs))
        post = outcomes[bit][1] / np.linalg.norm(outcomes[bit][1])
        if not discard:
            return bit, LocalDescription(desc.owner, post, desc.wires)
        # The measured wire factors out as the rotated basis vector exactly.
        qubit = g_rel[:, bit]
        tensor = post.reshape([2] * desc.n)
        reduced = np.tensordot(qubit.conj(), tensor, axes=([0], [pos])).reshape(-1)
        reduced = reduced / np.linalg.norm(reduced)
        wires = tuple(w for i, w in enumerate(desc.wires) if i != pos)
        return bit, LocalDescription(desc.owner, reduced, wires)

    def loop_holonomy(self, route: Sequence) -> np.ndarray:
        """This party's own closed-loop rotation, in its own basis."""
        parties = [self.net.party(p) for p in route]
        if parties[0] != self.party or parties[-1] != self.party:
            raise ProtocolViolationError(
                f"{self.party.name} can only measure loops based at itself"
            )
        product = _loop_product(self.net, parties)
        f = self.net._frame(self.party)
        return f.conj().T @ product @ f

    def wilson_trace(self, cycle: Sequence) -> complex:
        return wilson_trace(self.net, cycle).value


# ---------------------------------------------------------------------------
# serialization


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m)]


def _matrix_from_json(data: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data])


def network_to_json(net: Network) -> str:
    doc = {
        "seed": net.seed,
        "party_count": len(net.parties),
        "restriction": net.restriction.value,
        "reciprocal": net.reciprocal,
        "frames": [_matrix_to_json(f) for f in net.frames_internal],
        "channels": [
            {"receiver": k, "sender": l, "matrix": _matrix_to_json(v)}
            for (k, l), v in sorted(net.channels_internal.items())
        ],
    }
    return json.dumps(doc, indent=2)


def network_from_json(text: str) -> Network:
    doc = json.loads(text)
    restriction = FrameRestriction(doc["restriction"])
    if "frames" in doc and doc["frames"] is not None:
        frames = [_matrix_from_json(f) for f in doc["frames"]]
        channels = {
            (entry["receiver"], entry["sender"]): _matrix_from_json(entry["matrix"])
            for entry in doc["channels"]
        }
        return network_from_components(
            frames, channels, restriction, doc.get("seed"), doc.get("reciprocal", False)
        )
    return build_network(
        doc["seed"], doc["party_count"], restriction, doc.get("reciprocal", False)
    )
