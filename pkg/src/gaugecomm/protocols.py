"""Three multi-party protocols over frame-private networks: bit hiding with
two unlocking routes, resource-assisted dense coding, and a commitment
scheme with a perfect sender-side cheat.

Every party action goes through :class:`gaugecomm.frames.PartyHandle` under
an active protocol seal, so no code path in this module can read frames or
channels. Probabilities are always computed exactly from the state; sampling
is layered on top of the exact conditionals as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import frames, invariants, qmath

_SQ2 = np.sqrt(2.0)


class SessionStateError(RuntimeError):
    """An action was attempted in the wrong protocol phase."""


@dataclass(frozen=True)
class TranscriptEvent:
    party: str
    action: str
    outcome: str | None = None
    probability: float | None = None


@dataclass
class Transcript:
    events: list[TranscriptEvent] = field(default_factory=list)
    verdict: str | None = None

    def log(self, party, action, outcome=None, probability=None):
        self.events.append(TranscriptEvent(str(party), action, outcome, probability))

    def to_jsonable(self) -> dict:
        return {
            "events": [
                {
                    "party": e.party,
                    "action": e.action,
                    "outcome": e.outcome,
                    "probability": e.probability,
                }
                for e in self.events
            ],
            "verdict": self.verdict,
        }


def _plus() -> np.ndarray:
    return np.array([1.0, 1.0], dtype=complex) / _SQ2


def _minus() -> np.ndarray:
    return np.array([1.0, -1.0], dtype=complex) / _SQ2


# ---------------------------------------------------------------------------
# quantum data hiding


class RefbitConfig(Enum):
    SAME_STATE = "same-state"
    ORTHOGONAL = "orthogonal"


class UnlockOutcome(Enum):
    CONCLUSIVE_PLUS = "conclusive(+)"
    CONCLUSIVE_MINUS = "conclusive(-)"
    INCONCLUSIVE = "inconclusive"


_HIDDEN_PAIRS = {
    # family "z01": the pair a singlet test can tell apart after forwarding
    ("z01", "+"): "z",
    ("z01", "-"): "0",
    # family "xy": both states land in the triplet sector, so it cannot
    ("xy", "+"): "x",
    ("xy", "-"): "y",
}


@dataclass(frozen=True)
class DataHidingInstance:
    net: frames.Network
    hider: frames.Party
    bit: str
    family: str
    refbit_config: RefbitConfig | None
    desc: frames.LocalDescription
    transcript: Transcript


def hide_bit(
    net: frames.Network,
    bit: str,
    family: str = "z01",
    refbit_config: RefbitConfig | None = None,
) -> DataHidingInstance:
    """Charlie encodes one bit in a two-qubit state and splits it between
    Alice and Bob; optionally he also hands each of them one token qubit."""
    if bit not in ("+", "-"):
        raise ValueError("bit must be '+' or '-'")
    if family not in ("z01", "xy"):
        raise ValueError("family must be 'z01' or 'xy'")
    hider = net.party("Charlie")
    transcript = Transcript()
    with frames.sealed():
        h = net.handle(hider)
        bell = invariants.bell_basis()
        pair = bell.state(_HIDDEN_PAIRS[(family, bit)])
        if refbit_config is None:
            desc = h.prepare(pair, ("hidden:A", "hidden:B"))
        else:
            r_b = _plus() if refbit_config is RefbitConfig.SAME_STATE else _minus()
            state = qmath.kron_chain([pair, _plus(), r_b])
            state = state.reshape(-1)
            desc = h.prepare(state, ("hidden:A", "hidden:B", "ref:A", "ref:B"))
            transcript.log(hider, "prepare token qubits", refbit_config.value)
        transcript.log(hider, "prepare hidden pair", family)
        desc = h.send(desc, "hidden:A", "Alice")
        transcript.log(hider, "send hidden qubit", "Alice")
        desc = h.send(desc, "hidden:B", "Bob")
        transcript.log(hider, "send hidden qubit", "Bob")
        if refbit_config is not None:
            desc = h.send(desc, "ref:A", "Alice")
            desc = h.send(desc, "ref:B", "Bob")
            transcript.log(hider, "send token qubits", "Alice, Bob")
    return DataHidingInstance(net, hider, bit, family, refbit_config, desc, transcript)


@dataclass(frozen=True)
class ForwardingResult:
    decoded: str | None  # None when the instance family defeats this route
    distribution: dict[str, float]
    sampled_outcome: str
    transcript: Transcript


def unlock_by_forwarding(instance: DataHidingInstance, rng: np.random.Generator) -> ForwardingResult:
    """Bob forwards his half to Alice, who undoes the route mismatch with a
    gate built from two of her own loop rotations and runs the singlet test."""
    net = instance.net
    transcript = instance.transcript
    with frames.sealed():
        hb = net.handle("Bob")
        ha = net.handle("Alice")
        desc = hb.send(instance.desc, "hidden:B", "Alice")
        transcript.log("Bob", "forward hidden qubit", "Alice")
        correction = ha.loop_holonomy(["Alice", "Charlie", "Alice"]) @ (
            ha.loop_holonomy(["Alice", "Charlie", "Bob", "Alice"]).conj().T
        )
        desc = ha.apply(desc, correction, ["hidden:B"])
        transcript.log("Alice", "apply loop-built correction")
        povm = invariants.povm2_singlet_triplet()
        probs = ha.invariant_distribution(desc, povm, ["hidden:A", "hidden:B"])
        label, _ = ha.measure_invariant(desc, povm, ["hidden:A", "hidden:B"], rng)
        transcript.log("Alice", "singlet test", label, float(probs[povm.labels.index(label)]))
    distribution = dict(zip(povm.labels, (float(p) for p in probs)))
    if instance.family == "z01":
        decoded = "-" if label == "singlet" else "+"
    else:
        decoded = None
    transcript.verdict = decoded if decoded else "indeterminate"
    return ForwardingResult(decoded, distribution, label, transcript)


def forwarding_exact_distribution(net: frames.Network, bit: str, family: str = "z01") -> dict[str, float]:
    """Exact singlet-test distribution Alice ends with for one hidden bit."""
    instance = hide_bit(net, bit, family)
    with frames.sealed():
        hb = net.handle("Bob")
        ha = net.handle("Alice")
        desc = hb.send(instance.desc, "hidden:B", "Alice")
        correction = ha.loop_holonomy(["Alice", "Charlie", "Alice"]) @ (
            ha.loop_holonomy(["Alice", "Charlie", "Bob", "Alice"]).conj().T
        )
        desc = ha.apply(desc, correction, ["hidden:B"])
        povm = invariants.povm2_singlet_triplet()
        probs = ha.invariant_distribution(desc, povm, ["hidden:A", "hidden:B"])
    return dict(zip(povm.labels, (float(p) for p in probs)))


@dataclass(frozen=True)
class RefbitUnlockResult:
    outcome: UnlockOutcome
    decoded: str | None
    joint_distribution: dict[tuple[str, str], float]
    transcript: Transcript


def refbit_joint_distribution(instance: DataHidingInstance) -> dict[tuple[str, str], float]:
    """Exact joint law of Alice's and Bob's local singlet tests."""
    if instance.refbit_config is None:
        raise ValueError("this instance carries no token qubits")
    net = instance.net
    povm = invariants.povm2_singlet_triplet()
    with frames.sealed():
        ha = net.handle("Alice")
        out = {}
        desc = instance.desc
        for a_label, e_a in zip(povm.labels, povm.elements):
            pa = qmath.embed(e_a, [desc.wire_index("hidden:A"), desc.wire_index("ref:A")], desc.n)
            for b_label, e_b in zip(povm.labels, povm.elements):
                pb = qmath.embed(e_b, [desc.wire_index("hidden:B"), desc.wire_index("ref:B")], desc.n)
                val = np.real(np.vdot(desc.state, pa @ pb @ desc.state))
                out[(a_label, b_label)] = max(float(val), 0.0)
    return out


def unlock_with_refbits(instance: DataHidingInstance, rng: np.random.Generator) -> RefbitUnlockResult:
    """Alice and Bob each singlet-test their hidden-plus-token pair; a double
    singlet outcome conclusively names one of the two bit values."""
    joint = refbit_joint_distribution(instance)
    labels = list(joint)
    probs = np.array([joint[k] for k in labels])
    probs = probs / probs.sum()
    a_label, b_label = labels[int(rng.choice(len(labels), p=probs))]
    transcript = instance.transcript
    transcript.log("Alice", "local singlet test", a_label)
    transcript.log("Bob", "local singlet test", b_label)
    if a_label == "singlet" and b_label == "singlet":
        if instance.refbit_config is RefbitConfig.SAME_STATE:
            outcome, decoded = UnlockOutcome.CONCLUSIVE_PLUS, "+"
        else:
            outcome, decoded = UnlockOutcome.CONCLUSIVE_MINUS, "-"
    else:
        outcome, decoded = UnlockOutcome.INCONCLUSIVE, None
    transcript.verdict = outcome.value
    return RefbitUnlockResult(outcome, decoded, joint, transcript)


def refbit_success_probability(net: frames.Network) -> float:
    """Exact success chance under a uniform bit and uniform token choice."""
    total = 0.0
    for bit in ("+", "-"):
        for config in (RefbitConfig.SAME_STATE, RefbitConfig.ORTHOGONAL):
            joint = refbit_joint_distribution(hide_bit(net, bit, "z01", config))
            p_ss = joint[("singlet", "singlet")]
            decoded = "+" if config is RefbitConfig.SAME_STATE else "-"
            if decoded == bit:
                total += 0.25 * p_ss
    return total


def hiding_audit_datahiding(net: frames.Network) -> dict[str, float]:
    """Worst deviation between the two bits in anything Alice or Bob can
    measure locally before unlocking, with and without token qubits."""
    povm = invariants.povm2_singlet_triplet()
    out = {}
    # bare instance: single-qubit marginals only
    rhos = {}
    for bit in ("+", "-"):
        inst = hide_bit(net, bit)
        rho = qmath.density(inst.desc.state)
        rhos[bit] = (
            qmath.partial_trace(rho, [inst.desc.wire_index("hidden:A")]),
            qmath.partial_trace(rho, [inst.desc.wire_index("hidden:B")]),
        )
    out["bare_alice_marginal"] = float(np.max(np.abs(rhos["+"][0] - rhos["-"][0])))
    out["bare_bob_marginal"] = float(np.max(np.abs(rhos["+"][1] - rhos["-"][1])))
    # token instances: each side's local pair statistics
    for config in RefbitConfig:
        dists = {}
        for bit in ("+", "-"):
            inst = hide_bit(net, bit, "z01", config)
            with frames.sealed():
                ha = net.handle("Alice")
                hb = net.handle("Bob")
                pa = ha.invariant_distribution(inst.desc, povm, ["hidden:A", "ref:A"])
                pb = hb.invariant_distribution(inst.desc, povm, ["hidden:B", "ref:B"])
            dists[bit] = (pa, pb)
        tv_a = 0.5 * float(np.sum(np.abs(dists["+"][0] - dists["-"][0])))
        tv_b = 0.5 * float(np.sum(np.abs(dists["+"][1] - dists["-"][1])))
        out[f"{config.value}_alice_pair_tv"] = tv_a
        out[f"{config.value}_bob_pair_tv"] = tv_b
    return out


# ---------------------------------------------------------------------------
# dense coding with shared pairs and token qubits


class ResourceLevel(Enum):
    NONE = "none"
    ENTANGLED_PAIR = "pair"
    TWO_REFBITS = "refbits"


OPERATIONS = ("I", "X", "Y", "Z")

_OP_GATES = {
    "I": qmath.IDENTITY2,
    "X": qmath.PAULI_X,
    "Y": qmath.PAULI_Y,
    "Z": qmath.PAULI_Z,
}

# the stated encoding strategy: I half the time, Z a quarter, X or Y a quarter
DEFAULT_STRATEGY = {"I": 0.5, "Z": 0.25, "X": 0.125, "Y": 0.125}


@dataclass(frozen=True)
class SuperdenseSession:
    net: frames.Network
    resource: ResourceLevel
    operation: str
    desc: frames.LocalDescription  # everything in Bob's hands
    transcript: Transcript


def superdense_session(net: frames.Network, resource: ResourceLevel, operation: str) -> SuperdenseSession:
    """Share a pair, optionally ship the extra resource, encode, and send."""
    if operation not in OPERATIONS:
        raise ValueError(f"operation must be one of {OPERATIONS}")
    transcript = Transcript()
    with frames.sealed():
        ha = net.handle("Alice")
        singlet = (qmath.ket("01") - qmath.ket("10")) / _SQ2
        if resource is ResourceLevel.NONE:
            desc = ha.prepare(singlet, ("pair:A", "pair:B"))
        else:
            if resource is ResourceLevel.ENTANGLED_PAIR:
                extra = (qmath.ket("00") - qmath.ket("11")) / _SQ2
                transcript.log("Alice", "prepare entangled resource")
            else:
                extra = qmath.ket("00")
                transcript.log("Alice", "prepare token qubits")
            desc = ha.prepare(np.kron(singlet, extra), ("pair:A", "pair:B", "res:1", "res:2"))
        desc = ha.send(desc, "pair:B", "Bob")
        transcript.log("Alice", "share pair half", "Bob")
        if resource is not ResourceLevel.NONE:
            desc = ha.send(desc, "res:1", "Bob")
            desc = ha.send(desc, "res:2", "Bob")
            transcript.log("Alice", "send resource qubits", "Bob")
        desc = ha.apply(desc, _OP_GATES[operation], ["pair:A"])
        transcript.log("Alice", "encode", operation)
        desc = ha.send(desc, "pair:A", "Bob")
        transcript.log("Alice", "send encoded qubit", "Bob")
    return SuperdenseSession(net, resource, operation, desc, transcript)


@dataclass(frozen=True)
class SuperdenseDistribution:
    p_singlet: float
    p_phi01_given_triplet: float | None  # None when no resource is present

    @property
    def p_phi01(self) -> float:
        if self.p_phi01_given_triplet is None:
            return 0.0
        return (1.0 - self.p_singlet) * self.p_phi01_given_triplet


def superdense_exact(session: SuperdenseSession) -> SuperdenseDistribution:
    """Exact law of Bob's measurement cascade for one encoding choice."""
    net = session.net
    desc = session.desc
    povm2 = invariants.povm2_singlet_triplet()
    with frames.sealed():
        hb = net.handle("Bob")
        pair_wires = ["pair:A", "pair:B"]
        p2 = hb.invariant_distribution(desc, povm2, pair_wires)
        p_singlet = float(p2[0] / p2.sum())
        if session.resource is ResourceLevel.NONE:
            return SuperdenseDistribution(p_singlet, None)
        if p_singlet > 1.0 - 1e-14:
            return SuperdenseDistribution(p_singlet, 0.0)
        # condition on the triplet outcome, then run the four-qubit test
        positions = [desc.wire_index(w) for w in pair_wires]
        projected = qmath.embed(povm2.elements[1], positions, desc.n) @ desc.state
        projected = projected / np.linalg.norm(projected)
        cond = frames.LocalDescription(desc.owner, projected, desc.wires)
        povm4 = invariants.povm4_invariant()
        p4 = hb.invariant_distribution(cond, povm4, ["pair:A", "pair:B", "res:1", "res:2"])
        p_phi01 = float(p4[1] / p4.sum())
    return SuperdenseDistribution(p_singlet, p_phi01)


@dataclass(frozen=True)
class SuperdenseOutcome:
    first: str
    second: str | None
    transcript: Transcript


def superdense_round(session: SuperdenseSession, rng: np.random.Generator) -> SuperdenseOutcome:
    """Sample Bob's cascade: pair test, then the four-qubit test on triplet."""
    net = session.net
    transcript = session.transcript
    povm2 = invariants.povm2_singlet_triplet()
    with frames.sealed():
        hb = net.handle("Bob")
        first, desc = hb.measure_invariant(session.desc, povm2, ["pair:A", "pair:B"], rng)
        transcript.log("Bob", "pair test", first)
        second = None
        if first == "triplet" and session.resource is not ResourceLevel.NONE:
            povm4 = invariants.povm4_invariant()
            second, _ = hb.measure_invariant(
                desc, povm4, ["pair:A", "pair:B", "res:1", "res:2"], rng
            )
            transcript.log("Bob", "four-qubit test", second)
    transcript.verdict = second or first
    return SuperdenseOutcome(first, second, transcript)


def superdense_two_bit_probability(net: frames.Network, strategy=None) -> float:
    """Exact chance that Bob pins the low-probability message exactly."""
    strategy = dict(DEFAULT_STRATEGY if strategy is None else strategy)
    total = 0.0
    for op in ("X", "Y"):
        dist = superdense_exact(superdense_session(net, ResourceLevel.TWO_REFBITS, op))
        total += strategy.get(op, 0.0) * dist.p_phi01
    return total


def hiding_audit_superdense(net: frames.Network) -> dict[str, float]:
    """With no extra resource the pair test cannot separate X, Y and Z."""
    dists = []
    for op in ("X", "Y", "Z"):
        d = superdense_exact(superdense_session(net, ResourceLevel.NONE, op))
        dists.append(np.array([d.p_singlet, 1.0 - d.p_singlet]))
    worst = 0.0
    for i in range(len(dists)):
        for j in range(i + 1, len(dists)):
            worst = max(worst, 0.5 * float(np.sum(np.abs(dists[i] - dists[j]))))
    return {"pair_test_tv_across_xyz": worst}


# ---------------------------------------------------------------------------
# bit commitment


class CommitmentPhase(Enum):
    COMMITTED = "committed"
    OPENED = "opened"


_CASE1_SEND_13_PROBABILITY = 1.0 / 3.0


@dataclass
class CommitmentSession:
    net: frames.Network
    bit: int
    branch: tuple[int, int]  # which qubit slots went to Bob at commit time
    desc: frames.LocalDescription
    phase: CommitmentPhase
    transcript: Transcript
    cheated: bool = False
    cheat_gate: np.ndarray | None = None


_WIRES = ("q1", "q2", "q3", "q4", "anc")


def commit(net: frames.Network, bit: int, rng: np.random.Generator) -> CommitmentSession:
    """Alice prepares one of the two collectively invariant four-qubit states
    and ships two of its qubits to Bob; the committed bit fixes which state
    and, for bit one, a randomized choice of which two qubits travel."""
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    phi00, phi01 = invariants.phi_invariant_states()
    transcript = Transcript()
    if bit == 0:
        state, branch = phi00, (1, 3)
    else:
        state = phi01
        branch = (1, 3) if rng.random() < _CASE1_SEND_13_PROBABILITY else (1, 2)
    with frames.sealed():
        ha = net.handle("Alice")
        anc = qmath.ket("0")
        desc = ha.prepare(np.kron(state, anc), _WIRES)
        transcript.log("Alice", "prepare invariant state", f"bit={bit}")
        for slot in branch:
            desc = ha.send(desc, f"q{slot}", "Bob")
        transcript.log("Alice", "send commit qubits", f"slots {branch}")
    return CommitmentSession(net, bit, branch, desc, CommitmentPhase.COMMITTED, transcript)


def _branch_pair_distribution(net: frames.Network, bit: int, branch: tuple[int, int]) -> np.ndarray:
    """Exact singlet-test law on the pair Bob receives for one branch."""
    phi00, phi01 = invariants.phi_invariant_states()
    state = phi00 if bit == 0 else phi01
    with frames.sealed():
        ha = net.handle("Alice")
        desc = ha.prepare(np.kron(state, qmath.ket("0")), _WIRES)
        for slot in branch:
            desc = ha.send(desc, f"q{slot}", "Bob")
        hb = net.handle("Bob")
        povm = invariants.povm2_singlet_triplet()
        probs = hb.invariant_distribution(desc, povm, [f"q{s}" for s in branch])
    return probs / probs.sum()


def commitment_branches(bit: int) -> list[tuple[tuple[int, int], float]]:
    if bit == 0:
        return [((1, 3), 1.0)]
    return [((1, 3), _CASE1_SEND_13_PROBABILITY), ((1, 2), 1.0 - _CASE1_SEND_13_PROBABILITY)]


def bob_probe(session: CommitmentSession) -> dict[str, float]:
    """Bob's exact singlet-test law given only the committed bit, averaged
    over the honest wire-choice strategy for that bit."""
    if session.phase is not CommitmentPhase.COMMITTED:
        raise SessionStateError("the committed pair is gone after opening")
    mix = np.zeros(2)
    for branch, weight in commitment_branches(session.bit):
        mix += weight * _branch_pair_distribution(session.net, session.bit, branch)
    session.transcript.log("Bob", "probe pair", f"p(singlet)={mix[0]:.6f}")
    return {"singlet": float(mix[0]), "triplet": float(mix[1])}


def bob_received_density(net: frames.Network, bit: int) -> np.ndarray:
    """Bob's exact received two-qubit state for one committed bit, averaged
    over the honest wire-choice strategy."""
    phi00, phi01 = invariants.phi_invariant_states()
    state = phi00 if bit == 0 else phi01
    out = np.zeros((4, 4), dtype=complex)
    for branch, weight in commitment_branches(bit):
        with frames.sealed():
            ha = net.handle("Alice")
            desc = ha.prepare(np.kron(state, qmath.ket("0")), _WIRES)
            for slot in branch:
                desc = ha.send(desc, f"q{slot}", "Bob")
            keep = [desc.wire_index(f"q{s}") for s in branch]
            out += weight * qmath.partial_trace(qmath.density(desc.state), keep)
    return out


def _global_arrangements():
    """Raw commit-time states on (Bob1, Bob2, Alice1, Alice2, ancilla).

    The honest bit-one strategy purified onto the ancilla shares Bob's
    reduced state with the bit-zero state, which is what makes the
    sender-side cheat gate exist.
    """
    phi00, phi01 = invariants.phi_invariant_states()
    anc0, anc1 = qmath.ket("0"), qmath.ket("1")
    g0 = np.kron(qmath.permute_wires(phi00, [0, 2, 1, 3]), anc0)
    branch13 = np.kron(qmath.permute_wires(phi01, [0, 2, 1, 3]), anc0)
    branch12 = np.kron(phi01, anc1)
    p13 = _CASE1_SEND_13_PROBABILITY
    g1 = np.sqrt(p13) * branch13 + np.sqrt(1.0 - p13) * branch12
    return g0, g1


def cheat_unitary(session: CommitmentSession) -> np.ndarray:
    """Gate on Alice's two kept qubits plus the ancilla that converts her
    side of a bit-zero commitment into a purification of the honest bit-one
    strategy. Bob's half never moves, so nothing he can measure changes."""
    if session.bit != 0 or session.branch != (1, 3):
        raise ValueError("the cheat starts from a bit-zero commitment")
    if session.phase is not CommitmentPhase.COMMITTED:
        raise SessionStateError("cheating after opening is pointless")
    g0, g1 = _global_arrangements()
    m0 = g0.reshape(4, 8)
    m1 = g1.reshape(4, 8)
    # Bob's reduced state is maximally mixed for both, so the rows are
    # orthogonal with norm 1/2 and the map between them extends unitarily.
    a0 = 2.0 * m0
    a1 = 2.0 * m1
    def complete(rows: np.ndarray) -> np.ndarray:
        q = rows.conj().T  # 8 x 4, orthonormal columns
        residual = np.eye(8, dtype=complex) - q @ q.conj().T
        vals, vecs = np.linalg.eigh(residual)
        null = vecs[:, np.abs(vals) > 0.5]
        return np.hstack([q, null])
    w = complete(a1) @ complete(a0).conj().T
    qmath.check_unitary(w, atol=1e-10)
    with frames.sealed():
        ha = session.net.handle("Alice")
        session.desc = ha.apply(session.desc, w, ["q2", "q4", "anc"])
    session.cheated = True
    session.cheat_gate = w
    session.transcript.log("Alice", "apply cheat gate")
    return w


@dataclass(frozen=True)
class RevealResult:
    accept_probability: float
    accepted: bool
    announced_bit: int
    announced_branch: tuple[int, int]
    transcript: Transcript


def reveal_and_verify(
    session: CommitmentSession, claimed_bit: int, rng: np.random.Generator
) -> RevealResult:
    """Alice announces a bit and a wire story, ships the rest, and Bob
    projects all four qubits onto the announced invariant state."""
    if session.phase is not CommitmentPhase.COMMITTED:
        raise SessionStateError("the session is already opened")
    if claimed_bit not in (0, 1):
        raise ValueError("claimed bit must be 0 or 1")
    net = session.net
    transcript = session.transcript
    desc = session.desc
    with frames.sealed():
        ha = net.handle("Alice")
        if session.cheated and claimed_bit == 0:
            desc = ha.apply(desc, session.cheat_gate.conj().T, ["q2", "q4", "anc"])
            transcript.log("Alice", "undo cheat gate")
            branch = (1, 3)
        elif session.cheated and claimed_bit == 1:
            outcome, desc = ha.measure_computational(desc, "anc", rng)
            branch = (1, 3) if outcome == 0 else (1, 2)
            transcript.log("Alice", "read ancilla", str(outcome))
        elif claimed_bit == session.bit:
            branch = session.branch
        else:
            branch = (1, 3)  # a plain lie: announce the commonest story
        transcript.log("Alice", "announce", f"bit={claimed_bit}, slots={branch}")
        remaining = [s for s in (1, 2, 3, 4) if s not in session.branch]
        for slot in remaining:
            desc = ha.send(desc, f"q{slot}", "Bob")
        transcript.log("Alice", "send remaining qubits", f"slots {remaining}")

        # Bob slots his commit-time qubits into the announced positions and
        # the reveal-time qubits into the rest, then projects.
        phi00, phi01 = invariants.phi_invariant_states()
        reference = phi00 if claimed_bit == 0 else phi01
        slot_of = {}
        for label_slot, announced in zip(session.branch, branch):
            slot_of[label_slot] = announced
        announced_rest = [s for s in (1, 2, 3, 4) if s not in branch]
        for label_slot, announced in zip(remaining, announced_rest):
            slot_of[label_slot] = announced
        order = [slot_of[s] - 1 for s in (1, 2, 3, 4)]
        arranged = qmath.permute_wires(reference, order)
        positions = [desc.wire_index(f"q{s}") for s in (1, 2, 3, 4)]
        projector = qmath.embed(qmath.density(arranged), positions, desc.n)
        accept_probability = max(
            float(np.real(np.vdot(desc.state, projector @ desc.state))), 0.0
        )
        accepted = bool(rng.random() < accept_probability)
        transcript.log(
            "Bob", "verify announced state",
            "accept" if accepted else "reject", accept_probability,
        )
    session.phase = CommitmentPhase.OPENED
    session.desc = desc
    transcript.verdict = "accept" if accepted else "reject"
    return RevealResult(accept_probability, accepted, claimed_bit, branch, transcript)


def hiding_audit_commitment(net: frames.Network) -> dict[str, float]:
    """Bob's pre-opening view is independent of the committed bit: identical
    singlet-test law and identical received state, both exactly."""
    rng = np.random.default_rng(0)
    probes = []
    for bit in (0, 1):
        session = commit(net, bit, rng)
        p = bob_probe(session)
        probes.append(np.array([p["singlet"], p["triplet"]]))
    tv = 0.5 * float(np.sum(np.abs(probes[0] - probes[1])))
    rho0 = bob_received_density(net, 0)
    rho1 = bob_received_density(net, 1)
    return {
        "pair_test_tv": tv,
        "received_state_deviation": float(np.max(np.abs(rho0 - rho1))),
    }


# ---------------------------------------------------------------------------
# JSON-config runners (the protocol-facing external interface)


def run_datahiding(config: dict) -> dict:
    """Config keys: seed, trials, mode ('refbits' or 'forwarding'),
    networks (forwarding mode), refbit_config ('uniform'|'same'|'orthogonal')."""
    seed = int(config["seed"])
    trials = int(config.get("trials", 100000))
    mode = config.get("mode", "refbits")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if mode == "forwarding":
        networks = int(config.get("networks", 1000))
        worst = 0.0
        for i in range(networks):
            net = frames.build_network(seed + i, 3)
            for bit in ("+", "-"):
                dist = forwarding_exact_distribution(net, bit)
                p_correct = dist["singlet"] if bit == "-" else dist["triplet"]
                worst = max(worst, abs(1.0 - p_correct))
        return {
            "mode": mode,
            "networks": networks,
            "max_decode_error": worst,
        }
    net = frames.build_network(seed, 3)
    choice = config.get("refbit_config", "uniform")
    p_matched = refbit_joint_distribution(
        hide_bit(net, "+", "z01", RefbitConfig.SAME_STATE)
    )[("singlet", "singlet")]
    p_mismatched = refbit_joint_distribution(
        hide_bit(net, "-", "z01", RefbitConfig.SAME_STATE)
    )[("singlet", "singlet")]
    p_success = refbit_success_probability(net)
    # Monte Carlo over the protocol's own exact conditionals
    bits = rng.integers(0, 2, size=trials)  # 0 -> '+', 1 -> '-'
    if choice == "same":
        configs = np.zeros(trials, dtype=int)
    elif choice == "orthogonal":
        configs = np.ones(trials, dtype=int)
    else:
        configs = rng.integers(0, 2, size=trials)
    joint = {}
    for bit_idx, bit in enumerate(("+", "-")):
        for cfg_idx, cfg in enumerate((RefbitConfig.SAME_STATE, RefbitConfig.ORTHOGONAL)):
            j = refbit_joint_distribution(hide_bit(net, bit, "z01", cfg))
            joint[(bit_idx, cfg_idx)] = j[("singlet", "singlet")]
    draws = rng.random(trials)
    successes = 0
    for bit_idx in (0, 1):
        for cfg_idx in (0, 1):
            mask = (bits == bit_idx) & (configs == cfg_idx)
            decoded_idx = cfg_idx  # same-state names '+', orthogonal names '-'
            if decoded_idx == bit_idx:
                successes += int(np.sum(draws[mask] < joint[(bit_idx, cfg_idx)]))
    empirical = successes / trials
    sigma = float(np.sqrt(max(p_success * (1 - p_success), 1e-300) / trials))
    return {
        "mode": mode,
        "trials": trials,
        "p_both_singlet_matched": float(p_matched),
        "p_both_singlet_mismatched": float(p_mismatched),
        "p_success_exact": float(p_success),
        "p_success_empirical": float(empirical),
        "sigma": sigma,
        "hiding_audit": hiding_audit_datahiding(net),
    }


def run_superdense(config: dict) -> dict:
    """Config keys: seed, trials, strategy (op -> probability)."""
    seed = int(config["seed"])
    trials = int(config.get("trials", 100000))
    strategy = config.get("strategy", DEFAULT_STRATEGY)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    net = frames.build_network(seed, 2)
    exact = {}
    for resource in ResourceLevel:
        for op in OPERATIONS:
            d = superdense_exact(superdense_session(net, resource, op))
            exact[(resource.value, op)] = d
    p_two_bit = superdense_two_bit_probability(net, strategy)
    # Monte Carlo of the stated strategy at the token-qubit resource level
    ops = list(strategy)
    probs = np.array([strategy[o] for o in ops])
    chosen = rng.choice(len(ops), size=trials, p=probs / probs.sum())
    draws = rng.random(trials)
    hits = 0
    for idx, op in enumerate(ops):
        mask = chosen == idx
        if op in ("X", "Y"):
            p = exact[("refbits", op)].p_phi01
            hits += int(np.sum(draws[mask] < p))
    empirical = hits / trials
    sigma = float(np.sqrt(max(p_two_bit * (1 - p_two_bit), 1e-300) / trials))
    return {
        "trials": trials,
        "p_singlet_given_I_none": exact[("none", "I")].p_singlet,
        "p_phi01_given_X_pair": exact[("pair", "X")].p_phi01,
        "p_phi01_given_Y_pair": exact[("pair", "Y")].p_phi01,
        "p_phi01_given_Z_pair": exact[("pair", "Z")].p_phi01,
        "p_phi01_given_X_refbits": exact[("refbits", "X")].p_phi01,
        "p_phi01_given_Y_refbits": exact[("refbits", "Y")].p_phi01,
        "p_phi01_given_Z_refbits": exact[("refbits", "Z")].p_phi01,
        "p_two_bit_exact": float(p_two_bit),
        "p_two_bit_empirical": float(empirical),
        "sigma": sigma,
        "hiding_audit": hiding_audit_superdense(net),
    }


def run_commitment(config: dict) -> dict:
    """Config keys: seed, trials, cheat (bool)."""
    seed = int(config["seed"])
    trials = int(config.get("trials", 100000))
    cheat = bool(config.get("cheat", False))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    net = frames.build_network(seed, 2)
    p_case0 = _branch_pair_distribution(net, 0, (1, 3))[0]
    p_case1_13 = _branch_pair_distribution(net, 1, (1, 3))[0]
    p_case1_12 = _branch_pair_distribution(net, 1, (1, 2))[0]
    mixture = sum(
        w * _branch_pair_distribution(net, 1, b)[0] for b, w in commitment_branches(1)
    )
    out = {
        "trials": trials,
        "p_singlet_case0": float(p_case0),
        "p_singlet_case1_slots13": float(p_case1_13),
        "p_singlet_case1_slots12": float(p_case1_12),
        "p_singlet_case1_mixture": float(mixture),
        "hiding_audit": hiding_audit_commitment(net),
    }
    # Monte Carlo of Bob's probe under bit one
    branch_p = _CASE1_SEND_13_PROBABILITY
    branches = rng.random(trials) < branch_p
    draws = rng.random(trials)
    singlets = int(np.sum(draws[branches] < p_case1_13)) + int(
        np.sum(draws[~branches] < p_case1_12)
    )
    out["p_singlet_case1_empirical"] = singlets / trials
    out["sigma"] = float(np.sqrt(max(mixture * (1 - mixture), 1e-300) / trials))
    if cheat:
        session = commit(net, 0, rng)
        cheat_unitary(session)
        r1 = reveal_and_verify(session, 1, rng)
        session0 = commit(net, 0, rng)
        cheat_unitary(session0)
        r0 = reveal_and_verify(session0, 0, rng)
        honest1 = reveal_and_verify(commit(net, 1, rng), 1, rng)
        out["cheat_accept_bit1"] = r1.accept_probability
        out["cheat_accept_bit0"] = r0.accept_probability
        out["honest_accept_bit1"] = honest1.accept_probability
    return out
