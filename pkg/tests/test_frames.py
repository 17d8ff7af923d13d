import json

import numpy as np
import pytest

from gaugecomm import frames, qmath
from gaugecomm.frames import FrameRestriction, ObservableKind, ProtocolViolationError

from oracles import random_state

SINGLET = (qmath.ket("01") - qmath.ket("10")) / np.sqrt(2)


@pytest.fixture
def net():
    return frames.build_network(7, 3)


class TestBuildNetwork:
    def test_same_seed_reproduces_everything(self):
        a = frames.build_network(11, 3)
        b = frames.build_network(11, 3)
        assert all(np.array_equal(x, y) for x, y in zip(a.frames_internal, b.frames_internal))
        assert all(
            np.array_equal(a.channels_internal[k], b.channels_internal[k])
            for k in a.channels_internal
        )

    def test_opposite_directions_are_independent(self, net):
        v_ab = net.channel("Alice", "Bob")
        v_ba = net.channel("Bob", "Alice")
        assert np.max(np.abs(v_ab - v_ba)) > 1e-3
        assert abs(np.trace(v_ab @ v_ba.conj().T) - 2.0) > 1e-3

    def test_reciprocal_option_ties_directions(self):
        net = frames.build_network(5, 2, reciprocal=True)
        v_ab = net.channel("Alice", "Bob")
        v_ba = net.channel("Bob", "Alice")
        assert np.max(np.abs(v_ab - v_ba.conj().T)) < 1e-12
        hol = frames.loop_holonomy(net, ["Alice", "Bob", "Alice"]).value
        assert np.max(np.abs(hol - np.eye(2))) < 1e-12

    def test_z_restriction_constrains_relative_frames(self):
        net = frames.build_network(5, 3, FrameRestriction.Z_ROTATION_ONLY)
        for k in range(3):
            for l in range(3):
                r = frames.relative_frame(net, k, l)
                assert np.max(np.abs(r @ qmath.PAULI_Z - qmath.PAULI_Z @ r)) < 1e-12

    def test_too_few_parties_rejected(self):
        with pytest.raises(ValueError):
            frames.build_network(1, 1)


class TestRelativeFrames:
    def test_self_relation_is_identity(self, net):
        assert np.max(np.abs(frames.relative_frame(net, 0, 0) - np.eye(2))) < 1e-12

    def test_composition_and_inverse(self, net):
        r = frames.relative_frame
        for k in range(3):
            for l in range(3):
                assert np.max(np.abs(r(net, k, l).conj().T - r(net, l, k))) < 1e-12
                for m in range(3):
                    assert np.max(np.abs(r(net, k, l) @ r(net, l, m) - r(net, k, m))) < 1e-12

    def test_unknown_party_rejected(self, net):
        with pytest.raises(ValueError):
            frames.relative_frame(net, "Alice", "Zelda")


class TestTransmit:
    def test_trivial_network_is_transparent(self, rng):
        net = frames.identity_network(2)
        psi = random_state(rng, 1)
        desc = net.handle("Alice").prepare(psi, ("w",))
        out = frames.transmit(net, "Alice", "Bob", desc, "w")
        assert np.max(np.abs(out.state - psi)) < 1e-12

    def test_transmitted_singlet_half_matches_dressed_form(self, net):
        desc = net.handle("Alice").prepare(SINGLET, ("keep", "go"))
        out = frames.transmit(net, "Alice", "Bob", desc, "go")
        physical = frames.lift_to_fiducial(net, out)
        target = np.kron(np.eye(2), net.channel("Bob", "Alice")) @ SINGLET
        assert abs(np.vdot(physical, target)) > 1.0 - 1e-12

    def test_round_trip_net_map_is_the_loop_rotation(self, net, rng):
        psi = random_state(rng, 1)
        ha, hb = net.handle("Alice"), net.handle("Bob")
        desc = ha.prepare(psi, ("w",))
        desc = ha.send(desc, "w", "Bob")
        desc = hb.send(desc, "w", "Alice")
        loop = frames.loop_holonomy(net, ["Alice", "Bob", "Alice"]).value
        assert np.max(np.abs(desc.state - loop @ psi)) < 1e-12

    def test_owner_mismatch_raises(self, net, rng):
        desc = net.handle("Alice").prepare(random_state(rng, 1), ("w",))
        with pytest.raises(ProtocolViolationError):
            frames.transmit(net, "Bob", "Charlie", desc, "w")

    def test_global_physical_state_is_preserved(self, net, rng):
        psi = random_state(rng, 2)
        desc = net.handle("Alice").prepare(psi, ("a", "b"))
        out = frames.transmit(net, "Alice", "Bob", desc, "b")
        expected = qmath.apply_to_wires(
            frames.lift_to_fiducial(net, desc), net.channel("Bob", "Alice"), [1]
        )
        assert abs(np.vdot(expected, frames.lift_to_fiducial(net, out))) > 1.0 - 1e-12


class TestApplyLocal:
    def test_identity_no_op(self, net, rng):
        desc = net.handle("Bob").prepare(random_state(rng, 2), ("a", "b"))
        out = frames.apply_local(desc, np.eye(2, dtype=complex), ["a"])
        assert np.array_equal(out.state, desc.state)

    def test_x_flips_in_owner_basis(self, net):
        desc = net.handle("Bob").prepare(qmath.ket("0"), ("a",))
        out = frames.apply_local(desc, qmath.PAULI_X, ["a"])
        assert np.max(np.abs(out.state - qmath.ket("1"))) < 1e-12

    def test_unitary_then_inverse_restores(self, net, rng):
        desc = net.handle("Bob").prepare(random_state(rng, 1), ("a",))
        u = qmath.haar_random_su2(rng)
        out = frames.apply_local(frames.apply_local(desc, u, ["a"]), u.conj().T, ["a"])
        assert np.max(np.abs(out.state - desc.state)) < 1e-12

    def test_non_unitary_rejected(self, net, rng):
        desc = net.handle("Bob").prepare(random_state(rng, 1), ("a",))
        with pytest.raises(ValueError):
            frames.apply_local(desc, np.array([[1, 1], [0, 1]], dtype=complex), ["a"])


class TestProbeObservables:
    def test_trivial_network_diagonal_probe(self):
        net = frames.identity_network(2)
        psi = qmath.ket("0")
        value = frames.observable_g1(net, "Alice", "Bob", psi, psi).value
        assert abs(value - 1.0) < 1e-12

    def test_one_hop_probe_matches_ground_truth_product(self, net, rng):
        phi, psi = random_state(rng, 1), random_state(rng, 1)
        matrix = (
            net.frame("Bob").conj().T
            @ net.channel("Bob", "Alice")
            @ net.frame("Alice")
        )
        value = frames.observable_g1(net, "Alice", "Bob", phi, psi).value
        assert abs(value - np.vdot(phi, matrix @ psi)) < 1e-12

    def test_round_trip_probe_with_identity_reduces_to_loop(self, net, rng):
        phi, psi = random_state(rng, 1), random_state(rng, 1)
        value = frames.observable_g2(net, "Alice", "Bob", np.eye(2, dtype=complex), phi, psi).value
        loop = frames.loop_holonomy(net, ["Alice", "Bob", "Alice"]).value
        assert abs(value - np.vdot(phi, loop @ psi)) < 1e-12

    def test_probe_covariance_under_frame_changes(self, net, rng):
        # tomographing the one-hop matrix after frame changes at both ends
        # conjugates it by the two rotations
        rot_a, rot_b = qmath.haar_random_su2(rng), qmath.haar_random_su2(rng)
        changed = frames.apply_frame_change(
            frames.apply_frame_change(net, "Alice", rot_a), "Bob", rot_b
        )
        basis = [qmath.ket("0"), qmath.ket("1")]
        original = np.array(
            [
                [frames.observable_g1(net, "Alice", "Bob", r, c).value for c in basis]
                for r in basis
            ]
        )
        transformed = np.array(
            [
                [frames.observable_g1(changed, "Alice", "Bob", r, c).value for c in basis]
                for r in basis
            ]
        )
        assert np.max(np.abs(transformed - rot_b.conj().T @ original @ rot_a)) < 1e-12

    def test_round_trip_probe_covariance(self, net, rng):
        rot = qmath.haar_random_su2(rng)
        u_b = qmath.haar_random_su2(rng)
        changed = frames.apply_frame_change(net, "Alice", rot)
        basis = [qmath.ket("0"), qmath.ket("1")]
        original = np.array(
            [[frames.observable_g2(net, "Alice", "Bob", u_b, r, c).value for c in basis] for r in basis]
        )
        transformed = np.array(
            [[frames.observable_g2(changed, "Alice", "Bob", u_b, r, c).value for c in basis] for r in basis]
        )
        assert np.max(np.abs(transformed - rot.conj().T @ original @ rot)) < 1e-12


class TestLoops:
    def test_two_hop_loop_matches_product(self, net):
        hol = frames.loop_holonomy(net, ["Alice", "Bob", "Charlie", "Alice"]).value
        f = net.frame("Alice")
        product = (
            net.channel("Alice", "Charlie")
            @ net.channel("Charlie", "Bob")
            @ net.channel("Bob", "Alice")
        )
        assert np.max(np.abs(hol - f.conj().T @ product @ f)) < 1e-12

    def test_open_route_rejected(self, net):
        with pytest.raises(ValueError):
            frames.loop_holonomy(net, ["Alice", "Bob"])

    def test_trace_is_cyclic(self, net):
        w1 = frames.wilson_trace(net, ["Alice", "Bob"]).value
        w2 = frames.wilson_trace(net, ["Bob", "Alice"]).value
        assert abs(w1 - w2) < 1e-12

    def test_loop_invariant_under_other_frames(self, net, rng):
        base = frames.loop_holonomy(net, ["Alice", "Bob", "Charlie", "Alice"]).value
        changed = frames.apply_frame_change(net, "Bob", qmath.haar_random_su2(rng))
        after = frames.loop_holonomy(changed, ["Alice", "Bob", "Charlie", "Alice"]).value
        assert np.max(np.abs(base - after)) < 1e-12

    def test_loop_conjugates_under_own_frame_change(self, net, rng):
        rot = qmath.haar_random_su2(rng)
        base = frames.loop_holonomy(net, ["Alice", "Bob", "Alice"]).value
        after = frames.loop_holonomy(
            frames.apply_frame_change(net, "Alice", rot), ["Alice", "Bob", "Alice"]
        ).value
        assert np.max(np.abs(after - rot.conj().T @ base @ rot)) < 1e-12
        assert abs(np.trace(after) - np.trace(base)) < 1e-12

    def test_wilson_trace_invariant_under_all_changes(self, net, rng):
        base = frames.wilson_trace(net, ["Alice", "Bob", "Charlie"]).value
        for _ in range(100):
            party = int(rng.integers(0, 3))
            changed = frames.apply_frame_change(net, party, qmath.haar_random_su2(rng))
            assert abs(frames.wilson_trace(changed, ["Alice", "Bob", "Charlie"]).value - base) < 1e-12


class TestFrameChangeEquivalence:
    def test_identity_change_keeps_network(self, net):
        changed = frames.apply_frame_change(net, "Bob", np.eye(2, dtype=complex))
        assert all(
            np.max(np.abs(a - b)) < 1e-15
            for a, b in zip(net.frames_internal, changed.frames_internal)
        )

    def test_channel_view_agrees_on_every_observable(self, net, rng):
        rot = qmath.haar_random_su2(rng)
        for party in ("Alice", "Bob", "Charlie"):
            by_frame = frames.apply_frame_change(net, party, rot)
            by_channel = frames.frame_change_channel_view(net, party, rot)
            phi, psi = random_state(rng, 1), random_state(rng, 1)
            g1_f = frames.observable_g1(by_frame, "Alice", "Bob", phi, psi).value
            g1_c = frames.observable_g1(by_channel, "Alice", "Bob", phi, psi).value
            assert abs(g1_f - g1_c) < 1e-12
            u_b = qmath.haar_random_su2(rng)
            g2_f = frames.observable_g2(by_frame, "Alice", "Bob", u_b, phi, psi).value
            g2_c = frames.observable_g2(by_channel, "Alice", "Bob", u_b, phi, psi).value
            assert abs(g2_f - g2_c) < 1e-12
            hol_f = frames.loop_holonomy(by_frame, ["Alice", "Bob", "Charlie", "Alice"]).value
            hol_c = frames.loop_holonomy(by_channel, ["Alice", "Bob", "Charlie", "Alice"]).value
            assert np.max(np.abs(hol_f - hol_c)) < 1e-12
            w_f = frames.wilson_trace(by_frame, ["Alice", "Bob", "Charlie"]).value
            w_c = frames.wilson_trace(by_channel, ["Alice", "Bob", "Charlie"]).value
            assert abs(w_f - w_c) < 1e-12

    def test_restriction_violation_rejected(self, rng):
        net = frames.build_network(5, 2, FrameRestriction.Z_ROTATION_ONLY)
        with pytest.raises(ValueError):
            frames.apply_frame_change(net, "Alice", qmath.su2_from_axis_angle((1.0, 0, 0), 0.3))
        ok = frames.apply_frame_change(net, "Alice", qmath.su2_from_axis_angle((0, 0, 1.0), 0.3))
        assert isinstance(ok, frames.Network)


class TestKnowledgeGate:
    def test_public_trace_known_to_everyone(self, net):
        w = frames.wilson_trace(net, ["Alice", "Bob"])
        assert all(frames.is_known_to(net, p, w) for p in ("Alice", "Bob", "Charlie"))

    def test_private_loop_known_only_to_owner(self, net):
        hol = frames.loop_holonomy(net, ["Alice", "Bob", "Alice"])
        assert frames.is_known_to(net, "Alice", hol)
        assert not frames.is_known_to(net, "Bob", hol)

    def test_sealed_mode_refuses_ground_truth(self, net):
        with frames.sealed():
            with pytest.raises(ProtocolViolationError):
                frames.relative_frame(net, 0, 1)
            with pytest.raises(ProtocolViolationError):
                net.frame("Alice")
            with pytest.raises(ProtocolViolationError):
                net.channel("Alice", "Bob")
            with pytest.raises(ProtocolViolationError):
                frames.loop_holonomy(net, ["Alice", "Bob", "Alice"])

    def test_sealed_mode_allows_party_capabilities(self, net, rng):
        with frames.sealed():
            ha = net.handle("Alice")
            desc = ha.prepare(SINGLET, ("a", "b"))
            desc = ha.send(desc, "b", "Bob")
            assert ha.loop_holonomy(["Alice", "Bob", "Alice"]).shape == (2, 2)
            assert isinstance(ha.wilson_trace(["Alice", "Bob"]), complex)

    def test_handles_only_measure_own_loops(self, net):
        with frames.sealed():
            with pytest.raises(ProtocolViolationError):
                net.handle("Bob").loop_holonomy(["Alice", "Bob", "Alice"])


class TestHandleMeasurements:
    def test_computational_measurement_statistics(self, net):
        rng = np.random.default_rng(0)
        ha = net.handle("Alice")
        plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
        counts = [0, 0]
        for _ in range(400):
            desc = ha.prepare(plus, ("w",))
            bit, _ = ha.measure_computational(desc, "w", rng)
            counts[bit] += 1
        assert abs(counts[0] / 400 - 0.5) < 0.1

    def test_cross_owner_gate_matches_physical_action(self, net, rng):
        # Bob applying a gate to a description Alice owns must move the
        # underlying physical state exactly as his physical gate would.
        psi = random_state(rng, 2)
        ha, hb = net.handle("Alice"), net.handle("Bob")
        desc = ha.prepare(psi, ("a", "b"))
        gate = qmath.haar_random_su2(rng)
        moved = hb.apply(desc, gate, ["b"])
        physical_gate = net.frame("Bob") @ gate @ net.frame("Bob").conj().T
        expected = qmath.apply_to_wires(frames.lift_to_fiducial(net, desc), physical_gate, [1])
        assert abs(np.vdot(expected, frames.lift_to_fiducial(net, moved))) > 1.0 - 1e-12


class TestSerialization:
    def test_roundtrip_is_exact(self, net):
        text = frames.network_to_json(net)
        loaded = frames.network_from_json(text)
        assert all(
            np.array_equal(a, b)
            for a, b in zip(net.frames_internal, loaded.frames_internal)
        )
        assert all(
            np.array_equal(net.channels_internal[k], loaded.channels_internal[k])
            for k in net.channels_internal
        )

    def test_seed_only_document_rebuilds(self, net):
        doc = json.loads(frames.network_to_json(net))
        doc.pop("frames")
        loaded = frames.network_from_json(json.dumps(doc))
        assert all(
            np.array_equal(a, b)
            for a, b in zip(net.frames_internal, loaded.frames_internal)
        )

    def test_modified_network_survives_roundtrip(self, net, rng):
        changed = frames.apply_frame_change(net, "Bob", qmath.haar_random_su2(rng))
        loaded = frames.network_from_json(frames.network_to_json(changed))
        assert all(
            np.array_equal(a, b)
            for a, b in zip(changed.frames_internal, loaded.frames_internal)
        )


def test_observable_kinds_are_stamped(net):
    g1 = frames.observable_g1(net, "Alice", "Bob", qmath.ket("0"), qmath.ket("0"))
    assert g1.kind is ObservableKind.PRIVATE_FRAME_DEPENDENT
    assert g1.owner == net.party("Bob")
    hol = frames.loop_holonomy(net, ["Alice", "Bob", "Alice"])
    assert hol.kind is ObservableKind.PRIVATE_FRAME_INDEPENDENT
    wil = frames.wilson_trace(net, ["Alice", "Bob"])
    assert wil.kind is ObservableKind.PUBLIC_FRAME_INDEPENDENT
    assert wil.owner is None
