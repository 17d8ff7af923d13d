import json

import numpy as np
import pytest

from gaugecomm import frames, gaugefield, qmath
from gaugecomm.gaugefield import GaugePath, LatticeGaugeTransform, PathSegment

from oracles import expm_series


def random_path(rng, segments, closed=True, charge=1.0):
    segs = [
        PathSegment(tuple(rng.normal(size=3)), float(rng.uniform(0.2, 0.8)), charge)
        for _ in range(segments)
    ]
    return GaugePath(tuple(segs), closed)


def random_lgt(rng, path):
    elems = [qmath.haar_random_su2(rng) for _ in range(len(path.segments))]
    elems.append(elems[0] if path.closed else qmath.haar_random_su2(rng))
    return LatticeGaugeTransform(tuple(elems))


class TestSegmentTransport:
    def test_zero_field_is_identity(self):
        seg = PathSegment((0.0, 0.0, 0.0), 1.0)
        assert np.max(np.abs(gaugefield.segment_transport(seg) - np.eye(2))) < 1e-12

    def test_z_field_closed_form(self):
        theta = 0.73
        seg = PathSegment((0.0, 0.0, theta), 1.0, 1.0)
        expected = expm_series(0.5j * theta * qmath.PAULI_Z)
        assert np.max(np.abs(gaugefield.segment_transport(seg) - expected)) < 1e-12

    def test_random_segment_matches_series_exponential(self, rng):
        for _ in range(30):
            seg = PathSegment(tuple(rng.normal(size=3)), float(rng.uniform(0.1, 2.0)), float(rng.uniform(0.5, 2.0)))
            generator = 0.5j * seg.charge * seg.length * (
                seg.coeffs[0] * qmath.PAULI_X
                + seg.coeffs[1] * qmath.PAULI_Y
                + seg.coeffs[2] * qmath.PAULI_Z
            )
            assert np.max(np.abs(gaugefield.segment_transport(seg) - expm_series(generator))) < 1e-12

    def test_invalid_segment_rejected(self):
        with pytest.raises(ValueError):
            PathSegment((0.0, 0.0, 1.0), -1.0)


class TestPathTransport:
    def test_zero_field_path(self):
        path = GaugePath(tuple(PathSegment((0, 0, 0), 1.0) for _ in range(4)), True)
        assert np.max(np.abs(gaugefield.path_transport(path) - np.eye(2))) < 1e-12

    def test_parallel_segments_commute(self):
        a = PathSegment((0, 0, 0.4), 1.0)
        b = PathSegment((0, 0, 1.1), 0.5)
        fwd = gaugefield.path_transport(GaugePath((a, b), False))
        rev = gaugefield.path_transport(GaugePath((b, a), False))
        assert np.max(np.abs(fwd - rev)) < 1e-12

    def test_ordering_matters_for_generic_segments(self, rng):
        a = PathSegment(tuple(rng.normal(size=3)), 0.7)
        b = PathSegment(tuple(rng.normal(size=3)), 0.7)
        fwd = gaugefield.path_transport(GaugePath((a, b), False))
        rev = gaugefield.path_transport(GaugePath((b, a), False))
        assert np.linalg.norm(fwd - rev) > 1e-6
        direct = gaugefield.segment_transport(b) @ gaugefield.segment_transport(a)
        assert np.max(np.abs(fwd - direct)) < 1e-12


class TestGaugeTransform:
    def test_identity_transform_is_no_op(self, rng):
        path = random_path(rng, 4)
        lgt = LatticeGaugeTransform(tuple(np.eye(2, dtype=complex) for _ in range(5)))
        result = gaugefield.gauge_transform(path, lgt)
        assert np.max(np.abs(result.composite - gaugefield.path_transport(path))) < 1e-12

    def test_closed_path_trace_never_moves(self, rng):
        for _ in range(100):
            path = random_path(rng, int(rng.integers(2, 7)))
            base = gaugefield.wilson_loop(path)
            result = gaugefield.gauge_transform(path, random_lgt(rng, path))
            assert abs(complex(np.trace(result.composite)) - base) < 1e-12

    def test_open_path_endpoint_conjugation(self, rng):
        path = random_path(rng, 3, closed=False)
        lgt = random_lgt(rng, path)
        result = gaugefield.gauge_transform(path, lgt)
        expected = lgt.elements[-1] @ gaugefield.path_transport(path) @ lgt.elements[0].conj().T
        assert np.max(np.abs(result.composite - expected)) < 1e-12

    def test_node_count_mismatch_rejected(self, rng):
        path = random_path(rng, 3)
        with pytest.raises(ValueError):
            gaugefield.gauge_transform(
                path, LatticeGaugeTransform(tuple(np.eye(2, dtype=complex) for _ in range(3)))
            )


class TestWilsonLoop:
    def test_zero_field_gives_two(self):
        path = GaugePath((PathSegment((0, 0, 0), 1.0), PathSegment((0, 0, 0), 1.0)), True)
        assert abs(gaugefield.wilson_loop(path) - 2.0) < 1e-12

    def test_cyclic_rotation_of_segments(self, rng):
        path = random_path(rng, 5)
        base = gaugefield.wilson_loop(path)
        rolled = GaugePath(path.segments[2:] + path.segments[:2], True)
        assert abs(gaugefield.wilson_loop(rolled) - base) < 1e-12

    def test_open_path_rejected(self, rng):
        with pytest.raises(ValueError):
            gaugefield.wilson_loop(random_path(rng, 3, closed=False))


class TestFirstOrderTransform:
    def test_zero_parameters_change_nothing(self, rng):
        path = random_path(rng, 4)
        moved = gaugefield.infinitesimal_gauge_delta(path, np.zeros((5, 3)))
        assert all(
            np.max(np.abs(np.asarray(a.coeffs) - np.asarray(b.coeffs))) < 1e-15
            for a, b in zip(path.segments, moved.segments)
        )

    def test_constant_parameters_on_zero_field(self):
        path = GaugePath(tuple(PathSegment((0, 0, 0), 0.5) for _ in range(4)), True)
        alpha = np.tile(np.array([0.3, -0.2, 0.9]), (5, 1))
        moved = gaugefield.infinitesimal_gauge_delta(path, alpha)
        assert all(np.max(np.abs(np.asarray(s.coeffs))) < 1e-15 for s in moved.segments)

    def test_loop_trace_moves_at_second_order(self, rng):
        for _ in range(5):
            path = random_path(rng, 6)
            base = gaugefield.wilson_loop(path)
            alpha = rng.normal(size=(path.node_count, 3))
            alpha[-1] = alpha[0]
            devs = []
            for eps in (1e-3, 5e-4):
                moved = gaugefield.infinitesimal_gauge_delta(path, eps * alpha)
                devs.append(abs(gaugefield.wilson_loop(moved) - base))
            assert abs(devs[0] / devs[1] - 4.0) < 0.5


class TestChannelBridge:
    def test_identity_channels_make_zero_field(self):
        net = frames.identity_network(2)
        path = gaugefield.channels_to_path(net, ["Alice", "Bob"])
        assert all(np.max(np.abs(np.asarray(s.coeffs))) < 1e-12 for s in path.segments)

    def test_transport_equals_loop_rotation(self, rng):
        for seed in (3, 4, 5):
            for count in (2, 3):
                net = frames.build_network(seed, count)
                cycle = [p.name for p in net.parties]
                path = gaugefield.channels_to_path(net, cycle, segments_per_hop=3)
                loop = frames.loop_holonomy(net, cycle + [cycle[0]]).value
                assert np.max(np.abs(gaugefield.path_transport(path) - loop)) < 1e-10

    def test_trace_matches_public_observable(self):
        net = frames.build_network(9, 2)
        path = gaugefield.channels_to_path(net, ["Alice", "Bob"])
        assert abs(gaugefield.wilson_loop(path) - frames.wilson_trace(net, ["Alice", "Bob"]).value) < 1e-10

    def test_segment_count_does_not_matter(self):
        net = frames.build_network(9, 3)
        cycle = ["Alice", "Bob", "Charlie"]
        t1 = gaugefield.path_transport(gaugefield.channels_to_path(net, cycle, 1))
        t8 = gaugefield.path_transport(gaugefield.channels_to_path(net, cycle, 8))
        assert np.max(np.abs(t1 - t8)) < 1e-10


def test_path_json_roundtrip(rng):
    path = random_path(rng, 4)
    loaded = gaugefield.path_from_json(gaugefield.path_to_json(path))
    assert loaded.closed == path.closed
    for a, b in zip(path.segments, loaded.segments):
        assert a.coeffs == b.coeffs and a.length == b.length and a.charge == b.charge


def test_json_document_shape(rng):
    doc = json.loads(gaugefield.path_to_json(random_path(rng, 2)))
    assert set(doc) == {"closed", "segments"}
    assert set(doc["segments"][0]) == {"A", "ds", "q"}
