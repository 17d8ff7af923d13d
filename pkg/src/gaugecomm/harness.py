"""Command-line harness: build worlds from seeds, run observable and
invariance suites and the three protocols, and emit machine-readable
reports with exact values, empirical frequencies and pass/fail flags.

Every run is deterministic in its seed; Monte Carlo is layered over the
exact per-branch laws and is never the source of a reported exact value.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import frames, gaugefield, invariants, protocols, qmath, resources


@dataclass(frozen=True)
class Quantity:
    """One checked number: exact value, optional sampled frequency, and the
    tolerance it must meet. ``origin`` records how the expectation is known:
    a closed-form constant, an identity that must hold to round-off, or a
    value derived from an independent computation."""

    name: str
    origin: str  # "closed-form" | "identity" | "derived"
    expected: float
    value: float
    tolerance: float
    empirical: float | None = None
    trials: int | None = None
    sigma: float | None = None

    @property
    def passed(self) -> bool:
        if abs(self.value - self.expected) > self.tolerance:
            return False
        if self.empirical is not None and self.sigma is not None:
            return abs(self.empirical - self.expected) <= max(3.0 * self.sigma, 1e-12)
        return True


@dataclass
class Report:
    command: str
    config: dict
    quantities: list[Quantity] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(q.passed for q in self.quantities)

    def add(self, *args, **kwargs):
        self.quantities.append(Quantity(*args, **kwargs))

    def to_jsonable(self, timestamp: bool = True) -> dict:
        doc = {
            "command": self.command,
            "config": self.config,
            "quantities": [
                {
                    "name": q.name,
                    "origin": q.origin,
                    "expected": q.expected,
                    "value": q.value,
                    "tolerance": q.tolerance,
                    "empirical": q.empirical,
                    "trials": q.trials,
                    "sigma": q.sigma,
                    "pass": q.passed,
                }
                for q in self.quantities
            ],
            "extra": self.extra,
            "all_pass": self.all_pass,
        }
        if timestamp:
            doc["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        return doc


def report_write(report: Report, path: str, fmt: str = "json", timestamp: bool = True) -> None:
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(report.to_jsonable(timestamp), fh, indent=2)
            fh.write("\n")
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["quantity", "exact", "empirical", "sigma", "pass"])
            for q in report.quantities:
                writer.writerow([q.name, q.value, q.empirical, q.sigma, q.passed])
    else:
        raise ValueError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# subcommand implementations


def run_observables(args) -> Report:
    report = Report("observables", _config_of(args))
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    restriction = _restriction(args.restriction)
    worst_algebra = 0.0
    worst_probe = 0.0
    worst_equivalence = 0.0
    worst_transmit = 0.0
    for i in range(args.networks):
        net = frames.build_network(args.seed + i, args.parties, restriction)
        n = len(net.parties)
        for k in range(n):
            for l in range(n):
                for m in range(n):
                    r = frames.relative_frame
                    worst_algebra = max(
                        worst_algebra,
                        float(np.max(np.abs(r(net, k, l) @ r(net, l, m) - r(net, k, m)))),
                    )
        # one-hop probe equals transmit-based reconstruction
        phi = qmath.haar_random_su2(rng)[:, 0]
        psi = qmath.haar_random_su2(rng)[:, 0]
        probe = frames.observable_g1(net, 0, 1, phi, psi).value
        with frames.sealed():
            h = net.handle(0)
            desc = h.prepare(psi, ("probe",))
            desc = h.send(desc, "probe", 1)
        worst_probe = max(worst_probe, abs(probe - complex(np.vdot(phi, desc.state))))
        # frame change vs channel-side view on a round-trip probe
        rot = qmath.haar_random_su2(rng)
        u_b = qmath.haar_random_su2(rng)
        tf = frames.apply_frame_change(net, 0, rot)
        tc = frames.frame_change_channel_view(net, 0, rot)
        gf = frames.observable_g2(tf, 0, 1, u_b, phi, psi).value
        gc = frames.observable_g2(tc, 0, 1, u_b, phi, psi).value
        worst_equivalence = max(worst_equivalence, abs(gf - gc))
        # transmitting must leave the underlying physical state alone except
        # for the channel on the moved wire
        state = qmath.haar_random_su2(rng) @ qmath.ket("0")
        with frames.sealed():
            h = net.handle(0)
            desc0 = h.prepare(np.kron(state, qmath.ket("0")), ("a", "b"))
            desc1 = h.send(desc0, "a", 1)
        before = frames.lift_to_fiducial(net, desc0)
        before = qmath.apply_to_wires(before, net.channel(1, 0), [0])
        after = frames.lift_to_fiducial(net, desc1)
        worst_transmit = max(worst_transmit, 1.0 - abs(np.vdot(before, after)))
    report.add("relative_frame_composition_residual", "identity", 0.0, worst_algebra, 1e-12)
    report.add("one_hop_probe_vs_transmit_residual", "derived", 0.0, worst_probe, 1e-12)
    report.add("frame_change_vs_channel_view_residual", "derived", 0.0, worst_equivalence, 1e-12)
    report.add("transmit_physical_consistency_residual", "identity", 0.0, worst_transmit, 1e-12)
    return report


def run_wilson(args) -> Report:
    report = Report("wilson", _config_of(args))
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    for length in range(2, 9):
        net = frames.build_network(args.seed + length, length)
        cycle = [p.name for p in net.parties]
        base = frames.wilson_trace(net, cycle).value
        worst_frame = 0.0
        for _ in range(args.cycles):
            party = int(rng.integers(0, length))
            changed = frames.apply_frame_change(net, party, qmath.haar_random_su2(rng))
            worst_frame = max(
                worst_frame, abs(frames.wilson_trace(changed, cycle).value - base)
            )
        path = gaugefield.channels_to_path(net, cycle, segments_per_hop=2)
        loop = gaugefield.wilson_loop(path)
        worst_lgt = abs(loop - base)
        for _ in range(args.cycles):
            elems = [qmath.haar_random_su2(rng) for _ in range(len(path.segments))]
            elems.append(elems[0])
            transformed = gaugefield.gauge_transform(
                path, gaugefield.LatticeGaugeTransform(tuple(elems))
            )
            worst_lgt = max(worst_lgt, abs(complex(np.trace(transformed.composite)) - base))
        report.add(
            f"wilson_frame_change_residual_len{length}", "identity", 0.0, worst_frame, 1e-12
        )
        report.add(
            f"wilson_lattice_transform_residual_len{length}", "identity", 0.0, worst_lgt, 1e-12
        )
    # second-order scaling of the first-order field transform
    segs = [gaugefield.PathSegment(tuple(rng.normal(size=3)), 0.5) for _ in range(6)]
    path = gaugefield.GaugePath(tuple(segs), closed=True)
    base = gaugefield.wilson_loop(path)
    alpha = rng.normal(size=(path.node_count, 3))
    alpha[-1] = alpha[0]
    devs = []
    for eps in (1e-3, 5e-4):
        moved = gaugefield.infinitesimal_gauge_delta(path, eps * alpha)
        devs.append(abs(gaugefield.wilson_loop(moved) - base))
    ratio = devs[0] / devs[1]
    report.add("gauge_delta_second_order_ratio", "derived", 4.0, ratio, 0.5)
    return report


def run_povm(args) -> Report:
    report = Report("povm", _config_of(args))
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    povms = {
        2: invariants.povm2_singlet_triplet(),
        3: invariants.povm3(),
        4: invariants.povm4_invariant(),
    }
    for n, povm in povms.items():
        total = sum(povm.elements)
        completeness = float(np.max(np.abs(total - np.eye(2**n))))
        positivity = -min(
            float(np.min(np.linalg.eigvalsh(e))) for e in povm.elements
        )
        worst_comm = 0.0
        worst_stats = 0.0
        for _ in range(args.draws):
            u = qmath.haar_random_su2(rng)
            coll = qmath.kron_chain([u] * n)
            psi = coll @ _random_state(rng, n)
            for e in povm.elements:
                worst_comm = max(worst_comm, float(np.max(np.abs(e @ coll - coll @ e))))
            base = _random_state(rng, n)
            worst_stats = max(
                worst_stats,
                float(np.max(np.abs(povm.distribution(coll @ base) - povm.distribution(base)))),
            )
        report.add(f"povm{n}_completeness", "identity", 0.0, completeness, 1e-12)
        report.add(f"povm{n}_positivity_floor", "identity", 0.0, max(positivity, 0.0), 1e-10)
        report.add(f"povm{n}_collective_commutator", "identity", 0.0, worst_comm, 1e-12)
        report.add(f"povm{n}_statistics_invariance", "identity", 0.0, worst_stats, 1e-12)
    # relabeling coefficients of the two invariant four-qubit states
    bell = invariants.bell_basis()
    phi00, phi01 = invariants.phi_invariant_states()
    expected = {
        "phi00": np.array([1.0, 1.0, -1.0, -1.0]) / 2.0,
        "phi01": np.array([-3.0, 1.0, -1.0, -1.0]) / np.sqrt(12.0),
    }
    for name, phi in (("phi00", phi00), ("phi01", phi01)):
        swapped = qmath.permute_wires(phi, [0, 2, 1, 3])
        coeffs = np.array(
            [
                np.vdot(np.kron(bell.state(j), bell.state(j)), swapped)
                for j in ("0", "y", "z", "x")
            ]
        )
        dev = float(np.max(np.abs(coeffs - expected[name])))
        report.add(f"relabel_{name}_coefficients", "derived", 0.0, dev, 1e-12)
    # derived spin-1 generators
    tx, ty, tz = invariants.j1_generators()
    tx_ref, ty_ref, tz_ref = invariants._printed_j1_reference()
    algebra = float(np.max(np.abs(tx @ ty - ty @ tx - 1j * tz)))
    report.add("j1_algebra_residual", "derived", 0.0, algebra, 1e-12)
    report.add("j1_tx_reference_residual", "derived", 0.0, float(np.max(np.abs(tx - tx_ref))), 1e-12)
    report.add("j1_tz_reference_residual", "derived", 0.0, float(np.max(np.abs(tz - tz_ref))), 1e-12)
    # the derived y generator comes out opposite in sign to the reference
    sign = float(np.real(np.vdot(ty.ravel(), ty_ref.ravel())) / np.vdot(ty_ref.ravel(), ty_ref.ravel()).real)
    report.add("j1_ty_reference_sign", "derived", -1.0, sign, 1e-12)
    report.extra["j1_ty_comparison"] = (
        "derived y generator equals minus the quoted closed form; "
        "the derived set satisfies [tx, ty] = +i tz"
    )
    return report


def run_resources(args) -> Report:
    report = Report("resources", _config_of(args))
    worst_convert = 0.0
    for i in range(args.networks):
        net = frames.build_network(args.seed + i, 2)
        spec = resources.make_ebit(net, "Alice", "Bob")
        converted = resources.convert_ebit(net, spec, "Bob")
        phys = frames.lift_to_fiducial(net, converted.desc)
        target = resources.reversed_ebit_target_state(net, "Alice", "Bob")
        worst_convert = max(worst_convert, 1.0 - abs(np.vdot(phys, target)))
    report.add("ebit_conversion_infidelity", "derived", 0.0, worst_convert, 1e-12)

    holders = ("Alice", "Bob", "Charlie")
    net = frames.build_network(args.seed, 3)
    s45 = resources.ghz_target_state(net, *holders, "first-flipped")
    s46 = resources.ghz_target_state(net, *holders, "ends-flipped")
    verdict = resources.lu_equivalence(s45, s46, (1, 1, 1), restarts=args.restarts, seed=args.seed)
    report.add("ghz_repair_pair_fidelity", "derived", 1.0, verdict.max_fidelity, 1e-6)

    pairs = []
    for i in range(args.networks):
        neti = frames.build_network(args.seed + 1000 + i, 3)
        c44 = resources.canonical_description(
            neti, holders, resources.ghz_target_state(neti, *holders, "standard")
        )
        c45 = resources.canonical_description(
            neti, holders, resources.ghz_target_state(neti, *holders, "first-flipped")
        )
        pairs.append((c44, c45))
    uniform = resources.lu_equivalence_uniform(
        pairs, (1, 1, 1), restarts=args.restarts, seed=args.seed + 1
    )
    report.add(
        "ghz_class_uniform_strategy_fidelity_below",
        "derived",
        0.0,
        max(uniform.max_fidelity - 0.999, 0.0),
        0.0,
    )
    report.extra["ghz_class_uniform_strategy_fidelity"] = uniform.max_fidelity
    return report


def run_datahiding(args) -> Report:
    report = Report("datahiding", _config_of(args))
    if args.refbits:
        result = protocols.run_datahiding({"seed": args.seed, "trials": args.trials})
        report.add(
            "p_both_singlet_matched", "closed-form", 0.125,
            result["p_both_singlet_matched"], 1e-12,
        )
        report.add(
            "p_both_singlet_mismatched", "closed-form", 0.0,
            result["p_both_singlet_mismatched"], 1e-12,
        )
        report.add(
            "p_success_uniform", "closed-form", 1.0 / 16.0,
            result["p_success_exact"], 1e-12,
            empirical=result["p_success_empirical"],
            trials=result["trials"], sigma=result["sigma"],
        )
        worst = max(result["hiding_audit"].values())
        report.add("hiding_total_variation", "identity", 0.0, worst, 1e-12)
    else:
        result = protocols.run_datahiding(
            {"seed": args.seed, "mode": "forwarding", "networks": args.networks}
        )
        report.add(
            "forwarding_decode_error", "closed-form", 0.0,
            result["max_decode_error"], 1e-10,
        )
    report.extra["runner"] = result
    return report


def run_superdense(args) -> Report:
    report = Report("superdense", _config_of(args))
    result = protocols.run_superdense({"seed": args.seed, "trials": args.trials})
    third, sixth = 1.0 / 3.0, 1.0 / 6.0
    report.add("p_singlet_given_I_none", "closed-form", 1.0, result["p_singlet_given_I_none"], 1e-12)
    report.add("p_phi01_given_X_pair", "closed-form", third, result["p_phi01_given_X_pair"], 1e-12)
    report.add("p_phi01_given_Y_pair", "closed-form", 0.0, result["p_phi01_given_Y_pair"], 1e-12)
    report.add("p_phi01_given_Z_pair", "closed-form", 0.0, result["p_phi01_given_Z_pair"], 1e-12)
    report.add("p_phi01_given_X_refbits", "closed-form", sixth, result["p_phi01_given_X_refbits"], 1e-12)
    report.add("p_phi01_given_Y_refbits", "closed-form", sixth, result["p_phi01_given_Y_refbits"], 1e-12)
    report.add("p_phi01_given_Z_refbits", "closed-form", 0.0, result["p_phi01_given_Z_refbits"], 1e-12)
    report.add(
        "p_two_bit_event", "closed-form", 1.0 / 24.0, result["p_two_bit_exact"], 1e-12,
        empirical=result["p_two_bit_empirical"], trials=result["trials"], sigma=result["sigma"],
    )
    report.add(
        "pair_test_tv_across_xyz", "identity", 0.0,
        result["hiding_audit"]["pair_test_tv_across_xyz"], 1e-12,
    )
    report.extra["runner"] = result
    return report


def run_commit(args) -> Report:
    report = Report("commit", _config_of(args))
    result = protocols.run_commitment(
        {"seed": args.seed, "trials": args.trials, "cheat": args.cheat}
    )
    quarter = 0.25
    report.add("p_singlet_case0", "closed-form", quarter, result["p_singlet_case0"], 1e-12)
    report.add("p_singlet_case1_slots13", "closed-form", 0.75, result["p_singlet_case1_slots13"], 1e-12)
    report.add("p_singlet_case1_slots12", "closed-form", 0.0, result["p_singlet_case1_slots12"], 1e-12)
    report.add(
        "p_singlet_case1_mixture", "closed-form", quarter, result["p_singlet_case1_mixture"], 1e-12,
        empirical=result["p_singlet_case1_empirical"], trials=result["trials"], sigma=result["sigma"],
    )
    report.add(
        "received_state_bit_independence", "identity", 0.0,
        result["hiding_audit"]["received_state_deviation"], 1e-12,
    )
    if args.cheat:
        report.add("cheat_accept_bit1", "closed-form", 1.0, result["cheat_accept_bit1"], 1e-10)
        report.add("cheat_accept_bit0", "closed-form", 1.0, result["cheat_accept_bit0"], 1e-10)
        report.add("honest_accept_bit1", "closed-form", 1.0, result["honest_accept_bit1"], 1e-10)
    report.extra["runner"] = result
    return report


def _config_of(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)


def _restriction(text: str) -> frames.FrameRestriction:
    return frames.FrameRestriction.Z_ROTATION_ONLY if text == "zrot" else frames.FrameRestriction.FULL


# ---------------------------------------------------------------------------
# CLI


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, required=True, help="master seed; no wall-clock seeding")
    parser.add_argument("--trials", type=int, default=100000)
    parser.add_argument("--parties", type=int, default=3)
    parser.add_argument("--restriction", choices=["full", "zrot"], default="full")
    parser.add_argument("--out", type=str, default=None, help="report path")
    parser.add_argument("--format", dest="fmt", choices=["json", "csv"], default="json")
    parser.add_argument("--no-timestamp", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaugecomm",
        description="exact simulator of qubit communication between parties "
        "with private reference frames and rotating channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("observables", help="probe and loop observable identities")
    _add_common(p)
    p.add_argument("--networks", type=int, default=25)
    p.set_defaults(func=run_observables)

    p = sub.add_parser("wilson", help="loop-trace invariance suites")
    _add_common(p)
    p.add_argument("--cycles", type=int, default=100, help="transforms per path length")
    p.set_defaults(func=run_wilson)

    p = sub.add_parser("povm", help="invariant measurement suites")
    _add_common(p)
    p.add_argument("--draws", type=int, default=100)
    p.set_defaults(func=run_povm)

    p = sub.add_parser("resources", help="pair conversion and class separation")
    _add_common(p)
    p.add_argument("--networks", type=int, default=20)
    p.add_argument("--restarts", type=int, default=32)
    p.set_defaults(func=run_resources)

    p = sub.add_parser("datahiding", help="hidden-bit protocol")
    _add_common(p)
    p.add_argument("--refbits", action="store_true", help="token-qubit unlocking route")
    p.add_argument("--networks", type=int, default=1000, help="forwarding-route sweep size")
    p.set_defaults(func=run_datahiding)

    p = sub.add_parser("superdense", help="dense-coding protocol")
    _add_common(p)
    p.set_defaults(func=run_superdense)

    p = sub.add_parser("commit", help="commitment protocol")
    _add_common(p)
    p.add_argument("--cheat", action="store_true", help="include the sender-side cheat")
    p.set_defaults(func=run_commit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    report = args.func(args)
    doc = report.to_jsonable(timestamp=not args.no_timestamp)
    if args.out:
        report_write(report, args.out, args.fmt, timestamp=not args.no_timestamp)
    else:
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    for q in report.quantities:
        status = "PASS" if q.passed else "FAIL"
        sys.stderr.write(f"{status}: {q.name} = {q.value:.12g}\n")
    return 0 if report.all_pass else 1


if __name__ == "__main__":
    raise SystemExit(main())
