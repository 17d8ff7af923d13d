"""Collective-rotation-invariant subspaces and measurements for 2-4 qubits.

Everything here commutes with U on every qubit simultaneously, which is what
makes these measurements performable without any shared frame: their outcome
statistics are the same in every party's account of the state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qmath

_SQ2 = np.sqrt(2.0)


@dataclass(frozen=True)
class BellBasis:
    """The singlet and the three index-carrying triplet states."""

    singlet: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def state(self, j: str) -> np.ndarray:
        return {"0": self.singlet, "x": self.x, "y": self.y, "z": self.z}[j]

    def triplet_matrix(self) -> np.ndarray:
        """Columns x, y, z as a 4x3 isometry onto the triplet subspace."""
        return np.column_stack([self.x, self.y, self.z])


def bell_basis() -> BellBasis:
    return BellBasis(
        singlet=(qmath.ket("01") - qmath.ket("10")) / _SQ2,
        x=(qmath.ket("00") - qmath.ket("11")) / _SQ2,
        y=(qmath.ket("00") + qmath.ket("11")) / _SQ2,
        z=(qmath.ket("01") + qmath.ket("10")) / _SQ2,
    )


@dataclass(frozen=True)
class Povm:
    """Finite list of positive operators summing to the identity."""

    elements: tuple[np.ndarray, ...]
    labels: tuple[str, ...]
    collective_invariant: bool = False

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        if len(elems) != len(self.labels):
            raise ValueError("one label per element")
        object.__setattr__(self, "elements", elems)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def check(self, atol: float = qmath.ATOL, eig_floor: float = -1e-10) -> None:
        total = sum(self.elements)
        if np.max(np.abs(total - np.eye(self.dim))) > atol:
            raise ValueError("elements do not sum to the identity")
        for e in self.elements:
            if np.max(np.abs(e - e.conj().T)) > atol:
                raise ValueError("element is not Hermitian")
            if np.min(np.linalg.eigvalsh(e)) < eig_floor:
                raise ValueError("element is not positive semidefinite")

    def distribution(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        return np.array(
            [max(float(np.real(np.vdot(psi, e @ psi))), 0.0) for e in self.elements]
        )

    def distribution_density(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return np.array([max(float(np.real(np.trace(e @ rho))), 0.0) for e in self.elements])


def povm2_singlet_triplet() -> Povm:
    """Two outcomes on a qubit pair: the singlet projector and its complement."""
    bell = bell_basis()
    e_s = qmath.density(bell.singlet)
    return Povm((e_s, np.eye(4) - e_s), ("singlet", "triplet"), collective_invariant=True)


def ubell_conjugation(u: np.ndarray, j: str) -> float:
    """Residual of pushing a collective rotation through one Bell state onto
    the second qubit alone: || (U x U) b_j - (I x U s_j U^dag s_j) b_j ||."""
    u = np.asarray(u, dtype=complex)
    qmath.check_su2(u)
    if j not in ("0", "x", "y", "z"):
        raise ValueError("j must be one of '0', 'x', 'y', 'z'")
    sigma = qmath.IDENTITY2 if j == "0" else qmath.PAULIS[j]
    b = bell_basis().state(j)
    lhs = np.kron(u, u) @ b
    rhs = np.kron(qmath.IDENTITY2, u @ sigma @ u.conj().T @ sigma) @ b
    return float(np.linalg.norm(lhs - rhs))


def j1_generators(step: float = 1e-2) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-1 generators on the triplet subspace, derived numerically.

    Each generator is half the first-order response of the collective
    rotation exp(i eps sigma_a) x exp(i eps sigma_a) restricted to the
    {x, y, z} Bell triplet, extracted by central differences with two levels
    of Richardson refinement. Nothing is transcribed; the derivation is the
    ground truth and closed-form expectations are asserted in tests.
    """
    basis = bell_basis().triplet_matrix()
    axes = (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0]))

    def restricted(axis: np.ndarray, eps: float) -> np.ndarray:
        u = qmath.su2_from_axis_angle(axis, 2.0 * eps)  # exp(i eps sigma.axis)
        return basis.conj().T @ np.kron(u, u) @ basis

    def central(axis: np.ndarray, eps: float) -> np.ndarray:
        return (restricted(axis, eps) - restricted(axis, -eps)) / (4.0j * eps)

    out = []
    for axis in axes:
        t1 = central(axis, step)
        t2 = central(axis, step / 2.0)
        t3 = central(axis, step / 4.0)
        r1 = (4.0 * t2 - t1) / 3.0
        r2 = (4.0 * t3 - t2) / 3.0
        out.append((16.0 * r2 - r1) / 15.0)
    return tuple(out)


def _printed_j1_reference() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Commonly quoted closed forms for the same generators, kept for
    comparison; the y generator differs from the derived one by sign."""
    tx = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)
    ty = np.array([[0, 0, 1j], [0, 0, 0], [-1j, 0, 0]], dtype=complex)
    tz = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
    return tx, ty, tz


def povm3() -> Povm:
    """Three invariant outcomes on three qubits: the two doublet copies
    (labelled by the spin of the first pair) and the symmetric quadruplet."""
    v00 = (qmath.ket("010") - qmath.ket("100")) / _SQ2
    v01 = (qmath.ket("101") - qmath.ket("011")) / _SQ2
    v10 = (2 * qmath.ket("001") - qmath.ket("010") - qmath.ket("100")) / np.sqrt(6.0)
    v11 = (2 * qmath.ket("110") - qmath.ket("101") - qmath.ket("011")) / np.sqrt(6.0)
    e0 = qmath.density(v00) + qmath.density(v01)
    e1 = qmath.density(v10) + qmath.density(v11)
    e32 = next(p.projector for p in total_spin_projectors(3) if p.j == 1.5)
    return Povm((e0, e1, e32), ("J=1/2,l=0", "J=1/2,l=1", "J=3/2"), collective_invariant=True)


def phi_invariant_states() -> tuple[np.ndarray, np.ndarray]:
    """The two four-qubit states invariant under every collective rotation."""
    bell = bell_basis()
    phi00 = np.kron(bell.singlet, bell.singlet)
    phi01 = (
        np.kron(bell.x, bell.x) - np.kron(bell.y, bell.y) + np.kron(bell.z, bell.z)
    ) / np.sqrt(3.0)
    return phi00, phi01


def povm4_invariant() -> Povm:
    """Four invariant outcomes on four qubits: the two invariant states as
    rank-one elements plus the coarse spin-1 and spin-2 sector projectors."""
    phi00, phi01 = phi_invariant_states()
    sectors = total_spin_projectors(4)
    p1 = sum(p.projector for p in sectors if p.j == 1.0)
    p2 = next(p.projector for p in sectors if p.j == 2.0)
    return Povm(
        (qmath.density(phi00), qmath.density(phi01), p1, p2),
        ("phi_0,0", "phi_0,1", "J=1", "J=2"),
        collective_invariant=True,
    )


def povm4_lambda_resolved() -> Povm:
    """As :func:`povm4_invariant` but with the three spin-1 copies separate."""
    phi00, phi01 = phi_invariant_states()
    sectors = total_spin_projectors(4)
    ones = [p for p in sectors if p.j == 1.0]
    p2 = next(p.projector for p in sectors if p.j == 2.0)
    elements = [qmath.density(phi00), qmath.density(phi01)]
    labels = ["phi_0,0", "phi_0,1"]
    for p in ones:
        elements.append(p.projector)
        labels.append(f"J=1,l={p.lam}")
    elements.append(p2)
    labels.append("J=2")
    return Povm(tuple(elements), tuple(labels), collective_invariant=True)


@dataclass(frozen=True)
class IrrepProjector:
    """Projector onto one copy of a total-spin sector.

    Degenerate copies are told apart by the ascending chain of intermediate
    couplings (spin of qubits 1..2, then 1..3, ...), recorded in ``chain``.
    """

    n: int
    j: float
    lam: int
    chain: tuple[float, ...]
    projector: np.ndarray


def _spin_squared(n: int, wires: Sequence[int]) -> np.ndarray:
    total = np.zeros((2**n, 2**n), dtype=complex)
    for axis in ("x", "y", "z"):
        s = sum(qmath.embed(qmath.PAULIS[axis] / 2.0, [w], n) for w in wires)
        total = total + s @ s
    return total


def _eig_j(value: float) -> float:
    """Spin quantum number from a J^2 eigenvalue j(j+1)."""
    j = 0.5 * (-1.0 + np.sqrt(1.0 + 4.0 * value))
    return round(2.0 * j) / 2.0


def _split_blocks(blocks, op, gap: float = 1e-8):
    """Refine (labels, column basis) blocks by the eigenvalues of ``op``."""
    refined = []
    for labels, cols in blocks:
        sub = cols.conj().T @ op @ cols
        vals, vecs = np.linalg.eigh(sub)
        start = 0
        for i in range(1, len(vals) + 1):
            if i == len(vals) or vals[i] - vals[start] > gap:
                value = float(np.mean(vals[start:i]))
                refined.append((labels + (_eig_j(value),), cols @ vecs[:, start:i]))
                start = i
    return refined


def total_spin_projectors(n: int) -> list[IrrepProjector]:
    """Projectors onto every irreducible copy of the collective rotation
    action on ``n`` qubits, 2 <= n <= 4."""
    if not 2 <= n <= 4:
        raise ValueError("supported qubit counts are 2, 3 and 4")
    dim = 2**n
    blocks = [((), np.eye(dim, dtype=complex))]
    blocks = _split_blocks(blocks, _spin_squared(n, range(n)))
    for m in range(2, n):
        blocks = _split_blocks(blocks, _spin_squared(n, range(m)))
    by_j: dict[float, list] = {}
    for labels, cols in blocks:
        by_j.setdefault(labels[0], []).append((labels[1:], cols))
    out = []
    for j in sorted(by_j):
        copies = sorted(by_j[j], key=lambda item: item[0])
        for lam, (chain, cols) in enumerate(copies):
            out.append(IrrepProjector(n, j, lam, chain, cols @ cols.conj().T))
    return out
