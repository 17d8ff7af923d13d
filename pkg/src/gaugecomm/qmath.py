"""Dense complex linear algebra for few-qubit systems.

Wire convention, used everywhere in this package: wire 0 is the leftmost
tensor factor and therefore the most significant bit of an amplitude index.
All operations are pure functions on plain numpy arrays; validators raise
``ValueError`` on malformed input.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

ATOL = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


def num_qubits(dim: int) -> int:
    """Number of qubits for a Hilbert-space dimension; rejects non powers of two."""
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def check_finite(a: np.ndarray) -> None:
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("array contains non-finite entries")


def check_unitary(u: np.ndarray, atol: float = ATOL) -> None:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("operator must be square")
    check_finite(u)
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > atol:
        raise ValueError(f"operator is not unitary (deviation {dev:.3e})")


def check_su2(u: np.ndarray, atol: float = ATOL) -> None:
    u = np.asarray(u)
    if u.shape != (2, 2):
        raise ValueError("SU(2) element must be a 2x2 matrix")
    check_unitary(u, atol)
    if abs(np.linalg.det(u) - 1.0) > atol:
        raise ValueError("determinant must be 1")


def check_state(psi: np.ndarray, atol: float = ATOL) -> int:
    """Validate a pure-state amplitude vector; returns its qubit count."""
    psi = np.asarray(psi)
    if psi.ndim != 1:
        raise ValueError("state must be a vector")
    check_finite(psi)
    n = num_qubits(psi.shape[0])
    if abs(np.linalg.norm(psi) - 1.0) > atol:
        raise ValueError("state is not normalized")
    return n


def check_density(rho: np.ndarray, atol: float = ATOL, eig_floor: float = -1e-10) -> int:
    """Validate a density operator; returns its qubit count."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density operator must be square")
    check_finite(rho)
    n = num_qubits(rho.shape[0])
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density operator is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise ValueError("density operator trace is not 1")
    if np.min(np.linalg.eigvalsh(rho)) < eig_floor:
        raise ValueError("density operator has a negative eigenvalue")
    return n


def ket(bits: str) -> np.ndarray:
    """Computational basis state from a bit string, wire 0 leftmost."""
    index = int(bits, 2)
    out = np.zeros(2 ** len(bits), dtype=complex)
    out[index] = 1.0
    return out


def kron_chain(ops: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, [np.asarray(o, dtype=complex) for o in ops])


def density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def su2_from_axis_angle(axis: Sequence[float], angle: float) -> np.ndarray:
    """exp(i * angle/2 * axis.sigma) for a unit 3-vector axis."""
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (3,):
        raise ValueError("axis must be a 3-vector")
    if abs(np.linalg.norm(axis) - 1.0) > ATOL:
        raise ValueError("axis must be a unit vector")
    half = 0.5 * angle
    n_dot_sigma = axis[0] * PAULI_X + axis[1] * PAULI_Y + axis[2] * PAULI_Z
    return np.cos(half) * IDENTITY2 + 1j * np.sin(half) * n_dot_sigma


def haar_random_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed SU(2) element: a normalized 4-normal quaternion."""
    q = rng.standard_normal(4)
    norm = np.linalg.norm(q)
    while norm < 1e-12:
        q = rng.standard_normal(4)
        norm = np.linalg.norm(q)
    w, x, y, z = q / norm
    return np.array(
        [[w + 1j * z, y + 1j * x], [-y + 1j * x, w - 1j * z]], dtype=complex
    )


def su2_log(u: np.ndarray) -> np.ndarray:
    """Coefficient vector a with u = exp(i a.sigma) and |a| in [0, pi].

    The principal branch: at u = -I the axis is ambiguous and defaults to +z
    (tie rules: nonnegative z component, then nonnegative x, then +y).
    """
    check_su2(u)
    w = float(np.clip((u[0, 0].real + u[1, 1].real) / 2.0, -1.0, 1.0))
    x = (u[0, 1].imag + u[1, 0].imag) / 2.0
    y = (u[0, 1].real - u[1, 0].real) / 2.0
    z = (u[0, 0].imag - u[1, 1].imag) / 2.0
    vec = np.array([x, y, z])
    s = np.linalg.norm(vec)
    if s < 1e-12:
        if w > 0.0:
            return np.zeros(3)
        return np.pi * np.array([0.0, 0.0, 1.0])
    return (np.arccos(w) / s) * vec


def embed(gate: np.ndarray, wires: Sequence[int], n: int) -> np.ndarray:
    """Operator acting as ``gate`` on ``wires`` (in that order), identity elsewhere."""
    gate = np.asarray(gate, dtype=complex)
    wires = list(wires)
    m = len(wires)
    if gate.shape != (2**m, 2**m):
        raise ValueError("gate dimension does not match the wire count")
    if len(set(wires)) != m:
        raise ValueError("wires must be distinct")
    if any(w < 0 or w >= n for w in wires):
        raise ValueError("wire index out of range")
    rest = [w for w in range(n) if w not in wires]
    full = np.kron(gate, np.eye(2 ** len(rest), dtype=complex))
    order = wires + rest
    inv = np.argsort(order)
    axes = list(inv) + [n + i for i in inv]
    return full.reshape([2] * (2 * n)).transpose(axes).reshape(2**n, 2**n)


def apply_to_wires(state: np.ndarray, gate: np.ndarray, wires: Sequence[int]) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    n = num_qubits(state.shape[0])
    return embed(gate, wires, n) @ state


def permute_wires(state: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder wires so that wire j of the result is wire order[j] of the input."""
    state = np.asarray(state, dtype=complex)
    n = num_qubits(state.shape[0])
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of all wires")
    return state.reshape([2] * n).transpose(order).reshape(-1)


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced operator on ``keep`` (in the listed order); trace preserving."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density operator must be square")
    n = num_qubits(rho.shape[0])
    keep = list(keep)
    if not keep:
        raise ValueError("keep must be nonempty")
    if len(set(keep)) != len(keep) or any(w < 0 or w >= n for w in keep):
        raise ValueError("keep wires must be distinct and in range")
    drop = [w for w in range(n) if w not in keep]
    k, d = len(keep), len(drop)
    t = rho.reshape([2] * (2 * n))
    axes = keep + drop + [n + w for w in keep] + [n + w for w in drop]
    t = t.transpose(axes).reshape(2**k, 2**d, 2**k, 2**d)
    return np.einsum("ajbj->ab", t)


def overlap(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    """True iff |<a|b>| >= 1 - tol for normalized states of equal size."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("states act on different qubit counts")
    return abs(np.vdot(a, b)) >= 1.0 - tol
