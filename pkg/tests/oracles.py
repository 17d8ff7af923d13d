"""Independent reference implementations used only by the tests.

Nothing here shares code paths with the package: matrix exponentials come
from plain scaling-and-squaring of the Taylor series, embeddings from
explicit basis-state enumeration, and Haar samples from a QR factorization.
"""

import math
from itertools import permutations

import numpy as np


def expm_series(m: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring Taylor exponential."""
    m = np.asarray(m, dtype=complex)
    norm = float(np.linalg.norm(m, ord=1))
    squarings = 0
    if norm > 0.5:
        squarings = int(np.ceil(np.log2(norm / 0.5)))
    a = m / (2.0**squarings)
    term = np.eye(m.shape[0], dtype=complex)
    total = term.copy()
    for k in range(1, 60):
        term = term @ a / k
        total = total + term
        if np.max(np.abs(term)) < 1e-22:
            break
    for _ in range(squarings):
        total = total @ total
    return total


def embed_brute(gate: np.ndarray, wires, n: int) -> np.ndarray:
    """Embed by routing every basis state through the wiring explicitly."""
    gate = np.asarray(gate, dtype=complex)
    wires = list(wires)
    m = len(wires)
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - w)) & 1 for w in range(n)]
        sub_col = 0
        for w in wires:
            sub_col = (sub_col << 1) | bits[w]
        for sub_row in range(2**m):
            amp = gate[sub_row, sub_col]
            if amp == 0.0:
                continue
            new_bits = list(bits)
            for pos, w in enumerate(wires):
                new_bits[w] = (sub_row >> (m - 1 - pos)) & 1
            row = 0
            for b in new_bits:
                row = (row << 1) | b
            out[row, col] += amp
    return out


def haar_su2_qr(rng: np.random.Generator) -> np.ndarray:
    """Haar SU(2) draw via QR of a complex Ginibre matrix."""
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    q = q @ np.diag(d / np.abs(d))
    return q / np.sqrt(np.linalg.det(q))


def symmetric_projector(n: int) -> np.ndarray:
    """Projector onto the permutation-symmetric subspace of n qubits."""
    dim = 2**n
    total = np.zeros((dim, dim))
    for perm in permutations(range(n)):
        p = np.zeros((dim, dim))
        for idx in range(dim):
            bits = [(idx >> (n - 1 - w)) & 1 for w in range(n)]
            new_bits = [bits[perm[w]] for w in range(n)]
            jdx = 0
            for b in new_bits:
                jdx = (jdx << 1) | b
            p[jdx, idx] = 1.0
        total += p
    return total / math.factorial(n)


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)
