"""Butson-type Hadamard matrices kept in phase form.

``PhaseMatrix`` stores exponents: entry (i, j) stands for w_q^{phases[i][j]}.
Equivalence allows row and column permutations and multiplying rows or
columns by roots of unity.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cyclotomic import zero_mask


@dataclass(frozen=True)
class PhaseMatrix:
    q: int
    phases: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(v) % self.q for v in r) for r in self.phases)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ValueError("phase matrix must be square and non-empty")
        object.__setattr__(self, "phases", rows)

    @classmethod
    def from_array(cls, q: int, arr) -> PhaseMatrix:
        return cls(q, tuple(map(tuple, np.asarray(arr).tolist())))

    @property
    def N(self) -> int:
        return len(self.phases)

    def array(self) -> np.ndarray:
        return np.array(self.phases, dtype=np.int64)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self.phases[ij[0]][ij[1]]

    def transpose(self) -> PhaseMatrix:
        return PhaseMatrix.from_array(self.q, self.array().T)

    def permuted(self, rows: Sequence[int], cols: Sequence[int]) -> PhaseMatrix:
        """Entry (i, j) of the result is entry (rows[i], cols[j]) of self."""
        return PhaseMatrix.from_array(self.q, self.array()[np.ix_(list(rows), list(cols))])

    def twisted(self, row_phases: Sequence[int], col_phases: Sequence[int]) -> PhaseMatrix:
        arr = self.array() + np.asarray(row_phases)[:, None] + np.asarray(col_phases)[None, :]
        return PhaseMatrix.from_array(self.q, arr % self.q)

    def to_json(self) -> dict:
        return {"q": self.q, "N": self.N, "phases": [list(r) for r in self.phases]}

    @classmethod
    def from_json(cls, obj: dict) -> PhaseMatrix:
        pm = cls(int(obj["q"]), obj["phases"])
        if "N" in obj and int(obj["N"]) != pm.N:
            raise ValueError("declared N does not match the phase table")
        return pm

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def is_bh(P: PhaseMatrix) -> bool:
    """Rows pairwise orthogonal over Z[w_q], checked exactly."""
    arr = P.array()
    N, q = P.N, P.q
    diff = (arr[:, None, :] - arr[None, :, :]) % q  # (r, s, j)
    counts = np.zeros((N, N, q), dtype=np.int64)
    for k in range(q):
        counts[..., k] = (diff == k).sum(axis=-1)
    off = ~np.eye(N, dtype=bool)
    return bool(zero_mask(counts[off], q).all())


def dephase(P: PhaseMatrix) -> PhaseMatrix:
    """Normalize so the first row and first column are all zero."""
    if not is_bh(P):
        raise ValueError("dephasing expects a Butson Hadamard matrix")
    arr = P.array()
    out = arr - arr[0:1, :] - arr[:, 0:1] + arr[0, 0]
    return PhaseMatrix.from_array(P.q, out % P.q)


def canonical_form(P: PhaseMatrix) -> tuple[tuple[int, ...], ...]:
    """Lexicographically least dephased form over all row and column orders.

    Two matrices are equivalent exactly when their canonical forms agree.
    The search is over (N!)^2 orderings, so it is intended for small N.
    """
    arr = P.array()
    q, N = P.q, P.N
    best = None
    for rows in itertools.permutations(range(N)):
        r = arr[list(rows)]
        for cols in itertools.permutations(range(N)):
            a = r[:, list(cols)]
            d = (a - a[0:1, :] - a[:, 0:1] + a[0, 0]) % q
            key = tuple(map(tuple, d.tolist()))
            if best is None or key < best:
                best = key
    return best


EQUIVALENCE_MAX_ORDER = 5


def are_equivalent(P1: PhaseMatrix, P2: PhaseMatrix) -> bool:
    if P1.q != P2.q or P1.N != P2.N:
        raise ValueError("equivalence needs matching (q, N)")
    if P1.N > EQUIVALENCE_MAX_ORDER:
        raise ValueError(f"exhaustive equivalence search is limited to N <= {EQUIVALENCE_MAX_ORDER}")
    return canonical_form(P1) == canonical_form(P2)


def fourier_phase(q: int, N: int) -> PhaseMatrix:
    """Phases (q/N) i j; requires N to divide q."""
    if N < 1 or q % N:
        raise ValueError(f"Fourier phase matrix needs N | q, got q={q}, N={N}")
    step = q // N
    return PhaseMatrix(q, tuple(tuple((step * i * j) % q for j in range(N)) for i in range(N)))


def walsh_kron_phase(q: int, n: int) -> PhaseMatrix:
    """n-fold Kronecker power of the 2 x 2 Walsh matrix: (q/2) popcount(i & j)."""
    if q % 2:
        raise ValueError("Walsh phases need even q")
    N = 1 << n
    half = q // 2
    return PhaseMatrix(q, tuple(tuple((half * bin(i & j).count("1")) % q for j in range(N)) for i in range(N)))


_EXAMPLE_Q2_N4 = ((0, 0, 0, 0), (0, 1, 0, 1), (0, 0, 1, 1), (0, 1, 1, 0))


def catalog(q: int, N: int) -> list[PhaseMatrix]:
    """Representatives of every equivalence class for the supported (q, N)."""
    if N == 2 and q % 2 == 0:
        return [PhaseMatrix(q, ((0, 0), (0, q // 2)))]
    if (q, N) == (3, 3):
        return [fourier_phase(3, 3)]
    if (q, N) == (2, 4):
        return [PhaseMatrix(2, _EXAMPLE_Q2_N4)]
    if (q, N) == (4, 4):
        return [walsh_kron_phase(4, 2), fourier_phase(4, 4)]
    raise ValueError(f"no catalog of Hadamard classes for q={q}, N={N}")


def random_bh(q: int, N: int, rng: np.random.Generator) -> PhaseMatrix:
    """A random member of a random catalog class."""
    reps = catalog(q, N)
    base = reps[int(rng.integers(len(reps)))]
    P = base.permuted(rng.permutation(N), rng.permutation(N))
    return P.twisted(rng.integers(0, q, N), rng.integers(0, q, N))


def load_phase_matrix(path) -> PhaseMatrix:
    with open(path) as fh:
        return PhaseMatrix.from_json(json.load(fh))
