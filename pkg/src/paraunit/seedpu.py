"""Seed matrices H0 D(z0) H1 ... D(z_{m-1}) Hm and the sequence families they yield.

With p = N every seed is a desired para-unitary matrix.  Its entry functions
split into a chain of quadratic terms h_k(y_{k-1}, y_k), single-variable terms
and boundary terms that depend on the row and column index.  This module
builds the matrices, reads off that decomposition, computes the quadratic
class sets S_Q(q, N) and enumerates the resulting sequence sets.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cyclotomic import phases_to_array
from .functions import (
    QArray,
    check_permutation,
    from_terms,
    inverse_permutation,
    permute_vars,
    point_matrix,
)
from .hadamard import PhaseMatrix, catalog, is_bh, walsh_kron_phase, fourier_phase
from .polymatrix import FunctionMatrix, PolyMatrix

DEFAULT_GUARD = 10**7


class GuardExceeded(RuntimeError):
    """Raised when an enumeration would generate more than the configured cap."""


def enumeration_guard() -> int:
    raw = os.environ.get("PARAUNIT_GUARD")
    return int(float(raw)) if raw else DEFAULT_GUARD


# ---------------------------------------------------------------------------
# seeds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeedSpec:
    q: int
    N: int
    m: int
    hs: tuple[PhaseMatrix, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "hs", tuple(self.hs))
        if len(self.hs) != self.m + 1:
            raise ValueError(f"need m + 1 = {self.m + 1} phase matrices, got {len(self.hs)}")
        for k, h in enumerate(self.hs):
            if h.q != self.q or h.N != self.N:
                raise ValueError(f"phase matrix {k} has (q, N) = ({h.q}, {h.N})")
            if not is_bh(h):
                raise ValueError(f"phase matrix {k} is not Butson Hadamard")

    @classmethod
    def random(cls, q: int, N: int, m: int, rng: np.random.Generator) -> SeedSpec:
        from .hadamard import random_bh

        return cls(q, N, m, tuple(random_bh(q, N, rng) for _ in range(m + 1)))


def univariate_delay(q: int, N: int, m: int, k: int) -> PolyMatrix:
    """diag(1, z_k, ..., z_k^{N-1}) in a space of m variables."""
    coeffs = {}
    for y in range(N):
        exp = [0] * m
        exp[k] = y
        mat = np.zeros((N, N, q), dtype=np.int64)
        mat[y, y, 0] = 1
        coeffs[tuple(exp)] = mat
    return PolyMatrix(q, N, m, coeffs)


def build_seed(spec: SeedSpec) -> PolyMatrix:
    q, N, m = spec.q, spec.N, spec.m
    M = PolyMatrix.constant(q, spec.hs[0].phases, m)
    for k in range(m):
        M = M @ univariate_delay(q, N, m, k) @ PolyMatrix.constant(q, spec.hs[k + 1].phases, m)
    return M


def coefficient_matrix_closed_form(spec: SeedSpec, y: Sequence[int]) -> np.ndarray:
    """Coefficient of z^y as an (N, N, q) array.

    Entry (i, j) is the single root w^{H0[i, y0] + sum_k Hk[y_{k-1}, y_k] + Hm[y_{m-1}, j]}.
    """
    y = tuple(int(v) for v in y)
    if len(y) != spec.m or any(v < 0 or v >= spec.N for v in y):
        raise ValueError(f"exponent {y} out of range for N={spec.N}, m={spec.m}")
    return phases_to_array(_closed_form_phases(spec, y), spec.q)


def _closed_form_phases(spec: SeedSpec, y: tuple[int, ...]) -> np.ndarray:
    hs = [h.array() for h in spec.hs]
    if spec.m == 0:
        return hs[0] % spec.q
    inner = sum(int(hs[k][y[k - 1], y[k]]) for k in range(1, spec.m))
    return (hs[0][:, y[0]][:, None] + inner + hs[spec.m][y[-1], :][None, :]) % spec.q


def seed_functions(spec: SeedSpec) -> FunctionMatrix:
    """The entry functions f_ij(y) = sum_k Hk[y_{k-1}, y_k] with y_{-1} = i, y_m = j."""
    q, N, m = spec.q, spec.N, spec.m
    hs = [h.array() for h in spec.hs]
    if m == 0:
        return FunctionMatrix(q, N, 0, (hs[0] % q)[:, :, None])
    Y = point_matrix(N, m)
    inner = np.zeros(len(Y), dtype=np.int64)
    for k in range(1, m):
        inner += hs[k][Y[:, k - 1], Y[:, k]]
    first = hs[0][:, Y[:, 0]]  # (i, t)
    last = hs[m][Y[:, m - 1], :].T  # (j, t)
    return FunctionMatrix(q, N, m, (first[:, None, :] + inner[None, None, :] + last[None, :, :]) % q)


# ---------------------------------------------------------------------------
# basis functions and quadratic terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisFunction:
    q: int
    N: int
    i: int
    table: tuple[int, ...]
    display: str | None = None


def basis_g(q: int, N: int) -> list[BasisFunction]:
    """Indicator functions g_i(y) = [y == i] on Z_N, with polynomial forms where known."""
    out = []
    n = N.bit_length() - 1
    for i in range(N):
        table = tuple(int(i == y) for y in range(N))
        display = None
        if N == 1 << n and n > 0:
            display = "".join(f"x{v}" if (i >> v) & 1 else f"(1-x{v})" for v in range(n))
        elif N == 3 and q == 3:
            display = ("2y^2+1", "2y^2+2y", "2y^2+y")[i]
        out.append(BasisFunction(q, N, i, table, display))
    return out


class QuadraticTerm:
    """A function h(y0, y1) on Z_N x Z_N stored as an N x N table over Z_q."""

    __slots__ = ("q", "N", "table")

    def __init__(self, q: int, table):
        arr = np.asarray(table, dtype=np.int64) % q
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("quadratic term table must be square")
        arr.flags.writeable = False
        self.q, self.N, self.table = q, arr.shape[0], arr

    @property
    def canonical(self) -> bool:
        return not self.table[0].any() and not self.table[:, 0].any()

    def key(self) -> tuple[tuple[int, ...], ...]:
        return tuple(map(tuple, self.table.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuadraticTerm):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.q, self.key()))

    def __repr__(self) -> str:
        return f"QuadraticTerm(q={self.q}, table={self.table.tolist()})"

    def __call__(self, y0: int, y1: int) -> int:
        return int(self.table[y0, y1])

    def transpose(self) -> QuadraticTerm:
        return QuadraticTerm(self.q, self.table.T)

    def scale(self, c: int) -> QuadraticTerm:
        return QuadraticTerm(self.q, self.table * c)

    def as_array(self) -> QArray:
        """h as an array over Z_N^2 with y0 the first variable."""
        return QArray.from_grid(self.q, self.table)

    @classmethod
    def from_boolean(cls, f: QArray) -> QuadraticTerm:
        """Read a 4-variable Boolean function as h((x0, x1), (x2, x3)), y = x_low + 2 x_high."""
        if f.p != 2 or f.m % 2:
            raise ValueError("need an even number of Boolean variables")
        n = f.m // 2
        return cls(f.q, f.table.reshape(1 << n, 1 << n, order="F"))


def quadratic_term(Ht: PhaseMatrix, chi_left: Sequence[int], chi_right: Sequence[int]) -> QuadraticTerm:
    """h(y0, y1) = sum_{a,b} Ht[a, b] g_{chi_left[a]}(y0) g_{chi_right[b]}(y1).

    Evaluated directly: only a = chi_left^{-1}(y0), b = chi_right^{-1}(y1) contribute.
    """
    if not is_bh(Ht):
        raise ValueError("quadratic terms come from Butson Hadamard phase matrices")
    N = Ht.N
    chi_left = check_permutation(chi_left, N)
    chi_right = check_permutation(chi_right, N)
    g = np.eye(N, dtype=np.int64)
    left = g[list(chi_left)]  # left[a, y0] = g_{chi_left[a]}(y0)
    right = g[list(chi_right)]
    return QuadraticTerm(Ht.q, left.T @ Ht.array() @ right)


def canonicalize_quadratic(h: QuadraticTerm) -> QuadraticTerm:
    t = h.table
    return QuadraticTerm(h.q, t - t[:, :1] - t[:1, :] + t[0, 0])


def compute_SQ(q: int, N: int, reps: Sequence[PhaseMatrix] | None = None) -> list[QuadraticTerm]:
    """Canonical quadratic classes reachable from the given Hadamard representatives."""
    reps = catalog(q, N) if reps is None else list(reps)
    seen: set[tuple] = set()
    for rep in reps:
        if not is_bh(rep):
            raise ValueError("representative is not Butson Hadamard")
        arr = rep.array()
        for rows in itertools.permutations(range(N)):
            r = arr[list(rows)]
            for cols in itertools.permutations(range(N)):
                t = r[:, list(cols)]
                seen.add(tuple(map(tuple, ((t - t[:, :1] - t[:1, :] + t[0, 0]) % q).tolist())))
    return [QuadraticTerm(q, k) for k in sorted(seen)]


# Quadratic class representatives over (x0, x1) x (x2, x3), y0 = x0 + 2 x1, y1 = x2 + 2 x3.
PHI_TERMS: dict[int, list[tuple[int, tuple[int, ...]]]] = {
    1: [(1, (0, 2)), (1, (0, 3)), (1, (1, 2))],
    2: [(1, (0, 2)), (1, (0, 3)), (1, (1, 3))],
    3: [(1, (0, 2)), (1, (1, 3)), (1, (1, 2))],
    4: [(1, (1, 3)), (1, (0, 3)), (1, (1, 2))],
    5: [(1, (0, 3)), (1, (1, 2))],
    6: [(1, (1, 3)), (1, (0, 2))],
}

PSI_PARAMETERS: dict[int, tuple[int, ...]] = {
    1: (0, 1, 2, 3),
    2: (0, 1, 2, 3),
    3: (1, 2, 3),
    4: (1, 2, 3),
    5: (1, 3),
    6: (1, 3),
    7: (1, 3),
    8: (1, 3),
    9: (1, 3),
}


def psi_terms(index: int, a: int) -> list[tuple[int, tuple[int, ...]]]:
    if a not in PSI_PARAMETERS.get(index, ()):
        raise ValueError(f"parameter {a} not allowed for quaternary class {index}")
    b = a + 2
    return {
        1: [(a, (1, 3)), (2, (0, 3)), (2, (1, 2))],
        2: [(a, (1, 2)), (2, (0, 2)), (2, (1, 3))],
        3: [(a, (0, 3)), (2, (0, 2)), (2, (1, 3))],
        4: [(a, (0, 2)), (2, (1, 2)), (2, (0, 3))],
        5: [(a, (1, 3)), (b, (0, 3)), (2, (1, 2)), (2, (0, 2)), (2, (0, 1, 3))],
        6: [(a, (1, 2)), (b, (0, 2)), (2, (1, 3)), (2, (0, 3)), (2, (0, 1, 2))],
        7: [(a, (1, 3)), (b, (1, 2)), (2, (0, 3)), (2, (0, 2)), (2, (1, 2, 3))],
        8: [(a, (0, 2)), (b, (0, 3)), (2, (1, 2)), (2, (1, 3)), (2, (0, 2, 3))],
        9: [
            (a, (0, 2)), (b, (0, 3)), (b, (1, 2)), (a, (1, 3)),
            (2, (0, 1, 2)), (2, (0, 1, 3)), (2, (0, 2, 3)), (2, (1, 2, 3)),
        ],
    }[index]


def phi_term(index: int, q: int = 2) -> QuadraticTerm:
    """Binary class phi_index; with q = 4 the doubled form 2 phi_index."""
    scale = q // 2
    return QuadraticTerm.from_boolean(from_terms(q, 4, [(scale * c, s) for c, s in PHI_TERMS[index]]))


def psi_term(index: int, a: int) -> QuadraticTerm:
    return QuadraticTerm.from_boolean(from_terms(4, 4, psi_terms(index, a)))


# ---------------------------------------------------------------------------
# general forms
# ---------------------------------------------------------------------------


def _indicator_tables(N: int, m: int) -> np.ndarray:
    """Rows g_i(y_k) for k < m, 1 <= i < N, then the constant 1; shape (m(N-1)+1, N^m)."""
    Y = point_matrix(N, m)
    rows = [(Y[:, k] == i).astype(np.int64) for k in range(m) for i in range(1, N)]
    rows.append(np.ones(N**m, dtype=np.int64))
    return np.stack(rows)


@dataclass
class GeneralForm:
    """sum_k h_k(y_{k-1}, y_k) + sum_{k, i >= 1} c_{k,i} g_i(y_k) + c'."""

    q: int
    N: int
    m: int
    hs: list[QuadraticTerm] = field(default_factory=list)
    linear: np.ndarray | None = None  # shape (m, N - 1)
    constant: int = 0

    def __post_init__(self) -> None:
        if len(self.hs) != max(self.m - 1, 0):
            raise ValueError(f"need {max(self.m - 1, 0)} quadratic terms")
        for h in self.hs:
            if h.q != self.q or h.N != self.N:
                raise ValueError("quadratic term has the wrong alphabet")
            if not h.canonical:
                raise ValueError("quadratic terms must be canonical")
        lin = np.zeros((self.m, self.N - 1), dtype=np.int64) if self.linear is None else np.asarray(self.linear, dtype=np.int64)
        if lin.shape != (self.m, self.N - 1):
            raise ValueError(f"linear coefficients must have shape {(self.m, self.N - 1)}")
        self.linear = lin % self.q
        self.constant %= self.q


def assemble_general_form(gf: GeneralForm) -> QArray:
    q, N, m = gf.q, gf.N, gf.m
    Y = point_matrix(N, m)
    acc = np.zeros(N**m, dtype=np.int64)
    for k, h in enumerate(gf.hs, start=1):
        acc += h.table[Y[:, k - 1], Y[:, k]]
    coeffs = np.concatenate([gf.linear.ravel(), [gf.constant]])
    acc += coeffs @ _indicator_tables(N, m)
    return QArray(q, N, m, acc % q)


def linear_space_size(q: int, N: int, m: int) -> int:
    return q ** (N * m - m + 1)


def linear_space(q: int, N: int, m: int) -> np.ndarray:
    """Every element of S_L(q, N) as a value table; shape (q^{Nm-m+1}, N^m)."""
    basis = _indicator_tables(N, m)
    d = basis.shape[0]
    coeffs = np.array(list(itertools.product(range(q), repeat=d)), dtype=np.int64).reshape(-1, d)
    return (coeffs @ basis) % q


def linear_space_rank(q: int, N: int, m: int) -> int:
    """Size of the Z_q-span of the indicator tables, counted by brute force."""
    return len({row.tobytes() for row in linear_space(q, N, m)})


def in_linear_space(f: QArray) -> bool:
    """True when f is a sum of single-variable functions (plus a constant)."""
    g = f.grid().astype(np.int64)
    resid = g.copy()
    origin = (0,) * f.m
    for k in range(f.m):
        idx = [0] * f.m
        idx[k] = slice(None)
        line = g[tuple(idx)] - g[origin]
        shape = [1] * f.m
        shape[k] = f.p
        resid = resid - line.reshape(shape)
    return not ((resid - g[origin]) % f.q).any()


# ---------------------------------------------------------------------------
# function matrices from general forms
# ---------------------------------------------------------------------------


def function_matrix_from_general(f: QArray, h: QuadraticTerm, h_end: QuadraticTerm) -> FunctionMatrix:
    """Entry (i, j) is f + h(i, y_0) + h_end(y_{m-1}, j)."""
    N, m = f.p, f.m
    if h.N != N or h_end.N != N or h.q != f.q or h_end.q != f.q:
        raise ValueError("boundary terms must match the array alphabet")
    if m == 0:
        raise ValueError("need at least one variable")
    Y = point_matrix(N, m)
    first = h.table[:, Y[:, 0]]  # (i, t)
    last = h_end.table[Y[:, m - 1], :].T  # (j, t)
    ph = f.table[None, None, :] + first[:, None, :] + last[None, :, :]
    return FunctionMatrix(f.q, N, m, ph % f.q)


@dataclass
class SeedDecomposition:
    general: GeneralForm
    h_start: QuadraticTerm
    h_end: QuadraticTerm
    row_constants: np.ndarray
    col_constants: np.ndarray

    def function_matrix(self) -> FunctionMatrix:
        base = function_matrix_from_general(assemble_general_form(self.general), self.h_start, self.h_end)
        extra = self.row_constants[:, None, None] + self.col_constants[None, :, None]
        return FunctionMatrix(base.q, base.p, base.m, (base.phases + extra) % base.q)


def decompose_seed(spec: SeedSpec) -> SeedDecomposition:
    """Split the entry functions of a seed into a general form and boundary terms.

    Each phase matrix is written as its dephased form plus a row term plus a
    column term; the inner dephased forms become the quadratic chain, the
    single-variable pieces become linear coefficients and what remains at the
    ends depends only on the row or column index.
    """
    q, N, m = spec.q, spec.N, spec.m
    if m == 0:
        raise ValueError("a seed without variables has no general form")
    hs = [h.array() for h in spec.hs]
    deph = [(h - h[:, :1] - h[:1, :] + h[0, 0]) % q for h in hs]
    row = [h[:, 0] for h in hs]  # Hk[a, 0]
    col = [h[0, :] - h[0, 0] for h in hs]  # Hk[0, b] - Hk[0, 0]
    # single-variable function of y_k, as a length-N table
    single = np.zeros((m, N), dtype=np.int64)
    for k in range(1, m):
        single[k - 1] += row[k]
        single[k] += col[k]
    single[0] += col[0]
    single[m - 1] += row[m]
    constant = int(single[:, 0].sum())
    linear = single[:, 1:] - single[:, :1]
    gf = GeneralForm(q, N, m, [QuadraticTerm(q, deph[k]) for k in range(1, m)], linear % q, constant % q)
    return SeedDecomposition(gf, QuadraticTerm(q, deph[0]), QuadraticTerm(q, deph[m]), row[0] % q, col[m] % q)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def predicted_count(q: int, N: int, m: int, sq_size: int | None = None) -> int:
    """(1/2) m! |S_Q|^{m-1} q^{Nm-m+1} for m >= 2; a single variable gives q^N."""
    if m <= 1:
        return q**N if m == 1 else q
    s = len(compute_SQ(q, N)) if sq_size is None else sq_size
    return math.factorial(m) * s ** (m - 1) * q ** (N * m - m + 1) // 2


@dataclass
class Enumeration:
    q: int
    N: int
    m: int
    sequences: np.ndarray  # (count, N^m), rows sorted lexicographically
    generated: int
    predicted: int
    witness_perm: np.ndarray  # (count, m) permutation producing each row
    multiplicity: np.ndarray  # times each row was generated

    @property
    def count(self) -> int:
        return len(self.sequences)


def chain_tables(q: int, N: int, m: int, sq: Sequence[QuadraticTerm]) -> np.ndarray:
    """Tables of sum_k h_k(y_{k-1}, y_k) for every (h_1, ..., h_{m-1}) in sq^{m-1}."""
    Y = point_matrix(N, m)
    out = []
    for hs in itertools.product(sq, repeat=max(m - 1, 0)):
        acc = np.zeros(N**m, dtype=np.int64)
        for k, h in enumerate(hs, start=1):
            acc += h.table[Y[:, k - 1], Y[:, k]]
        out.append(acc % q)
    return np.array(out, dtype=np.int64).reshape(-1, N**m)


def _permute_tables(tables: np.ndarray, N: int, m: int, perm: Sequence[int]) -> np.ndarray:
    Y = point_matrix(N, m)
    src = Y[:, list(perm)] @ (N ** np.arange(m, dtype=np.int64))
    return tables[:, src]


def enumerate_S(
    q: int,
    N: int,
    m: int,
    guard: int | None = None,
    sq: Sequence[QuadraticTerm] | None = None,
    threads: int = 1,
) -> Enumeration:
    """All sequences pi . f for f a general form, deduplicated exactly.

    The sum of a permuted chain and a linear table is generated for every
    permutation, every quadratic chain and every element of S_L.
    """
    sq = compute_SQ(q, N) if sq is None else list(sq)
    guard = enumeration_guard() if guard is None else guard
    generated = math.factorial(m) * len(sq) ** max(m - 1, 0) * linear_space_size(q, N, m)
    if generated > guard:
        raise GuardExceeded(f"{generated} sequences would be generated, cap is {guard}")
    chains = chain_tables(q, N, m, sq)
    lin = linear_space(q, N, m)
    perms = list(itertools.permutations(range(m)))

    def block(perm):
        lead = _permute_tables(chains, N, m, perm)
        return ((lead[:, None, :] + lin[None, :, :]) % q).reshape(-1, N**m)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            blocks = list(ex.map(block, perms))
    else:
        blocks = [block(p) for p in perms]
    dtype = np.uint8 if q <= 256 else np.int64
    allrows = np.concatenate(blocks).astype(dtype)
    uniq, first, counts = np.unique(allrows, axis=0, return_index=True, return_counts=True)
    per_perm = len(chains) * len(lin)
    witness = np.array(perms, dtype=np.int64)[first // per_perm]
    return Enumeration(
        q, N, m, uniq.astype(np.int64), generated, predicted_count(q, N, m, len(sq)), witness, counts
    )


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


@dataclass
class SeedFamily:
    """A general-form array with its CCA grid.

    The complementary set is column 0 of the grid, {f + h(i, y_0)}, so the
    partners differ from f through the first variable of the chain.
    """

    f: QArray
    cca: FunctionMatrix
    perm: tuple[int, ...]
    boolean: bool = False

    @property
    def css(self) -> list[QArray]:
        return self.cca.column(0)

    def sequences(self):
        return [a.to_sequence() for a in self.css]


def seed_family(
    gf: GeneralForm,
    h_start: QuadraticTerm,
    h_end: QuadraticTerm | None = None,
    perm: Sequence[int] | None = None,
    boolean: bool = False,
) -> SeedFamily:
    """Grid f + h_start(i, y0) + h_end(y_{m-1}, j), then variables permuted by perm.

    With ``boolean`` the Z_{2^n} variables are split into little-endian bits.
    """
    for h in (h_start, h_end):
        if h is not None and not is_bh(PhaseMatrix.from_array(h.q, h.table)):
            raise ValueError("boundary terms must be Butson Hadamard tables")
    h_end = h_start.transpose() if h_end is None else h_end
    perm = tuple(range(gf.m)) if perm is None else check_permutation(perm, gf.m)
    f = assemble_general_form(gf)
    fm = function_matrix_from_general(f, h_start, h_end).permute_vars(perm)
    f = permute_vars(f, perm)
    if boolean:
        fm, f = fm.relabel_boolean(), f.relabel_boolean()
    return SeedFamily(f, fm, perm, boolean)


def _walsh_boundary(q: int, N: int) -> QuadraticTerm:
    n = N.bit_length() - 1
    return QuadraticTerm(q, walsh_kron_phase(q, n).array())


def named_construction(
    ident: int,
    m: int,
    *,
    q: int | None = None,
    perm: Sequence[int] | None = None,
    quadratic: Sequence | None = None,
    linear: np.ndarray | None = None,
    constant: int = 0,
    boundary: str = "walsh",
) -> SeedFamily:
    """The four seed constructions with their standard parameterizations.

    ident 1: q even, N = 2, chain (q/2) y_{k-1} y_k.
    ident 2: q = N = 3, ``quadratic`` lists multipliers d_k in {1, 2} of y_{k-1} y_k.
    ident 3: q = 2, N = 4, ``quadratic`` lists indices into the six binary classes.
    ident 4: q = 4, N = 4, ``quadratic`` lists (index, parameter) pairs of the
    quaternary classes; ``boundary`` picks the Walsh or Fourier boundary term.

    ``linear`` holds the coefficients of g_i(y_k), i >= 1, as an (m, N - 1)
    array.  Identities 3 and 4 return Boolean arrays over 2m variables.
    """
    if ident == 1:
        q = 2 if q is None else q
        if q % 2:
            raise ValueError("construction 1 needs even q")
        hs = [QuadraticTerm(q, [[0, 0], [0, q // 2]])] * (m - 1)
        gf = GeneralForm(q, 2, m, hs, linear, constant)
        return seed_family(gf, hs[0] if hs else QuadraticTerm(q, [[0, 0], [0, q // 2]]), perm=perm)
    if ident == 2:
        if q not in (None, 3):
            raise ValueError("construction 2 is ternary")
        ds = [1] * (m - 1) if quadratic is None else list(quadratic)
        if len(ds) != m - 1 or any(d not in (1, 2) for d in ds):
            raise ValueError("need m - 1 multipliers from {1, 2}")
        hs = [QuadraticTerm(3, np.outer(range(3), range(3)) * d) for d in ds]
        gf = GeneralForm(3, 3, m, hs, linear, constant)
        return seed_family(gf, QuadraticTerm(3, fourier_phase(3, 3).array()), perm=perm)
    if ident == 3:
        if q not in (None, 2):
            raise ValueError("construction 3 is binary")
        idx = [5] * (m - 1) if quadratic is None else list(quadratic)
        if len(idx) != m - 1 or any(i not in PHI_TERMS for i in idx):
            raise ValueError("need m - 1 class indices from 1..6")
        gf = GeneralForm(2, 4, m, [phi_term(i) for i in idx], linear, constant)
        return seed_family(gf, _walsh_boundary(2, 4), perm=perm, boolean=True)
    if ident == 4:
        if q not in (None, 4):
            raise ValueError("construction 4 is quaternary")
        pairs = [(1, 1)] * (m - 1) if quadratic is None else [tuple(p) for p in quadratic]
        if len(pairs) != m - 1:
            raise ValueError("need m - 1 (index, parameter) pairs")
        gf = GeneralForm(4, 4, m, [psi_term(i, a) for i, a in pairs], linear, constant)
        if boundary == "walsh":
            h = _walsh_boundary(4, 4)
        elif boundary == "fourier":
            h = QuadraticTerm(4, fourier_phase(4, 4).array())
        else:
            raise ValueError(f"unknown boundary {boundary!r}")
        return seed_family(gf, h, perm=perm, boolean=True)
    raise ValueError(f"unknown construction {ident}")
