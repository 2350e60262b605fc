"""Multivariate polynomial matrices with coefficients in Z[w_q].

A :class:`PolyMatrix` maps exponent tuples to N x N coefficient matrices, each
stored as an int64 array of shape (N, N, q).  A matrix is "desired" when every
entry is a polynomial whose coefficients are all q-th roots of unity; its
exponents then index the domain of a :class:`FunctionMatrix`.
"""

from __future__ import annotations

import itertools
import json
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cyclotomic import (
    FLOAT_EXACT_LIMIT,
    INT_LIMIT,
    CycInt,
    phases_to_array,
    reduce_array,
    root_phase_array,
    zero_mask,
)
from .functions import QArray, check_permutation, is_ccc, point_matrix

Exponent = tuple[int, ...]


class NotDesiredError(ValueError):
    """Raised when a coefficient is not a single root of unity."""


def _exact_dtype(bound: int):
    if bound < FLOAT_EXACT_LIMIT:
        return np.float64
    if bound < INT_LIMIT:
        return np.int64
    raise OverflowError(f"intermediate magnitude bound {bound} exceeds 2^62")


def _finish(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == np.float64:
        arr = np.rint(arr)
    return arr.astype(np.int64)


class PolyMatrix:
    """Sum over exponents e of K_e z^e, with K_e an N x N matrix over Z[w_q]."""

    __slots__ = ("q", "N", "m", "coeffs", "_dense")

    def __init__(self, q: int, N: int, m: int, coeffs: Mapping[Sequence[int], np.ndarray]):
        self.q, self.N, self.m = q, N, m
        clean: dict[Exponent, np.ndarray] = {}
        for exp, mat in coeffs.items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != m or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent {exp} for {m} variables")
            mat = np.asarray(mat, dtype=np.int64)
            if mat.shape != (N, N, q):
                raise ValueError(f"coefficient at {exp} has shape {mat.shape}, expected {(N, N, q)}")
            if exp in clean:
                mat = clean[exp] + mat
            clean[exp] = mat
        for exp in [e for e, mat in clean.items() if zero_mask(mat, q).all()]:
            del clean[exp]
        for mat in clean.values():
            mat.flags.writeable = False
        self.coeffs = dict(sorted(clean.items()))
        self._dense = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, q: int, phases: Sequence[Sequence[int]], m: int = 0) -> PolyMatrix:
        """Constant matrix with entries w^phases[i][j]."""
        ph = np.asarray(phases, dtype=np.int64)
        return cls(q, ph.shape[0], m, {(0,) * m: phases_to_array(ph, q)})

    @classmethod
    def identity(cls, q: int, N: int, m: int = 0) -> PolyMatrix:
        mat = np.zeros((N, N, q), dtype=np.int64)
        mat[np.arange(N), np.arange(N), 0] = 1
        return cls(q, N, m, {(0,) * m: mat})

    @classmethod
    def permutation(cls, q: int, perm: Sequence[int], m: int = 0) -> PolyMatrix:
        """Matrix with a one at (i, perm[i])."""
        N = len(perm)
        check_permutation(perm, N)
        mat = np.zeros((N, N, q), dtype=np.int64)
        mat[np.arange(N), list(perm), 0] = 1
        return cls(q, N, m, {(0,) * m: mat})

    @classmethod
    def delay(cls, q: int, n: int, m: int | None = None, offset: int = 0) -> PolyMatrix:
        """Diagonal matrix with entry i equal to prod_k z_{offset+k}^{bit k of i}.

        With n = 1 this is diag(1, z).  The default variable count is n.
        """
        m = n if m is None else m
        if offset + n > m:
            raise ValueError("delay variables exceed the declared arity")
        N = 1 << n
        coeffs = {}
        for i in range(N):
            exp = [0] * m
            for k in range(n):
                exp[offset + k] = (i >> k) & 1
            mat = np.zeros((N, N, q), dtype=np.int64)
            mat[i, i, 0] = 1
            coeffs[tuple(exp)] = mat
        return cls(q, N, m, coeffs)

    @classmethod
    def block_diag(cls, blocks: Sequence[PolyMatrix]) -> PolyMatrix:
        q, m = blocks[0].q, blocks[0].m
        if any(b.q != q or b.m != m for b in blocks):
            raise ValueError("blocks must share q and variable arity")
        N = sum(b.N for b in blocks)
        coeffs: dict[Exponent, np.ndarray] = {}
        at = 0
        for b in blocks:
            for exp, mat in b.coeffs.items():
                tgt = coeffs.setdefault(exp, np.zeros((N, N, q), dtype=np.int64))
                tgt[at : at + b.N, at : at + b.N] += mat
            at += b.N
        return cls(q, N, m, coeffs)

    @classmethod
    def from_functions(cls, fm: FunctionMatrix) -> PolyMatrix:
        return fm.to_polymatrix()

    # -- structure --------------------------------------------------------

    def support(self) -> list[Exponent]:
        return list(self.coeffs)

    def degrees(self) -> tuple[int, ...]:
        if not self.coeffs:
            return (0,) * self.m
        return tuple(int(v) for v in np.max(np.array(list(self.coeffs)), axis=0)) if self.m else ()

    def coefficient(self, exp: Sequence[int]) -> np.ndarray:
        return self.coeffs.get(tuple(exp), np.zeros((self.N, self.N, self.q), dtype=np.int64))

    def entry_coefficient(self, i: int, j: int, exp: Sequence[int]) -> CycInt:
        return CycInt(self.q, self.coefficient(exp)[i, j])

    def dense(self, box: Sequence[int] | None = None) -> np.ndarray:
        """Coefficients laid out as array[e_0, ..., e_{m-1}, i, j, :]."""
        if box is None and self._dense is not None:
            return self._dense
        dims = tuple(d + 1 for d in self.degrees()) if box is None else tuple(box)
        out = np.zeros(dims + (self.N, self.N, self.q), dtype=np.int64)
        for exp, mat in self.coeffs.items():
            if any(e >= d for e, d in zip(exp, dims)):
                raise ValueError(f"exponent {exp} outside box {dims}")
            out[exp] = mat
        if box is None:
            self._dense = out
        return out

    def max_abs(self) -> int:
        return max((int(np.abs(v).max()) for v in self.coeffs.values()), default=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if (self.q, self.N, self.m) != (other.q, other.N, other.m):
            return False
        diff = (self - other)
        return not diff.coeffs

    def __sub__(self, other: PolyMatrix) -> PolyMatrix:
        self._compatible(other)
        coeffs = {e: m.copy() for e, m in self.coeffs.items()}
        for e, m in other.coeffs.items():
            coeffs[e] = coeffs.get(e, 0) - m
        return PolyMatrix(self.q, self.N, self.m, coeffs)

    def __add__(self, other: PolyMatrix) -> PolyMatrix:
        self._compatible(other)
        coeffs = {e: m.copy() for e, m in self.coeffs.items()}
        for e, m in other.coeffs.items():
            coeffs[e] = coeffs.get(e, 0) + m
        return PolyMatrix(self.q, self.N, self.m, coeffs)

    def _compatible(self, other: PolyMatrix) -> None:
        if self.q != other.q:
            raise ValueError(f"mismatched root orders {self.q} and {other.q}")
        if self.m != other.m:
            raise ValueError(f"mismatched variable arity {self.m} and {other.m}")
        if self.N != other.N:
            raise ValueError(f"mismatched orders {self.N} and {other.N}")

    def __repr__(self) -> str:
        return f"PolyMatrix(q={self.q}, N={self.N}, m={self.m}, terms={len(self.coeffs)})"

    # -- algebra ----------------------------------------------------------

    def __matmul__(self, other: PolyMatrix) -> PolyMatrix:
        return matmul(self, other)

    def kron(self, other: PolyMatrix) -> PolyMatrix:
        return kronecker(self, other)

    def embed(self, total: int, positions: Sequence[int]) -> PolyMatrix:
        """Rename variable k to variable positions[k] in a space of ``total`` variables."""
        if len(positions) != self.m or len(set(positions)) != self.m:
            raise ValueError("positions must list distinct targets, one per variable")
        coeffs = {}
        for exp, mat in self.coeffs.items():
            new = [0] * total
            for k, pos in enumerate(positions):
                new[pos] = exp[k]
            coeffs[tuple(new)] = mat
        return PolyMatrix(self.q, self.N, total, coeffs)

    def permute_vars(self, perm: Sequence[int]) -> PolyMatrix:
        """Each entry function f becomes f(y_{perm[0]}, ..., y_{perm[m-1]})."""
        perm = check_permutation(perm, self.m)
        coeffs = {}
        for w, mat in self.coeffs.items():
            y = [0] * self.m
            for k in range(self.m):
                y[perm[k]] = w[k]
            coeffs[tuple(y)] = mat
        return PolyMatrix(self.q, self.N, self.m, coeffs)

    def affine_twist(self, linear: Sequence[int], constant: int = 0) -> PolyMatrix:
        """Multiply the coefficient at exponent e by w^{linear . e + constant}.

        On a desired matrix this adds the same affine function to every entry.
        """
        if len(linear) != self.m:
            raise ValueError("need one coefficient per variable")
        coeffs = {}
        for exp, mat in self.coeffs.items():
            s = (sum(c * e for c, e in zip(linear, exp)) + constant) % self.q
            coeffs[exp] = np.roll(mat, s, axis=-1)
        return PolyMatrix(self.q, self.N, self.m, coeffs)

    def permute_rows(self, perm: Sequence[int]) -> PolyMatrix:
        """Row i of the result is row perm[i] of self."""
        check_permutation(perm, self.N)
        return PolyMatrix(self.q, self.N, self.m, {e: mat[list(perm)] for e, mat in self.coeffs.items()})

    def permute_cols(self, perm: Sequence[int]) -> PolyMatrix:
        """Column j of the result is column perm[j] of self."""
        check_permutation(perm, self.N)
        return PolyMatrix(self.q, self.N, self.m, {e: mat[:, list(perm)] for e, mat in self.coeffs.items()})

    def restrict_univariate(self, weights: Sequence[int]) -> PolyMatrix:
        """Substitute z_t = Z^{weights[t]}."""
        if len(weights) != self.m:
            raise ValueError("need one weight per variable")
        coeffs: dict[Exponent, np.ndarray] = {}
        for exp, mat in self.coeffs.items():
            key = (sum(w * e for w, e in zip(weights, exp)),)
            coeffs[key] = coeffs.get(key, 0) + mat
        return PolyMatrix(self.q, self.N, 1, coeffs)

    # -- predicates -------------------------------------------------------

    def is_paraunitary(self):
        """Exact test of M(z) M(z)^dagger = c I on the torus.

        Returns the constant c (an int when it is a rational integer, a CycInt
        otherwise) or None when the identity fails.
        """
        return is_paraunitary(self)

    def extract_function_matrix(self, p: int = 2) -> FunctionMatrix:
        return extract_function_matrix(self, p)

    def is_desired(self, p: int = 2) -> bool:
        try:
            extract_function_matrix(self, p)
        except NotDesiredError:
            return False
        return True

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for exp, mat in self.coeffs.items():
            ph = root_phase_array(mat, self.q)
            zero = zero_mask(mat, self.q)
            rows = []
            for i in range(self.N):
                row = []
                for j in range(self.N):
                    if ph[i, j] >= 0:
                        row.append(int(ph[i, j]))
                    elif zero[i, j]:
                        row.append("zero-sum")
                    else:
                        row.append({"cyc": mat[i, j].tolist()})
                rows.append(row)
            terms.append({"exp": list(exp), "matrix": rows})
        return {"q": self.q, "N": self.N, "m": self.m, "coeffs": terms}

    @classmethod
    def from_json(cls, obj: dict) -> PolyMatrix:
        q, N, m = int(obj["q"]), int(obj["N"]), int(obj["m"])
        coeffs = {}
        for term in obj["coeffs"]:
            mat = np.zeros((N, N, q), dtype=np.int64)
            for i, row in enumerate(term["matrix"]):
                for j, val in enumerate(row):
                    if val == "zero-sum":
                        continue
                    if isinstance(val, dict):
                        mat[i, j] = CycInt(q, val["cyc"]).coeffs
                    else:
                        mat[i, j, int(val) % q] = 1
            coeffs[tuple(term["exp"])] = coeffs.get(tuple(term["exp"]), 0) + mat
        return cls(q, N, m, coeffs)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------


def _roll_stack(arr: np.ndarray, dtype) -> np.ndarray:
    """out[c, ..., k] = arr[..., (k - c) mod q]."""
    q = arr.shape[-1]
    idx = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
    return np.moveaxis(arr.astype(dtype)[..., idx], -2, 0)


def matmul(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    """Product of two polynomial matrices on the same variable set."""
    a._compatible(b)
    q, N, m = a.q, a.N, a.m
    if not a.coeffs or not b.coeffs:
        return PolyMatrix(q, N, m, {})
    db = b.degrees()
    bdense = b.dense()  # (box_b..., N, N, q)
    bound = a.max_abs() * b.max_abs() * N * q * len(a.coeffs)
    dtype = _exact_dtype(bound)
    box = tuple(x + y + 1 for x, y in zip(a.degrees(), db))
    out = np.zeros(box + (N, N, q), dtype=dtype)
    # rolled[c, y..., l, j, k] = b[y..., l, j, (k - c) mod q]
    rolled = _roll_stack(bdense, dtype)
    ybox = bdense.shape[:m]
    # move l first: (c, l, y..., j, k) -> (c*l, rest)
    rl = np.moveaxis(rolled, 1 + m, 1).reshape(q * N, -1)
    for exp, mat in a.coeffs.items():
        amat = mat.astype(dtype).transpose(0, 2, 1).reshape(N, q * N)  # (i, (c, l))
        prod = (amat @ rl).reshape((N,) + ybox + (N, q))
        prod = np.moveaxis(prod, 0, m)  # (y..., i, j, k)
        sl = tuple(slice(e, e + d + 1) for e, d in zip(exp, db))
        out[sl] += prod
    out = _finish(out)
    coeffs = {}
    for exp in itertools.product(*(range(d) for d in box)):
        mat = out[exp]
        if mat.any():
            coeffs[exp] = mat
    return PolyMatrix(q, N, m, coeffs)


def kronecker(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    """Kronecker product; both factors use the same variable set."""
    if a.q != b.q or a.m != b.m:
        raise ValueError("kronecker factors must share q and variable arity")
    q = a.q
    bound = a.max_abs() * b.max_abs() * q * min(len(a.coeffs), len(b.coeffs))
    _exact_dtype(bound)
    idx = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
    coeffs: dict[Exponent, np.ndarray] = {}
    for ea, ma in a.coeffs.items():
        for eb, mb in b.coeffs.items():
            prod = np.einsum("ijc,uvck->iujvk", ma, mb[..., idx]).reshape(a.N * b.N, a.N * b.N, q)
            key = tuple(x + y for x, y in zip(ea, eb))
            coeffs[key] = coeffs.get(key, 0) + prod
    return PolyMatrix(q, a.N * b.N, a.m, coeffs)


def is_paraunitary(M: PolyMatrix):
    """Check sum_y K_{y+tau} K_y^dagger = c I delta_tau exactly.

    Returns c (int or CycInt) on success and None otherwise.
    """
    q, N, m = M.q, M.N, M.m
    if not M.coeffs:
        return None
    dense = M.dense()
    box = dense.shape[:m]
    bound = M.max_abs() ** 2 * N * q * max(1, int(np.prod(box)))
    dtype = _exact_dtype(bound)
    work = dense.astype(dtype)
    # conj-transposed coefficient blocks rolled by every k:
    # partner[k, y..., j, l, a] = K_y[j, l, (a - k) mod q]
    partner = _roll_stack(work, dtype)
    zero_shift = (0,) * m
    const = None
    for tau in itertools.product(*(range(-d + 1, d) for d in box)):
        # the value at -tau is the conjugate transpose of the value at tau
        if tau < zero_shift:
            continue
        s1, s2 = [], []
        for t, d in zip(tau, box):
            if t >= 0:
                s1.append(slice(t, d))
                s2.append(slice(0, d - t))
            else:
                s1.append(slice(0, d + t))
                s2.append(slice(-t, d))
        x = work[tuple(s1)]  # (y..., i, l, a)
        z = partner[(slice(None),) + tuple(s2)]  # (k, y..., j, l, a)
        xm = np.moveaxis(x, m, 0).reshape(N, -1)
        zm = np.moveaxis(z, m + 1, 1).reshape(q * N, -1)
        acc = _finish(xm @ zm.T).reshape(N, q, N).transpose(0, 2, 1)  # (i, j, k)
        red = reduce_array(acc, q)
        if tau != zero_shift:
            if red.any():
                return None
            continue
        off = red.copy()
        off[np.arange(N), np.arange(N)] = 0
        if off.any():
            return None
        diag = red[np.arange(N), np.arange(N)]
        if (diag != diag[0]).any():
            return None
        const = diag[0]
    if const is None:
        return None
    if not const[1:].any():
        return int(const[0])
    return CycInt(q, list(const) + [0] * (q - len(const)))


# ---------------------------------------------------------------------------
# function matrices
# ---------------------------------------------------------------------------


class FunctionMatrix:
    """Grid of functions Z_p^m -> Z_q; the phase form of a desired matrix."""

    __slots__ = ("q", "N", "p", "m", "phases")

    def __init__(self, q: int, p: int, m: int, phases: np.ndarray):
        """``phases[i, j]`` is the flat value table of entry (i, j)."""
        ph = np.asarray(phases, dtype=np.int64)
        if ph.ndim != 3 or ph.shape[0] != ph.shape[1] or ph.shape[2] != p**m:
            raise ValueError(f"phase block has shape {ph.shape}")
        if ph.size and (ph.min() < 0 or ph.max() >= q):
            raise ValueError("phases must lie in [0, q)")
        self.q, self.N, self.p, self.m = q, ph.shape[0], p, m
        ph = np.ascontiguousarray(ph)
        ph.flags.writeable = False
        self.phases = ph

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[QArray]]) -> FunctionMatrix:
        first = entries[0][0]
        tabs = [[f.table for f in row] for row in entries]
        for row in entries:
            for f in row:
                if (f.q, f.p, f.m) != (first.q, first.p, first.m):
                    raise ValueError("entries must share q, p and m")
        return cls(first.q, first.p, first.m, np.array(tabs))

    def entry(self, i: int, j: int) -> QArray:
        return QArray(self.q, self.p, self.m, self.phases[i, j])

    def row(self, i: int) -> list[QArray]:
        return [self.entry(i, j) for j in range(self.N)]

    def column(self, j: int) -> list[QArray]:
        return [self.entry(i, j) for i in range(self.N)]

    def entries(self) -> list[list[QArray]]:
        return [self.row(i) for i in range(self.N)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FunctionMatrix):
            return NotImplemented
        return (self.q, self.p, self.m) == (other.q, other.p, other.m) and np.array_equal(self.phases, other.phases)

    def __repr__(self) -> str:
        return f"FunctionMatrix(q={self.q}, N={self.N}, p={self.p}, m={self.m})"

    def to_polymatrix(self) -> PolyMatrix:
        coeffs = {}
        for t in range(self.p**self.m):
            exp = tuple((t // self.p**k) % self.p for k in range(self.m))
            coeffs[exp] = phases_to_array(self.phases[:, :, t], self.q)
        return PolyMatrix(self.q, self.N, self.m, coeffs)

    def permute_vars(self, perm: Sequence[int]) -> FunctionMatrix:
        perm = check_permutation(perm, self.m)
        pts = point_matrix(self.p, self.m)
        src = pts[:, list(perm)] @ (self.p ** np.arange(self.m, dtype=np.int64))
        return FunctionMatrix(self.q, self.p, self.m, self.phases[:, :, src])

    def relabel_boolean(self) -> FunctionMatrix:
        n = self.p.bit_length() - 1
        if (1 << n) != self.p:
            raise ValueError("alphabet size is not a power of two")
        return FunctionMatrix(self.q, 2, self.m * n, self.phases)

    def add_offsets(self, row_offsets: Sequence[QArray] | None = None, col_offsets: Sequence[QArray] | None = None) -> FunctionMatrix:
        ph = self.phases.copy()
        if row_offsets is not None:
            ph += np.stack([f.table for f in row_offsets])[:, None, :]
        if col_offsets is not None:
            ph += np.stack([f.table for f in col_offsets])[None, :, :]
        return FunctionMatrix(self.q, self.p, self.m, ph % self.q)

    def is_cca(self, threads: int = 1) -> bool:
        """Rows form a complete complementary code of arrays."""
        return is_ccc(self.entries(), threads=threads)

    def to_json(self) -> dict:
        return {"q": self.q, "N": self.N, "p": self.p, "m": self.m, "phases": self.phases.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> FunctionMatrix:
        return cls(int(obj["q"]), int(obj["p"]), int(obj["m"]), np.array(obj["phases"]))


def extract_function_matrix(M: PolyMatrix, p: int = 2) -> FunctionMatrix:
    """Read off phase tables; raises NotDesiredError naming the first bad coefficient."""
    if any(d >= p for d in M.degrees()):
        raise NotDesiredError(f"degree {max(M.degrees())} does not fit alphabet size {p}")
    dense = M.dense(box=(p,) * M.m)  # (y..., i, j, q)
    ph = root_phase_array(dense, M.q)  # (y..., i, j)
    bad = np.argwhere(ph < 0)
    if bad.size:
        loc = bad[0]
        y, (i, j) = tuple(int(v) for v in loc[: M.m]), (int(loc[M.m]), int(loc[M.m + 1]))
        raise NotDesiredError(f"entry ({i}, {j}) coefficient at exponent {y} is not a root of unity")
    # flat index has y_0 fastest, so put y_{m-1} first before a C-order reshape
    order = (M.m, M.m + 1) + tuple(range(M.m - 1, -1, -1))
    return FunctionMatrix(M.q, p, M.m, ph.transpose(order).reshape(M.N, M.N, -1))
