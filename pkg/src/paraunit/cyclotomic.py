"""Exact arithmetic in Z[w] with w a primitive q-th root of unity.

Elements are stored as integer coefficient vectors modulo ``x^q - 1``.  Two
vectors denote the same element exactly when their difference is divisible by
the q-th cyclotomic polynomial.  All zero tests go through integer polynomial
division, never through floating point.

Array helpers at the bottom work on numpy arrays whose last axis has length q;
they are what the matrix and correlation code use in bulk.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

# exact float64 accumulation is safe below this magnitude
FLOAT_EXACT_LIMIT = 1 << 52
INT_LIMIT = 1 << 62


# ---------------------------------------------------------------------------
# integer polynomials (coefficient tuples, lowest degree first)
# ---------------------------------------------------------------------------


def _trim(coeffs: Sequence[int]) -> tuple[int, ...]:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class CycPoly:
    """Integer polynomial, coefficients listed from the constant term up."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _trim(int(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            mag = abs(c)
            body = str(mag) if (mag != 1 or k == 0) else ""
            sign = "-" if c < 0 else "+"
            parts.append((sign, body + mono))
        head_sign, head = parts[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, term in parts[1:]:
            out += f" {sign} {term}"
        return out


def poly_mul(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def poly_divmod(num: Sequence[int], den: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Quotient and remainder of integer polynomials; ``den`` must be monic."""
    den = _trim(den)
    if not den:
        raise ZeroDivisionError("division by the zero polynomial")
    if den[-1] != 1:
        raise ValueError("divisor must be monic for exact integer division")
    rem = list(_trim(num))
    dd = len(den) - 1
    if len(rem) - 1 < dd:
        return (), tuple(rem)
    quot = [0] * (len(rem) - dd)
    for k in range(len(rem) - 1, dd - 1, -1):
        c = rem[k]
        if c:
            quot[k - dd] = c
            for j in range(dd + 1):
                rem[k - dd + j] -= c * den[j]
    return _trim(quot), _trim(rem[:dd])


_phi_lock = threading.Lock()
_phi_cache: dict[int, tuple[int, ...]] = {}


def cyclotomic_polynomial(q: int) -> CycPoly:
    """The q-th cyclotomic polynomial, built from x^q - 1 by exact division."""
    if q < 1:
        raise ValueError("q must be positive")
    with _phi_lock:
        hit = _phi_cache.get(q)
    if hit is not None:
        return CycPoly(hit)
    num: tuple[int, ...] = (-1,) + (0,) * (q - 1) + (1,)
    for d in range(1, q):
        if q % d == 0:
            num, rem = poly_divmod(num, cyclotomic_polynomial(d).coeffs)
            assert not rem
    with _phi_lock:
        _phi_cache.setdefault(q, num)
    return CycPoly(num)


def euler_phi(q: int) -> int:
    return cyclotomic_polynomial(q).degree


# ---------------------------------------------------------------------------
# scalar elements
# ---------------------------------------------------------------------------


def _is_zero_coeffs(coeffs: Sequence[int], q: int) -> bool:
    _, rem = poly_divmod(coeffs, cyclotomic_polynomial(q).coeffs)
    return not rem


class CycInt:
    """An element of Z[w_q], kept as a length-q coefficient vector.

    Equality is ring equality, so ``CycInt.root(4, 0) + CycInt.root(4, 2)``
    equals zero even though its stored coefficients are not all zero.
    """

    __slots__ = ("q", "coeffs")

    def __init__(self, q: int, coeffs: Iterable[int]):
        if q < 1:
            raise ValueError("q must be positive")
        c = [0] * q
        for k, v in enumerate(coeffs):
            c[k % q] += int(v)
        self.q = q
        self.coeffs = tuple(c)

    @classmethod
    def zero(cls, q: int) -> CycInt:
        return cls(q, ())

    @classmethod
    def from_int(cls, q: int, n: int) -> CycInt:
        return cls(q, (n,))

    @classmethod
    def root(cls, q: int, k: int) -> CycInt:
        """w^k (k taken mod q)."""
        c = [0] * q
        c[k % q] = 1
        return cls(q, c)

    def _check(self, other: CycInt) -> None:
        if self.q != other.q:
            raise ValueError(f"mismatched root orders {self.q} and {other.q}")

    def _coerce(self, other) -> CycInt:
        if isinstance(other, CycInt):
            self._check(other)
            return other
        if isinstance(other, (int, np.integer)):
            return CycInt.from_int(self.q, int(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CycInt(self.q, (a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> CycInt:
        return CycInt(self.q, (-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CycInt(self.q, (a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        q = self.q
        out = [0] * q
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    if b:
                        out[(i + j) % q] += a * b
        return CycInt(q, out)

    __rmul__ = __mul__

    def conj(self) -> CycInt:
        """Complex conjugate: w^k maps to w^(-k)."""
        q = self.q
        return CycInt(q, (self.coeffs[(-k) % q] for k in range(q)))

    def is_zero(self) -> bool:
        return _is_zero_coeffs(self.coeffs, self.q)

    def canonical(self) -> tuple[int, ...]:
        """Remainder modulo the cyclotomic polynomial, padded to its degree."""
        _, rem = poly_divmod(self.coeffs, cyclotomic_polynomial(self.q).coeffs)
        return tuple(rem) + (0,) * (euler_phi(self.q) - len(rem))

    def __eq__(self, other) -> bool:
        o = self._coerce(other) if isinstance(other, (CycInt, int, np.integer)) else NotImplemented
        if o is NotImplemented:
            return NotImplemented
        return (self - o).is_zero()

    def __hash__(self) -> int:
        return hash((self.q, self.canonical()))

    def as_single_root(self) -> int | None:
        """k with self == w^k, or None if no such k exists."""
        target = self.canonical()
        for k in range(self.q):
            if root_remainders(self.q)[k] == target:
                return k
        return None

    def as_integer(self) -> int | None:
        """The rational integer equal to self, if there is one."""
        can = self.canonical()
        if all(c == 0 for c in can[1:]):
            return can[0]
        return None

    def to_complex(self) -> complex:
        q = self.q
        return complex(sum(c * np.exp(2j * np.pi * k / q) for k, c in enumerate(self.coeffs)))

    def __repr__(self) -> str:
        terms = [f"{c}*w^{k}" for k, c in enumerate(self.coeffs) if c]
        return f"CycInt(q={self.q}, {' + '.join(terms) or '0'})"


def make_root(q: int, k: int) -> CycInt:
    """w^k for a phase k in [0, q)."""
    if not 0 <= k < q:
        raise ValueError(f"phase {k} outside Z_{q}")
    return CycInt.root(q, k)


def is_zero(a: CycInt) -> bool:
    return a.is_zero()


def as_single_root(a: CycInt) -> int | None:
    return a.as_single_root()


# ---------------------------------------------------------------------------
# bulk helpers on arrays with a trailing axis of length q
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _reduction_matrix(q: int) -> np.ndarray:
    phi = cyclotomic_polynomial(q).coeffs
    deg = len(phi) - 1
    rows = []
    for k in range(q):
        _, rem = poly_divmod((0,) * k + (1,), phi)
        rows.append(list(rem) + [0] * (deg - len(rem)))
    mat = np.array(rows, dtype=np.int64).reshape(q, deg)
    mat.flags.writeable = False
    return mat


def reduction_matrix(q: int) -> np.ndarray:
    """Row k is the remainder of x^k modulo the q-th cyclotomic polynomial."""
    return _reduction_matrix(q)


@lru_cache(maxsize=None)
def root_remainders(q: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(v) for v in row) for row in _reduction_matrix(q))


def reduce_array(arr: np.ndarray, q: int) -> np.ndarray:
    """Map coefficient vectors (last axis, length q) to canonical remainders."""
    arr = np.asarray(arr)
    if arr.shape[-1] != q:
        raise ValueError("last axis must have length q")
    bound = int(np.abs(arr).max(initial=0)) * q * max(1, int(np.abs(_reduction_matrix(q)).max(initial=1)))
    if bound >= INT_LIMIT:
        raise OverflowError("coefficient magnitude too large for exact reduction")
    return arr.astype(np.int64) @ _reduction_matrix(q)


def zero_mask(arr: np.ndarray, q: int) -> np.ndarray:
    """Elementwise exact zero test over the leading axes."""
    return ~np.any(reduce_array(arr, q) != 0, axis=-1)


def root_phase_array(arr: np.ndarray, q: int) -> np.ndarray:
    """Elementwise k with element == w^k, or -1 where the element is not a root."""
    red = reduce_array(arr, q)
    roots = _reduction_matrix(q)
    hits = np.all(red[..., None, :] == roots, axis=-1)
    return np.where(hits.any(axis=-1), hits.argmax(axis=-1), -1)


def phases_to_array(phases: np.ndarray, q: int) -> np.ndarray:
    """One-hot coefficient vectors for an array of exponents."""
    phases = np.asarray(phases, dtype=np.int64) % q
    out = np.zeros(phases.shape + (q,), dtype=np.int64)
    np.put_along_axis(out, phases[..., None], 1, axis=-1)
    return out


def conj_array(arr: np.ndarray) -> np.ndarray:
    q = arr.shape[-1]
    return arr[..., (-np.arange(q)) % q]


def _check_bound(bound: int) -> bool:
    """True when float64 accumulation is exact, raise when int64 is not."""
    if bound < FLOAT_EXACT_LIMIT:
        return True
    if bound < INT_LIMIT:
        return False
    raise OverflowError(f"intermediate magnitude bound {bound} exceeds 2^62")


def cyc_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of (..., N, K, q) and (..., K, M, q) arrays in Z[w_q].

    Sums are accumulated exactly: through float64 when the magnitude bound
    allows it, through int64 otherwise, and an OverflowError is raised when
    neither is safe.
    """
    q = a.shape[-1]
    if b.shape[-1] != q:
        raise ValueError("mismatched root orders")
    kdim = a.shape[-2]
    bound = int(np.abs(a).max(initial=0)) * int(np.abs(b).max(initial=0)) * kdim * q
    use_float = _check_bound(bound)
    dtype = np.float64 if use_float else np.int64
    a_ = a.astype(dtype)
    # shifted[..., l, j, c, k] = b[..., l, j, (k - c) mod q]
    idx = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
    shifted = b.astype(dtype)[..., idx]
    out = np.einsum("...ilc,...ljck->...ijk", a_, shifted)
    if use_float:
        out = np.rint(out)
    return out.astype(np.int64)


def cyc_kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of (N1, M1, q) and (N2, M2, q) cyclotomic matrices."""
    q = a.shape[-1]
    n1, m1 = a.shape[:2]
    n2, m2 = b.shape[:2]
    bound = int(np.abs(a).max(initial=0)) * int(np.abs(b).max(initial=0)) * q
    _check_bound(bound)
    idx = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
    shifted = b.astype(np.int64)[..., idx]  # (n2, m2, c, k)
    out = np.einsum("ijc,uvck->iujvk", a.astype(np.int64), shifted)
    return out.reshape(n1 * n2, m1 * m2, q)
