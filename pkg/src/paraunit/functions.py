"""Functions from Z_p^m to Z_q, their sequences, and aperiodic correlations.

A :class:`QArray` stores its values in a flat table indexed by
``t = y_0 + y_1 p + ... + y_{m-1} p^{m-1}``, so the first variable changes
fastest.  Reading the table in order is the same thing as evaluating the array
to a length ``p^m`` sequence.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .cyclotomic import CycInt, zero_mask


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    arr.flags.writeable = False
    return arr


class QArray:
    """A function f: Z_p^m -> Z_q held as a flat value table."""

    __slots__ = ("q", "p", "m", "table")

    def __init__(self, q: int, p: int, m: int, table: Iterable[int]):
        if q < 1 or p < 1 or m < 0:
            raise ValueError("need q >= 1, p >= 1, m >= 0")
        tab = np.asarray(list(table) if not isinstance(table, np.ndarray) else table, dtype=np.int64).ravel()
        if tab.size != p**m:
            raise ValueError(f"table length {tab.size} != p^m = {p**m}")
        if tab.size and (tab.min() < 0 or tab.max() >= q):
            raise ValueError(f"table values must lie in [0, {q})")
        self.q, self.p, self.m = q, p, m
        self.table = _frozen(tab)

    @classmethod
    def from_grid(cls, q: int, grid: np.ndarray) -> QArray:
        """Build from an m-dimensional array indexed ``grid[y0, y1, ...]``."""
        grid = np.asarray(grid)
        p = grid.shape[0] if grid.ndim else 1
        if any(s != p for s in grid.shape):
            raise ValueError("all axes must share one length")
        return cls(q, p, grid.ndim, np.mod(grid, q).ravel(order="F"))

    @classmethod
    def from_function(cls, q: int, p: int, m: int, fn: Callable[[tuple[int, ...]], int]) -> QArray:
        vals = [int(fn(y)) % q for y in iter_points(p, m)]
        return cls(q, p, m, vals)

    @classmethod
    def constant(cls, q: int, p: int, m: int, value: int = 0) -> QArray:
        return cls(q, p, m, np.full(p**m, value % q))

    def grid(self) -> np.ndarray:
        """View as ``arr[y0, ..., y_{m-1}]``."""
        return self.table.reshape((self.p,) * self.m, order="F")

    def __call__(self, *y: int) -> int:
        if len(y) == 1 and isinstance(y[0], (tuple, list)):
            y = tuple(y[0])
        t = 0
        for k, yk in enumerate(y):
            t += int(yk) * self.p**k
        return int(self.table[t])

    def __len__(self) -> int:
        return self.table.size

    def _same_domain(self, other: QArray) -> None:
        if (self.q, self.p, self.m) != (other.q, other.p, other.m):
            raise ValueError("arrays have different shapes or alphabets")

    def __add__(self, other: QArray | int) -> QArray:
        if isinstance(other, QArray):
            self._same_domain(other)
            return QArray(self.q, self.p, self.m, (self.table + other.table) % self.q)
        return QArray(self.q, self.p, self.m, (self.table + int(other)) % self.q)

    __radd__ = __add__

    def __sub__(self, other: QArray | int) -> QArray:
        if isinstance(other, QArray):
            self._same_domain(other)
            return QArray(self.q, self.p, self.m, (self.table - other.table) % self.q)
        return QArray(self.q, self.p, self.m, (self.table - int(other)) % self.q)

    def __neg__(self) -> QArray:
        return QArray(self.q, self.p, self.m, (-self.table) % self.q)

    def scale(self, c: int) -> QArray:
        return QArray(self.q, self.p, self.m, (self.table * c) % self.q)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QArray):
            return NotImplemented
        return (self.q, self.p, self.m) == (other.q, other.p, other.m) and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.q, self.p, self.m, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"QArray(q={self.q}, p={self.p}, m={self.m}, table={self.table.tolist()})"

    def to_sequence(self) -> QSequence:
        return QSequence(self.q, self.table)

    def relabel_boolean(self) -> QArray:
        """Reinterpret Z_{2^n}^m as Z_2^{nm} via little-endian bits.

        Variable y_k splits into bits x_{kn}, ..., x_{kn+n-1}; the flat table is
        unchanged.
        """
        n = _log2_exact(self.p)
        return QArray(self.q, 2, self.m * n, self.table)

    def with_alphabet(self, p: int) -> QArray:
        """Reinterpret the flat table over Z_p^m' (p^m' must equal the size)."""
        m = 0
        while p**m < len(self):
            m += 1
        if p**m != len(self):
            raise ValueError(f"{len(self)} is not a power of {p}")
        return QArray(self.q, p, m, self.table)

    def to_json(self) -> dict:
        return {"q": self.q, "p": self.p, "m": self.m, "table": self.table.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> QArray:
        return cls(int(obj["q"]), int(obj["p"]), int(obj["m"]), obj["table"])


class QSequence:
    """A length-L sequence over Z_q."""

    __slots__ = ("q", "values")

    def __init__(self, q: int, values: Iterable[int]):
        vals = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.int64).ravel()
        if vals.size and (vals.min() < 0 or vals.max() >= q):
            raise ValueError(f"sequence values must lie in [0, {q})")
        self.q = q
        self.values = _frozen(vals)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSequence):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.q, self.values.tobytes()))

    def __repr__(self) -> str:
        return f"QSequence(q={self.q}, values={self.values.tolist()})"

    def as_array(self) -> QArray:
        return QArray(self.q, len(self), 1, self.values)

    def complex_values(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.values / self.q)


def _log2_exact(p: int) -> int:
    n = p.bit_length() - 1
    if p < 1 or (1 << n) != p:
        raise ValueError(f"{p} is not a power of two")
    return n


def iter_points(p: int, m: int):
    """All y in Z_p^m in table order (y_0 fastest)."""
    for rev in itertools.product(range(p), repeat=m):
        yield rev[::-1]


def evaluate_to_sequence(f: QArray) -> QSequence:
    return f.to_sequence()


def _as_array(f: QArray | QSequence) -> QArray:
    return f.as_array() if isinstance(f, QSequence) else f


# ---------------------------------------------------------------------------
# correlations
# ---------------------------------------------------------------------------


@dataclass
class CorrelationProfile:
    """Correlation values indexed by shift vectors."""

    q: int
    shifts: list[tuple[int, ...]]
    coeffs: np.ndarray  # (len(shifts), q) coefficient vectors
    _zero: np.ndarray = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self._zero = zero_mask(self.coeffs, self.q)

    def value(self, shift: Sequence[int]) -> CycInt:
        shift = tuple(shift)
        return CycInt(self.q, self.coeffs[self.shifts.index(shift)])

    def items(self):
        for s, c in zip(self.shifts, self.coeffs):
            yield s, CycInt(self.q, c)

    def zero_shifts(self) -> list[tuple[int, ...]]:
        return [s for s, z in zip(self.shifts, self._zero) if z]

    def vanishes_off_origin(self) -> bool:
        return all(z or not any(s) for s, z in zip(self.shifts, self._zero))

    def vanishes_everywhere(self) -> bool:
        return bool(self._zero.all())


def _stack(fs: Sequence[QArray | QSequence]) -> tuple[np.ndarray, int, int, int]:
    arrs = [_as_array(f) for f in fs]
    if not arrs:
        raise ValueError("empty family")
    q, p, m = arrs[0].q, arrs[0].p, arrs[0].m
    for a in arrs:
        if (a.q, a.p, a.m) != (q, p, m):
            raise ValueError("family members must share q, p and m")
    return np.stack([a.grid() for a in arrs]), q, p, m


def _set_correlation(g1: np.ndarray, g2: np.ndarray, q: int, p: int, m: int) -> CorrelationProfile:
    """Sum over members j of sum_y w^{f1_j(y + tau) - f2_j(y)} for every tau."""
    shifts = list(itertools.product(range(-p + 1, p), repeat=m))
    coeffs = np.zeros((len(shifts), q), dtype=np.int64)
    for idx, tau in enumerate(shifts):
        s1 = [slice(None)]
        s2 = [slice(None)]
        for t in tau:
            if t >= 0:
                s1.append(slice(t, p))
                s2.append(slice(0, p - t))
            else:
                s1.append(slice(0, p + t))
                s2.append(slice(-t, p))
        d = (g1[tuple(s1)] - g2[tuple(s2)]) % q
        coeffs[idx] = np.bincount(d.ravel(), minlength=q)
    return CorrelationProfile(q, shifts, coeffs)


def cross_correlation(f1: QArray | QSequence, f2: QArray | QSequence) -> CorrelationProfile:
    g, q, p, m = _stack([f1, f2])
    return _set_correlation(g[:1], g[1:], q, p, m)


def auto_correlation(f: QArray | QSequence) -> CorrelationProfile:
    return cross_correlation(f, f)


def set_auto_correlation(fs: Sequence[QArray | QSequence]) -> CorrelationProfile:
    g, q, p, m = _stack(fs)
    return _set_correlation(g, g, q, p, m)


def set_cross_correlation(fs1: Sequence[QArray | QSequence], fs2: Sequence[QArray | QSequence]) -> CorrelationProfile:
    if len(fs1) != len(fs2):
        raise ValueError("sets must have equal size")
    g, q, p, m = _stack(list(fs1) + list(fs2))
    n = len(fs1)
    return _set_correlation(g[:n], g[n:], q, p, m)


def is_cas(fs: Sequence[QArray]) -> bool:
    """Complementary array set: aperiodic autocorrelations sum to zero off the origin."""
    return set_auto_correlation(fs).vanishes_off_origin()


def is_css(fs: Sequence[QArray | QSequence]) -> bool:
    """Complementary sequence set (arrays are evaluated to sequences first)."""
    seqs = [f.to_sequence() if isinstance(f, QArray) else f for f in fs]
    return set_auto_correlation(seqs).vanishes_off_origin()


def are_mutually_orthogonal(fs1: Sequence[QArray | QSequence], fs2: Sequence[QArray | QSequence]) -> bool:
    return set_cross_correlation(fs1, fs2).vanishes_everywhere()


def is_ccc(grid: Sequence[Sequence[QArray | QSequence]], threads: int = 1) -> bool:
    """Complete complementary code: every row complementary, distinct rows orthogonal."""
    rows = [list(r) for r in grid]
    if not rows:
        return False
    if any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("ragged grid")
    g, q, p, m = _stack([f for r in rows for f in r])
    n, cols = len(rows), len(rows[0])
    g = g.reshape((n, cols) + g.shape[1:])

    def check(pair: tuple[int, int]) -> bool:
        r, s = pair
        prof = _set_correlation(g[r], g[s], q, p, m)
        return prof.vanishes_off_origin() if r == s else prof.vanishes_everywhere()

    pairs = [(r, s) for r in range(n) for s in range(r, n)]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            return all(ex.map(check, pairs))
    return all(check(pr) for pr in pairs)


# ---------------------------------------------------------------------------
# transformations
# ---------------------------------------------------------------------------


def inverse_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for k, v in enumerate(perm):
        inv[v] = k
    return tuple(inv)


def check_permutation(perm: Sequence[int], m: int) -> tuple[int, ...]:
    perm = tuple(int(v) for v in perm)
    if sorted(perm) != list(range(m)):
        raise ValueError(f"{perm} is not a permutation of 0..{m - 1}")
    return perm


def permute_vars(f: QArray, perm: Sequence[int]) -> QArray:
    """g(y_0, ..., y_{m-1}) = f(y_{perm[0]}, ..., y_{perm[m-1]})."""
    perm = check_permutation(perm, f.m)
    if f.m == 0:
        return f
    return QArray.from_grid(f.q, f.grid().transpose(inverse_permutation(perm)))


def apply_affine_offset(f: QArray, linear: Sequence[int], constant: int = 0) -> QArray:
    """f + sum_k linear[k] * x_k + constant (mod q) on a Boolean domain."""
    if f.p != 2:
        raise ValueError("affine offsets are defined for p = 2 only")
    if len(linear) != f.m:
        raise ValueError("need one linear coefficient per variable")
    return f + linear_form(f.q, f.p, linear, constant)


def linear_form(q: int, p: int, linear: Sequence[int], constant: int = 0) -> QArray:
    m = len(linear)
    ys = point_matrix(p, m)
    return QArray(q, p, m, (ys @ np.asarray(linear, dtype=np.int64) + constant) % q)


def point_matrix(p: int, m: int) -> np.ndarray:
    """Row t holds the coordinates y of the t-th table entry."""
    t = np.arange(p**m, dtype=np.int64)
    return np.stack([(t // p**k) % p for k in range(m)], axis=1) if m else np.zeros((1, 0), dtype=np.int64)


def variable(q: int, p: int, m: int, k: int) -> QArray:
    """The coordinate function y_k."""
    return QArray(q, p, m, point_matrix(p, m)[:, k] % q)


# ---------------------------------------------------------------------------
# Boolean-domain polynomials
# ---------------------------------------------------------------------------

Monomial = tuple[int, ...]


def from_terms(q: int, m: int, terms: Iterable[tuple[int, Monomial]] | dict) -> QArray:
    """Evaluate sum c * prod_{i in S} x_i over Z_2^m into a QArray."""
    if isinstance(terms, dict):
        terms = [(c, mono) for mono, c in terms.items()]
    xs = point_matrix(2, m)
    acc = np.zeros(2**m, dtype=np.int64)
    for c, mono in terms:
        mono = tuple(mono)
        if any(i < 0 or i >= m for i in mono):
            raise ValueError(f"monomial {mono} uses a variable outside 0..{m - 1}")
        acc += c * (xs[:, list(mono)].prod(axis=1) if mono else 1)
    return QArray(q, 2, m, acc % q)


def parse_poly(q: int, m: int, text: str) -> QArray:
    """Parse strings such as ``"x0x1 + 3x0x3 + 2x2 + 1"`` into a Boolean-domain QArray."""
    terms = []
    for raw in text.replace("-", "+-").split("+"):
        tok = raw.replace(" ", "").replace("*", "")
        if not tok:
            continue
        sign = 1
        if tok.startswith("-"):
            sign, tok = -1, tok[1:]
        head = ""
        while tok and tok[0].isdigit():
            head, tok = head + tok[0], tok[1:]
        coef = int(head) if head else 1
        mono = tuple(int(v) for v in tok.split("x")[1:]) if tok else ()
        if tok and not tok.startswith("x"):
            raise ValueError(f"cannot parse term {raw!r}")
        terms.append((sign * coef, mono))
    return from_terms(q, m, terms)


def anf(f: QArray) -> dict[Monomial, int]:
    """Coefficients of f as a multilinear polynomial over Z_q (Boolean domain)."""
    if f.p != 2:
        raise ValueError("algebraic normal form needs a Boolean domain")
    coef = f.table.copy()
    for k in range(f.m):
        step = 1 << k
        view = coef.reshape(-1, 2, step)
        view[:, 1, :] -= view[:, 0, :]
    coef %= f.q
    out = {}
    for t in np.nonzero(coef)[0]:
        out[tuple(k for k in range(f.m) if (t >> k) & 1)] = int(coef[t])
    return out


def format_anf(f: QArray) -> str:
    terms = sorted(anf(f).items(), key=lambda kv: (len(kv[0]), kv[0]))
    if not terms:
        return "0"
    parts = []
    for mono, c in terms:
        body = "".join(f"x{i}" for i in mono)
        parts.append((str(c) if c != 1 or not body else "") + body)
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# peak to mean envelope power
# ---------------------------------------------------------------------------


def pmepr(seq: QSequence | QArray, oversample: int = 64) -> float:
    """max_t |sum_k w^{a_k} e^{2 pi i k t}|^2 / L on a grid of oversample * L points."""
    if isinstance(seq, QArray):
        seq = seq.to_sequence()
    if oversample < 1:
        raise ValueError("oversample must be positive")
    L = len(seq)
    n = oversample * L
    spectrum = np.fft.ifft(seq.complex_values(), n) * n
    return float(np.max(np.abs(spectrum) ** 2) / L)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def write_sequences_csv(path, seqs: Sequence[QSequence], ids: Sequence[str] | None = None) -> None:
    ids = list(ids) if ids is not None else [str(k) for k in range(len(seqs))]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "q", "L", "values"])
        for ident, s in zip(ids, seqs):
            w.writerow([ident, s.q, len(s), ";".join(str(int(v)) for v in s.values)])


def read_sequences_csv(path) -> tuple[list[str], list[QSequence]]:
    ids, seqs = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals = [int(v) for v in row["values"].split(";") if v != ""]
            if len(vals) != int(row["L"]):
                raise ValueError(f"row {row['id']}: declared length {row['L']} but {len(vals)} values")
            ids.append(row["id"])
            seqs.append(QSequence(int(row["q"]), vals))
    return ids, seqs


def dump_array(f: QArray) -> str:
    return json.dumps(f.to_json())


def load_array(text: str) -> QArray:
    return QArray.from_json(json.loads(text))
