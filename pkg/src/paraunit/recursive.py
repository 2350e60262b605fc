"""Block compositions of desired para-unitary matrices.

Every builder comes in two forms: the explicit matrix product, and a closed
form that writes the entry functions straight from the entry functions of the
inputs.  Tests compare the two.

Variable blocks are laid out left to right, and the first block holds the
lowest-order table index.  Every builder names its blocks in a
:class:`BlockSpec`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .functions import QArray, check_permutation
from .hadamard import PhaseMatrix, is_bh, random_bh, walsh_kron_phase
from .polymatrix import FunctionMatrix, PolyMatrix
from .seedpu import SeedSpec, build_seed


@dataclass(frozen=True)
class BlockSpec:
    """Named, disjoint variable blocks of given widths, in layout order."""

    names: tuple[str, ...]
    widths: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.names) != len(self.widths) or len(set(self.names)) != len(self.names):
            raise ValueError("block names must be distinct, one per width")
        if any(w < 0 for w in self.widths):
            raise ValueError("block widths must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.widths)

    def offset(self, name: str) -> int:
        k = self.names.index(name)
        return sum(self.widths[:k])

    def positions(self, name: str) -> list[int]:
        start = self.offset(name)
        return list(range(start, start + self.widths[self.names.index(name)]))

    def embed(self, M: PolyMatrix, name: str) -> PolyMatrix:
        width = self.widths[self.names.index(name)]
        if M.m != width:
            raise ValueError(f"block {name!r} has width {width}, matrix uses {M.m} variables")
        return M.embed(self.total, self.positions(name))


def _check_order(M: PolyMatrix | FunctionMatrix, N: int, what: str) -> None:
    if M.N != N:
        raise ValueError(f"{what} must have order {N}, got {M.N}")


def _same_q(*ms) -> int:
    qs = {m.q for m in ms}
    if len(qs) != 1:
        raise ValueError(f"mixed root orders {sorted(qs)}")
    return qs.pop()


def _same_m(ms: Sequence, what: str) -> int:
    ws = {m.m for m in ms}
    if len(ws) != 1:
        raise ValueError(f"{what} must share one variable count")
    return ws.pop()


def _log2(N: int) -> int:
    n = N.bit_length() - 1
    if (1 << n) != N:
        raise ValueError(f"order {N} is not a power of two")
    return n


# ---------------------------------------------------------------------------
# order-2 seeds in normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Order2Seed:
    """Order-2 seed whose entry (i, j) is f + (q/2)(i x_{perm[0]} + j x_{perm[m-1]}).

    f = (q/2) sum_k x_{perm[k-1]} x_{perm[k]} + sum_k linear[k] x_k + constant.
    """

    q: int
    perm: tuple[int, ...]
    linear: tuple[int, ...] = ()
    constant: int = 0

    def __post_init__(self) -> None:
        if self.q % 2:
            raise ValueError("order-2 seeds need even q")
        object.__setattr__(self, "perm", check_permutation(self.perm, len(self.perm)))
        lin = tuple(self.linear) or (0,) * len(self.perm)
        if len(lin) != len(self.perm):
            raise ValueError("need one linear coefficient per variable")
        object.__setattr__(self, "linear", tuple(int(c) % self.q for c in lin))
        if not self.perm:
            raise ValueError("order-2 seeds need at least one variable")

    @property
    def m(self) -> int:
        return len(self.perm)

    def f(self) -> QArray:
        q, m, half = self.q, self.m, self.q // 2
        terms = [(half, (self.perm[k - 1], self.perm[k])) for k in range(1, m)]
        terms += [(c, (k,)) for k, c in enumerate(self.linear) if c]
        terms.append((self.constant, ()))
        from .functions import from_terms

        return from_terms(q, m, terms)

    def functions(self) -> FunctionMatrix:
        q, half = self.q, self.q // 2
        f = self.f().table
        from .functions import point_matrix

        X = point_matrix(2, self.m)
        first, last = X[:, self.perm[0]], X[:, self.perm[-1]]
        ph = np.empty((2, 2, f.size), dtype=np.int64)
        for i in range(2):
            for j in range(2):
                ph[i, j] = f + half * (i * first + j * last)
        return FunctionMatrix(q, 2, self.m, ph % q)

    def matrix(self) -> PolyMatrix:
        """Walsh seed, variables permuted, then the affine part twisted in."""
        walsh = PhaseMatrix(self.q, ((0, 0), (0, self.q // 2)))
        M = build_seed(SeedSpec(self.q, 2, self.m, (walsh,) * (self.m + 1)))
        return M.permute_vars(self.perm).affine_twist(self.linear, self.constant)

    @classmethod
    def random(cls, q: int, m: int, rng: np.random.Generator) -> Order2Seed:
        return cls(q, tuple(int(v) for v in rng.permutation(m)), tuple(int(v) for v in rng.integers(0, q, m)), int(rng.integers(q)))


# ---------------------------------------------------------------------------
# permutation matrices
# ---------------------------------------------------------------------------


def interleave_permutation(n: int, n_prime: int) -> list[int]:
    """sigma with P[u, sigma[u]] = 1: rotate the (n + n')-bit index left by n' bits."""
    width = n + n_prime
    mask = (1 << width) - 1
    return [((u << n_prime) | (u >> n)) & mask for u in range(1 << width)]


def interleave_P(n: int, n_prime: int = 1, q: int = 2, m: int = 0) -> PolyMatrix:
    if n < 1 or n_prime < 1:
        raise ValueError("need n >= 1 and n' >= 1")
    return PolyMatrix.permutation(q, interleave_permutation(n, n_prime), m)


def _conjugate_blocks(blocks: Sequence[PolyMatrix], n: int, n_prime: int) -> PolyMatrix:
    """P diag(blocks) P^T with 2^n blocks of order 2^{n'}."""
    D = PolyMatrix.block_diag(blocks)
    sigma = interleave_permutation(n, n_prime)
    # (P A P^T)[u, w] = A[sigma(u), sigma(w)]
    return D.permute_rows(sigma).permute_cols(sigma)


# ---------------------------------------------------------------------------
# two-sided composition A(z1) D(z0) B(z2)
# ---------------------------------------------------------------------------


def compose_ADB(A: PolyMatrix, B: PolyMatrix, n: int) -> PolyMatrix:
    """A(z1) D(z0) B(z2) over the layout (z0 | z1 | z2) with widths (n, A.m, B.m)."""
    q = _same_q(A, B)
    N = 1 << n
    _check_order(A, N, "A")
    _check_order(B, N, "B")
    layout = BlockSpec(("z0", "z1", "z2"), (n, A.m, B.m))
    D = PolyMatrix.delay(q, n, layout.total, offset=layout.offset("z0"))
    return layout.embed(A, "z1") @ D @ layout.embed(B, "z2")


def compose_ADB_functions(A: FunctionMatrix, B: FunctionMatrix) -> FunctionMatrix:
    """c_{r,s} = sum_i (a_{r,i}(x1) + b_{i,s}(x2)) g_i(x0)."""
    return theorem11_functions(A, [B])


# ---------------------------------------------------------------------------
# constant outer blocks: diag(H0, H1) P diag(U^j) P^T
# ---------------------------------------------------------------------------


def theorem8_matrix(H0: PhaseMatrix, H1: PhaseMatrix, U: Sequence[PolyMatrix]) -> PolyMatrix:
    """Order 2^{n+1}; H0, H1 of order 2^n, 2^n order-2 blocks U^j over shared variables."""
    q = _same_q(H0, H1, *U)
    m = _same_m(U, "U blocks")
    N = H0.N
    n = _log2(N)
    if H1.N != N or len(U) != N:
        raise ValueError(f"need two phase matrices of order {N} and {N} order-2 blocks")
    for h in (H0, H1):
        if not is_bh(h):
            raise ValueError("outer blocks must be Butson Hadamard")
    for u in U:
        _check_order(u, 2, "U block")
    left = PolyMatrix.block_diag([PolyMatrix.constant(q, H0.phases, m), PolyMatrix.constant(q, H1.phases, m)])
    return left @ _conjugate_blocks(U, n, 1)


def theorem8_functions(H0: PhaseMatrix, H1: PhaseMatrix, seeds: Sequence[Order2Seed]) -> FunctionMatrix:
    """Entry (a 2^n + i, b 2^n + j) = f^j + (q/2) a x_{pi_j(0)} + (q/2) b x_{pi_j(m-1)} + H^a[i, j]."""
    return corollary7_functions(_constant_fm(H0), _constant_fm(H1), seeds)


def _constant_fm(H: PhaseMatrix) -> FunctionMatrix:
    return FunctionMatrix(H.q, 2, 0, H.array()[:, :, None])


# ---------------------------------------------------------------------------
# polynomial outer blocks: diag(V0, V1) P diag(U^j) P^T
# ---------------------------------------------------------------------------


def corollary7_matrix(V0: PolyMatrix, V1: PolyMatrix, U: Sequence[PolyMatrix]) -> PolyMatrix:
    """Layout (z0 | z1): U blocks over z0, V blocks over z1."""
    return theorem10_matrix(U, [V0, V1])


def corollary7_functions(V0: FunctionMatrix, V1: FunctionMatrix, seeds: Sequence[Order2Seed]) -> FunctionMatrix:
    """Entry (a 2^n + i, b 2^n + j) = f^j(x0) + (q/2) a x_{pi_j(0)} + (q/2) b x_{pi_j(m-1)} + V^a_{i,j}(x1)."""
    q = _same_q(V0, V1, *seeds)
    N = V0.N
    if V1.N != N or len(seeds) != N:
        raise ValueError(f"need {N} seeds and two order-{N} blocks")
    if V0.m != V1.m:
        raise ValueError("V blocks must share variables")
    m = seeds[0].m
    if any(s.m != m for s in seeds):
        raise ValueError("seeds must share variables")
    U = np.stack([s.functions().phases for s in seeds])  # (j, a, b, t0)
    V = np.stack([V0.phases, V1.phases])  # (a, i, j, t1)
    return _theorem10_combine(q, U, V, m, V0.m)


# ---------------------------------------------------------------------------
# doubled delay: G(z0) diag(D(z1), D(z1)) diag(H2, H3)
# ---------------------------------------------------------------------------


def theorem9_matrix(G: PolyMatrix, H2: PhaseMatrix, H3: PhaseMatrix) -> PolyMatrix:
    """Layout (z0 | z1) with widths (G.m, n), order 2^{n+1}."""
    q = _same_q(G, H2, H3)
    N = H2.N
    n = _log2(N)
    _check_order(G, 2 * N, "G")
    if H3.N != N or not is_bh(H2) or not is_bh(H3):
        raise ValueError("H2, H3 must be Butson Hadamard of the half order")
    layout = BlockSpec(("z0", "z1"), (G.m, n))
    D = PolyMatrix.delay(q, n, layout.total, offset=layout.offset("z1"))
    DD = PolyMatrix.block_diag([D, D])
    HH = PolyMatrix.block_diag([PolyMatrix.constant(q, H2.phases, layout.total), PolyMatrix.constant(q, H3.phases, layout.total)])
    return layout.embed(G, "z0") @ DD @ HH


def theorem9_functions_from(G: FunctionMatrix, H2: PhaseMatrix, H3: PhaseMatrix) -> FunctionMatrix:
    """Entry (u, b 2^n + j) = sum_i (G_{u, b 2^n + i}(x0) + H^{b+2}[i, j]) g_i(x1)."""
    q = _same_q(G, H2, H3)
    N = H2.N
    Garr = G.phases.reshape(2 * N, 2, N, -1)  # (u, b, x1, t0)
    Harr = np.stack([H2.array(), H3.array()])  # (b, x1, j)
    out = Garr[:, :, None, :, :] + Harr.transpose(0, 2, 1)[None, :, :, :, None]  # (u, b, j, x1, t0)
    return FunctionMatrix(q, 2, G.m + _log2(N), out.reshape(2 * N, 2 * N, -1) % q)


def theorem9_functions(
    H: Sequence[PhaseMatrix], seeds: Sequence[Order2Seed]
) -> FunctionMatrix:
    """Entry (a 2^n + l, b 2^n + j) = sum_i (f^i + (q/2) a x_{pi_i(0)} + (q/2) b x_{pi_i(m-1)}
    + H0or1[l, i] + H2or3[i, j]) g_i(x1), with H = (H0, H1, H2, H3)."""
    if len(H) != 4:
        raise ValueError("need four phase matrices")
    q = _same_q(*H, *seeds)
    N = H[0].N
    n = _log2(N)
    m = seeds[0].m
    half = q // 2
    fs = np.stack([s.f().table for s in seeds])  # (i, t0)
    from .functions import point_matrix

    X = point_matrix(2, m)
    first = np.stack([X[:, s.perm[0]] for s in seeds])  # (i, t0)
    last = np.stack([X[:, s.perm[-1]] for s in seeds])
    a = np.arange(2)
    inner = (
        fs[None, None, :, :]
        + half * a[:, None, None, None] * first[None, None, :, :]
        + half * a[None, :, None, None] * last[None, None, :, :]
    )  # (a, b, i, t0)
    Hab = np.stack([H[0].array(), H[1].array()])  # (a, l, i)
    Hcd = np.stack([H[2].array(), H[3].array()])  # (b, i, j)
    # out[a, l, b, j, i(=x1), t0]
    out = (
        inner[:, None, :, None, :, :]
        + Hab[:, :, None, None, :, None]
        + Hcd.transpose(0, 2, 1)[None, None, :, :, :, None]
    )
    return FunctionMatrix(q, 2, m + n, out.reshape(2 * N, 2 * N, -1) % q)


def walsh_identity_offsets(f: QArray, n: int, m: int) -> FunctionMatrix:
    """Grid f + (q/2)(l . x1 + j . x1 + a x_0 + b x_{m-1}) on the layout (x0 | x1).

    This is the Walsh-boundary, identity-permutation special case of the
    doubled-delay entries, with u = a 2^n + l and v = b 2^n + j.
    """
    from .functions import point_matrix

    q, half, N = f.q, f.q // 2, 1 << n
    X = point_matrix(2, m + n)
    bits = X[:, m:]  # x1 block
    idx = np.arange(N)
    dots = np.array([[(bits * ((i >> np.arange(n)) & 1)).sum(axis=1) for i in idx]])[0]  # (i, t)
    a = np.arange(2)
    row = half * (a[:, None, None] * X[None, None, :, 0] + dots[None, :, :])  # (a, l, t)
    col = half * (a[:, None, None] * X[None, None, :, m - 1] + dots[None, :, :])  # (b, j, t)
    out = f.table[None, None, None, None, :] + row[:, :, None, None, :] + col[None, None, :, :, :]
    return FunctionMatrix(q, 2, m + n, out.reshape(2 * N, 2 * N, -1) % q)


def corollary4_array(seeds: Sequence[Order2Seed]) -> QArray:
    """f(x0, x1) = sum_i f^i(x0) g_i(x1)."""
    q = _same_q(*seeds)
    n = _log2(len(seeds))
    fs = np.stack([s.f().table for s in seeds])  # (x1, t0)
    return QArray(q, 2, seeds[0].m + n, fs.reshape(-1))


# ---------------------------------------------------------------------------
# interleaved pair: diag(V^a) P diag(U^j) P^T
# ---------------------------------------------------------------------------


def theorem10_matrix(U: Sequence[PolyMatrix], V: Sequence[PolyMatrix]) -> PolyMatrix:
    """2^n blocks U^j of order 2^{n'} over z0 and 2^{n'} blocks V^a of order 2^n over z1."""
    q = _same_q(*U, *V)
    n, n_prime = _log2(len(U)), _log2(len(V))
    mu, mv = _same_m(U, "U blocks"), _same_m(V, "V blocks")
    for u in U:
        _check_order(u, 1 << n_prime, "U block")
    for v in V:
        _check_order(v, 1 << n, "V block")
    if n_prime == 0:
        raise ValueError("need at least two V blocks")
    layout = BlockSpec(("z0", "z1"), (mu, mv))
    left = PolyMatrix.block_diag([layout.embed(v, "z1") for v in V])
    return left @ _conjugate_blocks([layout.embed(u, "z0") for u in U], n, n_prime)


def _theorem10_combine(q: int, U: np.ndarray, V: np.ndarray, mu: int, mv: int) -> FunctionMatrix:
    # U: (j, a, b, t0), V: (a, i, j, t1); entry (a 2^n + i, b 2^n + j) = U[j, a, b] + V[a, i, j]
    Na, Nn = V.shape[0], V.shape[1]
    Ub = U.transpose(1, 2, 0, 3)  # (a, b, j, t0)
    out = Ub[:, None, :, :, None, :] + V[:, :, None, :, :, None]  # (a, i, b, j, t1, t0)
    N = Na * Nn
    return FunctionMatrix(q, 2, mu + mv, out.reshape(N, N, -1) % q)


def theorem10_functions(U: Sequence[FunctionMatrix], V: Sequence[FunctionMatrix]) -> FunctionMatrix:
    """Entry (a 2^n + i, b 2^n + j) = U^j_{a,b}(x0) + V^a_{i,j}(x1)."""
    q = _same_q(*U, *V)
    return _theorem10_combine(
        q, np.stack([u.phases for u in U]), np.stack([v.phases for v in V]), U[0].m, V[0].m
    )


# ---------------------------------------------------------------------------
# delayed block stack: V(z1) diag(D(z0), ...) diag(U^b(z2))
# ---------------------------------------------------------------------------


def theorem11_matrix(V: PolyMatrix, U: Sequence[PolyMatrix]) -> PolyMatrix:
    """Layout (z0 | z1 | z2) with widths (n, V.m, U.m); V has order 2^{n+n'}, 2^{n'} blocks U^b of order 2^n."""
    q = _same_q(V, *U)
    n_prime = _log2(len(U))
    mu = _same_m(U, "U blocks")
    n = _log2(V.N) - n_prime
    if n < 0:
        raise ValueError("V is smaller than the number of U blocks")
    for u in U:
        _check_order(u, 1 << n, "U block")
    layout = BlockSpec(("z0", "z1", "z2"), (n, V.m, mu))
    D = PolyMatrix.delay(q, n, layout.total, offset=0)
    return (
        layout.embed(V, "z1")
        @ PolyMatrix.block_diag([D] * len(U))
        @ PolyMatrix.block_diag([layout.embed(u, "z2") for u in U])
    )


def theorem11_functions(V: FunctionMatrix, U: Sequence[FunctionMatrix]) -> FunctionMatrix:
    """Entry (u, b 2^n + j) = sum_i (V_{u, b 2^n + i}(x1) + U^b_{i,j}(x2)) g_i(x0)."""
    q = _same_q(V, *U)
    Nb = len(U)
    Nn = U[0].N
    n = _log2(Nn)
    N = V.N
    if N != Nb * Nn:
        raise ValueError("V order must be the number of U blocks times their order")
    Varr = V.phases.reshape(N, Nb, Nn, -1)  # (u, b, x0, t1)
    Uarr = np.stack([u.phases for u in U])  # (b, x0, j, t2)
    out = Varr.transpose(0, 1, 3, 2)[:, :, None, None, :, :] + Uarr.transpose(0, 2, 3, 1)[None, :, :, :, None, :]
    # out axes: (u, b, j, t2, t1, x0)
    return FunctionMatrix(q, 2, n + V.m + U[0].m, out.reshape(N, N, -1) % q)


# ---------------------------------------------------------------------------
# random desired matrices for testing and exploration
# ---------------------------------------------------------------------------


def random_desired(q: int, n: int, m: int, rng: np.random.Generator) -> PolyMatrix:
    """A random desired PU matrix of order 2^n over m Boolean variables.

    Built as a Kronecker product of n order-2 seeds on disjoint variable
    subsets, with variables, rows and columns shuffled and an affine twist.
    """
    if q % 2:
        raise ValueError("order-2 building blocks need even q")
    cuts = np.sort(rng.integers(0, m + 1, size=max(n - 1, 0)))
    sizes = np.diff(np.concatenate([[0], cuts, [m]])).tolist() if n else [m]
    if n == 0:
        if m:
            raise ValueError("a 1 x 1 desired matrix over variables is not supported here")
        return PolyMatrix.constant(q, [[int(rng.integers(q))]], 0)
    M = None
    at = 0
    for size in sizes:
        if size:
            hs = tuple(random_bh(q, 2, rng) for _ in range(size + 1))
            block = build_seed(SeedSpec(q, 2, size, hs))
        else:
            block = PolyMatrix.constant(q, random_bh(q, 2, rng).phases, 0)
        block = block.embed(m, list(range(at, at + size)))
        at += size
        M = block if M is None else M.kron(block)
    M = M.permute_vars([int(v) for v in rng.permutation(m)]) if m else M
    M = M.permute_rows([int(v) for v in rng.permutation(M.N)]).permute_cols([int(v) for v in rng.permutation(M.N)])
    return M.affine_twist([int(v) for v in rng.integers(0, q, m)], int(rng.integers(q)))


def random_bh_pow2(q: int, n: int, rng: np.random.Generator) -> PhaseMatrix:
    """Random Butson matrix of order 2^n: catalog class when one exists, else Walsh-type."""
    try:
        return random_bh(q, 1 << n, rng)
    except ValueError:
        base = walsh_kron_phase(q, n)
        N = base.N
        return base.permuted(rng.permutation(N), rng.permutation(N)).twisted(rng.integers(0, q, N), rng.integers(0, q, N))


# ---------------------------------------------------------------------------
# worked reconstructions
# ---------------------------------------------------------------------------

CORNER_FUNCTION = "x0x1 + x0x4 + x1x4 + x2x4 + x3x4"

# Top row of the order-4 block over (x1, x3, x4), indexed by g_i(x0, x2).
CORNER_ROW = (
    "x0x2 + x1x2",
    "x0x2 + x1x2 + x0 + x2",
    "x0x2 + x1x2 + x2",
    "x0x2 + x1x2 + x0",
)


@dataclass
class Reconstruction:
    matrix: PolyMatrix
    functions: FunctionMatrix
    inner: PolyMatrix
    layout: BlockSpec = field(default_factory=lambda: BlockSpec(("z0", "z1", "z2"), (2, 3, 0)))

    @property
    def f(self) -> QArray:
        return self.functions.entry(0, 0)

    @property
    def cas(self) -> list[QArray]:
        return self.functions.row(0)


def corner_reconstruction() -> Reconstruction:
    """Rebuild x0x1 + x0x4 + x1x4 + x2x4 + x3x4 as the corner of an order-4 desired matrix.

    The inner order-4 matrix comes from two order-2 seeds over three
    variables, and its top row is CORNER_ROW.  A single delay block over
    (x0, x2) and a constant Walsh block finish the composition.
    """
    q = 2
    walsh = PhaseMatrix(q, ((0, 0), (0, 1)))
    seeds = [Order2Seed(q, (1, 2, 0)), Order2Seed(q, (1, 2, 0), (1, 0, 1))]
    inner = theorem8_matrix(walsh, walsh, [s.matrix() for s in seeds]).permute_cols([0, 1, 3, 2])
    outer = PolyMatrix.constant(q, walsh_kron_phase(q, 2).phases, 0)
    M = theorem11_matrix(inner, [outer]).permute_vars([0, 2, 1, 3, 4])
    return Reconstruction(M, M.extract_function_matrix(), inner)


# ---------------------------------------------------------------------------
# JSON plans
# ---------------------------------------------------------------------------

PLAN_OPS = (
    "phase", "walsh", "fourier", "catalog", "matrix", "seed", "genseed", "order2",
    "adb", "theorem8", "theorem9", "theorem10", "theorem11", "corollary7",
    "kron", "permute_vars", "permute_rows", "permute_cols", "twist", "corner",
)


class PlanError(ValueError):
    """Malformed composition plan."""


def _as_phase(obj, where: str) -> PhaseMatrix:
    if isinstance(obj, PhaseMatrix):
        return obj
    if isinstance(obj, PolyMatrix) and obj.m == 0:
        fm = obj.extract_function_matrix()
        return PhaseMatrix.from_array(obj.q, fm.phases[:, :, 0])
    raise PlanError(f"{where}: expected a constant Butson matrix")


def _as_poly(obj) -> PolyMatrix:
    if isinstance(obj, PhaseMatrix):
        return PolyMatrix.constant(obj.q, obj.phases, 0)
    return obj


def evaluate_plan(node: dict, q: int | None = None):
    """Evaluate a plan tree into a PolyMatrix (or a PhaseMatrix for leaf phase nodes).

    Each node is an object with an ``op`` key from PLAN_OPS.  A ``q`` given
    on an outer node is inherited by its children.
    """
    from .genseed import GenSeedSpec, build_generalized_seed
    from .hadamard import catalog, fourier_phase

    if not isinstance(node, dict) or "op" not in node:
        raise PlanError(f"plan node must be an object with an 'op' key, got {node!r}")
    op = node["op"]
    q = int(node.get("q", q)) if node.get("q", q) is not None else None

    def need_q() -> int:
        if q is None:
            raise PlanError(f"{op}: no q given here or on an enclosing node")
        return q

    def sub(key):
        if key not in node:
            raise PlanError(f"{op}: missing {key!r}")
        return evaluate_plan(node[key], q)

    def subs(key):
        items = node.get(key)
        if not isinstance(items, list) or not items:
            raise PlanError(f"{op}: {key!r} must be a non-empty list")
        return [evaluate_plan(x, q) for x in items]

    try:
        if op == "phase":
            return PhaseMatrix.from_array(need_q(), node["phases"])
        if op == "walsh":
            return walsh_kron_phase(need_q(), int(node.get("n", 1)))
        if op == "fourier":
            return fourier_phase(need_q(), int(node["N"]))
        if op == "catalog":
            return catalog(need_q(), int(node["N"]))[int(node.get("index", 0))]
        if op == "matrix":
            return PolyMatrix.from_json(node["json"])
        if op == "seed":
            hs = [_as_phase(h, op) for h in subs("hs")]
            return build_seed(SeedSpec(need_q(), hs[0].N, len(hs) - 1, hs))
        if op == "genseed":
            hs = [_as_phase(h, op) for h in subs("hs")]
            n = _log2(hs[0].N)
            return build_generalized_seed(GenSeedSpec(need_q(), n, len(hs) - 1, hs))
        if op == "order2":
            perm = node["perm"]
            return Order2Seed(need_q(), perm, node.get("linear", ()), int(node.get("constant", 0))).matrix()
        if op == "adb":
            return compose_ADB(_as_poly(sub("A")), _as_poly(sub("B")), int(node["n"]))
        if op == "theorem8":
            return theorem8_matrix(_as_phase(sub("H0"), op), _as_phase(sub("H1"), op), [_as_poly(u) for u in subs("U")])
        if op == "theorem9":
            return theorem9_matrix(_as_poly(sub("G")), _as_phase(sub("H2"), op), _as_phase(sub("H3"), op))
        if op == "theorem10":
            return theorem10_matrix([_as_poly(u) for u in subs("U")], [_as_poly(v) for v in subs("V")])
        if op == "theorem11":
            return theorem11_matrix(_as_poly(sub("V")), [_as_poly(u) for u in subs("U")])
        if op == "corollary7":
            return corollary7_matrix(_as_poly(sub("V0")), _as_poly(sub("V1")), [_as_poly(u) for u in subs("U")])
        if op == "kron":
            left, right = _as_poly(sub("left")), _as_poly(sub("right"))
            total = left.m + right.m
            return left.embed(total, list(range(left.m))).kron(right.embed(total, list(range(left.m, total))))
        if op == "permute_vars":
            return _as_poly(sub("of")).permute_vars(node["perm"])
        if op == "permute_rows":
            return _as_poly(sub("of")).permute_rows(node["perm"])
        if op == "permute_cols":
            return _as_poly(sub("of")).permute_cols(node["perm"])
        if op == "twist":
            M = _as_poly(sub("of"))
            return M.affine_twist(node.get("linear", [0] * M.m), int(node.get("constant", 0)))
        if op == "corner":
            return corner_reconstruction().matrix
    except PlanError:
        raise
    except KeyError as exc:
        raise PlanError(f"{op}: missing field {exc}") from None
    except (ValueError, TypeError, IndexError) as exc:
        raise PlanError(f"{op}: {exc}") from None
    raise PlanError(f"unknown op {op!r}; expected one of {', '.join(PLAN_OPS)}")
