"""Seeds of order 2^n over Boolean variables.

Each Z_{2^n} variable y_k of an ordinary seed is replaced by n Boolean
variables through a generalized delay, y_k = sum_v x_{kn+v} 2^v.  The entry
functions are the ordinary seed functions read over Z_2^{mn}, and permuting
the mn Boolean variables gives much larger families.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .functions import QArray, check_permutation, from_terms, permute_vars, point_matrix
from .hadamard import PhaseMatrix, is_bh
from .polymatrix import FunctionMatrix, PolyMatrix
from .seedpu import (
    Enumeration,
    GeneralForm,
    GuardExceeded,
    QuadraticTerm,
    SeedFamily,
    SeedSpec,
    assemble_general_form,
    chain_tables,
    compute_SQ,
    enumeration_guard,
    function_matrix_from_general,
    linear_space,
    linear_space_size,
    seed_functions,
)


@dataclass(frozen=True)
class GenSeedSpec:
    q: int
    n: int
    m: int
    hs: tuple[PhaseMatrix, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "hs", tuple(self.hs))
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if len(self.hs) != self.m + 1:
            raise ValueError(f"need m + 1 = {self.m + 1} phase matrices")
        for k, h in enumerate(self.hs):
            if h.q != self.q or h.N != 1 << self.n:
                raise ValueError(f"phase matrix {k} must have q={self.q} and order {1 << self.n}")
            if not is_bh(h):
                raise ValueError(f"phase matrix {k} is not Butson Hadamard")

    @property
    def N(self) -> int:
        return 1 << self.n

    def as_seed(self) -> SeedSpec:
        return SeedSpec(self.q, self.N, self.m, self.hs)


def generalized_delay(q: int, n: int, block: int = 0, total: int | None = None) -> PolyMatrix:
    """diag over y of prod_v z_{block*n + v}^{bit v of y}."""
    total = (block + 1) * n if total is None else total
    return PolyMatrix.delay(q, n, total, offset=block * n)


def build_generalized_seed(spec: GenSeedSpec) -> PolyMatrix:
    q, n, m = spec.q, spec.n, spec.m
    total = m * n
    M = PolyMatrix.constant(q, spec.hs[0].phases, total)
    for k in range(m):
        M = M @ generalized_delay(q, n, k, total) @ PolyMatrix.constant(q, spec.hs[k + 1].phases, total)
    return M


def generalized_seed_functions(spec: GenSeedSpec) -> FunctionMatrix:
    """Closed-form entry functions over Z_2^{mn} (little-endian bit blocks)."""
    return seed_functions(spec.as_seed()).relabel_boolean()


def univariate_weights(perm: Sequence[int]) -> list[int]:
    """Weights 2^{perm[t]} for the substitution z_t = Z^{2^{perm[t]}}."""
    return [1 << p for p in perm]


# ---------------------------------------------------------------------------
# permutation-enlarged families
# ---------------------------------------------------------------------------


def theorem7_families(
    source: GenSeedSpec | tuple[GeneralForm, QuadraticTerm, QuadraticTerm],
    perm: Sequence[int],
) -> SeedFamily:
    """Complementary code and set after permuting all mn Boolean variables.

    ``source`` is either a generalized seed, whose own entry functions form the
    grid, or a general form over Z_{2^n}^m with boundary terms.
    """
    if isinstance(source, GenSeedSpec):
        fm = generalized_seed_functions(source)
        f = fm.entry(0, 0)
    else:
        gf, h, h_end = source
        n = gf.N.bit_length() - 1
        if gf.N != 1 << n:
            raise ValueError("alphabet size must be a power of two")
        base = assemble_general_form(gf)
        fm = function_matrix_from_general(base, h, h_end).relabel_boolean()
        f = base.relabel_boolean()
    perm = check_permutation(perm, fm.m)
    return SeedFamily(permute_vars(f, perm), fm.permute_vars(perm), perm, boolean=True)


# Diagonal offset sets over a pair of Boolean variables (x, y), q = 4.
CONSTRUCTION6_OFFSETS: dict[int, list[list[tuple[int, tuple[int, ...]]]]] = {
    1: [[], [(2, (0,))], [(2, (1,))], [(2, (0,)), (2, (1,))]],
    2: [[], [(2, (0,)), (1, (1,))], [(2, (1,))], [(2, (0,)), (3, (1,))]],
    3: [
        [],
        [(3, (0,)), (1, (1,)), (2, (0, 1))],
        [(2, (0,)), (2, (1,))],
        [(1, (0,)), (3, (1,)), (2, (0, 1))],
    ],
}


def construction6_cosets(f: QArray, variant: int, perm: Sequence[int] | None = None) -> list[QArray]:
    """f plus each offset of the chosen set, placed on (x_{perm[0]}, x_{perm[1]})."""
    if variant not in CONSTRUCTION6_OFFSETS:
        raise ValueError(f"variant must be 1, 2 or 3, got {variant}")
    if f.q != 4 or f.p != 2 or f.m < 2:
        raise ValueError("needs a quaternary Boolean-domain array with at least two variables")
    perm = tuple(range(f.m)) if perm is None else check_permutation(perm, f.m)
    a, b = perm[0], perm[1]
    out = []
    for terms in CONSTRUCTION6_OFFSETS[variant]:
        placed = [(c, tuple((a, b)[v] for v in mono)) for c, mono in terms]
        out.append(f + from_terms(4, f.m, placed))
    return out


def distinct_tables(arrays: Sequence[QArray]) -> np.ndarray:
    """Exact dedup of value tables, rows in lexicographic order."""
    return np.unique(np.stack([a.table for a in arrays]), axis=0)


def enumerate_boolean_family(
    q: int, n: int, m: int, guard: int | None = None, sq: Sequence[QuadraticTerm] | None = None
) -> Enumeration:
    """All pi . f with f a general form over Z_{2^n}^m and pi any permutation of the mn bits.

    Used to measure how many distinct sequences the bit-level permutations add.
    """
    N = 1 << n
    sq = compute_SQ(q, N) if sq is None else list(sq)
    guard = enumeration_guard() if guard is None else guard
    total = m * n
    generated = math.factorial(total) * len(sq) ** max(m - 1, 0) * linear_space_size(q, N, m)
    if generated > guard:
        raise GuardExceeded(f"{generated} sequences would be generated, cap is {guard}")
    base = (chain_tables(q, N, m, sq)[:, None, :] + linear_space(q, N, m)[None, :, :]) % q
    base = np.unique(base.reshape(-1, N**m), axis=0)
    pts = point_matrix(2, total)
    weights = 2 ** np.arange(total, dtype=np.int64)
    blocks, perms = [], list(itertools.permutations(range(total)))
    for p in perms:
        blocks.append(base[:, pts[:, list(p)] @ weights])
    allrows = np.concatenate(blocks).astype(np.uint8 if q <= 256 else np.int64)
    uniq, first, counts = np.unique(allrows, axis=0, return_index=True, return_counts=True)
    witness = np.array(perms, dtype=np.int64)[first // len(base)]
    return Enumeration(q, 2, total, uniq.astype(np.int64), generated, -1, witness, counts)
