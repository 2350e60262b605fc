import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paraunit.functions import (
    QArray,
    apply_affine_offset,
    format_anf,
    is_cas,
    is_ccc,
    parse_poly,
    pmepr,
)
from paraunit.hadamard import PhaseMatrix, walsh_kron_phase
from paraunit.polymatrix import FunctionMatrix, PolyMatrix
from paraunit.recursive import (
    CORNER_FUNCTION,
    CORNER_ROW,
    BlockSpec,
    Order2Seed,
    PlanError,
    compose_ADB,
    compose_ADB_functions,
    corner_reconstruction,
    corollary4_array,
    corollary7_functions,
    corollary7_matrix,
    evaluate_plan,
    interleave_P,
    interleave_permutation,
    random_bh_pow2,
    random_desired,
    theorem8_functions,
    theorem8_matrix,
    theorem9_functions,
    theorem9_functions_from,
    theorem9_matrix,
    theorem10_functions,
    theorem10_matrix,
    theorem11_functions,
    theorem11_matrix,
    walsh_identity_offsets,
)
from paraunit.seedpu import SeedSpec, build_seed

SEEDS = st.integers(0, 10**6)


def fm(M):
    return M.extract_function_matrix(2)


def grid_sequences(f):
    return [[a.to_sequence() for a in row] for row in f.entries()]


# -- permutation matrix ------------------------------------------------------


def test_interleave_positions_order_eight():
    P = interleave_P(2, 1)
    ones = {(u, v) for u in range(8) for v in range(8) if P.entry_coefficient(u, v, ()).as_integer() == 1}
    assert ones == {(0, 0), (1, 2), (2, 4), (3, 6), (4, 1), (5, 3), (6, 5), (7, 7)}


@pytest.mark.parametrize("n, n_prime", [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)])
def test_interleave_is_orthogonal_rotation(n, n_prime):
    P = interleave_P(n, n_prime)
    Pt = PolyMatrix.permutation(2, np.argsort(interleave_permutation(n, n_prime)).tolist())
    assert P @ Pt == PolyMatrix.identity(2, 1 << (n + n_prime))
    width, mod = n + n_prime, (1 << (n + n_prime)) - 1
    for u, v in enumerate(interleave_permutation(n, n_prime)):
        assert v == ((u << n_prime) % mod if u != mod else mod)


def test_interleave_preconditions():
    with pytest.raises(ValueError):
        interleave_P(0, 1)


def test_conjugation_deinterleaves_blocks(rng):
    n = 2
    U = [random_desired(2, 1, 2, rng) for _ in range(4)]
    P = interleave_P(n, 1, m=2)
    Pt = PolyMatrix.permutation(2, np.argsort(interleave_permutation(n, 1)).tolist(), 2)
    G = P @ PolyMatrix.block_diag(U) @ Pt
    for a, i, b, j in itertools.product(range(2), range(4), range(2), range(4)):
        for e in itertools.product(range(2), repeat=2):
            want = U[j].coefficient(e)[a, b] if i == j else np.zeros(2, dtype=np.int64)
            assert np.array_equal(G.coefficient(e)[a * 4 + i, b * 4 + j], want)


# -- block specs and order-2 seeds -------------------------------------------


def test_block_spec():
    spec = BlockSpec(("z0", "z1"), (2, 3))
    assert spec.total == 5 and spec.positions("z1") == [2, 3, 4]
    with pytest.raises(ValueError):
        BlockSpec(("a", "a"), (1, 1))
    with pytest.raises(ValueError):
        spec.embed(PolyMatrix.delay(2, 1), "z1")


@given(st.sampled_from([2, 4, 6]), st.integers(1, 4), SEEDS)
def test_order2_seed_matrix_matches_functions(q, m, seed):
    s = Order2Seed.random(q, m, np.random.default_rng(seed))
    M = s.matrix()
    assert M.is_paraunitary() == 2 ** (m + 1)
    assert fm(M) == s.functions()


def test_order2_seed_needs_even_q():
    with pytest.raises(ValueError):
        Order2Seed(3, (0,))


@given(st.sampled_from([2, 4]), st.integers(0, 2), st.integers(0, 4), SEEDS)
def test_random_desired_is_desired(q, n, m, seed):
    if n == 0:
        m = 0
    M = random_desired(q, n, m, np.random.default_rng(seed))
    assert M.is_paraunitary() is not None
    assert M.is_desired()


# -- composition A D B -------------------------------------------------------


def test_adb_two_by_two_instance():
    A = FunctionMatrix.from_entries([[parse_poly(2, 1, t) for t in r] for r in (("0", "1 + x0"), ("x0", "1"))])
    B = FunctionMatrix.from_entries([[parse_poly(2, 1, t) for t in r] for r in (("0", "x0"), ("x0", "0"))])
    C = compose_ADB(A.to_polymatrix(), B.to_polymatrix(), 1)
    got = [[format_anf(f) for f in row] for row in fm(C).entries()]
    want = [["x0 + x0x1 + x0x2", "x0 + x2 + x0x1 + x0x2"], ["x0 + x1 + x0x1 + x0x2", "x0 + x1 + x2 + x0x1 + x0x2"]]
    assert got == [[format_anf(parse_poly(2, 3, t)) for t in row] for row in want]
    assert compose_ADB_functions(A, B) == fm(C)


def test_adb_with_walsh_is_the_seed():
    W = PolyMatrix.constant(2, ((0, 0), (0, 1)))
    w = PhaseMatrix(2, ((0, 0), (0, 1)))
    assert compose_ADB(W, W, 1) == build_seed(SeedSpec(2, 2, 1, [w, w]))


def test_adb_order_mismatch():
    with pytest.raises(ValueError):
        compose_ADB(PolyMatrix.constant(2, ((0, 0), (0, 1))), PolyMatrix.constant(2, walsh_kron_phase(2, 2).phases), 1)


@given(st.sampled_from([2, 4]), st.integers(1, 2), st.integers(0, 2), st.integers(0, 2), SEEDS)
def test_adb_closed_form(q, n, m1, m2, seed):
    rng = np.random.default_rng(seed)
    A, B = random_desired(q, n, max(m1, n), rng), random_desired(q, n, m2 + n, rng)
    C = compose_ADB(A, B, n)
    assert C.is_paraunitary() is not None
    assert fm(C) == compose_ADB_functions(fm(A), fm(B))


# -- outer constant / polynomial blocks --------------------------------------


def test_theorem8_walsh_blocks_entry_layout(rng):
    H = walsh_kron_phase(2, 2)
    U = [random_desired(2, 1, 2, rng) for _ in range(4)]
    G = fm(theorem8_matrix(H, H, U))
    parts = [fm(u) for u in U]
    for a, i, b, j in itertools.product(range(2), range(4), range(2), range(4)):
        want = (parts[j].phases[a, b] + H[i, j]) % 2
        assert np.array_equal(G.phases[a * 4 + i, b * 4 + j], want)


def test_theorem8_small_instance_is_complete(rng):
    w = PhaseMatrix(2, ((0, 0), (0, 1)))
    seeds = [Order2Seed.random(2, 2, rng) for _ in range(2)]
    G = theorem8_matrix(w, w, [s.matrix() for s in seeds])
    assert G.is_paraunitary() == 2 * 8
    assert is_ccc(grid_sequences(fm(G)))


@given(st.sampled_from([2, 4]), st.integers(1, 2), st.integers(1, 3), SEEDS)
def test_theorem8_closed_form(q, n, m, seed):
    rng = np.random.default_rng(seed)
    H0, H1 = random_bh_pow2(q, n, rng), random_bh_pow2(q, n, rng)
    seeds = [Order2Seed.random(q, m, rng) for _ in range(1 << n)]
    G = theorem8_matrix(H0, H1, [s.matrix() for s in seeds])
    assert G.is_paraunitary() is not None
    assert fm(G) == theorem8_functions(H0, H1, seeds)


def test_theorem8_shape_errors(rng):
    w = PhaseMatrix(2, ((0, 0), (0, 1)))
    with pytest.raises(ValueError):
        theorem8_matrix(w, w, [Order2Seed.random(2, 2, rng).matrix()])


def test_corollary7_with_constant_blocks_is_theorem8(rng):
    H0, H1 = random_bh_pow2(4, 1, rng), random_bh_pow2(4, 1, rng)
    seeds = [Order2Seed.random(4, 2, rng) for _ in range(2)]
    U = [s.matrix() for s in seeds]
    V0, V1 = PolyMatrix.constant(4, H0.phases), PolyMatrix.constant(4, H1.phases)
    assert corollary7_matrix(V0, V1, U) == theorem8_matrix(H0, H1, U)


@given(st.sampled_from([2, 4]), st.integers(1, 2), st.integers(1, 2), st.integers(0, 2), SEEDS)
def test_corollary7_closed_form(q, n, m, mv, seed):
    rng = np.random.default_rng(seed)
    V0, V1 = random_desired(q, n, max(mv, n), rng), random_desired(q, n, max(mv, n), rng)
    seeds = [Order2Seed.random(q, m, rng) for _ in range(1 << n)]
    G = corollary7_matrix(V0, V1, [s.matrix() for s in seeds])
    assert G.is_paraunitary() is not None
    assert fm(G) == corollary7_functions(fm(V0), fm(V1), seeds)


def test_corollary7_small_instance_is_complete(rng):
    V0, V1 = random_desired(2, 1, 1, rng), random_desired(2, 1, 1, rng)
    seeds = [Order2Seed.random(2, 2, rng) for _ in range(2)]
    assert is_ccc(grid_sequences(fm(corollary7_matrix(V0, V1, [s.matrix() for s in seeds]))))


# -- doubled delay -----------------------------------------------------------


@given(st.sampled_from([2, 4]), st.integers(1, 2), st.integers(1, 3), SEEDS)
def test_theorem9_closed_form(q, n, m, seed):
    rng = np.random.default_rng(seed)
    H = [random_bh_pow2(q, n, rng) for _ in range(4)]
    seeds = [Order2Seed.random(q, m, rng) for _ in range(1 << n)]
    G = theorem8_matrix(H[0], H[1], [s.matrix() for s in seeds])
    M = theorem9_matrix(G, H[2], H[3])
    assert M.is_paraunitary() is not None
    assert fm(M) == theorem9_functions(H, seeds)
    assert fm(M) == theorem9_functions_from(fm(G), H[2], H[3])


def test_theorem9_corner_is_the_array_sum(rng):
    q, n, m = 4, 2, 2
    H = [walsh_kron_phase(q, n)] * 4
    seeds = [Order2Seed.random(q, m, rng) for _ in range(1 << n)]
    M = fm(theorem9_matrix(theorem8_matrix(H[0], H[1], [s.matrix() for s in seeds]), H[2], H[3]))
    f = corollary4_array(seeds)
    assert M.entry(0, 0) == f
    assert is_cas(M.column(0))


def test_walsh_identity_offsets(rng):
    for q, n, m in [(2, 1, 2), (4, 2, 3)]:
        seeds = [Order2Seed(q, tuple(range(m)), tuple(int(v) for v in rng.integers(0, q, m))) for _ in range(1 << n)]
        W = walsh_kron_phase(q, n)
        assert theorem9_functions([W] * 4, seeds) == walsh_identity_offsets(corollary4_array(seeds), n, m)


def test_array_restriction_recovers_parts(rng):
    n, m = 2, 3
    seeds = [Order2Seed(2, tuple(range(m)), tuple(int(v) for v in rng.integers(0, 2, m))) for _ in range(1 << n)]
    f = corollary4_array(seeds)
    grid = f.grid()
    for i in range(1 << n):
        bits = [(i >> k) & 1 for k in range(n)]
        part = QArray.from_grid(2, grid[(slice(None),) * m + tuple(bits)])
        assert part == seeds[i].f()


def test_theorem9_small_instance_is_complete(rng):
    w = PhaseMatrix(2, ((0, 0), (0, 1)))
    seeds = [Order2Seed.random(2, 2, rng) for _ in range(2)]
    M = theorem9_matrix(theorem8_matrix(w, w, [s.matrix() for s in seeds]), w, w)
    assert is_ccc(grid_sequences(fm(M)))


# -- interleaved pair --------------------------------------------------------


@given(st.sampled_from([2, 4]), st.integers(1, 2), st.integers(1, 2), st.integers(0, 3), st.integers(0, 3), SEEDS)
def test_theorem10_closed_form(q, n, n_prime, mu, mv, seed):
    rng = np.random.default_rng(seed)
    U = [random_desired(q, n_prime, max(mu, n_prime), rng) for _ in range(1 << n)]
    V = [random_desired(q, n, max(mv, n), rng) for _ in range(1 << n_prime)]
    G = theorem10_matrix(U, V)
    assert G.is_paraunitary() is not None
    assert fm(G) == theorem10_functions([fm(u) for u in U], [fm(v) for v in V])


def test_theorem10_equal_blocks_is_kronecker(rng):
    U, V = random_desired(4, 1, 2, rng), random_desired(4, 2, 2, rng)
    G = theorem10_matrix([U] * 4, [V] * 2)
    assert G == U.embed(4, [0, 1]).kron(V.embed(4, [2, 3]))
    f = fm(G)
    assert f.entry(0, 0) == QArray(4, 2, 4, (fm(U).phases[0, 0][:, None] + fm(V).phases[0, 0][None, :]).reshape(-1, order="F") % 4)
    assert is_cas(f.column(0))


def test_theorem10_small_instance_is_complete(rng):
    U = [Order2Seed.random(2, 1, rng).matrix() for _ in range(2)]
    V = [Order2Seed.random(2, 2, rng).matrix() for _ in range(2)]
    assert is_ccc(grid_sequences(fm(theorem10_matrix(U, V))))


# -- delayed block stack -----------------------------------------------------


@given(st.sampled_from([2, 4]), st.integers(1, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), SEEDS)
def test_theorem11_closed_form(q, n, n_prime, mv, mu, seed):
    rng = np.random.default_rng(seed)
    V = random_desired(q, n + n_prime, max(mv, n + n_prime), rng)
    U = [random_desired(q, n, max(mu, n), rng) for _ in range(1 << n_prime)]
    M = theorem11_matrix(V, U)
    assert M.is_paraunitary() is not None
    assert fm(M) == theorem11_functions(fm(V), [fm(u) for u in U])


def test_theorem11_without_extra_blocks_is_adb(rng):
    V, U = random_desired(2, 2, 2, rng), random_desired(2, 2, 3, rng)
    assert theorem11_matrix(V, [U]) == compose_ADB(V, U, 2)


def test_corner_reconstruction():
    r = corner_reconstruction()
    assert r.f == parse_poly(2, 5, CORNER_FUNCTION)
    assert r.matrix.is_paraunitary() == 128
    top = fm(r.inner).row(0)
    assert top == [parse_poly(2, 3, t) for t in CORNER_ROW]
    assert is_cas([top[0], top[3]]) and is_cas([top[1], top[2]])
    assert is_cas(r.cas)
    worst = max(pmepr(apply_affine_offset(r.f, c), 128) for c in itertools.product(range(2), repeat=5))
    assert worst == pytest.approx(3.449, abs=0.01)


# -- plans -------------------------------------------------------------------


def test_plan_reproduces_corner():
    walsh = {"op": "walsh", "n": 1}
    plan = {
        "op": "permute_vars",
        "perm": [0, 2, 1, 3, 4],
        "q": 2,
        "of": {
            "op": "theorem11",
            "V": {
                "op": "permute_cols",
                "perm": [0, 1, 3, 2],
                "of": {
                    "op": "theorem8",
                    "H0": walsh,
                    "H1": walsh,
                    "U": [
                        {"op": "order2", "perm": [1, 2, 0]},
                        {"op": "order2", "perm": [1, 2, 0], "linear": [1, 0, 1]},
                    ],
                },
            },
            "U": [{"op": "walsh", "n": 2}],
        },
    }
    assert evaluate_plan(plan) == corner_reconstruction().matrix
    assert evaluate_plan({"op": "corner"}) == corner_reconstruction().matrix


def test_plan_seed_and_kron():
    plan = {"op": "kron", "q": 4, "left": {"op": "seed", "hs": [{"op": "fourier", "N": 2}] * 2},
            "right": {"op": "seed", "hs": [{"op": "catalog", "N": 2}] * 3}}
    M = evaluate_plan(plan)
    assert M.N == 4 and M.m == 3 and M.is_paraunitary() == 4 * 8


@pytest.mark.parametrize(
    "plan",
    [{"op": "nope"}, {"op": "walsh"}, {"op": "theorem8", "q": 2}, [1, 2], {"op": "seed", "q": 2, "hs": [{"op": "phase", "phases": [[0, 0], [0, 0]]}] * 2}],
)
def test_bad_plans(plan):
    with pytest.raises(PlanError):
        evaluate_plan(plan)
