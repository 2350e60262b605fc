import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paraunit.cyclotomic import CycInt
from paraunit.functions import is_ccc, parse_poly, permute_vars
from paraunit.hadamard import PhaseMatrix, random_bh, walsh_kron_phase
from paraunit.polymatrix import FunctionMatrix, NotDesiredError, PolyMatrix, extract_function_matrix
from paraunit.seedpu import SeedSpec, build_seed, univariate_delay

W2 = ((0, 0), (0, 1))


def walsh(q=2, m=0):
    return PolyMatrix.constant(q, ((0, 0), (0, q // 2)), m)


def test_identity_and_walsh_products():
    A = walsh(2, 1) @ PolyMatrix.delay(2, 1)
    assert A @ PolyMatrix.identity(2, 2, 1) == A
    two_i = walsh() @ walsh()
    for i in range(2):
        for j in range(2):
            assert two_i.entry_coefficient(i, j, ()) == CycInt.from_int(2, 2 if i == j else 0)


def test_wdw_by_hand():
    M = walsh(2, 1) @ PolyMatrix.delay(2, 1) @ walsh(2, 1)
    # [[1 + z, 1 - z], [1 - z, 1 + z]]
    for (i, j), signs in {(0, 0): (1, 1), (0, 1): (1, -1), (1, 0): (1, -1), (1, 1): (1, 1)}.items():
        assert M.entry_coefficient(i, j, (0,)) == CycInt.from_int(2, signs[0])
        assert M.entry_coefficient(i, j, (1,)) == CycInt.from_int(2, signs[1])
    fm = extract_function_matrix(M, 2)
    x0 = parse_poly(2, 1, "x0")
    assert fm.entry(0, 0) == x0.scale(0) and fm.entry(0, 1) == x0
    assert fm.entry(1, 0) == x0 and fm.entry(1, 1) == x0.scale(0)


def test_paraunitary_constants(rng):
    for q, N in [(2, 2), (4, 2), (3, 3), (4, 4)]:
        h = random_bh(q, N, rng)
        assert PolyMatrix.constant(q, h.phases).is_paraunitary() == N
    spec = SeedSpec(2, 2, 2, [PhaseMatrix(2, W2)] * 3)
    assert build_seed(spec).is_paraunitary() == 8


def test_rejects_broken_matrix():
    fm = extract_function_matrix(walsh(2, 1) @ PolyMatrix.delay(2, 1) @ walsh(2, 1), 2)
    ph = fm.phases.copy()
    ph[0, 0, 0] ^= 1  # flip one coefficient of one entry only
    assert FunctionMatrix(2, 2, 1, ph).to_polymatrix().is_paraunitary() is None


def test_constant_walsh_extraction():
    assert extract_function_matrix(walsh(), 2).phases[:, :, 0].tolist() == [[0, 0], [0, 1]]


def test_extraction_errors():
    coeffs = {(k,): np.array([[[1, 0]]]) for k in range(3)}
    with pytest.raises(NotDesiredError):
        extract_function_matrix(PolyMatrix(2, 1, 1, coeffs), 2)
    M = walsh(2, 1) @ PolyMatrix.delay(2, 1) + walsh(2, 1)
    with pytest.raises(NotDesiredError, match="entry"):
        extract_function_matrix(M, 2)


def test_univariate_delay():
    D3 = univariate_delay(3, 3, 1, 0)
    assert D3.support() == [(0,), (1,), (2,)]
    assert D3.entry_coefficient(2, 2, (2,)) == CycInt.from_int(3, 1)
    assert D3.is_paraunitary() == 1
    assert PolyMatrix.delay(2, 1).is_paraunitary() == 1


def test_kronecker_examples():
    fm = extract_function_matrix(walsh().kron(walsh()), 2)
    assert fm.phases[:, :, 0].tolist() == [list(r) for r in walsh_kron_phase(2, 2).phases]
    left = PolyMatrix.delay(2, 1, 2, offset=1)
    right = PolyMatrix.delay(2, 1, 2, offset=0)
    assert left.kron(right) == PolyMatrix.delay(2, 2, 2)
    A = walsh(4, 0)
    blocks = A.kron(PolyMatrix.identity(4, 2))
    assert blocks.entry_coefficient(2, 0, ()) == CycInt.from_int(4, 1)
    assert blocks.entry_coefficient(2, 1, ()) == CycInt.zero(4)


@given(st.sampled_from([(2, 2), (4, 2), (3, 3)]), st.integers(0, 2), st.integers(0, 2), st.integers(0, 10**6))
def test_paraunitary_constant_is_multiplicative(qn, m1, m2, seed):
    q, N = qn
    rng = np.random.default_rng(seed)
    A = build_seed(SeedSpec.random(q, N, m1, rng)).embed(m1 + m2, list(range(m1)))
    B = build_seed(SeedSpec.random(q, N, m2, rng)).embed(m1 + m2, list(range(m1, m1 + m2)))
    assert (A @ B).is_paraunitary() == A.is_paraunitary() * B.is_paraunitary()


def test_extracted_grid_is_complete_code(rng):
    spec = SeedSpec.random(4, 2, 3, rng)
    fm = build_seed(spec).extract_function_matrix(2)
    perm = [int(v) for v in rng.permutation(3)]
    grid = [[permute_vars(f, perm).to_sequence() for f in row] for row in fm.entries()]
    assert is_ccc(grid)
    assert fm.permute_vars(perm).entry(1, 0) == permute_vars(fm.entry(1, 0), perm)


def test_json_round_trip(rng):
    M = build_seed(SeedSpec.random(3, 3, 2, rng))
    back = PolyMatrix.from_json(json.loads(M.dumps()))
    assert back == M
    fm = M.extract_function_matrix(3)
    assert FunctionMatrix.from_json(json.loads(json.dumps(fm.to_json()))) == fm
    sums = walsh(2, 1) @ PolyMatrix.delay(2, 1) @ walsh(2, 1) + walsh(2, 1)
    assert PolyMatrix.from_json(json.loads(sums.dumps())) == sums


def test_mismatched_products():
    with pytest.raises(ValueError):
        walsh(2) @ walsh(4)
    with pytest.raises(ValueError):
        walsh(2) @ PolyMatrix.identity(2, 3)
