import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paraunit.cyclotomic import (
    CycInt,
    as_single_root,
    conj_array,
    cyc_kron,
    cyc_matmul,
    cyclotomic_polynomial,
    euler_phi,
    is_zero,
    make_root,
    phases_to_array,
    root_phase_array,
    zero_mask,
)


@pytest.mark.parametrize(
    "q, coeffs",
    [(1, (-1, 1)), (2, (1, 1)), (3, (1, 1, 1)), (4, (1, 0, 1)), (6, (1, -1, 1)), (12, (1, 0, -1, 0, 1))],
)
def test_cyclotomic_polynomials(q, coeffs):
    assert cyclotomic_polynomial(q).coeffs == coeffs


def test_phi12_prints_readably():
    assert str(cyclotomic_polynomial(12)) == "x^4 - x^2 + 1"


@pytest.mark.parametrize("q", range(1, 40))
def test_degree_is_totient(q):
    assert cyclotomic_polynomial(q).degree == euler_phi(q)


def test_make_root_layout():
    assert make_root(2, 1).coeffs == (0, 1)
    assert make_root(4, 0).coeffs == (1, 0, 0, 0)
    assert make_root(3, 2).coeffs == (0, 0, 1)
    with pytest.raises(ValueError):
        make_root(4, 4)
    with pytest.raises(ValueError):
        make_root(4, -1)


def test_arithmetic_examples():
    assert make_root(4, 1) * make_root(4, 3) == make_root(4, 0)
    assert make_root(4, 1).conj() == make_root(4, 3)
    s = make_root(4, 0) + make_root(4, 2)
    assert s.coeffs == (1, 0, 1, 0)
    assert is_zero(s)


def test_modulus_mismatch():
    with pytest.raises(ValueError):
        make_root(4, 1) + make_root(3, 1)


@pytest.mark.parametrize(
    "q, coeffs, expected",
    [(3, [1, 1, 1], True), (4, [1, 1, 0, 0], False), (6, [1, 0, 0, 1, 0, 0], True)],
)
def test_zero_examples(q, coeffs, expected):
    assert is_zero(CycInt(q, coeffs)) is expected


@pytest.mark.parametrize(
    "q, coeffs, expected", [(4, [0, 0, 1, 0], 2), (2, [2, 1], 0), (3, [1, 1, 0], None)]
)
def test_single_root_examples(q, coeffs, expected):
    assert as_single_root(CycInt(q, coeffs)) == expected


@pytest.mark.parametrize("q", range(2, 25))
def test_roots_multiply_and_sum(q):
    for s, t in itertools.product(range(q), repeat=2):
        assert make_root(q, s) * make_root(q, t) == make_root(q, (s + t) % q)
    for s in range(q):
        assert make_root(q, s) * make_root(q, s).conj() == make_root(q, 0)
    assert sum((make_root(q, k) for k in range(q)), CycInt.zero(q)).is_zero()


def test_subgroup_sums_vanish():
    for q in (4, 6, 8, 12):
        for d in range(1, q):
            if q % d == 0 and q // d > 1:
                total = sum((make_root(q, k * d) for k in range(q // d)), CycInt.zero(q))
                assert total.is_zero()


def test_zero_test_agrees_with_floats(rng):
    for _ in range(1000):
        q = int(rng.integers(1, 13))
        a = CycInt(q, rng.integers(-10, 11, q))
        assert a.is_zero() == (abs(a.to_complex()) < 1e-9)


@given(st.integers(2, 12).flatmap(lambda q: st.tuples(st.just(q), st.lists(st.integers(-20, 20), min_size=q, max_size=q), st.lists(st.integers(-20, 20), min_size=q, max_size=q))))
def test_ring_laws_match_complex_values(data):
    q, a, b = data
    x, y = CycInt(q, a), CycInt(q, b)
    assert abs((x * y).to_complex() - x.to_complex() * y.to_complex()) < 1e-6
    assert abs((x + y).to_complex() - (x.to_complex() + y.to_complex())) < 1e-9
    assert abs(x.conj().to_complex() - x.to_complex().conjugate()) < 1e-9
    assert (x - x).is_zero()
    if x == y:
        assert hash(x) == hash(y)


@given(st.integers(1, 12), st.data())
def test_equal_values_hash_equal(q, data):
    a = data.draw(st.lists(st.integers(-5, 5), min_size=q, max_size=q))
    phi = cyclotomic_polynomial(q).coeffs
    shift = data.draw(st.integers(0, q - len(phi)) if len(phi) <= q else st.just(0))
    b = list(a)
    if len(phi) <= q:
        for k, c in enumerate(phi):
            b[shift + k] += c
    assert CycInt(q, a) == CycInt(q, b)
    assert hash(CycInt(q, a)) == hash(CycInt(q, b))


def test_bulk_helpers(rng):
    q = 6
    ph = rng.integers(0, q, (3, 3))
    arr = phases_to_array(ph, q)
    assert (root_phase_array(arr, q) == ph).all()
    assert not zero_mask(arr, q).any()
    assert (root_phase_array(conj_array(arr), q) == (-ph) % q).all()
    a = rng.integers(-3, 4, (2, 3, q))
    b = rng.integers(-3, 4, (3, 2, q))
    prod = cyc_matmul(a, b)
    for i, j in itertools.product(range(2), range(2)):
        want = sum((CycInt(q, a[i, k]) * CycInt(q, b[k, j]) for k in range(3)), CycInt.zero(q))
        assert CycInt(q, prod[i, j]) == want
    kr = cyc_kron(a[:, :2], b[:2])
    assert CycInt(q, kr[3, 1]) == CycInt(q, a[1, 0]) * CycInt(q, b[1, 1])


def test_overflow_is_detected():
    big = np.full((2, 2, 2), 1 << 40, dtype=np.int64)
    with pytest.raises(OverflowError):
        cyc_matmul(big, big)
