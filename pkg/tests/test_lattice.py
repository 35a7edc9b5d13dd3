import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ratdim.lattice import (
    DimensionMismatchError,
    IncompatibleModuliError,
    IntegerMatrix,
    NotASubgroupError,
    SubgroupPresentation,
    hermite_normal_form,
    integer_solutions,
    left_kernel,
    matrix_from_json,
    matrix_to_json,
    quotient_invariants,
    same_group,
    smith_normal_form,
    subgroup_from_json,
    subgroup_intersection,
    subgroup_membership,
    subgroup_to_json,
)
from ratdim.supernatural import SupernaturalNumber

from oracles import cramer_bound, det, determinantal_invariants, lattice_points

Z = SubgroupPresentation.z_span
TWO, THREE = SupernaturalNumber.infinite_power(2), SupernaturalNumber.infinite_power(3)


def _check_snf(A: IntegerMatrix):
    U, S, V = smith_normal_form(A)
    assert (U @ S @ V) == A
    assert abs(U.det()) == 1 and abs(V.det()) == 1
    diag = [S[i, i] for i in range(min(S.rows, S.cols))]
    for i in range(S.rows):
        for j in range(S.cols):
            if i != j:
                assert S[i, j] == 0
    assert all(d >= 0 for d in diag)
    nz = [d for d in diag if d]
    assert diag[:len(nz)] == nz  # zeros trail
    assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))
    return diag


def test_snf_examples():
    assert _check_snf(IntegerMatrix.from_rows([[2, 4], [6, 8]])) == [2, 4]
    assert _check_snf(IntegerMatrix.identity(3)) == [1, 1, 1]
    assert _check_snf(IntegerMatrix.from_rows([[0]])) == [0]


@pytest.mark.parametrize("seed", range(4))
def test_snf_random(seed):
    rng = random.Random(seed)
    for _ in range(50):
        r, c = rng.randint(1, 6), rng.randint(1, 6)
        A = IntegerMatrix.from_rows([[rng.randint(-20, 20) for _ in range(c)] for _ in range(r)])
        _check_snf(A)


def test_hnf_is_unimodular_transform():
    A = IntegerMatrix.from_rows([[2, 4], [6, 8]])
    H, U = hermite_normal_form(A)
    assert U @ A == H
    assert abs(U.det()) == 1


def test_left_kernel_and_solutions():
    assert left_kernel([[1, 2], [2, 4]], 2) == [[-2, 1]]
    rows = [[1, 1, 0], [0, 2, 1]]
    sols = integer_solutions(rows, 3, [[3, 7, 2], [1, 0, 0]])
    assert sols[0] == [3, 2]
    assert sols[1] is None


def test_membership_examples():
    assert subgroup_membership((2, 2), Z([(1, 1)]))
    assert not subgroup_membership((1, 0), Z([(1, 1), (0, 2)]))
    assert not subgroup_membership((Fraction(1, 2), 0), SubgroupPresentation.standard(2, THREE))
    assert subgroup_membership((Fraction(1, 8), 0), SubgroupPresentation.standard(2, TWO))
    with pytest.raises(DimensionMismatchError):
        subgroup_membership((1, 2, 3), Z([(1, 1)]))


def test_membership_parity_brute_force():
    H = [(1, 1), (0, 2)]
    pts = lattice_points(H, 10, 30)
    assert (1, 0) not in pts
    assert (1, 1) in pts and (0, 2) in pts


def test_intersection_examples():
    I = subgroup_intersection(Z([(1, 0), (0, 2)]), Z([(2, 0), (0, 1)]))
    assert same_group(I, Z([(2, 0), (0, 2)]))
    pts = lattice_points([(1, 0), (0, 2)], 8, 8) & lattice_points([(2, 0), (0, 1)], 8, 8)
    assert pts == lattice_points([(2, 0), (0, 2)], 8, 8)
    H = Z([(1, 2), (3, 1)])
    assert same_group(subgroup_intersection(H, H), H)
    assert subgroup_intersection(Z([(1, 1)]), Z([(1, -1)])).generators == ()


def test_intersection_moduli():
    G = Z([(1, 0), (0, 1)])
    both = subgroup_intersection(G.with_modulus(TWO), G.with_modulus(THREE))
    assert same_group(both, G)
    with pytest.raises(IncompatibleModuliError):
        subgroup_intersection(G.with_modulus(SupernaturalNumber.infinite_power(2, 3)), G.with_modulus(THREE))


def test_quotient_examples():
    Z2 = SubgroupPresentation.standard(2)
    assert quotient_invariants(Z([(2, 0), (0, 3)]), Z2) == (0, [6])
    assert quotient_invariants(Z2, Z2) == (0, [])
    assert quotient_invariants(Z([(1, 1)]), Z2) == (1, [])
    with pytest.raises(NotASubgroupError):
        quotient_invariants(Z([(Fraction(1, 2), 0)]), Z2)


def _random_gens(rng, k, g):
    return [tuple(rng.randint(-20, 20) for _ in range(k)) for _ in range(g)]


def test_membership_against_enumeration():
    rng = random.Random(11)
    checked = 0
    while checked < 120:
        k = rng.randint(1, 3)
        gens = _random_gens(rng, k, rng.randint(1, k))
        bound = cramer_bound(gens, 5)
        if bound is None or bound > 40:
            continue
        pts = lattice_points(gens, bound, 5)
        v = tuple(rng.randint(-5, 5) for _ in range(k))
        if rng.random() < 0.5:
            v = rng.choice(sorted(pts))
        assert subgroup_membership(v, Z(gens)) == (v in pts), (gens, v)
        checked += 1


@given(st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=1, max_size=3),
       st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=1, max_size=3))
def test_intersection_symmetric_and_idempotent(a, b):
    H1, H2 = Z(a), Z(b)
    I12, I21 = subgroup_intersection(H1, H2), subgroup_intersection(H2, H1)
    assert same_group(I12, I21)
    assert same_group(subgroup_intersection(I12, I12), I12)
    for g in I12.generators:
        assert subgroup_membership(g, H1) and subgroup_membership(g, H2)


@given(st.lists(st.lists(st.integers(-20, 20), min_size=3, max_size=3), min_size=1, max_size=3))
def test_quotient_matches_determinantal_divisors(rows):
    assert quotient_invariants(Z(rows), SubgroupPresentation.standard(3)) == determinantal_invariants(rows, 3)


def test_json_round_trips():
    A = IntegerMatrix.from_rows([[1, -2], [3, 4]])
    assert matrix_from_json(matrix_to_json(A)) == A
    H = SubgroupPresentation(2, ((Fraction(1, 2), 0),), TWO)
    assert subgroup_from_json(subgroup_to_json(H)) == H
    with pytest.raises(ValueError):
        subgroup_from_json({"generators": []})


def test_oracle_determinant_sanity():
    assert det([[2, 4], [6, 8]]) == -8
