import random

import pytest
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from nfclass.errors import InconsistentPresentation
from nfclass.linalg import INFINITE, class_dlog, hnf, snf, tentative_class_group
from nfclass.core_arith import PowerProduct
from nfclass.relations import (
    Relation, RelationMatrix, build_factor_base, collect_relations, smooth_factorize,
)


def _det(M):
    return int(Matrix(M).det()) if M else 1


def _mul(A, B):
    return [[sum(a * b for a, b in zip(r, c)) for c in zip(*B)] for r in A]


def _reference_hnf(M):
    """Row HNF via sympy's column HNF on the row/column-reversed matrix."""
    Mr = Matrix([row[::-1] for row in M])
    S = hermite_normal_form(Mr.T).T
    return [[int(x) for x in list(S.row(i))[::-1]] for i in range(S.rows)][::-1]


def test_hnf_trivial():
    I = [[1, 0], [0, 1]]
    assert hnf(I) == (I, I)
    D = [[2, 0], [0, 3]]
    H, U = hnf(D)
    assert H == D and U == I


def test_hnf_random_against_reference():
    rng = random.Random(5)
    done = 0
    while done < 40:
        M = [[rng.randint(-9, 9) for _ in range(5)] for _ in range(5)]
        if _det(M) == 0:
            continue
        H, U = hnf(M)
        assert _mul(U, M) == H
        assert abs(_det(U)) == 1
        assert H == _reference_hnf(M)
        done += 1


def test_hnf_rectangular_rank_deficient():
    rng = random.Random(9)
    for _ in range(20):
        base = [[rng.randint(-5, 5) for _ in range(4)] for _ in range(2)]
        M = base + [[a + 2 * b for a, b in zip(*base)], [3 * x for x in base[0]]]
        rng.shuffle(M)
        H, U = hnf(M)
        assert _mul(U, M) == H and abs(_det(U)) == 1
        assert sum(1 for r in H if any(r)) == Matrix(M).rank()
        assert not any(H[-1])


def test_snf_examples():
    S, U, V = snf([[6, 0], [0, 4]])
    assert [S[0][0], S[1][1]] == [2, 12]
    S, U, V = snf([[0, 0], [0, 0]])
    assert S == [[0, 0], [0, 0]]


def test_snf_random_identity():
    rng = random.Random(2)
    for _ in range(40):
        r, c = rng.randint(1, 6), rng.randint(1, 6)
        M = [[rng.randint(-12, 12) for _ in range(c)] for _ in range(r)]
        S, U, V = snf(M)
        assert _mul(_mul(U, M), V) == S
        assert abs(_det(U)) == 1 and abs(_det(V)) == 1
        d = [S[i][i] for i in range(min(r, c))]
        assert all(S[i][j] == 0 for i in range(r) for j in range(c) if i != j)
        nz = [x for x in d if x]
        assert all(x > 0 for x in nz)
        assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
        assert d[len(nz):] == [0] * (len(d) - len(nz))


def _relations(K, B, seed=0):
    fb = build_factor_base(K, B)
    return fb, collect_relations(K, fb, len(fb), budget=20000, seed=seed)


def _explicit(K, fb, coords_list):
    rows = []
    for c in coords_list:
        x = K.element(c)
        rows.append(Relation(PowerProduct.of(x), smooth_factorize(x, fb)))
    return RelationMatrix(rows, len(fb))


def test_tentative_gaussian(field):
    K = field(1, 0, 1)
    fb = build_factor_base(K, 10)
    rm = _explicit(K, fb, [[1, 1], [2, 1], [2, -1], [3, 0]])
    pres, h = tentative_class_group(rm, fb)
    assert h == 1 and pres.invariants == []


def test_tentative_minus5(field):
    K = field(1, 0, 5)
    fb, rm = _relations(K, 6)
    pres, h = tentative_class_group(rm, fb)
    assert h == 2 and pres.invariants == [2]
    assert pres.gens[0].norm in (2, 3)


def test_rank_deficient_is_infinite(field):
    K = field(1, 0, 5)
    fb, rm = _relations(K, 6)
    short = RelationMatrix(rm.rows[:1], rm.m)
    assert tentative_class_group(short, fb)[1] == INFINITE


def test_row_order_insensitive(field):
    K = field(1, 0, 14)
    fb, rm = _relations(K, 20)
    pres, h = tentative_class_group(rm, fb)
    rng = random.Random(4)
    for _ in range(5):
        rows = list(rm.rows)
        rng.shuffle(rows)
        p2, h2 = tentative_class_group(RelationMatrix(rows, rm.m), fb)
        assert (h2, p2.invariants) == (h, pres.invariants)


def test_under_collection_gives_multiple(field):
    for f, h_true in (([1, 0, 14], 4), ([1, 0, 5], 2), ([1, -1, 6], 3), ([1, 0, 26], 6)):
        K = field(*f)
        fb, rm = _relations(K, 30)
        for k in range(len(rm.rows), 0, -1):
            sub = RelationMatrix(rm.rows[:k], rm.m)
            h = tentative_class_group(sub, fb)[1]
            if h == INFINITE:
                break
            assert h % h_true == 0


def test_class_dlog(field):
    Ki = field(1, 0, 1)
    fb = build_factor_base(Ki, 10)
    rm = _explicit(Ki, fb, [[1, 1], [2, 1], [2, -1], [3, 0]])
    a = Ki.decompose(2)[0].ideal
    assert class_dlog(a, rm, fb) == []
    K = field(1, 0, 5)
    fb, rm = _relations(K, 6)
    pres, _ = tentative_class_group(rm, fb)
    (P2,) = K.decompose(2)
    assert class_dlog(P2.ideal, rm, fb, pres=pres) == [1]
    (P3, Q3) = K.decompose(3)
    assert class_dlog(P3.ideal * P2.ideal, rm, fb, pres=pres) == [0]
    # a times a representative of the inverse class is trivial
    assert class_dlog(P3.ideal * Q3.ideal, rm, fb, pres=pres) == [0]


def test_class_dlog_inconsistent(field):
    K = field(1, 0, 5)
    fb, rm = _relations(K, 6)
    with pytest.raises(InconsistentPresentation):
        class_dlog(K.decompose(2)[0].ideal, RelationMatrix([], rm.m), fb)
