import random

import pytest

from nfclass.analytic import Accept, stop_check
from nfclass.class_sat import (
    GRH_CONDITIONAL, HEURISTIC, RIGOROUS, SATURATION_VERIFIED, ClassGroupResult, Complete,
    Defect, NewClass, PipelineConfig, PipelineState, Saturated, check_principal_generator,
    cyclic_factor_generators, full_pipeline, saturate_class_group, verify_generators,
)
from nfclass.core_arith import Ideal, PowerProduct
from nfclass.core_arith.intervals import iv, precision
from nfclass.linalg import INFINITE, ideal_from_vector, tentative_class_group
from nfclass.oracle import forms_class_number, tiny_class_group
from nfclass.relations import Relation, RelationMatrix, build_factor_base, collect_relations

from corpus import CLASS_CORPUS, quadratic_poly


def _run(K, level="full", **kw):
    st = PipelineState()
    cg, U = full_pipeline(K, level, PipelineConfig(**kw), st)
    return cg, U, st


def test_minus5_full(field):
    K = field(1, 0, 5)
    cg, U, _ = _run(K)
    assert (cg.h, cg.invariants, cg.proof) == (2, [2], SATURATION_VERIFIED)
    assert U.rank == 0 and U.w == 2


def test_sqrt2_full(field):
    K = field(1, 0, -2)
    cg, U, _ = _run(K)
    assert cg.h == 1 and U.proof == RIGOROUS
    assert abs(float(U.regulator.mid) - 0.8813735870195430) < 1e-15


def test_grh_tags(field):
    cg, U, st = _run(field(1, 0, 14), "grh")
    assert cg.invariants == [4] and cg.proof == GRH_CONDITIONAL
    assert isinstance(st.accepted, Accept)
    cg, U, _ = _run(field(1, 0, -10), "grh")
    assert cg.h == 2 and U.proof == GRH_CONDITIONAL


def test_heuristic_tags(field):
    cg, U, _ = _run(field(1, 0, 23), "heuristic")
    assert cg.h == 3 and cg.proof == HEURISTIC and U.proof == HEURISTIC


def test_cyclic_generators(field):
    K = field(1, 0, 1)
    cg, _, st = _run(K)
    assert cg.principal_gens == []
    for f, d in (([1, 0, 5], 2), ([1, -1, 6], 3)):
        K = field(*f)
        cg, _, st = _run(K)
        pres = cg.presentation
        assert pres.invariants == [d]
        (g,) = cyclic_factor_generators(pres, st.rm, st.fb)
        a = ideal_from_vector(K, st.fb, pres.gen_vectors[0])
        assert Ideal.principal(K, g.expand(K)) == a ** d
        assert check_principal_generator(g, pres.gen_vectors[0], d, st.fb)


def test_minus5_generator_is_two_up_to_units(field):
    K = field(1, 0, 5)
    cg, _, st = _run(K)
    (g,) = cg.principal_gens
    (P2,) = K.decompose(2)
    assert cg.cyclic_gens[0] == P2.ideal
    assert g.expand(K) in (K.from_int(2), K.from_int(-2))


def _minus5_explicit(K, B, coords_list):
    from nfclass.relations import smooth_factorize
    fb = build_factor_base(K, B)
    rows = []
    for c in coords_list:
        x = K.element(c)
        rows.append(Relation(PowerProduct.of(x), smooth_factorize(x, fb)))
    return fb, RelationMatrix(rows, len(fb))


# 2, 1 + sqrt-5, 1 - sqrt-5, sqrt-5 over the primes of norm <= 6
MINUS5_RELATIONS = [[2, 0], [1, 1], [1, -1], [0, 1]]


def test_verify_generators(field):
    Ki = field(1, 0, 1)
    fb = build_factor_base(Ki, 1)
    pres, _ = tentative_class_group(RelationMatrix([], 0), fb)
    assert isinstance(verify_generators(pres, fb, 1, RelationMatrix([], 0)), Complete)
    K = field(1, 0, 5)
    fb, rm = _minus5_explicit(K, 2, [[2, 0]])
    pres, h = tentative_class_group(rm, fb)
    assert h == 2
    assert isinstance(verify_generators(pres, fb, 2, rm), Complete)
    # drop the prime above 2 from the working base
    small = fb.without([0])
    rm0 = RelationMatrix([], 0)
    pres, _ = tentative_class_group(rm0, small)
    res = verify_generators(pres, small, 2, rm0, budget=200)
    assert isinstance(res, NewClass) and res.prime.p == 2


def test_saturate_class_group_examples(field):
    K = field(1, 0, 5)
    cg, U, st = _run(K)
    assert isinstance(saturate_class_group(cg, U, 2, st.fb), Saturated)
    assert isinstance(saturate_class_group(cg, U, 7, st.fb), Saturated)
    fb, rm = _minus5_explicit(K, 6, MINUS5_RELATIONS)
    good = _class_group(K, rm, fb)
    assert good.h == 2
    assert isinstance(saturate_class_group(good, U, 2, fb), Saturated)
    # claimed h = 4: the relation 2*[P2] replaced by 4*[P2]
    bad = _class_group(K, _double_row(rm, 0), fb)
    assert bad.h == 4
    res = saturate_class_group(bad, U, 2, fb)
    assert isinstance(res, Defect)


def _double_row(rm, i):
    rows = list(rm.rows)
    r = rows[i]
    rows[i] = Relation(r.element ** 2, tuple((j, 2 * e) for j, e in r.exponents))
    return RelationMatrix(rows, rm.m)


def _class_group(K, rm, fb):
    pres, h = tentative_class_group(rm, fb)
    if h == INFINITE:
        return None
    return ClassGroupResult(pres, list(pres.gens), cyclic_factor_generators(pres, rm, fb),
                            HEURISTIC, h)


def test_corpus_matches_oracle(field):
    assert len(CLASS_CORPUS) >= 30
    for f in CLASS_CORPUS:
        K = field(*f)
        want = tiny_class_group(K, cap=400).invariants
        cg, U, st = _run(K)
        assert cg.invariants == want, (f, cg.invariants, want)
        assert cg.proof == SATURATION_VERIFIED, (f, cg.notes)
        for a, g, d in zip(cg.presentation.gen_vectors, cg.principal_gens, cg.invariants):
            assert check_principal_generator(g, a, d, st.fb)


def test_larger_imaginary(field):
    K = field(*quadratic_poly(-1000003))
    cg, _, _ = _run(K)
    assert cg.h == forms_class_number(-1000003) == 105


def test_full_passes_grh_checks(field):
    for f in ([1, 0, 14], [1, 0, -79], [1, 0, 0, -11]):
        K = field(*f)
        cg, U, st = _run(K)
        with precision(128):
            res = stop_check(iv.mpf(cg.h) * U.regulator, K, "grh", 1000, U.w)
        while not isinstance(res, Accept) and res.X != 1000 and res.X < 10 ** 6:
            res = stop_check(iv.mpf(cg.h) * U.regulator, K, "grh", res.X, U.w)
        assert isinstance(res, Accept)


FAULT_FIELDS = ([1, 0, 5], [1, 0, 14], [1, -1, 6], [1, 0, 26], [1, 0, 21], [1, 0, -10],
                [1, 0, -79], [1, 0, 0, -11], [1, 0, 4, 0, 1])


def fault_trial(K, rng, reference):
    """Inject one fault; return (h_true, h_faulty, detected) or None if harmless."""
    cg0, U0, st0 = reference
    rm, fb = st0.rm, st0.fb
    kind = rng.choice(["double", "delete"])
    if kind == "double":
        rm2 = _double_row(rm, rng.randrange(len(rm.rows)))
    else:
        rm2 = RelationMatrix(rm.rows[:-1], rm.m)
    cg = _class_group(K, rm2, fb)
    if cg is None:
        return cg0.h, INFINITE, True
    if cg.h == cg0.h:
        return cg0.h, cg.h, True
    with precision(128):
        cand = iv.mpf(cg.h) * U0.regulator
    grh = stop_check(cand, K, "grh", 2000, U0.w)
    ells = [p for p in range(2, cg.h + 1) if cg.h % p == 0 and all(p % q for q in range(2, p))]
    defect = any(isinstance(saturate_class_group(cg, U0, ell, fb), Defect)
                 for ell in ells if (cg.h // cg0.h) % ell == 0)
    return cg0.h, cg.h, (not isinstance(grh, Accept)) and defect


def test_fault_injection_100(field):
    refs = {tuple(f): _run(field(*f)) for f in FAULT_FIELDS}
    rng = random.Random(2024)
    wrong = []
    overcounts = 0
    for t in range(100):
        f = rng.choice(FAULT_FIELDS)
        h0, h1, ok = fault_trial(field(*f), rng, refs[tuple(f)])
        if h1 != INFINITE:
            assert h1 % h0 == 0
            overcounts += h1 != h0
        if not ok:
            wrong.append((f, h0, h1))
    assert wrong == []
    assert overcounts >= 20


def test_deterministic(field):
    K = field(1, 0, 0, -11)
    a = _run(K, seed=5)
    b = _run(K, seed=5)
    assert a[0].invariants == b[0].invariants
    assert [r.exponents for r in a[2].rm.rows] == [r.exponents for r in b[2].rm.rows]
    assert [[x.coords for x, _ in g.factors] for g in a[0].principal_gens] == \
        [[x.coords for x, _ in g.factors] for g in b[0].principal_gens]
