import random

import pytest

from grass.derivation import (
    check_derivation,
    elaborate,
    mk_arrowE,
    mk_arrowI,
    mk_cont,
    mk_dropI,
    mk_exchange,
    mk_pairI,
    mk_raiseI,
    mk_sub,
    mk_sumE,
    mk_sumIL,
    mk_sumIR,
    mk_unitE,
    mk_unitI,
    mk_var,
    mk_weak,
)
from grass.errors import CheckError, ElaborationError
from grass.gen import Gen
from grass.grades import Grade
from grass.presets import system
from grass.modespace import independence_check
from grass.syntax import (
    Judgment,
    Lam,
    Pair,
    Star,
    TBase,
    TFun,
    TSum,
    TTensor,
    TUnit,
    Var,
    alpha_eq,
)

P = TBase("P", "L")
Q = TBase("Q", "U")
H = TBase("H", "fh")


@pytest.fixture(scope="module")
def lu():
    return system("LU")[0]


@pytest.fixture(scope="module")
def fhs():
    return system("fh")[0]


# -- checking -------------------------------------------------------------------


def test_var_axiom(lu):
    d = mk_var(lu, "x", P)
    j = check_derivation(d, lu)
    assert j.rho[0].value == 1 and j.modes == ("L",) and j.mode == "L"


def test_exchange_identity_is_noop(lu):
    d = mk_pairI(lu, mk_var(lu, "x", P), mk_var(lu, "y", P))
    e = mk_exchange(lu, d, (0, 1))
    assert e.conclusion == d.conclusion


def test_cont_needs_the_ideal(fhs):
    pair = mk_pairI(fhs, mk_var(fhs, "h1", H), mk_var(fhs, "h2", H))
    with pytest.raises(CheckError) as err:
        mk_cont(fhs, pair, "h")
    assert "Cont" in str(err.value)
    # lifting both to w first makes the contraction legal
    lifted = mk_sub(fhs, pair, ("w", "w"))
    d = mk_cont(fhs, lifted, "h")
    assert d.conclusion.rho[0].value == "w"
    check_derivation(d, fhs)


def test_weak_needs_the_flag(lu):
    d = mk_var(lu, "x", P)
    with pytest.raises(CheckError):
        mk_weak(lu, d, "y", P)  # Weak(L) is false
    ok = mk_weak(lu, d, "y", Q)  # Weak(U) is true and L <= U
    assert ok.conclusion.rho[-1].value == "t"


def test_sub_needs_entrywise_leq(lu):
    d = mk_var(lu, "x", P)
    with pytest.raises(CheckError):
        mk_sub(lu, d, (0,))  # 1 <= 0 fails in the discrete order


def test_sumE_needs_one_below_the_grade(lu):
    scrut = mk_sumIL(lu, mk_var(lu, "s", P), P)
    left = mk_var(lu, "a", P)
    right = mk_var(lu, "b", P)
    # branch bound variables are graded 1 = the only grade with 1 <= q at L
    d = mk_sumE(lu, left, right, scrut)
    check_derivation(d, lu)
    assert d.conclusion.ty == P


def test_raiseI_needs_independence(lu):
    d = mk_var(lu, "x", P)  # context at mode L
    with pytest.raises(CheckError) as err:
        mk_raiseI(lu, d, "U")  # U must be below every context mode, but L < U
    assert "independence" in str(err.value)


def test_checker_reports_position(lu):
    good = mk_arrowI(lu, mk_var(lu, "x", P))
    bad = good.premises[0]
    tampered = type(bad)(bad.rule, bad.premises, ("x", Q), bad.conclusion)
    wrapped = type(good)(good.rule, (tampered,), good.payload, good.conclusion)
    with pytest.raises(CheckError) as err:
        check_derivation(wrapped, lu)
    assert err.value.position == (0,)


def test_accepted_derivations_satisfy_independence(lu):
    gen = Gen(space=lu, rng=random.Random(11))
    for _ in range(50):
        d = gen.gen_derivation(4)
        check_derivation(d, lu)
        for node in d.walk():
            assert independence_check(node.conclusion.modes, node.conclusion.mode, lu)


def test_checker_is_deterministic(lu):
    gen = Gen(space=lu, rng=random.Random(12))
    for _ in range(20):
        d = gen.gen_derivation(4)
        assert check_derivation(d, lu) == check_derivation(d, lu) == d.conclusion


# -- elaboration ------------------------------------------------------------------


def _closed(term, ty, mode):
    return Judgment((), (), (), mode, term, ty)


def test_elaborate_identity(lu):
    j = _closed(Lam("x", Var("x")), TFun(P, Grade("nat-discrete", 1), P), "L")
    d = elaborate(j, lu)
    assert d.conclusion == j
    check_derivation(d, lu)


def test_elaborate_duplication_by_mode(lu, fhs):
    dup_u = _closed(Lam("x", Pair(Var("x"), Var("x"))),
                    TFun(Q, Grade("top", "t"), TTensor(Q, Q)), "U")
    check_derivation(elaborate(dup_u, lu), lu)

    dup_l = _closed(Lam("x", Pair(Var("x"), Var("x"))),
                    TFun(P, Grade("nat-discrete", 1), TTensor(P, P)), "L")
    with pytest.raises(ElaborationError) as err:
        elaborate(dup_l, lu)
    assert "Cont" in str(err.value) or "contract" in str(err.value)


def test_elaborate_unused_variable_by_mode(lu):
    ok = _closed(Lam("x", Star("U")), TFun(Q, Grade("top", "t"), TUnit("U")), "U")
    check_derivation(elaborate(ok, lu), lu)
    bad = _closed(Lam("x", Star("L")), TFun(P, Grade("nat-discrete", 0), TUnit("L")), "L")
    with pytest.raises(ElaborationError) as err:
        elaborate(bad, lu)
    assert "Weak" in str(err.value)


def test_elaborate_soundness_on_generated_judgments(lu):
    # whenever elaboration succeeds on a generated conclusion, the result
    # checks and concludes exactly that judgment
    gen = Gen(space=lu, rng=random.Random(13))
    succeeded = 0
    for _ in range(120):
        d = gen.gen_derivation(4)
        j = d.conclusion
        try:
            e = elaborate(j, lu)
        except ElaborationError:
            continue
        succeeded += 1
        check_derivation(e, lu)
        assert e.conclusion.shape() == j.shape()
        assert alpha_eq(e.conclusion.term, j.term)
    assert succeeded >= 30


def test_elaborate_open_judgment_with_requested_grades(lu):
    # x used once but requested at grade 2 in the discrete order: fails
    j = Judgment((Grade("nat-discrete", 2),), ("L",), (("x", P),), "L", Var("x"), P)
    with pytest.raises(ElaborationError):
        elaborate(j, lu)
    # grade 1 is exact
    j1 = Judgment((Grade("nat-discrete", 1),), ("L",), (("x", P),), "L", Var("x"), P)
    assert elaborate(j1, lu).conclusion == j1
