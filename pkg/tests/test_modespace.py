import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grass.errors import ModeOrderError
from grass.grades import Grade, Ideal, Mode, ModeMorphism, builtin_algebra
from grass.modespace import (
    ModeSpace,
    independence_check,
    modespace_validate,
    scalar_mul,
    scale_vector,
    vector_leq,
)
from grass.presets import mode_L, mode_U, standard_space, system


def test_lnl_space_validates():
    space, _ = system("LU")
    assert modespace_validate(space).ok()


def test_single_mode_space_validates():
    space, _ = system("L")
    assert modespace_validate(space).ok()


def test_identity_coherence_failure_is_named():
    # phi_{fh,fh} rigged to a non-identity permutation of the carrier
    from grass.presets import mode_fh

    rigged = ModeMorphism("fh", "fh", table={0: 0, 1: "w", "w": 1})
    space = ModeSpace(
        modes={"fh": mode_fh(), "U": mode_U()},
        order_pairs=frozenset({("fh", "U")}),
        morphisms={
            ("fh", "U"): ModeMorphism("fh", "U", table={0: "t", 1: "t", "w": "t"}),
            ("fh", "fh"): rigged,
        },
    )
    report = modespace_validate(space, budget=8)
    assert any(v.law == "identity-coherence" for v in report.violations)


def test_nat_identity_map_checked_on_budget():
    # a non-identity table on a naturals source is rejected as unnamed
    succ = ModeMorphism("L", "L", table={n: n + 1 for n in range(20)})
    space = ModeSpace(
        modes={"L": mode_L(), "U": mode_U()},
        order_pairs=frozenset({("L", "U")}),
        morphisms={("L", "U"): ModeMorphism("L", "U", named="to-top"), ("L", "L"): succ},
    )
    report = modespace_validate(space, budget=8)
    assert not report.ok()


def test_missing_morphism_is_named():
    space = ModeSpace(
        modes={"L": mode_L(), "U": mode_U()},
        order_pairs=frozenset({("L", "U")}),
        morphisms={},
    )
    report = modespace_validate(space)
    assert any(v.law == "missing-morphism" for v in report.violations)


# -- scalar multiplication ----------------------------------------------------


@pytest.fixture(scope="module")
def lu_space():
    return system("LU")[0]


def test_scalar_one_and_zero(lu_space):
    one = lu_space.grade("L", 1)
    zero = lu_space.grade("L", 0)
    r = lu_space.grade("U", "t")
    assert scalar_mul(one, "L", r, "U", lu_space) == r
    assert scalar_mul(zero, "L", r, "U", lu_space).value == "t"  # zero of top is t
    # in a two-valued target the zero law is visible
    fh_space = system("LfhU")[0]
    z = fh_space.grade("L", 0)
    r = fh_space.grade("fh", 1)
    assert scalar_mul(z, "L", r, "fh", fh_space).value == 0


def test_scalar_omega(fh):
    space, _ = fh
    w = space.grade("fh", "w")
    one = space.grade("fh", 1)
    assert scalar_mul(w, "fh", one, "fh", space).value == "w"


def test_scalar_needs_comparable_modes(lu_space):
    t = lu_space.grade("U", "t")
    one = lu_space.grade("L", 1)
    with pytest.raises(ModeOrderError):
        scalar_mul(t, "U", one, "L", lu_space)


def test_scale_vector_examples(lu_space):
    q = lu_space.grade("L", 2)
    assert scale_vector(q, "L", (), (), lu_space) == ()
    rho = (lu_space.grade("L", 3), lu_space.grade("L", 0))
    scaled = scale_vector(q, "L", rho, ("L", "L"), lu_space)
    assert tuple(g.value for g in scaled) == (6, 0)
    one = lu_space.grade("L", 1)
    assert scale_vector(one, "L", rho, ("L", "L"), lu_space) == rho


def test_vector_leq(lu_space):
    nat = builtin_algebra("nat-usual")
    space = ModeSpace(
        modes={"N": Mode("N", nat, Ideal("nat-usual", nat_predicate="zero-only"), False)},
    )
    g = lambda v: Grade("nat-usual", v)
    assert vector_leq((), (), (), space)
    assert vector_leq((g(1), g(2)), (g(2), g(2)), ("N", "N"), space)
    assert not vector_leq((g(3), g(2)), (g(2), g(2)), ("N", "N"), space)


def test_independence(lu_space):
    assert independence_check((), "L", lu_space)
    assert independence_check(("U", "U"), "L", lu_space)
    assert not independence_check(("L",), "U", lu_space)


# -- algebraic properties ------------------------------------------------------


def test_scale_vector_composes(fh):
    space, _ = fh
    alg = space.mode("fh").algebra
    for qv, rv in itertools.product(alg.carrier, repeat=2):
        q, r = space.grade("fh", qv), space.grade("fh", rv)
        for vec in itertools.product(alg.carrier, repeat=2):
            rho = tuple(space.grade("fh", v) for v in vec)
            modes = ("fh", "fh")
            one_step = scale_vector(
                space.grade("fh", alg.mul(qv, rv)), "fh", rho, modes, space)
            two_step = scale_vector(q, "fh", scale_vector(r, "fh", rho, modes, space), modes, space)
            assert one_step == two_step


def test_scale_vector_monotone(fh):
    space, _ = fh
    alg = space.mode("fh").algebra
    for qv in alg.carrier:
        q = space.grade("fh", qv)
        for a, b in itertools.product(alg.carrier, repeat=2):
            if not alg.leq(a, b):
                continue
            lo = (space.grade("fh", a),)
            hi = (space.grade("fh", b),)
            assert vector_leq(
                scale_vector(q, "fh", lo, ("fh",), space),
                scale_vector(q, "fh", hi, ("fh",), space),
                ("fh",), space,
            )


@given(st.lists(st.integers(min_value=0, max_value=5), max_size=4),
       st.data())
@settings(max_examples=60, deadline=None)
def test_vector_leq_is_a_preorder(values, data):
    nat = builtin_algebra("nat-usual")
    space = ModeSpace(
        modes={"N": Mode("N", nat, Ideal("nat-usual", nat_predicate="zero-only"), False)},
    )
    modes = ("N",) * len(values)
    rho = tuple(Grade("nat-usual", v) for v in values)
    assert vector_leq(rho, rho, modes, space)
    bumps = data.draw(st.lists(st.integers(min_value=0, max_value=3),
                               min_size=len(values), max_size=len(values)))
    mid = tuple(Grade("nat-usual", v + b) for v, b in zip(values, bumps))
    bumps2 = data.draw(st.lists(st.integers(min_value=0, max_value=3),
                                min_size=len(values), max_size=len(values)))
    hi = tuple(Grade("nat-usual", m.value + b) for m, b in zip(mid, bumps2))
    assert vector_leq(rho, mid, modes, space)
    assert vector_leq(mid, hi, modes, space)
    assert vector_leq(rho, hi, modes, space)
