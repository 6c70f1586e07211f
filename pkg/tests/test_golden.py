"""Golden derivations: canonical s-expressions checked without elaboration."""

from pathlib import Path

import pytest

from grass.derivation import check_derivation
from grass.presets import system
from grass.rewrite import beta_step, normalize
from grass.semantics import semantic_eq
from grass.sexpr import derivation_from_sexpr, derivation_to_sexpr, show_judgment

DATA = Path(__file__).parent / "data" / "golden_derivations.tsv"


def _rows():
    for line in DATA.read_text().splitlines():
        name, sexpr, judgment = line.split("\t")
        yield name, sexpr, judgment


@pytest.fixture(scope="module")
def sys_lfhu():
    return system("LfhU")


@pytest.mark.parametrize("name,sexpr,judgment", list(_rows()))
def test_golden_parses_checks_and_round_trips(name, sexpr, judgment, sys_lfhu):
    space, _ = sys_lfhu
    d = derivation_from_sexpr(sexpr, space)
    check_derivation(d, space)
    assert show_judgment(d.conclusion) == judgment
    assert derivation_to_sexpr(d) == sexpr


def test_golden_identity_beta_normalizes(sys_lfhu):
    space, backend = sys_lfhu
    rows = dict((n, s) for n, s, _j in _rows())
    d = derivation_from_sexpr(rows["identity-beta"], space)
    out, steps, normal = normalize(d, 5, space)
    assert (steps, normal) == (1, True)
    assert semantic_eq(backend, d, beta_step(d, space)[0])
