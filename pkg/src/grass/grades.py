"""Grade algebras (preordered semirings), ideals, modes, and mode morphisms.

Carriers are either explicit finite sets or the built-in naturals; every
law is checked by enumeration, truncated to a budget on the naturals.
Grade values are ints or short strings (e.g. "w" for the unrestricted
grade of the none-one-tons semiring).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import ConfigError, InputError, Report

GradeValue = int | str

DEFAULT_BUDGET = 8

NAT_ORDERS = ("usual", "opposite", "discrete")
NAT_IDEALS = ("all", "zero-only", "all-except-one")
NAT_MAPS = ("identity", "to-top", "clamp-01w", "clamp-01")


def _closure(pairs: set[tuple[GradeValue, GradeValue]], elems: Iterable[GradeValue]):
    """Reflexive-transitive closure of a relation on a finite set."""
    rel = set(pairs)
    elems = list(elems)
    rel.update((x, x) for x in elems)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return frozenset(rel)


@dataclass(frozen=True)
class GradeAlgebra:
    """A preordered semiring.

    kind "finite": ops are total tables over `carrier`.
    kind "nat": carrier is the naturals, ops are integer arithmetic and
    `nat_order` names the preorder; enumeration stops at the budget.
    """

    id: str
    kind: str  # "finite" | "nat"
    carrier: tuple[GradeValue, ...] = ()
    zero: GradeValue = 0
    one: GradeValue = 1
    add_table: dict[tuple[GradeValue, GradeValue], GradeValue] = field(default_factory=dict)
    mul_table: dict[tuple[GradeValue, GradeValue], GradeValue] = field(default_factory=dict)
    order: frozenset[tuple[GradeValue, GradeValue]] = frozenset()
    nat_order: str = "usual"

    def __post_init__(self):
        if self.kind not in ("finite", "nat"):
            raise ConfigError(f"algebra {self.id}: unknown carrier kind {self.kind!r}")
        if self.kind == "nat" and self.nat_order not in NAT_ORDERS:
            raise ConfigError(f"algebra {self.id}: unknown naturals order {self.nat_order!r}")
        if self.kind == "finite":
            if self.zero not in self.carrier or self.one not in self.carrier:
                raise ConfigError(f"algebra {self.id}: zero/one outside carrier")

    def elements(self, budget: int = DEFAULT_BUDGET) -> tuple[GradeValue, ...]:
        if self.kind == "finite":
            return self.carrier
        return tuple(range(budget + 1))

    def contains(self, x: GradeValue) -> bool:
        if self.kind == "finite":
            return x in self.carrier
        return isinstance(x, int) and x >= 0

    def _require(self, *xs: GradeValue) -> None:
        for x in xs:
            if not self.contains(x):
                raise InputError(f"algebra {self.id}: {x!r} not in carrier")

    def add(self, x: GradeValue, y: GradeValue) -> GradeValue:
        self._require(x, y)
        if self.kind == "nat":
            return x + y
        try:
            return self.add_table[(x, y)]
        except KeyError:
            raise ConfigError(f"algebra {self.id}: add table missing {(x, y)}") from None

    def mul(self, x: GradeValue, y: GradeValue) -> GradeValue:
        self._require(x, y)
        if self.kind == "nat":
            return x * y
        try:
            return self.mul_table[(x, y)]
        except KeyError:
            raise ConfigError(f"algebra {self.id}: mul table missing {(x, y)}") from None

    def leq(self, x: GradeValue, y: GradeValue) -> bool:
        self._require(x, y)
        if self.kind == "nat":
            if self.nat_order == "usual":
                return x <= y
            if self.nat_order == "opposite":
                return x >= y
            return x == y
        return (x, y) in self.order


@dataclass(frozen=True)
class Grade:
    """A carrier element tagged with the algebra it comes from."""

    algebra: str
    value: GradeValue


@dataclass(frozen=True)
class Ideal:
    """A subset closed under + and two-sided multiplication, containing 0.

    Finite carriers list members explicitly; over the naturals only the
    three named decidable predicates are supported.
    """

    algebra: str
    members: frozenset[GradeValue] = frozenset()
    nat_predicate: str | None = None  # one of NAT_IDEALS for naturals carriers

    def __post_init__(self):
        if self.nat_predicate is not None and self.nat_predicate not in NAT_IDEALS:
            raise ConfigError(f"ideal over {self.algebra}: unknown predicate {self.nat_predicate!r}")

    def contains(self, x: GradeValue) -> bool:
        if self.nat_predicate is not None:
            if self.nat_predicate == "all":
                return True
            if self.nat_predicate == "zero-only":
                return x == 0
            return x != 1  # all-except-one
        return x in self.members


@dataclass(frozen=True)
class Mode:
    """A grade algebra plus its contraction ideal and weakening flag."""

    id: str
    algebra: GradeAlgebra
    cont: Ideal
    weak: bool

    def __post_init__(self):
        if self.cont.algebra != self.algebra.id:
            raise ConfigError(f"mode {self.id}: ideal is over {self.cont.algebra}, not {self.algebra.id}")

    def grade(self, value: GradeValue) -> Grade:
        if not self.algebra.contains(value):
            raise InputError(f"mode {self.id}: {value!r} not in carrier of {self.algebra.id}")
        return Grade(self.algebra.id, value)


@dataclass(frozen=True)
class ModeMorphism:
    """A monotone semiring homomorphism preserving Cont and the Weak implication.

    Finite sources carry an explicit table; naturals sources must use one
    of the named arithmetic maps.
    """

    source: str
    target: str
    table: dict[GradeValue, GradeValue] | None = None
    named: str | None = None  # one of NAT_MAPS

    def __post_init__(self):
        if (self.table is None) == (self.named is None):
            raise ConfigError(f"morphism {self.source}->{self.target}: give exactly one of table/named map")
        if self.named is not None and self.named not in NAT_MAPS:
            raise ConfigError(f"morphism {self.source}->{self.target}: unknown named map {self.named!r}")

    def apply(self, x: GradeValue, target_algebra: GradeAlgebra | None = None) -> GradeValue:
        if self.table is not None:
            try:
                return self.table[x]
            except KeyError:
                raise InputError(f"morphism {self.source}->{self.target}: no image for {x!r}") from None
        if self.named == "identity":
            return x
        if self.named == "to-top":
            if target_algebra is None:
                raise InputError("to-top map needs the target algebra")
            return target_algebra.zero  # zero == one in the one-element semiring
        if self.named == "clamp-01":
            return 0 if x == 0 else 1
        # clamp-01w: 0 -> 0, 1 -> 1, n >= 2 -> w
        if x == 0:
            return 0
        if x == 1:
            return 1
        return "w"


# ---------------------------------------------------------------------------
# Built-in algebras


def _table(carrier, fn):
    return {(x, y): fn(x, y) for x in carrier for y in carrier}


def builtin_algebra(name: str) -> GradeAlgebra:
    """The stock algebras: naturals (three orders), booleans, none-one-tons, top."""
    if name in ("nat-usual", "nat-opposite", "nat-discrete"):
        return GradeAlgebra(id=name, kind="nat", nat_order=name.split("-", 1)[1])
    if name == "bool":
        carrier = (0, 1)
        return GradeAlgebra(
            id=name, kind="finite", carrier=carrier, zero=0, one=1,
            add_table=_table(carrier, lambda x, y: min(x + y, 1)),
            mul_table=_table(carrier, lambda x, y: x * y),
            order=_closure({(0, 1)}, carrier),
        )
    if name == "bool-discrete":
        base = builtin_algebra("bool")
        return GradeAlgebra(
            id=name, kind="finite", carrier=base.carrier, zero=0, one=1,
            add_table=base.add_table, mul_table=base.mul_table,
            order=_closure(set(), base.carrier),
        )
    if name == "none-one-tons":
        carrier = (0, 1, "w")

        def add(x, y):
            if x == 0:
                return y
            if y == 0:
                return x
            return "w"  # 1+1 = 1+w = w+w = w

        def mul(x, y):
            if x == 0 or y == 0:
                return 0
            if x == 1:
                return y
            if y == 1:
                return x
            return "w"

        return GradeAlgebra(
            id=name, kind="finite", carrier=carrier, zero=0, one=1,
            add_table=_table(carrier, add), mul_table=_table(carrier, mul),
            order=_closure({(0, "w"), (1, "w")}, carrier),
        )
    if name == "top":
        carrier = ("t",)
        return GradeAlgebra(
            id=name, kind="finite", carrier=carrier, zero="t", one="t",
            add_table={("t", "t"): "t"}, mul_table={("t", "t"): "t"},
            order=frozenset({("t", "t")}),
        )
    raise ConfigError(f"unknown built-in algebra {name!r}")


BUILTIN_ALGEBRAS = ("nat-usual", "nat-opposite", "nat-discrete", "bool", "none-one-tons", "top")


# ---------------------------------------------------------------------------
# Law checking


def algebra_axioms_check(alg: GradeAlgebra, budget: int = DEFAULT_BUDGET) -> Report:
    """Check all semiring and preorder laws on the tested subset.

    Returns the list of violated law instances; empty means no
    counterexample was found within the budget.
    """
    if budget < 1:
        raise InputError("budget must be >= 1")
    report = Report()
    elems = alg.elements(budget)

    if alg.kind == "finite":
        for x, y in itertools.product(elems, repeat=2):
            if not alg.contains(alg.add(x, y)):
                report.add("add-closed", (x, y))
            if not alg.contains(alg.mul(x, y)):
                report.add("mul-closed", (x, y))
        if report.violations:
            return report

    for x in elems:
        if alg.add(x, alg.zero) != x:
            report.add("add-unit", (x,))
        if alg.mul(x, alg.one) != x:
            report.add("mul-unit-right", (x,))
        if alg.mul(alg.one, x) != x:
            report.add("mul-unit-left", (x,))
        if alg.mul(x, alg.zero) != alg.zero or alg.mul(alg.zero, x) != alg.zero:
            report.add("zero-annihilates", (x,))
        if not alg.leq(x, x):
            report.add("leq-reflexive", (x,))

    for x, y in itertools.product(elems, repeat=2):
        if alg.add(x, y) != alg.add(y, x):
            report.add("add-commutative", (x, y))

    for x, y, z in itertools.product(elems, repeat=3):
        if alg.add(alg.add(x, y), z) != alg.add(x, alg.add(y, z)):
            report.add("add-associative", (x, y, z))
        if alg.mul(alg.mul(x, y), z) != alg.mul(x, alg.mul(y, z)):
            report.add("mul-associative", (x, y, z))
        if alg.mul(x, alg.add(y, z)) != alg.add(alg.mul(x, y), alg.mul(x, z)):
            report.add("distributes-left", (x, y, z))
        if alg.mul(alg.add(x, y), z) != alg.add(alg.mul(x, z), alg.mul(y, z)):
            report.add("distributes-right", (x, y, z))
        if alg.leq(x, y) and alg.leq(y, z) and not alg.leq(x, z):
            report.add("leq-transitive", (x, y, z))

    for x, x2, y, y2 in itertools.product(elems, repeat=4):
        if alg.leq(x, x2) and alg.leq(y, y2):
            if not alg.leq(alg.add(x, y), alg.add(x2, y2)):
                report.add("add-monotone", (x, x2, y, y2))
            if not alg.leq(alg.mul(x, y), alg.mul(x2, y2)):
                report.add("mul-monotone", (x, x2, y, y2))
    return report


def ideal_check(alg: GradeAlgebra, ideal: Ideal | Iterable[GradeValue], budget: int = DEFAULT_BUDGET) -> bool:
    """True iff the subset contains 0 and is closed under + and two-sided *."""
    if isinstance(ideal, Ideal):
        if ideal.nat_predicate is not None:
            if alg.kind != "nat":
                raise InputError("named ideal predicates only apply to the naturals carrier")
            # The three named predicates are ideals of the naturals; verified
            # symbolically: {0} and N trivially, N\{1} because sums and
            # products of non-1 naturals are never 1.
            return True
        members = set(ideal.members)
    else:
        members = set(ideal)
    for x in members:
        if not alg.contains(x):
            raise InputError(f"ideal member {x!r} outside carrier of {alg.id}")
    if alg.zero not in members:
        return False
    elems = alg.elements(budget)
    for x, y in itertools.product(members, repeat=2):
        if alg.add(x, y) not in members:
            return False
    for r in elems:
        for x in members:
            if alg.mul(r, x) not in members or alg.mul(x, r) not in members:
                return False
    return True


def ideal_closure(alg: GradeAlgebra, subset: Iterable[GradeValue]) -> frozenset[GradeValue]:
    """Least ideal containing the subset, by fixpoint over a finite carrier."""
    if alg.kind != "finite":
        raise InputError("ideal_closure requires a finite carrier")
    current = set(subset) | {alg.zero}
    for x in current:
        if not alg.contains(x):
            raise InputError(f"{x!r} outside carrier of {alg.id}")
    changed = True
    while changed:
        changed = False
        new = set()
        for x, y in itertools.product(current, repeat=2):
            new.add(alg.add(x, y))
        for r in alg.carrier:
            for x in current:
                new.add(alg.mul(r, x))
                new.add(alg.mul(x, r))
        if not new <= current:
            current |= new
            changed = True
    return frozenset(current)


def mode_morphism_check(
    phi: ModeMorphism,
    source: Mode,
    target: Mode,
    budget: int = DEFAULT_BUDGET,
) -> Report:
    """Check the homomorphism, monotonicity, Cont and Weak conditions."""
    report = Report()
    if source.id != phi.source or target.id != phi.target:
        report.add("endpoints", (phi.source, phi.target), "morphism endpoints do not match the supplied modes")
        return report
    src, tgt = source.algebra, target.algebra
    if src.kind == "nat" and phi.named is None:
        report.add("map-kind", (), "naturals sources require a named map")
        return report

    def f(x):
        return phi.apply(x, tgt)

    elems = src.elements(budget)
    for x in elems:
        if not tgt.contains(f(x)):
            report.add("image-in-carrier", (x, f(x)))
    if report.violations:
        return report
    if f(src.zero) != tgt.zero:
        report.add("preserves-zero", (src.zero, f(src.zero)))
    if f(src.one) != tgt.one:
        report.add("preserves-one", (src.one, f(src.one)))
    for x, y in itertools.product(elems, repeat=2):
        if f(src.add(x, y)) != tgt.add(f(x), f(y)):
            report.add("preserves-add", (x, y))
        if f(src.mul(x, y)) != tgt.mul(f(x), f(y)):
            report.add("preserves-mul", (x, y))
        if src.leq(x, y) and not tgt.leq(f(x), f(y)):
            report.add("monotone", (x, y))
    for x in elems:
        if source.cont.contains(x) and not target.cont.contains(f(x)):
            report.add("preserves-cont", (x, f(x)))
    if source.weak and not target.weak:
        report.add("preserves-weak", (source.id, target.id), "Weak(source) -> Weak(target) is false")
    return report


def compose_morphisms(
    first: ModeMorphism, second: ModeMorphism, mid_algebra: GradeAlgebra,
    target_algebra: GradeAlgebra, budget: int = DEFAULT_BUDGET,
) -> Callable[[GradeValue], GradeValue]:
    """Pointwise composition second . first as a plain function."""
    if first.target != second.source:
        raise InputError("morphisms not composable")
    return lambda x: second.apply(first.apply(x, mid_algebra), target_algebra)
