"""The parametrizing structure: a preorder of modes with coherent morphisms.

Also hosts cross-mode scalar multiplication, grade-vector comparison and
the independence check that every typing judgment must satisfy.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ConfigError, InputError, ModeOrderError, Report
from .grades import (
    DEFAULT_BUDGET,
    Grade,
    GradeValue,
    Mode,
    ModeMorphism,
    mode_morphism_check,
)

GradeVector = tuple[Grade, ...]
ModeVector = tuple[str, ...]


def _order_closure(pairs: set[tuple[str, str]], ids: list[str]) -> frozenset[tuple[str, str]]:
    rel = set(pairs)
    rel.update((i, i) for i in ids)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(rel), repeat=2):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return frozenset(rel)


@dataclass
class ModeSpace:
    """Finite preordered set of modes with a morphism for each comparable pair.

    The order is closed reflexively and transitively on construction.
    `base_types` maps user-declared base type names to their mode.
    """

    modes: dict[str, Mode]
    order_pairs: frozenset[tuple[str, str]] = frozenset()
    morphisms: dict[tuple[str, str], ModeMorphism] = field(default_factory=dict)
    base_types: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        ids = list(self.modes)
        for a, b in self.order_pairs:
            if a not in self.modes or b not in self.modes:
                raise ConfigError(f"mode order mentions unknown mode {(a, b)}")
        self.order_pairs = _order_closure(set(self.order_pairs), ids)
        for (a, b) in self.morphisms:
            if (a, b) not in self.order_pairs:
                raise ConfigError(f"morphism {a}->{b} given for an incomparable pair")
        for m in ids:
            self.morphisms.setdefault((m, m), ModeMorphism(m, m, named="identity"))
        for name, mode in self.base_types.items():
            if mode not in self.modes:
                raise ConfigError(f"base type {name}: unknown mode {mode}")

    def mode(self, m: str) -> Mode:
        try:
            return self.modes[m]
        except KeyError:
            raise InputError(f"unknown mode {m!r}") from None

    def leq(self, m: str, n: str) -> bool:
        self.mode(m), self.mode(n)
        return (m, n) in self.order_pairs

    def morphism(self, m: str, n: str) -> ModeMorphism:
        if not self.leq(m, n):
            raise ModeOrderError(f"modes {m} <= {n} does not hold")
        try:
            return self.morphisms[(m, n)]
        except KeyError:
            raise ConfigError(f"missing morphism for {m} <= {n}") from None

    def phi(self, m: str, n: str, x: GradeValue) -> GradeValue:
        return self.morphism(m, n).apply(x, self.mode(n).algebra)

    def grade(self, m: str, value: GradeValue) -> Grade:
        return self.mode(m).grade(value)

    def algebra_of_grade(self, g: Grade):
        for mode in self.modes.values():
            if mode.algebra.id == g.algebra:
                return mode.algebra
        raise InputError(f"grade algebra {g.algebra!r} not used by any mode")


def modespace_validate(space: ModeSpace, budget: int = DEFAULT_BUDGET) -> Report:
    """Check order laws, morphism laws, identity and composition coherence."""
    report = Report()
    ids = list(space.modes)

    for m in ids:
        if (m, m) not in space.order_pairs:
            report.add("order-reflexive", (m,))
    for a, b in space.order_pairs:
        for c, d in space.order_pairs:
            if b == c and (a, d) not in space.order_pairs:
                report.add("order-transitive", (a, b, d))

    for m, n in sorted(space.order_pairs):
        if (m, n) not in space.morphisms:
            report.add("missing-morphism", (m, n), f"no morphism for {m} <= {n}")
            continue
        sub = mode_morphism_check(space.morphisms[(m, n)], space.mode(m), space.mode(n), budget)
        for v in sub.violations:
            report.add(f"morphism-{m}->{n}-{v.law}", v.witness, v.detail)

    # phi_{m,m} = id pointwise
    for m in ids:
        phi = space.morphisms.get((m, m))
        if phi is None:
            continue
        alg = space.mode(m).algebra
        for x in alg.elements(budget):
            if phi.apply(x, alg) != x:
                report.add("identity-coherence", (m, x), f"phi_({m},{m}) is not the identity")
                break

    # phi_{n,l} . phi_{m,n} = phi_{m,l} pointwise
    for m, n in sorted(space.order_pairs):
        for l in ids:
            if (n, l) not in space.order_pairs:
                continue
            if any(key not in space.morphisms for key in ((m, n), (n, l), (m, l))):
                continue
            alg_n = space.mode(n).algebra
            alg_l = space.mode(l).algebra
            for x in space.mode(m).algebra.elements(budget):
                via = space.morphisms[(n, l)].apply(space.morphisms[(m, n)].apply(x, alg_n), alg_l)
                direct = space.morphisms[(m, l)].apply(x, alg_l)
                if via != direct:
                    report.add("composition-coherence", (m, n, l, x))
                    break
    return report


def scalar_mul(q: Grade, m: str, r: Grade, n: str, space: ModeSpace) -> Grade:
    """phi_{m,n}(q) * r, computed in the algebra of mode n.  Requires m <= n."""
    mode_m, mode_n = space.mode(m), space.mode(n)
    if q.algebra != mode_m.algebra.id:
        raise InputError(f"grade {q} is not from the algebra of mode {m}")
    if r.algebra != mode_n.algebra.id:
        raise InputError(f"grade {r} is not from the algebra of mode {n}")
    if not space.leq(m, n):
        raise ModeOrderError(f"scalar multiplication needs {m} <= {n}")
    value = mode_n.algebra.mul(space.phi(m, n, q.value), r.value)
    return Grade(mode_n.algebra.id, value)


def scale_vector(q: Grade, m: str, rho: GradeVector, modes: ModeVector, space: ModeSpace) -> GradeVector:
    """Entrywise scalar multiplication q * rho; output modes unchanged."""
    if len(rho) != len(modes):
        raise InputError(f"grade vector length {len(rho)} != mode vector length {len(modes)}")
    return tuple(scalar_mul(q, m, r, n, space) for r, n in zip(rho, modes))


def vector_leq(rho: GradeVector, sigma: GradeVector, modes: ModeVector, space: ModeSpace) -> bool:
    """Entrywise comparison in each entry's own algebra."""
    if not (len(rho) == len(sigma) == len(modes)):
        raise InputError("vector_leq: length mismatch")
    for r, q, n in zip(rho, sigma, modes):
        alg = space.mode(n).algebra
        if r.algebra != alg.id or q.algebra != alg.id:
            raise InputError(f"entry at mode {n} drawn from the wrong algebra")
        if not alg.leq(r.value, q.value):
            return False
    return True


def independence_check(modes: ModeVector, m: str, space: ModeSpace) -> bool:
    """True iff m <= n for every mode n in the vector."""
    return all(space.leq(m, n) for n in modes)


def add_grades(a: Grade, b: Grade, space: ModeSpace) -> Grade:
    if a.algebra != b.algebra:
        raise InputError("cannot add grades from different algebras")
    alg = space.algebra_of_grade(a)
    return Grade(a.algebra, alg.add(a.value, b.value))
