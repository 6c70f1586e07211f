"""Substitution on derivations, beta reduction, eta expansion, preservation.

`subst_simultaneous` is the constructive substitution algorithm: a
structural recursion over the target derivation that rebuilds each rule
around the substituted premises, duplicating a replacement at contraction
nodes and re-weakening whole replacement contexts at weakening nodes.

`beta_step` contracts the leftmost-outermost redex.  A redex is an
eliminator whose scrutinee ends in the matching introduction, possibly
through interleaved weak/sub/cont/exchange nodes; those are pushed below
the eliminator first, one per recursion step, and re-applied around the
contracted result, so every step corresponds to one proof case.
"""

from __future__ import annotations

from dataclasses import dataclass

from .derivation import (
    Derivation,
    check_derivation,
    mk_arrowE,
    mk_arrowI,
    mk_cont,
    mk_dropE,
    mk_dropI,
    mk_exchange,
    mk_pairE,
    mk_pairI,
    mk_raiseE,
    mk_raiseI,
    mk_sub,
    mk_sumE,
    mk_sumIL,
    mk_sumIR,
    mk_unitE,
    mk_unitI,
    mk_var,
    mk_weak,
    rebuild,
)
from .errors import InputError
from .modespace import ModeSpace, scale_vector
from .syntax import (
    DropTm,
    Inl,
    Inr,
    Judgment,
    Lam,
    Pair,
    RaiseTm,
    Star,
    TDrop,
    TFun,
    TRaise,
    TSum,
    TTensor,
    TUnit,
    free_vars,
    fresh_name,
)

# ---------------------------------------------------------------------------
# Derivation-level renaming of context variables


def all_names(d: Derivation) -> set[str]:
    names: set[str] = set()
    for node in d.walk():
        names.update(node.conclusion.names())
        names.update(free_vars(node.conclusion.term))
    return names


def rename_ctx_vars(space: ModeSpace, d: Derivation, mapping: dict[str, str]) -> Derivation:
    """Rename free context variables throughout a derivation.

    Target names must be fresh for the whole tree; occurrences of a key
    below the node where a different variable reuses that name are left
    alone by restricting the mapping to each premise's context.
    """
    live = {k: v for k, v in mapping.items() if k in d.conclusion.names()}
    if not live:
        return d
    premises = []
    for p in d.premises:
        sub = {k: v for k, v in live.items() if k in p.conclusion.names()}
        if d.rule == "cont":
            # the contracted variable may reuse the conclusion name
            z = d.payload[0]
            x1, x2 = p.conclusion.ctx[-2][0], p.conclusion.ctx[-1][0]
            if z in live:
                for x in (x1, x2):
                    if x == z:
                        sub[x] = live[z]
        premises.append(rename_ctx_vars(space, p, sub))
    payload = d.payload
    if d.rule in ("var", "weak") and payload[0] in live:
        payload = (live[payload[0]],) + payload[1:]
    if d.rule == "cont" and payload[0] in live:
        payload = (live[payload[0]],)
    return rebuild(space, d.rule, premises, payload)


def _freshen_last_bound(space: ModeSpace, body: Derivation, count: int,
                        avoid: set[str]) -> Derivation:
    """Rename the last `count` context entries of `body` when they clash."""
    names = body.conclusion.names()
    mapping = {}
    pool = set(avoid) | set(names)
    for x in names[-count:]:
        if x in avoid:
            x2 = fresh_name(pool | all_names(body), x)
            mapping[x] = x2
            pool.add(x2)
    if not mapping:
        return body
    return rename_ctx_vars(space, body, mapping)


# ---------------------------------------------------------------------------
# Simultaneous substitution


@dataclass(frozen=True)
class SubstitutionBundle:
    """A target derivation plus one replacement per context entry."""

    target: Derivation
    replacements: tuple[Derivation, ...]


def bundle_validate(b: SubstitutionBundle, space: ModeSpace) -> None:
    c = b.target.conclusion
    if len(b.replacements) != len(c.ctx):
        raise InputError("bundle needs one replacement per context entry")
    seen: set[str] = set()
    for i, (rep, (name, ty), mode) in enumerate(zip(b.replacements, c.ctx, c.modes)):
        rc = rep.conclusion
        if rc.ty != ty:
            raise InputError(f"replacement {i} ({name}): type mismatch")
        if rc.mode != mode:
            raise InputError(f"replacement {i} ({name}): judged at {rc.mode}, expected {mode}")
        for x in rc.names():
            if x in seen:
                raise InputError(f"replacement contexts share the variable {x!r}")
            seen.add(x)


def identity_replacement(space: ModeSpace, name: str, ty) -> Derivation:
    return mk_var(space, name, ty)


def subst_simultaneous(b: SubstitutionBundle, space: ModeSpace) -> Derivation:
    """Substitute every context variable of the target at once.

    The result concludes
    ``r1.s1, ..., rk.sk | N1..Nk (.) D1..Dk |- [e_i/x_i]t : T``.
    """
    bundle_validate(b, space)
    return _subst(space, b.target, tuple(b.replacements))


def _identity_reps(space: ModeSpace, d: Derivation, lo: int, hi: int):
    c = d.conclusion
    return tuple(identity_replacement(space, name, ty) for name, ty in c.ctx[lo:hi])


def _subst(space: ModeSpace, d: Derivation, reps: tuple[Derivation, ...]) -> Derivation:
    c = d.conclusion
    rule = d.rule

    if rule == "var":
        return reps[0]
    if rule == "unitI":
        return d

    if rule == "weak":
        inner = _subst(space, d.premises[0], reps[:-1])
        rep = reps[-1].conclusion
        out = inner
        for (name, ty) in rep.ctx:
            out = mk_weak(space, out, name, ty)
        return out

    if rule == "cont":
        premise = d.premises[0]
        rep = reps[-1]
        avoid = set()
        for r in reps:
            avoid |= all_names(r)
        avoid |= all_names(d)
        copy_map = {}
        for x in rep.conclusion.names():
            x2 = fresh_name(avoid, x + "_c")
            copy_map[x] = x2
            avoid.add(x2)
        rep2 = rename_ctx_vars(space, rep, copy_map)
        inner = _subst(space, premise, reps[:-1] + (rep, rep2))
        # contract each duplicated entry back onto the original name
        out = inner
        for j, (name, _ty) in enumerate(rep.conclusion.ctx):
            names = out.conclusion.names()
            twin = copy_map[name]
            rest = tuple(x for x in names if x not in (name, twin))
            perm_names = rest + (name, twin)
            perm = tuple(names.index(x) for x in perm_names)
            out = mk_exchange(space, out, perm) if perm != tuple(range(len(perm))) else out
            out = mk_cont(space, out, name)
        # restore the block order: Delta_1 .. Delta_{k-1}, Delta_z
        want = tuple(x for r in reps[:-1] for x in r.conclusion.names())
        want += rep.conclusion.names()
        names = out.conclusion.names()
        perm = tuple(names.index(x) for x in want)
        if perm != tuple(range(len(perm))):
            out = mk_exchange(space, out, perm)
        return out

    if rule == "sub":
        inner = _subst(space, d.premises[0], reps)
        values = []
        for g, n, rep in zip(c.rho, c.modes, reps):
            scaled = scale_vector(g, n, rep.conclusion.rho, rep.conclusion.modes, space)
            values.extend(s.value for s in scaled)
        return mk_sub(space, inner, tuple(values))

    if rule == "exchange":
        perm = d.payload[0]
        premise = d.premises[0]
        inv = [0] * len(perm)
        for i, p in enumerate(perm):
            inv[p] = i
        premise_reps = tuple(reps[inv[p]] for p in range(len(perm)))
        inner = _subst(space, premise, premise_reps)
        # block permutation: conclusion block i is premise block perm[i]
        sizes = [len(r.conclusion.ctx) for r in premise_reps]
        starts = [0] * len(sizes)
        acc = 0
        for i, s in enumerate(sizes):
            starts[i] = acc
            acc += s
        flat = []
        for i in range(len(perm)):
            p = perm[i]
            flat.extend(range(starts[p], starts[p] + sizes[p]))
        if flat != list(range(acc)):
            return mk_exchange(space, inner, tuple(flat))
        return inner

    if rule in ("sumIL", "sumIR", "raiseI", "raiseE", "dropI"):
        inner = _subst(space, d.premises[0], reps)
        if rule == "sumIL":
            return mk_sumIL(space, inner, d.payload[0])
        if rule == "sumIR":
            return mk_sumIR(space, inner, d.payload[0])
        if rule == "raiseI":
            return mk_raiseI(space, inner, d.payload[0])
        if rule == "raiseE":
            return mk_raiseE(space, inner)
        return mk_dropI(space, inner, d.payload[0], d.payload[1])

    if rule == "arrowI":
        premise = d.premises[0]
        avoid = set()
        for r in reps:
            avoid |= set(r.conclusion.names())
        premise = _freshen_last_bound(space, premise, 1, avoid)
        x, ty = premise.conclusion.ctx[-1]
        inner = _subst(space, premise, reps + (identity_replacement(space, x, ty),))
        return mk_arrowI(space, inner)

    if rule == "pairI":
        left, right = d.premises
        nl = len(left.conclusion.ctx)
        il = _subst(space, left, reps[:nl])
        ir = _subst(space, right, reps[nl:])
        return mk_pairI(space, il, ir)

    if rule == "arrowE":
        fn, arg = d.premises
        nf = len(fn.conclusion.ctx)
        return mk_arrowE(space, _subst(space, fn, reps[:nf]), _subst(space, arg, reps[nf:]))

    if rule == "unitE":
        body, scrut = d.premises
        nb = len(body.conclusion.ctx)
        return mk_unitE(space, d.payload[0], _subst(space, body, reps[:nb]),
                        _subst(space, scrut, reps[nb:]))

    if rule == "pairE":
        body, scrut = d.premises
        nb = len(body.conclusion.ctx) - 2
        avoid = set()
        for r in reps:
            avoid |= set(r.conclusion.names())
        body = _freshen_last_bound(space, body, 2, avoid)
        (x1, t1), (x2, t2) = body.conclusion.ctx[-2:]
        body_reps = reps[:nb] + (
            identity_replacement(space, x1, t1), identity_replacement(space, x2, t2))
        return mk_pairE(space, _subst(space, body, body_reps), _subst(space, scrut, reps[nb:]))

    if rule == "dropE":
        body, scrut = d.premises
        nb = len(body.conclusion.ctx) - 1
        avoid = set()
        for r in reps:
            avoid |= set(r.conclusion.names())
        body = _freshen_last_bound(space, body, 1, avoid)
        (y, ty) = body.conclusion.ctx[-1]
        body_reps = reps[:nb] + (identity_replacement(space, y, ty),)
        return mk_dropE(space, _subst(space, body, body_reps), _subst(space, scrut, reps[nb:]))

    if rule == "sumE":
        left, right, scrut = d.premises
        nb = len(left.conclusion.ctx) - 1
        avoid = set()
        for r in reps:
            avoid |= set(r.conclusion.names())
        left = _freshen_last_bound(space, left, 1, avoid)
        right = _freshen_last_bound(space, right, 1, avoid)
        (y1, t1) = left.conclusion.ctx[-1]
        (y2, t2) = right.conclusion.ctx[-1]
        l2 = _subst(space, left, reps[:nb] + (identity_replacement(space, y1, t1),))
        r2 = _subst(space, right, reps[:nb] + (identity_replacement(space, y2, t2),))
        return mk_sumE(space, l2, r2, _subst(space, scrut, reps[nb:]))

    raise InputError(f"substitution does not handle rule {rule!r}")


# ---------------------------------------------------------------------------
# Beta reduction

_SCRUT_INDEX = {"arrowE": 0, "unitE": 1, "pairE": 1, "sumE": 2, "dropE": 1, "raiseE": 0}
_MATCHING_TERM = {
    "arrowE": Lam, "unitE": Star, "pairE": Pair, "sumE": (Inl, Inr),
    "dropE": DropTm, "raiseE": RaiseTm,
}


def _is_redex(d: Derivation) -> bool:
    idx = _SCRUT_INDEX.get(d.rule)
    if idx is None:
        return False
    term = d.premises[idx].conclusion.term
    want = _MATCHING_TERM[d.rule]
    return isinstance(term, want)


def beta_step(d: Derivation, space: ModeSpace):
    """Contract the leftmost-outermost redex; None when in normal form.

    Returns (derivation, path) where path is the premise-index path of the
    eliminator that was contracted.  The conclusion judgment is unchanged
    apart from the term.
    """
    if _is_redex(d):
        return _contract(space, d), ()
    for i, p in enumerate(d.premises):
        step = beta_step(p, space)
        if step is not None:
            new_p, path = step
            premises = d.premises[:i] + (new_p,) + d.premises[i + 1:]
            return rebuild(space, d.rule, premises, d.payload), (i,) + path
    return None


def _rebuild_elim(space: ModeSpace, d: Derivation, scrut: Derivation) -> Derivation:
    idx = _SCRUT_INDEX[d.rule]
    premises = d.premises[:idx] + (scrut,) + d.premises[idx + 1:]
    return rebuild(space, d.rule, premises, d.payload)


def _contract(space: ModeSpace, d: Derivation) -> Derivation:
    """One beta contraction at the root eliminator, pushing structural
    nodes on the scrutinee side below the eliminator first."""
    idx = _SCRUT_INDEX[d.rule]
    scrut = d.premises[idx]
    rule = scrut.rule

    if rule == "sub":
        inner = _contract(space, _rebuild_elim(space, d, scrut.premises[0]))
        return mk_sub(space, inner, tuple(g.value for g in d.conclusion.rho))

    if rule == "exchange":
        perm = scrut.payload[0]
        inner = _contract(space, _rebuild_elim(space, d, scrut.premises[0]))
        # pad the permutation over the untouched premise segments
        names = inner.conclusion.names()
        want = d.conclusion.names()
        perm_flat = tuple(names.index(x) for x in want)
        if perm_flat == tuple(range(len(names))):
            return inner
        return mk_exchange(space, inner, perm_flat)

    if rule == "weak":
        name, ty = scrut.payload
        inner = _contract(space, _rebuild_elim(space, d, scrut.premises[0]))
        out = mk_weak(space, inner, name, ty)
        names = out.conclusion.names()
        want = d.conclusion.names()
        perm = tuple(names.index(x) for x in want)
        if perm != tuple(range(len(perm))):
            out = mk_exchange(space, out, perm)
        return out

    if rule == "cont":
        z = scrut.payload[0]
        premise = scrut.premises[0]
        x1, x2 = premise.conclusion.ctx[-2][0], premise.conclusion.ctx[-1][0]
        # the un-contracted names must not clash with the other premises
        clash = set(d.conclusion.names())
        premise = _freshen_last_bound(space, premise, 2, clash - {x1, x2})
        x1, x2 = premise.conclusion.ctx[-2][0], premise.conclusion.ctx[-1][0]
        inner = _contract(space, _rebuild_elim(space, d, premise))
        names = inner.conclusion.names()
        rest = tuple(x for x in names if x not in (x1, x2))
        perm = tuple(names.index(x) for x in rest + (x1, x2))
        if perm != tuple(range(len(perm))):
            inner = mk_exchange(space, inner, perm)
        out = mk_cont(space, inner, z)
        names = out.conclusion.names()
        want = d.conclusion.names()
        perm = tuple(names.index(x) for x in want)
        if perm != tuple(range(len(perm))):
            out = mk_exchange(space, out, perm)
        return out

    # the introduction cases
    if d.rule == "arrowE" and rule == "arrowI":
        body = scrut.premises[0]
        arg = d.premises[1]
        body = _freshen_last_bound(space, body, 1, set(arg.conclusion.names()))
        nb = len(body.conclusion.ctx) - 1
        reps = _identity_reps(space, body, 0, nb) + (arg,)
        return _subst(space, body, reps)

    if d.rule == "unitE" and rule == "unitI":
        return d.premises[0]

    if d.rule == "pairE" and rule == "pairI":
        body = d.premises[0]
        t1, t2 = scrut.premises
        avoid = set(t1.conclusion.names()) | set(t2.conclusion.names())
        body = _freshen_last_bound(space, body, 2, avoid)
        nb = len(body.conclusion.ctx) - 2
        reps = _identity_reps(space, body, 0, nb) + (t1, t2)
        return _subst(space, body, reps)

    if d.rule == "sumE" and rule in ("sumIL", "sumIR"):
        branch = d.premises[0] if rule == "sumIL" else d.premises[1]
        inj = scrut.premises[0]
        branch = _freshen_last_bound(space, branch, 1, set(inj.conclusion.names()))
        nb = len(branch.conclusion.ctx) - 1
        reps = _identity_reps(space, branch, 0, nb) + (inj,)
        return _subst(space, branch, reps)

    if d.rule == "dropE" and rule == "dropI":
        body = d.premises[0]
        inner = scrut.premises[0]
        body = _freshen_last_bound(space, body, 1, set(inner.conclusion.names()))
        nb = len(body.conclusion.ctx) - 1
        reps = _identity_reps(space, body, 0, nb) + (inner,)
        return _subst(space, body, reps)

    if d.rule == "raiseE" and rule == "raiseI":
        return scrut.premises[0]

    raise InputError(f"no contraction for {d.rule} against {rule}")


# ---------------------------------------------------------------------------
# Eta expansion

ETA_RULES = ("unit", "pair", "arrow", "sum", "raise", "drop")

_ETA_FOR_TYPE = {
    TUnit: "unit", TTensor: "pair", TFun: "arrow", TSum: "sum",
    TRaise: "raise", TDrop: "drop",
}


def eta_rule_for(d: Derivation) -> str | None:
    return _ETA_FOR_TYPE.get(type(d.conclusion.ty))


def eta_expand(d: Derivation, rule: str, space: ModeSpace) -> Derivation:
    """Expand the conclusion term at its type's canonical shape.

    The conclusion judgment is unchanged apart from the term.
    """
    c = d.conclusion
    ty = c.ty
    expected = eta_rule_for(d)
    if rule not in ETA_RULES:
        raise InputError(f"unknown eta rule {rule!r}")
    if expected != rule:
        raise InputError(f"eta-{rule} does not apply to a conclusion of type {type(ty).__name__}")
    avoid = set(c.names()) | free_vars(c.term)

    if rule == "unit":
        alg = space.mode(c.mode).algebra
        return mk_unitE(space, alg.one, mk_unitI(space, c.mode), d)

    if rule == "pair":
        assert isinstance(ty, TTensor)
        n = c.mode
        x1 = fresh_name(avoid, "x1")
        x2 = fresh_name(avoid | {x1}, "x2")
        body = mk_pairI(space, mk_var(space, x1, ty.left), mk_var(space, x2, ty.right))
        return mk_pairE(space, body, d)

    if rule == "arrow":
        assert isinstance(ty, TFun)
        x = fresh_name(avoid, "x")
        inner = mk_arrowE(space, d, mk_var(space, x, ty.arg))
        return mk_arrowI(space, inner)

    if rule == "sum":
        assert isinstance(ty, TSum)
        x1 = fresh_name(avoid, "x1")
        x2 = fresh_name(avoid | {x1}, "x2")
        left = mk_sumIL(space, mk_var(space, x1, ty.left), ty.right)
        right = mk_sumIR(space, mk_var(space, x2, ty.right), ty.left)
        return mk_sumE(space, left, right, d)

    if rule == "raise":
        assert isinstance(ty, TRaise)
        return mk_raiseI(space, mk_raiseE(space, d), ty.high)

    assert isinstance(ty, TDrop)
    z = fresh_name(avoid, "z")
    body = mk_dropI(space, mk_var(space, z, ty.body), ty.grade.value, ty.low)
    return mk_dropE(space, body, d)


# ---------------------------------------------------------------------------
# Preservation and normalization


def preservation_check(before: Derivation, after: Derivation) -> bool:
    """Conclusions agree in grade vector, modes, context, mode, and type."""
    return before.conclusion.shape() == after.conclusion.shape()


def normalize(d: Derivation, fuel: int, space: ModeSpace):
    """Apply beta steps until normal or out of fuel.

    Returns (derivation, steps_taken, normal?).  Every intermediate step
    is preservation-checked and re-checked by check_derivation.
    """
    steps = 0
    current = d
    while steps < fuel:
        step = beta_step(current, space)
        if step is None:
            return current, steps, True
        nxt, _path = step
        if not preservation_check(current, nxt):
            raise InputError("beta step changed the conclusion judgment")
        check_derivation(nxt, space)
        current = nxt
        steps += 1
    return current, steps, beta_step(current, space) is None


def all_single_steps(d: Derivation, space: ModeSpace) -> list[tuple[Derivation, tuple]]:
    """Every one-step reduct of d, one per redex position (any order, not
    just leftmost-outermost)."""
    out = []
    if _is_redex(d):
        out.append((_contract(space, d), ()))
    for i, p in enumerate(d.premises):
        for reduct, path in all_single_steps(p, space):
            premises = d.premises[:i] + (reduct,) + d.premises[i + 1:]
            out.append((rebuild(space, d.rule, premises, d.payload), (i,) + path))
    return out
