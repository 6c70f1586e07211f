"""Independent reference implementations used to cross-check the main paths.

These deliberately use different representations from the rest of the
package: terms become locally-nameless trees (bound variables as indices,
free variables as names), where simultaneous substitution is plain
grafting, and ideal closure is recomputed by intersecting all ideals.
"""

from __future__ import annotations

import itertools

from .errors import InputError
from .grades import GradeAlgebra, ideal_check
from .syntax import (
    App,
    Case,
    DropTm,
    Inl,
    Inr,
    Lam,
    LetDrop,
    LetPair,
    LetStar,
    Pair,
    RaiseTm,
    Star,
    Term,
    UnraiseTm,
    Var,
)

# ---------------------------------------------------------------------------
# Locally-nameless terms: tuples ("bound", i) | ("free", x) | (head, ...)


def to_locally_nameless(t: Term, env: tuple[str, ...] = ()):
    match t:
        case Var(x):
            for i, name in enumerate(reversed(env)):
                if name == x:
                    return ("bound", i)
            return ("free", x)
        case Lam(x, body):
            return ("lam", to_locally_nameless(body, env + (x,)))
        case App(fn, arg):
            return ("app", to_locally_nameless(fn, env), to_locally_nameless(arg, env))
        case Star(m):
            return ("star", m)
        case LetStar(q, s, b):
            return ("let*", q, to_locally_nameless(s, env), to_locally_nameless(b, env))
        case Pair(a, b):
            return ("pair", to_locally_nameless(a, env), to_locally_nameless(b, env))
        case LetPair(q, x1, x2, s, b):
            return ("letp", q, to_locally_nameless(s, env),
                    to_locally_nameless(b, env + (x1, x2)))
        case Inl(b):
            return ("inl", to_locally_nameless(b, env))
        case Inr(b):
            return ("inr", to_locally_nameless(b, env))
        case Case(q, s, x1, t1, x2, t2):
            return ("case", q, to_locally_nameless(s, env),
                    to_locally_nameless(t1, env + (x1,)),
                    to_locally_nameless(t2, env + (x2,)))
        case DropTm(q, low, high, b):
            return ("drop", q, low, high, to_locally_nameless(b, env))
        case LetDrop(q, low, high, x, s, b):
            return ("letd", q, low, high, to_locally_nameless(s, env),
                    to_locally_nameless(b, env + (x,)))
        case RaiseTm(low, high, b):
            return ("raise", low, high, to_locally_nameless(b, env))
        case UnraiseTm(low, high, b):
            return ("unraise", low, high, to_locally_nameless(b, env))
    raise InputError(f"not a term: {t!r}")


def ln_subst(t, mapping: dict):
    """Simultaneous grafting for free names; no shifting is ever needed
    because bound variables are indices and grafts are closed w.r.t. them."""
    head = t[0]
    if head == "free":
        return mapping.get(t[1], t)
    if head in ("bound", "star"):
        return t
    return (head,) + tuple(
        ln_subst(part, mapping) if isinstance(part, tuple) else part for part in t[1:]
    )


def ln_eq(t1: Term, t2: Term) -> bool:
    return to_locally_nameless(t1) == to_locally_nameless(t2)


def term_subst_oracle(t: Term, mapping: dict[str, Term]) -> "tuple":
    """[e_i/x_i]t as a locally-nameless tree, by grafting."""
    return ln_subst(to_locally_nameless(t), {x: to_locally_nameless(e) for x, e in mapping.items()})


# ---------------------------------------------------------------------------
# Term-level beta evaluation (independent of derivations)


def _open(body, graft):
    """Replace bound index 0 of an opened binder body with a graft."""

    def go(t, depth):
        head = t[0]
        if head == "bound":
            return graft if t[1] == depth else t
        if head in ("free", "star"):
            return t
        if head == "lam":
            return ("lam", go(t[1], depth + 1))
        if head == "letp":
            return ("letp", t[1], go(t[2], depth), go(t[3], depth + 2))
        if head == "case":
            return ("case", t[1], go(t[2], depth), go(t[3], depth + 1), go(t[4], depth + 1))
        if head == "letd":
            return ("letd", t[1], t[2], t[3], go(t[4], depth), go(t[5], depth + 1))
        if head == "let*":
            return ("let*", t[1], go(t[2], depth), go(t[3], depth))
        return (head,) + tuple(go(p, depth) if isinstance(p, tuple) else p for p in t[1:])

    return go(body, 0)


def _open2(body, graft1, graft2):
    # under two binders the earlier variable is index 1, the later index 0
    return _open(_shift_once(body, graft1), graft2)


def _shift_once(body, graft):
    # replace bound index depth+1, i.e. the outer of two binders
    def go(t, depth):
        head = t[0]
        if head == "bound":
            return graft if t[1] == depth + 1 else t
        if head in ("free", "star"):
            return t
        if head == "lam":
            return ("lam", go(t[1], depth + 1))
        if head == "letp":
            return ("letp", t[1], go(t[2], depth), go(t[3], depth + 2))
        if head == "case":
            return ("case", t[1], go(t[2], depth), go(t[3], depth + 1), go(t[4], depth + 1))
        if head == "letd":
            return ("letd", t[1], t[2], t[3], go(t[4], depth), go(t[5], depth + 1))
        if head == "let*":
            return ("let*", t[1], go(t[2], depth), go(t[3], depth))
        return (head,) + tuple(go(p, depth) if isinstance(p, tuple) else p for p in t[1:])

    return go(body, 0)


def ln_beta_step(t):
    """Leftmost-outermost beta step on a locally-nameless term, or None."""
    head = t[0]
    if head == "app" and t[1][0] == "lam":
        return _open(t[1][1], t[2])
    if head == "let*" and t[2][0] == "star":
        return t[3]
    if head == "letp" and t[2][0] == "pair":
        return _open2(t[3], t[2][1], t[2][2])
    if head == "case" and t[2][0] in ("inl", "inr"):
        branch = t[3] if t[2][0] == "inl" else t[4]
        return _open(branch, t[2][1])
    if head == "letd" and t[4][0] == "drop":
        return _open(t[5], t[4][4])
    if head == "unraise" and t[3][0] == "raise":
        return t[3][3]
    if head in ("bound", "free", "star"):
        return None
    for i, part in enumerate(t[1:], start=1):
        if isinstance(part, tuple):
            stepped = ln_beta_step(part)
            if stepped is not None:
                return t[:i] + (stepped,) + t[i + 1:]
    return None


def ln_normalize(t, fuel: int):
    steps = 0
    while steps < fuel:
        nxt = ln_beta_step(t)
        if nxt is None:
            return t, steps
        t = nxt
        steps += 1
    return t, steps


# ---------------------------------------------------------------------------
# Brute-force ideal closure


def brute_force_ideal_closure(alg: GradeAlgebra, subset) -> frozenset:
    """Intersection of every ideal containing the subset; exponential in
    the carrier, usable only on the small built-ins."""
    if alg.kind != "finite":
        raise InputError("brute force closure needs a finite carrier")
    subset = frozenset(subset)
    best = None
    for size in range(len(alg.carrier) + 1):
        for cand in itertools.combinations(alg.carrier, size):
            cand_set = frozenset(cand)
            if not subset <= cand_set:
                continue
            if not ideal_check(alg, cand_set):
                continue
            best = cand_set if best is None else best & cand_set
    return best
