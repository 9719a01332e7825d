"""Types, the affine typing judgement, type navigation, and the
classification of types and terms into restriction tiers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (App, Box, Const, Lam, LamtransError, Let, SyntaxErr, Var,
                   _tokenize, term_to_str)


class TypingError(LamtransError):
    pass


# ---------------------------------------------------------------------------
# Types

@dataclass(frozen=True)
class Base:
    pass


@dataclass(frozen=True)
class Arrow:
    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class Bang:
    inner: "Type"


Type = object
O = Base()


def type_to_str(A, level=0):
    # level: 0 = full type, 1 = left of an arrow / under a bang
    if isinstance(A, Base):
        return "o"
    if isinstance(A, Bang):
        return "!" + type_to_str(A.inner, 1)
    if isinstance(A, Arrow):
        s = type_to_str(A.left, 1) + " -o " + type_to_str(A.right, 0)
        return "(" + s + ")" if level > 0 else s
    raise LamtransError(f"not a type: {A!r}")


def parse_type(text):
    toks = _tokenize(text)
    A, i = _parse_arrow(toks, 0)
    if i != len(toks):
        raise SyntaxErr(f"trailing input after type: {toks[i][0]!r}",
                        toks[i][1], toks[i][2])
    return A


def _parse_arrow(toks, i):
    A, i = _parse_type_atom(toks, i)
    if i < len(toks) and toks[i][0] == "-o":
        B, i = _parse_arrow(toks, i + 1)
        return Arrow(A, B), i
    return A, i


def _parse_type_atom(toks, i):
    if i >= len(toks):
        raise SyntaxErr("expected a type")
    tok, line, col = toks[i]
    if tok == "o":
        return O, i + 1
    if tok == "!":
        A, i = _parse_type_atom(toks, i + 1)
        return Bang(A), i
    if tok == "(":
        A, i = _parse_arrow(toks, i + 1)
        if i >= len(toks) or toks[i][0] != ")":
            raise SyntaxErr("expected ')' in type", line, col)
        return A, i + 1
    raise SyntaxErr(f"unexpected token {tok!r} in type", line, col)


def subst_base(A, B):
    """A with every occurrence of the base type replaced by B."""
    if isinstance(A, Base):
        return B
    if isinstance(A, Arrow):
        return Arrow(subst_base(A.left, B), subst_base(A.right, B))
    if isinstance(A, Bang):
        return Bang(subst_base(A.inner, B))
    raise LamtransError(f"not a type: {A!r}")


def type_height(A):
    if isinstance(A, Base):
        return 0
    if isinstance(A, Arrow):
        return 1 + max(type_height(A.left), type_height(A.right))
    if isinstance(A, Bang):
        return type_height(A.inner)
    raise LamtransError(f"not a type: {A!r}")


def navigate(A, tape):
    """Follow a multiplicative tape (string over 'p'/'o', read left to
    right) down a type.  Returns None when the tape does not fit."""
    if isinstance(A, Bang):
        return navigate(A.inner, tape)
    if not tape:
        return A
    if isinstance(A, Arrow):
        if tape[0] == "o":
            return navigate(A.left, tape[1:])
        return navigate(A.right, tape[1:])
    return None


def const_type(rank):
    A = O
    for _ in range(rank):
        A = Arrow(O, A)
    return A


# ---------------------------------------------------------------------------
# Restriction tiers

TIER_NAMES = ["purely-affine", "almost-purely-affine", "almost-depth-1",
              "general"]


def classify_type(A):
    """Tier of a type: 0 if it has no !, 1 if every ! sits on the base
    type, 2 if every ! sits on a tier-<=1 type, 3 otherwise."""
    if isinstance(A, Base):
        return 0
    if isinstance(A, Arrow):
        return max(classify_type(A.left), classify_type(A.right))
    if isinstance(A, Bang):
        inner = classify_type(A.inner)
        if isinstance(A.inner, Base):
            return 1
        if inner <= 1:
            return 2
        return 3
    raise LamtransError(f"not a type: {A!r}")


# ---------------------------------------------------------------------------
# Typing

@dataclass
class Annotated:
    """A typed term together with per-position information gathered by the
    checker."""
    term: object
    type: object
    types: dict = field(default_factory=dict)        # pos -> Type
    depths: dict = field(default_factory=dict)       # pos -> box depth
    occ_binder: dict = field(default_factory=dict)   # var occ pos -> binder pos
    lam_occ: dict = field(default_factory=dict)      # Lam pos -> occ pos | None
    let_occs: dict = field(default_factory=dict)     # Let pos -> [occ pos]
    var_kind: dict = field(default_factory=dict)     # var occ pos -> "lam"|"let"|"theta"
    theta_types: list = field(default_factory=list)  # types of unrestricted vars


def typecheck(term, ty=None, alphabet=None, theta=None, consts=None):
    """Check (or synthesize, when ty is None) the type of a closed-ish
    term.  Constants draw their types from the output alphabet (rank-k
    letter : o -o ... -o o) or from an explicit consts map.  theta maps
    free unrestricted variable names to types."""
    ann = Annotated(term, None)
    ctypes = dict(consts or {})
    if alphabet is not None:
        for name, rank in alphabet.letters:
            ctypes.setdefault(name, const_type(rank))

    # environment: name -> ("lam"|"let"|"theta", Type, binder pos)
    env0 = {}
    for name, A in (theta or {}).items():
        env0[name] = ("theta", A, None)
        ann.theta_types.append(A)

    def record(pos, A):
        ann.types[pos] = A

    def lookup_const(name):
        if name not in ctypes:
            raise TypingError(f"unknown constant {name!r}")
        return ctypes[name]

    def synth(t, pos, env):
        """Returns (type, used) where used is the set of affine binder
        positions consumed."""
        if isinstance(t, Const):
            A = lookup_const(t.name)
            record(pos, A)
            return A, set()
        if isinstance(t, Var):
            if t.name not in env:
                raise TypingError(f"unbound variable {t.name!r}")
            kind, A, bpos = env[t.name]
            record(pos, A)
            ann.var_kind[pos] = kind
            if bpos is not None:
                ann.occ_binder[pos] = bpos
                if kind == "lam":
                    if ann.lam_occ.get(bpos) is not None:
                        raise TypingError(
                            f"affine variable {t.name!r} used twice")
                    ann.lam_occ[bpos] = pos
                else:
                    ann.let_occs[bpos].append(pos)
            if kind == "lam":
                return A, {bpos}
            return A, set()
        if isinstance(t, App):
            fA, fu = synth(t.fn, pos + (0,), env)
            if not isinstance(fA, Arrow):
                raise TypingError(
                    f"applied term has non-arrow type {type_to_str(fA)}: "
                    f"{term_to_str(t.fn)}")
            au = check(t.arg, fA.left, pos + (1,), env)
            if fu & au:
                raise TypingError("affine variable used in both sides of an "
                                  f"application: {term_to_str(t)}")
            record(pos, fA.right)
            return fA.right, fu | au
        if isinstance(t, Lam):
            if t.hint is None:
                raise TypingError(
                    f"cannot synthesize the type of {term_to_str(t)}")
            bpos = pos
            saved = _bind(ann, env, t.var, ("lam", t.hint, bpos))
            ann.lam_occ.setdefault(bpos, None)
            B, u = synth(t.body, pos + (0,), env)
            _unbind(env, t.var, saved)
            u.discard(bpos)
            A = Arrow(t.hint, B)
            record(pos, A)
            return A, u
        if isinstance(t, Box):
            inner_env = {k: v for k, v in env.items() if v[0] != "lam"}
            A, u = synth(t.body, pos + (0,), inner_env)
            record(pos, Bang(A))
            return Bang(A), u
        if isinstance(t, Let):
            bA, bu = _synth_or_check_bang(t, pos, env)
            bpos = pos
            ann.let_occs.setdefault(bpos, [])
            ann.theta_types.append(bA.inner)
            saved = _bind(ann, env, t.var, ("let", bA.inner, bpos))
            B, tu = synth(t.body, pos + (1,), env)
            _unbind(env, t.var, saved)
            if bu & tu:
                raise TypingError("affine variable used in both parts of a "
                                  f"let: {term_to_str(t)}")
            record(pos, B)
            return B, bu | tu
        raise TypingError(f"not a term: {t!r}")

    def _synth_or_check_bang(t, pos, env):
        A, u = synth(t.bound, pos + (0,), env)
        if not isinstance(A, Bang):
            raise TypingError(
                f"let-bound term has non-! type {type_to_str(A)}: "
                f"{term_to_str(t.bound)}")
        return A, u

    def check(t, A, pos, env):
        if isinstance(t, Lam):
            if not isinstance(A, Arrow):
                raise TypingError(
                    f"lambda cannot have type {type_to_str(A)}")
            bpos = pos
            saved = _bind(ann, env, t.var, ("lam", A.left, bpos))
            ann.lam_occ.setdefault(bpos, None)
            u = check(t.body, A.right, pos + (0,), env)
            _unbind(env, t.var, saved)
            u.discard(bpos)
            record(pos, A)
            return u
        if isinstance(t, Box):
            if not isinstance(A, Bang):
                raise TypingError(f"box cannot have type {type_to_str(A)}")
            inner_env = {k: v for k, v in env.items() if v[0] != "lam"}
            u = check(t.body, A.inner, pos + (0,), inner_env)
            record(pos, A)
            return u
        if isinstance(t, Let):
            bA, bu = _synth_or_check_bang(t, pos, env)
            bpos = pos
            ann.let_occs.setdefault(bpos, [])
            ann.theta_types.append(bA.inner)
            saved = _bind(ann, env, t.var, ("let", bA.inner, bpos))
            tu = check(t.body, A, pos + (1,), env)
            _unbind(env, t.var, saved)
            if bu & tu:
                raise TypingError("affine variable used in both parts of a "
                                  f"let: {term_to_str(t)}")
            record(pos, A)
            return bu | tu
        if isinstance(t, App):
            # prefer synthesizing the function; fall back to synthesizing
            # the argument when the function is an unannotated redex
            snap = (dict(ann.types), dict(ann.occ_binder), dict(ann.lam_occ),
                    {k: list(v) for k, v in ann.let_occs.items()},
                    dict(ann.var_kind), list(ann.theta_types))
            try:
                B, u = synth(t, pos, env)
            except TypingError:
                (ann.types, ann.occ_binder, ann.lam_occ, ann.let_occs,
                 ann.var_kind, ann.theta_types) = snap
                aA, au = synth(t.arg, pos + (1,), env)
                fu = check(t.fn, Arrow(aA, A), pos + (0,), env)
                if fu & au:
                    raise TypingError(
                        "affine variable used in both sides of an "
                        f"application: {term_to_str(t)}")
                record(pos, A)
                return fu | au
            if B != A:
                raise TypingError(
                    f"expected {type_to_str(A)}, got {type_to_str(B)}: "
                    f"{term_to_str(t)}")
            return u
        B, u = synth(t, pos, env)
        if B != A:
            raise TypingError(
                f"expected {type_to_str(A)}, got {type_to_str(B)}: "
                f"{term_to_str(t)}")
        return u

    if ty is None:
        A, _ = synth(term, (), env0)
        ann.type = A
    else:
        check(term, ty, (), env0)
        ann.type = ty

    _fill_depths(ann, term, (), 0)
    return ann


def _bind(ann, env, name, entry):
    saved = env.get(name)
    env[name] = entry
    return saved


def _unbind(env, name, saved):
    if saved is None:
        env.pop(name, None)
    else:
        env[name] = saved


def _fill_depths(ann, t, pos, depth):
    """Depth of a position = number of enclosing boxes whose contents are
    not of base type."""
    ann.depths[pos] = depth
    from .core import children
    cs = children(t)
    for i, c in enumerate(cs):
        d = depth
        if isinstance(t, Box) and ann.types.get(pos + (0,)) != O:
            d = depth + 1
        _fill_depths(ann, c, pos + (i,), d)


def fill_hints(ann):
    """Return ann.term with every lambda's binder-type hint filled in from
    the typing derivation, so the result synthesizes without a target."""

    def go(t, pos):
        from .core import children, with_children
        cs = [go(c, pos + (i,)) for i, c in enumerate(children(t))]
        t = with_children(t, cs)
        if isinstance(t, Lam):
            return Lam(t.var, t.body, ann.types[pos].left)
        return t

    return go(ann.term, ())


# ---------------------------------------------------------------------------
# Term classification

def classify_term(ann):
    """Restriction tier of a typed term.  Structural part: at each
    box-nesting level, the types appearing there must sit one tier lower
    per surrounding box.  Global part: the unrestricted variables must all
    be base-typed (tier <= 1) or all of tier <= 1 types (tier <= 2)."""

    def struct(t, pos):
        worst = classify_type(ann.types[pos])
        if isinstance(t, Box):
            worst = max(worst, min(3, 1 + struct(t.body, pos + (0,))))
        else:
            from .core import children
            for i, c in enumerate(children(t)):
                worst = max(worst, struct(c, pos + (i,)))
        return worst

    tier = struct(ann.term, ())
    if ann.theta_types:
        if all(A == O for A in ann.theta_types):
            tier = max(tier, 1)
        elif all(classify_type(A) <= 1 for A in ann.theta_types):
            tier = max(tier, 2)
        else:
            tier = 3
    return tier
