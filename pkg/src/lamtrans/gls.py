"""Stateful top-down transducers that build a typed lambda-term and then
normalize it (GLS-transducers), plus the constructions that flatten them:
making all state types equal, and splitting the state into a relabeling of
the input followed by a stateless lambda-transducer."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .core import (App, Const, Lam, LamtransError, RankedAlphabet, SyntaxErr,
                   Var, decode_tree, parse_term, term_to_str, Tree)
from .reduction import normalize
from .transducer import (LambdaTransducerSpec, SpecError, parse_alphabet_block,
                         _strip)
from .typecheck import (Arrow, O, classify_type, fill_hints, parse_type,
                        type_to_str, typecheck)


class NoNullaryOutputLetter(LamtransError):
    pass


@dataclass
class GlsSpec:
    input: RankedAlphabet
    output: RankedAlphabet
    state_types: dict                 # state name -> purely affine Type
    init: str
    rules: dict                       # (state, letter) -> (Term, [child states])
    out: object                       # Term : A_init -o o
    name: str = "gls"
    norm_rules: dict = field(default_factory=dict)
    norm_out: object = None

    def __post_init__(self):
        if self.init not in self.state_types:
            raise SpecError(f"{self.name}: unknown initial state {self.init!r}")
        for q, A in self.state_types.items():
            if classify_type(A) != 0:
                raise SpecError(
                    f"{self.name}: state {q} has non-purely-affine type "
                    f"{type_to_str(A)}")
        for (q, a), (t, qs) in self.rules.items():
            if q not in self.state_types:
                raise SpecError(f"{self.name}: rule for unknown state {q!r}")
            if len(qs) != self.input.rank(a):
                raise SpecError(
                    f"{self.name}: rule ({q},{a}) lists {len(qs)} child "
                    f"states for a rank-{self.input.rank(a)} letter")
            ty = self.state_types[q]
            for qc in reversed(qs):
                ty = Arrow(self.state_types[qc], ty)
            ann = typecheck(t, ty=ty, alphabet=self.output)
            self.norm_rules[(q, a)] = normalize(fill_hints(ann))
        out_ty = Arrow(self.state_types[self.init], O)
        ann = typecheck(self.out, ty=out_ty, alphabet=self.output)
        self.norm_out = normalize(fill_hints(ann))

    # -- running -----------------------------------------------------------

    def build(self, tau, q=None):
        """The term tau-arrow-down : A_q, built top-down."""
        q = q or self.init
        key = (q, tau.label)
        if key not in self.norm_rules:
            raise SpecError(f"{self.name}: no rule for state {q!r} at "
                            f"letter {tau.label!r}")
        t, qs = self.norm_rules[key], self.rules[key][1]
        for qc, child in zip(qs, tau.children):
            t = App(t, self.build(child, qc))
        return t

    def run(self, tau, fuel=10_000_000):
        tau.validate(self.input)
        return decode_tree(normalize(App(self.norm_out, self.build(tau)),
                                     fuel))

    def state_order(self):
        return sorted(self.state_types)

    def to_str(self):
        lines = [f"input {self.input.to_str()}",
                 f"output {self.output.to_str()}"]
        for q in self.state_order():
            lines.append(f"state {q} : {type_to_str(self.state_types[q])}")
        lines.append(f"init {self.init}")
        for (q, a), (t, qs) in sorted(self.rules.items()):
            lines.append(f"rule {q} {a} -> {' '.join(qs)} = {term_to_str(t)}")
        lines.append(f"out = {term_to_str(self.out)}")
        return "\n".join(lines) + "\n"


def parse_gls(text, name="gls"):
    inp = out_alpha = init = out_term = None
    state_types = {}
    rule_srcs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        try:
            key, _, rest = line.partition(" ")
            if key == "input":
                inp = parse_alphabet_block(rest, "after 'input'")
            elif key == "output":
                out_alpha = parse_alphabet_block(rest, "after 'output'")
            elif key == "state":
                q, _, ty = rest.partition(":")
                state_types[q.strip()] = parse_type(ty)
            elif key == "init":
                init = rest.strip()
            elif key == "rule":
                head, _, src = rest.partition("=")
                if not src:
                    raise SyntaxErr("expected 'rule Q A -> Q1 ... QK = TERM'")
                head, _, childs = head.partition("->")
                parts = head.split()
                if len(parts) != 2:
                    raise SyntaxErr("expected 'rule Q A -> ... = TERM'")
                rule_srcs[(parts[0], parts[1])] = (src, childs.split())
            elif key == "out":
                src = rest.strip()
                if src.startswith("="):
                    src = src[1:]
                out_term = src
            else:
                raise SyntaxErr(f"unknown directive {key!r}")
        except SyntaxErr as e:
            raise SpecError(f"{name}:{lineno}: {e}") from e
    for what, val in [("input", inp), ("output", out_alpha), ("init", init),
                      ("out", out_term)]:
        if val is None:
            raise SpecError(f"{name}: missing '{what}' line")
    rules = {key: (parse_term(src, out_alpha), qs)
             for key, (src, qs) in rule_srcs.items()}
    return GlsSpec(inp, out_alpha, state_types, init, rules,
                   parse_term(out_term, out_alpha), name=name)


def load_gls(path):
    with open(path) as f:
        return parse_gls(f.read(), name=str(path))


# ---------------------------------------------------------------------------
# Making the state types equal

def arg_types(A):
    """Argument list of a purely affine type A = D1 -o ... -o Dn -o o."""
    out = []
    while isinstance(A, Arrow):
        out.append(A.left)
        A = A.right
    if A != O:
        raise LamtransError(f"not an argument type: {type_to_str(A)}")
    return out


def dummy_term(A, ell):
    """A closed inhabitant of any purely affine type: discard all the
    arguments and emit the nullary letter ell."""
    args = arg_types(A)
    t = Const(ell)
    for i in reversed(range(len(args))):
        t = Lam(f"x{i + 1}_", t, args[i])
    return t


def make_type_constant(spec, name=None):
    """Rebuild a GLS-transducer so every state shares one type: the
    concatenation of all states' argument segments.  Each rule is wrapped
    in conversion terms that select the state's own segment and pad the
    rest with dummy arguments."""
    ell = spec.output.nullary()
    if ell is None:
        raise NoNullaryOutputLetter(
            f"{spec.name}: the output alphabet has no rank-0 letter")
    order = spec.state_order()
    segments = {q: arg_types(spec.state_types[q]) for q in order}
    all_args = [B for q in order for B in segments[q]]
    offsets = {}
    s = 0
    for q in order:
        offsets[q] = s
        s += len(segments[q])
    A = O
    for B in reversed(all_args):
        A = Arrow(B, A)

    names = [f"x{i + 1}_" for i in range(len(all_args))]

    def iota(q):
        # \z. \x1 ... xN. z x_{s+1} ... x_{s+k}
        body = Var("z_")
        for i in range(offsets[q], offsets[q] + len(segments[q])):
            body = App(body, Var(names[i]))
        for i in reversed(range(len(all_args))):
            body = Lam(names[i], body, all_args[i])
        return Lam("z_", body, spec.state_types[q])

    def cast(q):
        # \y. \x1 ... xk. y dummy ... x1 ... xk ... dummy
        k = len(segments[q])
        body = Var("y_")
        for i, B in enumerate(all_args):
            lo, hi = offsets[q], offsets[q] + k
            if lo <= i < hi:
                body = App(body, Var(names[i - lo]))
            else:
                body = App(body, dummy_term(B, ell))
        for i in reversed(range(k)):
            body = Lam(names[i], body, segments[q][i])
        return Lam("y_", body, A)

    new_rules = {}
    for (q, a), (t, qs) in spec.rules.items():
        body = spec.norm_rules[(q, a)]
        for i, qc in enumerate(qs):
            body = App(body, App(cast(qc), Var(f"y{i + 1}_")))
        body = App(iota(q), body)
        for i in reversed(range(len(qs))):
            body = Lam(f"y{i + 1}_", body, A)
        new_rules[(q, a)] = (body, qs)
    new_out = Lam("y_", App(spec.norm_out, App(cast(spec.init), Var("y_"))), A)
    return GlsSpec(spec.input, spec.output, {q: A for q in order}, spec.init,
                   new_rules, new_out,
                   name=name or spec.name + "+const")


def conversion_terms(spec, q):
    """The (iota, cast) pair for one state of a spec, for inspection and
    testing.  iota : A_q -o A and cast : A -o A_q."""
    const = make_type_constant(spec)
    # rebuild them the same way make_type_constant does
    ell = spec.output.nullary()
    order = spec.state_order()
    segments = {r: arg_types(spec.state_types[r]) for r in order}
    all_args = [B for r in order for B in segments[r]]
    offsets = {}
    s = 0
    for r in order:
        offsets[r] = s
        s += len(segments[r])
    A = const.state_types[spec.init]
    names = [f"x{i + 1}_" for i in range(len(all_args))]
    body = Var("z_")
    for i in range(offsets[q], offsets[q] + len(segments[q])):
        body = App(body, Var(names[i]))
    for i in reversed(range(len(all_args))):
        body = Lam(names[i], body, all_args[i])
    iota = Lam("z_", body, spec.state_types[q])
    k = len(segments[q])
    body = Var("y_")
    for i, B in enumerate(all_args):
        lo, hi = offsets[q], offsets[q] + k
        if lo <= i < hi:
            body = App(body, Var(names[i - lo]))
        else:
            body = App(body, dummy_term(B, ell))
    for i in reversed(range(k)):
        body = Lam(names[i], body, segments[q][i])
    cast = Lam("y_", body, A)
    return iota, cast


def is_linear(ann):
    """True when every lambda-bound variable is used exactly once."""
    return all(occ is not None for occ in ann.lam_occ.values())


# ---------------------------------------------------------------------------
# Splitting the state off as a relabeling

def relabel_letter(a, q):
    return f"{a}@{q}"


def split_state_relabeling(spec):
    """For a type-constant spec: a function annotating each input node
    with its top-down propagated state, and a stateless lambda-transducer
    over the annotated alphabet that finishes the job."""
    order = spec.state_order()
    A0 = spec.state_types[spec.init]
    for q in order:
        if spec.state_types[q] != A0:
            raise SpecError(f"{spec.name}: state types are not all equal; "
                            "apply make_type_constant first")

    def relabel(tau, q=None):
        q = q or spec.init
        key = (q, tau.label)
        if key not in spec.rules:
            raise SpecError(f"{spec.name}: no rule for state {q!r} at "
                            f"letter {tau.label!r}")
        qs = spec.rules[key][1]
        return Tree(relabel_letter(tau.label, q),
                    tuple(relabel(c, qc)
                          for qc, c in zip(qs, tau.children)))

    letters = []
    rules = {}
    for (q, a), (t, qs) in sorted(spec.rules.items()):
        letters.append((relabel_letter(a, q), spec.input.rank(a)))
        rules[relabel_letter(a, q)] = spec.norm_rules[(q, a)]
    trans = LambdaTransducerSpec(
        RankedAlphabet(tuple(letters)), spec.output, A0, rules,
        spec.norm_out, name=spec.name + "+split")
    return relabel, trans


# ---------------------------------------------------------------------------
# Random closed normal inhabitants of purely affine types

def sample_normal_term(A, alphabet, rng, size=8):
    """A random closed normal term of purely affine type A over the given
    output alphabet.  Variables are used at most once."""
    ell = alphabet.nullary()
    if ell is None:
        raise NoNullaryOutputLetter("need a rank-0 letter to sample terms")

    def go(A, env, budget):
        # env: list of (name, arg-type-list) still available
        if isinstance(A, Arrow):
            x = f"v{len(env)}_"
            body, env2 = go(A.right, env + [(x, arg_types(A.left))], budget)
            return Lam(x, body, A.left), [e for e in env2 if e[0] != x]
        # A == o: emit a constant or call an available variable
        choices = ["const"]
        if env and budget > 0:
            choices += ["var"] * 2
        if rng.choice(choices) == "var":
            i = rng.randrange(len(env))
            x, args = env[i]
            env = env[:i] + env[i + 1:]
            t = Var(x)
            for B in args:
                sub, env = go(B, env, budget - 1)
                t = App(t, sub)
            return t, env
        if budget <= 0:
            return Const(ell), env
        name, rank = alphabet.letters[rng.randrange(len(alphabet.letters))]
        if budget <= 1 and rank > 0:
            name, rank = ell, 0
        t = Const(name)
        for _ in range(rank):
            sub, env = go(O, env, budget - 1 - rank)
            t = App(t, sub)
        return t, env

    t, _ = go(A, [], size)
    return t
