"""Lambda-transducers: tree-to-tree functions given by a memory type, one
transition term per input letter, and an output-extraction term.

A transducer with memory A maps each rank-k input letter a to a closed
term t_a : A -o ... -o A -o A and provides out : A -o o.  Running it on a
tree means instantiating every node by its transition term, applying out,
and evaluating the resulting closed base-type term -- by normalization or
by a token machine."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (App, Box, Const, Lam, LamtransError, Let, RankedAlphabet,
                   SyntaxErr, Var, children, decode_tree, instantiate,
                   parse_term, term_to_str, with_children)
from .reduction import normalize
from .typecheck import (Arrow, Bang, O, Annotated, TIER_NAMES, TypingError,
                        classify_term, classify_type, fill_hints, parse_type,
                        subst_base, type_to_str, typecheck)


class SpecError(LamtransError):
    pass


class NotAlmostAffine(LamtransError):
    pass


def rule_type(memory, rank):
    A = memory
    for _ in range(rank):
        A = Arrow(memory, A)
    return A


@dataclass
class LambdaTransducerSpec:
    input: RankedAlphabet
    output: RankedAlphabet
    memory: object                      # Type
    rules: dict                         # letter -> source Term
    out: object                         # source Term
    name: str = "transducer"
    # filled by _elaborate: normalized, hint-carrying forms and their tiers
    norm_rules: dict = field(default_factory=dict)
    norm_out: object = None
    tier: int = 0

    def __post_init__(self):
        self._elaborate()

    def _elaborate(self):
        tiers = [classify_type(self.memory)]
        for letter, rank in self.input.letters:
            if letter not in self.rules:
                raise SpecError(f"missing rule for input letter {letter!r}")
            ty = rule_type(self.memory, rank)
            t = self._norm(self.rules[letter], ty, f"rule {letter}")
            ann = typecheck(t, ty=ty, alphabet=self.output)
            tiers.append(classify_term(ann))
            self.norm_rules[letter] = fill_hints(ann)
        for letter in self.rules:
            if letter not in self.input:
                raise SpecError(f"rule for unknown letter {letter!r}")
        out_ty = Arrow(self.memory, O)
        t = self._norm(self.out, out_ty, "out")
        ann = typecheck(t, ty=out_ty, alphabet=self.output)
        tiers.append(classify_term(ann))
        self.norm_out = fill_hints(ann)
        self.tier = max(tiers)

    def _norm(self, t, ty, what):
        try:
            ann = typecheck(t, ty=ty, alphabet=self.output)
        except TypingError as e:
            raise SpecError(f"{self.name}: {what} does not have type "
                            f"{type_to_str(ty)}: {e}") from e
        return normalize(fill_hints(ann))

    def tier_name(self):
        return TIER_NAMES[self.tier]

    # -- running -----------------------------------------------------------

    def program_term(self, tau):
        tau.validate(self.input)
        return App(self.norm_out, instantiate(tau, self.norm_rules))

    def program_ann(self, tau):
        return typecheck(self.program_term(tau), ty=O, alphabet=self.output)

    def eval_normalize(self, tau, fuel=10_000_000):
        return decode_tree(normalize(self.program_term(tau), fuel))

    def eval_iam(self, tau, variant="auto", fuel=10_000_000, check=False):
        from .iam import run_iam
        from .treegen import Output
        res = run_iam(self.program_ann(tau), variant, fuel, check)
        if not isinstance(res, Output):
            raise LamtransError(
                f"token machine did not produce an output: {res}")
        return res.tree

    def to_str(self):
        lines = [f"input {self.input.to_str()}",
                 f"output {self.output.to_str()}",
                 f"memory {type_to_str(self.memory)}"]
        for letter, _ in self.input.letters:
            lines.append(f"rule {letter} = {term_to_str(self.rules[letter])}")
        lines.append(f"out = {term_to_str(self.out)}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Spec files

def _strip(line):
    if "#" in line:
        line = line[:line.index("#")]
    return line.strip()


def parse_alphabet_block(text, where=""):
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise SyntaxErr(f"expected {{ letter:rank, ... }} {where}")
    body = text[1:-1].strip()
    letters = []
    if body:
        for part in body.split(","):
            if ":" not in part:
                raise SyntaxErr(f"expected letter:rank, got {part!r} {where}")
            name, rank = part.split(":", 1)
            letters.append((name.strip(), int(rank.strip())))
    return RankedAlphabet(tuple(letters))


def parse_transducer(text, name="transducer"):
    inp = out_alpha = memory = out_term = None
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
            elif key == "memory":
                memory = parse_type(rest)
            elif key == "rule":
                letter, _, term_src = rest.partition("=")
                letter = letter.strip()
                if not letter or not term_src:
                    raise SyntaxErr("expected 'rule LETTER = TERM'")
                rule_srcs[letter] = term_src
            elif key == "out":
                src = rest.strip()
                if src.startswith("="):
                    src = src[1:]
                out_term = src
            else:
                raise SyntaxErr(f"unknown directive {key!r}")
        except SyntaxErr as e:
            raise SpecError(f"{name}:{lineno}: {e}") from e
    for what, val in [("input", inp), ("output", out_alpha),
                      ("memory", memory), ("out", out_term)]:
        if val is None:
            raise SpecError(f"{name}: missing '{what}' line")
    rules = {letter: parse_term(src, out_alpha)
             for letter, src in rule_srcs.items()}
    return LambdaTransducerSpec(inp, out_alpha, memory, rules,
                                parse_term(out_term, out_alpha), name=name)


def load_transducer(path):
    with open(path) as f:
        return parse_transducer(f.read(), name=str(path))


# ---------------------------------------------------------------------------
# Composition

def subst_consts(t, mapping):
    """Replace constants by closed terms."""
    if isinstance(t, Const) and t.name in mapping:
        return mapping[t.name]
    return with_children(t, [subst_consts(c, mapping) for c in children(t)])


def compose(f, g, name=None):
    """The transducer computing g-after-f, built by substituting g's
    transition terms for the output constants inside f's."""
    if f.output.letters != g.input.letters:
        raise SpecError(
            f"cannot compose: {f.name} outputs {f.output.to_str()} but "
            f"{g.name} reads {g.input.to_str()}")
    memory = subst_base(f.memory, g.memory)
    gmap = {letter: g.norm_rules[letter] for letter, _ in g.input.letters}
    rules = {letter: subst_consts(f.norm_rules[letter], gmap)
             for letter, _ in f.input.letters}
    x = Var("x0_")
    out = Lam("x0_", App(g.norm_out, App(subst_consts(f.norm_out, gmap), x)),
              memory)
    spec = LambdaTransducerSpec(f.input, g.output, memory, rules, out,
                                name=name or f"{f.name};{g.name}")
    # print the normalized forms: unlike the raw substituted terms they
    # re-typecheck without annotations, so the spec round-trips through
    # its file format
    spec.rules = dict(spec.norm_rules)
    spec.out = spec.norm_out
    return spec


def identity_transducer(alphabet, name="identity"):
    rules = {}
    for letter, rank in alphabet.letters:
        t = Const(letter)
        args = [f"y{i}_" for i in range(rank)]
        for a in args:
            t = App(t, Var(a))
        for a in reversed(args):
            t = Lam(a, t)
        rules[letter] = t
    return LambdaTransducerSpec(alphabet, alphabet, O, rules,
                                Lam("x0_", Var("x0_")), name=name)


# ---------------------------------------------------------------------------
# Simple-type inference for plain lambda-terms (no ! anywhere), used by the
# translation below.  Metavariables left over default to the base type.

class _Meta:
    __slots__ = ("ref",)

    def __init__(self):
        self.ref = None


def _find(A):
    while isinstance(A, _Meta) and A.ref is not None:
        A = A.ref
    return A


def _unify(A, B):
    A, B = _find(A), _find(B)
    if A is B:
        return
    if isinstance(A, _Meta):
        A.ref = B
        return
    if isinstance(B, _Meta):
        B.ref = A
        return
    if isinstance(A, Arrow) and isinstance(B, Arrow):
        _unify(A.left, B.left)
        _unify(A.right, B.right)
        return
    if A == B:
        return
    raise TypingError(f"cannot unify {_resolve(A)} and {_resolve(B)}")


def _resolve(A):
    A = _find(A)
    if isinstance(A, _Meta):
        return O
    if isinstance(A, Arrow):
        return Arrow(_resolve(A.left), _resolve(A.right))
    return A


def infer_simple_types(t, alphabet, target=None):
    """Infer simple types over {o, -o} for a term without ! or let.
    Returns (result type, {position: type}).  Underdetermined positions
    default to o."""
    types = {}

    def go(t, pos, env):
        if isinstance(t, Const):
            A = O
            for _ in range(alphabet.rank(t.name)):
                A = Arrow(O, A)
        elif isinstance(t, Var):
            if t.name not in env:
                raise TypingError(f"unbound variable {t.name!r}")
            A = env[t.name]
        elif isinstance(t, Lam):
            a = _Meta()
            b = go(t.body, pos + (0,), {**env, t.var: a})
            A = Arrow(a, b)
        elif isinstance(t, App):
            fA = go(t.fn, pos + (0,), env)
            aA = go(t.arg, pos + (1,), env)
            b = _Meta()
            _unify(fA, Arrow(aA, b))
            A = b
        else:
            raise TypingError("! and let are not simple terms")
        types[pos] = A
        return A

    A = go(t, (), {})
    if target is not None:
        _unify(A, target)
    return _resolve(A), {p: _resolve(B) for p, B in types.items()}


# ---------------------------------------------------------------------------
# Translating almost-affine simply typed terms into the affine calculus

def _count_occurrences(t, name, stop_at_shadow=True):
    if isinstance(t, Var):
        return 1 if t.name == name else 0
    if isinstance(t, Lam) and t.var == name:
        return 0
    if isinstance(t, Let) and t.var == name:
        return _count_occurrences(t.bound, name)
    return sum(_count_occurrences(c, name) for c in children(t))


def lam_bang(x, t):
    """Sugar for abstracting a boxed variable: \\y. let !x = y in t."""
    from .core import fresh_name, free_vars
    y = fresh_name(x + "_", free_vars(t))
    return Lam(y, Let(x, Var(y), t), Bang(O))


def wn_translate(t, alphabet, target=None):
    """Make a simply typed term affine by boxing its base-type variables.
    Repeated variables must have base type (raises NotAlmostAffine
    otherwise); the result has type A{o := !o} when t : A."""
    _, types = infer_simple_types(t, alphabet, target)

    def go(t, pos):
        if isinstance(t, Const):
            k = alphabet.rank(t.name)
            body = Const(t.name)
            names = [f"x{i}_" for i in range(1, k + 1)]
            for x in names:
                body = App(body, Var(x))
            body = Box(body)
            for x in reversed(names):
                body = lam_bang(x, body)
            return body
        if isinstance(t, Var):
            if types[pos] == O:
                return Box(Var(t.name))
            return Var(t.name)
        if isinstance(t, Lam):
            binder_ty = types[pos].left
            if binder_ty == O:
                return lam_bang(t.var, go(t.body, pos + (0,)))
            if _count_occurrences(t.body, t.var) > 1:
                raise NotAlmostAffine(
                    f"variable {t.var!r} of type {type_to_str(binder_ty)} "
                    "is used more than once")
            return Lam(t.var, go(t.body, pos + (0,)),
                       subst_base(binder_ty, Bang(O)))
        if isinstance(t, App):
            return App(go(t.fn, pos + (0,)), go(t.arg, pos + (1,)))
        raise NotAlmostAffine("! and let may not occur in the source term")

    return go(t, ())
