"""Ranked alphabets, trees, affine lambda-term syntax, positions and
one-hole contexts, tree encodings, and concrete-syntax parsing/printing."""

from __future__ import annotations

from dataclasses import dataclass, field


class LamtransError(Exception):
    """Base class for all errors raised by this library."""


class SyntaxErr(LamtransError):
    def __init__(self, msg, line=None, col=None):
        if line is not None:
            msg = f"{msg} (line {line}, column {col})"
        super().__init__(msg)
        self.line = line
        self.col = col


class NotAnEncoding(LamtransError):
    pass


# ---------------------------------------------------------------------------
# Ranked alphabets and trees

@dataclass(frozen=True)
class RankedAlphabet:
    letters: tuple  # tuple of (name, rank) pairs, order-preserving

    def __post_init__(self):
        names = [n for n, _ in self.letters]
        if not names:
            raise LamtransError("alphabet must contain at least one letter")
        if len(set(names)) != len(names):
            raise LamtransError("duplicate letter in alphabet")
        for n, r in self.letters:
            if not n or n.startswith("<>"):
                raise LamtransError(f"invalid letter name {n!r}")
            if r < 0:
                raise LamtransError(f"negative rank for {n}")

    @staticmethod
    def of(mapping):
        return RankedAlphabet(tuple(mapping.items()))

    def rank(self, name):
        for n, r in self.letters:
            if n == name:
                return r
        raise LamtransError(f"unknown letter {name!r}")

    def __contains__(self, name):
        return any(n == name for n, _ in self.letters)

    def names(self):
        return [n for n, _ in self.letters]

    def nullary(self):
        """First rank-0 letter, or None."""
        for n, r in self.letters:
            if r == 0:
                return n
        return None

    def to_str(self):
        return "{ " + ", ".join(f"{n}:{r}" for n, r in self.letters) + " }"


@dataclass(frozen=True)
class Tree:
    label: str
    children: tuple = ()

    def size(self):
        return 1 + sum(c.size() for c in self.children)

    def to_str(self):
        if not self.children:
            return self.label
        return self.label + "(" + ",".join(c.to_str() for c in self.children) + ")"

    def validate(self, alphabet):
        if len(self.children) != alphabet.rank(self.label):
            raise LamtransError(
                f"letter {self.label} has rank {alphabet.rank(self.label)}, "
                f"got {len(self.children)} children")
        for c in self.children:
            c.validate(alphabet)

    def node_positions(self):
        """All node positions in preorder."""
        out = [()]
        for i, c in enumerate(self.children):
            out.extend((i,) + p for p in c.node_positions())
        return out

    def at(self, pos):
        t = self
        for i in pos:
            t = t.children[i]
        return t


def parse_tree(text, alphabet=None):
    toks = _tokenize(text)
    tree, rest = _parse_tree(toks)
    if rest:
        raise SyntaxErr(f"trailing input after tree: {rest[0][0]!r}",
                        rest[0][1], rest[0][2])
    if alphabet is not None:
        tree.validate(alphabet)
    return tree


def _parse_tree(toks):
    if not toks or not _is_ident(toks[0][0]):
        raise SyntaxErr("expected a tree label")
    label = toks[0][0]
    toks = toks[1:]
    children = []
    if toks and toks[0][0] == "(":
        toks = toks[1:]
        while True:
            child, toks = _parse_tree(toks)
            children.append(child)
            if toks and toks[0][0] == ",":
                toks = toks[1:]
                continue
            break
        if not toks or toks[0][0] != ")":
            raise SyntaxErr("expected ')' in tree")
        toks = toks[1:]
    return Tree(label, tuple(children)), toks


# ---------------------------------------------------------------------------
# Terms
#
# Child indices used in positions:
#   Lam: 0 = body      App: 0 = fn, 1 = arg
#   Box: 0 = body      Let: 0 = bound term, 1 = body

@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    var: str
    body: "Term"
    # optional binder-type hint (filled by generators, ignored for equality)
    hint: object = field(default=None, compare=False)


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Box:
    body: "Term"


@dataclass(frozen=True)
class Let:
    var: str
    bound: "Term"
    body: "Term"


Term = object  # union of the six classes above

RESERVED = ("let", "in")


def children(t):
    if isinstance(t, Lam):
        return [t.body]
    if isinstance(t, App):
        return [t.fn, t.arg]
    if isinstance(t, Box):
        return [t.body]
    if isinstance(t, Let):
        return [t.bound, t.body]
    return []


def with_children(t, cs):
    if isinstance(t, Lam):
        return Lam(t.var, cs[0], t.hint)
    if isinstance(t, App):
        return App(cs[0], cs[1])
    if isinstance(t, Box):
        return Box(cs[0])
    if isinstance(t, Let):
        return Let(t.var, cs[0], cs[1])
    return t


def subterm_at(t, pos):
    for i in pos:
        cs = children(t)
        if i >= len(cs):
            raise LamtransError(f"invalid position {pos}")
        t = cs[i]
    return t


def replace_at(t, pos, new):
    """Return t with the subterm at pos replaced by new."""
    if not pos:
        return new
    cs = children(t)
    i = pos[0]
    if i >= len(cs):
        raise LamtransError(f"invalid position {pos}")
    cs = list(cs)
    cs[i] = replace_at(cs[i], pos[1:], new)
    return with_children(t, cs)


def positions(t):
    """All subterm positions in preorder."""
    out = [()]
    for i, c in enumerate(children(t)):
        out.extend((i,) + p for p in positions(c))
    return out


def term_size(t):
    return 1 + sum(term_size(c) for c in children(t))


# One-hole contexts: represented as (whole term, hole position).  split_at
# and plug make the pair behave like the syntactic object.

@dataclass(frozen=True)
class OneHoleContext:
    term: object
    hole: tuple

    def plug(self, sub):
        return replace_at(self.term, self.hole, sub)


def split_at(t, pos):
    return OneHoleContext(t, tuple(pos)), subterm_at(t, pos)


def free_vars(t, bound=None):
    bound = bound or frozenset()
    if isinstance(t, Var):
        return set() if t.name in bound else {t.name}
    if isinstance(t, Lam):
        return free_vars(t.body, bound | {t.var})
    if isinstance(t, Let):
        return free_vars(t.bound, bound) | free_vars(t.body, bound | {t.var})
    out = set()
    for c in children(t):
        out |= free_vars(c, bound)
    return out


def fresh_name(base, avoid):
    if base not in avoid:
        return base
    i = 1
    while f"{base}_{i}" in avoid:
        i += 1
    return f"{base}_{i}"


def rename_free(t, old, new):
    """Rename the free variable old to new (new assumed not captured)."""
    if isinstance(t, Var):
        return Var(new) if t.name == old else t
    if isinstance(t, Lam):
        if t.var == old:
            return t
        return Lam(t.var, rename_free(t.body, old, new), t.hint)
    if isinstance(t, Let):
        bound = rename_free(t.bound, old, new)
        body = t.body if t.var == old else rename_free(t.body, old, new)
        return Let(t.var, bound, body)
    return with_children(t, [rename_free(c, old, new) for c in children(t)])


def substitute(t, x, s):
    """Capture-avoiding substitution t{x := s}."""
    fv_s = free_vars(s)

    def go(t, shadowed):
        if isinstance(t, Var):
            return s if t.name == x and x not in shadowed else t
        if isinstance(t, Lam):
            if t.var == x:
                return t
            if t.var in fv_s and x in free_vars(t.body, shadowed | {t.var}):
                nv = fresh_name(t.var, fv_s | free_vars(t.body) | {x})
                return Lam(nv, go(rename_free(t.body, t.var, nv), shadowed), t.hint)
            return Lam(t.var, go(t.body, shadowed), t.hint)
        if isinstance(t, Let):
            bound = go(t.bound, shadowed)
            if t.var == x:
                return Let(t.var, bound, t.body)
            if t.var in fv_s and x in free_vars(t.body, shadowed | {t.var}):
                nv = fresh_name(t.var, fv_s | free_vars(t.body) | {x})
                return Let(nv, bound, go(rename_free(t.body, t.var, nv), shadowed))
            return Let(t.var, bound, go(t.body, shadowed))
        return with_children(t, [go(c, shadowed) for c in children(t)])

    return go(t, frozenset())


def alpha_eq(t, u):
    """Equality up to renaming of bound variables."""

    def go(t, u, env_t, env_u, depth):
        if type(t) is not type(u):
            return False
        if isinstance(t, Const):
            return t.name == u.name
        if isinstance(t, Var):
            return env_t.get(t.name, t.name) == env_u.get(u.name, u.name)
        if isinstance(t, Lam):
            return go(t.body, u.body,
                      {**env_t, t.var: depth}, {**env_u, u.var: depth}, depth + 1)
        if isinstance(t, App):
            return (go(t.fn, u.fn, env_t, env_u, depth)
                    and go(t.arg, u.arg, env_t, env_u, depth))
        if isinstance(t, Box):
            return go(t.body, u.body, env_t, env_u, depth)
        if isinstance(t, Let):
            return (go(t.bound, u.bound, env_t, env_u, depth)
                    and go(t.body, u.body,
                           {**env_t, t.var: depth}, {**env_u, u.var: depth},
                           depth + 1))
        return False

    return go(t, u, {}, {}, 0)


def canonical_rename(t):
    """Deterministically rename bound variables to x1, x2, ... in
    traversal order.  alpha_eq(t, u) iff canonical_rename(t) == canonical_rename(u)."""
    counter = [0]

    def go(t, env):
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, Lam):
            counter[0] += 1
            nv = f"x{counter[0]}"
            return Lam(nv, go(t.body, {**env, t.var: nv}), t.hint)
        if isinstance(t, Let):
            bound = go(t.bound, env)
            counter[0] += 1
            nv = f"x{counter[0]}"
            return Let(nv, bound, go(t.body, {**env, t.var: nv}))
        return with_children(t, [go(c, env) for c in children(t)])

    return go(t, {})


# ---------------------------------------------------------------------------
# Printing

def _needs_parens_as_atom(t):
    return isinstance(t, (App, Lam, Let))


def term_to_str(t, mark=None, direction=None):
    """Render a term.  When mark (a position) is given, the subterm there is
    wrapped in >...< (down) or <...> (up) according to direction."""

    def deco(s, here):
        if mark is not None and here == mark:
            if direction == "up":
                return "<" + s + ">"
            return ">" + s + "<"
        return s

    def go(t, here, level):
        # level: 0 = term (lam/let ok), 1 = app position, 2 = atom position
        if isinstance(t, (Const, Var)):
            return deco(t.name, here)
        if isinstance(t, Box):
            inner = go(t.body, here + (0,), 2)
            return deco("!" + inner, here)
        if isinstance(t, Lam):
            s = "\\" + t.var + ". " + go(t.body, here + (0,), 0)
            s = deco(s, here)
            return "(" + s + ")" if level > 0 else s
        if isinstance(t, Let):
            s = ("let !" + t.var + " = " + go(t.bound, here + (0,), 0)
                 + " in " + go(t.body, here + (1,), 0))
            s = deco(s, here)
            return "(" + s + ")" if level > 0 else s
        if isinstance(t, App):
            s = go(t.fn, here + (0,), 1) + " " + go(t.arg, here + (1,), 2)
            s = deco(s, here)
            return "(" + s + ")" if level > 1 else s
        raise LamtransError(f"not a term: {t!r}")

    return go(t, (), 0)


# ---------------------------------------------------------------------------
# Parsing

def _is_ident(s):
    return s.replace("_", "a").isalnum() and s not in RESERVED


def _tokenize(text):
    toks = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalnum() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append((text[i:j], line, col))
            col += j - i
            i = j
            continue
        if text.startswith("-o", i):
            toks.append(("-o", line, col))
            i += 2
            col += 2
            continue
        if c in "\\.!()=,{}:@<>":
            toks.append((c, line, col))
            i += 1
            col += 1
            continue
        raise SyntaxErr(f"unexpected character {c!r}", line, col)
    return toks


class _TermParser:
    def __init__(self, toks, alphabet=None, extra_consts=()):
        self.toks = toks
        self.i = 0
        self.alphabet = alphabet
        self.extra = set(extra_consts)

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def err(self, msg):
        if self.i < len(self.toks):
            _, line, col = self.toks[self.i]
            raise SyntaxErr(msg, line, col)
        raise SyntaxErr(msg + " (at end of input)")

    def eat(self, tok=None):
        if self.i >= len(self.toks):
            self.err(f"expected {tok!r}")
        got = self.toks[self.i]
        if tok is not None and got[0] != tok:
            self.err(f"expected {tok!r}, got {got[0]!r}")
        self.i += 1
        return got[0]

    def term(self, bound):
        if self.peek() == "\\":
            self.eat()
            name = self.ident()
            self.eat(".")
            return Lam(name, self.term(bound | {name}))
        if self.peek() == "let":
            self.eat()
            self.eat("!")
            name = self.ident()
            self.eat("=")
            bnd = self.term(bound)
            self.eat("in")
            return Let(name, bnd, self.term(bound | {name}))
        return self.app(bound)

    def app(self, bound):
        t = self.atom(bound)
        while self.peek() in ("\\",) or self._at_atom():
            t = App(t, self.atom(bound))
        return t

    def _at_atom(self):
        p = self.peek()
        return p is not None and (p == "(" or p == "!" or _is_ident(p))

    def atom(self, bound):
        p = self.peek()
        if p == "(":
            self.eat()
            t = self.term(bound)
            self.eat(")")
            return t
        if p == "!":
            self.eat()
            return Box(self.atom(bound))
        if p == "\\":
            # allow a lambda directly as the last applicand: "f \\x. t"
            return self.term(bound)
        if p is not None and _is_ident(p):
            name = self.eat()
            if name in bound:
                return Var(name)
            if name in self.extra:
                return Const(name)
            if self.alphabet is not None:
                if name in self.alphabet:
                    return Const(name)
                self.err(f"unknown constant {name!r}")
            return Var(name)
        self.err("expected a term")

    def ident(self):
        p = self.peek()
        if p is None or not _is_ident(p):
            self.err("expected an identifier")
        return self.eat()


def parse_term(text, alphabet=None, extra_consts=()):
    """Parse a term.  Identifiers matching letters of the given output
    alphabet (or extra_consts) become constants; bound names become
    variables; anything else is a free variable if no alphabet is given,
    an error otherwise."""
    p = _TermParser(_tokenize(text), alphabet, extra_consts)
    t = p.term(frozenset())
    if p.i != len(p.toks):
        p.err("trailing input after term")
    return t


# ---------------------------------------------------------------------------
# Tree encodings

def encode_tree(tau):
    """The applicative encoding of a tree as a closed normal term of type o."""
    t = Const(tau.label)
    for c in tau.children:
        t = App(t, encode_tree(c))
    return t


def decode_tree(t):
    """Inverse of encode_tree; raises NotAnEncoding on anything else."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    if not isinstance(t, Const):
        raise NotAnEncoding(f"not an applicative constant term: {term_to_str(t)}")
    return Tree(t.name, tuple(decode_tree(a) for a in reversed(args)))


def instantiate(tau, family):
    """Replace each constant of encode_tree(tau) by its family term."""
    if tau.label not in family:
        raise LamtransError(f"no family entry for letter {tau.label!r}")
    t = family[tau.label]
    for c in tau.children:
        t = App(t, instantiate(c, family))
    return t


def instantiate_with_blocks(tau, family):
    """Like instantiate, but also return a map from tree-node position to
    the term position of that node's block (the t_a-application subterm)."""
    blocks = {}

    def go(node, tree_pos, term_pos):
        blocks[tree_pos] = term_pos
        k = len(node.children)
        if node.label not in family:
            raise LamtransError(f"no family entry for letter {node.label!r}")
        t = family[node.label]
        for i, c in enumerate(node.children):
            # child i (0-based) sits at term_pos + (0,)*(k-1-i) + (1,)
            sub = go(c, tree_pos + (i,), term_pos + (0,) * (k - 1 - i) + (1,))
            t = App(t, sub)
        return t

    term = go(tau, (), ())
    return term, blocks
