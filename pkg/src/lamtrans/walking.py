"""Tree-walking transducers with provenance, their reversibility analysis,
and invisible-pebble tree transducers.

A walking configuration records the current state, the node of the input
tree the head sits on, and where the head arrived from (its provenance:
the parent, the node itself, or the i-th child).  Transitions map
(letter, state, provenance) to an output tree whose leaves are
(state, move) pairs; at the root a separate map applies which never
receives a from-parent key and never emits a to-parent move.

Pebble transducers additionally carry a stack of colored pebbles placed on
input nodes; only a top pebble lying on the current node is observable.
Putting and removing pebbles are moves that stay put."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import LamtransError, RankedAlphabet, SyntaxErr, Tree
from .transducer import SpecError, _strip, parse_alphabet_block
from .treegen import FNode, Machine, run as treegen_run


class NotReversible(LamtransError):
    pass


# Provenance values: "from-parent", "self", ("from-child", i) with i >= 1.
# Move values: "to-parent", "stay", ("to-child", i), ("put", color),
# "remove".  The pebble moves only occur in pebble transducers.

def prov_to_str(p):
    if isinstance(p, tuple):
        return f"from-child {p[1]}"
    return p


def move_to_str(m):
    if isinstance(m, tuple):
        return (f"to-child {m[1]}" if m[0] == "to-child" else f"put {m[1]}")
    return m


# ---------------------------------------------------------------------------
# Specs

@dataclass
class TwtSpec:
    input: RankedAlphabet
    output: RankedAlphabet
    states: list
    initial: str
    delta: dict        # (letter, state, prov) -> FNode | (state, move) leaf
    delta_root: dict   # same keys, prov != "from-parent"
    name: str = "twt"

    def __post_init__(self):
        self.validate()

    def validate(self):
        for key in self.delta_root:
            if key[2] == "from-parent":
                raise SpecError(f"{self.name}: root map keyed by "
                                f"from-parent: {key}")
            for q, m in image_leaves(self.delta_root[key]):
                if m == "to-parent":
                    raise SpecError(f"{self.name}: root image moves "
                                    f"to-parent: {key}")
        for table in (self.delta, self.delta_root):
            for (a, q, p), img in table.items():
                if a not in self.input:
                    raise SpecError(f"{self.name}: unknown letter {a!r}")
                self._check_image(img)

    def _check_image(self, img):
        if isinstance(img, FNode):
            if len(img.children) != self.output.rank(img.label):
                raise SpecError(f"{self.name}: arity mismatch at "
                                f"{img.label!r}")
            for c in img.children:
                self._check_image(c)

    def lookup(self, label, q, prov, is_root):
        table = self.delta_root if is_root else self.delta
        return table.get((label, q, prov))

    def all_states(self):
        return self.states

    def to_str(self):
        lines = [f"input {self.input.to_str()}",
                 f"output {self.output.to_str()}"]
        for q in self.states:
            suffix = " init" if q == self.initial else ""
            lines.append(f"state {quote_state(q)}{suffix}")
        for kind, table in [("delta", self.delta),
                            ("delta-root", self.delta_root)]:
            for (a, q, p), img in sorted(table.items(), key=str):
                lines.append(f"{kind} {a} {quote_state(q)} {prov_to_str(p)}"
                             f" = {image_to_str(img)}")
        return "\n".join(lines) + "\n"


@dataclass
class IpttSpec:
    input: RankedAlphabet
    output: RankedAlphabet
    states: list
    initial: str
    colors: list
    delta: dict    # (letter, state, prov, is_root, color-or-None) -> image
    name: str = "iptt"

    def __post_init__(self):
        for (a, q, p, is_root, z) in self.delta:
            if p == "from-parent" and is_root:
                raise SpecError(f"{self.name}: from-parent at the root")
            if z is not None and z not in self.colors:
                raise SpecError(f"{self.name}: unknown color {z!r}")

    def lookup(self, label, q, prov, is_root, z):
        return self.delta.get((label, q, prov, is_root, z))

    def to_str(self):
        lines = [f"input {self.input.to_str()}",
                 f"output {self.output.to_str()}",
                 "colors { " + ", ".join(self.colors) + " }"]
        for q in self.states:
            suffix = " init" if q == self.initial else ""
            lines.append(f"state {quote_state(q)}{suffix}")
        for (a, q, p, is_root, z), img in sorted(self.delta.items(), key=str):
            lines.append(
                f"delta {a} {quote_state(q)} {prov_to_str(p)} "
                f"{'root' if is_root else 'nonroot'} "
                f"pebble {z if z is not None else 'NONE'}"
                f" = {image_to_str(img)}")
        return "\n".join(lines) + "\n"


def image_leaves(img):
    if isinstance(img, FNode):
        out = []
        for c in img.children:
            out.extend(image_leaves(c))
        return out
    return [img]


def image_map_leaves(img, f):
    if isinstance(img, FNode):
        return FNode(img.label,
                     tuple(image_map_leaves(c, f) for c in img.children))
    return f(img)


# ---------------------------------------------------------------------------
# Running

@dataclass(frozen=True)
class TwtConfig:
    state: str
    prov: object
    node: tuple


@dataclass(frozen=True)
class IpttConfig:
    state: str
    prov: object
    node: tuple
    pebbles: tuple = ()   # (color, node) pairs, top first


def resolve_move(q, move, node):
    """Where a (state, move) leaf sends the head, and the provenance it
    arrives with."""
    if move == "stay":
        return q, "self", node
    if move == "to-parent":
        if not node:
            raise SpecError("to-parent at the root")
        return q, ("from-child", node[-1] + 1), node[:-1]
    if isinstance(move, tuple) and move[0] == "to-child":
        return q, "from-parent", node + (move[1] - 1,)
    raise SpecError(f"cannot resolve move {move_to_str(move)} here")


class TwtMachine(Machine):
    def __init__(self, spec, tau):
        tau.validate(spec.input)
        self.spec = spec
        self.tau = tau

    def initial(self):
        return TwtConfig(self.spec.initial, "self", ())

    def step(self, cfg):
        label = self.tau.at(cfg.node).label
        img = self.spec.lookup(label, cfg.state, cfg.prov, cfg.node == ())
        if img is None:
            return None
        return image_map_leaves(
            img, lambda leaf: TwtConfig(*resolve_move(leaf[0], leaf[1],
                                                      cfg.node)))

    def render(self, cfg):
        node = ".".join(map(str, cfg.node)) or "e"
        return f"{cfg.state} {prov_to_str(cfg.prov)} @{node}"


class IpttMachine(Machine):
    def __init__(self, spec, tau):
        tau.validate(spec.input)
        self.spec = spec
        self.tau = tau

    def initial(self):
        return IpttConfig(self.spec.initial, "self", ())

    def step(self, cfg):
        label = self.tau.at(cfg.node).label
        z = None
        if cfg.pebbles and cfg.pebbles[0][1] == cfg.node:
            z = cfg.pebbles[0][0]
        img = self.spec.lookup(label, cfg.state, cfg.prov, cfg.node == (), z)
        if img is None:
            return None

        def leaf(qm):
            q, move = qm
            if isinstance(move, tuple) and move[0] == "put":
                return IpttConfig(q, "self", cfg.node,
                                  ((move[1], cfg.node),) + cfg.pebbles)
            if move == "remove":
                if z is None:
                    raise SpecError("remove with no visible pebble")
                return IpttConfig(q, "self", cfg.node, cfg.pebbles[1:])
            q2, prov, node = resolve_move(q, move, cfg.node)
            return IpttConfig(q2, prov, node, cfg.pebbles)

        return image_map_leaves(img, leaf)

    def render(self, cfg):
        node = ".".join(map(str, cfg.node)) or "e"
        peb = " ".join(f"{c}@{'.'.join(map(str, n)) or 'e'}"
                       for c, n in cfg.pebbles)
        return f"{cfg.state} {prov_to_str(cfg.prov)} @{node} [{peb}]"


def twt_run(spec, tau, fuel=10_000_000):
    m = TwtMachine(spec, tau)
    return treegen_run(m, m.initial(), fuel)


def iptt_run(spec, tau, fuel=10_000_000):
    m = IpttMachine(spec, tau)
    return treegen_run(m, m.initial(), fuel)


# ---------------------------------------------------------------------------
# Reversibility

@dataclass
class Witness:
    map_name: str
    key1: tuple
    key2: tuple
    leaf: tuple

    def __str__(self):
        q, m = self.leaf
        where = (f"keys {self.key1} and {self.key2}"
                 if self.key1 != self.key2 else f"key {self.key1}")
        return (f"leaf ({q}, {move_to_str(m)}) duplicated in map "
                f"{self.map_name}, {where}")


def check_reversible(spec):
    """A spec is reversible when, letter by letter, every (state, move)
    leaf occurs at most once across the map's images -- and then as the
    only leaf of its image.  Returns (True, None) or (False, witness)."""
    duplicated = multi = None
    for map_name, table in [("delta", spec.delta),
                            ("delta-root", spec.delta_root)]:
        by_letter = {}
        for key, img in table.items():
            by_letter.setdefault(key[0], []).append((key, img))
        for a, entries in by_letter.items():
            seen = {}
            for key, img in sorted(entries, key=str):
                leaves = image_leaves(img)
                for leaf in leaves:
                    if leaf in seen and duplicated is None:
                        duplicated = Witness(f"{map_name}[{a}]",
                                             seen[leaf], key, leaf)
                    if len(leaves) > 1 and multi is None:
                        multi = Witness(f"{map_name}[{a}]", key, key, leaf)
                    seen.setdefault(leaf, key)
    if duplicated is not None:
        return False, duplicated
    if multi is not None:
        return False, multi
    return True, None


def predecessor(spec, tau, cfg):
    """The unique configuration that steps to cfg in a reversible spec,
    or None for the initial configuration / anything unreached."""
    ok, witness = check_reversible(spec)
    if not ok:
        raise NotReversible(str(witness))
    if cfg.prov == "from-parent":
        prev_node = cfg.node[:-1]
        want = ("to-child", cfg.node[-1] + 1)
    elif cfg.prov == "self":
        prev_node = cfg.node
        want = "stay"
    else:
        prev_node = cfg.node + (cfg.prov[1] - 1,)
        want = "to-parent"
    label = tau.at(prev_node).label
    table = spec.delta_root if prev_node == () else spec.delta
    for (a, q, p), img in table.items():
        if a != label:
            continue
        if (cfg.state, want) in image_leaves(img):
            return TwtConfig(q, p, prev_node)
    return None


# ---------------------------------------------------------------------------
# Text format

def quote_state(q):
    if q.replace("_", "a").replace("-", "a").isalnum():
        return q
    return '"' + q.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _wtokenize(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise SyntaxErr("unterminated quoted state name")
            toks.append(("str", "".join(buf)))
            i = j + 1
            continue
        if c in "(),=":
            toks.append((c, c))
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in '(),="':
            j += 1
        toks.append(("word", text[i:j]))
        i = j
    return toks


class _ImageParser:
    def __init__(self, toks, output):
        self.toks = toks
        self.i = 0
        self.output = output

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def eat(self, kind=None):
        if self.i >= len(self.toks):
            raise SyntaxErr("unexpected end of transition image")
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise SyntaxErr(f"expected {kind!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def image(self):
        kind, val = self.peek()
        if kind == "(":
            self.eat()
            q = self.state()
            self.eat(",")
            m = self.move()
            self.eat(")")
            return (q, m)
        if kind in ("word", "str"):
            self.eat()
            if val not in self.output:
                raise SyntaxErr(f"unknown output letter {val!r}")
            kids = []
            if self.peek()[0] == "(":
                self.eat()
                while True:
                    kids.append(self.image())
                    if self.peek()[0] == ",":
                        self.eat()
                        continue
                    break
                self.eat(")")
            node = FNode(val, tuple(kids))
            return node
        raise SyntaxErr(f"unexpected token {val!r} in transition image")

    def state(self):
        kind, val = self.eat()
        if kind not in ("word", "str"):
            raise SyntaxErr(f"expected a state name, got {val!r}")
        return val

    def move(self):
        _, val = self.eat("word")
        if val in ("to-parent", "stay", "remove"):
            return val
        if val == "to-child":
            return ("to-child", int(self.eat("word")[1]))
        if val == "put":
            return ("put", self.eat("word")[1])
        raise SyntaxErr(f"unknown move {val!r}")


def image_to_str(img):
    if isinstance(img, FNode):
        if not img.children:
            return img.label
        return (img.label + "("
                + ",".join(image_to_str(c) for c in img.children) + ")")
    q, m = img
    return f"({quote_state(q)}, {move_to_str(m)})"


def _parse_prov(parser):
    _, val = parser.eat("word")
    if val in ("from-parent", "self"):
        return val
    if val == "from-child":
        return ("from-child", int(parser.eat("word")[1]))
    raise SyntaxErr(f"unknown provenance {val!r}")


def parse_twt(text, name="twt"):
    inp = out_alpha = initial = None
    states = []
    delta, delta_root = {}, {}
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
                toks = _wtokenize(rest)
                p = _ImageParser(toks, out_alpha or RankedAlphabet((("x", 0),)))
                q = p.state()
                if p.peek()[1] == "init":
                    initial = q
                states.append(q)
            elif key in ("delta", "delta-root"):
                if out_alpha is None or inp is None:
                    raise SyntaxErr("alphabets must come before transitions")
                p = _ImageParser(_wtokenize(rest), out_alpha)
                a = p.eat()[1]
                q = p.state()
                prov = _parse_prov(p)
                p.eat("=")
                img = p.image()
                table = delta if key == "delta" else delta_root
                table[(a, q, prov)] = img
            else:
                raise SyntaxErr(f"unknown directive {key!r}")
        except SyntaxErr as e:
            raise SpecError(f"{name}:{lineno}: {e}") from e
    if inp is None or out_alpha is None or initial is None:
        raise SpecError(f"{name}: missing input/output/initial state")
    return TwtSpec(inp, out_alpha, states, initial, delta, delta_root,
                   name=name)


def parse_iptt(text, name="iptt"):
    inp = out_alpha = initial = None
    colors = []
    states = []
    delta = {}
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
            elif key == "colors":
                body = rest.strip()
                if not (body.startswith("{") and body.endswith("}")):
                    raise SyntaxErr("expected colors { a, b, c }")
                colors = [c.strip() for c in body[1:-1].split(",") if c.strip()]
            elif key == "state":
                p = _ImageParser(_wtokenize(rest),
                                 out_alpha or RankedAlphabet((("x", 0),)))
                q = p.state()
                if p.peek()[1] == "init":
                    initial = q
                states.append(q)
            elif key == "delta":
                if out_alpha is None or inp is None:
                    raise SyntaxErr("alphabets must come before transitions")
                p = _ImageParser(_wtokenize(rest), out_alpha)
                a = p.eat()[1]
                q = p.state()
                prov = _parse_prov(p)
                _, rootness = p.eat("word")
                if rootness not in ("root", "nonroot"):
                    raise SyntaxErr(f"expected root|nonroot, got {rootness!r}")
                if p.eat("word")[1] != "pebble":
                    raise SyntaxErr("expected 'pebble'")
                _, z = p.eat("word")
                z = None if z == "NONE" else z
                p.eat("=")
                delta[(a, q, prov, rootness == "root", z)] = p.image()
            else:
                raise SyntaxErr(f"unknown directive {key!r}")
        except SyntaxErr as e:
            raise SpecError(f"{name}:{lineno}: {e}") from e
    if inp is None or out_alpha is None or initial is None:
        raise SpecError(f"{name}: missing input/output/initial state")
    return IpttSpec(inp, out_alpha, states, initial, colors, delta, name=name)


def load_twt(path):
    with open(path) as f:
        return parse_twt(f.read(), name=str(path))


def load_iptt(path):
    with open(path) as f:
        return parse_iptt(f.read(), name=str(path))
