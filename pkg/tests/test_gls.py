import random

import pytest

from lamtrans.core import Tree, alpha_eq, parse_term, parse_tree
from lamtrans.gls import (conversion_terms, dummy_term, is_linear,
                          make_type_constant, parse_gls, relabel_letter,
                          sample_normal_term, split_state_relabeling)
from lamtrans.reduction import eta_reduce, normalize
from lamtrans.typecheck import O, parse_type, typecheck


def random_ac_tree(rng, depth=4):
    if depth == 0 or rng.random() < 0.4:
        return Tree("c", ())
    return Tree("a", (random_ac_tree(rng, depth - 1),
                      random_ac_tree(rng, depth - 1)))


def mirror_oracle(tau, even=True):
    """Direct recursive definition: swap children at even depth."""
    if tau.label == "c":
        return tau
    l, r = (mirror_oracle(t, not even) for t in tau.children)
    return Tree("a", (r, l) if even else (l, r))


def test_mirror_against_oracle(mirror):
    rng = random.Random(1)
    for _ in range(30):
        tau = random_ac_tree(rng)
        assert mirror.run(tau) == mirror_oracle(tau)


def test_mirror_example(mirror):
    tau = parse_tree("a(a(c,c),c)", mirror.input)
    assert mirror.run(tau).to_str() == "a(c,a(c,c))"


def test_gls_to_str_roundtrip(mirror):
    again = parse_gls(mirror.to_str())
    tau = parse_tree("a(c,a(c,c))", mirror.input)
    assert again.run(tau) == mirror.run(tau)


def test_state_types_must_be_purely_affine():
    src = ("input { c:0 }\noutput { c:0 }\n"
           "state q : !o -o o\ninit q\n"
           "rule q c -> = \\x. let !y = x in y\nout = \\f. f !c\n")
    with pytest.raises(Exception):
        parse_gls(src)


def test_make_type_constant_preserves_outputs(mirror):
    const = make_type_constant(mirror)
    A0 = const.state_types[const.init]
    assert all(A == A0 for A in const.state_types.values())
    rng = random.Random(2)
    for _ in range(20):
        tau = random_ac_tree(rng)
        assert const.run(tau) == mirror.run(tau)


def test_split_state_relabeling(mirror):
    const = make_type_constant(mirror)
    relabel, trans = split_state_relabeling(const)
    # the relabeling annotates each node with its propagated state
    tau = parse_tree("a(c,c)", mirror.input)
    assert relabel(tau).to_str() == "a@qe(c@qo,c@qo)"
    rng = random.Random(3)
    for _ in range(20):
        t = random_ac_tree(rng)
        assert trans.eval_normalize(relabel(t)) == mirror.run(t)


def test_split_requires_type_constant(mirror):
    src = ("input { b:1, c:0 }\noutput { b:1, c:0 }\n"
           "state q : o -o o\nstate r : o\ninit q\n"
           "rule q b -> r = \\s. \\x. b s\n"
           "rule q c -> = \\x. c\n"
           "rule r b -> r = \\s. s\n"
           "rule r c -> = c\n"
           "out = \\f. f c\n")
    spec = parse_gls(src)
    with pytest.raises(Exception):
        split_state_relabeling(spec)


def test_dummy_term_inhabits_its_type(mirror):
    A = parse_type("(o -o o) -o o -o o")
    d = dummy_term(A, "c")
    ann = typecheck(d, ty=A, alphabet=mirror.output)
    assert ann.type == A


def test_cast_after_iota_is_identity(mirror):
    # cast_q (iota_q t) normalizes back to t (up to eta) for normal t
    rng = random.Random(4)
    from lamtrans.core import App
    for q in mirror.state_order():
        iota, cast = conversion_terms(mirror, q)
        A = mirror.state_types[q]
        for _ in range(10):
            t = sample_normal_term(A, mirror.output, rng)
            back = normalize(App(cast, App(iota, t)))
            assert alpha_eq(eta_reduce(back), eta_reduce(t))


def test_iota_is_affine_but_not_linear(mirror):
    q = mirror.init
    iota, _ = conversion_terms(mirror, q)
    ann = typecheck(iota, alphabet=mirror.output)
    assert not is_linear(ann)
    ident = typecheck(parse_term(r"\x. x"), ty=parse_type("o -o o"))
    assert is_linear(ident)


def test_relabel_letter():
    assert relabel_letter("a", "qe") == "a@qe"
