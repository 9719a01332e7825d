import pytest

from lamtrans.core import (RankedAlphabet, alpha_eq, decode_tree, parse_term,
                           parse_tree, term_size)
from lamtrans.reduction import (OutOfFuel, beta_step, eta_reduce, find_redex,
                                is_normal, normalize)
from lamtrans.typecheck import O, typecheck
from conftest import numeral, unary

OUT = RankedAlphabet.of({"a": 2, "b": 1, "c": 0, "S": 1, "0": 0})


def t(src):
    return parse_term(src, OUT)


def test_basic_beta():
    assert beta_step(t(r"(\x. x) c")) == t("c")
    assert normalize(t(r"(\f. \x. f (f x)) b c")) == t("b (b c)")


def test_beta_at_a_distance_through_let():
    # the lambda sits under a let; the application still fires, keeping
    # the let wrapped around the contractum
    r = beta_step(t(r"(let !y = !c in \x. a x y) c"))
    assert alpha_eq(r, t(r"let !y = !c in a c y"))


def test_let_bang_at_a_distance():
    r = beta_step(t(r"let !x = (let !y = !c in !(b y)) in a x x"))
    assert alpha_eq(r, t(r"let !y = !c in a (b y) (b y)"))


def test_let_substitutes_all_occurrences():
    assert normalize(t(r"let !x = !c in a x x")) == t("a c c")


def test_find_redex_leftmost_outermost():
    u = t(r"((\x. x) c) ((\y. y) c)")
    assert find_redex(u, order="leftmost") == (0,)
    assert find_redex(u, order="rightmost-innermost") == (1,)
    assert find_redex(t("a c c")) is None


def test_is_normal():
    assert is_normal(t("a c c"))
    assert not is_normal(t(r"(\x. x) c"))


def test_out_of_fuel():
    with pytest.raises(OutOfFuel):
        normalize(t(r"(\f. \x. f (f x)) b ((\x. x) c)"), fuel=1)


def test_eta_reduce():
    assert eta_reduce(t(r"\x. b x")) == t("b")
    assert alpha_eq(eta_reduce(t(r"\f. \x. f x")), t(r"\f. f"))
    # not an eta-redex when the variable occurs in the function part
    assert eta_reduce(t(r"\x. a x x")) == t(r"\x. a x x")


def test_leftmost_and_rightmost_agree_on_corpus(count, seqnat, bin2bin):
    cases = [(count, "a(b(c),c)"), (count, "a(a(c,c),b(c))"),
             (seqnat, unary(4)), (bin2bin, numeral(3))]
    for spec, s in cases:
        v = spec.program_term(parse_tree(s, spec.input))
        left = normalize(v, order="leftmost")
        right = normalize(v, order="rightmost-innermost")
        assert alpha_eq(left, right)


def test_fuel_bound_on_corpus(count, seqnat):
    # well-typed corpus programs normalize comfortably within 10 * size^2
    for spec, s in [(count, "a(b(c),c)"), (seqnat, unary(5))]:
        v = spec.program_term(parse_tree(s, spec.input))
        normalize(v, fuel=10 * term_size(v) ** 2)


def test_subject_reduction_along_a_run(count):
    v = count.program_term(parse_tree("a(b(c),c)", count.input))
    while not is_normal(v):
        typecheck(v, ty=O, alphabet=count.output)
        v = beta_step(v)
    assert decode_tree(v).to_str() == "S(S(S(0)))"
