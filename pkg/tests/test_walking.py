import pytest

from lamtrans.core import parse_tree
from lamtrans.treegen import FNode, Output, frontier_configs, frontier_get
from lamtrans.walking import (NotReversible, TwtMachine, check_reversible,
                              image_to_str, parse_iptt, parse_twt,
                              predecessor, quote_state, twt_run, iptt_run)
from conftest import numeral, unary


def forward_configs(spec, tau):
    """The configuration sequence of a single-head walking run."""
    m = TwtMachine(spec, tau)
    cfg = m.initial()
    out = [cfg]
    while True:
        res = m.step(cfg)
        assert res is not None
        leaves = frontier_configs(res)
        if not leaves:
            return out
        assert len(leaves) == 1
        cfg = frontier_get(res, leaves[0])
        out.append(cfg)


def test_count_twt_example(count_twt, count):
    for s in ["c", "b(c)", "a(b(c),c)", "a(a(c,c),b(b(c)))"]:
        tau = parse_tree(s, count_twt.input)
        res = twt_run(count_twt, tau)
        assert isinstance(res, Output)
        assert res.tree == count.eval_normalize(tau)


def test_seqnat_twt_matches_spec(seqnat_twt, seqnat):
    for n in range(1, 7):
        tau = parse_tree(unary(n), seqnat_twt.input)
        res = twt_run(seqnat_twt, tau)
        assert isinstance(res, Output)
        assert res.tree == seqnat.eval_normalize(tau)


def test_bin2unary_iptt(bin2unary):
    for n in range(9):
        tau = parse_tree(numeral(n), bin2unary.input)
        res = iptt_run(bin2unary, tau)
        assert isinstance(res, Output)
        assert res.tree.to_str() == unary(n)


def test_count_twt_reversible(count_twt):
    ok, witness = check_reversible(count_twt)
    assert ok and witness is None


def test_seqnat_twt_not_reversible(seqnat_twt):
    ok, witness = check_reversible(seqnat_twt)
    assert not ok
    # the offending leaf is produced by two different transitions
    assert witness.leaf == ("num", "to-parent")
    assert {witness.key1[2], witness.key2[2]} == {"self", ("from-child", 1)}


def test_predecessor_walks_backwards(count_twt):
    tau = parse_tree("a(b(c),c)", count_twt.input)
    cfgs = forward_configs(count_twt, tau)
    back = [cfgs[-1]]
    while True:
        prev = predecessor(count_twt, tau, back[-1])
        if prev is None:
            break
        back.append(prev)
    assert back == list(reversed(cfgs))


def test_predecessor_requires_reversibility(seqnat_twt):
    tau = parse_tree(unary(2), seqnat_twt.input)
    m = TwtMachine(seqnat_twt, tau)
    with pytest.raises(NotReversible):
        predecessor(seqnat_twt, tau, m.initial())


def test_twt_serialization_roundtrip(count_twt):
    again = parse_twt(count_twt.to_str())
    tau = parse_tree("a(b(c),c)", count_twt.input)
    assert twt_run(again, tau).tree == twt_run(count_twt, tau).tree
    assert again.to_str() == count_twt.to_str()


def test_iptt_serialization_roundtrip(bin2unary):
    again = parse_iptt(bin2unary.to_str())
    tau = parse_tree(numeral(3), bin2unary.input)
    assert iptt_run(again, tau).tree == iptt_run(bin2unary, tau).tree
    assert again.to_str() == bin2unary.to_str()


def test_quote_state():
    assert quote_state("q0") == "q0"
    assert quote_state('odd name') == '"odd name"'
    assert quote_state('with "quote"') == r'"with \"quote\""'


def test_image_to_str():
    img = FNode("S", ((("q", "to-parent")),))
    assert image_to_str(img) == "S((q, to-parent))"
    img = FNode("cons", (("num", "stay"), ("spine", ("to-child", 1))))
    assert image_to_str(img) == "cons((num, stay),(spine, to-child 1))"
