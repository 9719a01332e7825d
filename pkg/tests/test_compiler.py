import pytest

from lamtrans.core import parse_tree
from lamtrans.iam import IamMachine, TermInfo, pick_variant, run_iam
from lamtrans.treegen import (FNode, Output, frontier_configs, frontier_get,
                              frontier_replace)
from lamtrans.compiler import (SimMapper, TwtCompiler, compile_to_iptt,
                               compile_to_twt)
from lamtrans.walking import (TwtMachine, check_reversible, iptt_run,
                              parse_iptt, parse_twt, twt_run)
from conftest import numeral, unary

# Hand-derived first eight configurations of the compiled walking machine
# for count on a(b(c),c); state names render the underlying local token
# configurations.
GOLDEN_TWT_PREFIX = [
    ("I", "self", ()),
    (r'U[down,">\f. f 0<","p"]', "self", ()),
    (r'U[down,"\f. >f 0<",""]', "self", ()),
    (r'U[down,"\f. >f< 0","p"]', "self", ()),
    (r'U[up,"<\f. f 0>","op"]', "self", ()),
    (r'Nabla["p"]', "self", ()),
    (r'T[down,">(\l. \r. \x. l (r x)) <>1< <>2","pp"]', "self", ()),
    (r'T[down,"(>\l. \r. \x. l (r x)<) <>1 <>2","ppp"]', "self", ()),
]


def frontiers(machine, initial):
    f = initial
    out = [f]
    while frontier_configs(f):
        pos = frontier_configs(f)[0]
        res = machine.step(frontier_get(f, pos))
        assert res is not None
        f = frontier_replace(f, pos, res)
        out.append(f)
    return out


def map_leaves(f, fn):
    if isinstance(f, FNode):
        return FNode(f.label, tuple(map_leaves(c, fn) for c in f.children))
    return fn(f)


def test_compiled_count_twt(count):
    tw = compile_to_twt(count)
    assert len(tw.states) == 46
    ok, _ = check_reversible(tw)
    assert ok
    for s in ["c", "b(c)", "a(b(c),c)", "a(a(c,c),b(b(c)))"]:
        tau = parse_tree(s, count.input)
        res = twt_run(tw, tau)
        assert isinstance(res, Output)
        assert res.tree == count.eval_normalize(tau)


def test_compiled_count_golden_prefix(count):
    tw = compile_to_twt(count)
    tau = parse_tree("a(b(c),c)", count.input)
    m = TwtMachine(tw, tau)
    cfg = m.initial()
    got = []
    for _ in GOLDEN_TWT_PREFIX:
        got.append((cfg.state, cfg.prov, cfg.node))
        res = m.step(cfg)
        cfg = frontier_get(res, frontier_configs(res)[0])
    assert got == GOLDEN_TWT_PREFIX


def test_compiled_twt_steps_match_token_machine(count):
    # the compilation is a step-by-step simulation, so the step counts
    # coincide exactly
    tw = compile_to_twt(count)
    tau = parse_tree("a(b(c),c)", count.input)
    assert twt_run(tw, tau).steps == run_iam(count.program_ann(tau),
                                             "pa").steps == 52


def test_simulation_square(count, seqnat):
    for spec, s in [(count, "a(b(c),c)"), (seqnat, unary(3))]:
        tau = parse_tree(s, spec.input)
        comp = TwtCompiler(spec)
        tw = comp.compile()
        mapper = SimMapper(comp, tau)
        iam = IamMachine(TermInfo(spec.program_ann(tau)),
                         pick_variant(spec.tier))
        twm = TwtMachine(tw, tau)
        iam_side = [map_leaves(f, mapper.map)
                    for f in frontiers(iam, iam.initial())]
        twt_side = frontiers(twm, twm.initial())
        assert iam_side == twt_side


def test_compiled_seqnat_twt(seqnat):
    tw = compile_to_twt(seqnat)
    ok, witness = check_reversible(tw)
    assert not ok and witness is not None
    for n in range(7):
        tau = parse_tree(unary(n), seqnat.input)
        res = twt_run(tw, tau)
        assert isinstance(res, Output)
        assert res.tree == seqnat.eval_normalize(tau)


def test_twt_compiler_rejects_depth1(bin2bin):
    from lamtrans.core import LamtransError
    with pytest.raises(LamtransError):
        compile_to_twt(bin2bin)


def test_compiled_bin2bin_iptt(bin2bin):
    ip = compile_to_iptt(bin2bin)
    for n in range(5):
        tau = parse_tree(numeral(n), bin2bin.input)
        res = iptt_run(ip, tau)
        assert isinstance(res, Output)
        assert res.tree == bin2bin.eval_normalize(tau)
        # one pebble operation per stack operation: same step count as the
        # single-stack token machine
        assert res.steps == run_iam(bin2bin.program_ann(tau), "ss").steps


def test_compiled_seqnat_iptt(seqnat):
    ip = compile_to_iptt(seqnat)
    for n in range(7):
        tau = parse_tree(unary(n), seqnat.input)
        assert iptt_run(ip, tau).tree == seqnat.eval_normalize(tau)


def test_compiled_specs_serialize(count, bin2bin):
    tw = parse_twt(compile_to_twt(count).to_str())
    tau = parse_tree("a(b(c),c)", count.input)
    assert twt_run(tw, tau).tree == count.eval_normalize(tau)
    ip = parse_iptt(compile_to_iptt(bin2bin).to_str())
    tau = parse_tree(numeral(2), bin2bin.input)
    assert iptt_run(ip, tau).tree == bin2bin.eval_normalize(tau)
