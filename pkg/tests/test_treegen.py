import json

from lamtrans.treegen import (Diverged, FNode, Machine, Output, Stuck,
                              frontier_configs, frontier_get, frontier_replace,
                              frontier_to_str, frontier_to_tree, run, trace,
                              trace_lines)


class Countdown(Machine):
    """Toy machine: configuration n unfolds to S(n-1), and 0 to a leaf."""

    def step(self, n):
        if n == 0:
            return FNode("0")
        return FNode("S", (n - 1,))


class Broken(Machine):
    def step(self, n):
        return None


def test_frontier_helpers():
    f = FNode("a", (3, FNode("b", (7,))))
    assert frontier_configs(f) == [(0,), (1, 0)]
    assert frontier_get(f, (1, 0)) == 7
    g = frontier_replace(f, (0,), FNode("c"))
    assert frontier_configs(g) == [(1, 0)]
    assert frontier_to_str(g, str) == "a(c,b([7]))"


def test_run_produces_output():
    res = run(Countdown(), 3)
    assert isinstance(res, Output)
    assert res.tree.to_str() == "S(S(S(0)))"
    assert res.steps == 4


def test_run_stuck():
    res = run(Broken(), 5)
    assert isinstance(res, Stuck)
    assert res.pos == ()
    assert res.steps == 0


def test_run_diverged():
    class Loop(Machine):
        def step(self, n):
            return n
    res = run(Loop(), 1, fuel=10)
    assert isinstance(res, Diverged)
    assert res.steps == 10


def test_run_order_independent():
    class Fork(Machine):
        def step(self, n):
            if n == 0:
                return FNode("c")
            return FNode("a", (n - 1, n - 1))
    left = run(Fork(), 2, order="leftmost")
    right = run(Fork(), 2, order="rightmost")
    assert left.tree == right.tree
    assert left.steps == right.steps


def test_frontier_to_tree_requires_no_configs():
    import pytest
    from lamtrans.core import LamtransError
    with pytest.raises(LamtransError):
        frontier_to_tree(FNode("a", (1, FNode("c"))))


def test_trace_records():
    recs = list(trace(Countdown(), 2))
    assert recs[0] == {"step": 0, "frontier": "[2]", "fired": []}
    assert recs[1]["frontier"] == "S([1])"
    assert recs[1]["fired"] == [0]
    assert recs[-1]["fired"] is None
    assert recs[-1]["frontier"] == "S(S(0))"


def test_trace_lines_are_json():
    for line in trace_lines(Countdown(), 2):
        rec = json.loads(line)
        assert set(rec) == {"step", "frontier", "fired"}
