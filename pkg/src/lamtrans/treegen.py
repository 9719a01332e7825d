"""Tree-generating abstract machines.

A machine is given by a set of configurations and a partial step function
sending a configuration to a tree over the output alphabet whose leaves may
again be configurations.  A run starts from a single configuration and
repeatedly replaces one configuration leaf of the frontier by the result of
stepping it; it produces an output once no configuration leaves remain.
The step functions used here are orthogonal, so the result does not depend
on which leaf is picked; the leftmost policy is the canonical one."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .core import LamtransError, Tree


@dataclass(frozen=True)
class FNode:
    """An output-alphabet node of a frontier; children may be FNodes or
    machine configurations."""
    label: str
    children: tuple = ()


def frontier_configs(f, pos=()):
    """Positions of configuration leaves, left to right."""
    if isinstance(f, FNode):
        out = []
        for i, c in enumerate(f.children):
            out.extend(frontier_configs(c, pos + (i,)))
        return out
    return [pos]


def frontier_get(f, pos):
    for i in pos:
        f = f.children[i]
    return f


def frontier_replace(f, pos, sub):
    if not pos:
        return sub
    cs = list(f.children)
    cs[pos[0]] = frontier_replace(cs[pos[0]], pos[1:], sub)
    return FNode(f.label, tuple(cs))


def frontier_to_tree(f):
    if not isinstance(f, FNode):
        raise LamtransError("frontier still contains configurations")
    return Tree(f.label, tuple(frontier_to_tree(c) for c in f.children))


def frontier_to_str(f, render):
    if isinstance(f, FNode):
        if not f.children:
            return f.label
        return (f.label + "("
                + ",".join(frontier_to_str(c, render) for c in f.children)
                + ")")
    return "[" + render(f) + "]"


@dataclass
class Output:
    tree: Tree
    steps: int


@dataclass
class Stuck:
    frontier: object
    pos: tuple
    steps: int


@dataclass
class Diverged:
    frontier: object
    steps: int


class Machine:
    """Base class; subclasses provide step() and usually render()."""

    def step(self, config):
        """Return an FNode/configuration, or None when stuck."""
        raise NotImplementedError

    def render(self, config):
        return str(config)


def run(machine, initial, fuel=10_000_000, order="leftmost"):
    frontier = initial
    for n in range(fuel):
        leaves = frontier_configs(frontier)
        if not leaves:
            return Output(frontier_to_tree(frontier), n)
        pos = leaves[0] if order == "leftmost" else leaves[-1]
        res = machine.step(frontier_get(frontier, pos))
        if res is None:
            return Stuck(frontier, pos, n)
        frontier = frontier_replace(frontier, pos, res)
    leaves = frontier_configs(frontier)
    if not leaves:
        return Output(frontier_to_tree(frontier), fuel)
    return Diverged(frontier, fuel)


def trace(machine, initial, fuel=10_000_000, order="leftmost"):
    """Yield one JSON-serializable record per frontier, including the
    initial one.  'fired' is the leaf position about to be rewritten (null
    on the final record)."""
    frontier = initial
    for n in range(fuel + 1):
        leaves = frontier_configs(frontier)
        if not leaves or n == fuel:
            yield {"step": n,
                   "frontier": frontier_to_str(frontier, machine.render),
                   "fired": None}
            return
        pos = leaves[0] if order == "leftmost" else leaves[-1]
        yield {"step": n,
               "frontier": frontier_to_str(frontier, machine.render),
               "fired": list(pos)}
        res = machine.step(frontier_get(frontier, pos))
        if res is None:
            yield {"step": n + 1,
                   "frontier": frontier_to_str(frontier, machine.render),
                   "fired": None}
            return
        frontier = frontier_replace(frontier, pos, res)


def trace_lines(machine, initial, fuel=10_000_000, order="leftmost"):
    for rec in trace(machine, initial, fuel, order):
        yield json.dumps(rec)
