"""Command-line front end.

Spec files are recognized by extension: .lt (lambda-transducer), .gls
(stateful GLS form), .twt (tree-walking transducer), .iptt (invisible
pebble transducer).  Trees are given inline ("a(b(c),c)") or as @file.
Exit status: 0 on success/agreement, 1 on mismatch or error, 2 on usage
errors."""

from __future__ import annotations

import argparse
import random
import sys
import time

from .core import LamtransError, RankedAlphabet, Tree, parse_tree
from .treegen import Diverged, Output, Stuck
from . import treegen


class NoNullaryLetter(LamtransError):
    pass


def gen_tree(rng, alphabet, bound):
    """A random tree of size <= bound; rank-0 letters are forced when the
    budget runs out."""
    nullary = [(n, r) for n, r in alphabet.letters if r == 0]
    if not nullary:
        raise NoNullaryLetter(f"no rank-0 letter in {alphabet.to_str()}")

    def go(budget):
        pool = [(n, r) for n, r in alphabet.letters if r < budget] or nullary
        name, rank = pool[rng.randrange(len(pool))]
        kids = []
        budget -= 1
        for i in range(rank):
            share = budget // (rank - i)
            sub = go(max(1, share))
            budget -= sub.size()
            kids.append(sub)
        return Tree(name, tuple(kids))

    return go(max(1, bound))


def load_spec(path):
    from . import gls, transducer, walking
    if path.endswith(".lt"):
        return "lt", transducer.load_transducer(path)
    if path.endswith(".gls"):
        return "gls", gls.load_gls(path)
    if path.endswith(".twt"):
        return "twt", walking.load_twt(path)
    if path.endswith(".iptt"):
        return "iptt", walking.load_iptt(path)
    raise LamtransError(f"unrecognized spec extension: {path}")


def read_tree(arg, alphabet=None):
    if arg.startswith("@"):
        with open(arg[1:]) as f:
            arg = f.read()
    return parse_tree(arg, alphabet)


def machine_result(res):
    if isinstance(res, Output):
        print(res.tree.to_str())
        return 0
    if isinstance(res, Stuck):
        print(f"stuck after {res.steps} steps at leaf {list(res.pos)}",
              file=sys.stderr)
        return 1
    assert isinstance(res, Diverged)
    print(f"no output within {res.steps} steps", file=sys.stderr)
    return 1


def input_alphabet(kind, spec):
    return spec.input


# -- subcommands ------------------------------------------------------------

def cmd_typecheck(args):
    kind, spec = load_spec(args.spec)
    from .typecheck import type_to_str
    if kind == "lt":
        print(f"ok: memory {type_to_str(spec.memory)}, {spec.tier_name()}")
    elif kind == "gls":
        tys = ", ".join(f"{q}:{type_to_str(A)}"
                        for q, A in sorted(spec.state_types.items()))
        print(f"ok: states {tys}")
    else:
        print(f"ok: {len(spec.states)} states")
    return 0


def cmd_classify(args):
    kind, spec = load_spec(args.spec)
    if kind != "lt":
        print(f"classify expects a .lt spec, got {args.spec}",
              file=sys.stderr)
        return 1
    print(spec.tier_name())
    return 0


def _lt_backend(spec, machine, fuel):
    """Returns a function Tree -> MachineResult-or-Tree for one backend."""
    from . import compiler, walking
    if machine == "normalize":
        return lambda tau: Output(spec.eval_normalize(tau, fuel), 0)
    if machine == "iam":
        from .iam import IamMachine, TermInfo, run_iam
        return lambda tau: run_iam(spec.program_ann(tau), "auto", fuel)
    if machine == "twt":
        tw = compiler.compile_to_twt(spec)
        return lambda tau: walking.twt_run(tw, tau, fuel)
    if machine == "iptt":
        ip = compiler.compile_to_iptt(spec)
        return lambda tau: walking.iptt_run(ip, tau, fuel)
    raise LamtransError(f"unknown machine {machine!r}")


def cmd_run(args):
    from . import walking
    kind, spec = load_spec(args.spec)
    if kind == "lt":
        tau = read_tree(args.tree, spec.input)
        return machine_result(_lt_backend(spec, args.machine, args.fuel)(tau))
    tau = read_tree(args.tree, spec.input)
    if kind == "gls":
        print(spec.run(tau, args.fuel).to_str())
        return 0
    if kind == "twt":
        return machine_result(walking.twt_run(spec, tau, args.fuel))
    return machine_result(walking.iptt_run(spec, tau, args.fuel))


def cmd_normalize(args):
    args.machine = "normalize"
    return cmd_run(args)


def cmd_compile(args):
    from . import compiler
    kind, spec = load_spec(args.spec)
    if kind != "lt":
        print("compile expects a .lt spec", file=sys.stderr)
        return 1
    if args.target == "twt":
        out = compiler.compile_to_twt(spec).to_str()
    else:
        out = compiler.compile_to_iptt(spec).to_str()
    if args.output:
        with open(args.output, "w") as f:
            f.write(out)
    else:
        sys.stdout.write(out)
    return 0


def cmd_trace(args):
    from . import walking
    kind, spec = load_spec(args.spec)
    tau = read_tree(args.tree, spec.input)
    if kind == "lt":
        if args.machine in ("normalize",):
            print("trace supports the machine backends only",
                  file=sys.stderr)
            return 1
        if args.machine == "twt":
            from .compiler import compile_to_twt
            tw = compile_to_twt(spec)
            m = walking.TwtMachine(tw, tau)
        elif args.machine == "iptt":
            from .compiler import compile_to_iptt
            ip = compile_to_iptt(spec)
            m = walking.IpttMachine(ip, tau)
        else:
            from .iam import IamMachine, TermInfo, pick_variant
            info = TermInfo(spec.program_ann(tau))
            m = IamMachine(info, pick_variant(info.tier))
    elif kind == "twt":
        m = walking.TwtMachine(spec, tau)
    elif kind == "iptt":
        m = walking.IpttMachine(spec, tau)
    else:
        print("trace does not support .gls specs", file=sys.stderr)
        return 1
    for line in treegen.trace_lines(m, m.initial(), args.fuel):
        print(line)
    return 0


def cmd_reversible(args):
    from . import walking
    kind, spec = load_spec(args.spec)
    if kind == "lt":
        from .compiler import compile_to_twt
        spec = compile_to_twt(spec)
    elif kind != "twt":
        print("reversible expects a .twt or .lt spec", file=sys.stderr)
        return 1
    ok, witness = walking.check_reversible(spec)
    if ok:
        print("reversible")
        return 0
    print(f"not reversible: {witness}")
    return 1


def cmd_compose(args):
    from .transducer import compose, load_transducer
    f = load_transducer(args.first)
    g = load_transducer(args.second)
    out = compose(f, g).to_str()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


def difftest_backends(kind, spec, fuel):
    if kind == "lt":
        names = ["normalize", "iam"]
        if spec.tier <= 1:
            names.append("twt")
        if spec.tier <= 2:
            names.append("iptt")
        return [(n, _lt_backend(spec, n, fuel)) for n in names]
    if kind == "gls":
        from .gls import make_type_constant, split_state_relabeling
        const = make_type_constant(spec)
        relabel, trans = split_state_relabeling(const)
        return [
            ("gls", lambda tau: Output(spec.run(tau, fuel), 0)),
            ("type-constant", lambda tau: Output(const.run(tau, fuel), 0)),
            ("relabel+transducer",
             lambda tau: Output(trans.eval_normalize(relabel(tau), fuel), 0)),
        ]
    raise LamtransError("difftest expects .lt or .gls specs")


def cmd_difftest(args):
    start = time.time()
    status = 0
    for path in args.spec:
        kind, spec = load_spec(path)
        backends = difftest_backends(kind, spec, args.fuel)
        rng = random.Random(args.seed)
        agree = 0
        for i in range(args.cases):
            tau = gen_tree(rng, spec.input, args.size)
            results = []
            for bname, run in backends:
                res = run(tau)
                results.append((bname, res.tree if isinstance(res, Output)
                                else res))
            baseline = results[0][1]
            bad = [(n, r) for n, r in results
                   if not isinstance(r, Tree) or r != baseline]
            if bad:
                status = 1
                print(f"{path}: case {i} ({tau.to_str()}) disagrees:")
                print(f"  {results[0][0]}: {baseline.to_str()}")
                for n, r in bad:
                    shown = r.to_str() if isinstance(r, Tree) else repr(r)
                    print(f"  {n}: {shown}")
            else:
                agree += 1
        print(f"{path}: {agree}/{args.cases} agree "
              f"({', '.join(n for n, _ in backends)})")
    print(f"total {time.time() - start:.2f}s")
    return status


def main(argv=None):
    p = argparse.ArgumentParser(
        prog="lamtrans",
        description="lambda-transducers, token machines, and tree-walking "
                    "compilation")
    p.add_argument("--fuel", type=int, default=10_000_000,
                   help="maximum number of machine/rewrite steps")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("typecheck", help="load and typecheck a spec")
    sp.add_argument("spec")
    sp.set_defaults(fn=cmd_typecheck)

    sp = sub.add_parser("classify", help="print a transducer's tier")
    sp.add_argument("spec")
    sp.set_defaults(fn=cmd_classify)

    sp = sub.add_parser("normalize", help="evaluate by normalization")
    sp.add_argument("spec")
    sp.add_argument("tree")
    sp.set_defaults(fn=cmd_normalize)

    sp = sub.add_parser("run", help="evaluate a spec on a tree")
    sp.add_argument("--machine", default="normalize",
                    choices=["normalize", "iam", "twt", "iptt"])
    sp.add_argument("spec")
    sp.add_argument("tree")
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("compile", help="compile a .lt spec to a walking "
                                        "machine")
    sp.add_argument("--target", required=True, choices=["twt", "iptt"])
    sp.add_argument("-o", "--output")
    sp.add_argument("spec")
    sp.set_defaults(fn=cmd_compile)

    sp = sub.add_parser("trace", help="stream a run as JSON lines")
    sp.add_argument("--machine", default="iam",
                    choices=["iam", "twt", "iptt"])
    sp.add_argument("spec")
    sp.add_argument("tree")
    sp.set_defaults(fn=cmd_trace)

    sp = sub.add_parser("difftest", help="run all applicable backends on "
                                         "random inputs")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--cases", type=int, default=100)
    sp.add_argument("--size", type=int, default=12,
                    help="maximum input tree size")
    sp.add_argument("spec", nargs="+")
    sp.set_defaults(fn=cmd_difftest)

    sp = sub.add_parser("compose", help="compose two .lt specs")
    sp.add_argument("-o", "--output")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.set_defaults(fn=cmd_compose)

    sp = sub.add_parser("reversible", help="check reversibility")
    sp.add_argument("spec")
    sp.set_defaults(fn=cmd_reversible)

    args = p.parse_args(argv)
    try:
        return args.fn(args)
    except LamtransError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
