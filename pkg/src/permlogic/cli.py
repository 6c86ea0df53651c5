"""Command-line entry point ``permlogic``.

Exit codes: 0 positive verdict, 1 negative verdict within bounds, 2 input or
usage error, 3 budget exceeded.  The verdict is the first line on stdout.
"""

from __future__ import annotations

import argparse
import sys

from .automata import AutomatonError, as_dict, parikh_intersection_nonempty, parikh_word, default_cap
from .constraints import construct_permutation
from .formats import (FormatError, labeled_of, read_constraint, read_formula, read_model, read_nfa,
                      read_rlp, write_formula, write_model)
from .logic import FormulaError, eval_formula, to_snf, to_text
from .perm import PermError, ValuedPermutation, fingerprints, maximal_blocks
from .rlp import RLP_THRESHOLD, RlpError, SolveStats, shuffle_check, solve_rlp, verify_witness
from .sat import SatError, decide_sat

OK, NEGATIVE, USAGE, BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


def _read(path, reader):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise FormatError(f"{path}: {e.strerror}") from None
    try:
        return reader(text)
    except FormatError as e:
        raise FormatError(f"{path}: {e}") from None


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _say(*lines):
    for line in lines:
        print(line)


# --- subcommands ------------------------------------------------------------------

def cmd_check(args):
    m = _read(args.model, read_model)
    phi = _read(args.formula, read_formula)
    ok = eval_formula(m, phi)
    _say("OK" if ok else "FAIL")
    return OK if ok else NEGATIVE


def cmd_sat(args):
    phi = _read(args.formula, read_formula)
    res = decide_sat(phi, max_fingerprints=args.max_fingerprints, max_block_len=args.block_len,
                     parikh_cap=args.parikh_cap, theta=args.theta, time_budget=args.time_budget,
                     oracle=args.oracle, max_size=args.max_size)
    knobs = dict(sorted(res.bounds.items()))
    shown = " ".join(f"{k}={'auto' if v is None else v}" for k, v in knobs.items())
    if res.status == "SAT":
        _say("SAT", f"size {res.model.n}")
        if args.out:
            _write(args.out, write_model(res.model, knobs))
        return OK
    if res.status == "UNSAT_WITHIN_BOUNDS":
        _say("UNSAT-WITHIN-BOUNDS", f"bounds {shown}")
        return NEGATIVE
    _say("BUDGET-EXCEEDED", f"bounds {shown} time_budget={args.time_budget}")
    return BUDGET


def cmd_snf(args):
    s = to_snf(_read(args.formula, read_formula))
    f = s.as_formula()
    _say(to_text(f))
    if s.fresh:
        print("fresh " + " ".join(sorted(s.fresh)))
    if args.out:
        _write(args.out, write_formula(f))
    return OK


def cmd_rlp_solve(args):
    inst = _read(args.instance, read_rlp)
    stats = SolveStats()
    lp = solve_rlp(inst, theta=args.theta, cap=args.parikh_cap, stats=stats,
                   fallback_len=args.fallback_len)
    knobs = {"theta": args.theta, "parikh_cap": stats.cap, "fallback_len": args.fallback_len}
    if lp is None:
        _say("NO", "bounds " + " ".join(f"{k}={'auto' if v is None else v}" for k, v in knobs.items()))
        return NEGATIVE
    _say("YES", f"size {lp.n}")
    if stats.fallback:
        print("note: witness found by the exact fallback search", file=sys.stderr)
    if args.out:
        _write(args.out, write_model(lp, knobs))
    return OK


def cmd_rlp_verify(args):
    inst = _read(args.instance, read_rlp)
    lp = labeled_of(_read(args.witness, read_model))
    ok = verify_witness(lp, inst)
    _say("OK" if ok else "FAIL")
    return OK if ok else NEGATIVE


def cmd_perm_construct(args):
    z = _read(args.constraint, read_constraint)
    p = construct_permutation(z)
    if p is None:
        _say("NO")
        return NEGATIVE
    _say("YES", " ".join(f"{r}:{c}" for r, c in sorted(p.elements)))
    if args.out:
        m = ValuedPermutation(p.normalized(), tuple(frozenset() for _ in range(z.domain.n)))
        _write(args.out, write_model(m, {"k": z.k}))
    return OK


def cmd_perm_blocks(args):
    m = _read(args.model, read_model)
    _say("OK")
    for b in maximal_blocks(m):
        _say(f"{b.btype} rows {b.i}..{b.i + b.k} cols {b.j}..{b.j + b.k}")
    return OK


def cmd_perm_fingerprints(args):
    m = _read(args.model, read_model)
    _say("OK")
    for fp in fingerprints(m):
        _say(str(fp))
    return OK


def _vector(text, alphabet):
    out = {}
    for part in filter(None, text.split(",")):
        a, _, c = part.partition("=")
        if a.strip() not in alphabet or not c.strip().isdigit():
            raise FormatError(f"bad vector entry {part!r}; use letter=count")
        out[a.strip()] = int(c)
    return out


def cmd_nfa_parikh(args):
    a = _read(args.nfa, read_nfa)
    w = parikh_word(a, _vector(args.vector, a.alphabet))
    if w is None:
        _say("NO")
        return NEGATIVE
    _say("YES", "word " + (" ".join(w) if w else "ε"))
    return OK


def cmd_nfa_intersect(args):
    a, b = _read(args.a, read_nfa), _read(args.b, read_nfa)
    cap = default_cap(a, b) if args.parikh_cap is None else args.parikh_cap
    v = parikh_intersection_nonempty(a, b, cap)
    if v is None:
        _say("NO", f"bounds parikh_cap={cap}")
        return NEGATIVE
    _say("YES", "vector " + ",".join(f"{k}={c}" for k, c in as_dict(v, a.alphabet).items()))
    return OK


def cmd_shuffle(args):
    l1, l2 = _read(args.l1, read_nfa), _read(args.l2, read_nfa)
    res = shuffle_check(l1, l2, args.max_n, method=args.method, theta=args.theta)
    if res is None:
        _say("NO", f"bounds max_n={args.max_n} method={args.method}")
        return NEGATIVE
    word, p = res
    _say("YES", "word " + " ".join(word), "perm " + " ".join(map(str, p)))
    return OK


# --- wiring -----------------------------------------------------------------------

def build_parser():
    ap = _Parser(prog="permlogic", description="Two-variable logic over permutations.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="evaluate a formula on a model")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("sat", help="bounded satisfiability")
    p.add_argument("--formula", required=True)
    p.add_argument("--max-fingerprints", type=int, default=6)
    p.add_argument("--block-len", type=int, default=3)
    p.add_argument("--parikh-cap", type=int, default=None)
    p.add_argument("--theta", type=int, default=1)
    p.add_argument("--time-budget", type=float, default=None)
    p.add_argument("--oracle", action="store_true", help="use exhaustive model search")
    p.add_argument("--max-size", type=int, default=5, help="model size bound for --oracle")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_sat)

    p = sub.add_parser("snf", help="print the normal form")
    p.add_argument("--formula", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_snf)

    rlp = sub.add_parser("rlp", help="restricted labeled permutations")
    rsub = rlp.add_subparsers(dest="rcmd", required=True, parser_class=_Parser)
    p = rsub.add_parser("solve")
    p.add_argument("--instance", required=True)
    p.add_argument("--theta", type=int, default=RLP_THRESHOLD)
    p.add_argument("--parikh-cap", type=int, default=None)
    p.add_argument("--fallback-len", type=int, default=8)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_rlp_solve)
    p = rsub.add_parser("verify")
    p.add_argument("--instance", required=True)
    p.add_argument("--witness", required=True)
    p.set_defaults(fn=cmd_rlp_verify)

    perm = sub.add_parser("perm", help="permutation utilities")
    psub = perm.add_subparsers(dest="pcmd", required=True, parser_class=_Parser)
    p = psub.add_parser("construct")
    p.add_argument("--constraint", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_perm_construct)
    for name, fn in (("blocks", cmd_perm_blocks), ("fingerprints", cmd_perm_fingerprints)):
        p = psub.add_parser(name)
        p.add_argument("--model", required=True)
        p.set_defaults(fn=fn)

    nfa = sub.add_parser("nfa", help="automata utilities")
    nsub = nfa.add_subparsers(dest="ncmd", required=True, parser_class=_Parser)
    p = nsub.add_parser("parikh")
    p.add_argument("--nfa", required=True)
    p.add_argument("--vector", required=True, help="e.g. a=2,b=1")
    p.set_defaults(fn=cmd_nfa_parikh)
    p = nsub.add_parser("intersect")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--parikh-cap", type=int, default=None)
    p.set_defaults(fn=cmd_nfa_intersect)

    p = sub.add_parser("shuffle", help="word plus gap permutation into a second language")
    p.add_argument("--l1", required=True)
    p.add_argument("--l2", required=True)
    p.add_argument("--max-n", type=int, default=7)
    p.add_argument("--method", choices=("rlp", "brute"), default="rlp")
    p.add_argument("--theta", type=int, default=1)
    p.set_defaults(fn=cmd_shuffle)
    return ap


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else USAGE
    try:
        return args.fn(args)
    except (FormatError, FormulaError, PermError, AutomatonError, RlpError, SatError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
