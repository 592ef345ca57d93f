"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 parse/validation error (including a
structure unsuitable for the requested method), 3 inconsistent system,
4 solver non-convergence, 5 capacity exceeded, 6 ``demo`` check failure.
"""
import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import fixture_path
from .event_space import entropy
from .exceptions import (CapacityError, ConvergenceError, DomainError, InconsistentSystemError,
                         ParseError, PreconditionError, ValidationError)
from .extension import (SolverConfig, information, maxent_extension, most_informative_forest,
                        product_extension, verify_counterexample)
from .fileformat import parse_joint, parse_system_file, write_joint
from .structure import classify
from .system import is_consistent

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INCONSISTENT, EXIT_SOLVER, EXIT_CAPACITY, EXIT_CHECK = range(7)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(suppress):
    p = argparse.ArgumentParser(add_help=False)
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--format", choices=("text", "json"), default=default or "text",
                   help="report format (default: text)")
    p.add_argument("--table-tol", type=float, default=default or 1e-9, metavar="T",
                   help="allowed deviation of table row sums from 1 (default: 1e-9)")
    return p


def build_parser():
    parser = _Parser(prog="probweb", parents=[_global_flags(False)],
                     description="Classify probability systems and extend them to joint distributions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    common = [_global_flags(True)]

    p = sub.add_parser("classify", parents=common, help="web / forest / conditional-web / bayes-net")
    p.add_argument("file")

    p = sub.add_parser("extend", parents=common, help="product or maximum-entropy extension")
    p.add_argument("--method", choices=("product", "maxent"), required=True)
    p.add_argument("--tol", type=float, default=1e-8, help="maxent residual tolerance")
    p.add_argument("--max-iter", type=int, default=100_000, help="maxent sweep budget")
    p.add_argument("file")

    p = sub.add_parser("check", parents=common, help="consistency check")
    p.add_argument("file")

    p = sub.add_parser("info", parents=common, help="maximum entropy over compatible distributions")
    p.add_argument("file")

    p = sub.add_parser("prune", parents=common, help="most informative subforest")
    p.add_argument("file")

    p = sub.add_parser("demo", parents=common, help="reproduce a bundled example")
    p.add_argument("name", choices=("counterexample",))
    p.add_argument("--tol", type=float, default=None,
                   help="override every comparison tolerance")

    p = sub.add_parser("entropy", parents=common, help="entropy (nats) of a joint file")
    p.add_argument("file")
    return parser


# -- report helpers --------------------------------------------------------

def _read(path):
    data = Path(path).read_bytes()
    return data.decode("utf-8"), {"path": str(path), "sha256": hashlib.sha256(data).hexdigest()}


def _load(args):
    text, digest = _read(args.file)
    sf = parse_system_file(text, args.file, table_tol=args.table_tol)
    return sf.system, digest


def _joint_json(p):
    return {"descriptors": [{"name": d.name, "arity": d.arity} for d in p.space],
            "values": [float(x) for x in p.probabilities]}


def _joint_text(p):
    return write_joint(p).rstrip("\n")


def _cfg(args):
    return SolverConfig(tol=getattr(args, "tol", 1e-8) or 1e-8,
                        max_iter=getattr(args, "max_iter", 100_000))


def _consistency_json(rep):
    out = {"status": rep.status, "consistent": rep.consistent,
           "max_residual": rep.max_residual, "lower_bound": rep.lower_bound,
           "certificate": list(rep.certificate), "witness_method": rep.witness_method,
           "vacuous_rows": list(rep.vacuous_rows)}
    if rep.witness is not None:
        out["witness"] = _joint_json(rep.witness)
    return out


def _consistency_text(rep):
    lines = [f"consistent: {'yes' if rep.consistent else 'no'} ({rep.status})"]
    if rep.consistent:
        lines.append(f"max-residual: {rep.max_residual!r}")
        lines.append(f"witness: {rep.witness_method}")
        if rep.vacuous_rows:
            lines.append("vacuous rows: " + "; ".join(rep.vacuous_rows))
        lines.append(_joint_text(rep.witness))
    else:
        lines.append(f"min-max-residual: {rep.max_residual!r}")
        if rep.lower_bound:
            lines.append(f"lower-bound: {rep.lower_bound!r}")
        if rep.certificate:
            lines.append("certificate: " + "; ".join(rep.certificate))
    return "\n".join(lines)


# -- commands --------------------------------------------------------------

def cmd_classify(args):
    pc, digest = _load(args)
    c = classify(pc.structure)
    out = {"web": c.is_web, "forest": c.is_forest, "conditional_web": c.is_conditional_web,
           "bayes_net": c.is_bayes_net_shape, "absolutes_disjoint": c.absolutes_disjoint,
           "unpack_order": [str(x) for x in c.unpack_order] if c.unpack_order else None}
    text = c.summary()
    if c.unpack_order:
        text += "\nunpack order: " + " ".join(map(str, c.unpack_order))
    return EXIT_OK, digest, out, {}, text


def cmd_extend(args):
    pc, digest = _load(args)
    if args.method == "product":
        res = product_extension(pc, args.table_tol)
    else:
        res = maxent_extension(pc, _cfg(args))
    out = {"method": res.method, "distribution": _joint_json(res.distribution),
           "entropy": res.entropy}
    diag = {"iterations": res.iterations, "max_residual": res.max_residual,
            "converged": res.converged, "notes": list(res.notes)}
    text = "\n".join([_joint_text(res.distribution), f"# method: {res.method}",
                      f"# entropy: {res.entropy!r}", f"# iterations: {res.iterations}",
                      f"# max-residual: {res.max_residual!r}"]
                     + [f"# note: {n}" for n in res.notes])
    return EXIT_OK, digest, out, diag, text


def cmd_check(args):
    pc, digest = _load(args)
    rep = is_consistent(pc, config=_cfg(args))
    return EXIT_OK, digest, _consistency_json(rep), {}, _consistency_text(rep)


def cmd_info(args):
    pc, digest = _load(args)
    rep = information(pc, _cfg(args))
    out = {"information": rep.value, "distribution": _joint_json(rep.distribution),
           "convention": "max entropy over compatible distributions, nats"}
    diag = {"iterations": rep.iterations, "max_residual": rep.max_residual}
    text = f"information: {rep.value!r} nats (max entropy)\n{_joint_text(rep.distribution)}"
    return EXIT_OK, digest, out, diag, text


def cmd_prune(args):
    pc, digest = _load(args)
    res = most_informative_forest(pc, _cfg(args))
    table = [{"forest": [str(c) for c in s], "mask": m, "information": v}
             for s, m, v in res.evaluated]
    out = {"best": [str(c) for c in res.best], "best_mask": res.best_mask,
           "information": res.value, "full_information": res.full_value,
           "information_loss": res.loss,
           "ranking": "lowest max entropy wins; ties keep more components", "evaluated": table}
    lines = ["best subforest: " + " ".join(map(str, res.best)),
             f"information: {res.value!r} nats",
             "full system: " + ("inconsistent" if res.full_value is None
                                else f"{res.full_value!r} nats"),
             "information loss: " + ("n/a" if res.loss is None else repr(res.loss)),
             "evaluated:"]
    lines += [f"  {' '.join(r['forest'])}  {r['information']!r}" for r in table]
    return EXIT_OK, digest, out, {}, "\n".join(lines)


def cmd_demo(args):
    data = fixture_path(args.name).read_bytes()
    digest = {"path": f"<bundled {args.name}.pks>", "sha256": hashlib.sha256(data).hexdigest()}
    rep = verify_counterexample(tol=args.tol)
    prod = rep.product.distribution
    hat = rep.maxent.distribution
    rows = []
    for k in range(prod.space.n_states):
        states = list(prod.space.assignment_of(k).states)
        rows.append({"states": states, "product": float(prod.probabilities[k]),
                     "maxent": float(hat.probabilities[k])})
    checks = [{"name": c.name, "value": c.value, "expected": c.expected, "tol": c.tol,
               "passed": c.passed} for c in rep.checks]
    flags = [{"name": n, "passed": bool(ok)} for n, ok in rep.flags]
    out = {"table": rows, "checks": checks, "flags": flags, "passed": rep.passed,
           "product_entropy": rep.product.entropy, "maxent_entropy": rep.maxent.entropy}
    lines = ["X1 X2 X3  product  maxent"]
    # reference order: (1,1,1) first
    for r in reversed(rows):
        lines.append(f"{r['states'][0]}  {r['states'][1]}  {r['states'][2]}   "
                     f"{r['product']!r}  {r['maxent']!r}")
    lines.append("")
    for c in checks:
        lines.append(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']} = {c['value']!r} "
                     f"(expected {c['expected']!r}, tol {c['tol']!r})")
    for f in flags:
        lines.append(f"{'PASS' if f['passed'] else 'FAIL'}  {f['name']}")
    lines.append("PASS" if rep.passed else "FAIL")
    return (EXIT_OK if rep.passed else EXIT_CHECK), digest, out, {}, "\n".join(lines)


def cmd_entropy(args):
    text, digest = _read(args.file)
    p = parse_joint(text, tol=args.table_tol)
    h = entropy(p)
    return EXIT_OK, digest, {"entropy": h, "units": "nats"}, {}, f"entropy: {h!r} nats"


COMMANDS = {"classify": cmd_classify, "extend": cmd_extend, "check": cmd_check,
            "info": cmd_info, "prune": cmd_prune, "demo": cmd_demo, "entropy": cmd_entropy}


def _emit(args, code, digest, outputs, diagnostics, text, elapsed, stdout):
    if args.format == "json":
        report = {"command": args.command, "exit_code": code, "inputs": digest,
                  "outputs": outputs, "diagnostics": diagnostics,
                  "timings": {"seconds": elapsed}}
        stdout.write(json.dumps(report, indent=2, default=_jsonable) + "\n")
    else:
        stdout.write(text + "\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _fail(args, code, message, stdout, stderr, outputs=None, text=None):
    stderr.write(f"probweb {args.command}: {message}\n")
    if args.format == "json":
        report = {"command": args.command, "exit_code": code, "error": message}
        if outputs is not None:
            report["outputs"] = outputs
        stdout.write(json.dumps(report, indent=2, default=_jsonable) + "\n")
    elif text:
        stdout.write(text + "\n")
    return code


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    start = time.perf_counter()
    try:
        code, digest, outputs, diag, text = COMMANDS[args.command](args)
    except OSError as exc:
        return _fail(args, EXIT_USAGE, f"cannot read input: {exc}", stdout, stderr)
    except CapacityError as exc:
        return _fail(args, EXIT_CAPACITY, str(exc), stdout, stderr)
    except (ParseError, ValidationError, PreconditionError, DomainError, UnicodeDecodeError) as exc:
        return _fail(args, EXIT_INPUT, str(exc), stdout, stderr)
    except InconsistentSystemError as exc:
        return _fail(args, EXIT_INCONSISTENT, str(exc), stdout, stderr,
                     _consistency_json(exc.report), _consistency_text(exc.report))
    except ConvergenceError as exc:
        return _fail(args, EXIT_SOLVER, str(exc), stdout, stderr,
                     {"residual": exc.residual, "iterations": exc.iterations})
    _emit(args, code, digest, outputs, diag, text, time.perf_counter() - start, stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
