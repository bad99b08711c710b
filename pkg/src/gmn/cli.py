"""Command-line front end: ``gmn <subcommand> [options]``.

Every subcommand writes its results into ``--out`` under fixed file names and
prints a short summary. Exit codes: 0 success, 1 a check failed or the optimizer
did not converge, 2 bad usage or unreadable input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from gmn import entanglement, optimize, paradox, selftest
from gmn.correlations import CorrelationTensor, InconsistentTensorError, check_no_signaling, correlation_tensor
from gmn.qstate import NAMED_STATES, MeasurementBasis, build_named_state, load_state


class CLIError(Exception):
    def __init__(self, message, code=2):
        super().__init__(message)
        self.code = code


# -- output helpers -------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(data):
    return json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n"


def _flatten(data, prefix=""):
    out = []
    if isinstance(data, dict):
        for k in sorted(data):
            out += _flatten(data[k], f"{prefix}{k}.")
    elif isinstance(data, (list, tuple)):
        for i, v in enumerate(data):
            out += _flatten(v, f"{prefix}{i}.")
    else:
        out.append((prefix[:-1], data))
    return out


def dict_csv(data):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(_jsonable(data)):
        w.writerow([k, repr(v) if isinstance(v, float) else v])
    return buf.getvalue()


class Output:
    """Writes files only inside the configured directory."""

    def __init__(self, directory):
        self.root = Path(directory).resolve()
        self.root.mkdir(parents=True, exist_ok=True)
        self.written = []

    def write(self, name, text):
        path = (self.root / name).resolve()
        if path.parent != self.root:
            raise CLIError(f"refusing to write outside {self.root}: {name}")
        path.write_text(text, encoding="utf-8")
        self.written.append(path)
        return path

    def record(self, stem, data, fmt):
        if fmt == "csv":
            return self.write(f"{stem}.csv", dict_csv(data))
        return self.write(f"{stem}.json", dumps(data))


# -- input helpers --------------------------------------------------------------

def _read_json(path):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CLIError(f"malformed JSON in {path}: {exc.msg} at line {exc.lineno} column {exc.colno}") from None


def resolve_state(spec):
    """Named state or path to a state JSON file."""
    if spec.upper() in NAMED_STATES:
        return build_named_state(spec), None
    data = _read_json(spec)
    try:
        state = load_state(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CLIError(f"invalid state file {spec}: {exc}") from None
    alphas = None
    if isinstance(data, dict) and data.get("type") == "ConstrainedFamilyParams":
        alphas = tuple(float(a) for a in data["alphas"])
    return state, alphas


def _floats(text, what):
    try:
        vals = [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise CLIError(f"{what} must be a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise CLIError(f"{what} is empty")
    return vals


def load_tensor(path):
    p = Path(path)
    if p.suffix.lower() == ".csv":
        try:
            return CorrelationTensor.from_csv(p.read_text(encoding="utf-8"))
        except OSError as exc:
            raise CLIError(f"cannot read {path}: {exc.strerror}") from None
        except (KeyError, ValueError, IndexError) as exc:
            raise CLIError(f"invalid tensor CSV {path}: {exc}") from None
    data = _read_json(path)
    try:
        return CorrelationTensor.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise CLIError(f"invalid tensor file {path}: {exc}") from None


# -- subcommands ----------------------------------------------------------------

def cmd_optimize(args, out):
    if args.n < 3:
        raise CLIError("--n must be at least 3; the paradox needs three or more parties")
    if args.general:
        if args.n != 3:
            raise CLIError("--general is implemented for --n 3")
        res = optimize.maximize_general_qubit(args.n, restarts=args.restarts, seed=args.seed)
    else:
        res = optimize.maximize_constrained(args.n, restarts=args.restarts, seed=args.seed)
    data = res.to_dict()
    out.record("optimize", data, args.format)
    lines = [f"S{args.n} = {res.best_score:.6f}",
             f"kind = {res.kind}",
             f"residual_max = {res.residual_max:.3e}",
             "alphas = " + ", ".join(f"{a:.8f}" for a in res.alphas)]
    if res.kind == "constrained":
        lines.insert(1, f"a = {res.best_params.a:.8f}")
        lines.insert(2, f"delta = {res.best_params.delta:.8f}")
    lines.append(f"converged = {str(res.converged).lower()}")
    summary = "\n".join(lines) + "\n"
    out.write("optimize_summary.txt", summary)
    print(summary, end="")
    return 0 if res.converged else 1


def _angles_for(args, state, alphas):
    n = state.num_parties
    if args.angles:
        vals = _floats(args.angles, "--angles")
        if len(vals) == 1:
            vals *= n
    elif alphas is not None:
        vals = list(alphas)
    else:
        vals = [math.pi / 2] * n
    if len(vals) != n:
        raise CLIError(f"--angles needs {n} values, got {len(vals)}")
    try:
        return [MeasurementBasis(a) for a in vals]
    except ValueError as exc:
        raise CLIError(str(exc)) from None


def cmd_certify(args, out):
    state, alphas = resolve_state(args.state)
    if any(d != 2 for d in state.local_dims):
        raise CLIError("certify expects a qubit state; use selftest for block embeddings")
    bases = _angles_for(args, state, alphas)
    tensor = correlation_tensor(state, bases)
    rep = paradox.score(tensor)
    local = paradox.membership_local(tensor)
    data = {"paradox": rep.to_dict(), "local": local.to_dict(),
            "angles": [b.alpha for b in bases]}
    genuine = (not local.feasible) and rep.residual_max <= args.tol and rep.score > args.tol
    if state.num_parties == 3:
        hybrid = paradox.membership_hybrid(tensor)
        data["hybrid"] = hybrid.to_dict()
        genuine = genuine and not hybrid.feasible
        chi = selftest.embed_blocks([1.0], state)
        data["selftest"] = selftest.certify(tensor, chi, tol=args.tol).to_dict()
    else:
        # hybrid polytope only built for three parties; no genuineness verdict otherwise
        genuine = None
    data["genuine"] = genuine
    out.record("certify", data, args.format)
    print(f"S{state.num_parties} = {rep.score:.6f}")
    print(f"residual_max = {rep.residual_max:.3e}")
    print(f"local feasible = {str(local.feasible).lower()} (gap {local.gap:.3e})")
    if "hybrid" in data:
        print(f"hybrid feasible = {str(data['hybrid']['feasible']).lower()} (gap {data['hybrid']['gap']:.3e})")
    print(f"genuine: {'undetermined' if genuine is None else str(genuine).lower()}")
    return 0


def _sweep_grid(args):
    if args.grid:
        grid = _floats(args.grid, "--grid")
    else:
        if args.step <= 0:
            raise CLIError("--step must be positive")
        if args.max_eps < 0:
            raise CLIError("--max-eps must be nonnegative")
        k = int(round(args.max_eps / args.step))
        if abs(k * args.step - args.max_eps) > 1e-9:
            raise CLIError("--max-eps must be a multiple of --step")
        grid = [round(i * args.step, 12) for i in range(k + 1)]
    bad = [e for e in grid if not 0.0 <= e < 1.0 / 3.0]
    if bad:
        raise CLIError(f"epsilon values must lie in [0, 1/3), got {bad[0]!r}")
    return grid


def cmd_sweep(args, out):
    grid = _sweep_grid(args)
    records = optimize.noise_sweep(grid, restarts=args.restarts, seed=args.seed,
                                   reference=args.reference)
    if args.format == "csv":
        out.write("sweep.csv", optimize.sweep_csv(records))
    else:
        out.write("sweep.json", dumps({"seed": args.seed, "reference": args.reference,
                                       "records": [r.to_dict() for r in records]}))
    bad = [r.epsilon for r in records if r.p_eps > r.eps_pow_1_14 + 1e-12]
    print(f"{len(records)} points, S3(eps=0) = {records[0].qubit_max:.6f}" if grid[0] == 0
          else f"{len(records)} points")
    if bad:
        print("p_eps exceeds eps^(1/14) at eps = " + ", ".join(f"{e:g}" for e in bad))
    return 0 if all(r.converged for r in records) else 1


def cmd_tables(args, out):
    if args.order <= 0 or args.order == 1:
        raise CLIError("--order must be positive and different from 1")
    rows = entanglement.split_table(args.split, args.order)
    ref_split = args.split if args.order == 0.5 else None
    if args.format == "csv":
        out.write("tables.csv", entanglement.table_csv(rows, ref_split))
    else:
        cells = entanglement.compare_published(rows, args.split) if ref_split else []
        out.write("tables.json", dumps({
            "split": args.split, "renyi_order": args.order,
            "rows": [{"state": r.state, **dict(zip(entanglement.MONOTONES, r.values()))} for r in rows],
            "comparison": [{"state": s, "monotone": m, "value": v, "published_value": p, "match": ok}
                           for s, m, v, p, ok in cells],
        }))
    for r in rows:
        print(r.state + " " + " ".join(f"{v:.4f}" for v in r.values()))
    return 0


def cmd_selftest(args, out):
    state, alphas = resolve_state(args.state)
    if state.num_parties != 3 or any(d != 2 for d in state.local_dims):
        raise CLIError("selftest expects a three-qubit state")
    weights = _floats(args.weights, "--weights")
    try:
        chi = selftest.embed_blocks(weights, state)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    bases = _angles_for(args, state, alphas)
    tensor = selftest.block_tensor(chi, bases)
    report = selftest.certify(tensor, chi, tol=args.tol)
    data = {"weights": weights, "local_dims": list(chi.local_dims), "certification": report.to_dict()}
    try:
        ext = selftest.swap_isometry(chi)
        data["extracted"] = ext.extracted.to_dict()
        data["junk"] = ext.junk.to_dict()
        data["junk_norm"] = float(np.linalg.norm(ext.junk.amplitudes))
    except selftest.NotFactorizableError as exc:
        data["extraction_error"] = str(exc)
    out.record("selftest", data, args.format)
    print(f"fidelity = {report.fidelity:.12f}")
    print(f"S3 = {report.score:.6f}")
    print(f"passed = {str(report.passed).lower()}")
    return 0 if report.passed else 1


def cmd_verify(args, out):
    tensor = load_tensor(args.tensor)
    ns = check_no_signaling(tensor)
    data = {"no_signaling": ns.to_dict(), "tol": args.tol}
    ok = ns.ok(args.tol)
    if tensor.num_parties >= 3 and all(d == 2 for d in tensor.outcomes):
        rep = paradox.score(tensor)
        data["paradox"] = rep.to_dict()
        data["residuals_ok"] = rep.residual_max <= args.tol
        ok = ok and data["residuals_ok"]
    data["passed"] = ok
    out.record("verify", data, args.format)
    print(f"no-signaling violation = {ns.max_violation:.3e}")
    if "paradox" in data:
        print(f"residual_max = {rep.residual_max:.3e}")
    print(f"passed = {str(ok).lower()}")
    return 0 if ok else 1


# -- parser ---------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--tol", type=float, default=1e-6, help="check tolerance")
    common.add_argument("--restarts", type=int, default=None, help="multi-start count")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    parser = argparse.ArgumentParser(prog="gmn", description="Multipartite paradox toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", parents=[common], help="maximize the paradox score")
    p.add_argument("--n", type=int, default=3, help="number of parties (>= 3)")
    p.add_argument("--general", action="store_true", help="search general qubit states instead of the family")
    p.set_defaults(func=cmd_optimize, fmt="json", restarts_default=optimize.DEFAULT_RESTARTS)

    p = sub.add_parser("certify", parents=[common], help="score and LP certificates for a state")
    p.add_argument("--state", default="PSI_STAR_3", help="named state or state JSON file")
    p.add_argument("--angles", help="setting-1 polar angles, comma separated")
    p.set_defaults(func=cmd_certify, fmt="json", restarts_default=0)

    p = sub.add_parser("sweep", parents=[common], help="noise sweep of the relaxed optimum")
    p.add_argument("--max-eps", type=float, default=0.12)
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--grid", help="explicit comma-separated epsilon values")
    p.add_argument("--reference", choices=("argmax", "psi_star"), default="argmax",
                   help="state the trace distance is measured from")
    p.set_defaults(func=cmd_sweep, fmt="csv", restarts_default=16)

    p = sub.add_parser("tables", parents=[common], help="entanglement monotone tables")
    p.add_argument("--split", choices=("1v2", "2v2"), default="1v2")
    p.add_argument("--order", type=float, default=0.5, help="Renyi order")
    p.set_defaults(func=cmd_tables, fmt="csv", restarts_default=0)

    p = sub.add_parser("selftest", parents=[common], help="block embedding and isometry extraction")
    p.add_argument("--state", default="PSI_STAR_3", help="named state or state JSON file")
    p.add_argument("--weights", default="1", help="block weights, comma separated")
    p.add_argument("--angles", help="setting-1 polar angles, comma separated")
    p.set_defaults(func=cmd_selftest, fmt="json", restarts_default=0)

    p = sub.add_parser("verify", parents=[common], help="no-signaling and residual check of a tensor file")
    p.add_argument("--tensor", required=True, help="CorrelationTensor JSON or CSV file")
    p.set_defaults(func=cmd_verify, fmt="json", restarts_default=0)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.fmt
    if args.restarts is None:
        args.restarts = args.restarts_default
    if args.restarts < 0:
        parser.error("--restarts must be nonnegative")
    if args.command == "optimize" and args.n < 3:
        parser.error("--n must be at least 3; the paradox needs three or more parties")
    try:
        out = Output(args.out)
        return args.func(args, out)
    except CLIError as exc:
        print(f"gmn {args.command}: error: {exc}", file=sys.stderr)
        return exc.code
    except (InconsistentTensorError, paradox.LPSolverError) as exc:
        print(f"gmn {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
