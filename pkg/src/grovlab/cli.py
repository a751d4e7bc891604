"""Command-line front end: ``grovlab {pmax,teleport,dense,scan,sweep,report}``.

Every command writes one JSON envelope::

    {command, version, seed, tolerances, input, results[, timestamp]}

to stdout, or to ``--out``.  Scan and sweep can write CSV instead.  Warnings
and errors go to stderr and never carry result data.

Exit codes: 0 ok, 2 bad arguments, 3 optimizer did not converge,
4 infeasible protocol with ``--require-feasible``, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import conjlab as cj
from . import groverian as gv
from .protocols import (
    DENSE_LABELS,
    InfeasibleProtocol,
    build_protocol,
    simulate_teleport,
    superdense_check,
    teleport_feasible,
)
from .qcore import TOL, PureState, bloch_angles, random_qubit

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NONCONVERGED = 3
EXIT_INFEASIBLE = 4
EXIT_IO = 5

SEED_ENV = "GROVLAB_SEED"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_PARSE):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# argument parsing helpers
# --------------------------------------------------------------------------


def parse_complex_list(text: str) -> np.ndarray:
    """``"0.6,0.8j,1-2j"`` -> complex array; ``i`` is accepted for ``j``."""
    out = []
    for tok in text.split(","):
        tok = tok.strip().replace(" ", "").replace("i", "j")
        if not tok:
            raise CliError(f"empty entry in complex list {text!r}")
        try:
            out.append(complex(tok))
        except ValueError:
            raise CliError(f"cannot parse {tok!r} as a complex number") from None
    return np.array(out, dtype=complex)


def parse_angles(text: str) -> tuple[float, float]:
    """``"theta,phi"`` in radians."""
    parts = text.split(",")
    if len(parts) != 2:
        raise CliError(f"expected theta,phi but got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise CliError(f"cannot parse angles {text!r}") from None


def parse_kappa(text: str) -> tuple[float, float, int]:
    """``"min:max:steps"``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"expected min:max:steps but got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError(f"cannot parse kappa range {text!r}") from None
    if not 0 < lo < hi or steps < 3:
        raise CliError("kappa range needs 0 < min < max and steps >= 3")
    return lo, hi, steps


def resolve_seed(flag) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(f"{SEED_ENV}={env!r} is not an integer") from None


def state_from_args(args) -> tuple[PureState, dict, cj.FamilySpec | None]:
    """Build the input state and an echo of how it was specified."""
    if args.family and args.amplitudes is not None:
        raise CliError("give either --family or --amplitudes, not both")
    if args.amplitudes is not None:
        amps = parse_complex_list(args.amplitudes)
        if amps.size < 2 or amps.size & (amps.size - 1):
            raise CliError(f"amplitude count {amps.size} is not a power of two")
        norm = float(np.linalg.norm(amps))
        if norm == 0:
            raise CliError("amplitude vector is zero")
        if abs(norm - 1) > TOL.normalization_warn:
            print(f"warning: input norm {norm!r} differs from 1; normalizing", file=sys.stderr)
        try:
            state = PureState.from_amplitudes(amps, normalize=True)
        except ValueError as exc:
            raise CliError(str(exc)) from None
        return state, {"amplitudes": encode(state.amplitudes)}, None
    if not args.family:
        raise CliError("a state is required: use --family or --amplitudes")
    try:
        fam = cj.normalize_family(args.family)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    params = {}
    for name in ("a", "b", "c"):
        if getattr(args, name) is not None:
            params[name] = getattr(args, name)
    for k, flag in ((1, args.q1), (2, args.q2)):
        if flag is not None:
            theta, phi = parse_angles(flag)
            params[f"theta{k}"], params[f"phi{k}"] = theta, phi
    try:
        spec = cj.FamilySpec(fam, params)
        state = cj.family_state(spec)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    return state, {"family": spec.family, "params": dict(spec.params)}, spec


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def encode(obj):
    """Convert numpy/complex values into JSON-ready builtins.

    Complex numbers become ``[re, im]``; NaN becomes ``null``.
    """
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [encode(float(obj.real)), encode(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) or math.isinf(x) else x
    return obj


def envelope(command: str, seed, inp: dict, results: dict, reproducible: bool) -> dict:
    env = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "tolerances": TOL.as_dict(),
        "input": inp,
        "results": results,
    }
    if not reproducible:
        env["timestamp"] = datetime.now(timezone.utc).isoformat()
    return encode(env)


def dumps(env: dict) -> str:
    # Python's float repr is the shortest string that round-trips exactly
    return json.dumps(env, indent=2, allow_nan=False) + "\n"


SCAN_TAIL = (
    "pmax_numeric",
    "pmax_analytic",
    "branch",
    *(f"teleport_bob{k}" for k in range(3)),
    *(f"dense_alice{k}" for k in range(3)),
    "necessary_ok",
    "sufficient_ok",
    "converged",
)


def rows_to_csv(rows: list[dict], tail=SCAN_TAIL) -> str:
    """One header for all rows: leading columns in order of first appearance, then ``tail``."""
    rows = encode(rows)
    cols: list[str] = []
    for r in rows:
        cols.extend(k for k in r if k not in cols and k not in tail)
    cols.extend(k for k in tail if any(k in r for r in rows))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _csv_cell(r.get(k)) for k in cols})
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def read_scan_csv(text: str) -> list[dict]:
    """Inverse of the CSV writer: numbers, booleans and blanks restored."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        rec = {}
        for k, v in row.items():
            if v == "":
                rec[k] = None
            elif v in ("true", "false"):
                rec[k] = v == "true"
            else:
                try:
                    rec[k] = int(v) if v.lstrip("-").isdigit() else float(v)
                except ValueError:
                    rec[k] = v
        out.append(rec)
    return out


def emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from None


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

METHODS = {
    "alternating": gv.pmax_alternating,
    "reduced": gv.pmax_reduced,
}


def _run_method(name: str, state: PureState, restarts: int, seed: int) -> gv.GroverianResult:
    if name == "bloch":
        return gv.pmax_bloch(state, restarts=restarts, seed=seed)[0]
    return METHODS[name](state, restarts=restarts, seed=seed)


def _result_dict(res: gv.GroverianResult) -> dict:
    return {
        "p_max": res.p_max,
        "g_measure": res.g_measure,
        "method": res.method,
        "converged": res.converged,
        "restarts_used": res.restarts_used,
        "maximizer": [dict(zip(("theta", "phi"), bloch_angles(f))) for f in res.maximizer.factors],
    }


def cmd_pmax(args, seed: int):
    state, inp, spec = state_from_args(args)
    inp.update(method=args.method, restarts=args.restarts)
    if args.method == "bloch" and state.n_qubits != 3:
        raise CliError("the bloch method needs a three-qubit state")
    if args.method == "auto":
        names = ["alternating", "reduced"] + (["bloch"] if state.n_qubits == 3 else [])
    else:
        names = [args.method]
    runs = {n: _run_method(n, state, args.restarts, seed) for n in names}
    primary = runs[names[0]]
    results = _result_dict(primary)
    if len(names) > 1:
        results["methods"] = {n: _result_dict(r) for n, r in runs.items()}
        results["deltas"] = {
            f"{x}-{y}": abs(runs[x].p_max - runs[y].p_max) for i, x in enumerate(names) for y in names[i + 1 :]
        }
        results["converged"] = all(r.converged for r in runs.values())
    if spec is not None:
        value, tag = cj.analytic_pmax(spec)
        results["analytic"] = {"p_max": value, "formula": tag}
    code = EXIT_OK if results["converged"] else EXIT_NONCONVERGED
    return inp, results, code


def _complex_matrix(m) -> list:
    return encode(np.asarray(m))


def cmd_teleport(args, seed: int):
    state, inp, _ = state_from_args(args)
    if state.n_qubits != 3:
        raise CliError("teleportation needs a three-qubit resource")
    if not 0 <= args.bob < 3:
        raise CliError("--bob must be 0, 1 or 2")
    if args.trials < 1:
        raise CliError("--trials must be positive")
    psi = None
    if args.input is not None:
        psi = parse_complex_list(args.input)
        if psi.size != 2 or abs(np.linalg.norm(psi) - 1) > TOL.algebra:
            raise CliError("--input must be a normalized pair alpha,beta")
    inp.update(bob=args.bob, trials=args.trials, input=encode(psi) if psi is not None else "random")
    feasible = teleport_feasible(state, args.bob)
    results: dict = {"feasible": feasible, "bob": args.bob}
    if not feasible:
        return inp, results, EXIT_INFEASIBLE if args.require_feasible else EXIT_OK
    try:
        proto = build_protocol(state, args.bob)
    except InfeasibleProtocol as exc:  # feasibility passed but construction failed numerically
        raise CliError(str(exc), EXIT_INFEASIBLE) from None
    rng = np.random.default_rng(seed)
    fids, outcomes = [], []
    for _ in range(args.trials):
        vec = psi if psi is not None else random_qubit(rng)
        run = simulate_teleport(proto, state, vec, rng=rng)
        fids.append(run.fidelity)
        outcomes.append(run.outcome)
    hist = {lab: outcomes.count(k) for k, lab in enumerate(proto.labels)}
    results.update(
        labels=list(proto.labels),
        basis=[_complex_matrix(b.amplitudes) for b in proto.basis],
        corrections=[_complex_matrix(c.matrix) for c in proto.corrections],
        probabilities=list(proto.probabilities),
        fidelities=fids,
        min_fidelity=min(fids),
        histogram=hist,
    )
    return inp, results, EXIT_OK


def cmd_dense(args, seed: int):
    state, inp, _ = state_from_args(args)
    if state.n_qubits != 3:
        raise CliError("superdense coding needs a three-qubit resource")
    if not 0 <= args.alice < 3:
        raise CliError("--alice must be 0, 1 or 2")
    inp.update(alice=args.alice)
    rep = superdense_check(state, args.alice)
    results = {
        "feasible": rep.feasible,
        "alice": args.alice,
        "encodings": list(DENSE_LABELS),
        "gram": _complex_matrix(rep.gram),
        "max_offdiag": rep.max_offdiag,
    }
    code = EXIT_INFEASIBLE if args.require_feasible and not rep.feasible else EXIT_OK
    return inp, results, code


def _scan_records(families, grid, tol, seed, restarts):
    records = []
    for fam in families:
        records.extend(cj.scan_family(fam, grid, tol=tol, seed=seed, restarts=restarts))
    return records


def _families(name: str) -> list[str]:
    if name == "all":
        return list(cj.FAMILIES)
    try:
        return [cj.normalize_family(name)]
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_scan(args, seed: int):
    fams = _families(args.family)
    inp = {"family": args.family, "grid": args.grid, "format": args.format, "restarts": args.restarts}
    try:
        records = _scan_records(fams, args.grid, args.tol, seed, args.restarts)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    rows = [r.flat() for r in records]
    summary = cj.conjecture_report(records, tol=args.tol)
    if args.format == "csv":
        # CSV carries the records; the summary envelope follows on stdout only
        # when the CSV itself went to a file
        emit(rows_to_csv(rows), args.out)
        args.out_handled = True
        return inp, {"summary": summary, "records_file": args.out}, EXIT_OK
    return inp, {"records": rows, "summary": summary}, EXIT_OK


def _sweep_results(lo, hi, steps) -> dict:
    sw = cj.kappa_sweep(lo, hi, steps)
    points = [{"kappa": k, "p_max": p, "dp_dkappa": d, "branch": b} for k, p, d, b in sw.points]
    crossings = [
        {
            "kappa": c.kappa,
            "p_left": c.p_left,
            "p_right": c.p_right,
            "p_at": c.p_at,
            "continuous": c.continuous,
            "deriv_left": c.deriv_left,
            "deriv_right": c.deriv_right,
            "deriv_jump": c.jump,
            "noise_floor": c.noise_floor,
            "derivative_jump": c.derivative_jump,
            "second_left": c.second_left,
            "second_right": c.second_right,
            "second_jump": c.second_jump,
        }
        for c in sw.crossings
    ]
    return {
        "points": points,
        "crossings": crossings,
        "flagged": sw.flagged,
        "flagged_kappa": [sw.points[i][0] for i in sw.flagged],
    }


def cmd_sweep(args, seed: int):
    lo, hi, steps = parse_kappa(args.kappa)
    inp = {"kappa_min": lo, "kappa_max": hi, "steps": steps, "format": args.format}
    results = _sweep_results(lo, hi, steps)
    if args.format == "csv":
        emit(rows_to_csv(results["points"]), args.out)
        args.out_handled = True
        return inp, {"crossings": results["crossings"], "records_file": args.out}, EXIT_OK
    return inp, results, EXIT_OK


def cmd_report(args, seed: int):
    fams = _families(args.family)
    inp = {
        "families": fams,
        "grid": args.grid,
        "random_states": args.random,
        "feasible_fraction": args.feasible_fraction,
        "restarts": args.restarts,
    }
    try:
        scan = _scan_records(fams, args.grid, args.tol, seed, args.restarts)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    results = {"families": cj.conjecture_report(scan, tol=args.tol)}
    if args.random > 0:
        rand = cj.counterexample_search(
            args.random, seed=seed, tol=args.tol, feasible_fraction=args.feasible_fraction, restarts=args.restarts
        )
        results["random"] = cj.conjecture_report(rand, tol=args.tol)
        results["combined"] = cj.conjecture_report(scan + rand, tol=args.tol)
    else:
        results["combined"] = results["families"]
    return inp, results, EXIT_OK


COMMANDS = {
    "pmax": cmd_pmax,
    "teleport": cmd_teleport,
    "dense": cmd_dense,
    "scan": cmd_scan,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--reproducible", action="store_true", help="omit the timestamp field")

    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--family", help=f"one of {', '.join(cj.FAMILIES)} (dashes allowed)")
    state.add_argument("--a", type=float)
    state.add_argument("--b", type=float)
    state.add_argument("--c", type=float)
    state.add_argument("--q1", help="theta,phi of q1 for the phi family")
    state.add_argument("--q2", help="theta,phi of q2 for the phi family")
    state.add_argument(
        "--amplitudes",
        help="comma-separated complex amplitudes, e.g. 0.6,0.8j (use --amplitudes=-1,... for a leading minus)",
    )

    restarts = argparse.ArgumentParser(add_help=False)
    restarts.add_argument("--restarts", type=int, default=gv.DEFAULT_RESTARTS)

    parser = argparse.ArgumentParser(prog="grovlab", description="Groverian entanglement and perfect teleportation")
    parser.add_argument("--version", action="version", version=f"grovlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmax", parents=[common, state, restarts], help="maximal product-state overlap")
    p.add_argument("--method", choices=["alternating", "reduced", "bloch", "auto"], default="alternating")

    p = sub.add_parser("teleport", parents=[common, state], help="build and simulate perfect teleportation")
    p.add_argument("--bob", type=int, default=2)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--input", help="alpha,beta of the input qubit")
    g.add_argument("--random", action="store_true", help="random input per trial (default)")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--require-feasible", action="store_true")

    p = sub.add_parser("dense", parents=[common, state], help="superdense coding orthogonality check")
    p.add_argument("--alice", type=int, default=0)
    p.add_argument("--require-feasible", action="store_true")

    p = sub.add_parser("scan", parents=[common, restarts], help="grid scan of a state family")
    p.add_argument("--family", required=True, help="family name or 'all'")
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--tol", type=float, default=TOL.conjecture)

    p = sub.add_parser("sweep", parents=[common], help="P_max along b = kappa a, c = kappa^2 a")
    p.add_argument("--kappa", default="0.5:1.3:161", help="min:max:steps")
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("report", parents=[common, restarts], help="conjecture evidence over families and random states")
    p.add_argument("--family", default="all")
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--random", type=int, default=10_000, help="number of random states")
    p.add_argument("--feasible-fraction", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=TOL.conjecture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.out_handled = False
    try:
        seed = resolve_seed(args.seed)
        if getattr(args, "restarts", 1) < 1:
            raise CliError("--restarts must be positive")
        inp, results, code = COMMANDS[args.command](args, seed)
        env = envelope(args.command, seed, inp, results, args.reproducible)
        if not args.out_handled:
            emit(dumps(env), args.out)
        elif args.out is not None:
            # CSV went to the file, so the summary envelope can use stdout
            emit(dumps(env), None)
    except CliError as exc:
        print(f"grovlab: error: {exc}", file=sys.stderr)
        return exc.code
    if code == EXIT_NONCONVERGED:
        print("grovlab: optimizer did not converge", file=sys.stderr)
    elif code == EXIT_INFEASIBLE:
        print("grovlab: no perfect protocol for this assignment", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
