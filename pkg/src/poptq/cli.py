"""Command-line interface.

Exit codes: 0 success, 1 computation-level failure, 2 parse error,
3 invariant violation.
"""

import argparse
import json
import sys

import numpy as np

from . import games, popt, povm, quantize, reconstruct
from . import matkernel as mk
from . import matrixfile as mf
from .errors import NotPOPTWitnessed, PoptError, ResidualTooLarge, SingularM
from .randomx import as_rng, random_density, random_pure

AUTO_EPS = 1e-6

FAMILIES = (
    "swap", "phi", "mixed", "product00", "pt", "isotropic", "random", "pr_box", "tsirelson",
)


class CommandFailed(Exception):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload or {}


def _common(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(42))
    parser.add_argument("--tol", type=float, default=default(1e-8))
    parser.add_argument("--restarts", type=int, default=default(64))
    parser.add_argument("--eps", type=float, default=default(0.0))
    parser.add_argument("--out", default=default(None))
    parser.add_argument("--json", action="store_true", default=default(False))


def build_parser():
    parser = argparse.ArgumentParser(prog="poptq", description="Quantum simulation of correlations from POPT states.")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write an example POPT state, table or settings file")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--p", type=float, default=0.75, help="weight of |Phi><Phi| for isotropic")

    p = sub.add_parser("check", help="classify a POPT candidate")
    p.add_argument("file")
    p.add_argument("--iters", type=int, default=popt.DEFAULT_ITERS)

    p = sub.add_parser("quantize", help="build the quantum simulation of a POPT state")
    p.add_argument("file")

    p = sub.add_parser("verify", help="max correlation deviation of a simulation")
    p.add_argument("file")
    p.add_argument("simulation")
    p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser("chsh", help="CHSH values: classical, see-saw, or of a table")
    p.add_argument("--table")
    p.add_argument("--state", help="density or popt file for the see-saw (default |Phi><Phi|)")
    p.add_argument("--iters", type=int, default=200)

    p = sub.add_parser("lp-bound", help="sampled-constraint LP bound at Tsirelson settings")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--settings", help="povm_list file with Alice's two then Bob's two POVMs")

    p = sub.add_parser("reconstruct", help="tabulate an oracle and recover its POPT state")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--oracle", help="popt/density file backing a Born-rule oracle")
    src.add_argument("--tabulation", help="2-d table file with frames")
    p.add_argument("--minimal", action="store_true", help="use d^2-element frames (no redundancy)")
    p.add_argument("--tabulate-out", help="also write the tabulation")

    for action in sub.choices.values():
        _common(action, suppress=True)
    return parser


def _notice(msg):
    print(f"notice: {msg}", file=sys.stderr)


def _pad(state):
    """Zero-pad unequal local dimensions to max(dA, dB)."""
    da, db = state.dims
    if da == db:
        return state
    d = max(da, db)
    w4 = np.zeros((d, d, d, d), dtype=np.complex128)
    w4[:da, :db, :da, :db] = state.W.reshape(da, db, da, db)
    _notice(f"padding dims {state.dims} to {(d, d)}")
    return popt.POPTState((d, d), w4.reshape(d * d, d * d), state.evidence)


def _load_operator(path, args):
    kind, obj = mf.load(path)
    if kind == "density":
        d = int(round(np.sqrt(obj.shape[0])))
        return popt.from_quantum(obj, (d, d))
    if kind != "popt":
        raise mf.InvariantViolation(f"{path}: expected a popt or density file, got {kind}")
    return _pad(obj)


def _with_evidence(state, args, iters=popt.DEFAULT_ITERS):
    return popt.make_popt(state.W, state.dims, restarts=args.restarts, iters=iters, seed=args.seed)


def _write(args, doc, default_name=None):
    path = args.out or default_name
    if path:
        mf.save(doc, path)
    return path


def cmd_gen(args):
    fam, d = args.family, args.d
    rng = as_rng(args.seed)
    kw = dict(restarts=args.restarts, seed=args.seed)
    if fam == "pr_box":
        doc = mf.table_doc(games.pr_box())
    elif fam == "tsirelson":
        alice, bob = games.tsirelson_settings()
        doc = mf.povm_list_doc(alice + bob)
    else:
        if fam == "swap":
            state = popt.choi_of_transpose(d, **kw)
        elif fam == "phi":
            state = popt.from_quantum(mk.projector(mk.max_entangled(d)), (d, d))
        elif fam == "mixed":
            state = popt.from_quantum(np.eye(d * d) / (d * d), (d, d))
        elif fam == "product00":
            state = popt.from_quantum(np.diag(np.eye(d * d)[0]), (d, d))
        elif fam == "pt":
            state = popt.partial_transpose_family(random_pure(d * d, rng), (d, d), **kw)
        elif fam == "isotropic":
            state = popt.from_quantum(popt.isotropic_state(d, args.p), (d, d))
        else:
            state = popt.from_quantum(random_density(d * d, rng), (d, d))
        doc = mf.popt_doc(state)
    path = _write(args, doc)
    if path is None:
        sys.stdout.write(mf.dumps(doc))
        return None
    return {"family": fam, "out": path}


def cmd_check(args):
    state = _load_operator(args.file, args)
    res = popt.classify(state.W, state.dims, restarts=args.restarts, iters=args.iters, seed=args.seed,
                        pop_tol=args.tol)
    out = {
        "label": res.label.value,
        "min_eigenvalue": res.min_eigenvalue,
        "min_product_value": res.min_product_value,
    }
    if res.witness is not None:
        alpha, beta, value = res.witness
        out["witness"] = {"alpha": mf.encode_vector(alpha), "beta": mf.encode_vector(beta),
                          "value": float(value)}
    if res.label is popt.Classification.NOT_POPT_EVIDENCE:
        raise CommandFailed("negative expectation on a product vector", out)
    return out


def cmd_quantize(args):
    state = _with_evidence(_load_operator(args.file, args), args)
    eps = args.eps
    try:
        sim = quantize.quantize(state, eps)
        path = "direct" if eps == 0 else "regularized"
    except SingularM:
        if eps != 0:
            raise
        _notice(f"M is singular; retrying with epsilon={AUTO_EPS:g}")
        eps = AUTO_EPS
        sim = quantize.quantize(state, eps)
        path = "regularized (auto)"
    out_path = _write(args, mf.simulation_doc(sim))
    return {"path": path, "epsilon": eps, "out": out_path,
            "trace_sigma": float(np.trace(sim.sigma).real)}


def cmd_verify(args):
    state = _load_operator(args.file, args)
    kind, sim = mf.load(args.simulation)
    if kind != "simulation":
        raise mf.InvariantViolation(f"{args.simulation}: expected a simulation file, got {kind}")
    dev = quantize.verify_simulation(state, sim, trials=args.trials, seed=args.seed)
    # the regularised construction is only accurate to O(epsilon)
    threshold = max(args.tol, 10 * sim.epsilon)
    out = {"max_deviation": dev, "threshold": threshold, "epsilon": sim.epsilon}
    if dev > threshold:
        raise CommandFailed(f"max deviation {dev:.3e} exceeds {threshold:.3e}", out)
    return out


def cmd_chsh(args):
    if args.table:
        kind, t = mf.load(args.table)
        if kind != "table" or not isinstance(t, games.CorrelationTable):
            raise mf.InvariantViolation(f"{args.table}: expected a 4-d correlation table")
        ns = games.check_no_signaling(t, 1e-10)
        return {"table": games.chsh_value(t), "no_signaling": ns.ok, "signaling_gap": ns.worst}
    if args.state:
        sigma = _load_operator(args.state, args).W
    else:
        sigma = mk.projector(mk.max_entangled(2))
    classical, _ = games.classical_chsh_max()
    res = games.seesaw_max_chsh(sigma, restarts=args.restarts, iters=args.iters, seed=args.seed)
    return {"classical": classical, "seesaw": res.value, "tsirelson": games.TSIRELSON,
            "pr_box": games.chsh_value(games.pr_box())}


def cmd_lp_bound(args):
    if args.settings:
        kind, povms = mf.load(args.settings)
        if kind != "povm_list" or len(povms) != 4:
            raise mf.InvariantViolation("settings file must hold exactly four POVMs")
        alice, bob = povms[:2], povms[2:]
    else:
        alice, bob = games.tsirelson_settings()
    res = games.popt_chsh_lp_bound(alice, bob, n_constraints=args.n, seed=args.seed)
    return {"lp_bound": res.value, "n_constraints": res.n_constraints}


def cmd_reconstruct(args):
    truth = None
    if args.oracle:
        truth = _load_operator(args.oracle, args)
        d = truth.d
        make = povm.ic_povm if args.minimal else povm.overcomplete_ic_povm
        ic_a = make(d, args.seed)
        ic_b = make(d, args.seed + 1)
        oracle = reconstruct.MatrixOracle(truth)
        ns = reconstruct.verify_oracle_no_signaling(oracle, seed=args.seed, tol=args.tol)
        if not ns.ok:
            raise CommandFailed(f"oracle signals (gap {ns.worst:.3e})", {"signaling_gap": ns.worst})
        T = reconstruct.tabulate_omega(oracle, ic_a, ic_b)
        if args.tabulate_out:
            mf.save(mf.tabulation_doc(mf.Tabulation(T, ic_a, ic_b)), args.tabulate_out)
    else:
        kind, tab = mf.load(args.tabulation)
        if not isinstance(tab, mf.Tabulation):
            raise mf.InvariantViolation(f"{args.tabulation}: expected a 2-d tabulation with frames")
        T, ic_a, ic_b = tab.T, tab.ic_a, tab.ic_b
    rec = reconstruct.solve_popt(T, ic_a, ic_b)
    state = reconstruct.reconstruct_popt(T, ic_a, ic_b, restarts=args.restarts, seed=args.seed)
    out = {"residual": rec.residual, "condition": rec.condition, "dims": list(state.dims)}
    if truth is not None:
        out["frobenius_error"] = float(np.linalg.norm(state.W - truth.W))
    out["out"] = _write(args, mf.popt_doc(state))
    return out


COMMANDS = {
    "gen": cmd_gen,
    "check": cmd_check,
    "quantize": cmd_quantize,
    "verify": cmd_verify,
    "chsh": cmd_chsh,
    "lp-bound": cmd_lp_bound,
    "reconstruct": cmd_reconstruct,
}


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (dict, list)):
        return json.dumps(value)
    return str(value)


def _emit(args, result, status="ok"):
    if result is None:
        return
    if args.json:
        sys.stdout.write(json.dumps({"command": args.command, "status": status, **result}) + "\n")
        return
    if args.command == "chsh" and "table" in result and status == "ok":
        print(_fmt(result["table"]))
        return
    for key, value in result.items():
        if key == "witness":
            print(f"witness: alpha={value['alpha']} beta={value['beta']} value={value['value']!r}")
        elif value is not None:
            print(f"{key}: {_fmt(value)}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
    except mf.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except mf.InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except CommandFailed as exc:
        print(f"failed: {exc}", file=sys.stderr)
        _emit(args, exc.payload, status="failed")
        return 1
    except (NotPOPTWitnessed, ResidualTooLarge, SingularM, PoptError) as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _emit(args, result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
