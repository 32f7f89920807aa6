"""Command-line front end.

Exit status: 0 on success, 1 when an audit fails, 2 on usage or configuration
errors.  Outputs are deterministic: no timestamps, and every JSON document
carries the digest of the configuration that produced it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import codes
from .codes import CodeError
from .enumerate import BudgetError, TableError, build_table, load_table, save_table, sweep
from .kolmogorov import MCConfig, k_exact, k_quantum, mc_approximate, sample_size
from .qpl import ConditionSpec, FuelExhausted, Halted, MachineSpec, run
from .qstate import PureState, StateError, basis_state, measure_probs
from .ring import RingError
from . import theorems

AUDITS = ("upper-bound", "incompressibility-classical", "incompressibility-quantum",
          "consistency", "subadditivity", "multiples", "cloning", "invariance",
          "subadditive-restricted")


class UsageError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _add_machine(p):
    p.add_argument("--machine-W", dest="W", type=int, help="workspace width (default n+2)")
    p.add_argument("--mode", choices=("cond-n", "uncond"), default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--aux", default=None)
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--fuel", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--table", default=None, help="load this table instead of enumerating")
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None, help="JSON file supplying defaults for any flag")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qkc", description="Quantum Kolmogorov complexity toolkit")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("enumerate", help="build and save a halting table")
    _add_machine(p)
    p.add_argument("--scheduler", choices=("sweep", "dovetail"), default=None)

    p = sub.add_parser("k", help="complexity of a state")
    _add_machine(p)
    p.add_argument("--state", default=None, help="state JSON file")
    p.add_argument("--basis", default=None, help="classical basis label instead of --state")
    p.add_argument("--exact", action="store_true", default=None)

    p = sub.add_parser("mc", help="measurement-driven estimate")
    _add_machine(p)
    p.add_argument("--state", default=None)
    p.add_argument("--basis", default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--trials", type=int, default=None, help="trials per program (default: sized)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--allow-undersized", action="store_true", default=None)

    p = sub.add_parser("audit", help="run a theorem audit")
    p.add_argument("name", choices=AUDITS)
    _add_machine(p)
    p.add_argument("--delta", type=int, default=None)
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--x", default=None)
    p.add_argument("--program", default=None)
    p.add_argument("--machine-W-b", dest="W_b", type=int, default=None)

    p = sub.add_parser("codes", help="self-delimiting codes")
    p.add_argument("kind", choices=("bar", "prime", "pair"))
    p.add_argument("words", nargs="+")

    p = sub.add_parser("simulate", help="run one program literal")
    _add_machine(p)
    p.add_argument("--program", required=True)
    return ap


DEFAULTS = {"mode": "cond-n", "n": 1, "max_len": 8, "workers": 1, "scheduler": "sweep",
            "exact": False, "epsilon": 0.25, "alpha": 0.01, "seed": 0, "delta": 0, "c": 1,
            "allow_undersized": False, "aux": ""}


def _resolve(args) -> argparse.Namespace:
    """Fill unset flags from --config, then from DEFAULTS."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    given = set()
    for key, val in list(vars(args).items()):
        if val is None:
            val = cfg.get(key, cfg.get(key.replace("_", "-")))
            if val is None:
                val = DEFAULTS.get(key)
            else:
                given.add(key)
            setattr(args, key, val)
        else:
            given.add(key)
    args.given = given
    return args


def _machine(args) -> tuple[MachineSpec, ConditionSpec]:
    try:
        cond = ConditionSpec(args.n, args.m, args.aux or "")
        W = args.W if args.W is not None else max(args.n + 2, cond.out_qubits)
        return MachineSpec(W, args.mode), cond
    except (ValueError, CodeError) as exc:
        raise UsageError(str(exc)) from None


def _run_config(args, spec, cond, **extra) -> dict:
    cfg = {"command": args.cmd, "machine": spec.to_json(), "cond": cond.to_json(),
           "max_len": args.max_len, "fuel": args.fuel}
    cfg.update(extra)
    return cfg


def _table(args, spec, cond, max_len=None):
    max_len = args.max_len if max_len is None else max_len
    if args.table:
        try:
            t = load_table(args.table)
        except OSError as exc:
            raise UsageError(f"cannot read table: {exc}") from None
        if t.spec != spec or t.cond != cond:
            raise UsageError(f"table manifest ({t.spec}, {t.cond}) does not match the requested "
                             f"machine ({spec}, {cond})")
        return t
    return build_table(spec, cond, max_len, args.fuel, args.workers or 1, "sweep")


def _load_target(args) -> PureState:
    if args.basis is not None:
        return basis_state(len(args.basis), args.basis)
    if not args.state:
        raise UsageError("give --state FILE or --basis BITS")
    try:
        return PureState.from_json(json.loads(Path(args.state).read_text()))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read state: {exc}") from None


def _emit(doc: dict, args):
    text = _dumps(doc) + "\n"
    sys.stdout.write(text)
    if getattr(args, "out", None) and args.cmd != "enumerate":
        Path(args.out).write_text(text)


def cmd_enumerate(args) -> int:
    spec, cond = _machine(args)
    t = build_table(spec, cond, args.max_len, args.fuel, args.workers, args.scheduler)
    cfg = _run_config(args, spec, cond, fuel=t.fuel)
    if args.out:
        save_table(t, args.out)
    doc = {"config": cfg, "config_digest": config_digest(cfg), "manifest": t.manifest(),
           "records": len(t)}
    _emit(doc, args)
    return 0


def cmd_k(args) -> int:
    spec, cond = _machine(args)
    target = _load_target(args)
    if args.exact:
        est = k_exact(target, spec, cond)
        cfg = _run_config(args, spec, cond, exact=True, target=target.to_json())
    else:
        t = _table(args, spec, cond)
        est = k_quantum(target, t)
        cfg = _run_config(args, spec, cond, exact=False, target=target.to_json(),
                          table_digest=t.manifest()["digest"])
    doc = {"config": cfg, "config_digest": config_digest(cfg), "estimate": est.to_json()}
    _emit(doc, args)
    return 0


def cmd_mc(args) -> int:
    spec, cond = _machine(args)
    target = _load_target(args)
    try:
        k = args.trials if args.trials is not None else sample_size(target.n, args.epsilon, args.alpha)
        mc = MCConfig(args.epsilon, args.alpha, k, args.seed)
        # without an explicit --max-len the classical-basis bound is used
        bound = args.max_len if "max_len" in args.given else None
        res = mc_approximate(target, spec, cond, mc, max_len=bound, fuel=args.fuel,
                             allow_undersized=bool(args.allow_undersized))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg = _run_config(args, spec, cond, mc=mc.to_json(), target=target.to_json(), bound=res.bound)
    digest = config_digest(cfg)
    doc = {"config": cfg, "config_digest": digest, "estimate": res.estimate.to_json(),
           "programs": len(res.trace)}
    if args.out:
        lines = [json.dumps({"config_digest": digest, **e}, sort_keys=True) for e in res.trace]
        Path(args.out).write_text("\n".join(lines) + ("\n" if lines else ""))
    sys.stdout.write(_dumps(doc) + "\n")
    return 0


def cmd_audit(args) -> int:
    spec, cond = _machine(args)
    n = args.n
    name = args.name
    if name == "upper-bound":
        rep = theorems.audit_upper_bound(_table(args, spec, cond), n, seed=args.seed)
    elif name == "incompressibility-classical":
        rep = theorems.audit_incompressibility_classical(_table(args, spec, cond), n, args.delta)
    elif name == "incompressibility-quantum":
        t = _table(args, spec, cond)
        basis = theorems.random_orthonormal_basis(n, args.seed)
        rep = theorems.audit_incompressibility_quantum(basis, t, n, args.c)
    elif name == "consistency":
        rep = theorems.audit_consistency(_table(args, spec, cond), n)
    elif name == "subadditivity":
        rep = theorems.subadditivity_witness(args.x or "1" * n, _table(args, spec, cond))
    elif name == "multiples":
        rep = theorems.audit_multiples()
    elif name == "cloning":
        if not args.program:
            raise UsageError("cloning needs --program")
        rep = theorems.cloning_check(args.program, n, args.m or 1, spec)
    elif name == "invariance":
        spec_b = MachineSpec(args.W_b if args.W_b else spec.W + 1, spec.mode)
        t = _table(args, spec, cond)
        rep = theorems.invariance_gap(spec, spec_b, t.outputs())
    else:
        t = _table(args, spec, cond)
        cond2 = ConditionSpec(2 * n)
        spec2 = MachineSpec(max(spec.W + n, 2 * n + 2), spec.mode)
        t2 = sweep(spec2, cond2, args.max_len + 4)
        rep = theorems.subadditive_restricted_audit(t, t2, n)
    cfg = _run_config(args, spec, cond, audit=name, seed=args.seed, delta=args.delta, c=args.c)
    doc = {"config": cfg, "config_digest": config_digest(cfg), "report": rep.to_json()}
    sys.stdout.write(rep.render() + "\n")
    sys.stdout.write(f"config digest {config_digest(cfg)}\n")
    if args.out:
        Path(args.out).write_text(_dumps(doc) + "\n")
    return 0 if rep.passed else 1


def cmd_codes(args) -> int:
    try:
        if args.kind == "bar":
            out = [codes.encode_bar(w) for w in args.words]
        elif args.kind == "prime":
            out = [codes.encode_prime(w) for w in args.words]
        else:
            if len(args.words) != 2:
                raise UsageError("pair needs exactly two words")
            out = [codes.pair(*args.words)]
    except CodeError as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def cmd_simulate(args) -> int:
    spec, cond = _machine(args)
    try:
        codes.check_bits(args.program)
    except CodeError as exc:
        raise UsageError(str(exc)) from None
    fuel = args.fuel if args.fuel is not None else 4 * len(args.program) + cond.copies * len(args.program)
    res = run(spec, args.program, cond, fuel)
    if isinstance(res, Halted):
        probs = [str(p.a) if not p.b else str(p) for p in measure_probs(res.output)]
        sys.stdout.write(f"state {res.output.label()}\n")
        sys.stdout.write(f"probs [{','.join(probs)}]\n")
        sys.stdout.write(f"steps {res.steps}\n")
        return 0
    if isinstance(res, FuelExhausted):
        sys.stdout.write("fuel exhausted\n")
    else:
        sys.stdout.write(f"invalid: {res.reason}\n")
    return 0


COMMANDS = {"enumerate": cmd_enumerate, "k": cmd_k, "mc": cmd_mc, "audit": cmd_audit,
            "codes": cmd_codes, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        args = _resolve(args)
        return COMMANDS[args.cmd](args)
    except (UsageError, BudgetError, TableError, StateError, RingError, CodeError) as exc:
        sys.stderr.write(f"qkc: error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"qkc: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
