"""
Command-line front end: ``qbsc <command> [options]``.

Exit status: 0 on success, 1 on invalid input, 2 when the trade-off audit
finds ``a + b + c < n`` (which indicates a bug, never a discovery).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

from . import __version__
from .attacks import (alice_hash_attack, bob_pgm_attack, constant_c, kernel_aligned_hash, parallel_audit,
                      tradeoff_audit)
from .ensembles import load_ensemble
from .errors import ValidationError
from .hashing import pa_audit
from .infomeasures import OptimizerSettings
from .jsonfmt import dumps, fmt_float
from .protocols import (Lockcom, SecurityReport, TrivialProtocol, haar_set, identity_set, security_report,
                        two_basis_set)

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_INVALID, EXIT_ALARM = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _add_output(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None)


def _add_protocol(p, ensemble=False):
    p.add_argument("--protocol", choices=("lockcom", "trivial"), default=None)
    p.add_argument("--bases", choices=("two", "haar", "identity"), default="two")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None, help="number of Haar unitaries")
    p.add_argument("--beta", type=int, default=None, help="disclosed bits for the trivial protocol")
    if ensemble:
        p.add_argument("--ensemble", default=None, help="ensemble JSON file instead of a protocol")


def _add_optimizer(p):
    p.add_argument("--optimizer", default=None, help="optimizer settings as JSON text or a JSON file path")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--outcomes", type=int, default=None)
    p.add_argument("--measures", default="guess,chi,iacc", help="comma list from guess,chi,iacc")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qbsc", description="Quantum bit string commitment laboratory")
    parser.add_argument("--version", action="version", version=f"qbsc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("constants", help="trade-off constants gamma*, delta*, c")
    _add_output(p)

    p = sub.add_parser("audit", help="security report (a, b) of a protocol")
    _add_protocol(p)
    _add_optimizer(p)
    _add_output(p)

    p = sub.add_parser("attack", help="run an attack")
    asub = p.add_subparsers(dest="who", required=True, parser_class=_Parser)
    pa = asub.add_parser("alice", help="hash-superposition attack")
    _add_protocol(pa)
    pa.add_argument("--m", type=int, required=True)
    pa.add_argument("--hash-samples", type=int, default=64)
    pa.add_argument("--kernel-hash", action="store_true",
                    help="trivial protocol only: use the hash that ignores the disclosed bits")
    _add_output(pa)
    pb = asub.add_parser("bob", help="pretty-good-measurement guessing attack")
    _add_protocol(pb, ensemble=True)
    _add_output(pb)

    p = sub.add_parser("pa-audit", help="privacy amplification audit")
    _add_protocol(p, ensemble=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--samples", type=int, default=500)
    _add_output(p)

    p = sub.add_parser("tradeoff", help="check a + b + c >= n")
    _add_protocol(p)
    p.add_argument("--report", default=None, help="security report JSON file")
    p.add_argument("--attack", default=None, help="attack report JSON file")
    p.add_argument("--m", type=int, default=None, help="also run Alice's attack with this m")
    p.add_argument("--hash-samples", type=int, default=64)
    _add_output(p)

    p = sub.add_parser("sweep", help="one CSV row per point along one axis")
    _add_protocol(p)
    _add_optimizer(p)
    p.add_argument("--axis", choices=("n", "k", "m", "beta"), required=True)
    p.add_argument("--values", required=True, help="comma-separated integers")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--hash-samples", type=int, default=64)
    _add_output(p)

    p = sub.add_parser("parallel-audit", help="measure of the tensor-power ensemble")
    _add_protocol(p, ensemble=True)
    p.add_argument("--copies", type=int, default=2)
    p.add_argument("--measure", choices=("chi", "xi", "h2"), default="chi")
    _add_output(p)
    return parser


def _protocol_config(args) -> dict:
    if args.protocol is None:
        raise ValidationError("--protocol is required")
    if args.n is None:
        raise ValidationError("--n is required")
    if args.protocol == "trivial":
        if args.beta is None:
            raise ValidationError("--beta is required for the trivial protocol")
        return {"kind": "trivial", "n": args.n, "beta": args.beta}
    cfg = {"kind": "lockcom", "bases": args.bases, "n": args.n}
    if args.bases == "haar":
        if args.k is None:
            raise ValidationError("--k is required for Haar unitary sets")
        cfg.update(k=args.k, seed=args.seed)
    return cfg


def _build_protocol(cfg: dict):
    if cfg["kind"] == "trivial":
        return TrivialProtocol(cfg["n"], cfg["beta"])
    if cfg["bases"] == "two":
        return Lockcom(two_basis_set(cfg["n"]))
    if cfg["bases"] == "identity":
        return Lockcom(identity_set(cfg["n"]))
    return Lockcom(haar_set(cfg["n"], cfg["k"], cfg["seed"]))


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _optimizer(args) -> OptimizerSettings:
    base = {}
    if args.optimizer:
        text = args.optimizer
        base = _read_json(text) if os.path.exists(text) else None
        if base is None:
            try:
                base = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"--optimizer is neither a file nor JSON: {exc}") from None
    base.setdefault("seed", args.seed)
    for key, val in (("restarts", args.restarts), ("max_iters", args.max_iters), ("tol", args.tol),
                     ("outcomes", args.outcomes)):
        if val is not None:
            base[key] = val
    return OptimizerSettings.from_json(base)


def _measures(args):
    return tuple(m.strip() for m in args.measures.split(",") if m.strip())


def _ensemble_source(args):
    if getattr(args, "ensemble", None):
        return {"ensemble_file": args.ensemble}, load_ensemble(args.ensemble)
    cfg = _protocol_config(args)
    return {"protocol": cfg}, _build_protocol(cfg).ensemble()


def _audit_result(cfg, opts, measures):
    proto = _build_protocol(cfg)
    report = security_report(proto, opts, measures)
    verdict = tradeoff_audit(report) if report.b_guess is not None else None
    return report, verdict


def cmd_constants(args):
    return {}, constant_c().to_json(), False


def cmd_audit(args):
    cfg = _protocol_config(args)
    opts = _optimizer(args)
    measures = _measures(args)
    report, verdict = _audit_result(cfg, opts, measures)
    result = {"report": report.to_json(), "tradeoff": None if verdict is None else verdict.to_json()}
    config = {"protocol": cfg, "optimizer": opts.to_json(), "measures": list(measures)}
    return config, result, verdict is not None and verdict.violation


def _alice(cfg, m, hash_samples, seed, kernel=False):
    proto = _build_protocol(cfg)
    forced = None
    if kernel:
        if cfg["kind"] != "trivial":
            raise ValidationError("--kernel-hash applies to the trivial protocol only")
        forced = kernel_aligned_hash(cfg["n"], cfg["beta"], cfg["n"] - m)
    attack = alice_hash_attack(proto, m, hash_samples, seed, hash=forced)
    report = security_report(proto, OptimizerSettings(seed=seed), ("guess",))
    return attack, report, tradeoff_audit(report, attack)


def cmd_attack(args):
    if args.who == "bob":
        source, e = _ensemble_source(args)
        achieved, bound = bob_pgm_attack(e)
        return source, {"achieved": achieved, "bound": bound}, False
    cfg = _protocol_config(args)
    attack, _, verdict = _alice(cfg, args.m, args.hash_samples, args.seed, args.kernel_hash)
    config = {"protocol": cfg, "m": args.m, "hash_samples": args.hash_samples, "kernel_hash": args.kernel_hash}
    return config, {"attack": attack.to_json(), "tradeoff": verdict.to_json()}, verdict.violation


def cmd_pa_audit(args):
    source, e = _ensemble_source(args)
    rep = pa_audit(e, args.s, args.samples, args.seed)
    return {**source, "s": args.s, "samples": args.samples}, rep.to_json(), False


def _load_report(path) -> SecurityReport:
    obj = _read_json(path)
    if isinstance(obj, dict) and "result" in obj:
        obj = obj["result"].get("report", obj["result"])
    return SecurityReport.from_json(obj)


def _load_attack_implied_a(path):
    obj = _read_json(path)
    if isinstance(obj, dict) and "result" in obj:
        obj = obj["result"].get("attack", obj["result"])
    try:
        return float(obj["implied_a"]), obj
    except (KeyError, TypeError, ValueError):
        raise ValidationError(f"{path} does not contain an attack report with implied_a") from None


class _AttackStub:
    def __init__(self, implied_a):
        self.implied_a = implied_a


def cmd_tradeoff(args):
    attack = None
    if args.report:
        report = _load_report(args.report)
        config = {"report_file": args.report}
    else:
        cfg = _protocol_config(args)
        report = security_report(_build_protocol(cfg), OptimizerSettings(seed=args.seed), ("guess",))
        config = {"protocol": cfg}
        if args.m is not None:
            attack, _, _ = _alice(cfg, args.m, args.hash_samples, args.seed)
            config.update(m=args.m, hash_samples=args.hash_samples)
    if args.attack:
        implied_a, _ = _load_attack_implied_a(args.attack)
        attack = _AttackStub(implied_a)
        config["attack_file"] = args.attack
    verdict = tradeoff_audit(report, attack)
    return config, {"report": report.to_json(), "tradeoff": verdict.to_json()}, verdict.violation


def _parse_values(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"--values must be comma-separated integers, got {text!r}") from None
    if not vals:
        raise ValidationError("--values is empty")
    return vals


def cmd_sweep(args):
    values = _parse_values(args.values)
    opts = _optimizer(args)
    measures = _measures(args)
    rows, alarm = [], False
    for v in values:
        setattr(args, args.axis, v)
        cfg = _protocol_config(args)
        row = {"axis": args.axis, "value": v}
        if args.axis == "m" or args.m is not None:
            attack, report, verdict = _alice(cfg, args.m, args.hash_samples, args.seed)
            row.update(a_bound=report.a_bound, b_guess=report.b_guess, epsilon=attack.epsilon,
                       predicted_lower=attack.predicted_lower, simulated_sum=attack.simulated_sum,
                       implied_a=attack.implied_a)
        else:
            report, verdict = _audit_result(cfg, opts, measures)
            row.update(a_bound=report.a_bound, b_guess=report.b_guess, b_chi=report.b_chi,
                       iacc_lower=None if report.b_iacc is None else report.b_iacc.lower,
                       iacc_upper=None if report.b_iacc is None else report.b_iacc.upper)
        if verdict is not None:
            row.update(tradeoff_lhs=verdict.lhs, tradeoff_violation=verdict.violation)
            alarm = alarm or verdict.violation
        rows.append(row)
    base = {"protocol": args.protocol, "bases": args.bases, "n": args.n, "k": args.k, "beta": args.beta,
            "m": args.m}
    base[args.axis] = None
    config = {"axis": args.axis, "values": values, "base": base, "optimizer": opts.to_json(),
              "measures": list(measures), "hash_samples": args.hash_samples}
    return config, {"rows": rows}, alarm


def cmd_parallel_audit(args):
    source, e = _ensemble_source(args)
    single = parallel_audit(e, 1, args.measure)
    value = parallel_audit(e, args.copies, args.measure)
    result = {"measure": args.measure, "copies": args.copies, "single": single, "value": value,
              "additivity_gap": value - args.copies * single}
    return {**source, "copies": args.copies, "measure": args.measure}, result, False


COMMANDS = {
    "constants": cmd_constants,
    "audit": cmd_audit,
    "attack": cmd_attack,
    "pa-audit": cmd_pa_audit,
    "tradeoff": cmd_tradeoff,
    "sweep": cmd_sweep,
    "parallel-audit": cmd_parallel_audit,
}


def _flatten(obj, prefix=""):
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}{k}."))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            out.update(_flatten(v, f"{prefix}{i}."))
    else:
        out[prefix[:-1]] = obj
    return out


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def to_csv(envelope) -> str:
    result = envelope["result"]
    rows = result["rows"] if envelope["command"] == "sweep" else [result]
    flat = [_flatten(r) for r in rows]
    header = []
    for f in flat:
        header.extend(k for k in f if k not in header)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for f in flat:
        w.writerow([_cell(f.get(k)) for k in header])
    return buf.getvalue()


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qbsc-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command if args.command != "attack" else f"attack {args.who}"
    try:
        config, result, alarm = COMMANDS[args.command](args)
        fmt = args.format or ("csv" if args.command == "sweep" else "json")
        config = {**config, "seed": args.seed, "format": fmt}
        envelope = {"schema_version": SCHEMA_VERSION, "command": command, "config": config, "result": result}
        _write(dumps(envelope) if fmt == "json" else to_csv(envelope), args.out)
    except (ValidationError, ValueError, OSError) as exc:
        print(f"qbsc: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if alarm:
        print("qbsc: ALARM: trade-off audit flagged parameters that cannot exist", file=sys.stderr)
        return EXIT_ALARM
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
