"""Command-line front end: ``pottsgrid {gamma,landscape,simulate,spectral,path}``.

Every option can also come from a ``--config`` file of ``key = value`` lines
(``#`` starts a comment, keys are the long option names with ``-`` or ``_``,
list values are comma separated). Flags given on the command line win.

Exit codes: 0 success, 1 usage or configuration error, 2 capability
refusal (instance over a cap, precision limit), 3 a theorem check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path as FsPath

from . import __version__
from .config import Configuration, parse_literal
from .dynamics import DIRECT, REJECTION_FREE, ChainParams, batch_hits, default_workers, to_csv, to_jsonl
from .errors import CapacityError, InputError, NumericalError, PreconditionError
from .exact import LandscapeIndex, deep_well_audit, mixing_time, phi_stable_pairs, spectral_gap
from .lattice import GridSpec, HypothesisWarning, gamma
from .paths import expansion_bound, expansion_path, reduction_path, reference_path
from .stats import fit_exponent, rescale_by_mean, summarize, test_exit_uniform, test_exp1, test_wald

EXIT_OK, EXIT_USAGE, EXIT_REFUSED, EXIT_CHECK_FAILED = 0, 1, 2, 3

INSTANCE_KEYS = {"q": int, "K": int, "L": int, "boundary": str}
DEFAULTS = {"q": 2, "K": 3, "L": 3, "boundary": "periodic"}
TASK_KEYS = {
    "gamma": {},
    "landscape": {},
    "simulate": {
        "beta": "floats",
        "n": int,
        "seed": int,
        "workers": int,
        "method": str,
        "start": int,
        "target": str,
        "max_steps": int,
        "wald": "bool",
        "out": str,
        "csv": str,
    },
    "spectral": {"beta": "floats", "eps": float},
    "path": {"kind": str, "from_spin": int, "to_spin": int, "literal": str, "bridge": str},
}
TASK_DEFAULTS = {
    "simulate": {
        "beta": [2.0],
        "n": 1000,
        "seed": 0,
        "workers": None,
        "method": "rf",
        "start": 1,
        "target": "rest",
        "max_steps": 10**10,
        "wald": False,
        "out": None,
        "csv": None,
    },
    "spectral": {"beta": [3.0, 3.5, 4.0, 4.5, 5.0], "eps": 0.25},
    "path": {"kind": "reference", "from_spin": 1, "to_spin": 2, "literal": None, "bridge": None},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _convert(kind, value):
    if kind == "floats":
        return value if isinstance(value, list) else _floats(value)
    if kind == "bool":
        return _bool(value)
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise UsageError(f"cannot convert {value!r} to {kind.__name__}") from None


def read_config_file(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    try:
        text = FsPath(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve(command: str, args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (in increasing priority); reject unknown keys."""
    schema = {**INSTANCE_KEYS, **TASK_KEYS[command]}
    resolved = {**DEFAULTS, **TASK_DEFAULTS.get(command, {})}
    if args.config:
        from_file = read_config_file(args.config)
        unknown = sorted(set(from_file) - set(schema))
        if unknown:
            raise UsageError(f"unknown config keys for '{command}': {', '.join(unknown)}")
        for key, value in from_file.items():
            resolved[key] = _convert(schema[key], value)
    for key, kind in schema.items():
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = _convert(kind, value)
    return resolved


def _spec(cfg: dict) -> GridSpec:
    return GridSpec(cfg["K"], cfg["L"], cfg["boundary"], cfg["q"])


def _instance(cfg: dict) -> dict:
    return {k: cfg[k] for k in INSTANCE_KEYS}


def _emit(doc: dict, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(doc, indent=2, default=_json_default) + "\n")


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


# -- subcommands ----------------------------------------------------------
def cmd_gamma(cfg: dict) -> int:
    spec = _spec(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", HypothesisWarning)
        value = gamma(spec)
    doc = {
        "config": cfg,
        "gamma": value,
        "hypothesis_ok": spec.satisfies_hypothesis,
        "warnings": [str(w.message) for w in caught],
    }
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit(doc)
    return EXIT_OK


def cmd_landscape(cfg: dict) -> int:
    spec = _spec(cfg)
    idx = LandscapeIndex(spec)
    g = gamma(spec, warn=False)
    pairs = phi_stable_pairs(idx)
    audit = deep_well_audit(idx)
    phi_ok = all(v == g for v in pairs.values())
    doc = {
        "config": cfg,
        "instance": _instance(cfg),
        "n_states": idx.n_states,
        "gamma_formula": g,
        "hypothesis_ok": spec.satisfies_hypothesis,
        "phi_stable_pairs": [{"from": k, "to": l, "slack": v} for (k, l), v in sorted(pairs.items())],
        "phi_matches_gamma": phi_ok,
        "deep_well_max_slack": audit.max_slack,
        "deep_well_argmax": [str(idx.decode(s)).replace("\n", "/") for s in audit.argmax_states[:10]],
        "deep_well_ok": audit.passed,
    }
    _emit(doc)
    return EXIT_OK if phi_ok and audit.passed else EXIT_CHECK_FAILED


def _target_set(spec: GridSpec, start: int, target: str):
    if target == "rest":
        return [Configuration.uniform(spec, k) for k in range(1, spec.q + 1) if k != start]
    try:
        d = int(target)
    except ValueError:
        raise UsageError(f"target must be 'rest' or a spin value, got {target!r}") from None
    if d == start or not 1 <= d <= spec.q:
        raise UsageError(f"target spin {d} must differ from start and lie in 1..{spec.q}")
    return [Configuration.uniform(spec, d)]


def _method(name: str) -> str:
    if name in ("rf", REJECTION_FREE):
        return REJECTION_FREE
    if name == DIRECT:
        return DIRECT
    raise UsageError(f"method must be 'direct' or 'rf', got {name!r}")


def _write(path: str, text: str):
    FsPath(path).write_text(text, encoding="utf-8")


def cmd_simulate(cfg: dict) -> int:
    spec = _spec(cfg)
    method = _method(cfg["method"])
    start = Configuration.uniform(spec, cfg["start"])
    target = _target_set(spec, cfg["start"], cfg["target"])
    workers = cfg["workers"] if cfg["workers"] is not None else default_workers()
    cfg = {**cfg, "workers": workers}
    all_samples, per_beta = [], []
    for i, beta in enumerate(cfg["beta"]):
        params = ChainParams(beta, spec, seed=cfg["seed"] + i, max_steps=cfg["max_steps"])
        samples = batch_hits(start, target, params, cfg["n"], workers=workers, method=method)
        all_samples.extend(samples)
        summ = summarize(samples)
        entry = {
            "beta": beta,
            "seed": params.seed,
            "summary": {
                "n": summ.n,
                "mean": summ.mean,
                "variance": summ.variance,
                "ci95": list(summ.ci95),
                "censored_count": summ.censored_count,
            },
            "verdicts": [],
        }
        provenance = {"seed": params.seed, "streams": [0, cfg["n"] - 1]}
        if summ.censored_count == 0:
            steps = [s.steps for s in samples]
            if len(steps) >= 100:
                d, p = test_exp1(rescale_by_mean(steps))
                entry["verdicts"].append(
                    {"test": "exp1_ks", "statistic": d, "p_value": p, "pass": p > 0.01, "seed_provenance": provenance}
                )
            if cfg["target"] == "rest" and spec.q >= 3:
                chi2, p = test_exit_uniform([s.exit_spin for s in samples], cfg["start"], spec.q)
                entry["verdicts"].append(
                    {"test": "exit_uniform", "statistic": chi2, "p_value": p, "pass": p > 0.01, "seed_provenance": provenance}
                )
            if cfg["wald"]:
                other = "rest" if cfg["target"] != "rest" else str(1 if cfg["start"] != 1 else 2)
                wald_params = ChainParams(beta, spec, seed=params.seed + 10**6, max_steps=cfg["max_steps"])
                extra = batch_hits(start, _target_set(spec, cfg["start"], other), wald_params, cfg["n"], workers=workers, method=method)
                s_other = summarize(extra)
                if s_other.censored_count == 0:
                    pair = (summ, s_other) if cfg["target"] == "rest" else (s_other, summ)
                    v = test_wald(pair, spec.q)
                    v.seed_provenance = {"seed": wald_params.seed, "streams": [0, cfg["n"] - 1]}
                    entry["verdicts"].append(v.record())
        else:
            entry["verdicts_suppressed"] = "censored samples present"
        per_beta.append(entry)

    doc = {"config": cfg, "instance": _instance(cfg), "gamma": gamma(spec, warn=False), "per_beta": per_beta}
    censored = any(e["summary"]["censored_count"] for e in per_beta)
    doc["censored"] = censored
    if not censored and len({e["beta"] for e in per_beta}) >= 3:
        slope, se = fit_exponent([(e["beta"], e["summary"]["mean"]) for e in per_beta])
        doc["fit_exponent"] = {"gamma_hat": slope, "stderr": se}
    if cfg["out"]:
        _write(cfg["out"], to_jsonl(all_samples))
    if cfg["csv"]:
        _write(cfg["csv"], to_csv(all_samples))
    _emit(doc)
    return EXIT_OK


def cmd_spectral(cfg: dict) -> int:
    spec = _spec(cfg)
    idx = LandscapeIndex(spec)
    g = gamma(spec, warn=False)
    betas = sorted(cfg["beta"])
    spectral = []
    for b in betas:
        rho = spectral_gap(idx, b)
        spectral.append({"beta": b, "rho": rho, "prefactor": rho * math.exp(b * g)})
    mixing = [{"beta": b, "eps": cfg["eps"], "t_mix": mixing_time(idx, b, cfg["eps"])} for b in betas]
    gap_exponents = [
        {
            "beta_lo": a["beta"],
            "beta_hi": c["beta"],
            "exponent": -(math.log(c["rho"]) - math.log(a["rho"])) / (c["beta"] - a["beta"]),
        }
        for a, c in zip(spectral, spectral[1:])
    ]
    mixing_exponents = [
        {"beta": m["beta"], "exponent": math.log(m["t_mix"]) / m["beta"]} for m in mixing if m["beta"] > 0
    ]
    doc = {
        "config": cfg,
        "instance": _instance(cfg),
        "gamma_formula": g,
        "spectral": spectral,
        "mixing": mixing,
        "gap_exponents": gap_exponents,
        "mixing_exponents": mixing_exponents,
    }
    _emit(doc)
    return EXIT_OK


def _parse_bridge(text: str):
    try:
        orientation, index, k = text.split(":")
        return orientation, int(index), int(k)
    except ValueError:
        raise UsageError(f"bridge must look like 'vertical:0:2', got {text!r}") from None


def cmd_path(cfg: dict) -> int:
    spec = _spec(cfg)
    g = gamma(spec, warn=False)
    kind = cfg["kind"]
    if kind == "reference":
        path = reference_path(cfg["from_spin"], cfg["to_spin"], spec)
        bound, ok = g, None
    elif kind in ("expansion", "reduction"):
        if not cfg["literal"]:
            raise UsageError(f"--literal is required for a {kind} path")
        sigma = parse_literal(spec, cfg["literal"])
        if kind == "expansion":
            bridge = _parse_bridge(cfg["bridge"]) if cfg["bridge"] else None
            path = expansion_path(sigma, bridge)
            orientation = bridge[0] if bridge else None
            if orientation is None:
                from .paths import choose_bridge

                orientation = choose_bridge(sigma)[0]
            bound = expansion_bound(spec, orientation)
            ok = path.slack <= bound
        else:
            path, _ = reduction_path(sigma)
            bound = g
            ok = path.slack < g or len(path) == 1
    else:
        raise UsageError(f"kind must be reference, expansion or reduction, got {kind!r}")
    if ok is None:
        ok = path.slack == g
    sys.stdout.write(path.dump())
    verdict = {
        "config": cfg,
        "kind": kind,
        "length": len(path),
        "height": path.height,
        "slack": path.slack,
        "bound": bound,
        "relation": {"reference": "==", "expansion": "<=", "reduction": "<"}[kind],
        "pass": bool(ok),
    }
    sys.stdout.write("# verdict " + json.dumps(verdict) + "\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {
    "gamma": cmd_gamma,
    "landscape": cmd_landscape,
    "simulate": cmd_simulate,
    "spectral": cmd_spectral,
    "path": cmd_path,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pottsgrid", description="Potts model tunneling on grid graphs.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def instance(p):
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--q", type=int)
        p.add_argument("--K", type=int)
        p.add_argument("--L", type=int)
        p.add_argument("--boundary", choices=["periodic", "open", "semi_periodic"])

    instance(sub.add_parser("gamma", help="print the barrier constant"))
    instance(sub.add_parser("landscape", help="exhaustive barrier and deep-well audit"))

    p = sub.add_parser("simulate", help="sample tunneling times")
    instance(p)
    p.add_argument("--beta", help="comma-separated inverse temperatures")
    p.add_argument("--n", type=int, help="samples per beta")
    p.add_argument("--seed", type=int, help="base seed; beta i uses seed+i")
    p.add_argument("--workers", type=int, help="worker processes (default $POTTSGRID_WORKERS or 1)")
    p.add_argument("--method", choices=["direct", "rf", "rejection_free"])
    p.add_argument("--start", type=int, help="start in s_start")
    p.add_argument("--target", help="'rest' (all other stable configurations) or a spin value")
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--wald", action="store_const", const=True, help="also sample the other target and test the Wald identity")
    p.add_argument("--out", help="write samples as JSON lines")
    p.add_argument("--csv", help="write samples as CSV")

    p = sub.add_parser("spectral", help="spectral gap and mixing time tables")
    instance(p)
    p.add_argument("--beta", help="comma-separated inverse temperatures")
    p.add_argument("--eps", type=float)

    p = sub.add_parser("path", help="dump a constructive path")
    instance(p)
    p.add_argument("--kind", choices=["reference", "expansion", "reduction"])
    p.add_argument("--from", dest="from_spin", type=int)
    p.add_argument("--to", dest="to_spin", type=int)
    p.add_argument("--literal", help="configuration, rows top first, separated by '/'")
    p.add_argument("--bridge", help="orientation:index:spin, e.g. vertical:0:2")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        return COMMANDS[args.command](cfg)
    except (UsageError, InputError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CapacityError, NumericalError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED


if __name__ == "__main__":
    sys.exit(main())
