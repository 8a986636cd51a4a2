"""Command-line harness: ``orthoframe <command> [--flags]`` or ``orthoframe --config run.json``.

Every run writes one JSON report (to ``--output`` or stdout).  Exit codes:
0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from . import suites
from . import zonal as zn
from .frame_finder import FinderConfig, find_orthogonal_frame
from .gegenbauer import gegenbauer_eval, gegenbauer_eval_explicit, gegenbauer_zero
from .montecarlo import mc_g_t, zonal_oracle

SCHEMA_ID = "orthoframe.report/1"

_SET_NAMES = ("double_cap", "band", "cap", "cap_complement", "full")
_SET_PARAMS = {
    "set": (str, None),
    "width": (float, None),
    "threshold": (float, None),
    "eps": (float, None),
    "measure": (float, None),
    "profile_json": (str, None),
}

# command -> {param: (type, default)}; a default of REQUIRED marks mandatory keys
REQUIRED = object()
COMMANDS: Dict[str, Dict[str, tuple]] = {
    "gegenbauer": {"n": (int, REQUIRED), "d": (int, REQUIRED), "t": (float, REQUIRED), "explicit": (bool, False)},
    "spectrum": dict(_SET_PARAMS, n=(int, REQUIRED), dmax=(int, zn.DEFAULT_DMAX)),
    "gt": dict(_SET_PARAMS, n=(int, REQUIRED), t=(float, REQUIRED), dmax=(int, zn.DEFAULT_DMAX), samples=(int, 1_000_000)),
    "verify": {
        "suite": (str, REQUIRED),
        "profile": (str, None),
        "n": (int, None),
        "samples": (int, None),
        "count": (int, None),
        "runs": (int, None),
    },
    "find-frame": dict(
        _SET_PARAMS,
        n=(int, REQUIRED),
        n0=(int, 4),
        candidates=(int, 16),
        slice_samples=(int, 2000),
        terminal_trials=(int, 200),
        symmetrize=(bool, True),
        restrict_to_b=(bool, False),
    ),
    "sweep": {"table": (str, REQUIRED), "n_max": (int, None), "d_max": (int, None), "csv": (str, None)},
}
RANDOMIZED = {"gt", "find-frame"}
CONFIG_KEYS = {"command", "params", "seed", "output_path"}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "command", "params", "seed", "passed", "result"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "command": {"enum": sorted(COMMANDS)},
        "params": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
        "passed": {"type": "boolean"},
        "result": {"type": "object"},
    },
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    output_path: Optional[str] = None

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise UsageError("config must be a JSON object")
        for key in obj:
            if key not in CONFIG_KEYS:
                raise UsageError(f"unknown config key {key!r}")
        if "command" not in obj:
            raise UsageError("config is missing key 'command'")
        params = obj.get("params", {})
        if not isinstance(params, dict):
            raise UsageError("config key 'params' must be an object")
        return cls(obj["command"], dict(params), obj.get("seed"), obj.get("output_path"))

    def resolved(self):
        """Validate against the command schema and fill defaults."""
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        spec = COMMANDS[self.command]
        out = {}
        for key, value in self.params.items():
            if key not in spec:
                raise UsageError(f"unknown parameter {key!r} for command {self.command!r}")
            typ = spec[key][0]
            if value is not None:
                try:
                    value = _coerce(typ, value)
                except (TypeError, ValueError):
                    raise UsageError(f"parameter {key!r} must be {typ.__name__}, got {value!r}") from None
            out[key] = value
        for key, (typ, default) in spec.items():
            if out.get(key) is None:
                if default is REQUIRED:
                    raise UsageError(f"missing required parameter {key!r} for command {self.command!r}")
                out[key] = default
        if self.seed is not None and (isinstance(self.seed, bool) or not isinstance(self.seed, int)):
            raise UsageError(f"seed must be an integer, got {self.seed!r}")
        if self.seed is None and _needs_seed(self.command, out):
            raise UsageError(f"command {self.command!r} is randomized: --seed is required")
        return out


def _coerce(typ, value):
    if typ is bool:
        if isinstance(value, bool):
            return value
        raise TypeError
    if typ is int:
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise TypeError
        return int(value)
    if typ is float:
        if isinstance(value, bool):
            raise TypeError
        return float(value)
    if not isinstance(value, str):
        raise TypeError
    return value


def _needs_seed(command, params):
    if command in RANDOMIZED:
        return True
    if command == "verify":
        entry = suites.SUITES.get(params["suite"])
        return bool(entry and entry[1])
    return False


# --- commands ------------------------------------------------------------


def _profile_from(params, n, for_frames=False):
    path = params.get("profile_json")
    if path:
        with open(path) as fh:
            try:
                prof = zn.ZonalProfile.from_json(json.load(fh))
            except ValueError as exc:
                raise UsageError(f"bad profile file {path}: {exc}") from None
        if prof.n != n:
            raise UsageError(f"profile file has n={prof.n} but --n is {n}")
        return prof
    name = params.get("set")
    if name is None:
        raise UsageError("give --set or --profile-json")
    if name not in _SET_NAMES:
        raise UsageError(f"unknown set {name!r}; choose from {', '.join(_SET_NAMES)}")
    extra = {k: params[k] for k in ("width", "threshold", "eps", "measure") if params.get(k) is not None}
    if name == "band" and for_frames and not extra:
        extra["width"] = 2.0 / math.sqrt(n)
    try:
        return suites.fixture_profile(name, n, **extra)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_gegenbauer(p, seed):
    try:
        f = gegenbauer_eval_explicit if p["explicit"] else gegenbauer_eval
        value = f(p["n"], p["d"], p["t"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return True, {"value": value}


def _cmd_spectrum(p, seed):
    n = p["n"]
    prof = _profile_from(p, n)
    rule = zn.make_quadrature(n, zn.default_order(p["dmax"]))
    try:
        spec = zn.funk_hecke_spectrum(prof, rule, p["dmax"])
    except zn.ParsevalError as exc:
        return False, {"error": str(exc)}
    return True, {
        "profile": prof.to_json(),
        "density": zn.density(prof, rule),
        "coeffs": spec.coeffs.tolist(),
        "energies": spec.energies().tolist(),
        "tail_norm_sq": spec.tail_norm_sq,
    }


def _cmd_gt(p, seed):
    n = p["n"]
    prof = _profile_from(p, n)
    spec = zn.funk_hecke_spectrum(prof, zn.make_quadrature(n, zn.default_order(p["dmax"])), p["dmax"])
    try:
        exact = zn.g_t_zonal(spec, spec, p["t"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    oracle = zonal_oracle(prof)
    est = mc_g_t(oracle, oracle, p["t"], p["samples"], seed)
    ok = est.within(exact.value, 3.0, exact.tail_bound)
    return ok, {"profile": prof.to_json(), "zonal": exact.value, "tail_bound": exact.tail_bound, "mc": est.to_json(), "agree": ok}


_SUITE_KWARGS = {
    "level-d": {"profile": "profiles", "n": "dims"},
    "gt": {"profile": "sets", "n": "dims", "samples": "samples"},
    "slicing": {"profile": "sets", "n": "dims"},
    "hypercontractivity": {"samples": "samples", "count": "count"},
    "nonpositive": {"samples": "samples", "count": "count"},
    "noise": {"samples": "samples", "n": "n"},
    "frames": {"runs": "runs"},
}
_TUPLE_KWARGS = {"profiles", "sets", "dims"}


def _cmd_verify(p, seed):
    name = p["suite"]
    if name not in suites.SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(sorted(suites.SUITES))}")
    fn, randomized = suites.SUITES[name]
    allowed = _SUITE_KWARGS.get(name, {})
    kwargs = {}
    for key in ("profile", "n", "samples", "count", "runs"):
        if p.get(key) is None:
            continue
        if key not in allowed:
            raise UsageError(f"suite {name!r} does not take parameter {key!r}")
        target = allowed[key]
        kwargs[target] = (p[key],) if target in _TUPLE_KWARGS else p[key]
    result = fn(seed, **kwargs) if randomized else fn(**kwargs)
    return bool(result["passed"]), result


def _cmd_find_frame(p, seed):
    n = p["n"]
    if p.get("set") == "full" and p.get("profile_json") is None:
        prof = zn.full_sphere(n)
    else:
        prof = _profile_from(p, n, for_frames=True)
    oracle = zonal_oracle(prof, symmetrize=p["symmetrize"], name=p.get("set") or "profile")
    try:
        cfg = FinderConfig(
            candidates_per_level=p["candidates"],
            slice_samples=p["slice_samples"],
            n0=p["n0"],
            terminal_trials=p["terminal_trials"],
            seed=seed,
            restrict_to_b=p["restrict_to_b"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = find_orthogonal_frame(oracle, cfg)
    return res.success, dict(res.to_json(), profile=prof.to_json())


def _cmd_sweep(p, seed):
    table = p["table"]
    rows = []
    if table == "band-density":
        n_max = p["n_max"] or 1000
        ns = sorted({int(round(v)) for v in np.geomspace(2, n_max, 40)})
        for n in ns:
            rule = zn.make_quadrature(n, 64)
            rows.append({"n": n, "band_density": zn.density(zn.band(n), rule), "double_cap_density": zn.density(zn.double_cap(n), rule)})
        header = ["n", "band_density", "double_cap_density"]
    elif table == "zero-values":
        n_max, d_max = p["n_max"] or 50, p["d_max"] or 40
        for n in range(2, n_max + 1):
            for d in range(0, d_max + 1, 2):
                rows.append({"n": n, "d": d, "abs_P_at_zero": abs(gegenbauer_zero(n, d)), "bound_15_over_n3": 15.0 / n**3})
        header = ["n", "d", "abs_P_at_zero", "bound_15_over_n3"]
    else:
        raise UsageError(f"unknown table {table!r}; choose band-density or zero-values")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if p["csv"]:
        with open(p["csv"], "w") as fh:
            fh.write(buf.getvalue())
    return True, {"table": table, "rows": len(rows), "csv_path": p["csv"], "csv": None if p["csv"] else buf.getvalue()}


_HANDLERS = {
    "gegenbauer": _cmd_gegenbauer,
    "spectrum": _cmd_spectrum,
    "gt": _cmd_gt,
    "verify": _cmd_verify,
    "find-frame": _cmd_find_frame,
    "sweep": _cmd_sweep,
}


def _clean(obj):
    """Replace non-finite floats with None so reports stay strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def run(config: RunConfig):
    """Execute one command; returns (exit_code, report).  Raises UsageError on bad input."""
    params = config.resolved()
    passed, result = _HANDLERS[config.command](params, config.seed)
    report = _clean(
        {
            "schema": SCHEMA_ID,
            "command": config.command,
            "params": params,
            "seed": config.seed,
            "passed": bool(passed),
            "result": result,
        }
    )
    return (0 if passed else 1), report


def dumps(report):
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


# --- argument parsing ----------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(prog="orthoframe", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON run config {command, params, seed, output_path}")
    sub = parser.add_subparsers(dest="command")
    for name, spec in COMMANDS.items():
        sp = sub.add_parser(name)
        for key, (typ, default) in spec.items():
            flag = "--" + key.replace("_", "-")
            if typ is bool:
                sp.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, default=None)
            else:
                sp.add_argument(flag, dest=key, type=typ, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--output", dest="output_path", default=None)
    return parser


def _config_from_args(args):
    if args.config:
        try:
            with open(args.config) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        cfg = RunConfig.from_json(obj)
        if args.command:
            if args.command != cfg.command:
                raise UsageError(f"config command {cfg.command!r} conflicts with {args.command!r}")
            flags = {k: v for k, v in vars(args).items() if k in COMMANDS[args.command] and v is not None}
            cfg.params.update(flags)
            if args.seed is not None:
                cfg.seed = args.seed
            if args.output_path is not None:
                cfg.output_path = args.output_path
        return cfg
    if not args.command:
        raise UsageError("no command given")
    params = {k: v for k, v in vars(args).items() if k in COMMANDS[args.command] and v is not None}
    return RunConfig(args.command, params, args.seed, args.output_path)


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        code, report = run(cfg)
    except UsageError as exc:
        print(f"orthoframe: error: {exc}", file=sys.stderr)
        return 2
    text = dumps(report)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
        print(f"{cfg.command}: {'pass' if report['passed'] else 'FAIL'} -> {cfg.output_path}")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
