"""Batch front end: a JSON config in, JSON (and CSV) results out.

    holofact run --config cfg.json [--out DIR]
    holofact schema <command>

Exit status is 0 on success, 1 on a domain error (an error record is
written) and 2 when the config fails validation.
"""
import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__, atlas, catalog, complab, ivp, ng
from .errors import HolofactError, SchemaError, StrictFieldError

TOOL = "holofact"
COMMANDS = ("solve", "atlas", "radius", "factor", "ng", "asym", "maxmod", "recursion")

_CX = {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}
_POLY = {"type": "array", "items": _CX, "minItems": 1}
_POS = {"type": "number", "exclusiveMinimum": 0}
_SPEC = {
    "type": "object",
    "additionalProperties": False,
    "required": ["type", "F", "G"],
    "properties": {
        "type": {"enum": ["type1", "type2"]},
        "F": _POLY,
        "G": _POLY,
        "N": {"type": "integer", "minimum": 0},
        "a": _CX,
        "alpha": _CX,
        "a0": _CX,
    },
}
# catalog functions are recursive; the codec does the strict field check
_FN = {"type": "object", "required": ["kind"], "properties": {"kind": {"enum": sorted(catalog.VARIANTS)}}}
_ORDER = {"type": "integer", "minimum": 16, "maximum": 512}


def _params(props, required=()):
    return {"type": "object", "additionalProperties": False, "required": list(required), "properties": props}


PARAMS = {
    "solve": _params({"spec": _SPEC, "order": _ORDER, "coeffs": {"type": "integer", "minimum": 1}}, ["spec"]),
    "atlas": _params({
        "spec": _SPEC,
        "order": _ORDER,
        "lambda": _POS,
        "budget": _params({
            "max_generation": {"type": "integer", "minimum": 0},
            "max_charts": {"type": "integer", "minimum": 1},
            "angles_per_chart": {"type": "integer", "minimum": 4},
        }),
    }, ["spec"]),
    "radius": _params({
        "spec": _SPEC,
        "order": _ORDER,
        "box": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
    }, ["spec"]),
    "factor": _params({
        "fn": _FN,
        "mode": {"enum": ["picard", "eq15"]},
        "omitted": _CX,
        "N": {"type": "integer", "minimum": 1},
        "n_samples": {"type": "integer", "minimum": 1},
        "box_radius": _POS,
    }, ["fn", "mode"]),
    "ng": _params({
        "K": {"type": "integer", "minimum": 1, "maximum": ng.MAX_K},
        "tail_checks": {"type": "boolean"},
    }, ["K"]),
    "asym": _params({"fn": _FN, "n": {"type": "integer", "minimum": 0}}, ["fn"]),
    "maxmod": _params({
        "fn": _FN,
        "radii": {"type": "array", "items": _POS, "minItems": 1},
        "samples": {"type": "integer", "minimum": 8},
    }, ["fn", "radii"]),
    "recursion": _params({"g": _FN, "h": _FN, "n_max": {"type": "integer", "minimum": 0}}, ["g", "h"]),
}

DEFAULTS = {
    "solve": {"order": ivp.DEFAULT_ORDER, "coeffs": 16},
    "atlas": {"order": ivp.DEFAULT_ORDER, "lambda": atlas.LAMBDA,
              "budget": {"max_generation": 3, "max_charts": 64, "angles_per_chart": 64}},
    "radius": {"order": ivp.DEFAULT_ORDER},
    "factor": {"omitted": 0.0, "N": 1, "n_samples": 200, "box_radius": 2.0},
    "ng": {"tail_checks": True},
    "asym": {"n": 0},
    "maxmod": {"samples": 720},
    "recursion": {"n_max": 3},
}


def schema(command):
    if command not in PARAMS:
        raise SchemaError("command", f"unknown command {command!r}")
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "additionalProperties": False,
        "required": ["command", "params"],
        "properties": {"command": {"const": command}, "params": PARAMS[command]},
    }


def _path(parts):
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _raise_first(errors):
    err = min(errors, key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path)), e.message))
    if err.validator == "additionalProperties":
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(k for k in err.instance if k not in allowed)
        raise StrictFieldError(_path(list(err.absolute_path) + [extra[0]]))
    raise SchemaError(_path(err.absolute_path), err.message)


def _fill(params, defaults):
    out = dict(params)
    for k, v in defaults.items():
        if k not in out:
            out[k] = v
        elif isinstance(v, dict):
            out[k] = _fill(out[k], v)
    return out


def parse_config(text):
    """Validate a config document; returns {"command", "params"} with defaults filled."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("", "config must be a JSON object")
    for k in doc:
        if k not in ("command", "params"):
            raise StrictFieldError(k)
    cmd = doc.get("command")
    if cmd not in COMMANDS:
        raise SchemaError("command", f"expected one of {', '.join(COMMANDS)}")
    errors = list(Draft202012Validator(schema(cmd)).iter_errors(doc))
    if errors:
        _raise_first(errors)
    params = _fill(doc["params"], DEFAULTS[cmd])
    # decode typed fields now so schema-level mistakes surface as exit 2
    if "spec" in params:
        params["spec"] = ivp.IvpSpec.from_json(params["spec"], "params.spec")
    for k in ("fn", "g", "h"):
        if k in params:
            params[k] = catalog.from_json(params[k], f"params.{k}")
    if "omitted" in params:
        params["omitted"] = catalog.cx_from_json(params["omitted"], "params.omitted")
    return {"command": cmd, "params": params, "hash": config_hash(doc)}


def config_hash(doc):
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _bounds(b):
    return None if b is None else {k: float(getattr(b, k)) for k in b._fields}


def _solve(p):
    chart = ivp.solve_local(p["spec"], p["order"])
    return {
        "spec": p["spec"].to_json(),
        "radius": chart.r_emp.value,
        "radius_method": chart.r_emp.method,
        "fit_window": list(chart.r_emp.fit_window),
        "fit_residual": chart.r_emp.fit_residual,
        "bounds": _bounds(chart.r_theory),
        "residual": ivp.residual_check(chart) if math.isfinite(chart.r_emp.value) else None,
        "coeffs": [catalog.cx_to_json(c) for c in chart.L.coeffs[: p["coeffs"]]],
    }, None


def _atlas(p):
    b = p["budget"]
    budget = atlas.Budget(b["max_generation"], b["max_charts"], b["angles_per_chart"])
    a = atlas.build_atlas(p["spec"], budget, p["order"])
    out = atlas.to_json(a)
    rep = atlas.verify_thm2(a)
    out["verify"] = rep
    return out, None


def _radius(p):
    spec = p["spec"]
    chart = ivp.solve_local(spec, p["order"], bounds=False)
    b = ivp.bounds_hille(spec, *p["box"]) if "box" in p else ivp.auto_box(spec)
    row = {"banach": b.banach, "picard": b.picard, "cauchy": b.cauchy, "empirical": chart.r_emp.value,
           "method": chart.r_emp.method, "M": b.M, "K": b.K, "box_a": b.box_a, "box_b": b.box_b}
    return dict(row), [row]


def _factor(p):
    f = p["fn"]
    if p["mode"] == "picard":
        chain = complab.picard_factorize(f, p["omitted"])
    else:
        chain = complab.root_factorize(f, p["N"])
    resid = complab.verify_composition(f, chain, p["n_samples"], p["box_radius"])
    out = chain.to_json()
    out["residual"] = resid
    out["fn"] = catalog.to_json(f)
    return out, None


def _ng(p):
    seq = ng.build_cs(p["K"])
    out = seq.to_json()
    out["method_log"] = list(seq.method_log)
    if p["tail_checks"]:
        out["tail_checks"] = [
            {"k": k, "probe_radius": k, "max_increment": ng.tail_bound_check(seq, k, k), "bound": 2.0 ** (-k)}
            for k in range(1, seq.K)
        ]
    return out, None


def _asym(p):
    f = p["fn"]
    A = catalog.asymptotic_values(f)
    if p["n"] > 0:
        A = complab.asym_iterate(A, f, p["n"])
    return {"values": [catalog.cx_to_json(v) for v in A.values], "complete": A.complete, "provenance": A.provenance}, None


def _maxmod(p):
    rows = [{"r": r, "M": catalog.max_modulus(p["fn"], r, p["samples"])} for r in p["radii"]]
    return {"rows": rows}, rows


def _recursion(p):
    f = catalog.Chain(p["g"], p["h"])
    return {
        "residuals": complab.divide_recursion(f, p["n_max"]),
        "product_identity_residual": complab.product_identity_residual(f),
    }, None


RUNNERS = {"solve": _solve, "atlas": _atlas, "radius": _radius, "factor": _factor, "ng": _ng,
           "asym": _asym, "maxmod": _maxmod, "recursion": _recursion}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(x.real), jsonable(x.imag)]
    if x is None or isinstance(x, str):
        return x
    return str(x)


def header(cfg_hash):
    return {"tool": TOOL, "version": __version__, "config_hash": cfg_hash}


def dumps(obj):
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def _cell(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def to_csv(rows, cfg_hash):
    """RFC-4180 text; every row carries the provenance columns."""
    cols = list(rows[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols + ["version", "config_hash"])
    for r in rows:
        w.writerow([_cell(r[c]) for c in cols] + [__version__, cfg_hash])
    return buf.getvalue()


def run_command(cfg, out_dir):
    """Execute a parsed config; returns the exit status."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cmd = cfg["command"]
    try:
        result, rows = RUNNERS[cmd](cfg["params"])
    except HolofactError as exc:
        rec = {"header": header(cfg["hash"]), "error": {"code": exc.code, "message": str(exc)}}
        (out_dir / "error.json").write_text(dumps(rec))
        print(f"{cmd}: {exc.code}: {exc}", file=sys.stderr)
        return 1
    (out_dir / f"{cmd}.json").write_text(dumps({"header": header(cfg["hash"]), "command": cmd, "result": result}))
    if rows:
        with open(out_dir / f"{cmd}.csv", "w", newline="") as fh:
            fh.write(to_csv(rows, cfg["hash"]))
    print(f"{cmd}: wrote {out_dir / (cmd + '.json')}")
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(prog=TOOL)
    sub = ap.add_subparsers(dest="action", required=True)
    r = sub.add_parser("run", help="run a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=".")
    s = sub.add_parser("schema", help="print the JSON schema of a command")
    s.add_argument("command", choices=COMMANDS)
    args = ap.parse_args(argv)

    if args.action == "schema":
        print(json.dumps(schema(args.command), indent=2))
        return 0
    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(dumps({"error": {"code": exc.code, "path": exc.path, "message": str(exc)}}), file=sys.stderr, end="")
        return 2
    except HolofactError as exc:
        # a spec that parses but is not an elh system (bad type, seed at a)
        print(dumps({"error": {"code": exc.code, "message": str(exc)}}), file=sys.stderr, end="")
        return 2
    return run_command(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
