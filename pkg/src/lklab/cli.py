"""Command-line front end.

Every command takes its parameters from flags or from a JSON file given with
``--config`` (flags win). Unknown config keys are rejected. Results go to
``--out`` (default ``$LKLAB_OUTPUT_DIR`` or ``./lklab-output``) together with a
``manifest.json`` holding the command and its resolved configuration, so a
run can be replayed with ``lklab <command> --config manifest.json``.

Exit codes: 0 success, 2 invalid configuration or input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .conformal import capacity_coefficient
from .errors import DomainError, InfeasibleError, InternalError, InvalidInputError, LklabError, NumericError
from .examples import NAMES, R_FAMILIES, NamedChain, cusp_diagnostic, example_entropy_integral
from .hl0 import particles_for_capacity, simulate_hl0, simulate_hl0_poisson
from .ldp import coarse_grain_convergence, hl0_concentration, sanov_arc_rate
from .lk_solver import HullTrace, solve_map, trace_hull
from .measures import DrivingMeasure, MeasureSlice, dump_measure, load_measure
from .measures.io import encode_float
from .report import build_entropy_report
from .svg import curve_figure, fmt, hull_figure
from .transport import LineDensity, compare_models, minimal_entropy_conservative, verify_minimality

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["command", "config", "outputs", "version"],
    "properties": {
        "command": {"type": "string"},
        "config": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
        "outputs": {"type": "array", "items": {"type": "string"}},
        "version": {"type": "string"},
        "summary": {"type": "object"},
    },
}

_NUMBER_OR_INF = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf"]}, {"type": "null"}]}
SUMMARY_SCHEMA = {"type": "object", "additionalProperties": True}
TRANSPORT_SCHEMA = {
    "type": "object",
    "required": ["x_grid", "gamma", "H_star"],
    "properties": {
        "x_grid": {
            "type": "object",
            "required": ["start", "stop", "n"],
            "properties": {"start": {"type": "number"}, "stop": {"type": "number"}, "n": {"type": "integer"}},
        },
        "gamma": {"type": "array", "items": {"type": "number"}},
        "H_star": {"type": "number"},
    },
}
EXPERIMENT_SCHEMA = {
    "type": "object",
    "required": ["description", "n_values", "observed", "predicted", "passed"],
    "properties": {
        "n_values": {"type": "array"},
        "observed": {"type": "array", "items": {"type": "number"}},
        "predicted": _NUMBER_OR_INF,
        "passed": {"type": "boolean"},
    },
}
EXAMPLE_SCHEMA = {
    "type": "object",
    "required": ["name", "params", "times", "slice_entropy", "winding_ok", "nested_ok"],
    "properties": {
        "slice_entropy": {"type": "array", "items": _NUMBER_OR_INF},
        "winding_ok": {"type": "boolean"},
        "nested_ok": {"type": "boolean"},
    },
}


class ConfigError(InvalidInputError):
    """Invalid command configuration."""


# ---------------------------------------------------------------------------
# Command parameters: name -> (type, default). ``None`` default means required
# unless the command resolves it otherwise.
# ---------------------------------------------------------------------------

_REQUIRED = object()

PARAMS = {
    "hl0": {
        "eps": (float, _REQUIRED),
        "n": (int, None),
        "T": (float, None),
        "seed": (int, 0),
        "mode": (str, "discrete"),
        "n_points": (int, 512),
        "standoff": (float, 1e-3),
    },
    "entropy": {"measure": (str, _REQUIRED), "becker": (bool, True)},
    "solve": {
        "measure": (str, _REQUIRED),
        "times": (list, None),
        "n_points": (int, 512),
        "standoff": (float, 1e-3),
    },
    "example": {
        "name": (str, _REQUIRED),
        "R": (float, None),
        "family": (str, None),
        "eps": (float, None),
        "times": (list, None),
        "n_points": (int, 256),
        "standoff": (float, 1e-3),
        "grid": (int, 1024),
        "n_slices": (int, 64),
    },
    "transport": {
        "gamma": (str, "gaussian"),
        "a": (float, 0.0),
        "b": (float, 1.0),
        "L": (float, 8.0),
        "n": (int, 1025),
        "trials": (int, 100),
        "seed": (int, 0),
        "n_time": (int, 8),
        "compare": (int, 0),
    },
    "ldp": {
        "experiment": (str, _REQUIRED),
        "p": (float, 0.5),
        "a": (float, 0.7),
        "ns": (list, [10, 100, 500, 1000, 2000]),
        "family": (str, "sqrt"),
        "T": (float, 0.9),
        "dyadic_max": (int, 6),
        "n_slices": (int, 512),
        "eps": (list, [0.2, 0.1, 0.05]),
        "seeds": (int, 20),
        "seed": (int, 0),
    },
}


def _coerce(cmd: str, key: str, value):
    typ, _ = PARAMS[cmd][key]
    if value is None:
        return None
    try:
        if typ is list:
            if isinstance(value, str):
                value = [v for v in value.split(",") if v]
            if not isinstance(value, (list, tuple)):
                value = [value]
            return [float(v) for v in value]
        if typ is bool:
            if isinstance(value, str):
                return value.lower() in ("1", "true", "yes")
            return bool(value)
        if typ is int and isinstance(value, float) and not value.is_integer():
            raise ValueError
        return typ(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{cmd}: parameter {key!r} has invalid value {value!r}") from None


def resolve_config(cmd: str, cli_values: dict, config_path: str | None) -> dict:
    """Merge a JSON config with command-line values and apply defaults."""
    table = PARAMS[cmd]
    merged: dict = {}
    if config_path:
        try:
            data = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from None
        if isinstance(data, dict) and "command" in data and "config" in data:
            if data["command"] != cmd:
                raise ConfigError(f"manifest is for command {data['command']!r}, not {cmd!r}")
            data = data["config"]
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(data) - set(table))
        if unknown:
            raise ConfigError(f"{cmd}: unknown config keys {unknown}")
        merged.update(data)
    for k, v in cli_values.items():
        if v is not None:
            merged[k] = v
    out = {}
    for k, (_, default) in table.items():
        v = _coerce(cmd, k, merged.get(k))
        if v is None:
            if default is _REQUIRED:
                raise ConfigError(f"{cmd}: missing required parameter {k!r}")
            v = default
        out[k] = v
    return out


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


class Outputs:
    """Tracks written files and validates JSON before writing."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[str] = []

    def json(self, name: str, data: dict, schema: dict | None = None) -> Path:
        if schema is not None:
            jsonschema.validate(data, schema)
        return self._write(name, json.dumps(data, indent=2, sort_keys=True) + "\n")

    def text(self, name: str, text: str) -> Path:
        return self._write(name, text)

    def _write(self, name: str, text: str) -> Path:
        path = self.root / name
        path.write_text(text)
        self.files.append(name)
        return path


def hull_csv(traces) -> str:
    rows = ["t,theta,re,im"]
    for tr in traces:
        for th, p in zip(tr.angles, tr.points):
            rows.append(f"{fmt(tr.t)},{fmt(th)},{fmt(p.real)},{fmt(p.imag)}")
    return "\n".join(rows) + "\n"


def hull_checks(traces, standoff: float = 1e-3) -> tuple[bool, bool]:
    """Each hull winds once around 0; each hull lies inside the next one.

    Consecutive hulls may share boundary on the unit circle (tangent disks),
    so vertices within ``sqrt(standoff)`` of the circle are not tested for
    nesting.
    """
    winding = all(int(tr.winding_number(0.0)) == 1 for tr in traces)
    nested = True
    for a, b in zip(traces[:-1], traces[1:]):
        pts = a.points[np.abs(a.points) > 1.0 + math.sqrt(standoff)]
        nested &= bool(np.all(b.contains(pts)))
    return winding, nested


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_hl0(cfg: dict, out: Outputs) -> dict:
    eps = cfg["eps"]
    if cfg["mode"] == "discrete":
        n = cfg["n"] if cfg["n"] is not None else particles_for_capacity(eps, cfg["T"] or 1.0)
        run = simulate_hl0(n, eps, cfg["seed"])
        mu = run.mu
        manifest = run.manifest()
    elif cfg["mode"] == "poisson":
        if cfg["T"] is None:
            raise ConfigError("hl0: poisson mode needs T")
        run = simulate_hl0_poisson(eps, cfg["T"], cfg["seed"])
        mu = run.mu_tilde
        manifest = run.manifest()
    else:
        raise ConfigError(f"hl0: mode must be 'discrete' or 'poisson', got {cfg['mode']!r}")
    dump_measure(mu, out.root / "measure.json")
    out.files.append("measure.json")
    trace = trace_hull(mu, mu.T, cfg["n_points"], cfg["standoff"])
    out.text("hull.csv", hull_csv([trace]))
    hull_figure([trace], title=f"HL(0) eps={fmt(eps)}").save(out.root / "hull.svg")
    out.files.append("hull.svg")
    cap = math.log(abs(capacity_coefficient(lambda z: solve_map(mu, mu.T, z))))
    manifest["measured_log_capacity"] = cap
    out.json("run.json", manifest, SUMMARY_SCHEMA)
    return manifest


def cmd_entropy(cfg: dict, out: Outputs) -> dict:
    mu = load_measure(cfg["measure"])
    d = build_entropy_report(mu, becker=cfg["becker"]).to_dict()
    out.json("entropy.json", d)
    return {k: v for k, v in d.items() if k != "per_slice"}


def _times(cfg, default):
    ts = cfg["times"] if cfg["times"] else default
    return sorted(float(t) for t in ts)


def cmd_solve(cfg: dict, out: Outputs) -> dict:
    mu = load_measure(cfg["measure"])
    ts = _times(cfg, [mu.T])
    traces = [trace_hull(mu, t, cfg["n_points"], cfg["standoff"]) for t in ts]
    out.text("hull.csv", hull_csv(traces))
    hull_figure(traces, title="Loewner hulls").save(out.root / "hull.svg")
    out.files.append("hull.svg")
    winding, nested = hull_checks(traces, cfg["standoff"])
    caps = [math.log(abs(capacity_coefficient(lambda z, t=t: solve_map(mu, t, z)))) for t in ts]
    masses = []
    for t in ts:
        masses.append(math.fsum(s.mass * (min(s.t1, t) - s.t0) for s in mu.slices if s.t0 < t))
    summary = {"times": ts, "log_capacity": caps, "expected_log_capacity": masses,
               "winding_ok": winding, "nested_ok": nested}
    out.json("solve.json", summary, SUMMARY_SCHEMA)
    return summary


def _example_chain(cfg) -> NamedChain:
    params = {}
    for k in ("R", "family", "eps"):
        if cfg[k] is not None:
            params[k] = cfg[k]
    return NamedChain(cfg["name"], params)


def _example_times(ch: NamedChain, cfg) -> list[float]:
    if cfg["times"]:
        return sorted(float(t) for t in cfg["times"])
    return [0.25, 0.5, 0.75, 1.0]


def _example_trace(ch: NamedChain, t: float, n_points: int, standoff: float) -> HullTrace:
    theta = 2 * np.pi * np.arange(n_points) / n_points
    z = (1.0 + standoff) * np.exp(1j * theta)
    if ch.name == "pacman":
        pts = solve_map(ch.driver(max(t, 1e-12)), t, z)
    else:
        pts = ch.map(t, z)
    return HullTrace(t, np.asarray(pts), theta)


def cmd_example(cfg: dict, out: Outputs) -> dict:
    ch = _example_chain(cfg)
    ts = _example_times(ch, cfg)
    for t in ts:
        ch.check_time(t, allow_end=True)
    traces = [_example_trace(ch, t, cfg["n_points"], cfg["standoff"]) for t in ts]
    out.text("hull.csv", hull_csv(traces))
    hull_figure(traces, title=ch.name).save(out.root / "hull.svg")
    out.files.append("hull.svg")
    winding, nested = hull_checks(traces, cfg["standoff"])

    grid = cfg["grid"]
    theta = 2 * np.pi * np.arange(grid) / grid
    dens_ts = [t for t in ts if not (ch.name == "poisson-var" and t >= 1.0)]
    cols = [ch.circle_density(t, grid).values for t in dens_ts]
    rows = ["theta," + ",".join(f"t={fmt(t)}" for t in dens_ts)]
    rows += [fmt(th) + "," + ",".join(fmt(c[i]) for c in cols) for i, th in enumerate(theta)]
    out.text("density.csv", "\n".join(rows) + "\n")
    if cols:
        curve_figure(theta, cols, title=f"{ch.name} densities").save(out.root / "density.svg")
        out.files.append("density.svg")

    t_end = ts[-1]
    n_sl = cfg["n_slices"]
    edges = np.linspace(0.0, t_end, n_sl + 1)
    # Cell averages keep the exact slice mass even when a slice is nearly a point mass.
    slices = [MeasureSlice(a, b, ch.circle_density(0.5 * (a + b), grid, sampling="cell"))
              for a, b in zip(edges[:-1], edges[1:])]
    dump_measure(DrivingMeasure(slices), out.root / "measure.json")
    out.files.append("measure.json")

    ent = example_entropy_integral(ch.name, ch.params, t_max=t_end)
    summary = {
        "name": ch.name,
        "params": ch.params,
        "times": ts,
        "slice_entropy": [encode_float(ch.slice_entropy(t)) for t in dens_ts],
        "total_entropy": encode_float(ent.value),
        "total_entropy_refined": encode_float(ent.refined),
        "entropy_diverging": ent.diverging,
        "winding_ok": winding,
        "nested_ok": nested,
    }
    if ch.name == "poisson-var" and ch.params.get("family") == "inverse":
        out.json("cusp.json", cusp_diagnostic().to_dict(), SUMMARY_SCHEMA)
    out.json("entropy.json", summary, EXAMPLE_SCHEMA)
    return summary


def cmd_transport(cfg: dict, out: Outputs) -> dict:
    if cfg["gamma"] == "gaussian":
        gamma = LineDensity.gaussian(cfg["L"], cfg["n"])
    elif cfg["gamma"] == "uniform":
        gamma = LineDensity.uniform(cfg["a"], cfg["b"], n=cfg["n"])
    else:
        raise ConfigError("transport: gamma must be 'gaussian' or 'uniform'")
    field, H = minimal_entropy_conservative(gamma, cfg["n_time"])
    rep = verify_minimality(gamma, cfg["trials"], cfg["seed"], cfg["n_time"])
    data = {
        "x_grid": {"start": float(gamma.x[0]), "stop": float(gamma.x[-1]), "n": int(gamma.x.size)},
        "gamma": gamma.values.tolist(),
        "H_star": H,
        "minimality": rep.to_dict(),
    }
    rows = ["x,u"] + [f"{fmt(x)},{fmt(u)}" for x, u in zip(gamma.x, field.time_integral())]
    out.text("interface.csv", "\n".join(rows) + "\n")
    if cfg["compare"] > 0:
        xs = np.linspace(gamma.x[0], gamma.x[-1], cfg["compare"] + 2)[1:-1]
        cmp_ = compare_models(field, xs)
        data["comparison"] = cmp_.to_dict()
        rows = ["x,u"] + [f"{fmt(x)},{fmt(u)}" for x, u in zip(xs, cmp_.nonconservative)]
        out.text("interface_nonconservative.csv", "\n".join(rows) + "\n")
    out.json("transport.json", data, TRANSPORT_SCHEMA)
    return {"H_star": H, **rep.to_dict()}


def cmd_ldp(cfg: dict, out: Outputs) -> dict:
    exp = cfg["experiment"]
    if exp == "sanov":
        res = sanov_arc_rate(cfg["p"], cfg["a"], [int(n) for n in cfg["ns"]])
    elif exp == "coarse":
        fam = cfg["family"]
        if fam not in R_FAMILIES:
            raise ConfigError(f"ldp: unknown family {fam!r}")
        ch = NamedChain("poisson-var", {"family": fam})
        if not 0 < cfg["T"] < 1:
            raise ConfigError("ldp: coarse experiment needs 0 < T < 1")
        mu = DrivingMeasure.from_density_function(ch.density, cfg["T"], cfg["n_slices"], 1024, normalize=True)
        res = coarse_grain_convergence(mu, cfg["dyadic_max"])
    elif exp == "concentration":
        seeds = range(cfg["seed"], cfg["seed"] + cfg["seeds"])
        res = hl0_concentration(cfg["eps"], seeds)
        curve_figure(np.log(res.n_values), [np.log(res.observed)],
                     title="log median distance vs log eps").save(out.root / "trend.svg")
        out.files.append("trend.svg")
    else:
        raise ConfigError("ldp: experiment must be 'sanov', 'coarse' or 'concentration'")
    d = res.to_dict()
    out.json("experiment.json", d, EXPERIMENT_SCHEMA)
    out.text("experiment.csv", res.to_csv())
    return {"description": d["description"], "observed": d["observed"], "predicted": d["predicted"],
            "passed": d["passed"]}


COMMANDS = {
    "hl0": cmd_hl0,
    "entropy": cmd_entropy,
    "solve": cmd_solve,
    "example": cmd_example,
    "transport": cmd_transport,
    "ldp": cmd_ldp,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lklab", description="Loewner chains, entropy and HL(0) experiments.")
    parser.add_argument("--version", action="version", version=f"lklab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameters (or a manifest to replay)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--quiet", action="store_true", help="no summary on stdout")
    common.add_argument("--json", action="store_true", help="print the summary as JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hl0", parents=[common], help="simulate an HL(0) cluster")
    p.add_argument("--eps", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["discrete", "poisson"])
    p.add_argument("--n-points", dest="n_points", type=int)
    p.add_argument("--standoff", type=float)

    p = sub.add_parser("entropy", parents=[common], help="entropy report of a driving-measure file")
    p.add_argument("measure", nargs="?")
    p.add_argument("--no-becker", dest="becker", action="store_const", const=False)

    p = sub.add_parser("solve", parents=[common], help="trace hulls of a driving-measure file")
    p.add_argument("measure", nargs="?")
    p.add_argument("--times", type=str, help="comma-separated times")
    p.add_argument("--n-points", dest="n_points", type=int)
    p.add_argument("--standoff", type=float)

    p = sub.add_parser("example", parents=[common], help="named Loewner chains")
    p.add_argument("--name", choices=NAMES)
    p.add_argument("--R", type=float)
    p.add_argument("--family", choices=sorted(R_FAMILIES))
    p.add_argument("--eps", type=float)
    p.add_argument("--times", type=str)
    p.add_argument("--n-points", dest="n_points", type=int)
    p.add_argument("--standoff", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--n-slices", dest="n_slices", type=int)

    p = sub.add_parser("transport", parents=[common], help="entropy-minimal transport fields")
    p.add_argument("--gamma", choices=["gaussian", "uniform"])
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-time", dest="n_time", type=int)
    p.add_argument("--compare", type=int, help="number of x points for the model comparison")

    p = sub.add_parser("ldp", parents=[common], help="large-deviation rate experiments")
    p.add_argument("experiment", nargs="?", choices=["sanov", "coarse", "concentration"])
    p.add_argument("--p", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--ns", type=str)
    p.add_argument("--family", choices=sorted(R_FAMILIES))
    p.add_argument("--T", type=float)
    p.add_argument("--dyadic-max", dest="dyadic_max", type=int)
    p.add_argument("--n-slices", dest="n_slices", type=int)
    p.add_argument("--eps", type=str)
    p.add_argument("--seeds", type=int)
    p.add_argument("--seed", type=int)
    return parser


_COMMON = {"command", "config", "out", "quiet", "json"}


def _output_dir(arg: str | None) -> Path:
    root = arg or os.environ.get("LKLAB_OUTPUT_DIR") or "lklab-output"
    return Path(root).expanduser().resolve()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cmd = args.command
    cli_values = {k: v for k, v in vars(args).items() if k not in _COMMON}
    try:
        cfg = resolve_config(cmd, cli_values, args.config)
        for key in ("measure",):
            if key in cfg and cfg[key] is not None:
                path = Path(cfg[key]).expanduser().resolve()
                if not path.is_file():
                    raise ConfigError(f"{cmd}: file not found: {path}")
                cfg[key] = str(path)
        root = _output_dir(args.out)
        root.mkdir(parents=True, exist_ok=True)
        out = Outputs(root)
        summary = COMMANDS[cmd](cfg, out)
        manifest = {
            "command": cmd,
            "config": cfg,
            "seed": cfg.get("seed"),
            "outputs": list(out.files),
            "version": __version__,
            "summary": _jsonify(summary),
        }
        out.json("manifest.json", manifest, MANIFEST_SCHEMA)
    except (InvalidInputError, DomainError, InfeasibleError, jsonschema.ValidationError) as exc:
        print(f"lklab {cmd}: error: {getattr(exc, 'message', exc)}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, InternalError, ArithmeticError, LklabError) as exc:
        print(f"lklab {cmd}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.json:
        print(json.dumps(_jsonify(summary), sort_keys=True))
    elif not args.quiet:
        print(f"lklab {cmd}: wrote {len(out.files)} files to {root}")
        for k, v in _jsonify(summary).items():
            if not isinstance(v, (list, dict)):
                print(f"  {k}: {v}")
    return EXIT_OK


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonify(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return encode_float(obj) if not math.isnan(obj) else None
    return obj


if __name__ == "__main__":
    sys.exit(main())
