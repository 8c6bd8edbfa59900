"""Command-line front end: ``evolve``, ``steady`` and ``phase``.

Each subcommand reads an optional JSON config (``--config``) whose keys are
the RunConfig / PhaseGrid field names, applies flag overrides, and writes a
CSV or JSON table to ``--out`` (stdout when omitted).

Exit codes: 0 success, 2 config validation failure, 3 physicality or
coefficient failure, 4 I/O failure.
"""
import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import measures, model
from .dynamics import EvolutionSpec, propagate_array, separability_transitions, steady_state
from .model import (
    InvalidDiffusionError,
    PhysParams,
    UnphysicalStateError,
    UPPER_TRIANGLE_NAMES,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_IO = 4

EVOLVE_COLUMNS = (
    "t", "simon", "nu_tilde_minus", "log_negativity", "purity",
    "von_neumann_entropy", "mutual_information",
) + UPPER_TRIANGLE_NAMES

STEADY_COLUMNS = (
    "classification", "c_t", "ratio", "lambda_cap", "completely_positive",
    "log_negativity", "asymptotic_log_negativity", "simon", "nu_tilde_minus",
    "purity", "marginal_purity_1", "marginal_purity_2", "delta",
    "von_neumann_entropy", "mutual_information", "squeezing_r", "state_squeezing_r",
) + UPPER_TRIANGLE_NAMES

PHASE_COLUMNS = ("theta", "d", "c_t", "ratio", "classification", "log_negativity")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


# ---------------------------------------------------------------------------
# configuration

@dataclass
class RunConfig:
    params: PhysParams
    d_xy: float = 0.0
    d_xpy: float = 0.0
    initial_state: dict = field(default_factory=lambda: {"kind": "vacuum"})
    t_max: float = 10.0
    t_samples: int = 101
    output_format: str = "csv"
    output_path: str = None

    def meta(self):
        p = self.params
        return {
            "params": {"m": p.m, "omega": p.omega, "lambda": p.lam, "theta": p.theta, "c_t": p.c_t},
            "d_xy": self.d_xy,
            "d_xpy": self.d_xpy,
            "initial_state": self.initial_state,
            "t_max": self.t_max,
            "t_samples": self.t_samples,
            "output_format": self.output_format,
            "output_path": self.output_path,
        }


@dataclass
class PhaseGrid:
    params: PhysParams
    theta_range: tuple = (0.1, 2.0, 50)
    d_range: tuple = (0.0, 1.0, 50)
    output_format: str = "csv"
    output_path: str = None

    def meta(self):
        p = self.params
        return {
            "params": {"m": p.m, "omega": p.omega, "lambda": p.lam},
            "theta_range": list(self.theta_range),
            "d_range": list(self.d_range),
            "output_format": self.output_format,
            "output_path": self.output_path,
        }


_RUN_KEYS = {"params", "d_xy", "d_xpy", "initial_state", "t_max", "t_samples",
             "output_format", "output_path"}
_PHASE_KEYS = {"params", "theta_range", "d_range", "output_format", "output_path"}
_PARAM_KEYS = {"m", "omega", "lambda", "theta", "c_t"}


def _number(value, name, positive=False, nonneg=False):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a number, got {value!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{name}: must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{name}: must be positive, got {v}")
    if nonneg and v < 0:
        raise ConfigError(f"{name}: must be non-negative, got {v}")
    return v


def _params(raw):
    if not isinstance(raw, dict):
        raise ConfigError("params: expected an object")
    unknown = set(raw) - _PARAM_KEYS
    if unknown:
        raise ConfigError(f"params: unknown field(s) {sorted(unknown)}")
    m = _number(raw.get("m", 1.0), "params.m", positive=True)
    omega = _number(raw.get("omega", 1.0), "params.omega", positive=True)
    lam = _number(raw.get("lambda", 0.1), "params.lambda", positive=True)
    theta = raw.get("theta")
    c_t = raw.get("c_t")
    if theta is not None and c_t is not None:
        raise ConfigError("params.theta and params.c_t are mutually exclusive")
    if c_t is not None:
        c_t = _number(c_t, "params.c_t")
        if c_t < 1.0:
            raise ConfigError(f"params.c_t: must be >= 1, got {c_t}")
        return PhysParams.from_c_t(m, omega, lam, c_t)
    theta = _number(theta if theta is not None else 0.0, "params.theta", nonneg=True)
    return PhysParams(m=m, omega=omega, lam=lam, theta=theta)


def _initial(raw):
    if isinstance(raw, str):
        raw = _parse_initial_flag(raw)
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError("initial_state: expected an object with a 'kind' field")
    kind = raw["kind"]
    if kind in ("vacuum", "steady"):
        return {"kind": kind}
    if kind == "squeezed":
        return {"kind": kind, "r": _number(raw.get("r"), "initial_state.r", nonneg=True)}
    if kind == "thermal":
        c = _number(raw.get("c_t"), "initial_state.c_t")
        if c < 1.0:
            raise ConfigError(f"initial_state.c_t: must be >= 1, got {c}")
        return {"kind": kind, "c_t": c}
    if kind == "explicit":
        vals = raw.get("sigma")
        if not isinstance(vals, (list, tuple)) or len(vals) != 10:
            raise ConfigError("initial_state.sigma: expected 10 upper-triangle entries")
        return {"kind": kind, "sigma": [_number(v, "initial_state.sigma") for v in vals]}
    raise ConfigError(f"initial_state.kind: unknown kind {kind!r}")


def _parse_initial_flag(text):
    kind, _, arg = text.partition(":")
    if kind == "squeezed":
        return {"kind": kind, "r": arg}
    if kind == "thermal":
        return {"kind": kind, "c_t": arg}
    if kind == "explicit":
        return {"kind": kind, "sigma": arg.split(",") if arg else None}
    return {"kind": kind}


def _format(value):
    if value not in ("csv", "json"):
        raise ConfigError(f"output_format: must be 'csv' or 'json', got {value!r}")
    return value


def _range(raw, name):
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ConfigError(f"{name}: expected [min, max, steps]")
    lo = _number(raw[0], f"{name}.min", nonneg=True)
    hi = _number(raw[1], f"{name}.max", nonneg=True)
    try:
        steps = int(raw[2])
    except (TypeError, ValueError):
        raise ConfigError(f"{name}.steps: expected an integer") from None
    if steps != float(raw[2]) or steps < 2:
        raise ConfigError(f"{name}.steps: must be an integer >= 2")
    if not hi > lo:
        raise ConfigError(f"{name}: max must exceed min")
    return (lo, hi, steps)


def _load_file(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    return raw


def _apply_param_flags(raw, args):
    params = dict(raw.get("params", {}))
    for flag, key in (("m", "m"), ("omega", "omega"), ("lam", "lambda")):
        if getattr(args, flag) is not None:
            params[key] = getattr(args, flag)
    theta_flag = getattr(args, "theta", None)
    c_t_flag = getattr(args, "c_t", None)
    if theta_flag is not None:
        params.pop("c_t", None)
        params["theta"] = theta_flag
    if c_t_flag is not None:
        params.pop("theta", None)
        params["c_t"] = c_t_flag
    return params


def build_run_config(args):
    raw = _load_file(args.config)
    unknown = set(raw) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")
    raw["params"] = _apply_param_flags(raw, args)
    for flag, key in (("dxy", "d_xy"), ("dxpy", "d_xpy"), ("tmax", "t_max"),
                      ("samples", "t_samples"), ("out", "output_path"),
                      ("format", "output_format"), ("initial", "initial_state")):
        if getattr(args, flag, None) is not None:
            raw[key] = getattr(args, flag)
    t_samples = raw.get("t_samples", 101)
    try:
        n = int(t_samples)
    except (TypeError, ValueError):
        raise ConfigError("t_samples: expected an integer") from None
    if n != float(t_samples) or n < 2:
        raise ConfigError("t_samples: must be an integer >= 2")
    return RunConfig(
        params=_params(raw["params"]),
        d_xy=_number(raw.get("d_xy", 0.0), "d_xy"),
        d_xpy=_number(raw.get("d_xpy", 0.0), "d_xpy"),
        initial_state=_initial(raw.get("initial_state", {"kind": "vacuum"})),
        t_max=_number(raw.get("t_max", 10.0), "t_max", positive=True),
        t_samples=n,
        output_format=_format(raw.get("output_format", "csv")),
        output_path=raw.get("output_path"),
    )


def build_phase_grid(args):
    raw = _load_file(args.config)
    unknown = set(raw) - _PHASE_KEYS
    if unknown:
        raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")
    params = _apply_param_flags(raw, args)
    for key in ("theta", "c_t"):
        if key in params:
            raise ConfigError(f"params.{key}: temperature is swept by theta_range in phase")
    for flag, key in (("theta_range", "theta_range"), ("d_range", "d_range"),
                      ("out", "output_path"), ("format", "output_format")):
        if getattr(args, flag, None) is not None:
            raw[key] = getattr(args, flag)
    return PhaseGrid(
        params=_params(params),
        theta_range=_range(raw.get("theta_range", (0.1, 2.0, 50)), "theta_range"),
        d_range=_range(raw.get("d_range", (0.0, 1.0, 50)), "d_range"),
        output_format=_format(raw.get("output_format", "csv")),
        output_path=raw.get("output_path"),
    )


# ---------------------------------------------------------------------------
# output

def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    v = float(value)
    if not math.isfinite(v):
        return ""
    return format(v + 0.0, ".17g")  # + 0.0 folds -0.0 into 0


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, float, np.floating, np.integer)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


def render(columns, rows, fmt, meta, extra=None):
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])
        return buf.getvalue()
    doc = {"meta": meta, "rows": [{c: _json_value(row.get(c)) for c in columns} for row in rows]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_output(text, path):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# commands

def initial_covariance(config, sigma_inf):
    p = config.params
    spec = config.initial_state
    kind = spec["kind"]
    if kind == "steady":
        return model.CovarianceMatrix(sigma_inf)
    if kind == "explicit":
        return model.from_upper_triangle(spec["sigma"])
    if kind == "vacuum":
        scaled = model.vacuum().sigma
    elif kind == "squeezed":
        scaled = model.two_mode_squeezed_vacuum(spec["r"]).sigma
    else:
        scaled = model.thermal_product_state(spec["c_t"]).sigma
    return model.CovarianceMatrix(model.unscale_quadratures(scaled, p.m, p.omega))


def cmd_evolve(config):
    """Rows of (t, S, nu~_-, E_N, mu, S_V, I, sigma) plus separability transition times."""
    p = config.params
    D = model.thermal_diffusion(p, config.d_xy, config.d_xpy)
    sigma_inf = steady_state(p, D, check=False).sigma
    initial = initial_covariance(config, sigma_inf)
    t_grid = np.linspace(0.0, config.t_max, config.t_samples)
    spec = EvolutionSpec(p, D, initial, t_grid)
    states = propagate_array(spec, sigma_inf)
    meas = measures.batch_measures(states)
    if not meas["physical"].all():
        k = int(np.argmin(meas["physical"]))
        raise UnphysicalStateError(f"state at t={t_grid[k]:.17g} violates the uncertainty principle")
    rows = []
    for k, t in enumerate(t_grid):
        row = {"t": t}
        for col, key in (("simon", "simon"), ("nu_tilde_minus", "nu_tilde_minus"),
                         ("log_negativity", "log_negativity"), ("purity", "purity"),
                         ("von_neumann_entropy", "von_neumann_entropy"),
                         ("mutual_information", "mutual_information")):
            row[col] = meas[key][k]
        row.update(zip(UPPER_TRIANGLE_NAMES, states[k][np.triu_indices(4)]))
        rows.append(row)
    transitions = separability_transitions(spec, meas["simon"])
    cp = D.validate(p.lam).completely_positive
    return rows, transitions, cp


def cmd_steady(config):
    """Single-row report of the asymptotic state; raises on invalid coefficients."""
    p = config.params
    d = config.d_xpy
    cls = measures.classify_asymptotic(p, d)
    row = {"classification": cls.classification, "c_t": cls.c_t, "ratio": cls.ratio,
           "lambda_cap": cls.lambda_cap, "completely_positive": cls.completely_positive}
    if config.d_xy == 0.0 and cls.classification == measures.INVALID:
        return row, cls.reason
    D = model.thermal_diffusion(p, config.d_xy, d)
    row["completely_positive"] = D.validate(p.lam).completely_positive
    sigma = steady_state(p, D)
    ent, mix = measures.full_report(sigma)
    if config.d_xy == 0.0:
        row["asymptotic_log_negativity"] = measures.asymptotic_log_negativity(p, d)
        row["squeezing_r"] = measures.squeezing_parameter(p, d)
    else:
        row["classification"] = "Separable" if ent.separable else "Entangled"
    row.update(
        log_negativity=ent.log_negativity, simon=ent.simon_s, nu_tilde_minus=ent.nu_tilde_minus,
        purity=mix.purity, marginal_purity_1=mix.marginal_purity_1,
        marginal_purity_2=mix.marginal_purity_2, delta=mix.delta,
        von_neumann_entropy=mix.von_neumann_entropy, mutual_information=mix.mutual_information,
        state_squeezing_r=measures.state_squeezing_parameter(
            model.scale_quadratures(sigma, p.m, p.omega)),
    )
    row.update(zip(UPPER_TRIANGLE_NAMES, sigma.upper_triangle()))
    return row, None


def cmd_phase(grid):
    """Asymptotic classification and E_N(inf) on a (theta, d) grid, theta-major."""
    p0 = grid.params
    thetas = np.linspace(*grid.theta_range[:2], grid.theta_range[2])
    ds = np.linspace(*grid.d_range[:2], grid.d_range[2])
    rows = []
    for theta in thetas:
        p = PhysParams(m=p0.m, omega=p0.omega, lam=p0.lam, theta=float(theta))
        for d in ds:
            cls = measures.classify_asymptotic(p, float(d))
            e_n = None
            if cls.classification != measures.INVALID:
                e_n = measures.asymptotic_log_negativity(p, float(d))
            rows.append({"theta": theta, "d": d, "c_t": cls.c_t, "ratio": cls.ratio,
                         "classification": cls.classification, "log_negativity": e_n})
    return rows


# ---------------------------------------------------------------------------
# entry point

def _parser():
    parser = argparse.ArgumentParser(prog="gaussbath", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--m", type=float)
        sp.add_argument("--omega", type=float)
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))

    for name in ("evolve", "steady"):
        sp = sub.add_parser(name)
        common(sp)
        temp = sp.add_mutually_exclusive_group()
        temp.add_argument("--theta", type=float, help="bath temperature kT")
        temp.add_argument("--c-t", dest="c_t", type=float, help="coth(omega / 2 kT) instead of --theta")
        sp.add_argument("--dxy", type=float)
        sp.add_argument("--dxpy", type=float)
        sp.add_argument("--tmax", type=float)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--initial", help="vacuum | steady | squeezed:R | thermal:C_T | explicit:s1,...,s10")

    sp = sub.add_parser("phase")
    common(sp)
    sp.add_argument("--theta-range", nargs=3, metavar=("MIN", "MAX", "STEPS"))
    sp.add_argument("--d-range", nargs=3, metavar=("MIN", "MAX", "STEPS"))
    return parser


def _transitions_csv(times):
    return "t\n" + "".join(format(t, ".17g") + "\n" for t in times)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "phase":
            config = build_phase_grid(args)
        else:
            config = build_run_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    status = EXIT_OK
    extra = None
    sidecar = None
    try:
        if args.command == "evolve":
            rows, transitions, cp = cmd_evolve(config)
            columns = EVOLVE_COLUMNS
            extra = {"transitions": transitions, "completely_positive": cp}
            if not cp:
                print("warning: diffusion is not completely positive", file=sys.stderr)
            if config.output_format == "csv":
                if config.output_path is not None:
                    sidecar = (config.output_path + ".transitions.csv", _transitions_csv(transitions))
                else:
                    for t in transitions:
                        print(f"transition t={t:.17g}", file=sys.stderr)
        elif args.command == "steady":
            row, problem = cmd_steady(config)
            rows, columns = [row], STEADY_COLUMNS
            if problem:
                print(f"error: InvalidCoefficients: {problem}", file=sys.stderr)
                status = EXIT_PHYSICS
        else:
            rows, columns = cmd_phase(config), PHASE_COLUMNS
    except (InvalidDiffusionError, UnphysicalStateError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS

    text = render(columns, rows, config.output_format, config.meta(), extra)
    try:
        write_output(text, config.output_path)
        if sidecar:
            write_output(sidecar[1], sidecar[0])
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    raise SystemExit(main())
