"""Command-line front end.

Subcommands
-----------
solve       classify an equation instance, build the candidate solution, verify it
verify      re-check a given solution f = A exp((alpha z + beta)/3) + C exp(D z)
wp          sample wp on an n x n grid over one period cell
param       residual sweep of the elliptic Fermat-cubic parametrization f(h), eta g(h)
nevanlinna  T(r) = m(r) + N(r) curve and order estimate for wp, exp or a rational function

Complex numbers are written ``re,im`` on the command line and ``[re, im]``
in JSON config files.  Exit codes: 0 exact/success, 1 internal error or
inexact verification, 2 usage error, 3 FailsUnlessCZero, 4 NoExponentialSolution.

CSV columns
-----------
solve/verify  case,A_re,A_im,C_re,C_im,D_re,D_im,c0_re,c0_im,c1_re,c1_im,
              mu_re,mu_im,nu_re,nu_im,c_freedom,max_abs_residual,max_rel_residual,verdict
wp            re_z,im_z,re_wp,im_wp,ode_residual
param         re_z,im_z,re_F,im_F,re_G,im_G,fermat_residual,cubic_residual,
              relation_residual,eta_residual
nevanlinna    r,m,N,T (plus ratio = T*area/(pi r^2) for wp)
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import elliptic, fermat, nevanlinna, solver

COMMANDS = ("solve", "verify", "wp", "param", "nevanlinna")
EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_C_NOT_FREE, EXIT_NO_SOLUTION = 0, 1, 2, 3, 4
VERDICT_EXIT = {
    solver.Verdict.EXACT: EXIT_OK,
    solver.Verdict.INEXACT: EXIT_ERROR,
    solver.Verdict.FAILS_UNLESS_C_ZERO: EXIT_C_NOT_FREE,
    solver.Verdict.NO_EXPONENTIAL_SOLUTION: EXIT_NO_SOLUTION,
}
DEFAULT_GRID = {"solve": 64, "verify": 64, "wp": 50, "param": 100, "nevanlinna": 17}
PARAM_SEED = 20240101


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    a: tuple | None = None
    b: tuple | None = None
    alpha: complex | None = None
    beta: complex = 0j
    c: complex | None = None
    pair_mode: str = "forward"
    c0: complex | None = None
    c1: complex | None = None
    A: complex | None = None
    C: complex = 0j
    D: complex = 0j
    grid: int | None = None
    r_min: float = 4.0
    r_max: float = 20.0
    function: str = "wp"
    h: tuple = (0j, 1 + 0j)
    eta: int = 0
    seed: int = PARAM_SEED
    out: str | None = None
    format: str = "json"

    @property
    def instance(self):
        return solver.EquationInstance.from_rows(self.a, self.b, self.alpha, self.beta, self.c)

    @property
    def pair(self):
        if self.pair_mode == "forward":
            return None
        return solver.FermatPair(self.c0, self.c1)

    @property
    def grid_size(self):
        return self.grid if self.grid is not None else DEFAULT_GRID[self.command]


COMPLEX_KEYS = {"alpha", "beta", "c", "c0", "c1", "A", "C", "D"}
TRIPLE_KEYS = {"a", "b"}
CONFIG_KEYS = {f.name for f in fields(RunConfig)}


# ---------------------------------------------------------------- parsing

def parse_complex(text):
    """'re,im' (or a bare real) -> complex."""
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise UsageError(f"complex value must be [re, im], got {text!r}")
        re_, im_ = text
    else:
        parts = str(text).split(",")
        if len(parts) == 1:
            parts.append("0")
        if len(parts) != 2:
            raise UsageError(f"complex value must be 're,im', got {text!r}")
        re_, im_ = parts
    try:
        value = complex(float(re_), float(im_))
    except (TypeError, ValueError):
        raise UsageError(f"malformed number {text!r}") from None
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise UsageError(f"non-finite number {text!r}")
    return value


def _convert(key, value):
    if value is None:
        return None
    if key in COMPLEX_KEYS:
        return parse_complex(value)
    if key in TRIPLE_KEYS:
        if len(value) != 3:
            raise UsageError(f"--{key} needs three complex values")
        return tuple(parse_complex(v) for v in value)
    if key == "h":
        coeffs = tuple(parse_complex(v) for v in value)
        if not coeffs or len(coeffs) - 1 > fermat.MAX_CLI_DEGREE:
            raise UsageError(f"h must have degree <= {fermat.MAX_CLI_DEGREE}")
        return coeffs
    if key in ("grid", "eta", "seed"):
        if isinstance(value, bool) or not float(value).is_integer():
            raise UsageError(f"{key} must be an integer")
        return int(value)
    if key in ("r_min", "r_max"):
        return float(value)
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fermat-eq",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--a", nargs=3, metavar="RE,IM", help="a0 a1 a2")
    parser.add_argument("--b", nargs=3, metavar="RE,IM", help="b0 b1 b2")
    parser.add_argument("--alpha", metavar="RE,IM")
    parser.add_argument("--beta", metavar="RE,IM")
    parser.add_argument("--c", metavar="RE,IM", help="shift, must be nonzero")
    parser.add_argument("--pair-mode", dest="pair_mode", choices=("forward", "explicit"))
    parser.add_argument("--c0", metavar="RE,IM")
    parser.add_argument("--c1", metavar="RE,IM")
    parser.add_argument("--A", metavar="RE,IM", help="amplitude (verify)")
    parser.add_argument("--C", metavar="RE,IM", help="homogeneous coefficient")
    parser.add_argument("--D", metavar="RE,IM", help="homogeneous rate (verify)")
    parser.add_argument("--grid", type=int,
                        help="points per circle (solve/verify), grid side (wp), "
                             "sample count (param), radius count (nevanlinna)")
    parser.add_argument("--r-min", dest="r_min", type=float)
    parser.add_argument("--r-max", dest="r_max", type=float)
    parser.add_argument("--function", choices=("wp", "exp", "rational"))
    parser.add_argument("--h", nargs="+", metavar="RE,IM",
                        help="coefficients of h in ascending degree (param)")
    parser.add_argument("--eta", type=int, choices=(0, 1, 2))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output path (stdout if omitted)")
    parser.add_argument("--format", choices=("json", "csv"))
    return parser


def parse_config(argv=None):
    """Flags (and optional --config file) -> validated RunConfig."""
    parser = build_parser()
    args = parser.parse_args(argv)
    values = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "command" in data and data["command"] != args.command:
            raise UsageError(f"config command {data['command']!r} does not match {args.command!r}")
        values.update(data)
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        values[key] = value
    values["command"] = args.command
    converted = {k: _convert(k, v) for k, v in values.items()}
    converted = {k: v for k, v in converted.items() if v is not None}
    cfg = RunConfig(**converted)
    validate(cfg)
    return cfg


def validate(cfg):
    if cfg.format not in ("json", "csv"):
        raise UsageError(f"unknown format {cfg.format!r}")
    if cfg.pair_mode not in ("forward", "explicit"):
        raise UsageError(f"unknown pair mode {cfg.pair_mode!r}")
    if cfg.grid is not None and cfg.grid < 1:
        raise UsageError("grid must be positive")
    if cfg.command in ("solve", "verify"):
        missing = [k for k in ("a", "b", "alpha", "c") if getattr(cfg, k) is None]
        if missing:
            raise UsageError(f"missing required fields: {missing}")
        if cfg.c == 0:
            raise UsageError("shift c must be nonzero")
        if cfg.grid_size < 16:
            raise UsageError("verification grid must have at least 16 points per circle")
        if cfg.pair_mode == "explicit":
            if cfg.c0 is None or cfg.c1 is None:
                raise UsageError("explicit pair mode needs --c0 and --c1")
            res = abs(cfg.c0**3 + cfg.c1**3 - 1)
            if res > solver.PAIR_TOL:
                raise UsageError(f"|c0^3 + c1^3 - 1| = {res:.3e} exceeds {solver.PAIR_TOL}")
    if cfg.command == "verify" and cfg.A is None:
        raise UsageError("verify needs --A")
    if cfg.command == "nevanlinna":
        if not 0 < cfg.r_min < cfg.r_max:
            raise UsageError("need 0 < r_min < r_max")
        if cfg.grid_size < 6:
            raise UsageError("nevanlinna needs at least 6 radii")
    if cfg.function not in ("wp", "exp", "rational"):
        raise UsageError(f"unknown function {cfg.function!r}")


def config_to_dict(cfg):
    """Inverse of the config-file reader (complex values as [re, im])."""
    out = {}
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if f.name in COMPLEX_KEYS:
            v = _pair(v)
        elif f.name in TRIPLE_KEYS or f.name == "h":
            v = [_pair(x) for x in v]
        out[f.name] = v
    return out


# ---------------------------------------------------------------- output

def _clean(x):
    x = float(x)
    return 0.0 if x == 0 else x  # drop negative zero


def _pair(z):
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = _clean(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _to_json(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, int, float, np.integer, np.floating)):
        return _fmt(obj)
    if isinstance(obj, complex):
        return _to_json(_pair(obj), indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float, bool, np.number)) for v in obj) and len(obj) <= 4:
            return "[" + ", ".join(_to_json(v) for v in obj) + "]"
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + _to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class Result:
    data: dict
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    exit_code: int = EXIT_OK


def emit_report(result, fmt, path=None):
    """Write result as JSON or CSV to path (stdout when path is None)."""
    if fmt == "json":
        text = _to_json(result.data) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(result.columns)
        for row in result.rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
        text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------- commands

SOLUTION_COLUMNS = ["case", "A_re", "A_im", "C_re", "C_im", "D_re", "D_im", "c0_re", "c0_im",
                    "c1_re", "c1_im", "mu_re", "mu_im", "nu_re", "nu_im", "c_freedom",
                    "max_abs_residual", "max_rel_residual", "verdict"]


def _solution_result(inst, sol, report):
    mu, nu = solver.bracket_constants(inst)
    case = sol.case if sol is not None else solver.classify(inst)
    pair = sol.pair if sol is not None else None
    data = {
        "case": case.value,
        "A": sol.amp_A if sol else None,
        "C": sol.free_C if sol else None,
        "D": sol.rate_D if sol else None,
        "c0": pair.c0 if pair else None,
        "c1": pair.c1 if pair else None,
        "mu": mu,
        "nu": nu,
        "c_freedom": sol.c_freedom if sol else False,
        "max_abs_residual": report.max_abs_residual,
        "max_rel_residual": report.max_rel_residual,
        "verdict": report.verdict.value,
        "constraint_flags": report.constraint_flags,
        "notes": (sol.notes if sol else []) + report.diagnostics,
    }
    row = [case.value]
    for key in ("A", "C", "D", "c0", "c1", "mu", "nu"):
        v = data[key]
        row += _pair(v) if v is not None else [float("nan")] * 2
    row += [data["c_freedom"], report.max_abs_residual, report.max_rel_residual,
            report.verdict.value]
    return Result(data, SOLUTION_COLUMNS, [row], VERDICT_EXIT[report.verdict])


def run_solve(cfg):
    inst = cfg.instance
    sol, report = solver.solve(inst, cfg.pair, cfg.C, cfg.grid_size)
    return _solution_result(inst, sol, report)


def run_verify(cfg):
    inst = cfg.instance
    case = solver.classify(inst)
    mu, nu = solver.bracket_constants(inst)
    free = False
    if case is solver.Case.CASE3:
        free = solver.c_freedom_check(inst, cfg.D)[0]
    try:
        pair = solver.FermatPair(cfg.A * mu, cfg.A * nu)
    except ValueError:
        pair = None
    sol = solver.CandidateSolution(case=case, amp_A=cfg.A, free_C=cfg.C, rate_D=cfg.D,
                                   pair=pair, mu=mu, nu=nu, c_freedom=free,
                                   alpha=inst.alpha, beta=inst.beta)
    if pair is None:
        sol.notes.append("(A mu, A nu) is not a Fermat pair")
    report = solver.verify_solution(inst, sol, cfg.grid_size)
    return _solution_result(inst, sol, report)


def run_wp(cfg):
    lattice = elliptic.compute_lattice()
    n = cfg.grid_size
    s = (np.arange(n) + 0.5) / n - 0.5
    xx, yy = np.meshgrid(s, s, indexing="ij")
    z = (xx * lattice.omega1 + yy * lattice.omega2).ravel()
    p, dp = elliptic.wp_array(z, lattice)
    ode = np.abs(dp**2 - (4 * p**3 - 1)) / (1 + np.abs(p) ** 3)
    rows = [[zi.real, zi.imag, pi.real, pi.imag, oi] for zi, pi, oi in zip(z, p, ode)]
    data = {
        "omega1": lattice.omega1,
        "omega2": lattice.omega2,
        "area": lattice.area,
        "grid": n,
        "max_scaled_ode_residual": float(np.max(ode)),
        "samples": [{"z": zi, "wp": pi, "wp_prime": di} for zi, pi, di in zip(z, p, dp)],
    }
    return Result(data, ["re_z", "im_z", "re_wp", "im_wp", "ode_residual"], rows)


def run_param(cfg):
    lattice = elliptic.compute_lattice()
    h = fermat.PolynomialH(cfg.h)
    eta = fermat.CubeRootOfUnity(cfg.eta)
    rng = np.random.default_rng(cfg.seed)
    rows, skipped = [], 0
    worst = {"fermat": 0.0, "cubic": 0.0, "relation": 0.0, "eta": 0.0}
    while len(rows) < cfg.grid_size:
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        u = complex(h(z))
        try:
            F, G = fermat.baker_compose(h, eta, z, lattice)
            f_minus, _ = fermat.gross_pair_n3(-u, lattice)
            w = elliptic.wp_eval(u, lattice)
        except (elliptic.PoleProximity, fermat.PoleOfParametrization):
            skipped += 1
            continue
        scale = 1 + abs(w.p) ** 3
        cubic, relation = fermat.identity_residuals(F, w)
        res = {
            "fermat": abs(F**3 + G**3 - 1) / (1 + abs(F) ** 3 + abs(G) ** 3),
            "cubic": cubic / scale,
            "relation": relation / scale,
            "eta": abs(G - eta.eta * f_minus) / (1 + abs(G)),
        }
        for k, v in res.items():
            worst[k] = max(worst[k], v)
        rows.append([z.real, z.imag, F.real, F.imag, G.real, G.imag,
                     res["fermat"], res["cubic"], res["relation"], res["eta"]])
    passed = worst["fermat"] <= 1e-9 and worst["cubic"] <= 1e-8 and \
        worst["relation"] <= 1e-8 and worst["eta"] <= 1e-9
    data = {"h": list(h.coefficients), "eta_index": eta.index, "samples": len(rows),
            "skipped_near_poles": skipped, "max_residuals": worst, "passed": passed}
    columns = ["re_z", "im_z", "re_F", "im_F", "re_G", "im_G", "fermat_residual",
               "cubic_residual", "relation_residual", "eta_residual"]
    return Result(data, columns, rows, EXIT_OK if passed else EXIT_ERROR)


def run_nevanlinna(cfg):
    lattice = elliptic.compute_lattice()
    if cfg.function == "wp":
        f = nevanlinna.wp_evaluator(lattice)
    elif cfg.function == "exp":
        f = nevanlinna.exp_evaluator()
    else:
        f = nevanlinna.rational_evaluator([1, 0, 1], [-2, 1], label="(z^2+1)/(z-2)")
    r_grid = np.linspace(cfg.r_min, cfg.r_max, cfg.grid_size)
    curve = nevanlinna.characteristic_curve(f, r_grid)
    order = nevanlinna.order_estimate(curve)
    columns = ["r", "m", "N", "T"]
    rows = [list(s) for s in curve.samples]
    data = {
        "function": f.label,
        "samples": [dict(zip(columns, s)) for s in curve.samples],
        "order": {"rho_hat": order.rho_hat, "fit_range": list(order.fit_range),
                  "fit_quality": order.fit_quality, "notes": order.notes},
        "diagnostics": curve.diagnostics,
    }
    if cfg.function == "wp":
        ratios = nevanlinna.wp_asymptotic_check(curve, lattice)
        columns.append("ratio")
        for row, (_, ratio) in zip(rows, ratios):
            row.append(ratio)
        for sample, (_, ratio) in zip(data["samples"], ratios):
            sample["ratio"] = ratio
    return Result(data, columns, rows)


RUNNERS = {"solve": run_solve, "verify": run_verify, "wp": run_wp,
           "param": run_param, "nevanlinna": run_nevanlinna}


def dispatch(cfg):
    """Run the command and write its report; returns the exit code."""
    try:
        result = RUNNERS[cfg.command](cfg)
    except (solver.AssumptionViolated, solver.DegenerateCase3) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - every failure maps to exit 1
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        emit_report(result, cfg.format, cfg.out)
    except OSError as exc:
        print(f"cannot write {cfg.out}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for note in result.data.get("notes", []) if cfg.command in ("solve", "verify") else []:
        if "residual_a" in note or "rejected" in note:
            print(note, file=sys.stderr)
    return result.exit_code


def main(argv=None):
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
