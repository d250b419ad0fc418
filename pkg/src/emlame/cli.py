"""Command-line front end.

    emlame solve --alpha=-1 --beta=0 --k2=0.5
    emlame sweep --table 4 --paper-mode
    emlame sweep --alpha=-1 --k2=0.35 --sweep beta:0.4:-2:-0.2
    emlame bands --sweep k2:0:0.9:0.1
    emlame wavefunction --alpha=-1 --beta=-1.2 --k2=0 --level 0
    emlame verify --table 2

Exit codes: 0 success (empty spectra included), 1 invalid configuration,
2 numerical failure, 3 verification failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Optional

import numpy as np

from .auxmap import classify_beta
from .lame import band_edge_energies
from .model import ModelParams, derive

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3

CSV_COLUMNS = ["var", "value", "x0", "Vmin", "V0", "energies"]

# flag sets reproducing the four published tables
TABLES = {
    1: {"alpha_eq_gamma": True, "k2": 0.0, "sweep": "beta:-2:2:0.1"},
    2: {"alpha": -1.0, "beta": 0.0, "sweep": "k2:0.9:0:-0.1"},
    3: {"alpha": -1.0, "k2": 0.0, "sweep": "beta:0.4:-2:-0.2"},
    4: {"alpha": -1.0, "k2": 0.35, "sweep": "beta:0.4:-2:-0.2"},
}

_FLAG_DEFAULTS = {
    "alpha": None, "beta": 0.0, "alpha_eq_gamma": False, "k2": 0.0, "sweep": None,
    "grid_points": 2000, "lambda_depth": 60.0, "format": "csv", "out": None,
    "paper_mode": False, "continuous": False, "jobs": 1, "level": 0, "points": 401,
    "with_oracle": False, "table": None, "label": None,
}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 12) for i in range(max(n, 0))]


def parse_sweep(spec: str) -> Sweep:
    try:
        var, a, b, s = spec.split(":")
        sw = Sweep(var, float(a), float(b), float(s))
    except ValueError as exc:
        raise ConfigError(f"bad sweep spec {spec!r}; expected var:from:to:step") from exc
    if sw.variable not in ("beta", "k2"):
        raise ConfigError("sweep variable must be beta or k2")
    if sw.step == 0 or (sw.stop - sw.start) * sw.step < 0:
        raise ConfigError("sweep step has the wrong sign or is zero")
    if sw.variable == "k2" and not all(0.0 <= v < 1.0 for v in (sw.start, sw.stop)):
        raise ConfigError("k2 sweep must stay in [0, 1)")
    return sw


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; keys are flag names (dashes or underscores)."""
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_string("[run]\n" + fh.read())
    out = {}
    for name, raw in cp["run"].items():
        key = name.replace("-", "_")
        if key not in _FLAG_DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        default = _FLAG_DEFAULTS[key]
        if isinstance(default, bool):
            out[key] = cp["run"].getboolean(name)
        elif isinstance(default, int) and not isinstance(default, bool):
            out[key] = int(raw)
        elif isinstance(default, float) or key in ("alpha",):
            out[key] = float(raw)
        elif key == "table":
            out[key] = int(raw)
        else:
            out[key] = raw
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--alpha-eq-gamma", action="store_true", default=None,
                        help="use alpha = gamma = -(1 + beta)/2")
    common.add_argument("--k2", type=float)
    common.add_argument("--sweep", help="var:from:to:step with var in {beta, k2}")
    common.add_argument("--table", type=int, choices=sorted(TABLES),
                        help="preset flags reproducing a published table")
    common.add_argument("--grid-points", type=int)
    common.add_argument("--lambda-depth", type=float)
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--out")
    common.add_argument("--paper-mode", action="store_true", default=None,
                        help="two-decimal output, round half to even")
    common.add_argument("--continuous", action="store_true", default=None,
                        help="continuous potential convention (see model docs)")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("--with-oracle", action="store_true", default=None,
                        help="add shooting-oracle deltas to JSON rows")
    common.add_argument("--label", choices=["beta", "k2"], help="var column for solve")

    p = _Parser(prog="emlame", description="Bound states of the effective-mass Lame model")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="spectrum for one parameter set")
    sub.add_parser("sweep", parents=[common], help="spectra over a parameter grid")
    sub.add_parser("bands", parents=[common], help="band-edge energies")
    wf = sub.add_parser("wavefunction", parents=[common], help="sampled psi_n(x)")
    wf.add_argument("--level", type=int)
    wf.add_argument("--points", type=int)
    sub.add_parser("verify", parents=[common], help="compare with the shooting oracle")
    return p


def resolve_config(ns: argparse.Namespace) -> dict:
    cfg = dict(_FLAG_DEFAULTS)
    if getattr(ns, "config", None):
        cfg.update(read_config_file(ns.config))
    table = ns.table if ns.table is not None else cfg.get("table")
    if table is not None:
        cfg.update(TABLES[int(table)])
    for key in _FLAG_DEFAULTS:
        val = getattr(ns, key, None)
        if val is not None:
            cfg[key] = val
    cfg["command"] = ns.command
    if cfg["grid_points"] < 10:
        raise ConfigError("grid-points must be at least 10")
    if cfg["lambda_depth"] <= 0:
        raise ConfigError("lambda-depth must be positive")
    if cfg["alpha"] is None and not cfg["alpha_eq_gamma"]:
        cfg["alpha"] = -1.0
    return cfg


def make_params(cfg: dict, **override) -> ModelParams:
    c = dict(cfg, **override)
    try:
        if c["alpha_eq_gamma"]:
            return ModelParams.alpha_eq_gamma(float(c["beta"]), float(c["k2"]),
                                              continuous=bool(c["continuous"]))
        return ModelParams(alpha=float(c["alpha"]), beta=float(c["beta"]), k2=float(c["k2"]),
                           continuous=bool(c["continuous"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def fmt(x: float, paper: bool) -> str:
    if paper:
        # drop float noise first so that e.g. 0.7749999999999999 rounds as 0.775
        d = Decimal(f"{float(x):.12g}").quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN)
        return str(d + 0)  # + 0 turns -0.00 into 0.00
    return repr(float(x))


def solve_row(args) -> dict:
    """One table row; failures are reported in the row."""
    cfg, var, value = args
    from .spectrum import find_bound_states

    params = make_params(cfg, **{var: value})
    dc = derive(params)
    row = {"var": var, "value": value, "alpha": params.alpha, "beta": params.beta,
           "k2": params.k2, "x0": dc.x0, "Vmin": dc.Vmin_interior, "V0": dc.V0,
           "energies": [], "band_edges": list(band_edge_energies(params.k2)),
           "beta_case": classify_beta(params.beta).value}
    try:
        states = find_bound_states(params, grid_points=cfg["grid_points"],
                                   lambda_depth=cfg["lambda_depth"], normalize=False)
        row["energies"] = [s.E for s in states]
    except Exception as exc:  # recorded in-row, the sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    if cfg.get("with_oracle"):
        from .oracle import ShootingConfig, oracle_roots

        ref = oracle_roots(params, ShootingConfig(lambda_depth=cfg["lambda_depth"]))
        if len(ref) == len(row["energies"]):
            row["oracle_delta"] = float(np.max(np.abs(ref - row["energies"]), initial=0.0))
        else:
            row["oracle_delta"] = None
            row["oracle_energies"] = ref.tolist()
    return row


def rows_to_csv(rows: list[dict], paper: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r["var"], fmt(r["value"], paper), fmt(r["x0"], paper), fmt(r["Vmin"], paper),
                    fmt(r["V0"], paper), ";".join(fmt(e, paper) for e in r["energies"])])
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    """Inverse of ``rows_to_csv`` (data mode)."""
    out = []
    for r in csv.DictReader(io.StringIO(text)):
        out.append({"var": r["var"], "value": float(r["value"]), "x0": float(r["x0"]),
                    "Vmin": float(r["Vmin"]), "V0": float(r["V0"]),
                    "energies": [float(e) for e in r["energies"].split(";") if e]})
    return out


def _emit(text: str, cfg: dict) -> None:
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_rows(rows: list[dict], cfg: dict) -> None:
    if cfg["format"] == "json":
        _emit(json.dumps(rows, indent=1) + "\n", cfg)
    else:
        _emit(rows_to_csv(rows, cfg["paper_mode"]), cfg)


def _run_rows(cfg: dict, var: str, values: list[float]) -> list[dict]:
    jobs = [(cfg, var, v) for v in values]
    if cfg["jobs"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as ex:
            return list(ex.map(solve_row, jobs))
    return [solve_row(j) for j in jobs]


def cmd_solve(cfg: dict) -> int:
    var = cfg["label"] or ("beta" if cfg["k2"] == 0.0 else "k2")
    make_params(cfg)
    rows = _run_rows(cfg, var, [float(cfg[var])])
    _emit_rows(rows, cfg)
    return EXIT_NUMERIC if any("error" in r for r in rows) else EXIT_OK


def cmd_sweep(cfg: dict) -> int:
    if not cfg["sweep"]:
        raise ConfigError("sweep requires --sweep or --table")
    sw = parse_sweep(cfg["sweep"])
    values = sw.values()
    for v in values:
        make_params(cfg, **{sw.variable: v})
    rows = _run_rows(cfg, sw.variable, values)
    _emit_rows(rows, cfg)
    return EXIT_NUMERIC if any("error" in r for r in rows) else EXIT_OK


def cmd_bands(cfg: dict) -> int:
    ks = parse_sweep(cfg["sweep"]).values() if cfg["sweep"] else [cfg["k2"]]
    rows = []
    for k2 in ks:
        if not 0.0 <= k2 < 1.0:
            raise ConfigError("k2 must lie in [0, 1)")
        e = band_edge_energies(k2)
        rows.append({"k2": k2, "E0": e[0], "E1": e[1], "E2": e[2]})
    if cfg["format"] == "json":
        _emit(json.dumps(rows, indent=1) + "\n", cfg)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k2", "E0", "E1", "E2"])
        for r in rows:
            w.writerow([fmt(r[k], cfg["paper_mode"]) for k in ("k2", "E0", "E1", "E2")])
        _emit(buf.getvalue(), cfg)
    return EXIT_OK


def cmd_wavefunction(cfg: dict) -> int:
    from .spectrum import find_bound_states
    from .wavefunc import assemble, node_count, sample

    params = make_params(cfg)
    states = find_bound_states(params, grid_points=cfg["grid_points"],
                               lambda_depth=cfg["lambda_depth"])
    if not 0 <= cfg["level"] < len(states):
        raise ConfigError(f"level {cfg['level']} not available ({len(states)} bound states)")
    wf = assemble(states[cfg["level"]])
    x, psi = sample(wf, cfg["points"])
    meta = {"n": cfg["level"], "E": wf.bound_state.E, "C_norm": wf.C_norm,
            "parity": wf.parity.value, "nodes": node_count(wf), "x0": wf.dc.x0}
    if cfg["format"] == "json":
        _emit(json.dumps({**meta, "x": x.tolist(), "psi": psi.tolist()}) + "\n", cfg)
    else:
        lines = [f"# {k}={v}" for k, v in meta.items()] + ["x,psi"]
        lines += [f"{a!r},{b!r}" for a, b in zip(x.tolist(), psi.tolist())]
        _emit("\n".join(lines) + "\n", cfg)
    return EXIT_OK


def cmd_verify(cfg: dict, tol: float = 1e-3) -> int:
    from .oracle import ShootingConfig, oracle_roots
    from .spectrum import find_bound_states

    if cfg["sweep"]:
        sw = parse_sweep(cfg["sweep"])
        configs = [(sw.variable, v) for v in sw.values()]
    else:
        configs = [("beta", cfg["beta"])]
    rows, failed = [], 0
    for var, v in configs:
        params = make_params(cfg, **{var: v})
        ana = np.array([s.E for s in find_bound_states(params, grid_points=cfg["grid_points"],
                                                       lambda_depth=cfg["lambda_depth"],
                                                       normalize=False)])
        ref = oracle_roots(params, ShootingConfig(lambda_depth=cfg["lambda_depth"]))
        ok = len(ana) == len(ref)
        delta = float(np.max(np.abs(ana - ref), initial=0.0)) if ok else math.inf
        ok = ok and delta < tol
        failed += not ok
        rows.append({"var": var, "value": v, "analytic": ana.tolist(), "oracle": ref.tolist(),
                     "delta": delta, "pass": ok})
    if cfg["format"] == "json":
        _emit(json.dumps(rows, indent=1) + "\n", cfg)
    else:
        lines = ["var,value,n_analytic,n_oracle,delta,status"]
        lines += [f"{r['var']},{r['value']!r},{len(r['analytic'])},{len(r['oracle'])},"
                  f"{r['delta']:.3e},{'PASS' if r['pass'] else 'FAIL'}" for r in rows]
        lines.append(f"# {len(rows) - failed}/{len(rows)} pass")
        _emit("\n".join(lines) + "\n", cfg)
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "bands": cmd_bands,
            "wavefunction": cmd_wavefunction, "verify": cmd_verify}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        return COMMANDS[cfg["command"]](cfg)
    except (ConfigError, OSError, configparser.Error) as exc:
        print(f"emlame: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"emlame: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
