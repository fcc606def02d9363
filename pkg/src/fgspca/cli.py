"""Command-line front end.

Every subcommand writes its artifacts into ``--output`` (default ``.``).
Settings resolve as built-in defaults, then a flat ``key=value`` config
file (``--config``, a path or the name of a shipped parameter file), then
explicit flags.

Exit codes: 0 success, 1 usage, 2 data error, 3 solver divergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import core, datasets
from .errors import DataError, DivergenceError, InvalidInputError, NotPSDError
from .solver import SolverControls
from .variance import GROUP_TOL, METHODS, ZERO_TOL, VarianceReport, variance_report

log = logging.getLogger("fgspca")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGENCE = 0, 1, 2, 3
BUILTINS = ("pitprops", "hidden3", "hidden-groups")
DEFAULT_K = {"pitprops": 6, "hidden3": 2, "hidden-groups": 10}
FMT = "{:.4f}"

# flag dest -> default; None means "resolved later"
MODEL_DEFAULTS = {
    "k": None, "tau": 0.05, "lam": 0.05, "lam1": "0.1", "lam2": 0.005, "lam3": 0.0,
    "max_alternations": 200, "alternation_tol": 1e-6, "n_jobs": 1,
}
CONTROL_DEFAULTS = {
    "rho": 1.05, "nu0": 1.0, "delta_star": None, "max_inner": 10000, "max_outer": 100, "outer_tol": 1e-8,
}
DATA_DEFAULTS = {
    "dataset": "pitprops", "mode": "data_matrix", "header": False, "no_noise": False,
    "block_sizes": "12,12,6", "output": ".", "format": "csv", "seed": 0,
}
# config-file spellings that differ from the flag dests
KEY_ALIASES = {"lambda": "lam", "lambda1": "lam1", "lambda2": "lam2", "lambda3": "lam3"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- settings

def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as e:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from e


def _ints(text) -> list[int]:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise UsageError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def read_config_file(name: str) -> dict:
    """Parse a flat key=value file; ``name`` may name a shipped file (e.g. ``pitprops``)."""
    path = Path(name)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    else:
        shipped = resources.files("fgspca").joinpath("data", f"{name}.cfg")
        if not shipped.is_file():
            raise UsageError(f"config file not found: {name}")
        text = shipped.read_text(encoding="utf-8")
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{name}:{n}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out[KEY_ALIASES.get(key, key)] = val
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags into one settings dict."""
    known = {**DATA_DEFAULTS, **MODEL_DEFAULTS, **CONTROL_DEFAULTS}
    settings = dict(known)
    if getattr(args, "config", None):
        for key, val in read_config_file(args.config).items():
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
            settings[key] = val
    for key in known:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            settings[key] = val
    for key in ("header", "no_noise"):
        settings[key] = str(settings[key]).lower() in ("1", "true", "yes")
    for key in ("tau", "lam", "lam2", "lam3", "alternation_tol", "rho", "nu0", "outer_tol"):
        settings[key] = float(settings[key])
    for key in ("max_alternations", "n_jobs", "max_inner", "max_outer", "seed"):
        settings[key] = int(settings[key])
    if settings["delta_star"] is not None:
        settings["delta_star"] = float(settings["delta_star"])
    if settings["k"] is not None:
        settings["k"] = int(settings["k"])
    return settings


def load_dataset(s: dict) -> datasets.DatasetInput:
    name = s["dataset"]
    if name == "pitprops":
        return datasets.pitprops()
    if name == "hidden3":
        return datasets.hidden_factors_covariance(noise=not s["no_noise"])
    if name == "hidden-groups":
        return datasets.hidden_groups_covariance(tuple(_ints(s["block_sizes"])))
    if s["mode"] not in ("data_matrix", "covariance"):
        raise UsageError(f"--mode must be data_matrix or covariance, got {s['mode']!r}")
    return datasets.load_csv(name, has_header=s["header"], mode=s["mode"])


def component_count(s: dict, data: datasets.DatasetInput) -> int:
    if s["k"] is not None:
        return s["k"]
    return DEFAULT_K.get(s["dataset"], min(2, data.p))


def model_config(s: dict, k: int, **override) -> core.FgspcaConfig:
    lam1 = _floats(s["lam1"])
    vals = dict(
        k=k, lam=s["lam"], lam1=lam1[0] if len(lam1) == 1 else tuple(lam1), lam2=s["lam2"],
        tau=s["tau"], lam3=s["lam3"], max_alternations=s["max_alternations"],
        alternation_tol=s["alternation_tol"], n_jobs=s["n_jobs"],
    )
    vals.update(override)
    return core.FgspcaConfig(**vals)


def solver_controls(s: dict, config: core.FgspcaConfig) -> SolverControls:
    delta = s["delta_star"]
    if delta is None:
        delta = core.default_controls(config).delta_star
    return SolverControls(
        rho=s["rho"], nu0=s["nu0"], delta_star=delta, max_inner=s["max_inner"],
        max_outer=s["max_outer"], outer_tol=s["outer_tol"],
    )


# ---------------------------------------------------------------- writers

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FMT.format(float(x))


def write_loadings(path: Path, v: np.ndarray, names) -> None:
    # full precision so that report on this file reproduces the fit exactly
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["variable"] + [f"PC{j + 1}" for j in range(v.shape[1])])
        for name, row in zip(names, v):
            w.writerow([name] + [repr(float(x)) for x in row])


def write_report(path: Path, report: VarianceReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        k = len(report.group_counts)
        w.writerow([""] + [f"PC{j + 1}" for j in range(k)])
        for label, vals in report.rows().items():
            w.writerow([label] + [_fmt(x) for x in vals])


def result_document(result: core.FgspcaResult, data: datasets.DatasetInput, dataset: str) -> dict:
    return {
        "method": result.method,
        "dataset": dataset,
        "variable_names": list(data.variable_names),
        "alternations": int(result.alternations),
        "converged": bool(result.converged),
        "zero_columns": list(result.zero_columns),
        "objective_trace": [float(x) for x in result.objective_trace],
        "a": np.asarray(result.a).tolist(),
        "b": np.asarray(result.b).tolist(),
        "v": np.asarray(result.v).tolist(),
        "report": result.report.to_dict(),
        "config": result.config,
    }


def write_result(out: Path, fmt: str, result: core.FgspcaResult, data, dataset: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        write_loadings(out / "loadings.csv", result.v, data.variable_names)
        write_report(out / "report.csv", result.report)
    with open(out / "result.json", "w", encoding="utf-8") as f:
        json.dump(result_document(result, data, dataset), f, indent=1)


def read_loadings(path: Path, names) -> np.ndarray:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise DataError(f"cannot read loadings {path}: {e.strerror}") from e
    if len(rows) < 2:
        raise DataError(f"{path}: expected a header row and one row per variable")
    body = rows[1:]
    try:
        v = np.array([[float(x) for x in r[1:]] for r in body])
    except ValueError as e:
        raise DataError(f"{path}: non-numeric loading ({e})") from e
    if v.ndim != 2 or v.shape[0] != len(names):
        raise InvalidInputError(f"{path}: {len(body)} loading rows for {len(names)} variables")
    return v


# ---------------------------------------------------------------- commands

def cmd_fit(s: dict, method: str = "fgspca") -> int:
    data = load_dataset(s)
    config = model_config(s, component_count(s, data))
    controls = solver_controls(s, config)
    run = core.fit_nn if method == "nnfgspca" else core.fit
    result = run(data, config, controls)
    write_result(Path(s["output"]), s["format"], result, data, s["dataset"])
    _summary(result)
    return EXIT_OK


def cmd_spca(s: dict) -> int:
    data = load_dataset(s)
    k = component_count(s, data)
    config = model_config(s, k, lam2=0.0)
    lam1 = _floats(s["lam1"])
    result = core.fit_spca(
        data, k, lam=s["lam"], lam1=lam1[0] if len(lam1) == 1 else lam1,
        controls=solver_controls(s, config) if s["delta_star"] is not None else None,
        max_alternations=s["max_alternations"], alternation_tol=s["alternation_tol"],
        n_jobs=s["n_jobs"],
    )
    write_result(Path(s["output"]), s["format"], result, data, s["dataset"])
    _summary(result)
    return EXIT_OK


def cmd_pca(s: dict) -> int:
    data = load_dataset(s)
    result = core.pca(data, component_count(s, data))
    write_result(Path(s["output"]), s["format"], result, data, s["dataset"])
    _summary(result)
    return EXIT_OK


def cmd_threshold(s: dict, cardinalities: str) -> int:
    data = load_dataset(s)
    cards = _ints(cardinalities)
    if s["k"] is not None and s["k"] != len(cards):
        raise UsageError(f"--cardinalities has {len(cards)} entries but --k is {s['k']}")
    result = core.simple_thresholding(data, cards)
    write_result(Path(s["output"]), s["format"], result, data, s["dataset"])
    _summary(result)
    return EXIT_OK


def cmd_gen(s: dict, n: int | None) -> int:
    """Write a built-in dataset to CSV: the exact covariance, or ``n`` sampled
    hidden-factor rows when ``n`` is given."""
    if n is not None:
        if s["dataset"] != "hidden3":
            raise UsageError("sampling (--n) is only available for hidden3")
        data = datasets.sample_hidden_factors(n, seed=s["seed"])
        fname = "hidden3_sample.csv"
    else:
        if s["dataset"] not in BUILTINS:
            raise UsageError(f"gen needs a built-in dataset, one of {BUILTINS}")
        data = load_dataset(s)
        fname = f"{s['dataset']}.csv"
    out = Path(s["output"])
    out.mkdir(parents=True, exist_ok=True)
    with open(out / fname, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(data.variable_names)
        for row in data.matrix:
            w.writerow([repr(float(x)) for x in row])
    print(out / fname)
    return EXIT_OK


def cmd_report(s: dict, loadings: str, method: str, group_tol: float, zero_tol: float) -> int:
    data = load_dataset(s)
    v = read_loadings(Path(loadings), data.variable_names)
    norms = np.linalg.norm(v, axis=0)
    off = (norms > 0) & (np.abs(norms - 1) > 1e-3)
    if np.any(off):
        warnings.warn(f"renormalizing loading columns {np.flatnonzero(off).tolist()} to unit norm",
                      stacklevel=2)
        v[:, off] /= norms[off]
    report = variance_report(data.design, v, method, group_tol=group_tol, zero_tol=zero_tol)
    out = Path(s["output"])
    out.mkdir(parents=True, exist_ok=True)
    write_report(out / "report.csv", report)
    print(f"{method}: cumulative adjusted {_fmt(report.cumulative_adjusted_pct[-1])}%, "
          f"model complexity {report.model_complexity}")
    return EXIT_OK


GRID_FIELDS = ("lambda", "lambda1", "lambda2", "tau", "group_counts", "nonzero_counts",
               "cum_adj_variance", "model_complexity", "converged", "status")


def cmd_grid(s: dict, grids: dict) -> int:
    data = load_dataset(s)
    k = component_count(s, data)
    axes = {key: _floats(grids[key]) if grids[key] is not None else [s[key]] for key in ("lam", "lam1", "lam2", "tau")}
    cells = [(a, b, c, d) for a in axes["lam"] for b in axes["lam1"] for c in axes["lam2"] for d in axes["tau"]]

    def one(cell):
        lam, lam1, lam2, tau = cell
        row = {"lambda": lam, "lambda1": lam1, "lambda2": lam2, "tau": tau}
        try:
            config = model_config(s, k, lam=lam, lam1=lam1, lam2=lam2, tau=tau, n_jobs=1)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                r = core.fit(data, config, solver_controls(s, config))
        except (DivergenceError, InvalidInputError, FloatingPointError) as e:
            return {**row, "status": f"error: {e}"}
        rep = r.report
        return {**row, "group_counts": ";".join(map(str, rep.group_counts)),
                "nonzero_counts": ";".join(map(str, rep.nonzero_counts)),
                "cum_adj_variance": rep.cumulative_adjusted_pct[-1],
                "model_complexity": rep.model_complexity, "converged": r.converged, "status": "ok"}

    if s["n_jobs"] > 1:
        with ThreadPoolExecutor(s["n_jobs"]) as pool:
            rows = list(pool.map(one, cells))
    else:
        rows = [one(c) for c in cells]
    out = Path(s["output"])
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "grid.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(GRID_FIELDS)
        for row in rows:
            w.writerow([_grid_cell(row.get(key, "")) for key in GRID_FIELDS])
    n_ok = sum(r["status"] == "ok" for r in rows)
    print(f"{len(rows)} cells, {n_ok} ok")
    return EXIT_OK


def _grid_cell(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return _fmt(x)
    return x


def cmd_plotdata(s: dict, files: list[str]) -> int:
    series = []
    seen = {}
    for name in files:
        try:
            with open(name, encoding="utf-8") as f:
                doc = json.load(f)
            rep = doc["report"]
            label = doc["method"]
            pev = [float(x) for x in rep["per_pc_adjusted_pct"]]
            cum = [float(x) for x in rep["cumulative_adjusted_pct"]]
            comp = [int(x) for x in (rep["group_counts"] if label in ("fgspca", "nnfgspca")
                                     else rep["nonzero_counts"])]
        except OSError as e:
            raise DataError(f"cannot read result file {name}: {e.strerror}") from e
        except (ValueError, KeyError, TypeError) as e:
            raise DataError(f"{name}: not a result document ({e})") from e
        seen[label] = seen.get(label, 0) + 1
        if seen[label] > 1:
            label = f"{label}#{seen[label]}"
        series.append((label, pev, cum, np.cumsum(comp).tolist()))
    out = Path(s["output"])
    out.mkdir(parents=True, exist_ok=True)
    for fname, idx in (("pev.csv", 1), ("cumvar.csv", 2), ("complexity.csv", 3)):
        with open(out / fname, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["method", "component", "value"])
            for item in series:
                for j, val in enumerate(item[idx], 1):
                    w.writerow([item[0], j, _fmt(val)])
    return EXIT_OK


def _summary(result: core.FgspcaResult) -> None:
    rep = result.report
    print(f"{result.method}: k={len(rep.group_counts)} converged={result.converged} "
          f"alternations={result.alternations} cumulative adjusted {_fmt(rep.cumulative_adjusted_pct[-1])}% "
          f"complexity {rep.model_complexity}")


# ---------------------------------------------------------------- parser

def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data and output")
    g.add_argument("--dataset", help=f"built-in name {BUILTINS} or a CSV path (default pitprops)")
    g.add_argument("--mode", choices=("data_matrix", "covariance"), help="how to read a CSV dataset")
    g.add_argument("--header", action="store_true", default=None, help="CSV has a header row")
    g.add_argument("--no-noise", dest="no_noise", action="store_true", default=None,
                   help="hidden3 without the unit noise terms")
    g.add_argument("--block-sizes", dest="block_sizes", help="hidden-groups block sizes (default 12,12,6)")
    g.add_argument("--config", help="key=value file or shipped parameter set name")
    g.add_argument("--output", "-o", help="output directory (default .)")
    g.add_argument("--format", choices=("csv", "json"), help="csv writes loadings/report too (default)")
    g.add_argument("--seed", type=int)
    g.add_argument("-v", "--verbose", action="store_true")


def _add_model(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--k", type=int, help="number of components")
    g.add_argument("--tau", type=float)
    g.add_argument("--lambda", dest="lam", type=float, help="ridge weight")
    g.add_argument("--lambda1", dest="lam1", help="selection weight, scalar or comma list of k")
    g.add_argument("--lambda2", dest="lam2", type=float, help="grouping weight")
    g.add_argument("--lambda3", dest="lam3", type=float, help="non-negativity weight")
    g.add_argument("--max-alternations", dest="max_alternations", type=int)
    g.add_argument("--alternation-tol", dest="alternation_tol", type=float)
    g.add_argument("--n-jobs", dest="n_jobs", type=int)
    c = p.add_argument_group("solver")
    c.add_argument("--rho", type=float)
    c.add_argument("--nu0", type=float)
    c.add_argument("--delta-star", dest="delta_star", type=float)
    c.add_argument("--max-inner", dest="max_inner", type=int)
    c.add_argument("--max-outer", dest="max_outer", type=int)
    c.add_argument("--outer-tol", dest="outer_tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fgspca", description="Feature grouping and sparse PCA")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("fit", "fit FGSPCA"), ("nnfit", "fit FGSPCA with the non-negativity penalty"),
                       ("spca", "fit lasso sparse PCA"), ("pca", "ordinary PCA")):
        p = sub.add_parser(name, help=text)
        _add_common(p)
        _add_model(p)
    p = sub.add_parser("threshold", help="simple thresholding of PCA loadings")
    _add_common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--cardinalities", required=True, help="comma list, one per component")
    p = sub.add_parser("gen", help="write a built-in dataset as CSV")
    _add_common(p)
    p.add_argument("--n", type=int, help="sample this many hidden3 rows instead")
    p = sub.add_parser("report", help="variance report for supplied loadings")
    _add_common(p)
    p.add_argument("--loadings", required=True, help="loadings.csv (variable column then PCs)")
    p.add_argument("--method", choices=METHODS, default="fgspca")
    p.add_argument("--group-tol", dest="group_tol", type=float, default=GROUP_TOL)
    p.add_argument("--zero-tol", dest="zero_tol", type=float, default=ZERO_TOL)
    p = sub.add_parser("grid", help="fit over a grid of penalties")
    _add_common(p)
    _add_model(p)
    p.add_argument("--lambda-grid", dest="lam_grid")
    p.add_argument("--lambda1-grid", dest="lam1_grid")
    p.add_argument("--lambda2-grid", dest="lam2_grid")
    p.add_argument("--tau-grid", dest="tau_grid")
    p = sub.add_parser("plotdata", help="long-format series from result.json files")
    p.add_argument("results", nargs="+")
    p.add_argument("--output", "-o")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _dispatch(args, s: dict) -> int:
    cmd = args.command
    if cmd == "fit":
        return cmd_fit(s)
    if cmd == "nnfit":
        return cmd_fit(s, method="nnfgspca")
    if cmd == "spca":
        return cmd_spca(s)
    if cmd == "pca":
        return cmd_pca(s)
    if cmd == "threshold":
        return cmd_threshold(s, args.cardinalities)
    if cmd == "gen":
        return cmd_gen(s, args.n)
    if cmd == "report":
        return cmd_report(s, args.loadings, args.method, args.group_tol, args.zero_tol)
    if cmd == "grid":
        grids = {"lam": args.lam_grid, "lam1": args.lam1_grid, "lam2": args.lam2_grid, "tau": args.tau_grid}
        return cmd_grid(s, grids)
    return cmd_plotdata(s, args.results)


def _write_error(out, code: int, exc: BaseException) -> None:
    try:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        with open(path / "error.json", "w", encoding="utf-8") as f:
            json.dump({"exit_code": code, "type": type(exc).__name__, "message": str(exc)}, f, indent=1)
    except OSError:
        pass


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = getattr(args, "output", None) or "."
    try:
        s = resolve(args)
        out = s["output"]
        code = _dispatch(args, s)
    except (UsageError, InvalidInputError) as e:
        code, exc = (EXIT_DATA, e) if isinstance(e, NotPSDError) else (EXIT_USAGE, e)
    except (DataError, OSError) as e:
        code, exc = EXIT_DATA, e
    except DivergenceError as e:
        code, exc = EXIT_DIVERGENCE, e
    else:
        return code
    print(f"fgspca: error: {exc}", file=sys.stderr)
    _write_error(out, code, exc)
    return code


if __name__ == "__main__":
    sys.exit(main())
