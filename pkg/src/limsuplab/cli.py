"""Command-line front end: seeded experiments persisted as CSV/JSONL.

One subcommand per experiment family.  Option values come from flags
first, then from an INI config file (``--config``; section ``[common]``
plus one section per subcommand), then from built-in defaults.  Every
result file carries a config echo sufficient to reproduce the run, and
re-running an identical config byte-reproduces the payload (the
wall-clock header line is the only varying part).  All writes are
atomic: temp file in the target directory, then rename.

Exit statuses: 0 success, 1 usage/validation, 2 resource cap (including
exhausted certified precision), 3 internal invariant violation.
``LIMSUPLAB_OUTPUT_DIR`` sets the default output directory.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import random
import re
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import __version__
from . import counting as ct
from . import functions as fn
from . import geodesics as geo
from . import horoballs as hb
from . import systems as sy
from . import ubiquity as ub
from .errors import (InternalInvariantError, PrecisionExhausted,
                     ResourceCapError, UsageError)

OUTPUT_DIR_ENV = "LIMSUPLAB_OUTPUT_DIR"


# -- option tables --------------------------------------------------------

@dataclass(frozen=True)
class _Opt:
    name: str                    # flag spelling without the leading --
    kind: str                    # int | float | rational | text | ints | choice:a,b
    default: Optional[str] = None  # raw-text default; None + required=False -> absent
    required: bool = False
    help: str = ""


_COMMON: Tuple[_Opt, ...] = (
    _Opt("seed", "int", "0", help="seed for every randomised choice"),
    _Opt("output", "text", None, help="output file (default: command name "
         "under $%s or the working directory)" % OUTPUT_DIR_ENV),
    _Opt("format", "choice:csv,jsonl", "csv", help="output format"),
    _Opt("workers", "int", None, help="worker processes for independent "
         "samples (default: machine parallelism)"),
)

_COMMANDS: Dict[str, Tuple[_Opt, ...]] = {
    "classify": (
        _Opt("series", "text", help="full summand, e.g. \"r^1 * (r^-2)\""),
        _Opt("psi", "text", help="approximating function (with --gauge)"),
        _Opt("gauge", "text", help="dimension gauge applied to psi"),
        _Opt("weight", "rational", help="weight power u in r^u (default 0 "
             "for --series, 1 for --psi)"),
    ),
    "critical-exponent": (
        _Opt("psi", "text", help="approximating function r^-tau ..."),
        _Opt("weight", "rational", help="weight power u (with --psi)"),
        _Opt("omega", "rational", help="exp(-r^omega) rate (with --ambient)"),
        _Opt("ambient", "int", help="ambient dimension n (with --omega)"),
    ),
    "stage-scan": (
        _Opt("psi", "text", required=True),
        _Opt("k", "int", required=True, help="stage base k > 1"),
        _Opt("n-lo", "int", required=True),
        _Opt("n-hi", "int", required=True),
        _Opt("full-cap", "int", str(sy.FULL_SWEEP_CAP)),
        _Opt("subset-cap", "int", str(sy.SUBSET_SWEEP_CAP)),
    ),
    "ubiquity": (
        _Opt("rho", "text", required=True, help="uniform stage radius rho(r)"),
        _Opt("k", "int", required=True),
        _Opt("n-lo", "int", required=True),
        _Opt("n-hi", "int", required=True),
        _Opt("balls", "int", "20", help="number of seeded test intervals"),
        _Opt("min-measure", "rational", "1/10",
             help="smallest allowed test-interval length"),
        _Opt("target", "rational", "1/2", help="ratio target for n_min"),
        _Opt("q-cap", "int", str(ub.MAX_UNIFORM_Q)),
        _Opt("system", "choice:rationals,rationals-coprime,ford", "rationals"),
    ),
    "schmidt": (
        _Opt("psi", "text", required=True),
        _Opt("N", "int", required=True, help="counting horizon q <= N"),
        _Opt("samples", "int", "200"),
    ),
    "cf": (
        _Opt("x", "rational", required=True,
             help="direction; decimals are read exactly"),
        _Opt("depth", "int", "40"),
    ),
    "excursions": (
        _Opt("x", "rational", help="rational direction"),
        _Opt("quotients", "ints", help="partial quotients a1,a2,..."),
        _Opt("T", "float", required=True, help="time horizon"),
        _Opt("step", "float", help="sample step (switches to the sampled "
             "engine; --x only)"),
    ),
    "loglaw": (
        _Opt("x", "rational", help="rational direction"),
        _Opt("quotients", "ints", help="partial quotients a1,a2,..."),
        _Opt("T", "float", required=True),
        _Opt("alpha", "float", "0.0", help="drift subtracted before log t"),
    ),
    "horoballs": (
        _Opt("lam", "rational", "1/4", help="radius window is [lam*R, R)"),
        _Opt("r-hi", "rational", "1/8", help="largest radius bound R"),
        _Opt("factor", "rational", "1/2", help="geometric step between "
             "successive R values"),
        _Opt("points", "int", "13"),
        _Opt("base", "text", "0,1", help="base window a,b"),
    ),
    "disjointness": (
        _Opt("q-max", "int", required=True),
        _Opt("identity-q-max", "int", "40"),
    ),
}


def _dest(name: str) -> str:
    return name.replace("-", "_")


def _convert(opt: _Opt, raw: str):
    try:
        if opt.kind == "int":
            return int(raw)
        if opt.kind == "float":
            v = float(raw)
            if math.isnan(v) or math.isinf(v):
                raise ValueError(raw)
            return v
        if opt.kind == "rational":
            return Fraction(raw)
        if opt.kind == "ints":
            parts = [t for t in re.split(r"[,\s]+", raw.strip()) if t]
            return [int(t) for t in parts]
        if opt.kind.startswith("choice:"):
            allowed = opt.kind.split(":", 1)[1].split(",")
            if raw not in allowed:
                raise ValueError("expected one of %s" % ", ".join(allowed))
            return raw
        return raw
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError("--%s: cannot read %r (%s)" % (opt.name, raw, exc))


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; we need that status for
    resource caps, so usage problems are re-raised as UsageError."""

    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="limsuplab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")
    for command, opts in _COMMANDS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", default=None,
                       help="INI file with [common] and [%s] sections" % command)
        for opt in opts + _COMMON:
            p.add_argument("--" + opt.name, dest=_dest(opt.name),
                           default=None, help=opt.help)
    return parser


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    options: Dict[str, object]       # typed, validated values
    raw: Dict[str, str]              # merged raw text, echoed into outputs


def parse_config(argv: Optional[Sequence[str]] = None) -> ExperimentConfig:
    ns = _build_parser().parse_args(argv)
    if not ns.command:
        raise UsageError("missing command (see --help)")
    file_vals: Dict[str, str] = {}
    if ns.config:
        ini = configparser.ConfigParser()
        ini.optionxform = str        # option names are case-sensitive (--N)
        read = ini.read(ns.config)
        if not read:
            raise UsageError("cannot read config file %r" % ns.config)
        for section in ("common", ns.command):
            if ini.has_section(section):
                for key, val in ini.items(section):
                    file_vals[_dest(key)] = val
    raw: Dict[str, str] = {}
    typed: Dict[str, object] = {}
    for opt in _COMMANDS[ns.command] + _COMMON:
        dest = _dest(opt.name)
        value = getattr(ns, dest)
        if value is None:
            value = file_vals.get(dest)
        if value is None:
            value = opt.default
        if value is None:
            if opt.required:
                raise UsageError("missing required option --%s" % opt.name)
            typed[dest] = None
            continue
        raw[dest] = str(value)
        typed[dest] = _convert(opt, str(value))
    if typed["workers"] is None:
        typed["workers"] = os.cpu_count() or 1
    return ExperimentConfig(ns.command, typed, raw)


# -- result envelope and serialization ------------------------------------

@dataclass(frozen=True)
class ResultEnvelope:
    config: Dict[str, object]        # {"command": ..., "options": {raw...}}
    version: str
    wall_clock_s: float
    columns: Tuple[str, ...]
    rows: List[Dict[str, object]]
    summary: str


def _plain(value):
    """Serializable scalar: exact text for rationals, repr floats."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return value
    if isinstance(value, (int, str, bool)) or value is None:
        return value
    return str(value)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _render_csv(env: ResultEnvelope) -> str:
    cfg = " ".join("%s=%s" % (k, v)
                   for k, v in sorted(env.config["options"].items()))
    head = [
        "# limsuplab %s" % env.version,
        "# config: command=%s %s" % (env.config["command"], cfg),
        "# wall_clock_s: %.3f" % env.wall_clock_s,
        "# summary: %s" % env.summary,
    ]
    body = io.StringIO()
    writer = csv.writer(body, lineterminator="\n")
    writer.writerow(env.columns)
    for row in env.rows:
        writer.writerow([_csv_cell(_plain(row[c])) for c in env.columns])
    return "\n".join(head) + "\n" + body.getvalue()


def _render_jsonl(env: ResultEnvelope) -> str:
    meta = {
        "meta": {
            "version": env.version,
            "config": env.config,
            "columns": list(env.columns),
            "summary": env.summary,
            "wall_clock_s": round(env.wall_clock_s, 3),
        }
    }
    lines = [json.dumps(meta, sort_keys=True)]
    for row in env.rows:
        lines.append(json.dumps({c: _plain(row[c]) for c in env.columns}))
    return "\n".join(lines) + "\n"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".limsuplab-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _output_path(config: ExperimentConfig) -> str:
    if config.options.get("output"):
        return str(config.options["output"])
    base = os.environ.get(OUTPUT_DIR_ENV, ".")
    return os.path.join(base, "%s.%s" % (config.command,
                                         config.options["format"]))


# -- subcommand handlers ---------------------------------------------------

_Handler = Callable[[Dict[str, object]],
                    Tuple[Tuple[str, ...], List[Dict[str, object]], str]]


def _parse_form(text: str, small: bool = False) -> fn.FunctionForm:
    return fn.parse_function(text, fn.Regime.SMALL if small else fn.Regime.LARGE)


def _run_classify(o):
    weight = o["weight"]
    if o["series"]:
        if o["psi"] or o["gauge"]:
            raise UsageError("--series excludes --psi/--gauge")
        spec = fn.SeriesSpec(weight if weight is not None else Fraction(0),
                             _parse_form(o["series"]))
        flavor = "Khintchine"
    elif o["psi"]:
        gauge = _parse_form(o["gauge"], small=True) if o["gauge"] else None
        spec = fn.SeriesSpec(weight if weight is not None else Fraction(1),
                             _parse_form(o["psi"]), gauge)
        flavor = "Hausdorff" if gauge else "Khintchine"
    else:
        raise UsageError("classify needs --series or --psi")
    cls = fn.series_classify(spec)
    red = cls.reduced
    row = {
        "verdict": cls.verdict.name.title(),
        "reduced_A": red.A, "reduced_B": red.B, "reduced_C": red.C,
        "exp_coeff": red.exp_coeff,
        "reason": cls.reason,
    }
    if cls.convergent:
        tail = ("Hausdorff convergence case: H^f(W) = 0"
                if flavor == "Hausdorff"
                else "Khintchine convergence case: null set")
        summary = "Convergent ⇒ " + tail
    else:
        tail = ("Hausdorff divergence case: H^f(W) = ∞"
                if flavor == "Hausdorff"
                else "Khintchine divergence case: full measure")
        summary = "Divergent ⇒ " + tail
    return tuple(row), [row], summary


def _run_critical_exponent(o):
    by_psi = o["psi"] is not None
    by_omega = o["omega"] is not None or o["ambient"] is not None
    if by_psi == by_omega:
        raise UsageError("give either --psi/--weight or --omega/--ambient")
    if by_psi:
        weight = o["weight"] if o["weight"] is not None else Fraction(1)
        value = fn.critical_exponent(_parse_form(o["psi"]), weight)
        row = {"kind": "hausdorff", "weight": weight, "value": value}
    else:
        if o["omega"] is None or o["ambient"] is None:
            raise UsageError("--omega and --ambient go together")
        value = fn.log_critical_exponent(o["omega"], o["ambient"])
        row = {"kind": "logarithmic", "omega": o["omega"],
               "ambient": o["ambient"], "value": value}
    summary = "inf" if value == math.inf else str(value)
    return tuple(row), [row], summary


def _run_stage_scan(o):
    stage = sy.per_point_stage(_parse_form(o["psi"]), o["k"])
    scan = sy.stage_measure_scan(sy.classical_rationals(), stage,
                                 o["n_lo"], o["n_hi"],
                                 full_cap=o["full_cap"],
                                 subset_cap=o["subset_cap"])
    rows = []
    partial = 0.0
    truncated = 0
    for rec in scan.records:
        partial += float(rec.value)
        truncated += rec.truncated
        rows.append({
            "n": rec.n, "count": rec.count,
            "lower": float(rec.lower), "upper": float(rec.upper),
            "measure": float(rec.value), "partial_sum": partial,
            "method": rec.method, "truncated": rec.truncated,
        })
    summary = ("stage measures n=%d..%d: partial sum %.6g"
               " (%d truncated stage%s)"
               % (o["n_lo"], o["n_hi"], partial, truncated,
                  "" if truncated == 1 else "s"))
    columns = ("n", "count", "lower", "upper", "measure", "partial_sum",
               "method", "truncated")
    return columns, rows, summary


def _seeded_balls(count: int, min_measure: Fraction, seed: int):
    """Deterministic exact test intervals inside [0,1]."""
    if not 0 < min_measure <= 1:
        raise UsageError("min-measure must lie in (0, 1]")
    rnd = random.Random(seed)
    lo = min_measure / 2
    balls = []
    for _ in range(count):
        radius = lo + (Fraction(1, 2) - lo) * Fraction(rnd.randrange(1000), 1000)
        span = 1 - 2 * radius
        center = radius + span * Fraction(rnd.randrange(10 ** 6), 10 ** 6)
        balls.append((center, radius))
    return balls


def _run_ubiquity(o):
    systems = {
        "rationals": lambda: sy.classical_rationals(),
        "rationals-coprime": lambda: sy.classical_rationals(coprime_only=True),
        "ford": lambda: sy.ford_horoballs(),
    }
    system = systems[o["system"]]()
    if o["balls"] < 1:
        raise UsageError("need at least one ball")
    balls = _seeded_balls(o["balls"], o["min_measure"], o["seed"])
    reports = ub.estimate_kappa(system, _parse_form(o["rho"]), o["k"], balls,
                                range(o["n_lo"], o["n_hi"] + 1),
                                target=o["target"], q_cap=o["q_cap"])
    rows = []
    for i, rep in enumerate(reports):
        for n, ratio in rep.per_n:
            rows.append({
                "ball": i, "center": rep.ball[0], "radius": rep.ball[1],
                "n": n, "ratio": float(ratio), "ratio_exact": str(ratio),
                "kappa_hat": float(rep.kappa_hat),
                "n_min": rep.n_min,
            })
    kappa = ub.empirical_kappa(reports)
    summary = ("empirical kappa = %s (%.6g) over %d balls, n=%d..%d"
               % (kappa, float(kappa), len(balls), o["n_lo"], o["n_hi"]))
    columns = ("ball", "center", "radius", "n", "ratio", "ratio_exact",
               "kappa_hat", "n_min")
    return columns, rows, summary


def _schmidt_count(args):
    seed, index, N, psi = args
    x = ct.sample_x(seed, index)
    return index, x, ct.count_R(x, N, psi)


def _run_schmidt(o):
    psi = _parse_form(o["psi"])
    if o["samples"] < 1:
        raise UsageError("samples must be >= 1")
    if o["workers"] > 1 and o["samples"] > 1:
        pred = ct.schmidt_prediction(psi, o["N"])
        jobs = [(o["seed"], i, o["N"], psi) for i in range(o["samples"])]
        with ProcessPoolExecutor(max_workers=o["workers"]) as pool:
            got = sorted(pool.map(_schmidt_count, jobs, chunksize=8))
        records = []
        for i, x, c in got:
            ratio = c / pred.value if pred.value > 0 else math.inf
            records.append(ct.CountRecord(x, o["N"], c, pred.value, ratio))
        ratios = [r.ratio for r in records]
        mean = sum(ratios) / len(ratios)
        var = sum((r - mean) ** 2 for r in ratios) / len(ratios)
        result = ct.SchmidtSummary(psi, o["N"], o["seed"], mean,
                                   math.sqrt(var), tuple(records),
                                   pred.condition_ok)
    else:
        result = ct.schmidt_experiment(psi, o["N"], o["samples"], o["seed"])
    rows = [{"index": i, "x": r.x, "count": r.count,
             "prediction": r.prediction, "ratio": r.ratio}
            for i, r in enumerate(result.records)]
    summary = ("mean ratio %.6f, stddev %.6f over %d samples (N=%d%s)"
               % (result.mean_ratio, result.stddev, len(result.records),
                  o["N"], "" if result.condition_ok
                  else "; monotonicity condition violated"))
    return ("index", "x", "count", "prediction", "ratio"), rows, summary


def _run_cf(o):
    exp = geo.cf_expand(o["x"], o["depth"])
    rows = []
    xv = o["x"]
    for n, a in enumerate(exp.quotients, start=1):
        p, q = exp.convergents[n]
        rows.append({"n": n, "a": a, "p": p, "q": q,
                     "error": abs(float(xv) - p / q)})
    state = "terminated" if exp.terminated else (
        "truncated" if exp.truncated else "cut at depth")
    summary = "quotients [%s] (%s)" % (
        ", ".join(str(a) for a in exp.quotients), state)
    return ("n", "a", "p", "q", "error"), rows, summary


def _direction(o):
    if (o.get("x") is None) == (o.get("quotients") is None):
        raise UsageError("give exactly one of --x or --quotients")
    if o.get("quotients") is not None:
        return o["quotients"]
    x = o["x"]
    if not 0 < x < 1:
        raise UsageError("--x must lie in (0, 1)")
    return x


def _run_excursions(o):
    direction = _direction(o)
    if o["step"] is not None:
        if o.get("x") is None:
            raise UsageError("--step needs --x (sampled engine)")
        records = geo.excursions(float(o["x"]), o["T"], sample_step=o["step"])
        engine = "sampled"
    else:
        records = geo.predicted_excursions(direction, o["T"])
        engine = "exact"
    rows = [{"index": r.index, "convergent": r.convergent_index,
             "t_enter": r.t_enter, "t_peak": r.t_peak, "t_exit": r.t_exit,
             "peak_pen": r.peak_pen} for r in records]
    if records:
        deepest = max(records, key=lambda r: r.peak_pen)
        summary = ("%d excursions by T=%g (%s); deepest peak %.6f at "
                   "t=%.6f" % (len(records), o["T"], engine,
                               deepest.peak_pen, deepest.t_peak))
    else:
        summary = "0 excursions by T=%g (%s)" % (o["T"], engine)
    columns = ("index", "convergent", "t_enter", "t_peak", "t_exit",
               "peak_pen")
    return columns, rows, summary


def _run_loglaw(o):
    direction = _direction(o)
    stat = geo.loglaw_statistic(direction, o["T"], alpha=o["alpha"])
    rows = []
    running = -math.inf
    for r in geo.predicted_excursions(direction, o["T"]):
        if r.t_peak <= math.e:
            continue
        at_peak = (r.peak_pen - o["alpha"] * r.t_peak) / math.log(r.t_peak)
        running = max(running, at_peak)
        rows.append({"t_peak": r.t_peak, "log_t": math.log(r.t_peak),
                     "peak_pen": r.peak_pen, "at_peak": at_peak,
                     "running_max": running})
    summary = ("log-law statistic %.6f at T=%g (alpha=%g)"
               % (stat, o["T"], o["alpha"]))
    return ("t_peak", "log_t", "peak_pen", "at_peak", "running_max"), rows, summary


def _run_horoballs(o):
    try:
        a_txt, b_txt = o["base"].split(",")
        base = (Fraction(a_txt), Fraction(b_txt))
    except (ValueError, ZeroDivisionError):
        raise UsageError("--base must be two rationals a,b")
    if o["points"] < 1:
        raise UsageError("points must be >= 1")
    if not 0 < o["factor"] < 1:
        raise UsageError("factor must lie in (0, 1)")
    rows = []
    R = o["r_hi"]
    for _ in range(o["points"]):
        rep = hb.horoball_count_ratio(base, R, o["lam"])
        rows.append({"R": R, "log10_R": math.log10(R),
                     "q_min": rep.q_min, "q_max": rep.q_max,
                     "count": rep.count, "ratio": float(rep.ratio)})
        R *= o["factor"]
    ratios = [r["ratio"] for r in rows if r["ratio"] > 0]
    if ratios:
        spread = max(ratios) / min(ratios)
        summary = ("count ratio in [%.6g, %.6g] (max/min %.4f) over %d "
                   "radius scales down from %s" % (min(ratios), max(ratios),
                                                   spread, o["points"],
                                                   o["r_hi"]))
    else:
        summary = ("no horoballs counted over %d radius scales down from %s"
                   % (o["points"], o["r_hi"]))
    return ("R", "log10_R", "q_min", "q_max", "count", "ratio"), rows, summary


def _run_disjointness(o):
    rep = hb.disjointness_check(o["q_max"], o["identity_q_max"])
    row = {"q_max": rep.q_max, "points": rep.points, "pairs": rep.pairs,
           "tangent_pairs": rep.tangent_pairs,
           "overlap_pairs": rep.overlap_pairs,
           "identity_pairs": rep.identity_pairs}
    if rep.all_disjoint:
        summary = ("all %d horoball interiors disjoint up to q=%d "
                   "(%d tangent pairs)" % (rep.points, rep.q_max,
                                           rep.tangent_pairs))
    else:
        summary = "OVERLAPS: %d pairs up to q=%d" % (rep.overlap_pairs,
                                                     rep.q_max)
    return tuple(row), [row], summary


_HANDLERS: Dict[str, _Handler] = {
    "classify": _run_classify,
    "critical-exponent": _run_critical_exponent,
    "stage-scan": _run_stage_scan,
    "ubiquity": _run_ubiquity,
    "schmidt": _run_schmidt,
    "cf": _run_cf,
    "excursions": _run_excursions,
    "loglaw": _run_loglaw,
    "horoballs": _run_horoballs,
    "disjointness": _run_disjointness,
}


def run(config: ExperimentConfig) -> ResultEnvelope:
    """Dispatch, write the result file atomically, print the summary."""
    started = time.perf_counter()
    columns, rows, summary = _HANDLERS[config.command](config.options)
    env = ResultEnvelope(
        config={"command": config.command, "options": dict(config.raw)},
        version=__version__,
        wall_clock_s=time.perf_counter() - started,
        columns=columns,
        rows=rows,
        summary=summary,
    )
    text = (_render_jsonl(env) if config.options["format"] == "jsonl"
            else _render_csv(env))
    _atomic_write(_output_path(config), text)
    print(summary)
    return env


# -- plot-ready extracts ---------------------------------------------------

_PLOT_KINDS: Dict[str, str] = {
    "stage-measure": "stage-scan",
    "ratio": "ubiquity",
    "histogram": "schmidt",
    "loglaw": "loglaw",
    "horoball": "horoballs",
}


def emit_plot_data(env: ResultEnvelope, kind: str, path: str) -> None:
    """Two-column (or labeled multi-column) CSV for external plotting."""
    if kind not in _PLOT_KINDS:
        raise UsageError("unknown plot kind %r (choose from %s)"
                         % (kind, ", ".join(sorted(_PLOT_KINDS))))
    expected = _PLOT_KINDS[kind]
    got = env.config.get("command")
    if got != expected:
        raise UsageError("plot kind %r needs a %s payload, got %s"
                         % (kind, expected, got))
    if kind == "stage-measure":
        header = ("n", "measure", "partial_sum")
        data = [(r["n"], r["measure"], r["partial_sum"]) for r in env.rows]
    elif kind == "ratio":
        header = ("ball", "n", "ratio")
        data = [(r["ball"], r["n"], r["ratio"]) for r in env.rows]
    elif kind == "histogram":
        header = ("bin_lo", "bin_hi", "count")
        data = _histogram([r["ratio"] for r in env.rows], bins=20)
    elif kind == "loglaw":
        header = ("log_t", "running_max")
        data = [(r["log_t"], r["running_max"]) for r in env.rows]
    else:
        header = ("log10_R", "ratio")
        data = [(r["log10_R"], r["ratio"]) for r in env.rows]
    body = io.StringIO()
    writer = csv.writer(body, lineterminator="\n")
    writer.writerow(header)
    for row in data:
        writer.writerow([_csv_cell(_plain(v)) for v in row])
    _atomic_write(path, body.getvalue())


def _histogram(values: List[float], bins: int):
    if not values:
        return []
    lo, hi = min(values), max(values)
    if hi == lo:
        return [(lo, hi, len(values))]
    width = (hi - lo) / bins
    counts = [0] * bins
    for v in values:
        i = min(int((v - lo) / width), bins - 1)
        counts[i] += 1
    return [(lo + i * width, lo + (i + 1) * width, c)
            for i, c in enumerate(counts) if c]


# -- entry point -----------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        run(parse_config(argv))
        return 0
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (ResourceCapError, PrecisionExhausted) as exc:
        print("resource cap: %s" % exc, file=sys.stderr)
        return 2
    except InternalInvariantError as exc:
        print("internal invariant violated: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
