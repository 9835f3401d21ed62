"""``gausslab`` command line.

Every subcommand accepts ``--config FILE`` (a JSON object using the flag
names, dashes or underscores) whose values sit under explicit flags, and
``--emit text|csv|json`` with ``--out FILE`` for atomic file output.
Exit codes: 0 success, 1 failed verification verdict, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from .errors import ConfigError, GausslabError
from .geometry import AdmissibleEnum, Cube, gaussian_measure, tilted_measure

EMIT = ("text", "csv", "json")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    return [float(t) for t in str(text).replace(",", " ").split()]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


# -- argument table ------------------------------------------------------------------
# (flag, type, default, help); types are applied to config-file values too

_COMMON = [("emit", str, "text", "output format: text, csv or json"),
           ("out", str, None, "write output to this file instead of stdout"),
           ("config", str, None, "JSON file with default values for the flags"),
           ("seed", int, None, "battery seed (default: GAUSSLAB_SEED or 0)")]
_EXPO = [("p", float, 2.0, "integrability exponent p"), ("q", float, 2.0, "exponent q"),
         ("alpha", float, 0.5, "fractional order alpha"), ("a", float, 1.0, "family parameter a")]
_GRID = [("dim", int, 1, "dimension"), ("box", float, 4.0, "working box [-box, box]^dim"),
         ("resolution", int, 256, "cells per axis")]
_ENUM = [("ladder_ratio", float, 2.0, "side ladder ratio"),
         ("center_pitch", float, 0.25, "center pitch in units of the side")]

SUBCOMMANDS = {
    "measure": ("Gaussian (or tilted) measure of a cube",
                [("dim", int, 1, "dimension"), ("center", _floats, None, "cube center, comma separated"),
                 ("side", float, None, "side length"),
                 ("alpha_dot", float, None, "use exp(-alpha_dot |y|^2) dy instead of the Gaussian measure")]),
    "maximal": ("local fractional maximal function on a grid",
                _GRID + _EXPO + _ENUM + [("f", str, "1", "input function, weight-expression syntax"),
                                         ("form", str, "gauss", "gauss or radial normalization")]),
    "integral": ("local fractional integral on a grid",
                 _GRID + _EXPO + [("f", str, "1", "input function, weight-expression syntax"),
                                  ("kernel_norm", str, "maxnorm", "maxnorm or euclid")]),
    "constant": ("lower bound of a two-weight constant",
                 _EXPO + [("kind", str, "A", "A, scriptA, frakturA or sawyer"),
                          ("u", str, None, "weight u (1-D expression)"), ("v", str, None, "weight v"),
                          ("family", str, None, "use a counterexample family instead of u, v"),
                          ("b", float, 2.0, "family geometry parameter b"),
                          ("nmax", int, 4, "family size"),
                          ("dim", int, 1, "dimension"), ("box", float, 4.0, "working box for u, v"),
                          ("resolution", int, 1024, "cells per axis")]),
    "counterexample": ("designated-cube scan of a counterexample family",
                       [("kind", str, "prop32", "example31, prop32 or sawyer41"),
                        ("b", float, 2.0, "geometry parameter b"), ("k", float, None, "growth exponent k"),
                        ("nmax", int, 20, "last index n"),
                        ("values", str, "certified", "certified or designated")] + _EXPO),
    "decompose": ("level-set decomposition of a maximal field",
                  _GRID + _EXPO + [("f", str, "1", "input function")]),
    "verify": ("run verification checks",
               [("checks", str, "all", "comma separated check names or 'all'"),
                ("tolerances", dict, None, "config file only: per-check tolerance"),
                ("overrides", dict, None, "config file only: per-check parameters")]),
    "bench": ("time numba kernels against the numpy fallback",
              [("repeats", int, 3, "timing repeats"), ("cells_1d", int, 1024, "1-D grid size"),
               ("cells_2d", int, 64, "2-D grid size per axis")]),
}


def _options(sub):
    return SUBCOMMANDS[sub][1] + _COMMON


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gausslab", description="Gaussian-measure fractional operators and weights.")
    subs = parser.add_subparsers(dest="subcommand", metavar="subcommand", parser_class=_Parser)
    subs.required = True
    for name, (helptext, opts) in SUBCOMMANDS.items():
        sp = subs.add_parser(name, help=helptext, description=helptext, argument_default=argparse.SUPPRESS)
        for flag, typ, default, h in opts + _COMMON:
            if typ is dict:
                continue
            shown = "" if default is None else f" [default: {default}]"
            kw = dict(type=typ, help=h + shown)
            if flag == "emit":
                kw["choices"] = EMIT
            sp.add_argument("--" + flag.replace("_", "-"), dest=flag, **kw)
    return parser


def _load_config(path, sub):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(path, f"cannot read: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(path, f"invalid JSON: {e.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(path, "config must be a JSON object")
    table = {flag: typ for flag, typ, _, _ in _options(sub)}
    out = {}
    for key, val in raw.items():
        name = key.replace("-", "_")
        if name not in table or name == "config":
            raise ConfigError(key, "unknown key")
        typ = table[name]
        if typ is dict:
            if not isinstance(val, dict):
                raise ConfigError(key, "must be an object")
            out[name] = val
            continue
        try:
            out[name] = typ(val) if val is not None else None
        except (TypeError, ValueError):
            raise ConfigError(key, f"invalid value {val!r}") from None
    return out


def resolve(argv):
    """Parse argv and merge config-file values; returns (subcommand, options dict)."""
    ns = build_parser().parse_args(argv)
    sub = ns.subcommand
    given = {k: v for k, v in vars(ns).items() if k != "subcommand"}
    opts = {flag: default for flag, _, default, _ in _options(sub)}
    if given.get("config"):
        opts.update(_load_config(given["config"], sub))
    opts.update(given)
    if opts["emit"] not in EMIT:
        raise ConfigError("emit", f"must be one of {EMIT}")
    if opts.get("seed") is None:
        opts["seed"] = int(os.environ.get("GAUSSLAB_SEED", "0"))
    return sub, opts


# -- output ------------------------------------------------------------------------

class Table:
    def __init__(self, header, rows, meta=None, scalar=False):
        self.header = list(header)
        self.rows = [list(r) for r in rows]
        self.meta = meta or {}
        # text output of a one-row table is just its last value
        self.scalar = scalar

    def render(self, emit) -> str:
        if emit == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.header)
            for r in self.rows:
                w.writerow([_fmt(x) for x in r])
            return buf.getvalue()
        if emit == "json":
            recs = [dict(zip(self.header, (_jsonable(x) for x in r))) for r in self.rows]
            return json.dumps(dict(self.meta, rows=recs), indent=2, sort_keys=True) + "\n"
        if self.scalar and len(self.rows) == 1:
            return _fmt(self.rows[0][-1]) + "\n"
        widths = [max(len(h), *(len(_fmt(r[i])) for r in self.rows)) if self.rows else len(h)
                  for i, h in enumerate(self.header)]
        lines = ["  ".join(h.rjust(wd) for h, wd in zip(self.header, widths))]
        lines += ["  ".join(_fmt(x).rjust(wd) for x, wd in zip(r, widths)) for r in self.rows]
        return "\n".join(lines) + "\n"


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def write_atomic(path, text):
    """Write text to path through a temporary file in the same directory."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".gausslab-", dir=d)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- subcommands ---------------------------------------------------------------------

def _params(o, d=1):
    from .operators import ExponentParams

    return ExponentParams(o["p"], o["q"], o["alpha"], o["a"], d)


def _grid_input(o):
    from .grid import GridFunction
    from .weights import parse_weight

    d, R, n = o["dim"], o["box"], o["resolution"]
    g = GridFunction([-R] * d, [R] * d, n, alpha_dot=o["alpha"] / d)
    return g.with_values(parse_weight(o["f"]).sample(g))


def _enum(o, h):
    return AdmissibleEnum.for_grid(h, o["a"], o["center_pitch"], o["ladder_ratio"])


def _field_table(g, vals, name):
    X = g.midpoints()
    header = [f"x{i}" for i in range(g.dim)] + [name]
    return Table(header, [list(x) + [v] for x, v in zip(X, vals.ravel())])


def cmd_measure(o):
    if o["center"] is None or o["side"] is None:
        raise UsageError("measure needs --center and --side")
    c = np.asarray(o["center"], dtype=float)
    if c.size == 1 and o["dim"] > 1:
        c = np.full(o["dim"], c[0])
    if c.size != o["dim"]:
        raise ConfigError("center", f"needs {o['dim']} coordinates")
    Q = Cube(c, o["side"])
    val = gaussian_measure(Q) if o["alpha_dot"] is None else tilted_measure(Q, o["alpha_dot"])
    header = ["dim"] + [f"center{i}" for i in range(c.size)] + ["side", "gamma"]
    return Table(header, [[o["dim"], *c.tolist(), o["side"], val]], scalar=True), 0


def cmd_maximal(o):
    from .operators import maximal_field

    f = _grid_input(o)
    mf = maximal_field(f, _params(o, o["dim"]), _enum(o, f.isotropic_spacing()), form=o["form"])
    return _field_table(f, mf.values, "maximal"), 0


def cmd_integral(o):
    from .operators import fractional_integral_field

    f = _grid_input(o)
    out = fractional_integral_field(f, _params(o, o["dim"]), kernel_norm=o["kernel_norm"])
    return _field_table(f, out.values, "integral"), 0


def _pair(o, P):
    from .weights import WeightPair, counterexample_family, parse_weight

    if o["family"]:
        return counterexample_family(o["family"], (o["a"], o["b"]), P, n_max=o["nmax"])
    if o["u"] is None or o["v"] is None:
        raise UsageError("constant needs --u and --v, or --family")
    R, d = o["box"], o["dim"]
    return WeightPair(parse_weight(o["u"]), parse_weight(o["v"]), [-R] * d, [R] * d)


def cmd_constant(o):
    from .weights import sawyer_constant, weight_constant

    P = _params(o, o["dim"])
    pair = _pair(o, P)
    grid = pair.grid(o["resolution"])
    if o["kind"] == "sawyer":
        res = sawyer_constant(pair, P, grid=grid)
    else:
        res = weight_constant(pair, P, o["kind"], grid=grid)
    row = [o["kind"], o["a"], o["p"], o["q"], o["alpha"], res.value, res.cubes_scanned]
    return Table(["kind", "a", "p", "q", "alpha", "lower_bound", "cubes_scanned"], [row]), 0


def cmd_counterexample(o):
    from .verify import divergence_scan
    from .weights import counterexample_family

    if o["values"] not in ("certified", "designated"):
        raise ConfigError("values", "must be 'certified' or 'designated'")
    P = _params(o)
    fam = counterexample_family(o["kind"], (o["a"], o["b"]), P, k=o["k"], n_max=o["nmax"])
    scan = divergence_scan(fam, P, range(2, o["nmax"] + 1))
    rows = []
    for n, val in zip(scan.n, scan.values(o["values"])):
        lo, hi = fam.info["cubes"][int(n)]["Q"]
        rows.append([int(n), 0.5 * (lo + hi), hi - lo, val])
    return Table(["n", "x_n", "b_n", "lower_bound"], rows, dict(kind=o["kind"], values=o["values"])), 0


def cmd_decompose(o):
    from .operators import maximal_field
    from .verify import levelset_decomposition

    f = _grid_input(o)
    P = _params(o, o["dim"])
    mf = maximal_field(f, P, form="radial")
    dec = levelset_decomposition(mf, f, P)
    rows = []
    for k in sorted(dec.levels, reverse=True):
        lev = dec.levels[k]
        for j, Pd in enumerate(lev["cubes"]):
            rows.append([k, j, Pd.level, *Pd.corner, int(np.sum(lev["owner"] == j))])
    header = ["k", "j", "dyadic_level"] + [f"corner{i}" for i in range(f.dim)] + ["cells"]
    bad = sum(dec.violations().values())
    return Table(header, rows, dict(violations=dec.violations())), (0 if bad == 0 else 1)


def cmd_verify(o):
    from .checks import run_suite

    checks = o["checks"]
    if isinstance(checks, str):
        checks = "all" if checks == "all" else [c.strip() for c in checks.split(",") if c.strip()]
    cfg = dict(checks=checks, seed=o["seed"])
    if o.get("tolerances"):
        cfg["tolerances"] = o["tolerances"]
    if o.get("overrides"):
        cfg["overrides"] = o["overrides"]
    timings = {}
    report = run_suite(cfg, timings)
    for name, sec in timings.items():
        print(f"{name}: {sec:.1f} s", file=sys.stderr)
    code = 0 if report.passed else 1
    if o["emit"] == "json":
        return report.to_json() + "\n", code
    rows = [[c.check_name, c.verdict, c.stable, c.tolerance, " ".join(_fmt(m) for m in c.measured)]
            for c in report.checks]
    return Table(["check", "verdict", "stable", "tolerance", "measured"], rows), code


def cmd_bench(o):
    from .bench import run_bench

    rows = run_bench(((1, o["cells_1d"]), (2, o["cells_2d"])), repeats=o["repeats"], seed=o["seed"])
    header = ["kernel", "dim", "cells", "backend", "seconds", "max_rel_diff"]
    return Table(header, [[r.get(h, "") for h in header] for r in rows]), 0


COMMANDS = dict(measure=cmd_measure, maximal=cmd_maximal, integral=cmd_integral, constant=cmd_constant,
                counterexample=cmd_counterexample, decompose=cmd_decompose, verify=cmd_verify,
                bench=cmd_bench)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        sub, o = resolve(argv)
        out, code = COMMANDS[sub](o)
        text = out if isinstance(out, str) else out.render(o["emit"])
    except UsageError as e:
        msg = str(e)
        if "usage:" not in msg:
            msg = build_parser().format_usage() + f"gausslab: error: {msg}"
        print(msg, file=sys.stderr)
        return 2
    except (GausslabError, ValueError) as e:
        print(f"gausslab: error: {e}", file=sys.stderr)
        return 2
    if o["out"]:
        write_atomic(o["out"], text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
