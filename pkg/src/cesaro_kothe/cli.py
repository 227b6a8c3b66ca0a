"""Command line front end: ``cesaro-kothe <command> [options]``.

Exit codes: 0 everything Holds (or the run succeeded), 1 some verdict Fails,
2 some verdict is Inconclusive and none Fails, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import inspect
import io
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import yaml

from . import criteria, dsl, ergodic, kernel, oracle, spectral, weights
from .exact import GaussianRational
from .report import build_report, dumps, write_atomic

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
THREADS_ENV = "CESARO_KOTHE_THREADS"

DEFAULTS = {
    "N": criteria.DEFAULT_N,
    "n_max": criteria.DEFAULT_N_MAX,
    "m_search": criteria.DEFAULT_M_SEARCH,
    "props": "kothe,g1,vanishing,continuity,diff,nuclear,invertibility",
    "s_max": 8,
    "s_grid": "1,1.5,2,2.5,3,3.5,4,4.5,5,6,8",
    "nuclear_alpha": 1.0,
    "k_max": 50,
}


class UsageError(Exception):
    """Bad input detected before or during setup; exits with code 3."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# --- literals ---------------------------------------------------------------------

class LiteralError(ValueError):
    def __init__(self, text: str, offset: int, message: str):
        self.text, self.offset = text, offset
        super().__init__(f"{message} at offset {offset}")

    def caret(self) -> str:
        return f"{self.text}\n{' ' * self.offset}^"


_NUM = re.compile(r"\d+/\d+|(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


def parse_complex(text: str):
    """Parse ``a``, ``bi``, ``a+bi`` or ``a-bi`` (parts may be decimals or ``p/q``) into exact rationals.

    Returns a ``Fraction`` for real input and a ``GaussianRational`` otherwise.
    """
    s = text
    pos = 0
    re_part = im_part = None
    while pos < len(s) and s[pos] == " ":
        pos += 1
    end = len(s.rstrip())
    first = True
    while pos < end:
        start = pos
        sign = 1
        if s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
        elif not first:
            raise LiteralError(text, pos, "expected '+' or '-'")
        m = _NUM.match(s, pos)
        val = None
        if m:
            val = Fraction(m.group())
            pos = m.end()
            if pos < end and s[pos] not in "+-ij":
                raise LiteralError(text, pos, "expected 'i', '+' or '-'")
        if pos < end and s[pos] in "ij":
            pos += 1
            if im_part is not None:
                raise LiteralError(text, start, "second imaginary part")
            im_part = sign * (val if val is not None else Fraction(1))
        elif val is None:
            raise LiteralError(text, pos, "expected a number or 'i'")
        else:
            if re_part is not None or im_part is not None:
                raise LiteralError(text, start, "real part must come first")
            re_part = sign * val
        first = False
    if re_part is None and im_part is None:
        raise LiteralError(text, pos, "empty number")
    if im_part:
        return GaussianRational(re_part or 0, im_part)
    return re_part if re_part is not None else Fraction(0)


def _float_list(text: str) -> list:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}: {exc}") from None


def _int_list(text: str) -> list:
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}: {exc}") from None


# --- configuration ---------------------------------------------------------------

def _load_config(path) -> dict:
    if not path:
        return {}
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    try:
        if p.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            return tomllib.loads(raw.decode("utf-8"))
        return json.loads(raw.decode("utf-8"))
    except ValueError as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from None


def _merged(args, config: dict, key: str):
    v = getattr(args, key, None)
    if v is not None:
        return v
    if key in config:
        return config[key]
    return DEFAULTS.get(key)


def _parse_param(text: str):
    if "=" not in text:
        raise UsageError(f"--param expects key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), yaml.safe_load(v)


def build_family(args, config: dict) -> weights.WeightFamily:
    text = args.family if args.family is not None else config.get("family")
    if text is None:
        raise UsageError("a --family is required")
    if isinstance(text, dict):
        spec = dict(text)
    else:
        text = str(text).strip()
        if text.startswith("{"):
            try:
                spec = yaml.safe_load(text)
            except yaml.YAMLError as exc:
                raise UsageError(f"cannot parse family spec: {exc}") from None
        elif text.endswith((".yaml", ".yml", ".json")) and Path(text).exists():
            spec = yaml.safe_load(Path(text).read_text(encoding="utf-8"))
        else:
            spec = {"builtin": text}
    if not isinstance(spec, dict):
        raise UsageError("family spec must be a mapping")
    params = dict(spec.get("params") or {})
    params.update(config.get("params") or {})
    for item in getattr(args, "param", None) or []:
        k, v = _parse_param(item)
        params[k] = v
    for key in ("alpha", "s"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    if "builtin" in spec:
        name = weights._ALIASES.get(spec["builtin"], spec["builtin"])
        if name not in weights.BUILTINS:
            raise UsageError(f"unknown family {spec['builtin']!r}; try the 'families' command")
        accepted = inspect.signature(weights.BUILTINS[name]).parameters
        unknown = sorted(set(params) - set(accepted))
        if unknown:
            raise UsageError(f"family {name} has no parameter(s) {', '.join(unknown)}")
        spec = {"builtin": name, "params": params}
    elif params:
        raise UsageError("parameters apply to builtin families only")
    try:
        return weights.family_from_spec(spec)
    except dsl.ParseError as exc:
        raise UsageError(f"{exc}\n{exc.caret()}") from None
    except dsl.DSLError as exc:
        raise UsageError(str(exc)) from None
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer") from None


def _emit(text: str, target) -> None:
    if target:
        write_atomic(target, text)
    else:
        sys.stdout.write(text + ("\n" if not text.endswith("\n") else ""))


def _exit_for(statuses) -> int:
    statuses = list(statuses)
    if any(s is criteria.Status.FAILS for s in statuses):
        return EXIT_FAIL
    if any(s is criteria.Status.INCONCLUSIVE for s in statuses):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# --- commands ----------------------------------------------------------------------

PROPS = ("kothe", "g1", "vanishing", "regular", "continuity", "compactness", "diff", "nuclear",
         "invertibility", "point-spectrum", "sn", "closed-range", "consistency")
_PROP_ALIASES = {"nuclearity": "nuclear", "diff-continuity": "diff", "pt": "point-spectrum", "kothe-k1": "kothe"}


def _run_prop(prop, fam, cfg):
    N, n_max, m_search = cfg["N"], cfg["n_max"], cfg["m_search"]
    if prop == "kothe":
        return [criteria.check_kothe(fam, max(n_max, 2), N)], {}
    if prop == "g1":
        return list(criteria.check_g1(fam, n_max, m_search, N)), {}
    if prop == "vanishing":
        return [criteria.check_vanishing_and_normability(fam, n_max, N)], {}
    if prop == "regular":
        return [criteria.check_regular(fam, n_max, N)], {}
    if prop == "continuity":
        return [criteria.check_continuity_cesaro(fam, n_max, m_search, N)], {}
    if prop == "compactness":
        return [criteria.check_compactness_cesaro(fam, n_max, m_search, N)], {}
    if prop == "diff":
        return [criteria.check_continuity_diff(fam, n_max, m_search, N)], {}
    if prop == "nuclear":
        return [criteria.check_nuclearity(fam, n_max, m_search, N, alpha=cfg["nuclear_alpha"])], {}
    if prop == "invertibility":
        return [criteria.check_invertibility(fam, n_max, m_search, N)], {}
    if prop == "point-spectrum":
        out = criteria.point_spectrum_memberships(fam, range(1, cfg["s_max"] + 1), n_max, N)
        return list(out.values()), {}
    if prop == "sn":
        reps = [criteria.compute_sn(fam, n, cfg["s_grid"], N) for n in range(1, n_max + 1)]
        return [], {"sn": [r.to_json() for r in reps]}
    if prop == "closed-range":
        return [ergodic.verify_closed_range(fam, 1, 2, N)], {}
    if prop == "consistency":
        res = criteria.theorem_consistency(fam, cfg["s_max"], n_max, m_search, N)
        return [], {"consistency": {"statuses": {k: v.value for k, v in res["statuses"].items()},
                                    "consistent": res["consistent"]}}
    raise UsageError(f"unknown property {prop!r}; choose from {', '.join(PROPS)}")


def cmd_check(args) -> int:
    config = _load_config(args.config)
    fam = build_family(args, config)
    props_raw = _merged(args, config, "props")
    props = props_raw if isinstance(props_raw, list) else [p.strip() for p in str(props_raw).split(",") if p.strip()]
    props = [_PROP_ALIASES.get(p, p) for p in props]
    for p in props:
        if p not in PROPS:
            raise UsageError(f"unknown property {p!r}; choose from {', '.join(PROPS)}")
    cfg = {
        "N": int(_merged(args, config, "N")),
        "n_max": int(_merged(args, config, "n_max")),
        "m_search": int(_merged(args, config, "m_search")),
        "s_max": int(_merged(args, config, "s_max")),
        "s_grid": _float_list(_merged(args, config, "s_grid")),
        "nuclear_alpha": float(_merged(args, config, "nuclear_alpha")),
    }
    if cfg["N"] < 8 or cfg["n_max"] < 1 or cfg["m_search"] < 1:
        raise UsageError("need N >= 8, n_max >= 1 and m_search >= 1")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda p: _run_prop(p, fam, cfg), props))
    verdicts, sections = [], {}
    for vs, extra in results:
        verdicts.extend(vs)
        sections.update(extra)
    config_out = {"family": fam.describe(), "props": props, **cfg}
    report = build_report("check", config_out, verdicts, **sections)
    _emit(dumps(report), args.output)
    if not args.quiet:
        for v in verdicts:
            print(f"{v.criterion:<16} {v.status.value}", file=sys.stderr)
    return _exit_for(v.status for v in verdicts)


def _lambda_grid(text):
    try:
        re_part, im_part = text.split(",")
        r0, r1, rn = re_part.split(":")
        i0, i1, inn = im_part.split(":")
        import numpy as np

        return [complex(a, b) for a in np.linspace(float(r0), float(r1), int(rn))
                for b in np.linspace(float(i0), float(i1), int(inn))]
    except ValueError:
        raise UsageError("--lambda-grid expects re0:re1:count,im0:im1:count") from None


def cmd_spectrum(args) -> int:
    config = _load_config(args.config)
    fam = build_family(args, config)
    N = int(_merged(args, config, "N"))
    n_max = int(_merged(args, config, "n_max"))
    s_grid = _float_list(_merged(args, config, "s_grid"))
    k_max = int(_merged(args, config, "k_max"))
    try:
        region = spectral.assemble_spectrum(fam, k_max=k_max, window=N, n_max=min(n_max, 3), s_grid=s_grid)
    except spectral.ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    sections = {"region": region.to_json()}
    if args.lambda_grid:
        pts = _lambda_grid(args.lambda_grid)
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["re", "im", "classification", "in_disk_D1", "re_inv_lambda"])
        for z in pts:
            inside, diag = spectral.disk_membership(z, 1.0) if z != 0 else (False, {"re_inv_lambda": float("nan")})
            w.writerow([repr(z.real), repr(z.imag), region.classify_point(z), inside, repr(diag["re_inv_lambda"])])
        if args.csv:
            write_atomic(args.csv, buf.getvalue())
        else:
            sections["grid_csv"] = buf.getvalue()
    report = build_report("spectrum", {"family": fam.describe(), "N": N, "k_max": k_max, "s_grid": s_grid}, **sections)
    _emit(dumps(report), args.output)
    return EXIT_OK


def _nearest_sigma(z: complex) -> str:
    if abs(z) < 0.5 and (z.real <= 0 or abs(z) < 1e-6):
        return "0"
    k = max(1, round(1 / z.real)) if z.real > 0 else 1
    return f"1/{k}"


def cmd_resolvent(args) -> int:
    config = _load_config(args.config)
    try:
        lam_exact = parse_complex(args.lam)
    except LiteralError as exc:
        raise UsageError(f"bad --lambda: {exc}\n{exc.caret()}") from None
    lam = lam_exact if args.exact else complex(lam_exact)
    try:
        params = spectral.ResolventParams(lam)
    except spectral.SigmaProximityError as exc:
        raise UsageError(f"{exc}; nearest excluded point is {_nearest_sigma(complex(lam_exact))}") from None
    N = args.N
    rhs = args.rhs or "e1"
    if Path(rhs).exists():
        y = kernel.read_vector_csv(rhs, exact=args.exact)
        if N is not None and N != y.N:
            raise UsageError(f"--N {N} does not match the {y.N} entries in {rhs}")
    else:
        try:
            y = ergodic.make_vector(rhs, int(N or 100), exact=args.exact)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    x = spectral.resolvent_apply(y, params)
    # residual of (C - lambda I) x = y
    back = kernel.cesaro_apply(x)
    if back.exact:
        res = [back.entries[k] - lam * x.entries[k] - y.entries[k] for k in range(y.N)]
        residual = max(abs(complex(r)) for r in res)
    else:
        import numpy as np

        yy = y.to_float().entries
        residual = float(np.max(np.abs(back.entries - complex(lam) * x.entries - yy)))
    summary = {"lambda": str(lam_exact), "alpha": params.alpha, "sigma_distance": params.sigma_distance,
               "N": y.N, "exact": bool(args.exact), "residual": residual}
    if args.family or config.get("family"):
        fam = build_family(args, config)
        summary["family"] = fam.describe()
        summary["seminorms"] = {str(n): kernel.seminorm(fam, n, x) for n in range(1, int(_merged(args, config, "n_max")) + 1)}
    if args.solution:
        buf = io.StringIO()
        kernel.write_vector_csv(x, buf)
        write_atomic(args.solution, buf.getvalue())
    report = build_report("resolvent", {"lambda": str(lam_exact), "rhs": rhs}, resolvent=summary)
    _emit(dumps(report), args.output)
    return EXIT_OK if residual <= 1e-10 else EXIT_FAIL


def cmd_ergodic(args) -> int:
    config = _load_config(args.config)
    fam = build_family(args, config)
    N = int(args.N or config.get("N") or 400)
    n_max = int(args.n_max or config.get("n_max") or 1)
    ks = _int_list(args.k_schedule or config.get("k_schedule") or ",".join(map(str, ergodic.DEFAULT_SCHEDULE)))
    xs = args.x or config.get("x") or ["e1"]
    try:
        runs = [ergodic.run_ergodic(fam, x, n_max, ks, N) for x in xs]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["x", "k", "n", "value"])
    for r in runs:
        for k, n, v in r.rows():
            w.writerow([r.x_spec, k, n, repr(v)])
    if args.csv:
        write_atomic(args.csv, buf.getvalue())
    report = build_report("ergodic", {"family": fam.describe(), "N": N, "n_max": n_max, "k_schedule": ks},
                          runs=[r.to_json() for r in runs])
    _emit(dumps(report), args.output)
    return _exit_for(r.status for r in runs)


def cmd_oracle(args) -> int:
    N = args.N or 20
    try:
        rep = oracle.oracle_suite(N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(dumps(build_report("oracle", {"N": N}, oracle=rep.to_json())), args.output)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_families(args) -> int:
    aliases = {v: k for k, v in weights._ALIASES.items()}
    out = []
    for name, factory in weights.BUILTINS.items():
        fam = factory()
        sig = inspect.signature(factory).parameters
        out.append({
            "name": name,
            "alias": aliases.get(name),
            "params": {k: (None if p.default is inspect.Parameter.empty else p.default) for k, p in sig.items()},
            "anchor": fam.anchor,
            "summary": (inspect.getdoc(factory) or "").splitlines()[0],
        })
    _emit(dumps({"families": out}), args.output)
    return EXIT_OK


# --- parser ----------------------------------------------------------------------------

def _common(p, family_required=False):
    p.add_argument("--family", help="builtin name (see 'families') or a flow mapping such as "
                                    "'{log_weight_expr: \"-i/n\"}'")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="builtin family parameter (repeatable)")
    p.add_argument("--alpha", type=float, help="shorthand for --param alpha=VALUE")
    p.add_argument("--s", type=int, help="shorthand for --param s=VALUE")
    p.add_argument("-N", "--window", dest="N", type=int, help=f"truncation window (default {DEFAULTS['N']})")
    p.add_argument("--n-max", dest="n_max", type=int, help=f"rows n tested (default {DEFAULTS['n_max']})")
    p.add_argument("--config", help="TOML or JSON file with option values; flags take precedence")
    p.add_argument("-o", "--output", help="write the JSON report here instead of stdout")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cesaro-kothe", description="Cesàro operator on Köthe echelon spaces at finite truncation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate structural criteria on a weight family")
    _common(p)
    p.add_argument("--props", help=f"comma list from: {', '.join(PROPS)}")
    p.add_argument("--m-search", dest="m_search", type=int, help="witness search width m in (n, n + m_search]")
    p.add_argument("--s-max", dest="s_max", type=int, help="largest s for point-spectrum membership of 1/s")
    p.add_argument("--s-grid", dest="s_grid", help="exponents tested for S_n (comma list)")
    p.add_argument("--nuclear-alpha", dest="nuclear_alpha", type=float, help="exponent in sup_i i^alpha a_n/a_m")
    p.add_argument("-q", "--quiet", action="store_true", help="no per-criterion lines on stderr")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("spectrum", help="assemble the spectrum region")
    _common(p)
    p.add_argument("--k-max", dest="k_max", type=int, help="number of points 1/k listed")
    p.add_argument("--s-grid", dest="s_grid", help="exponents tested for S_n")
    p.add_argument("--lambda-grid", dest="lambda_grid", help="re0:re1:count,im0:im1:count point grid")
    p.add_argument("--csv", help="write the lambda-grid classification CSV here")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("resolvent", help="solve (C - lambda I) x = y")
    _common(p)
    p.add_argument("--lambda", dest="lam", required=True, help="spectral parameter, e.g. 2, 3/7 or 0.4+0.3i")
    p.add_argument("--rhs", help="vector CSV (index,re,im) or e1 / ones / random:<seed>")
    p.add_argument("--exact", action="store_true", help="rational arithmetic (lambda and rhs must be rational)")
    p.add_argument("--solution", help="write the solution vector CSV here")
    p.set_defaults(func=cmd_resolvent)

    p = sub.add_parser("ergodic", help="Cesàro means of the iterates")
    _common(p)
    p.add_argument("--x", action="append", help="initial vector: e1, e<j>, ones, random:<seed> (repeatable)")
    p.add_argument("--k-schedule", dest="k_schedule", help="comma list of k values")
    p.add_argument("--csv", help="write (x, k, n, value) rows here")
    p.set_defaults(func=cmd_ergodic)

    p = sub.add_parser("oracle", help="exact cross-checks of every closed form")
    p.add_argument("-N", "--window", dest="N", type=int, help="matrix size (<= 50, default 20)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("families", help="list builtin weight families")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_families)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except weights.WeightEvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
