"""
Command-line entry point.

Every subcommand accepts ``--out PATH`` (``-`` for stdout), ``--json``,
``--seed`` and ``--threads``. Files written through ``--out`` get a
``PATH.manifest.json`` companion echoing the parameters. Exit codes:
0 success, 1 runtime or domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
import time
from importlib import metadata

import numpy as np

from . import _config
from .errors import SpherewaveError


class UsageError(Exception):
    """Bad command line or malformed config; mapped to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# ---------------------------------------------------------------------------
# argument helpers

def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _range(text: str) -> list[float]:
    from .prober import parse_range

    try:
        return parse_range(text)
    except (ValueError, SpherewaveError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON config {path}: {exc}")
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return cfg


def _need(cfg: dict, key: str, where: str = "config"):
    if key not in cfg:
        raise UsageError(f"{where} is missing required key {key!r}")
    return cfg[key]


def _spec_from(cfg: dict):
    from .grid import make_grid

    dim = int(_need(cfg, "dim"))
    return make_grid(dim, tuple(cfg.get("factors", (dim,))), int(_need(cfg, "M")), float(_need(cfg, "L")))


# ---------------------------------------------------------------------------
# output

class Output:
    """Collects the result of a subcommand and writes it with its manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = argv
        self.t0 = time.perf_counter()

    def manifest(self) -> dict:
        params = {k: v for k, v in vars(self.args).items() if not callable(v)}
        return {
            "subcommand": " ".join(x for x in (self.args.command, getattr(self.args, "action", None)) if x),
            "parameters": json.loads(json.dumps(params, default=lambda o: list(o) if isinstance(o, tuple) else str(o))),
            "seed": self.args.seed,
            "version": _version(),
            "wall_time": time.perf_counter() - self.t0,
        }

    def emit_text(self, text: str, json_payload=None):
        """Write ``text`` (or ``json_payload`` when --json is set) to --out."""
        if self.args.json and json_payload is not None:
            text = json.dumps(json_payload, indent=2, sort_keys=True) + "\n"
        self._write(text.encode())

    def emit_bytes(self, data: bytes):
        self._write(data)

    def _write(self, data: bytes):
        out = self.args.out
        if out in (None, "-"):
            sys.stdout.flush()
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
            return
        with open(out, "wb") as fh:
            fh.write(data)
        with open(out + ".manifest.json", "w") as fh:
            json.dump(self.manifest(), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_bessel_eval(args, out: Output):
    from .bessel import bessel_j

    vals = np.atleast_1d(bessel_j((args.a, args.b), np.asarray(args.rho), args.method, args.terms))
    rows = [(v.real, v.imag) for v in vals]
    text = "".join(f"{_fmt(re)},{_fmt(im)}\n" for re, im in rows)
    out.emit_text(text, [{"rho": r, "re": re, "im": im} for r, (re, im) in zip(args.rho, rows)])


def cmd_omega_table(args, out: Output):
    from .multipliers import omega_hat

    xi = np.linspace(0.0, args.xi_max, args.samples)
    v = np.asarray(omega_hat(args.alpha, xi, args.dim)) * (1.0 + xi * xi) ** (args.r / 2.0)
    rows = list(zip(xi, v.real, v.imag))
    out.emit_text(_csv(("xi", "re", "im"), rows),
                  {"xi": xi.tolist(), "re": v.real.tolist(), "im": v.imag.tolist()})


def _symbol_table(cfg: dict, spec):
    from .multipliers import MultiplierTable, OmegaParams, b_s_table, omega_table, sigma_table

    sym = _need(cfg, "symbol")
    kind = _need(sym, "kind", "symbol")
    if kind == "omega_hat":
        return omega_table(spec, OmegaParams(_complex(str(sym.get("alpha", 0))), float(sym.get("r", 0))))
    if kind == "b_s":
        return b_s_table(spec, tuple(_need(sym, "s", "symbol")))
    if kind == "sigma":
        params = OmegaParams(_complex(str(sym.get("alpha", 0))), float(sym.get("r", 0)))
        return sigma_table(spec, params, tuple(sym.get("s", (0.0,) * spec.n_blocks)),
                           int(sym.get("correction_terms", 0)), int(sym.get("branch", 1)))
    if kind == "bessel_potential_product":
        rho = tuple(_need(sym, "rho", "symbol"))

        def build(sp):
            v = np.ones(sp.shape)
            for n, rr in zip(sp.block_norms(), rho):
                v = v * (1.0 + n * n) ** (-rr / 2.0)
            return v

        return MultiplierTable.from_builder(spec, build)
    raise UsageError(f"unknown symbol kind {kind!r}")


def cmd_symbol_check(args, out: Output):
    from .multipliers import SymbolClass, symbol_class_check

    cfg = _load_config(args.config)
    spec = _spec_from(cfg)
    table = _symbol_table(cfg, spec)
    cls = SymbolClass(tuple(_need(cfg, "rho")))
    rep = symbol_class_check(table, cls, int(cfg.get("max_order", 2)), int(cfg.get("refinements", 2)))
    payload = rep.to_json()
    out.emit_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", payload)
    return 0 if rep.passed else 1


def cmd_sobolev_norm(args, out: Output):
    from .grid import load_field
    from .sobolev import make_sobolev_params, sobolev_norm

    f = load_field(args.field)
    params = make_sobolev_params(f.spec.factors, args.s, args.p)
    val = sobolev_norm(f, params)
    out.emit_text(_fmt(val) + "\n", {"norm": val, "s": list(params.s), "p": params.p})


def cmd_decomp_caps(args, out: Output):
    from .decomp import cap_partition, nearest_spacing, sphere_points

    pts = sphere_points(args.j, args.sphere_dim)
    sp = nearest_spacing(pts) if len(pts) > 1 else np.array([np.nan])
    payload = {"j": args.j, "sphere_dim": args.sphere_dim, "count": int(pts.shape[0]),
               "spacing_min": float(sp.min()), "spacing_max": float(sp.max()),
               "spacing_mean": float(sp.mean()), "target_spacing": 2.0 ** (-args.j / 2.0)}
    if args.check:
        rng = np.random.default_rng(args.seed)
        xi = rng.standard_normal((args.samples, args.sphere_dim))
        W = cap_partition(args.j, pts, xi)
        payload["partition_sum_max_error"] = float(np.max(np.abs(np.asarray(W.sum(axis=1)).ravel() - 1)))
        payload["samples"] = args.samples
    out.emit_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", payload)


def cmd_decomp_region(args, out: Output):
    from .decomp import influence_region, region_volume

    reg = influence_region(args.r, args.c, args.dim, args.sign, args.extra_levels)
    if args.json:
        payload = {"r": args.r, "c": args.c, "dim": args.dim, "levels": list(reg.levels),
                   "n_boxes": reg.n_boxes, "volume": region_volume(reg)}
        out.emit_text("", payload)
        return
    header = ("j", "k") + tuple(f"center_{i}" for i in range(args.dim)) + ("slab_halfwidth", "cap_radius")
    rows = [(j, k, *p, args.c * 2.0 ** -j, args.c * 2.0 ** (-j / 2)) for j, k, p in reg.boxes()]
    out.emit_text(_csv(header, rows))


def _wave_setup(cfg: dict, seed: int):
    from .grid import load_field
    from .wave import FieldSeries, WaveConfig, manufactured_forcing, mode_forcing, random_forcing

    spec = _spec_from(cfg)
    config = WaveConfig(spec, float(_need(cfg, "T")), int(_need(cfg, "steps")), cfg.get("phase_sign", "plus"))
    g = _need(cfg, "g")
    kind = _need(g, "kind", "g")
    if kind == "manufactured":
        forcing, _ = manufactured_forcing(config, tuple(_need(g, "k", "g")), float(_need(g, "omega", "g")))
    elif kind == "modes":
        forcing = mode_forcing(config, tuple(_need(g, "k", "g")))
    elif kind == "random":
        forcing = random_forcing(config, np.random.default_rng(seed), float(g.get("kmax", 2.0)),
                                 int(g.get("n_freq", 3)))
    elif kind == "file":
        # one spatial field held constant in time
        f = load_field(_need(g, "path", "g"))
        if f.spec != spec:
            raise UsageError("forcing file grid does not match the config grid")
        forcing = FieldSeries(spec, config.times, np.broadcast_to(f.values, (len(config.times),) + spec.shape))
    else:
        raise UsageError(f"unknown forcing kind {kind!r}")
    return config, forcing


def cmd_wave_solve(args, out: Output):
    from .grid import save_field
    from .wave import solve_wave

    config, g = _wave_setup(_load_config(args.config), args.seed)
    u = solve_wave(g, config)
    final = u[len(u) - 1]
    if args.json:
        from .grid import norm

        out.emit_text("", {"T": config.T, "steps": config.steps, "l2_norm_final": norm(final, 2.0)})
        return
    buf = io.BytesIO()
    save_field(final, buf)
    out.emit_bytes(buf.getvalue())


def cmd_wave_apriori(args, out: Output):
    from .sobolev import make_sobolev_params
    from .wave import apriori_check

    cfg = _load_config(args.config)
    config, g = _wave_setup(cfg, args.seed)
    params = make_sobolev_params(config.spec.factors, tuple(cfg.get("s", (0.0,) * config.spec.n_blocks)),
                                 float(cfg.get("p", 2.0)))
    res = apriori_check(g, params, config)
    rows = list(zip(res.times, res.lhs, res.rhs, res.ratio))
    out.emit_text(_csv(("t", "lhs", "rhs", "ratio"), rows),
                  {"t": res.times.tolist(), "lhs": res.lhs.tolist(), "rhs": res.rhs.tolist(),
                   "ratio": [float(x) for x in res.ratio]})


def cmd_kernel_scan(args, out: Output):
    from . import kernelcheck
    from .multipliers import SymbolClass

    cls = SymbolClass(args.rho)
    violations = cls.violations(args.factors)
    if violations:
        raise SpherewaveError("; ".join(violations))
    js = range(args.j_min, args.j_max + 1)
    n_cone = len(args.factors) - 1

    def ts(j):
        adm = list(kernelcheck.admissible_t(j, n_cone))
        return adm if args.t_max is None else [t for t in adm if max(t, default=0) <= args.t_max]

    common = dict(dim=args.dim, factors=args.factors, sign=args.sign, margin=args.margin)
    if args.mode == "l1":
        rows = kernelcheck.l1_scan(js, ts, cls, **common)
    elif args.mode == "diff":
        rows = []
        for j in js:
            for t in ts(j):
                rows += kernelcheck.diff_scan(j, t, kernelcheck.y_grid(j, args.dim, seed=args.seed), cls, **common)
    else:
        rows = []
        for t in sorted({t for j in js for t in ts(j)}):
            jt = [j for j in js if t in ts(j)]
            rows += kernelcheck.tail_scan(jt, t, args.r, args.c, cls, **common)
    out.emit_text(kernelcheck.rows_to_csv(rows), [r.to_dict() for r in rows])


def cmd_sweep_region(args, out: Output):
    from .grid import make_grid
    from .prober import region_sweep, sweep_to_csv

    spec = make_grid(args.dim, args.factors, args.M, args.L)
    s_list = [_floats(s) for s in args.s.split(";")]
    rows = region_sweep(args.alpha, args.r, s_list, args.p, args.family, spec, args.seed, args.sign)
    meta = {"note": "ratio_max is a finite-grid estimate; growth outside the theory region is a trend, "
                    "not a certified unbounded norm"}
    from dataclasses import asdict

    out.emit_text(sweep_to_csv(rows), {"rows": [asdict(r) for r in rows], **meta})


def cmd_sweep_knapp(args, out: Output):
    from .prober import knapp_trend

    slope, vals = knapp_trend(args.alpha[0], args.r[0], _floats(args.s), args.p[0],
                              range(args.j_min, args.j_max + 1), args.dim, args.sign)
    js = list(range(args.j_min, args.j_max + 1))
    out.emit_text(_csv(("j", "ratio"), zip(js, vals)), {"j": js, "ratio": vals, "log2_slope": slope})


def cmd_selftest(args, out: Output):
    from .acceptance import run_all

    nums = args.criteria or None
    echo = None if args.json else (lambda line: print(line, flush=True))
    results = run_all(nums, echo)
    total = sum(r.elapsed for r in results)
    passed = all(r.passed for r in results)
    if args.json:
        out.emit_text("", {"passed": passed, "total_seconds": total, "criteria": [r.to_json() for r in results]})
    else:
        summary = f"{sum(r.passed for r in results)}/{len(results)} criteria passed in {total:.1f}s\n"
        if args.out not in (None, "-"):
            out.emit_text("".join(r.line() + "\n" for r in results) + summary)
        else:
            print(summary, end="")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker cap (default: SPHEREWAVE_THREADS or 1)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")

    p = _Parser(prog="spherewave", description="Sphere-singular multipliers, wave propagators and kernel laws.")
    p.add_argument("--version", action="version", version=_version())
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def group(name, help):
        g = sub.add_parser(name, help=help)
        s = g.add_subparsers(dest="action", parser_class=_Parser)
        s.required = True
        return s

    b = group("bessel", "Bessel functions of complex order").add_parser("eval", parents=[common])
    b.add_argument("--a", type=float, required=True)
    b.add_argument("--b", type=float, default=0.0)
    b.add_argument("--rho", type=_floats, required=True, help="argument(s), comma-separated")
    b.add_argument("--method", choices=("auto", "series", "asymptotic"), default="auto")
    b.add_argument("--terms", type=int, default=None)
    b.set_defaults(func=cmd_bessel_eval)

    o = group("omega", "Fourier transform of Omega^alpha").add_parser("table", parents=[common])
    o.add_argument("--alpha", type=_complex, required=True)
    o.add_argument("--r", type=float, default=0.0)
    o.add_argument("--dim", type=int, required=True)
    o.add_argument("--xi-max", type=float, default=4.0)
    o.add_argument("--samples", type=int, default=401)
    o.set_defaults(func=cmd_omega_table)

    sy = group("symbol", "symbol-class checks").add_parser("check", parents=[common])
    sy.add_argument("--config", required=True, help="JSON: dim, factors, M, L, rho, symbol{kind,...}")
    sy.set_defaults(func=cmd_symbol_check)

    so = group("sobolev", "multi-parameter Sobolev norms").add_parser("norm", parents=[common])
    so.add_argument("--field", required=True)
    so.add_argument("--s", type=_floats, required=True)
    so.add_argument("--p", type=float, default=2.0)
    so.set_defaults(func=cmd_sobolev_norm)

    d = group("decomp", "cone, shell and cap decompositions")
    dc = d.add_parser("caps", parents=[common])
    dc.add_argument("--j", type=int, required=True)
    dc.add_argument("--sphere-dim", type=int, required=True, help="ambient dimension M of S^{M-1}")
    dc.add_argument("--check", action="store_true", help="sample the partition of unity")
    dc.add_argument("--samples", type=int, default=10_000)
    dc.set_defaults(func=cmd_decomp_caps)
    dr = d.add_parser("region", parents=[common])
    dr.add_argument("--r", type=float, required=True)
    dr.add_argument("--c", type=float, default=1.0)
    dr.add_argument("--dim", type=int, default=2)
    dr.add_argument("--sign", type=int, choices=(1, -1), default=1)
    dr.add_argument("--extra-levels", type=int, default=4)
    dr.set_defaults(func=cmd_decomp_region)

    w = group("wave", "Duhamel spectral wave solver")
    ws = w.add_parser("solve", parents=[common])
    ws.add_argument("--config", required=True)
    ws.set_defaults(func=cmd_wave_solve)
    wa = w.add_parser("apriori", parents=[common])
    wa.add_argument("--config", required=True)
    wa.set_defaults(func=cmd_wave_apriori)

    k = group("kernel", "kernel L1 laws").add_parser("scan", parents=[common])
    k.add_argument("--mode", choices=("l1", "diff", "tail"), required=True)
    k.add_argument("--dim", type=int, default=2)
    k.add_argument("--factors", type=_ints, default=(1, 1))
    k.add_argument("--j-min", type=int, required=True)
    k.add_argument("--j-max", type=int, required=True)
    k.add_argument("--t-max", type=int, default=None)
    k.add_argument("--rho", type=_floats, default=(0.26, 0.26))
    k.add_argument("--r", type=float, default=0.125, help="tail mode only")
    k.add_argument("--c", type=float, default=4.0, help="tail mode only")
    k.add_argument("--sign", type=int, choices=(1, -1), default=1)
    k.add_argument("--margin", type=float, default=16.0)
    k.set_defaults(func=cmd_kernel_scan)

    sw = group("sweep", "operator-norm sweeps")
    sr = sw.add_parser("region", parents=[common])
    sr.add_argument("--dim", type=int, default=2)
    sr.add_argument("--factors", type=_ints, default=(1, 1))
    sr.add_argument("--alpha", type=_range, required=True)
    sr.add_argument("--r", type=_range, default=[0.0])
    sr.add_argument("--s", default="0,0", help="';'-separated list of comma tuples")
    sr.add_argument("--p", type=_range, default=[2.0])
    sr.add_argument("--family", choices=("random", "knapp", "atoms"), default="random")
    sr.add_argument("--M", type=int, default=64)
    sr.add_argument("--L", type=float, default=4.0)
    sr.add_argument("--sign", type=int, choices=(1, -1), default=1)
    sr.set_defaults(func=cmd_sweep_region)
    sk = sw.add_parser("knapp", parents=[common])
    sk.add_argument("--dim", type=int, default=2)
    sk.add_argument("--alpha", type=_range, required=True)
    sk.add_argument("--r", type=_range, default=[0.0])
    sk.add_argument("--s", default="0")
    sk.add_argument("--p", type=_range, default=[2.0])
    sk.add_argument("--j-min", type=int, default=3)
    sk.add_argument("--j-max", type=int, default=6)
    sk.add_argument("--sign", type=int, choices=(1, -1), default=1)
    sk.set_defaults(func=cmd_sweep_knapp)

    st = sub.add_parser("selftest", parents=[common], help="run the acceptance criteria")
    st.add_argument("--criteria", type=_ints, default=None, help="subset, e.g. 1,3,5")
    st.set_defaults(func=cmd_selftest, action=None)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if args.threads is not None:
        _config.set_threads(args.threads)
    try:
        code = args.func(args, Output(args, argv))
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return 2
    except SpherewaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return int(code or 0)


if __name__ == "__main__":
    sys.exit(main())
