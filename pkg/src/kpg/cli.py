"""Command-line entry point ``kpg``.

Exit codes: 0 success, 1 gallery mismatch, 2 usage or input error,
3 curve datum fails condition (*) or (**), 4 insufficient precision.
"""

from __future__ import annotations

import argparse
import difflib
import hashlib
import json
import os
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

from . import __version__
from .exact_algebra import PrecisionError, free_vars, parse_expr, render

EXIT_OK, EXIT_DIFF, EXIT_USAGE, EXIT_CONDITION, EXIT_PRECISION = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class Job:
    """Collects output lines and the facts that go into the header."""

    def __init__(self, command: str):
        self.command = command
        self.inputs: list = []
        self.orders: dict = {}
        self.variables: set = set()
        self.lines: list = []

    def read_json(self, path: str):
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        self.inputs.append(hashlib.sha256(raw).hexdigest()[:16])
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None

    def note_vars(self, *values):
        for v in values:
            self.variables.update(free_vars(v))

    def out(self, line: str = ""):
        self.lines.append(line)

    def header(self) -> str:
        parts = [f"kpg {__version__}", f"command: {self.command}"]
        parts.append("inputs: " + (",".join(self.inputs) if self.inputs else "-"))
        if self.orders:
            parts.append("orders: " + ",".join(f"{k}={v}" for k, v in sorted(self.orders.items())))
        parts.append("variables: " + (",".join(sorted(self.variables)) if self.variables else "-"))
        return "# " + " | ".join(parts)


def _rationals(text: str) -> list:
    try:
        return [parse_expr(t) for t in text.split(",") if t.strip()]
    except (ValueError, SyntaxError) as exc:
        raise UsageError(f"bad value list {text!r}: {exc}") from None


def _paren(e) -> str:
    text = render(e)
    return text if text.lstrip("-").replace("/", "").isalnum() else f"({text})"


def _matrix_lines(M) -> list:
    return ["[" + ", ".join(render(e) for e in row) + "]" for row in M]


# ---------------------------------------------------------------- tropical


def cmd_tropical(args, job: Job):
    from .tropical import (MetricGraph, classify_delaunay, delaunay_set,
                           in_voronoi, riemann_matrix)
    G = MetricGraph.from_json(job.read_json(args.graph))
    Q = riemann_matrix(G)
    job.note_vars(*[e for row in Q for e in row])
    if args.action == "q-matrix":
        job.out(f"genus: {G.genus}")
        job.out("Q:")
        for line in _matrix_lines(Q):
            job.out("  " + line)
    elif args.action == "delaunay":
        if not args.a:
            raise UsageError("delaunay needs --a")
        a = _rationals(args.a)
        if len(a) != G.genus:
            raise UsageError(f"--a needs {G.genus} coordinates")
        if not in_voronoi(Q, a):
            raise ValueError("point is not in the Voronoi cell")
        pts = delaunay_set(Q, a)
        job.out(f"a: ({', '.join(render(x) for x in a)})")
        job.out(f"delaunay set ({len(pts)} points):")
        for p in pts:
            job.out("  " + str(tuple(int(c) for c in p)))
    else:
        types = classify_delaunay(G)
        job.out(f"genus: {G.genus}")
        job.out("delaunay types (vertices, facets):")
        for t in types:
            job.out(f"  {t}")


# ---------------------------------------------------------------- hirota


def cmd_hirota(args, job: Job):
    from .hirota import (LatticeConfiguration, ThetaSum, cube_binomial,
                         cube_param, hirota_generators, hirota_residual,
                         prism_param, residual_is_zero, simplex_config,
                         simplex_param)
    if args.action == "gens":
        config = LatticeConfiguration.from_json(job.read_json(args.config))
        ideal = hirota_generators(config)
        job.variables.update(["u", "v", "w", "a"])
        if args.format == "json":
            job.out(json.dumps(ideal.to_json(), indent=1, ensure_ascii=False))
        elif args.format == "ideal":
            job.out(", ".join(render(p) for p in ideal.polynomials()))
        else:
            job.out(f"points: {config.m}  |C^[2]|: {len(ideal.generators)}  "
                    f"unique: {sum(g.unique for g in ideal.generators)}")
            for i, p in enumerate(ideal.polynomials(), 1):
                job.out(f"G{i} = {render(p)}")
    elif args.action == "check":
        config = LatticeConfiguration.from_json(job.read_json(args.config))
        if not args.point:
            raise UsageError("check needs --point")
        data = job.read_json(args.point)
        if "a" not in data:
            raise UsageError("point JSON needs coefficients \"a\"")
        coeffs = [parse_expr(str(c)) for c in data["a"]]
        point = {k: [parse_expr(str(x)) for x in data[k]] for k in ("u", "v", "w")}
        res = hirota_residual(ThetaSum(config, coeffs), point)
        _report_residual(job, res)
        return 0 if residual_is_zero(res) else EXIT_DIFF
    else:
        kappa = _rationals(args.kappa) if args.kappa else None
        lam = _rationals(args.lam) if args.lam else None
        if args.family == "simplex":
            if kappa is None:
                raise UsageError("simplex needs --kappa k0,...,kg")
            config = simplex_config(len(kappa) - 1)
            point = simplex_param(kappa, args.sign)
            coeffs = [parse_expr("1")] * config.m
        elif args.family == "cube":
            config, coeffs, point = cube_param(kappa or [], lam or [])
        else:
            config, coeffs, point = prism_param(kappa or [], lam or [])
        for k in ("u", "v", "w"):
            job.out(f"{k}: ({', '.join(render(x) for x in point[k])})")
            job.note_vars(*point[k])
        job.note_vars(*coeffs)
        for p, c in zip(config.points, coeffs):
            job.out(f"a{''.join(map(str, p))} = {render(c)}")
        res = hirota_residual(ThetaSum(config, coeffs), point)
        _report_residual(job, res)
        if args.family == "cube":
            job.out(f"binomial a000*a110*a101*a011 - a001*a010*a100*a111 = {render(cube_binomial(coeffs))}")


def _report_residual(job: Job, res: dict):
    zero = all(str(render(v)) == "0" for v in res.values())
    job.out("residual: " + ("zero" if zero else "nonzero"))
    for d, v in res.items():
        if render(v) != "0":
            job.out(f"  d={d}: {render(v)}")


# ---------------------------------------------------------------- sato


def cmd_sato(args, job: Job):
    from .sato import (Frame, SolitonData, hirota_apply, lowest_weighted_part,
                       partition_label, partitions_up_to, schur_coeffs,
                       schur_sigma, soliton_residual, soliton_tau, tau_truncated)
    if args.action == "schur":
        if not args.partition:
            raise UsageError("schur needs one or more partitions, e.g. 2,1")
        job.variables.update("xyt")
        for text in args.partition:
            try:
                lam = tuple(int(p) for p in text.split(",") if p)
            except ValueError:
                raise UsageError(f"bad partition {text!r}") from None
            job.out(f"sigma_{partition_label(lam)} = {render(schur_sigma(lam))}")
    elif args.action == "tau":
        if not args.frame:
            raise UsageError("tau needs --frame")
        frame = Frame.from_json(job.read_json(args.frame))
        job.orders["n"] = args.order
        tau = tau_truncated(frame, args.order)
        job.note_vars(tau)
        job.out(f"ell: {frame.ell}")
        job.out(f"tau[{args.order}] = {render(tau)}")
        d, part = lowest_weighted_part(hirota_apply(tau))
        job.out("hirota residual: " + ("zero" if d is None else f"lowest weighted degree {d}"))
    else:
        S = SolitonData.from_json(job.read_json(args.soliton))
        job.note_vars(*S.kappa)
        job.out(f"k: {S.k}  n: {S.n}")
        job.out("plucker: " + ", ".join(
            f"p{''.join(str(i + 1) for i in I)}={render(v)}" for I, v in S.plucker_vector().items()
            if render(v) != "0"))
        tau = soliton_tau(S)
        job.out("tau terms:")
        for freq, c in tau.combined().items():
            job.out(f"  {_paren(c)} * exp[{_paren(freq[0])}*x + {_paren(freq[1])}*y + {_paren(freq[2])}*t]")
        if args.schur_order is not None:
            job.orders["schur"] = args.schur_order
            job.out("schur coefficients:")
            for lam, c in schur_coeffs(S, args.schur_order).items():
                if render(c) != "0":
                    job.out(f"  c_{partition_label(lam)} = {render(c)}")
        if args.check_hirota:
            res = soliton_residual(S)
            zero = all(render(v) == "0" for v in res.values())
            job.out("hirota residual: " + ("zero" if zero else "nonzero"))
            return 0 if zero else EXIT_DIFF


# ---------------------------------------------------------------- curves


def cmd_curve(args, job: Job):
    from .curves import (CurveDivisor, HyperellipticCurve, curve_plucker_vector,
                         degeneration_family, frame_from_curve, h_polynomial,
                         limit_frame, limit_soliton, specialize_plucker)
    from .exact_algebra import series_inverse
    from .sato import (frame_from_soliton, gauge_by_unit, hirota_apply,
                       leading_xyt_monomial, lowest_weighted_part,
                       partitions_up_to, plucker, projectively_equal,
                       tau_truncated)
    if args.action == "tau":
        data = job.read_json(args.curve)
        if args.eps is not None:
            data = _specialize_curve_json(data, args.eps)
        X = HyperellipticCurve.from_json(data)
        div = data.get("divisor", {"type": "D0"})
        D = CurveDivisor(div.get("type", "D0"),
                         [(parse_expr(str(c)), parse_expr(str(y))) for c, y in div.get("points", [])])
        job.orders["n"] = args.order
        job.note_vars(*X.coeffs)
        frame = frame_from_curve(X, D, args.order)
        tau = tau_truncated(frame, args.order)
        job.note_vars(tau)
        job.out(f"genus: {X.genus}  divisor: {D.kind}")
        coeffs = {lam: plucker(frame, lam) for lam in partitions_up_to(args.order)}
        job.out("sigma coefficients: {" + ", ".join(
            f"({','.join(map(str, lam))}): {render(v)}" for lam, v in coeffs.items() if render(v) != "0") + "}")
        job.out(f"tau[{args.order}] = {render(tau)}")
        d, part = lowest_weighted_part(hirota_apply(tau))
        if d is None:
            job.out("hirota residual: zero")
        else:
            job.out(f"hirota residual: lowest weighted degree {d}, leading monomial {leading_xyt_monomial(part)}")
    else:
        kappa = _rationals(args.kappa)
        job.note_vars(*kappa)
        S = limit_soliton(kappa)
        job.orders["weight"] = args.weight
        job.out("A = (" + ", ".join(render(a) for a in S.A[0]) + ")")
        job.out("kappa = (" + ", ".join(render(k) for k in kappa) + ")")
        X = degeneration_family(kappa)
        curve_v = specialize_plucker(curve_plucker_vector(frame_from_curve(X, n=args.weight), args.weight))
        lim = limit_frame(kappa, args.weight)
        lim_v = curve_plucker_vector(lim, args.weight)
        job.out(f"eps->0 curve frame vs limit frame (weight <= {args.weight}): "
                + ("agree" if projectively_equal(curve_v, lim_v) else "differ"))
        order = args.weight + 4 * len(kappa) + 8
        gauged = gauge_by_unit(lim, series_inverse(h_polynomial(kappa, order), order))
        sol_v = curve_plucker_vector(frame_from_soliton(S, args.weight), args.weight)
        job.out("gauged limit frame vs soliton frame: "
                + ("agree" if projectively_equal(curve_plucker_vector(gauged, args.weight), sol_v) else "differ"))


def _specialize_curve_json(data: dict, eps: str) -> dict:
    from .exact_algebra import simplify, substitute
    value = parse_expr(eps)
    data = dict(data)
    for key in ("f", "roots"):
        if key in data:
            data[key] = [render(simplify(substitute(parse_expr(str(c)), {"eps": value}))) for c in data[key]]
    return data


# ---------------------------------------------------------------- nodal


def cmd_nodal(args, job: Job):
    from .nodal import (ConditionFailure, NodalCurve, algorithm61, grid_csv,
                        kp_solution_grid, parse_range)
    if args.action == "solve":
        X = NodalCurve.from_json(job.read_json(args.curve))
        job.out(f"components: {X.n_components}  arithmetic genus: {X.genus}")
        try:
            R = algorithm61(X)
        except ConditionFailure as exc:
            job.out(f"status: fail")
            job.out(f"condition: ({exc.condition})")
            job.out(f"reason: {exc.reason}")
            return EXIT_CONDITION
        job.out("status: ok")
        job.note_vars(*R.spectral, *[e for row in R.matrix() for e in row])
        job.out("kappa: (" + ", ".join(render(k) for k in R.spectral) + ")")
        fmt = _factored if args.symbolic else render
        for name, M in (("A", R.A), ("B", R.B)):
            if M:
                job.out(f"{name}:")
                for row in M:
                    job.out("  [" + ", ".join(fmt(e) for e in row) + "]")
        for i, q in enumerate(R.basis, 1):
            job.out(f"Q{i} = {q}")
    else:
        from .sato import SolitonData
        S = SolitonData.from_json(job.read_json(args.soliton))
        xs, ys, ts = parse_range(args.x), parse_range(args.y), parse_range(args.t)
        values = kp_solution_grid(S, xs, ys, ts)
        text = grid_csv(xs, ys, ts, values)
        bad = int((values != values).sum())
        if args.out:
            Path(args.out).write_text(text)
            job.out(f"wrote {values.size} samples to {args.out}" + (f" ({bad} singular)" if bad else ""))
        else:
            job.out(text.rstrip("\n"))


def _factored(e) -> str:
    import sympy
    text = render(e).replace("^", "**")
    return str(sympy.factor(sympy.sympify(text))).replace("**", "^")


# ---------------------------------------------------------------- gallery


def _data_dir() -> Path:
    return Path(str(resources.files("kpg") / "data"))


GALLERY = [
    ("tropical-dumbbell", ["tropical", "q-matrix", "{data}/dumbbell.json"], 0),
    ("tropical-theta", ["tropical", "q-matrix", "{data}/theta.json"], 0),
    ("tropical-theta-classify", ["tropical", "classify", "{data}/theta.json"], 0),
    ("tropical-dumbbell-square", ["tropical", "delaunay", "{data}/dumbbell.json", "--a", "1/2,1/2"], 0),
    ("hirota-square", ["hirota", "gens", "{data}/square.json"], 0),
    ("hirota-cube", ["hirota", "gens", "{data}/cube.json"], 0),
    ("hirota-simplex", ["hirota", "param", "simplex", "--kappa", "k0,k1,k2,k3"], 0),
    ("hirota-cube-param", ["hirota", "param", "cube", "--kappa", "k1,k2,k3,k4,k5,k6",
                           "--lambda", "l0,l1,l2,l3"], 0),
    ("hirota-prism-param", ["hirota", "param", "prism", "--kappa", "k1,k2,k3,k4,k5",
                            "--lambda", "l0,l1,l2,l3"], 0),
    ("sato-schur", ["sato", "schur", "1,1", "2", "2,1", "2,2", "3,1", "2,1,1"], 0),
    ("sato-soliton-1-3", ["sato", "soliton", "{data}/soliton_1_3.json", "--schur-order", "6",
                          "--check-hirota"], 0),
    ("sato-soliton-3-6", ["sato", "soliton", "{data}/soliton_3_6.json", "--check-hirota"], 0),
    ("curve-f2-tau2", ["curve", "tau", "{data}/f2.json", "--order", "2"], 0),
    ("curve-f2-tau6", ["curve", "tau", "{data}/f2.json", "--order", "6"], 0),
    ("curve-genus3-tau3", ["curve", "tau", "{data}/genus3.json", "--order", "3"], 0),
    ("curve-degenerate", ["curve", "degenerate", "--kappa", "1,2,3"], 0),
    ("nodal-twolines-p", ["nodal", "solve", "{data}/twolines_Dp.json"], 0),
    ("nodal-twolines-D2", ["nodal", "solve", "{data}/twolines_D2.json"], EXIT_CONDITION),
    ("nodal-twolines-D3", ["nodal", "solve", "{data}/twolines_D3.json"], EXIT_CONDITION),
    ("nodal-fourlines", ["nodal", "solve", "{data}/fourlines.json", "--symbolic"], 0),
    ("nodal-irreducible", ["nodal", "solve", "{data}/irreducible3.json"], 0),
]


def _run_captured(argv: list) -> tuple:
    job, code = _execute(argv)
    return code, "\n".join(job.lines_with_header) + "\n"


def cmd_gallery(args, job: Job):
    data = _data_dir()
    golden_dir = Path(args.goldens) if args.goldens else data / "goldens"
    entries = [e for e in GALLERY if not args.filter or args.filter in e[0]]
    if not entries:
        raise UsageError(f"no gallery entry matches {args.filter!r}")

    def run(entry):
        name, argv, want = entry
        argv = [a.replace("{data}", str(data)) for a in argv]
        code, text = _run_captured(argv)
        # golden files must not depend on the install location
        return name, want, code, text.replace(str(data), "<data>")

    threads = max(1, int(os.environ.get("KPG_THREADS", "1") or 1))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(run, entries))
    failures = 0
    for name, want, code, text in results:
        path = golden_dir / f"{name}.txt"
        if args.update:
            path.write_text(text)
            job.out(f"updated  {name}")
            continue
        status = "ok"
        if code != want:
            status = f"FAIL (exit {code}, expected {want})"
        elif not path.exists():
            status = "FAIL (missing golden)"
        elif path.read_text() != text:
            status = "FAIL (diff)"
        job.out(f"{'pass' if status == 'ok' else 'FAIL'}  {name}" + ("" if status == "ok" else f"  {status}"))
        if status != "ok":
            failures += 1
            if path.exists():
                diff = difflib.unified_diff(path.read_text().splitlines(), text.splitlines(),
                                            f"golden/{name}", f"actual/{name}", lineterm="")
                for line in diff:
                    job.out("    " + line)
    job.out(f"{len(results) - failures}/{len(results)} passed")
    return EXIT_DIFF if failures else 0


# ---------------------------------------------------------------- plumbing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kpg", description="KP tau functions and solitons over exact arithmetic")
    ap.add_argument("--version", action="version", version=f"kpg {__version__}")
    sub = ap.add_subparsers(dest="group", required=True)

    tr = sub.add_parser("tropical", help="tropical Riemann matrices and Delaunay polytopes")
    tr.add_argument("action", choices=["q-matrix", "delaunay", "classify"])
    tr.add_argument("graph")
    tr.add_argument("--a", help="point of the Voronoi cell, comma separated")
    tr.set_defaults(func=cmd_tropical)

    hi = sub.add_parser("hirota", help="Hirota variety equations")
    hs = hi.add_subparsers(dest="action", required=True)
    g = hs.add_parser("gens")
    g.add_argument("config")
    g.add_argument("--format", choices=["text", "json", "ideal"], default="text")
    c = hs.add_parser("check")
    c.add_argument("config")
    c.add_argument("--point", required=True)
    p = hs.add_parser("param")
    p.add_argument("family", choices=["simplex", "cube", "prism"])
    p.add_argument("--kappa")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--sign", type=int, choices=[1, -1], default=1)
    hi.set_defaults(func=cmd_hirota)

    sa = sub.add_parser("sato", help="Sato Grassmannian, Schur polynomials, solitons")
    ss = sa.add_subparsers(dest="action", required=True)
    t = ss.add_parser("tau")
    t.add_argument("--frame", required=True)
    t.add_argument("--order", type=int, required=True)
    s = ss.add_parser("soliton")
    s.add_argument("soliton")
    s.add_argument("--schur-order", type=int)
    s.add_argument("--check-hirota", action="store_true")
    sc = ss.add_parser("schur")
    sc.add_argument("partition", nargs="+")
    sa.set_defaults(func=cmd_sato)

    cu = sub.add_parser("curve", help="hyperelliptic curves over Q(eps)")
    cs = cu.add_subparsers(dest="action", required=True)
    ct = cs.add_parser("tau")
    ct.add_argument("curve")
    ct.add_argument("--order", type=int, required=True)
    mode = ct.add_mutually_exclusive_group()
    mode.add_argument("--eps", help="specialize eps to this rational value")
    mode.add_argument("--eps-symbolic", action="store_true", help="keep eps symbolic (default)")
    cd = cs.add_parser("degenerate")
    cd.add_argument("--kappa", required=True)
    cd.add_argument("--weight", type=int, default=4)
    cu.set_defaults(func=cmd_curve)

    no = sub.add_parser("nodal", help="nodal rational curves")
    ns = no.add_subparsers(dest="action", required=True)
    so = ns.add_parser("solve")
    so.add_argument("curve")
    so.add_argument("--symbolic", action="store_true", help="print matrix entries factored")
    gr = ns.add_parser("grid")
    gr.add_argument("soliton")
    gr.add_argument("--x", default="-10:10:0.2")
    gr.add_argument("--y", default="0")
    gr.add_argument("--t", default="0")
    gr.add_argument("--out")
    no.set_defaults(func=cmd_nodal)

    ga = sub.add_parser("gallery", help="run the worked examples and diff against goldens")
    ga.add_argument("--filter")
    ga.add_argument("--update", action="store_true", help="rewrite the golden files")
    ga.add_argument("--goldens", help="directory of golden files")
    ga.set_defaults(func=cmd_gallery)
    return ap


def _validate(args):
    for name in ("order", "schur_order", "weight"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise UsageError(f"--{name.replace('_', '-')} must be non-negative")


def _glue_ranges(argv: list) -> list:
    # argparse takes "-10:10:0.2" for an option, so bind range values early
    out = []
    it = iter(argv)
    for a in it:
        if a in ("--x", "--y", "--t"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def _execute(argv: list) -> tuple:
    parser = build_parser()
    job = Job(" ".join(shlex.quote(a) for a in argv))
    argv = _glue_ranges(argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        job.lines_with_header = []
        return job, int(exc.code or 0) and EXIT_USAGE
    code = 0
    try:
        _validate(args)
        code = args.func(args, job) or 0
    except UsageError as exc:
        job.out(f"error: {exc}")
        code = EXIT_USAGE
    except PrecisionError as exc:
        job.out(f"error: {exc}")
        code = EXIT_PRECISION
    except (ValueError, KeyError, SyntaxError, TypeError) as exc:
        job.out(f"error: {exc}")
        code = EXIT_USAGE
    job.lines_with_header = [job.header()] + job.lines
    return job, code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    job, code = _execute(argv)
    stream = sys.stderr if code in (EXIT_USAGE, EXIT_PRECISION) else sys.stdout
    for line in job.lines_with_header:
        print(line, file=stream if line.startswith("error:") else sys.stdout, flush=True)
    return code


if __name__ == "__main__":
    sys.exit(main())
