"""Command-line front end.

Exit codes: 0 success or verification passed, 1 verification failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import a2 as A2
from .bps import (
    BpsStructure,
    Ray,
    a1_structure,
    classify,
    double,
    dt_invariant,
)
from .errors import DTError
from .io import (
    asymptotics_csv,
    dumps,
    emit_plot_data,
    format_rational,
    load_structure,
    parse_complex,
    ray_diagram_csv,
    ray_diagram_rows,
    structure_from_dict,
    structure_to_dict,
)

DEFAULT_TOL = {"analytic": 1e-10, "quadrature": 1e-8, "fd": 1e-6, "multilayer": 1e-3}


class UsageError(Exception):
    pass


# --- argument helpers ---------------------------------------------------------------------


def _complex_arg(text: str) -> complex:
    """'re,im' or a Python-style complex literal."""
    try:
        if "," in text:
            re, im = text.split(",")
            return complex(float(re), float(im))
        return complex(text.replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot read complex number {text!r} (use re,im)") from exc


def _params(args) -> dict:
    if not args.params:
        return {}
    text = args.params
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise UsageError("--params must be a JSON object")
    return d


def _cvec(v) -> np.ndarray:
    if isinstance(v, (list, tuple)) and v and isinstance(v[0], (list, tuple)):
        return np.array([parse_complex(x) for x in v])
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return np.array([parse_complex(v)])
    return np.array([parse_complex(v)])


def _tol(args, kind: str) -> float:
    t = args.tol if args.tol is not None else DEFAULT_TOL[kind]
    if t <= 0:
        raise UsageError("--tol must be positive")
    return t


def _load_model_structure(spec: str) -> BpsStructure:
    if spec.endswith(".json") or Path(spec).exists():
        return load_structure(spec)
    raise UsageError(f"unknown structure {spec!r}")


# --- output ---------------------------------------------------------------------------------


def _emit(args, payload, csv_text: str | None = None) -> None:
    if args.format == "csv":
        if csv_text is None:
            raise UsageError("this subcommand has no CSV output; use --format json")
        text = csv_text
    else:
        text = dumps(payload) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _verdict(ok: bool) -> int:
    return 0 if ok else 1


# --- bps --------------------------------------------------------------------------------------


def cmd_bps(args) -> int:
    s = load_structure(args.file)
    cutoff = args.cutoff or 10.0
    if args.action == "show":
        try:
            flags = sorted(classify(s, cutoff))
        except DTError as exc:
            flags = [f"undecided: {exc.code}"]
        act = s.active(cutoff)
        table = [{"class": list(g), "Z": s.Z(g), "omega": format_rational(v), "dt": format_rational(dt_invariant(s, g))}
                 for g, v in act]
        _emit(args, {"rank": s.rank, "flags": flags, "dt_table": table})
    elif args.action == "double":
        dual = _params(args).get("dual_charge")
        d = double(s, None if dual is None else [parse_complex(x) for x in dual])
        _emit(args, structure_to_dict(d.structure) | {"note": "basis (gamma_i, gamma_i dual)"})
    else:
        rows = ray_diagram_rows(s, cutoff)
        _emit(args, [{"angle": a, "class": list(g), "abs_Z": z, "omega": o} for a, g, z, o in rows],
              ray_diagram_csv(s, cutoff))
    return 0


# --- wallcrossing ------------------------------------------------------------------------------


def _torus_point(s, p):
    from .torus import TorusPoint

    if "point" not in p:
        raise UsageError("--params needs 'point': a list of [re, im] log-coordinates")
    vals = [parse_complex(x) for x in p["point"]]
    if len(vals) != s.rank:
        raise UsageError(f"point has {len(vals)} coordinates, rank is {s.rank}")
    return TorusPoint(s.lattice, np.array(vals, dtype=complex), bool(p.get("twisted", True)))


def cmd_wallcrossing(args) -> int:
    from .torus import TorusPoint, pentagon_check, ray_automorphism, sector_product
    from .bps import Lattice, active_rays

    p = _params(args)
    if args.action == "pentagon":
        rng = np.random.default_rng(args.seed)
        lat = Lattice(2, np.array([[0, 1], [-1, 0]]))
        n = int(p.get("points", 50))
        pts = [TorusPoint(lat, np.log(rng.uniform(0.2, 3, 2)) + 1j * rng.uniform(-3, 3, 2)) for _ in range(n)]
        rep = pentagon_check(pts, tol=args.tol or 1e-12)
        _emit(args, rep)
        return _verdict(rep["pass"])
    if not args.file:
        raise UsageError(f"wallcrossing {args.action} needs a structure file")
    s = load_structure(args.file)
    pt = _torus_point(s, p)
    if args.action == "apply":
        ang = float(p["ray_angle"])
        rays = active_rays(s, args.cutoff or 1e6)
        match = [m for r, m in rays if abs(cmath.phase(r.phase * cmath.exp(-1j * ang))) < 1e-9]
        if not match:
            raise UsageError(f"no active ray at angle {ang}")
        out = ray_automorphism(s, match[0], pt.twisted).apply(pt)
    else:
        sector = (Ray(cmath.exp(1j * float(p["from"]))), Ray(cmath.exp(1j * float(p["to"]))))
        out = sector_product(s, sector, pt, orientation=p.get("orientation", "clockwise"), cutoff=args.cutoff or 1e6)
    _emit(args, {"point": out.coords, "twisted": out.twisted})
    return 0


# --- specfn ------------------------------------------------------------------------------------


def cmd_specfn(args) -> int:
    from . import special

    p = _params(args)
    fn = args.fn
    if fn in ("gamma", "loggamma"):
        val = getattr(special, fn)(parse_complex(p["z"]))
    elif fn in ("lambda", "loglambda"):
        f = special.lambda_fn if fn == "lambda" else special.log_lambda
        val = f(parse_complex(p["w"]), parse_complex(p.get("eta", 0)))
    elif fn in ("polylog", "li"):
        val = special.polylog(int(p["k"]), parse_complex(p["x"]))
    elif fn == "stirling":
        val = special.stirling_tail(parse_complex(p["w"]), parse_complex(p.get("eta", 0)), int(p.get("K", 8)))
    elif fn in ("Fstar", "Gstar"):
        from .contour import starred_F, starred_G

        f = starred_F if fn == "Fstar" else starred_G
        val = f(parse_complex(p["v"]), parse_complex(p["w"]), parse_complex(p["theta"]), parse_complex(p["phi"]),
                parse_complex(p["hbar"]))
    else:
        from .contour import conifold_F, conifold_G

        f = conifold_F if fn == "F" else conifold_G
        val = f(parse_complex(p["z"]), parse_complex(p["omega1"]), parse_complex(p["omega2"]))
    _emit(args, {"function": fn, "value": val})
    return 0


# --- rh -------------------------------------------------------------------------------------------


def _hbar_grid(spec: str, ray: Ray) -> list[complex]:
    """'ring:rmin,rmax,n': n values of |hbar| spaced geometrically along the ray; or 're,im;re,im;...'."""
    if spec.startswith("ring:"):
        try:
            lo, hi, n = spec[5:].split(",")
            lo, hi, n = float(lo), float(hi), int(n)
        except ValueError as exc:
            raise UsageError("ring grid is ring:rmin,rmax,n") from exc
        if not (0 < lo < hi) or n < 1:
            raise UsageError("ring grid needs 0 < rmin < rmax and n >= 1")
        return [r * ray.phase for r in np.geomspace(lo, hi, n)]
    return [_complex_arg(x) for x in spec.split(";") if x]


def _solution(family: str, p: dict):
    from .rh import solve_a1_doubled, solve_conifold, solve_uncoupled

    if family == "a1":
        return solve_a1_doubled(parse_complex(p.get("z", 1.0)), parse_complex(p.get("theta", [0.3, 0.2])),
                                parse_complex(p.get("z_dual", 0)), parse_complex(p.get("theta_dual", 0)))
    if family == "conifold":
        return solve_conifold(parse_complex(p.get("v", [0.4, 0.6])), parse_complex(p.get("w", 1.0)),
                              parse_complex(p.get("theta", [0.3, -0.2])), parse_complex(p.get("phi", [0.25, 0.1])))
    if family == "uncoupled":
        if "structure" not in p:
            raise UsageError("uncoupled family needs params.structure (a structure object or file path)")
        st = p["structure"]
        s = load_structure(st) if isinstance(st, str) else structure_from_dict(st)
        theta = [parse_complex(x) for x in p.get("theta", [0] * s.rank)]
        return solve_uncoupled(s, theta)
    raise UsageError(f"unknown family {family!r}")


def cmd_rh(args) -> int:
    from .rh import extract_hessian, verify_asymptotics, verify_jumps

    p = _params(args)
    sol = _solution(args.family, p)
    ray = Ray(parse_complex(p.get("ray", [0, 1])))
    if args.action == "solve":
        hbars = _hbar_grid(args.hbar_grid or "ring:0.01,10,32", ray)
        basis = np.eye(2 * sol.n, dtype=int)
        rows = [(abs(h), h, tuple(basis[i]), complex(cmath.exp(x)))
                for h in hbars for i, x in enumerate(sol.log_X(ray, h))]
        names = ["abs_hbar", "hbar", "class", "X"]
        _emit(args, {"ray": ray.phase, "rows": [{"hbar": h, "class": list(g), "X": x} for _, h, g, x in rows]},
              emit_plot_data(names, rows))
        return 0
    check = args.check
    if check == "jumps":
        target = Ray(parse_complex(p["jump_ray"])) if "jump_ray" in p else Ray.through(sol.structure.Z(
            sol.structure.active(None if sol.family != "conifold" else 1e3)[0][0]))
        rng = np.random.default_rng(args.seed)
        hs = [math.exp(r) * target.phase * cmath.exp(1j * a) for r, a in zip(rng.uniform(-1, 1, 20), rng.uniform(-1.2, 1.2, 20))]
        rep = verify_jumps(sol, target, hs, tol=_tol(args, "analytic"))
        _emit(args, rep)
        return _verdict(rep["pass"])
    if check == "asymptotics":
        gamma = p.get("gamma", [0] * sol.n + [1] + [0] * (sol.n - 1))
        hs = [ray.phase * 2.0 ** -k for k in range(1, 21)]
        rep = verify_asymptotics(sol, ray, gamma, hs, tol=_tol(args, "quadrature"))
        _emit(args, rep, asymptotics_csv(rep, hs))
        return _verdict(rep["pass"])
    hb = parse_complex(p.get("hbar", ray.phase))
    H = extract_hessian(sol, ray, hb)
    _emit(args, {"z": H.z, "theta": H.theta, "hessian": H.value, "residual": H.residual, "condition": H.condition})
    return 0


# --- joyce ----------------------------------------------------------------------------------------


def _model(spec: str, p: dict):
    from .joyce import model_conifold, model_uncoupled

    if spec == "conifold":
        z = _cvec(p.get("z", [[0.4, 0.6], [1, 0]]))
        return model_conifold(), z, None
    if spec == "a1":
        z = _cvec(p.get("z", [1.0, 0.0]))
        s = a1_structure(z[0])
        return model_uncoupled(s), z, s
    s = _load_model_structure(spec)
    return model_uncoupled(s), np.array(s.central_charge), s


def cmd_joyce(args) -> int:
    from .joyce import (
        diamond,
        joyce_form,
        linear_data,
        prepotential_uncoupled,
        third_derivatives_fd,
        verify_fl_pde,
        wdvv_check,
    )

    p = _params(args)
    m, z, s = _model(args.model, p)
    theta = _cvec(p["theta"]) if "theta" in p else np.full(m.n, 0.1 + 0.05j)
    if args.action == "form":
        ld = linear_data(m, z)
        _emit(args, {"g": ld.g, "V": ld.V, "connection": ld.connection, "T": ld.T, "euler": ld.euler})
    elif args.action == "diamond":
        _emit(args, {"diamond": diamond(m, z), "g": joyce_form(m, z)})
    elif args.action == "hessian":
        _emit(args, {"z": z, "theta": theta, "hessian": m.hessian(z, theta), "J": m.J(z, theta)})
    elif args.action == "pde":
        rng = np.random.default_rng(args.seed)
        samples = [(z, theta)] + [(z, rng.normal(size=m.n) + 1j * rng.normal(size=m.n)) for _ in range(4)]
        rep = verify_fl_pde(m, samples, tol=_tol(args, "fd"))
        _emit(args, rep)
        return _verdict(rep["pass"])
    elif args.action == "prepotential":
        if args.model == "conifold":
            F, T = m.prepotential, m.third0(z)
        else:
            P = prepotential_uncoupled(s)
            F, T = P, P.third(z)
        fd = third_derivatives_fd(F, z)
        err = float(np.max(np.abs(fd - T)))
        ok = err < _tol(args, "fd")
        _emit(args, {"F": F(z), "third": T, "fd_error": err, "pass": ok})
        return _verdict(ok)
    else:
        if s is None:
            raise UsageError("wdvv needs a finite uncoupled structure")
        rng = np.random.default_rng(args.seed)
        samples = [z] + [rng.normal(size=m.n) + 1j * rng.normal(size=m.n) for _ in range(4)]
        rep = wdvv_check(s, samples, tol=_tol(args, "analytic"))
        rep["report"] = "associative" if rep["pass"] else "not associative"
        _emit(args, rep)
        return 0
    return 0


# --- frobenius -------------------------------------------------------------------------------------


def cmd_frobenius(args) -> int:
    from .frobenius import (
        a2_structure,
        canonical_coordinates,
        frobenius_V,
        multiplication_operator_U,
        twisted_product_constants,
    )

    if args.action == "a2":
        if args.at is None:
            raise UsageError("frobenius a2 needs --at a,b")
        t = np.array(args.at, dtype=complex)
        f = a2_structure()
        U, det = multiplication_operator_U(f, t)
        out = {"U": U, "det": det, "V": frobenius_V(f), "twisted_products": twisted_product_constants(f, t)}
        try:
            cf = canonical_coordinates(f, t)
            out["eigenvalues"] = cf.u
        except DTError as exc:
            out["eigenvalues"] = np.linalg.eigvals(U)
            out["tame"] = False
            out["note"] = str(exc)
        _emit(args, out)
        return 0
    from .frobenius import trivial_structure
    from .joyce import compatibility_check, model_uncoupled

    if args.model == "a1":
        rep = compatibility_check(model_uncoupled(a1_structure(1.0)), trivial_structure(), [[1.3 + 0.2j], [0.5 - 2j]],
                                  tol=_tol(args, "analytic"))
    elif args.model == "a2":
        pts = [(0.3 + 0.4j, -0.7 + 0.2j), (-1 + 0.5j, 0.4 + 0.1j)]
        rep = A2.a2_compatibility(pts, tol=_tol(args, "multilayer"))
    else:
        raise UsageError("frobenius compat --model a1|a2")
    _emit(args, rep)
    return _verdict(rep["pass"])


# --- a2 ------------------------------------------------------------------------------------------------


def cmd_a2(args) -> int:
    if args.a is None or args.b is None:
        raise UsageError("a2 subcommands need --a and --b")
    pt = A2.A2Point(args.a, args.b)
    if args.action == "periods":
        basis = A2.cycle_basis(pt)
        _emit(args, {"roots": basis.roots, "periods": A2.periods(pt, basis), "pairing": basis.pairing})
        return 0
    if args.action == "spectrum":
        z1, z2 = A2.periods(pt)
        spec = A2.spectrum_from_periods(z1, z2)
        _emit(args, {"periods": [z1, z2], "chamber": "b" if len(spec) == 6 else "a",
                     "spectrum": [{"class": list(g), "omega": f"{o}/1"} for g, o in spec]})
        return 0
    if args.action == "joyce-form":
        try:
            F = A2.a2_joyce_form(pt)
        except DTError as exc:
            _emit(args, {"status": "SKIPPED", "reason": str(exc)})
            return 0
        expected = 2j * math.pi / 5 * np.array([[0, 1], [1, 0]])
        err = float(np.max(np.abs(F.g_ab - expected)))
        ok = err < _tol(args, "multilayer")
        _emit(args, {"g": F.g_ab, "expected": expected, "error": err, "pass": ok})
        return _verdict(ok)
    if args.q is None or args.r is None:
        raise UsageError(f"a2 {args.action} needs --q and --r")
    w = A2.wpoint(args.a, args.b, args.q, args.r)
    if args.action == "joyce":
        th = A2.theta_map(w)
        _emit(args, {"J": A2.a2_joyce_J(w), "p": w.p, "theta_map": th})
        return 0
    hbars = tuple(args.hbar) if args.hbar else (1j, 1 + 1j)
    rep = A2.verify_flow_pushforward(pt, w, hbars=hbars, tol=_tol(args, "multilayer"))
    _emit(args, rep)
    return _verdict(rep["pass"])


# --- verify ---------------------------------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .acceptance import gate, run_all

    if args.suite != "desk":
        raise UsageError("only --suite desk is available")
    only = {int(k) for k in args.only.split(",")} if args.only else None
    results = run_all(args.seed, only)
    if args.format == "csv":
        text = emit_plot_data(["criterion", "status"], [(r.number, r.status) for r in results])
    else:
        lines = [f"[{r.status}] criterion {r.number:2d}: {r.title}" for r in results]
        text = "\n".join(lines) + "\n"
        if args.verbose:
            text += dumps({str(r.number): r.detail for r in results}) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    ok = gate(results) if only is None else all(r.status != "FAIL" for r in results)
    return _verdict(ok)


# --- parser ----------------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="JSON object or @file with parameters")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol", type=float, help="override the default tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cutoff", type=float, help="central charge cutoff for active classes")

    ap = argparse.ArgumentParser(prog="dtjoyce", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="group", required=True)

    p = sub.add_parser("bps", parents=[common], help="inspect a BPS structure file")
    p.add_argument("action", choices=("show", "double", "rays"))
    p.add_argument("file")
    p.set_defaults(func=cmd_bps)

    p = sub.add_parser("wallcrossing", parents=[common], help="BPS automorphisms and sector products")
    p.add_argument("action", choices=("apply", "sector", "pentagon"))
    p.add_argument("file", nargs="?")
    p.set_defaults(func=cmd_wallcrossing)

    p = sub.add_parser("specfn", parents=[common], help="special functions")
    p.add_argument("action", choices=("eval",))
    p.add_argument("--fn", required=True,
                   choices=("gamma", "loggamma", "lambda", "loglambda", "polylog", "li", "stirling",
                            "F", "G", "Fstar", "Gstar"))
    p.set_defaults(func=cmd_specfn)

    p = sub.add_parser("rh", parents=[common], help="explicit Riemann-Hilbert solutions")
    p.add_argument("action", choices=("solve", "verify"))
    p.add_argument("--family", choices=("a1", "uncoupled", "conifold"), required=True)
    p.add_argument("--hbar-grid", dest="hbar_grid")
    p.add_argument("--which", "--check", dest="check", choices=("jumps", "asymptotics", "hessian"), default="jumps")
    p.set_defaults(func=cmd_rh)

    p = sub.add_parser("joyce", parents=[common], help="Joyce functions and linear data")
    p.add_argument("action", choices=("form", "diamond", "wdvv", "prepotential", "pde", "hessian"))
    p.add_argument("--model", required=True, help="a1 | conifold | path to a finite uncoupled structure file")
    p.set_defaults(func=cmd_joyce)

    p = sub.add_parser("frobenius", parents=[common], help="Frobenius structures")
    p.add_argument("action", choices=("a2", "compat"))
    p.add_argument("--at", type=_complex_pair)
    p.add_argument("--model", choices=("a1", "a2"), default="a1")
    p.set_defaults(func=cmd_frobenius)

    p = sub.add_parser("a2", parents=[common], help="the A2 family")
    p.add_argument("action", choices=("periods", "spectrum", "joyce", "verify-flows", "joyce-form"))
    p.add_argument("--a", type=_complex_arg)
    p.add_argument("--b", type=_complex_arg)
    p.add_argument("--q", type=_complex_arg)
    p.add_argument("--r", type=_complex_arg)
    p.add_argument("--hbar", type=_complex_arg, action="append")
    p.set_defaults(func=cmd_a2)

    p = sub.add_parser("verify", parents=[common], help="acceptance suite")
    p.add_argument("action", choices=("all",))
    p.add_argument("--suite", default="desk")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)
    return ap


def _complex_pair(text: str):
    """'a,b' with real entries, or 'are,aim;bre,bim'."""
    try:
        if ";" in text:
            return tuple(_complex_arg(x) for x in text.split(";"))
        a, b = text.split(",")
        return (complex(float(a)), complex(float(b)))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot read point {text!r}") from exc


_VALUE_FLAGS = {"--a", "--b", "--q", "--r", "--hbar", "--at"}


def _join_negative_values(argv: list[str]) -> list[str]:
    """Let '--b -0.7,0.2' through: argparse would read the value as an option."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and len(argv[i + 1]) > 1 \
                and (argv[i + 1][1].isdigit() or argv[i + 1][1] == "."):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    ap = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        if args.tol is not None and not args.tol > 0:
            raise UsageError("--tol must be positive")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DTError, ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        msg = f"missing parameter {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
