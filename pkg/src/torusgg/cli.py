"""``torusgg`` command line: scene inspection, global-generation checks, lattice arithmetic, suites.

Every flag with a value can also be set through ``TORUSGG_<FLAG>``
(``--tail-bound`` -> ``TORUSGG_TAIL_BOUND``); flags win over the environment.
Exit status: 0 on success, 1 if a check or suite fails, 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, fujita, gg, mukai, report
from .appell_humbert import LineBundleData, h0, is_ample, tensor_power
from .errors import ParseError, SceneReferenceError, TorusGGError
from .lattice import kernel_coords, kernel_invariants
from .scene import Scene, load_scene_file, tomllib
from .semihomogeneous import SHBundle, chern_total, chi_surface_consistency, is_ample_sh, orientation, sh_h0, top_intersection
from .suites import PASS, Settings, run_suite, selftest_scene, validate
from .theta import section_basis

ENV_PREFIX = "TORUSGG_"


def _env(name: str, cast, default=None):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise ParseError(f"{ENV_PREFIX}{name}={raw!r} is not a valid value") from None


def _emit(obj, path: str | None = None) -> None:
    if path:
        report.write(obj, path)
    else:
        sys.stdout.write(report.dumps(obj))


def _header(digest: str) -> dict:
    return {"tool": "torusgg", "version": __version__, "input_digest": digest}


def _settings(args) -> Settings:
    return Settings(
        tail_bound=args.tail_bound,
        radius=args.radius,
        grid=getattr(args, "grid", None),
        torsion=getattr(args, "torsion", None),
        threads=args.threads,
    )


def _pick(scene: Scene, name: str | None, kind=None):
    names = [name] if name else [n for n, b in scene.bundles.items() if kind is None or isinstance(b, kind)]
    for n in names:
        b = scene.bundle(n)
        if kind is not None and not isinstance(b, kind):
            raise ParseError(f"bundle {n!r} has the wrong kind for this command")
    return names


# ---------------------------------------------------------------- scene info


def cmd_torus(args) -> int:
    scene = load_scene_file(args.scene)
    tori = {n: {**T.to_dict(), "orientation": orientation(T)} for n, T in scene.tori.items() if not args.name or n == args.name}
    if args.name:
        scene.torus(args.name)
    isogenies = {
        n: {
            "degree": p.degree,
            "g": p.g,
            "kernel_invariants": kernel_invariants(p),
            "kernel_coords": [[str(x) for x in c] for c in kernel_coords(p)],
        }
        for n, p in scene.isogenies.items()
    }
    _emit({**_header(scene.digest), "tori": tori, "isogenies": isogenies})
    return 0


def _parse_point(text: str, g: int) -> np.ndarray:
    try:
        x = [float(t) for t in text.split(",")]
    except ValueError:
        raise ParseError(f"point must be comma separated lattice coordinates, got {text!r}") from None
    if len(x) != 2 * g:
        raise ParseError(f"point needs {2 * g} lattice coordinates")
    return np.array(x)


def cmd_bundle(args) -> int:
    scene = load_scene_file(args.scene)
    out = {}
    for n in _pick(scene, args.name, LineBundleData):
        L = scene.bundles[n]
        ample = is_ample(L)
        info = {**L.to_dict(), "g": L.g, "divisors": L.divisors, "ample": ample, "h0": h0(L) if ample else None}
        if args.point and ample:
            v = L.torus.point(_parse_point(args.point, L.g))
            vals = section_basis(L).evaluate(v.reshape(1, -1), _settings(args).tp, normalized=True)[0]
            info["point"] = args.point
            info["normalized_values"] = list(vals)
        out[n] = info
    _emit({**_header(scene.digest), "bundles": out})
    return 0


def cmd_sh(args) -> int:
    scene = load_scene_file(args.scene)
    out = {}
    for n in _pick(scene, args.name, SHBundle):
        E = scene.bundles[n]
        ample = is_ample_sh(E)
        info = {**E.to_dict(), "g": E.torus.g, "ample": ample, "h0": sh_h0(E) if ample else None}
        c1_top = top_intersection(E.torus, E.alt_form.matrix)
        info["c1_top_power"] = str(c1_top)
        if E.torus.g == 2:
            info["chern"] = chern_total(E.rank, int(c1_top)).to_dict()
            if E.is_pushforward and ample:
                info["chi_identities"] = chi_surface_consistency(E.realization.isogeny, E.realization.line)
        out[n] = info
    _emit({**_header(scene.digest), "bundles": out})
    return 0


# ---------------------------------------------------------------- gg


def cmd_gg_check(args) -> int:
    path, _, name = args.bundle.partition(":")
    scene = load_scene_file(path)
    name = name or scene.default_bundle()
    b = scene.bundle(name)
    st = _settings(args)
    s = gg.SampleStrategy(grid_n=args.grid or 10, torsion_order=args.torsion or 0, refinement=not args.no_refine)
    if isinstance(b, LineBundleData):
        rep = gg.check_gg_line(tensor_power(b, args.power), s, st.tp, st.threads)
    else:
        rep = gg.check_gg_bundle(b, args.power, s, st.tp, st.threads)
    doc = {
        **_header(scene.digest),
        "inputs": {"bundle": name, "power": args.power, "sampling": s.to_dict(), "truncation": st.to_dict()},
        "report": rep.to_dict(),
    }
    _emit(doc, args.report)
    if args.report:
        print(f"{name}^{args.power}: {rep.verdict} (min margin {rep.min_margin:.3e}, {rep.samples} samples)", file=sys.stderr)
    if args.expect:
        return 0 if rep.verdict == args.expect else 1
    return 1 if rep.verdict == gg.INCONCLUSIVE else 0


# ---------------------------------------------------------------- mukai


def _ns_lattice(path: str | None) -> mukai.NSLattice:
    if not path:
        return mukai.NSLattice.principal()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(f"{path} is neither JSON nor TOML") from exc
    gram = data.get("gram") if isinstance(data, dict) else data
    try:
        return mukai.NSLattice(tuple(tuple(r) for r in gram))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad Gram matrix in {path}: {exc}") from exc


def _vector(text: str | None, lattice: mukai.NSLattice, flag: str) -> mukai.MukaiVector:
    if not text:
        raise ParseError(f"{flag} is required")
    try:
        return mukai.MukaiVector.parse(text, lattice)
    except ValueError as exc:
        raise ParseError(f"{flag}: {exc}") from exc


def cmd_mukai(args) -> int:
    lat = _ns_lattice(args.ns_gram)
    v = _vector(args.v, lat, "--v")
    out = {"v": v.to_dict(), "ns_gram": [list(r) for r in lat.gram]}
    if args.action == "pair":
        w = _vector(args.w, lat, "--w") if args.w else v
        out.update({"w": w.to_dict(), "pair": mukai.pair(v, w)})
    elif args.action == "dim":
        out.update({"pair": mukai.pair(v, v), "moduli_dim": mukai.moduli_dim(v), "primitive": mukai.is_primitive(v)})
        try:
            fib = mukai.albanese_fiber(v)
            out["albanese_fiber"] = {"kummer_index": fib.kummer_index, "fiber_dim": fib.fiber_dim}
        except TorusGGError as exc:
            out["albanese_fiber"] = {"error": str(exc)}
    else:
        out.update(mukai.theorem_b_gate(v, args.m, args.fixed_det).to_dict())
    _emit(out)
    return 0


# ---------------------------------------------------------------- fujita


def cmd_fujita(args) -> int:
    if args.action == "show":
        data = fujita.load_catalog(args.catalog)
        out = {
            "version": data.get("version"),
            "entries": [e.to_dict() for e in fujita.standard_entries(args.catalog)],
            "fibrations": [f.to_dict() for f in fujita.standard_fibrations(args.catalog)],
        }
    elif args.action == "check":
        if args.hypersurface:
            try:
                N, d = (int(t) for t in args.hypersurface.split(","))
            except ValueError:
                raise ParseError("--hypersurface expects N,d") from None
            e = fujita.hypersurface_fujita(N, d, args.very_general)
        elif args.blowup is not None:
            e = fujita.blowup_lower_bound(args.blowup)
        elif args.entry:
            e = _entry(args.entry, args.catalog)
        else:
            raise ParseError("fujita check needs --hypersurface, --blowup or --entry")
        out = {"entry": e.to_dict(), "value": str(e.value)}
        try:
            out["theorem_a_exponents"] = fujita.theorem_a_bound(e).to_dict()
        except TorusGGError as exc:
            out["theorem_a_exponents"] = {"error": str(exc)}
    else:
        if args.total:
            if not (args.fiber and args.base):
                raise ParseError("--total needs --fiber and --base")
            fibs = [fujita.FibrationEntry(*(_entry(x, args.catalog) for x in (args.total, args.fiber, args.base)), "custom")]
        else:
            fibs = fujita.standard_fibrations(args.catalog)
            if args.fibration:
                fibs = [f for f in fibs if f.fibration_id == args.fibration]
                if not fibs:
                    raise SceneReferenceError(f"unknown fibration {args.fibration!r}")
        out = {"fibrations": [{**f.to_dict(), "verdict": fujita.conjecture_check(f)} for f in fibs]}
    _emit(out)
    return 0


def _entry(family_id: str, catalog):
    try:
        return fujita.entry(family_id, catalog)
    except KeyError:
        raise SceneReferenceError(f"unknown catalog entry {family_id!r}") from None


# ---------------------------------------------------------------- suites


def _run_scene(scene: Scene, args) -> int:
    validate(scene)
    st = _settings(args)
    rows = []
    for spec in scene.suites:
        rows.append(run_suite(scene, spec, st))
    passed = all(r["status"] == PASS for r in rows)
    doc = {
        **_header(scene.digest),
        "parameters": st.to_dict(),
        "suites": [{k: r[k] for k in ("name", "kind", "status", "result")} for r in rows],
        "passed": passed,
    }
    # wall-clock goes to the terminal only so that reports stay byte-identical
    width = max([len(r["name"]) for r in rows] + [5])
    print(f"{'suite':{width}s}  {'status':12s}  seconds", file=sys.stderr)
    for r in rows:
        print(f"{r['name']:{width}s}  {r['status']:12s}  {r['seconds']:7.2f}", file=sys.stderr)
        if "error" in r["result"]:
            print(f"  {r['result']['error']}", file=sys.stderr)
    print(f"{sum(r['status'] == PASS for r in rows)}/{len(rows)} suites passed", file=sys.stderr)
    _emit(doc, args.report)
    return 0 if passed else 1


def cmd_run(args) -> int:
    return _run_scene(load_scene_file(args.scene), args)


def cmd_selftest(args) -> int:
    scene = selftest_scene()
    if args.list:
        for spec in scene.suites:
            print(f"{spec['name']}\t{spec['kind']}")
        return 0
    return _run_scene(scene, args)


# ---------------------------------------------------------------- parser


def _add_truncation(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tail-bound", type=float, default=_env("TAIL_BOUND", float, 1e-12), help="theta series tail bound")
    p.add_argument("--radius", type=int, default=_env("RADIUS", int), help="fixed enumeration radius")
    p.add_argument("--threads", type=int, default=_env("THREADS", int, 1), help="worker threads for sample evaluation")


def _add_sampling(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=_env("GRID", int), help="grid points per lattice direction")
    p.add_argument("--torsion", type=int, default=_env("TORSION", int), help="add all k-torsion points for k up to this order")


def _add_report(p: argparse.ArgumentParser) -> None:
    p.add_argument("--report", default=_env("REPORT", str), help="write the JSON report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torusgg", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"torusgg {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("torus", help="tori and isogenies of a scene")
    p.add_argument("scene")
    p.add_argument("--name")
    p.set_defaults(func=cmd_torus)

    p = sub.add_parser("bundle", help="line bundles of a scene")
    p.add_argument("scene")
    p.add_argument("--name")
    p.add_argument("--point", help="lattice coordinates x1,...,x2g for normalized section values")
    _add_truncation(p)
    p.set_defaults(func=cmd_bundle)

    p = sub.add_parser("sh", help="semihomogeneous bundles of a scene")
    p.add_argument("scene")
    p.add_argument("--name")
    p.set_defaults(func=cmd_sh)

    p = sub.add_parser("gg", help="global-generation checks")
    gsub = p.add_subparsers(dest="action", required=True)
    c = gsub.add_parser("check", help="sampled evaluation-rank check of a tensor power")
    c.add_argument("--bundle", required=True, help="scene file, optionally FILE:NAME")
    c.add_argument("--power", type=int, default=1)
    c.add_argument("--expect", choices=[gg.GENERATED, gg.BASE_POINT, gg.INCONCLUSIVE])
    c.add_argument("--no-refine", action="store_true")
    _add_sampling(c)
    _add_truncation(c)
    _add_report(c)
    c.set_defaults(func=cmd_gg_check)

    p = sub.add_parser("mukai", help="Mukai lattice arithmetic")
    p.add_argument("action", choices=["pair", "dim", "gate"])
    p.add_argument("--ns-gram", default=_env("NS_GRAM", str), help="JSON or TOML file with the Gram matrix")
    p.add_argument("--v", help="Mukai vector 'r;c1;ch2'")
    p.add_argument("--w", help="second vector for pair")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--fixed-det", action="store_true", help="fixed-determinant moduli space")
    p.set_defaults(func=cmd_mukai)

    p = sub.add_parser("fujita", help="Fujita-number catalog")
    p.add_argument("action", choices=["show", "check", "conjecture"])
    p.add_argument("--catalog", default=_env("CATALOG", str))
    p.add_argument("--hypersurface", help="N,d")
    p.add_argument("--very-general", action="store_true")
    p.add_argument("--blowup", type=int)
    p.add_argument("--entry")
    p.add_argument("--fibration")
    p.add_argument("--total")
    p.add_argument("--fiber")
    p.add_argument("--base")
    p.set_defaults(func=cmd_fujita)

    for name, func, text in (("run", cmd_run, "run the suites of a scene"), ("selftest", cmd_selftest, "run the built-in corpus")):
        p = sub.add_parser(name, help=text)
        if name == "run":
            p.add_argument("scene")
        else:
            p.add_argument("--list", action="store_true", help="list suites without running them")
        _add_sampling(p)
        _add_truncation(p)
        _add_report(p)
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (ParseError, SceneReferenceError) as exc:
        print(f"torusgg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"torusgg: invalid argument: {exc}", file=sys.stderr)
        return 2
    except TorusGGError as exc:
        print(f"torusgg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
