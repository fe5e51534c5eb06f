"""Scene documents: named tori, isogenies, bundles and suite invocations read from TOML.

    [tori.E]
    tau = [0.0, 1.0]                      # or period_matrix = [[[re, im], ...], ...]

    [tori.A]
    product = ["E", "F"]

    [isogenies.p]
    target = "E"
    lattice_matrix = [[1, 0], [0, 2]]     # source = sublattice, alpha = identity
    source_name = "E2"                    # registers the source torus

    [bundles.L]
    torus = "E2"
    type = [2]                            # or alt_form = [[...]] or hermitian = [[[re, im]]]
    chi = [[1.0, 0.0], [1.0, 0.0]]        # optional

    [bundles.P]
    pushforward = { isogeny = "p", bundle = "L" }

    [[suites]]
    name = "..."
    kind = "lefschetz"
"""
from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field

import numpy as np

from .appell_humbert import LineBundleData, product_type_form
from .errors import ParseError, SceneReferenceError, TorusGGError
from .lattice import IntAltForm, Isogeny, Torus
from .semihomogeneous import SHBundle, from_pushforward

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass
class Scene:
    tori: dict[str, Torus] = field(default_factory=dict)
    isogenies: dict[str, Isogeny] = field(default_factory=dict)
    bundles: dict[str, LineBundleData | SHBundle] = field(default_factory=dict)
    suites: list[dict] = field(default_factory=list)
    main: str | None = None
    digest: str = ""

    def bundle(self, name: str):
        if name not in self.bundles:
            raise SceneReferenceError(f"unknown bundle {name!r}")
        return self.bundles[name]

    def line_bundle(self, name: str) -> LineBundleData:
        b = self.bundle(name)
        if not isinstance(b, LineBundleData):
            raise ParseError(f"bundle {name!r} is not a line bundle")
        return b

    def sh_bundle(self, name: str) -> SHBundle:
        b = self.bundle(name)
        if not isinstance(b, SHBundle):
            raise ParseError(f"bundle {name!r} is not a pushforward bundle")
        return b

    def torus(self, name: str) -> Torus:
        if name not in self.tori:
            raise SceneReferenceError(f"unknown torus {name!r}")
        return self.tori[name]

    def isogeny(self, name: str) -> Isogeny:
        if name not in self.isogenies:
            raise SceneReferenceError(f"unknown isogeny {name!r}")
        return self.isogenies[name]

    def default_bundle(self) -> str:
        """``main`` if given, otherwise the single bundle no other bundle refers to."""
        if self.main:
            self.bundle(self.main)
            return self.main
        used = {b.realization.line for b in self.bundles.values() if isinstance(b, SHBundle)}
        roots = [n for n, b in self.bundles.items() if not any(b is u for u in used)]
        if len(roots) != 1:
            raise ParseError(f"scene defines several candidate bundles {roots}; name one")
        return roots[0]


def _complex(x, where: str) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(t, (int, float)) for t in x):
        return complex(x[0], x[1])
    raise ParseError(f"{where}: expected a number or an [re, im] pair, got {x!r}")


def _complex_matrix(rows, where: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ParseError(f"{where}: expected a list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ParseError(f"{where}: ragged matrix")
    return np.array([[_complex(x, where) for x in r] for r in rows])


def _int_matrix(rows, where: str) -> list[list[int]]:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError(f"{where}: expected an integer matrix")
    if any(not isinstance(x, int) for r in rows for x in r):
        raise ParseError(f"{where}: entries must be integers")
    return rows


def _table(doc: dict, key: str) -> dict:
    val = doc.get(key, {})
    if not isinstance(val, dict):
        raise ParseError(f"[{key}] must be a table")
    return val


def _build_torus(name: str, spec: dict, tori: dict) -> Torus:
    where = f"tori.{name}"
    given = [k for k in ("tau", "product", "period_matrix") if k in spec]
    if len(given) != 1:
        raise ParseError(f"{where}: needs exactly one of tau, product or period_matrix")
    if "tau" in spec:
        T = Torus.elliptic(_complex(spec["tau"], where))
    elif "product" in spec:
        parts = []
        for ref in spec["product"]:
            if ref not in tori:
                raise SceneReferenceError(f"{where}: unknown torus {ref!r}")
            parts.append(tori[ref])
        T = Torus.product(*parts)
    else:
        T = Torus(_complex_matrix(spec["period_matrix"], where))
    if "g" in spec and spec["g"] != T.g:
        raise ParseError(f"{where}: g = {spec['g']} but the torus has dimension {T.g}")
    return T


def _build_line(name: str, spec: dict, scene: Scene) -> LineBundleData:
    where = f"bundles.{name}"
    if "torus" not in spec:
        raise ParseError(f"{where}: missing torus")
    T = scene.torus(spec["torus"])
    chi = None
    if "chi" in spec:
        chi = [_complex(x, where) for x in spec["chi"]]
        if len(chi) != 2 * T.g:
            raise ParseError(f"{where}: chi needs {2 * T.g} values")
    if "hermitian" in spec:
        return LineBundleData.from_hermitian(T, _complex_matrix(spec["hermitian"], where), chi)
    if "alt_form" in spec:
        return LineBundleData.from_alt_form(T, IntAltForm(_int_matrix(spec["alt_form"], where)), chi)
    if "type" in spec:
        divisors = spec["type"]
        if len(divisors) != T.g:
            raise ParseError(f"{where}: type needs {T.g} divisors")
        return LineBundleData.from_alt_form(T, product_type_form(divisors), chi)
    raise ParseError(f"{where}: needs hermitian, alt_form, type or pushforward")


def load_scene(text: str) -> Scene:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"invalid TOML: {exc}") from exc
    scene = Scene(digest=hashlib.sha256(text.encode()).hexdigest())
    try:
        _resolve(doc, scene)
    except (ParseError, SceneReferenceError):
        raise
    except (TorusGGError, ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"invalid scene data: {exc}") from exc
    return scene


def load_scene_file(path) -> Scene:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read scene {path}: {exc}") from exc
    return load_scene(data.decode())


def _resolve(doc: dict, scene: Scene) -> None:
    for name, spec in _table(doc, "tori").items():
        scene.tori[name] = _build_torus(name, spec, scene.tori)
    for name, spec in _table(doc, "isogenies").items():
        where = f"isogenies.{name}"
        target = scene.torus(spec.get("target", ""))
        M = _int_matrix(spec.get("lattice_matrix"), where)
        if "source" in spec:
            source = scene.torus(spec["source"])
            alpha = _complex_matrix(spec["linear_map"], where) if "linear_map" in spec else np.eye(target.g)
            p = Isogeny(source, target, alpha, M)
        else:
            p = Isogeny.from_sublattice(target, M)
        scene.isogenies[name] = p
        if "source_name" in spec:
            scene.tori[spec["source_name"]] = p.source
    bundles = _table(doc, "bundles")
    for name, spec in bundles.items():
        if "pushforward" not in spec:
            scene.bundles[name] = _build_line(name, spec, scene)
    for name, spec in bundles.items():
        if "pushforward" in spec:
            pf = spec["pushforward"]
            p = scene.isogeny(pf.get("isogeny", ""))
            scene.bundles[name] = from_pushforward(p, scene.line_bundle(pf.get("bundle", "")))
    suites = doc.get("suites", [])
    if not isinstance(suites, list):
        raise ParseError("suites must be an array of tables")
    for i, s in enumerate(suites):
        if "kind" not in s:
            raise ParseError(f"suites[{i}]: missing kind")
        scene.suites.append(dict(s, name=s.get("name", f"{s['kind']}_{i}")))
    scene.main = doc.get("main")
