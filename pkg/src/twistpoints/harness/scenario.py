"""Scenario files: a versioned YAML key tree.

Grammar (schema 1)::

    schema: 1                      # required
    name: <str>                    # required
    n: <int>                       # half dimension, required
    seed: <int>                    # default 0
    Q:                             # exactly one of blocks / matrix
      blocks:
        - {family: vg, t_j: 1, theta: 1.0, epsilon: 1}
        - {family: Rtheta, theta: 0.5}
        - {family: Mm, lam: 2.0, m: 1}
        - {family: N2mQuad, rho: 1.5, theta: 0.4, m: 1}
        - {family: N1, lam: -1, b: 1}
        - {family: Nm, lam: -1, b: [1, 0]}
      matrix: [[...], ...]         # constant symmetric B (2n x 2n)
    h:                             # optional compact perturbation
      terms:
        - {center: [..], radius: r, poly: [[coef, [e1, ..]], ..],
           amplitude: a, frequency: f, phase: p}
      fixed_points:                # optional: bumps making z = c a critical point
        - {center: [..], radius: r, hessian: [[..]]}
    pairs: [[k, l], ...]           # prime pairs
    primes: {below: N, m: M}       # prime-sequence parameters
    suites: [name, ...]            # default: every suite the data supports
    tolerances: {key: value}       # overrides of the suite defaults
    options: {suite-name: {key: value}}
    twist: {...}                   # synthetic index data for twist-gap
    theorem2: {...}                # options for theorem2-cases

Fractions may be written as strings "p/q".
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from ..errors import ScenarioError

SCHEMA_VERSION = 1

SUITES = ("lemma-qklit", "le-q", "le-pandh", "cap-equivalence", "growth-constants",
          "twist-gap", "theorem2-cases")

DEFAULT_TOLERANCES = {
    "loop": 1e-10,           # |phi^1_P - I|
    "nondeg": 1e-3,          # min distance of the capped path spectrum from 1
    "angle": 1e-8,           # unit-angle formula
    "time_dependence": 1e-9,  # capped form constant in t
    "flow": 1e-8,            # time-one maps agree
    "action": 1e-8,          # action of P # H vs H
    "action_iterate": 1e-7,  # action of H^{k minus l} vs k A_H
    "pair": 1e-6,            # orbit pairing
    "newton": 1e-10,
    "cap_conservation": 1e-9,
}

_TOP = {"schema", "name", "n", "seed", "Q", "h", "pairs", "primes", "suites", "tolerances",
        "options", "twist", "theorem2", "description"}
_Q = {"blocks", "matrix"}
_H = {"terms", "fixed_points"}
_TERM = {"center", "radius", "poly", "amplitude", "frequency", "phase"}
_FIXED = {"center", "radius", "hessian"}
_PRIMES = {"below", "m"}
_TWIST = {"i_z0", "i_inf", "others", "a0", "eps0", "shift_per_gap", "spectrum"}
_THM2 = {"grid", "radius", "k"}
_FAMILIES = {
    "vg": ({"t_j", "theta"}, {"epsilon"}),
    "Rtheta": ({"theta"}, set()),
    "Mm": ({"lam"}, {"m"}),
    "N2mQuad": ({"rho", "theta"}, {"m"}),
    "N1": ({"lam", "b"}, set()),
    "Nm": ({"lam", "b"}, set()),
}


class _Node:
    """Python value with the position it came from."""

    __slots__ = ("value", "line", "col")

    def __init__(self, value, mark):
        self.value = value
        self.line = mark.line + 1
        self.col = mark.column + 1


def _convert(node):
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = _convert(k)
            if not isinstance(key.value, str):
                raise ScenarioError(f"line {key.line}, column {key.col}: keys must be strings")
            if key.value in out:
                raise ScenarioError(f"line {key.line}, column {key.col}: duplicate key {key.value!r}")
            out[key.value] = (key, _convert(v))
        return _Node(out, node.start_mark)
    if isinstance(node, yaml.SequenceNode):
        return _Node([_convert(v) for v in node.value], node.start_mark)
    loader = yaml.SafeLoader("")
    return _Node(loader.construct_object(node, deep=True), node.start_mark)


def _err(node, msg):
    return ScenarioError(f"line {node.line}, column {node.col}: {msg}")


def _mapping(node, allowed, required=(), what="mapping"):
    if not isinstance(node.value, dict):
        raise _err(node, f"{what} must be a mapping")
    for k, (kn, _) in node.value.items():
        if k not in allowed:
            raise _err(kn, f"unknown key {k!r} in {what}")
    for k in required:
        if k not in node.value:
            raise _err(node, f"missing key {k!r} in {what}")
    return {k: v for k, (_, v) in node.value.items()}


def _plain(node):
    v = node.value
    if isinstance(v, dict):
        return {k: _plain(x) for k, (_, x) in v.items()}
    if isinstance(v, list):
        return [_plain(x) for x in v]
    return v


def _number(node, what, integer=False):
    v = node.value
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise _err(node, f"{what} must be a number")
    if isinstance(v, str):
        try:
            v = Fraction(v)
        except ValueError:
            raise _err(node, f"{what}: cannot read {v!r} as a number") from None
    if integer:
        if isinstance(v, float) or (isinstance(v, Fraction) and v.denominator != 1):
            raise _err(node, f"{what} must be an integer")
        return int(v)
    return v


def _matrix(node, what):
    if not isinstance(node.value, list) or not node.value:
        raise _err(node, f"{what} must be a nonempty list of rows")
    rows = []
    for r in node.value:
        if not isinstance(r.value, list):
            raise _err(r, f"{what}: each row must be a list")
        rows.append([float(_number(x, what)) for x in r.value])
    if len({len(r) for r in rows}) != 1:
        raise _err(node, f"{what}: rows have different lengths")
    return rows


def _vector(node, what):
    if not isinstance(node.value, list):
        raise _err(node, f"{what} must be a list")
    return [float(_number(x, what)) for x in node.value]


@dataclass
class Scenario:
    name: str
    n: int
    seed: int = 0
    Q: dict = field(default_factory=dict)
    h: dict = field(default_factory=dict)
    pairs: list = field(default_factory=list)
    primes: dict = field(default_factory=dict)
    suites: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    twist: dict = field(default_factory=dict)
    theorem2: dict = field(default_factory=dict)
    description: str = ""
    source: str | None = None

    def tol(self, key):
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def option(self, suite, key, default):
        return self.options.get(suite, {}).get(key, default)

    def to_dict(self):
        out = {"schema": SCHEMA_VERSION, "name": self.name, "n": self.n, "seed": self.seed}
        for key in ("description", "Q", "h", "pairs", "primes", "suites", "tolerances",
                    "options", "twist", "theorem2"):
            v = getattr(self, key)
            if v:
                out[key] = _serial(v)
        return out

    def dumps(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=None)


def _serial(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {k: _serial(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_serial(x) for x in v]
    return v


def _parse_block(node):
    m = _mapping(node, {"family", "t_j", "theta", "epsilon", "lam", "m", "rho", "b"},
                 ("family",), "Q block")
    fam = m["family"].value
    if fam not in _FAMILIES:
        raise _err(m["family"], f"unknown block family {fam!r}")
    req, opt = _FAMILIES[fam]
    for k, v in m.items():
        if k != "family" and k not in req | opt:
            raise _err(v, f"key {k!r} does not apply to family {fam!r}")
    for k in req:
        if k not in m:
            raise _err(node, f"family {fam!r} needs {k!r}")
    out = {"family": fam}
    for k, v in m.items():
        if k == "family":
            continue
        if k == "b" and fam == "Nm":
            out[k] = _vector(v, "b")
        elif k in ("t_j", "m", "epsilon", "b"):
            out[k] = _number(v, k, integer=True)
        else:
            out[k] = float(_number(v, k))
    return out


def _parse_tree(root: _Node, source=None) -> Scenario:
    top = _mapping(root, _TOP, ("schema", "name", "n"), "scenario")
    ver = _number(top["schema"], "schema", integer=True)
    if ver != SCHEMA_VERSION:
        raise _err(top["schema"], f"unsupported schema version {ver}")
    name = top["name"].value
    if not isinstance(name, str) or not name:
        raise _err(top["name"], "name must be a nonempty string")
    n = _number(top["n"], "n", integer=True)
    if n < 1:
        raise _err(top["n"], "n must be positive")
    sc = Scenario(name, n, source=source)
    if "description" in top:
        sc.description = str(top["description"].value)
    if "seed" in top:
        sc.seed = _number(top["seed"], "seed", integer=True)
    if "Q" in top:
        q = _mapping(top["Q"], _Q, (), "Q")
        if len(q) != 1:
            raise _err(top["Q"], "Q needs exactly one of 'blocks' or 'matrix'")
        if "blocks" in q:
            if not isinstance(q["blocks"].value, list) or not q["blocks"].value:
                raise _err(q["blocks"], "blocks must be a nonempty list")
            sc.Q = {"blocks": [_parse_block(b) for b in q["blocks"].value]}
        else:
            B = _matrix(q["matrix"], "Q.matrix")
            if len(B) != 2 * n or len(B[0]) != 2 * n:
                raise _err(q["matrix"], f"Q.matrix must be {2 * n} x {2 * n}")
            sc.Q = {"matrix": B}
    if "h" in top:
        hm = _mapping(top["h"], _H, (), "h")
        out = {}
        if "terms" in hm:
            terms = []
            for t in hm["terms"].value or []:
                tm = _mapping(t, _TERM, ("center", "radius"), "h term")
                term = {"center": _vector(tm["center"], "center"),
                        "radius": float(_number(tm["radius"], "radius"))}
                if len(term["center"]) != 2 * n:
                    raise _err(tm["center"], f"center must have length {2 * n}")
                if "poly" in tm:
                    poly = []
                    for p in tm["poly"].value:
                        if not isinstance(p.value, list) or len(p.value) != 2:
                            raise _err(p, "poly entries are [coef, [exponents]]")
                        exps = [_number(e, "exponent", integer=True) for e in p.value[1].value]
                        poly.append([float(_number(p.value[0], "coef")), exps])
                    term["poly"] = poly
                for k in ("amplitude", "frequency", "phase"):
                    if k in tm:
                        term[k] = float(_number(tm[k], k))
                terms.append(term)
            out["terms"] = terms
        if "fixed_points" in hm:
            fps = []
            for f in hm["fixed_points"].value or []:
                fm = _mapping(f, _FIXED, ("center", "radius", "hessian"), "fixed point")
                c = _vector(fm["center"], "center")
                A = _matrix(fm["hessian"], "hessian")
                if len(c) != 2 * n or len(A) != 2 * n:
                    raise _err(f, f"fixed point data must have dimension {2 * n}")
                fps.append({"center": c, "radius": float(_number(fm["radius"], "radius")),
                            "hessian": A})
            out["fixed_points"] = fps
        sc.h = out
    if "pairs" in top:
        pairs = []
        for p in top["pairs"].value:
            if not isinstance(p.value, list) or len(p.value) != 2:
                raise _err(p, "pairs are [k, l]")
            k, l = (_number(x, "prime", integer=True) for x in p.value)
            if not k > l >= 1:
                raise _err(p, "need k > l >= 1")
            pairs.append([k, l])
        sc.pairs = pairs
    if "primes" in top:
        pm = _mapping(top["primes"], _PRIMES, ("below",), "primes")
        sc.primes = {k: _number(v, k, integer=True) for k, v in pm.items()}
    if "suites" in top:
        names = []
        for s in top["suites"].value:
            if s.value not in SUITES:
                raise _err(s, f"unknown suite {s.value!r}")
            names.append(s.value)
        sc.suites = names
    if "tolerances" in top:
        tm = _mapping(top["tolerances"], set(DEFAULT_TOLERANCES), (), "tolerances")
        sc.tolerances = {k: float(_number(v, k)) for k, v in tm.items()}
    if "options" in top:
        om = _mapping(top["options"], set(SUITES), (), "options")
        opts = {}
        for k, v in om.items():
            if not isinstance(v.value, dict):
                raise _err(v, "suite options must be a mapping")
            opts[k] = _plain(v)
        sc.options = opts
    if "twist" in top:
        tw = _mapping(top["twist"], _TWIST, ("i_z0", "i_inf"), "twist")
        out = {}
        for k, v in tw.items():
            if k in ("others", "spectrum"):
                out[k] = [_number(x, k) for x in v.value]
            else:
                out[k] = _number(v, k)
        sc.twist = out
    if "theorem2" in top:
        tm = _mapping(top["theorem2"], _THM2, (), "theorem2")
        sc.theorem2 = {k: _number(v, k, integer=(k != "radius")) for k, v in tm.items()}
    return sc


def parse_scenario(text, source=None) -> Scenario:
    """Parse scenario text; errors carry line and column."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise ScenarioError(f"{where}{exc.problem or exc}") from None
    if node is None:
        raise ScenarioError("line 1, column 1: empty scenario")
    return _parse_tree(_convert(node), source)


def bundled_dir() -> Path:
    return Path(__file__).with_name("scenarios")


def bundled_scenarios():
    return sorted(p.stem for p in bundled_dir().glob("*.yaml"))


def load_scenario(path_or_name) -> Scenario:
    """Load a scenario file, or a bundled scenario by name."""
    p = Path(path_or_name)
    if not p.exists():
        q = bundled_dir() / f"{path_or_name}.yaml"
        if not q.exists():
            raise ScenarioError(f"no scenario file or bundled scenario named {path_or_name!r}")
        p = q
    return parse_scenario(p.read_text(encoding="utf-8"), str(p))


# ---------------------------------------------------------------- building objects

def build_quadratic(sc: Scenario):
    """StructuredQuadratic for block scenarios, plain QuadraticForm for matrices."""
    from ..calculus.forms import QuadraticForm
    from ..calculus.loops import StructuredQuadratic
    from ..normal_forms import NormalFormBlock
    if "matrix" in sc.Q:
        return QuadraticForm.constant(np.array(sc.Q["matrix"], float))
    if "blocks" not in sc.Q:
        raise ScenarioError(f"scenario {sc.name!r} has no Q")
    blocks = []
    for b in sc.Q["blocks"]:
        fam = b["family"]
        if fam == "vg":
            part = StructuredQuadratic.vg(b["t_j"], b["theta"], b.get("epsilon", 1))
        else:
            if fam == "Rtheta":
                nb = NormalFormBlock.rtheta(b["theta"])
            elif fam == "Mm":
                nb = NormalFormBlock.mm(b["lam"], b.get("m", 1))
            elif fam == "N2mQuad":
                nb = NormalFormBlock.quad(b["rho"], b["theta"], b.get("m", 1))
            elif fam == "N1":
                nb = NormalFormBlock.n1(b["lam"], b["b"])
            else:
                nb = NormalFormBlock.nm(b["lam"], b["b"])
            part = StructuredQuadratic.from_normal_forms([nb])
        blocks.extend(part.blocks)
    SQ = StructuredQuadratic(blocks)
    if SQ.n != sc.n:
        raise ScenarioError(f"Q blocks have half dimension {SQ.n}, scenario says n = {sc.n}")
    return SQ


def fixed_point_term(B, center, hessian, radius):
    """Bump term h with grad (Q + h)(c) = 0 and Hessian B + A at c."""
    from ..calculus.perturbation import BumpTerm
    c = np.asarray(center, float)
    A = np.asarray(hessian, float)
    d = len(c)
    g = np.asarray(B, float) @ c
    poly = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        poly.append((-float(g[i]), tuple(e)))
    for i in range(d):
        for j in range(i, d):
            e = [0] * d
            e[i] += 1
            e[j] += 1
            cf = (0.5 if i == j else 1.0) * A[i, j]
            if cf:
                poly.append((float(cf), tuple(e)))
    return BumpTerm(tuple(c), float(radius), tuple(poly))


def build_hamiltonian(sc: Scenario, Q=None):
    """(structured or plain quadratic, PerturbedHamiltonian Q + h)."""
    from ..calculus.hamiltonians import PerturbedHamiltonian
    from ..calculus.perturbation import BumpTerm, CompactPerturbation
    Q = Q if Q is not None else build_quadratic(sc)
    form = getattr(Q, "form", Q)
    terms = []
    for t in sc.h.get("terms", []):
        poly = tuple((c, tuple(e)) for c, e in t.get("poly", [[1.0, []]]))
        terms.append(BumpTerm(tuple(t["center"]), t["radius"], poly,
                              t.get("amplitude", 1.0), t.get("frequency", 0.0),
                              t.get("phase", 0.0)))
    B = form.matrix(0.0)
    for f in sc.h.get("fixed_points", []):
        if not form.is_autonomous:
            raise ScenarioError("fixed_points need an autonomous Q")
        terms.append(fixed_point_term(B, f["center"], f["hessian"], f["radius"]))
    h = CompactPerturbation(terms) if terms else CompactPerturbation()
    return Q, PerturbedHamiltonian(form, h)
