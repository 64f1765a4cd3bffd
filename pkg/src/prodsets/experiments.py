"""Named experiments.  Each one resolves a flat config, runs, and returns a
self-contained report whose certificates and exact identities can be
replayed by :mod:`prodsets.verify`."""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from .boundary import parse_cyl as _parse_cyl, parse_point
from .constructions import (
    fat_cantor,
    notliouville_construction,
    sat_search,
    shrink_certificate,
    thick_shrinker,
)
from .groups import FreeGroup, Lattice, Model, format_word, invert
from .largeness import (
    check_pw_left_syndetic,
    check_pw_syndetic,
    check_thick,
    find_between_F,
    find_left_F,
    non_syndetic_separator,
)
from .measures import FiniteMeasure, hecke_residual, sphere_measure
from .sets import (
    InverseSet,
    ProductSet,
    SliceSet,
    density_profile,
    parse_set,
    product_set,
    tau_split_profile,
)
from .sets import Homomorphism

ENV_PREFIX = "PRODSETS_"


class ConfigError(ValueError):
    """Bad configuration (usage error)."""


def version() -> str:
    try:
        from importlib.metadata import version as _v

        return _v("artifact")
    except Exception:
        return "0.1.0"


def q(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_config_text(text: str) -> Dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment line."""
    out = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key = value")
        k, v = line.split("=", 1)
        out[norm_key(k)] = v.strip()
    return out


def norm_key(k: str) -> str:
    return k.strip().lower().replace("-", "_")


@dataclass
class ExperimentConfig:
    experiment: str
    params: Dict[str, str] = field(default_factory=dict)
    seed: int = 0
    out: Optional[str] = None

    def get(self, key: str) -> str:
        return self.params[key]

    def int(self, key: str) -> int:
        try:
            return int(self.params[key])
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {self.params[key]!r}") from None

    def frac(self, key: str) -> Fraction:
        try:
            return Fraction(self.params[key])
        except ValueError:
            raise ConfigError(f"{key} must be a rational, got {self.params[key]!r}") from None

    def ints(self, key: str) -> List[int]:
        return [int(x) for x in self.params[key].split(",") if x.strip()]

    def model(self) -> Model:
        return model_from_tag(self.params.get("model", "free:2"))


def model_from_tag(tag: str) -> Model:
    kind, _, n = tag.partition(":")
    try:
        n = int(n)
    except ValueError:
        raise ConfigError(f"bad model {tag!r}") from None
    if kind == "free":
        return FreeGroup(n)
    if kind == "lattice":
        return Lattice(n)
    raise ConfigError(f"bad model {tag!r}")


def resolve(
    experiment: str,
    file_params: Optional[Dict[str, str]] = None,
    flag_params: Optional[Dict[str, str]] = None,
    env: Optional[Dict[str, str]] = None,
) -> ExperimentConfig:
    """Defaults, then config file, then environment, then flags."""
    if experiment not in REGISTRY:
        raise ConfigError(f"unknown experiment {experiment!r}; try `list`")
    exp = REGISTRY[experiment]
    params = dict(exp.defaults)
    params.setdefault("seed", "0")
    layers = [file_params or {}]
    env = os.environ if env is None else env
    layers.append({norm_key(k[len(ENV_PREFIX) :]): v for k, v in env.items() if k.startswith(ENV_PREFIX)})
    layers.append(flag_params or {})
    out = None
    for layer in layers:
        for k, v in layer.items():
            k = norm_key(k)
            if k == "out":
                out = v
                continue
            if k not in params:
                raise ConfigError(f"unknown parameter {k!r} for {experiment}")
            params[k] = str(v)
    cfg = ExperimentConfig(experiment, params, int(params["seed"]), out)
    return cfg


@dataclass
class RunReport:
    experiment: str
    config: Dict[str, str]
    results: dict
    checks: List[dict]
    certificates: Dict[str, dict]
    violations: List[str]
    expectations: List[dict]
    wall_time: float
    version: str

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        d = asdict(self)
        d["status"] = "PASS" if self.ok else "FAIL"
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


class _Out:
    """Accumulator handed to experiment bodies."""

    def __init__(self):
        self.results: dict = {}
        self.checks: List[dict] = []
        self.certificates: Dict[str, dict] = {}
        self.violations: List[str] = []
        self.expectations: List[dict] = []

    def require(self, ok: bool, msg: str):
        if not ok:
            self.violations.append(msg)

    def expect(self, name: str, expected, observed, ok: bool):
        """A theorem-level expectation; recorded, never a contract violation."""
        self.expectations.append({"name": name, "expected": expected, "observed": observed, "ok": bool(ok)})


@dataclass
class Experiment:
    name: str
    summary: str
    defaults: Dict[str, str]
    body: Callable[[ExperimentConfig, _Out], None]
    open_question: bool = False


REGISTRY: Dict[str, Experiment] = {}


def experiment(name: str, summary: str, open_question: bool = False, **defaults):
    def deco(fn):
        REGISTRY[name] = Experiment(name, summary, {k: str(v) for k, v in defaults.items()}, fn, open_question)
        return fn

    return deco


def run(cfg: ExperimentConfig) -> RunReport:
    exp = REGISTRY[cfg.experiment]
    out = _Out()
    t0 = time.perf_counter()
    exp.body(cfg, out)
    dt = time.perf_counter() - t0
    return RunReport(
        cfg.experiment,
        dict(cfg.params),
        out.results,
        out.checks,
        out.certificates,
        out.violations,
        out.expectations,
        round(dt, 3),
        version(),
    )


def _profile(prof) -> dict:
    d = prof.to_json()
    d["float"] = [[n, float(v)] for n, v in prof.values]
    return d


def _point(spec: str, r: int):
    try:
        y = parse_point(spec.strip())
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if any(abs(x) > r for x in y.u + y.v):
        raise ConfigError(f"{spec} uses letters outside rank {r}")
    return y


def parse_cyl(text: str, r: int):
    try:
        return _parse_cyl(text, r)
    except ValueError as e:
        raise ConfigError(f"bad cylinder expression {text!r}: {e}") from None


def _free_rank(cfg: ExperimentConfig) -> FreeGroup:
    m = cfg.model()
    if not isinstance(m, FreeGroup):
        raise ConfigError("this experiment needs model=free:r")
    return m


# ---------------------------------------------------------------------------


@experiment("hecke", "sphere-measure recurrence residuals, exact", r="2", kmax="8", replay_kmax="4")
def _hecke(cfg, out):
    ranks = cfg.ints("r")
    kmax = cfg.int("kmax")
    res = {}
    for r in ranks:
        for k in range(1, kmax + 1):
            v = hecke_residual(r, k)
            res[f"{r},{k}"] = q(v)
            out.require(v == 0, f"hecke residual r={r} k={k} is {v}")
            if k <= cfg.int("replay_kmax"):
                out.checks.append({"kind": "hecke", "r": r, "k": k, "value": q(v)})
    out.results["residuals"] = res


@experiment(
    "spherical-density",
    "Cesaro spherical density profile of a set",
    model="free:2",
    set="prefix:a1",
    n="12",
    replay_n="8",
)
def _spherical_density(cfg, out):
    G = cfg.model()
    B = parse_set(cfg.get("set"), G)
    prof = density_profile(B, "spherical", cfg.int("n"))
    out.results["profile"] = _profile(prof)
    out.results["last"] = q(prof.last)
    out.results["running_sup"] = q(prof.running_sup)
    out.results["running_inf"] = q(prof.running_inf)
    m = min(cfg.int("replay_n"), cfg.int("n"))
    if not B.has_product():
        out.checks.append({"kind": "density", "model": _tag(G), "set": B.raw(), "n": m, "value": q(prof.value(m))})


def _tag(G) -> str:
    return f"free:{G.r}" if isinstance(G, FreeGroup) else f"lattice:{G.d}"


@experiment(
    "thm-spherical",
    "a finite F with the intersection of translates of A F B thick",
    model="free:2",
    a="prefix:a1",
    b="prefix:a1",
    f="1",
    ell="1",
    r_w="4",
    w="5",
)
def _thm_spherical(cfg, out):
    G = cfg.model()
    A, B = parse_set(cfg.get("a"), G), parse_set(cfg.get("b"), G)
    cert = find_between_F(A, B, cfg.int("f"), cfg.int("ell"), cfg.int("r_w"), W=cfg.int("w"), seed=cfg.seed)
    out.certificates["between"] = cert.to_json()
    out.results["verdict"] = cert.verdict
    out.results["F"] = cert.info.get("F")
    out.results["intersection_density"] = cert.info.get("intersection_density")
    out.results["density_B"] = cert.info.get("density_B")
    out.expect("F found", "CERTIFIED", cert.verdict, cert.certified)


@experiment(
    "thm-spherical2",
    "A_x A_x^-1 is piecewise syndetic on both sides",
    model="free:2",
    a="cyl:[a1]",
    x="point:u=(),v=(a1 a2)",
    f="2",
    ell="1",
    r_w="8",
    factor_radius="12",
)
def _thm_spherical2(cfg, out):
    G = _free_rank(cfg)
    U = parse_cyl(cfg.get("a"), G.r)
    x = _point(cfg.get("x"), G.r)
    Ax = SliceSet(U, x)
    D = ProductSet(Ax, InverseSet(Ax), cfg.int("factor_radius"))
    f, ell, R_w = cfg.int("f"), cfg.int("ell"), cfg.int("r_w")
    right = check_pw_syndetic(D, f, ell, R_w, seed=cfg.seed)
    left = check_pw_left_syndetic(D, f, ell, R_w, seed=cfg.seed)
    out.certificates["pw-syndetic"] = right.to_json()
    out.certificates["pw-left-syndetic"] = left.to_json()
    out.results["right"] = {"verdict": right.verdict, "F": right.info.get("F")}
    out.results["left"] = {"verdict": left.verdict, "F": left.info.get("F")}
    out.results["nu_A"] = q(U.measure())
    out.expect("both sides certified", "CERTIFIED", [right.verdict, left.verdict], right.certified and left.certified)


@experiment(
    "thm-amenable",
    "a finite F with the intersection of translates of F A B as large as B",
    model="lattice:1",
    a="cong:2Z",
    b="cong:2Z",
    f="1",
    ell="3",
    r_w="6",
    w="12",
)
def _thm_amenable(cfg, out):
    G = cfg.model()
    A, B = parse_set(cfg.get("a"), G), parse_set(cfg.get("b"), G)
    cert = find_left_F(A, B, cfg.int("f"), cfg.int("ell"), cfg.int("r_w"), W=cfg.int("w"), seed=cfg.seed)
    out.certificates["left-F"] = cert.to_json()
    dI, dB = cert.info.get("intersection_density"), cert.info.get("density_B")
    out.results.update({"verdict": cert.verdict, "F": cert.info.get("F"), "intersection_density": dI, "density_B": dB})
    if dI is not None and dB is not None:
        out.require(Fraction(dI) >= Fraction(dB), f"window density {dI} below density of B {dB}")
        out.checks.append({"kind": "ge", "name": "intersection density >= density(B)", "a": dI, "b": dB})
        out.expect("density equals density(B)", dB, dI, Fraction(dI) == Fraction(dB))


@experiment(
    "non-syndetic",
    "separators showing A_x A_x^-1 is not syndetic for a fat Cantor set A",
    alpha="3/5",
    points="point:u=(),v=(a1 a2);point:u=(a2),v=(a1' a2');point:u=(),v=(a2 a2 a1)",
    f="2",
    r_w="6",
)
def _non_syndetic(cfg, out):
    fc = fat_cantor(cfg.frac("alpha"))
    r = fc.C.r
    out.results["fat_cantor"] = fc.report()
    out.checks.append({"kind": "nu", "name": "nu(C)", "r": r, "cylinders": [format_word(w) for w in fc.C.cylinders()], "value": q(fc.measure)})
    out.require(fc.measure >= cfg.frac("alpha"), f"nu(C) = {fc.measure} below alpha")
    per = []
    for i, spec in enumerate(p for p in cfg.get("points").split(";") if p.strip()):
        y = _point(spec, r)
        cert = non_syndetic_separator(SliceSet(fc.C, y), cfg.int("f"), cfg.int("r_w"), seed=cfg.seed)
        out.certificates[f"separator-{i}"] = cert.to_json()
        per.append({"point": y.spec(), "verdict": cert.verdict, "max_len_s": cert.info.get("max_len_s")})
        out.expect(f"separators at {y.spec()}", "CERTIFIED", cert.verdict, cert.certified)
    out.results["points"] = per


@experiment(
    "not-liouville",
    "a set B_N whose slices are left thick while C's slices should not be piecewise syndetic",
    alpha="3/5",
    eps="2/5",
    n="4",
    ell_left="2",
    r_w="8",
    f="2",
    ell_pw="1",
    walk_n="8",
)
def _not_liouville(cfg, out):
    fc = fat_cantor(cfg.frac("alpha"))
    eps = cfg.frac("eps")
    nl = notliouville_construction(
        fc.C, eps, cfg.int("n"), cfg.int("ell_left"), cfg.int("r_w"), cfg.int("f"), cfg.int("ell_pw"), cfg.int("walk_n")
    )
    out.results.update(nl.report())
    out.results["fat_cantor"] = fc.report()
    bound = fc.measure - eps
    out.require(nl.nu_B >= bound, f"nu(B_N) = {nl.nu_B} below nu(C) - eps = {bound}")
    out.require(nl.inclusion_ok, "some a^-1 B_N is not inside C")
    out.checks.extend(nl.checks())
    out.checks.append({"kind": "ge", "name": "nu(B_N) >= nu(C) - eps", "a": q(nl.nu_B), "b": q(bound)})
    out.certificates.update(nl.certificates())
    if nl.left_thick is not None:
        out.expect("B_y left thick", "CERTIFIED", nl.left_thick.verdict, nl.left_thick.certified)
    if nl.pw is not None:
        out.expect("C_y piecewise syndetic not found", "NOT-FOUND-WITHIN-BUDGET", nl.pw.verdict, not nl.pw.certified)


@experiment(
    "extremality-split",
    "spherical profiles of {tau>0}, {tau<0}, ker tau",
    r="2",
    tau="1,1",
    n="12",
)
def _extremality(cfg, out):
    r = cfg.int("r")
    tau = Homomorphism(cfg.ints("tau"))
    T, Tinv, K = tau_split_profile(tau, r, cfg.int("n"))
    out.results.update({"positive": _profile(T), "negative": _profile(Tinv), "kernel": _profile(K)})
    for n, a in T.values:
        b, c = Tinv.value(n), K.value(n)
        out.require(a + b + c == 1, f"profiles do not add up to 1 at n={n}")
        out.require(a == b, f"positive and negative parts differ at n={n}")


@experiment(
    "sat-demo",
    "shrinking a set by translation and the thick set of shrinking elements",
    r="2",
    b="cyl:[a1]",
    eps="1/100",
    n="4",
    s_radius="3",
)
def _sat(cfg, out):
    r = cfg.int("r")
    B = parse_cyl(cfg.get("b"), r)
    eps = cfg.frac("eps")
    g = sat_search(B, eps)
    giB = B.translate(invert(g))
    m = giB.measure()
    out.results.update({"g": format_word(g), "nu_g_inv_B": q(m), "nu_B": q(B.measure())})
    out.require(m < eps, f"nu(g^-1 B) = {m} not below eps")
    out.checks.append({"kind": "nu", "name": "nu(g^-1 B)", "r": r, "cylinders": [format_word(w) for w in giB.cylinders()], "value": q(m)})
    res = thick_shrinker(B, eps, cfg.int("n"))
    out.certificates["shrinker"] = shrink_certificate(res).to_json()
    out.results["shrinker_total"] = q(res.total)
    out.require(res.total < eps, "shrinker total not below eps")
    from .constructions import thick_set_S

    win, cert = thick_set_S(B, cfg.int("s_radius"))
    out.results["S_window_size"] = len(win.members)
    out.certificates["S-thick"] = cert.to_json()
    out.expect("S thick", "CERTIFIED", cert.verdict, cert.certified)


@experiment(
    "walk-boundary",
    "boundary hitting frequencies and ergodic averages of the simple walk",
    r="2",
    depth="1",
    length="100",
    samples="10000",
    set="slice:cyl:[a1]@point:u=(),v=(a2 a1)",
    n_max="10",
    mc_samples="20000",
)
def _walk_boundary(cfg, out):
    from .walks import WalkConfig, agreement, boundary_frequency, ergodic_average

    r = cfg.int("r")
    G = FreeGroup(r)
    p = sphere_measure(r, 1)
    wc = WalkConfig(G, p, cfg.int("length"), cfg.seed, cfg.int("samples"))
    bf = boundary_frequency(wc, cfg.int("depth"))
    out.results["metadata"] = wc.metadata()
    out.results["frequencies"] = {format_word(w): v for w, v in bf.frequencies().items()}
    out.results["discarded"] = bf.discarded
    out.require(bf.total() <= 1 + 1e-12, "frequencies sum above 1")
    B = parse_set(cfg.get("set"), G)
    ex = ergodic_average(B, cfg.int("n_max"), "exact", p)
    mc = ergodic_average(B, cfg.int("n_max"), "montecarlo", p, samples=cfg.int("mc_samples"), seed=cfg.seed)
    rows = agreement(ex, mc)
    out.results["ergodic_exact"] = _profile(ex)
    out.results["ergodic_mc"] = _profile(mc.profile)
    out.expect("Monte Carlo within 3 sigma", True, [row[4] for row in rows], all(row[4] for row in rows))


@experiment(
    "affine",
    "Monte Carlo stationary law of the walk x -> x/2 (2/3), x -> x+1 (1/3)",
    p_half="2/3",
    length="60",
    samples="100000",
    bins="64",
    lo="0",
    hi="8",
)
def _affine(cfg, out):
    from .groups import Affine, AffineModel
    from .walks import WalkConfig, affine_stationary_estimate, histogram_tv

    ph = cfg.frac("p_half")
    p = FiniteMeasure.from_weights({Affine(-1, 0): ph, Affine(0, 1): 1 - ph})
    h = []
    for s in (cfg.seed, cfg.seed + 1):
        wc = WalkConfig(AffineModel(), p, cfg.int("length"), s, cfg.int("samples"))
        h.append(affine_stationary_estimate(wc, cfg.int("bins"), float(cfg.frac("lo")), float(cfg.frac("hi"))))
    tv = histogram_tv(h[0], h[1])
    out.results["histogram"] = {"edges": [float(x) for x in h[0].edges], "counts": [int(c) for c in h[0].counts]}
    out.results["overflow"] = h[0].overflow
    out.results["diverged"] = h[0].diverged
    out.results["tv_two_seeds"] = tv
    out.results["metadata"] = h[0].meta
    out.expect("two seeds agree", "< 0.05", tv, tv < 0.05)


@experiment(
    "explore-ab",
    "OPEN QUESTION: density and largeness probes of AB for spherically large A, B",
    open_question=True,
    model="free:2",
    a="prefix:a1",
    b="prefix:a2",
    radius="6",
    factor_radius="6",
    n="6",
    ell="1",
    r_w="4",
)
def _explore(cfg, out):
    G = cfg.model()
    A, B = parse_set(cfg.get("a"), G), parse_set(cfg.get("b"), G)
    win = product_set(A, B, cfg.int("radius"), cfg.int("factor_radius"))
    AB = ProductSet(A, B, cfg.int("factor_radius"))
    out.results["label"] = "OPEN QUESTION"
    out.results["window_size"] = len(win.members)
    out.results["window_exact"] = win.exact
    out.results["density_A"] = _profile(density_profile(A, "spherical", cfg.int("n")))
    out.results["density_B"] = _profile(density_profile(B, "spherical", cfg.int("n")))
    out.results["density_AB"] = _profile(density_profile(AB, "spherical", cfg.int("n")))
    cert = check_thick(AB, cfg.int("ell"), cfg.int("r_w"), seed=cfg.seed)
    out.certificates["AB-thick"] = cert.to_json()
    out.results["AB_thick"] = cert.verdict


def list_experiments() -> List[str]:
    return [f"{e.name:20s} {e.summary}" for e in REGISTRY.values()]
