"""Random walks: path sampling, boundary frequencies, ergodic averages and
Monte Carlo estimates of the stationary measure of the affine walk."""

from __future__ import annotations

import io
import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .groups import Affine, FreeGroup, Model, Word, multiply
from .measures import FiniteMeasure
from .sets import DensityProfile, GroupSet, density_profile

log = logging.getLogger(__name__)

GENERATOR = "numpy.random.PCG64"


class AdmissibilityWarning(UserWarning):
    pass


def semigroup_covers_ball(p: FiniteMeasure, model: Model, radius: int = 2, max_len: int = 4) -> bool:
    """Is ball(radius) contained in products of at most ``max_len`` steps?"""
    supp = p.support()
    reached = {model.identity()}
    frontier = set(reached)
    for _ in range(max_len):
        frontier = {multiply(g, s) for g in frontier for s in supp} - reached
        reached |= frontier
    return all(g in reached for g in model.ball(radius))


@dataclass
class WalkConfig:
    model: Model
    p: FiniteMeasure
    length: int = 100
    seed: int = 0
    samples: int = 10_000

    def __post_init__(self):
        if self.length < 0 or self.samples < 0:
            raise ValueError("length and samples must be non-negative")
        if not isinstance(self.model, Model) or self.model.name == "affine":
            return
        if not semigroup_covers_ball(self.p, self.model):
            warnings.warn(
                "support of p does not generate ball(2) within 4 steps; walk may not be admissible",
                AdmissibilityWarning,
                stacklevel=2,
            )

    def metadata(self) -> Dict[str, str]:
        return {
            "generator": GENERATOR,
            "seed": str(self.seed),
            "model": repr(self.model),
            "measure": self.p.dumps(),
            "length": str(self.length),
            "samples": str(self.samples),
        }


@dataclass
class PathSample:
    positions: List  # g_1, g_1 g_2, ...; positions[0] is the identity
    prefix: Optional[Word] = None  # stabilised boundary prefix (free groups)


def _step_table(cfg: WalkConfig):
    supp = sorted(cfg.p.support(), key=cfg.model.sort_key)
    probs = np.array([float(cfg.p.weight(s)) for s in supp])
    return supp, probs / probs.sum()


def draw_steps(cfg: WalkConfig, samples: Optional[int] = None) -> Tuple[list, np.ndarray]:
    """Step indices as a (samples, length) array, drawn row by row."""
    supp, probs = _step_table(cfg)
    n = cfg.samples if samples is None else samples
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    if len(supp) == 1:
        return supp, np.zeros((n, cfg.length), dtype=np.int64)
    return supp, rng.choice(len(supp), size=(n, cfg.length), p=probs)


def _free_path(steps: Sequence[Word], idx) -> List[Word]:
    cur: List[int] = []
    out: List[Word] = [()]
    for i in idx:
        for x in steps[i]:
            if cur and cur[-1] == -x:
                cur.pop()
            else:
                cur.append(x)
        out.append(tuple(cur))
    return out


def stable_prefix(positions: Sequence[Word]) -> Word:
    """Common prefix of the positions in the second half of the path."""
    tail = positions[len(positions) // 2 :]
    pre = tail[0]
    n = len(pre)
    for g in tail[1:]:
        k = 0
        m = min(n, len(g))
        while k < m and g[k] == pre[k]:
            k += 1
        n = k
        if n == 0:
            break
    return pre[:n]


def sample_paths(cfg: WalkConfig) -> List[PathSample]:
    supp, idx = draw_steps(cfg)
    free = isinstance(cfg.model, FreeGroup)
    out = []
    for row in idx:
        if free:
            pos = _free_path(supp, row)
            out.append(PathSample(pos, stable_prefix(pos)))
        else:
            g = cfg.model.identity()
            pos = [g]
            for i in row:
                g = multiply(g, supp[i])
                pos.append(g)
            out.append(PathSample(pos))
    return out


def mean_length(paths: Sequence[PathSample]) -> float:
    return float(np.mean([len(s.positions[-1]) for s in paths]))


def exact_mean_length(r: int, n: int) -> Fraction:
    """E|g_n| for the simple random walk on F_r, via the radial chain."""
    q = Fraction(1, 2 * r)
    dist = {0: Fraction(1)}
    for _ in range(n):
        nxt: Dict[int, Fraction] = {}
        for k, w in dist.items():
            if k == 0:
                nxt[1] = nxt.get(1, 0) + w
            else:
                nxt[k + 1] = nxt.get(k + 1, 0) + w * (1 - q)
                nxt[k - 1] = nxt.get(k - 1, 0) + w * q
        dist = nxt
    return sum((k * w for k, w in dist.items()), Fraction(0))


@dataclass
class BoundaryFrequency:
    depth: int
    counts: Dict[Word, int]
    kept: int
    discarded: int

    def frequency(self, w: Word) -> float:
        total = self.kept + self.discarded
        return self.counts.get(w, 0) / total if total else 0.0

    def frequencies(self) -> Dict[Word, float]:
        return {w: self.frequency(w) for w in sorted(self.counts)}

    def total(self) -> float:
        return sum(self.frequencies().values())


def boundary_frequency(cfg: WalkConfig, depth: int) -> BoundaryFrequency:
    """Empirical law of depth-``depth`` stabilised prefixes.

    A path whose stabilised prefix is shorter than ``depth`` is discarded
    and counted.  Frequencies are over all samples, so they sum to at most 1.
    """
    if not isinstance(cfg.model, FreeGroup):
        raise TypeError("boundary frequencies need a free group model")
    counts: Dict[Word, int] = {}
    kept = discarded = 0
    for s in sample_paths(cfg):
        if len(s.prefix) < depth:
            discarded += 1
            continue
        kept += 1
        w = s.prefix[:depth]
        counts[w] = counts.get(w, 0) + 1
    if discarded:
        log.info("boundary_frequency: %d of %d paths not stabilised at depth %d", discarded, kept + discarded, depth)
    return BoundaryFrequency(depth, counts, kept, discarded)


@dataclass
class MonteCarloProfile:
    profile: DensityProfile
    samples: int
    seed: int

    def sigma(self, exact: Fraction) -> float:
        v = float(exact)
        return math.sqrt(max(v * (1 - v), 0.0) / self.samples)


def ergodic_average(
    B: GroupSet,
    n_max: int,
    mode: str = "exact",
    p: Optional[FiniteMeasure] = None,
    samples: int = 100_000,
    seed: int = 0,
    cap: Optional[int] = None,
):
    """``(1/n) sum_{k=1}^n p^{*k}(B)`` for n = 1..n_max.

    exact mode returns a DensityProfile; montecarlo mode returns a
    MonteCarloProfile whose values are per-path Cesaro averages averaged
    over ``samples`` walks.
    """
    model = B.model
    if p is None:
        if not isinstance(model, FreeGroup):
            raise ValueError("a step measure is required outside free groups")
        from .measures import sphere_measure

        p = sphere_measure(model.r, 1)
    if mode == "exact":
        kw = {} if cap is None else {"cap": cap}
        return density_profile(B, "walk", n_max, p=p, **kw)
    if mode != "montecarlo":
        raise ValueError(f"unknown mode {mode!r}")
    cfg = WalkConfig(model, p, n_max, seed, samples)
    supp, idx = draw_steps(cfg)
    hits = np.zeros(n_max, dtype=np.int64)
    free = isinstance(model, FreeGroup)
    for row in idx:
        if free:
            pos = _free_path(supp, row)[1:]
        else:
            pos, g = [], model.identity()
            for i in row:
                g = multiply(g, supp[i])
                pos.append(g)
        hits += np.array([B.contains(g) for g in pos], dtype=np.int64)
    prof = DensityProfile("walk-montecarlo")
    acc = 0
    for n in range(1, n_max + 1):
        acc += int(hits[n - 1])
        prof.values.append((n, Fraction(acc, n * samples)))
    return MonteCarloProfile(prof, samples, seed)


def agreement(exact: DensityProfile, mc: MonteCarloProfile, k: float = 3.0) -> List[Tuple[int, float, float, float, bool]]:
    """Per n: (n, exact, mc, sigma, |mc - exact| <= k sigma).

    sigma is the binomial standard deviation at the exact value; it bounds
    the standard deviation of a Cesaro average of indicators.
    """
    out = []
    mcv = dict(mc.profile.values)
    for n, v in exact.values:
        m = float(mcv[n])
        s = mc.sigma(v)
        out.append((n, float(v), m, s, abs(m - float(v)) <= k * s + 1e-12))
    return out


# ---------------------------------------------------------------------------
# affine walk
# ---------------------------------------------------------------------------


@dataclass
class AffineHistogram:
    edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int
    diverged: int
    samples: int
    meta: Dict[str, str] = field(default_factory=dict)

    def probabilities(self) -> np.ndarray:
        """Bin masses with the out-of-range mass in two extra cells."""
        full = np.concatenate([[self.underflow], self.counts, [self.overflow + self.diverged]])
        return full / max(self.samples, 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}={v}\n")
        buf.write(f"# underflow={self.underflow} overflow={self.overflow} diverged={self.diverged}\n")
        buf.write("lo,hi,count\n")
        for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts):
            buf.write(f"{lo:.6g},{hi:.6g},{int(c)}\n")
        return buf.getvalue()


def mean_log_scale(p: FiniteMeasure) -> float:
    return sum(float(w) * g.m * math.log(2) for g, w in p.weights().items())


def affine_endpoints(cfg: WalkConfig, x0: float = 0.0, guard: float = 1e12) -> Tuple[np.ndarray, np.ndarray]:
    """Values ``g_n ... g_1 x0`` (forward iteration; same law as g_1 ... g_n x0),
    and a mask of diverged samples."""
    supp, _ = _step_table(cfg)
    if not all(isinstance(g, Affine) for g in supp):
        raise TypeError("affine walk needs Affine steps")
    if mean_log_scale(cfg.p) >= 0:
        warnings.warn("step measure is not contracting on average", AdmissibilityWarning, stacklevel=2)
    if cfg.p.is_symmetric():
        warnings.warn("symmetric step measure on the affine group", AdmissibilityWarning, stacklevel=2)
    scale = np.array([2.0 ** g.m for g in supp])
    shift = np.array([float(g.b) for g in supp])
    _, idx = draw_steps(cfg)
    y = np.full(cfg.samples, float(x0))
    bad = np.zeros(cfg.samples, dtype=bool)
    for t in range(cfg.length):
        col = idx[:, t]
        y = scale[col] * y + shift[col]
        over = ~np.isfinite(y) | (np.abs(y) > guard)
        if over.any():
            bad |= over
            y[over] = 0.0
    return y, bad


def affine_stationary_estimate(
    cfg: WalkConfig, bins: int = 64, lo: float = 0.0, hi: float = 8.0, x0: float = 0.0, guard: float = 1e12
) -> AffineHistogram:
    y, bad = affine_endpoints(cfg, x0, guard)
    good = y[~bad]
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(good, bins=edges)
    under = int(np.sum(good < lo))
    over = int(np.sum(good > hi))
    if bad.any():
        log.warning("affine walk: %d samples exceeded the overflow guard", int(bad.sum()))
    meta = cfg.metadata()
    meta.update({"bins": str(bins), "range": f"{lo},{hi}", "x0": str(x0)})
    return AffineHistogram(edges, counts, under, over, int(bad.sum()), cfg.samples, meta)


def histogram_tv(h1: AffineHistogram, h2: AffineHistogram) -> float:
    if not np.array_equal(h1.edges, h2.edges):
        raise ValueError("histograms use different bins")
    return 0.5 * float(np.abs(h1.probabilities() - h2.probabilities()).sum())


def ks_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def ks_diagnostic(p: FiniteMeasure, sizes=(10**3, 10**4, 10**5), reference: int = 2 * 10**5, length: int = 60, seed: int = 0):
    """KS distance of runs of increasing size to an independent large run."""
    from .groups import AffineModel

    model = AffineModel()
    ref, _ = affine_endpoints(WalkConfig(model, p, length, seed + 1000, reference))
    out = []
    for i, n in enumerate(sizes):
        y, _ = affine_endpoints(WalkConfig(model, p, length, seed + i, n))
        out.append((n, ks_distance(y, ref)))
    return out


def profile_csv(profile: DensityProfile, meta: Dict[str, str]) -> str:
    head = "".join(f"# {k}={v}\n" for k, v in meta.items())
    return head + profile.to_csv()
