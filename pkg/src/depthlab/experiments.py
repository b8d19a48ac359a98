"""Monte Carlo harness for the scaling, robustness and limit diagnostics.

Every experiment is a pure function of its config: replication ``r`` at
sample size ``n`` draws from ``SeedSequence([seed, n, r])`` only, tasks may
run in any order on any number of worker processes, and results are sorted
by task key before aggregation.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from . import __version__
from . import geometry as geo
from .cloud import PointCloud, format_float
from .contamination import ContaminationPlan, contaminate
from .depth import depth_counts_2d
from .limit import DirectionGrid, Lattice, evaluate_w, simulate_bridge
from .models import EllipticalModel, sample_elliptical
from .regions import MedianSolver, RegionEngine, median_set_1d

DIAMETER_SCALING = "diameter_scaling"
LOWER_BOUND = "lower_bound"
CONTAMINATION_ERROR = "contamination_error"
CONTAINMENT = "containment"
DIRECTION_UNIFORMITY = "direction_uniformity"
EFFECTIVE_RANK = "effective_rank"
DEPTH_MODULUS = "depth_modulus"
WEAK_CONVERGENCE = "weak_convergence"
KINDS = (DIAMETER_SCALING, LOWER_BOUND, CONTAMINATION_ERROR, CONTAINMENT,
         DIRECTION_UNIFORMITY, EFFECTIVE_RANK, DEPTH_MODULUS, WEAK_CONVERGENCE)

# stream tag for the limit-process arm of the weak convergence experiment
_LIMIT_TAG = 1_000_000_007


class ExperimentError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    kind: str
    n_grid: tuple
    reps: int
    model: EllipticalModel = field(default_factory=lambda: EllipticalModel.standard(2))
    plan: ContaminationPlan | None = None
    t: float = 0.95
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ExperimentError(f"unknown experiment kind {self.kind!r}")
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(n < 1 for n in grid):
            raise ExperimentError("n_grid must be a nonempty list of positive sizes")
        if list(grid) != sorted(grid):
            raise ExperimentError("n_grid must be ascending")
        if int(self.reps) < 1:
            raise ExperimentError("reps must be >= 1")
        if not (0.0 < self.t < 1.0):
            raise ExperimentError("t must lie in (0, 1)")
        object.__setattr__(self, "n_grid", grid)
        object.__setattr__(self, "reps", int(self.reps))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_grid": list(self.n_grid), "reps": self.reps,
                "model": self.model.to_dict(),
                "plan": None if self.plan is None else self.plan.to_dict(),
                "t": self.t, "seed": self.seed, "params": self.params}

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ExperimentError("config must be a JSON object")
        known = {"kind", "n_grid", "reps", "model", "plan", "t", "seed", "params"}
        extra = set(obj) - known
        if extra:
            raise ExperimentError(f"unknown config keys: {sorted(extra)}")
        try:
            model = EllipticalModel.from_dict(obj["model"]) if "model" in obj else \
                EllipticalModel.standard(2)
            plan = ContaminationPlan.from_dict(obj["plan"]) if obj.get("plan") else None
            return cls(obj["kind"], tuple(obj["n_grid"]), int(obj["reps"]), model, plan,
                       float(obj.get("t", 0.95)), int(obj.get("seed", 0)),
                       dict(obj.get("params", {})))
        except (KeyError, TypeError) as exc:
            raise ExperimentError(f"malformed config: {exc}") from None

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class ExperimentResult:
    kind: str
    rows: list
    summary: dict
    config_hash: str = ""
    seed: int = 0

    def to_csv(self) -> str:
        rows = self.rows + [{"level": "summary", "stat": k, "value": v}
                            for k, v in self.summary.items() if _is_scalar(v)]
        cols: list = []
        for r in rows:
            for k in r:
                if k not in cols:
                    cols.append(k)
        buf = io.StringIO()
        buf.write(f"# depthlab v{__version__}, config-hash={self.config_hash}, seed={self.seed}\n")
        buf.write(",".join(cols) + "\n")
        for r in rows:
            buf.write(",".join(_cell(r.get(c)) for c in cols) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "version": __version__, "config_hash": self.config_hash,
                "seed": self.seed, "summary": _jsonable(self.summary),
                "rows": _jsonable(self.rows)}


def _is_scalar(v) -> bool:
    return v is None or isinstance(v, (bool, int, float, str, np.integer, np.floating))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


# -- scheduling ----------------------------------------------------------------


def rep_seed(seed: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), *[int(k) for k in keys]])


def _run_tasks(fn, tasks: list, threads: int = 1, budget_seconds: float | None = None) -> list:
    """Apply ``fn`` to every task; results come back in task order."""
    start = time.monotonic()

    def check():
        if budget_seconds is not None and time.monotonic() - start > budget_seconds:
            raise BudgetExceeded(f"compute budget of {budget_seconds} s exceeded")

    out = []
    if threads <= 1 or len(tasks) <= 1:
        for task in tasks:
            out.append(fn(task))
            check()
        return out
    with ProcessPoolExecutor(max_workers=int(threads)) as pool:
        try:
            for res in pool.map(fn, tasks, chunksize=max(1, len(tasks) // (8 * threads))):
                out.append(res)
                check()
        except BudgetExceeded:
            pool.shutdown(cancel_futures=True)
            raise
    return out


def _ols(x, y, level: float = 0.95):
    """Slope, its confidence interval and R^2 of ``y ~ a + b x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = x.shape[0]
    if k < 3:
        raise ExperimentError(f"a scaling fit needs at least 3 grid points, got {k}")
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    icpt = ym - slope * xm
    resid = y - icpt - slope * x
    sse = float((resid ** 2).sum())
    sst = float(((y - ym) ** 2).sum())
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    se = math.sqrt(sse / (k - 2) / sxx)
    q = float(stats.t.ppf(0.5 + level / 2, k - 2))
    return slope, (slope - q * se, slope + q * se), r2


@dataclass
class ScalingResult:
    table: list
    slope: float
    slope_ci: tuple
    r_squared: float

    @property
    def inconclusive(self) -> bool:
        return self.r_squared < 0.9

    def to_dict(self) -> dict:
        return {"table": self.table, "slope": self.slope, "slope_ci": list(self.slope_ci),
                "slope_ci_low": self.slope_ci[0], "slope_ci_high": self.slope_ci[1],
                "r_squared": self.r_squared, "inconclusive": self.inconclusive}


# -- diameter scaling ----------------------------------------------------------


def _diameter_task(task):
    model, n, r, seed, eps_exp = task
    cloud = sample_elliptical(model, n, rep_seed(seed, n, r))
    if model.dim == 1:
        x = cloud.points[:, 0]
        k_star, (lo, hi) = median_set_1d(x)
        if eps_exp is None:
            return hi - lo
        k = max(1, k_star - int(math.floor(n ** (-eps_exp) * n)))
        xs = np.sort(x)
        return float(xs[n - k] - xs[k - 1])
    solver = MedianSolver(cloud)
    if eps_exp is None:
        return geo.region_diameter(solver.median_set)
    k = max(1, solver.k_star - int(math.floor(n ** (-eps_exp) * n)))
    eng = solver.engine if k >= solver.engine.klo else RegionEngine(cloud, k, k)
    return geo.region_diameter(eng.region(k))


def run_diameter_scaling(cfg: ExperimentConfig, threads: int = 1,
                         budget_seconds: float | None = None) -> tuple[ScalingResult, list]:
    """Mean diameter of the median set (or of an epsilon_n level set) per n, with a log-log fit.

    ``cfg.params["eps_exponent"] = a`` switches to the level ``k* - floor(n^{-a} n)``.
    """
    if cfg.model.dim not in (1, 2):
        raise ExperimentError("diameter scaling needs a 1- or 2-dimensional model")
    eps_exp = cfg.params.get("eps_exponent")
    tasks = [(cfg.model, n, r, cfg.seed, eps_exp) for n in cfg.n_grid for r in range(cfg.reps)]
    diams = _run_tasks(_diameter_task, tasks, threads, budget_seconds)
    rows, table = [], []
    for i, n in enumerate(cfg.n_grid):
        d = np.asarray(diams[i * cfg.reps:(i + 1) * cfg.reps])
        for r, v in enumerate(d):
            rows.append({"level": "rep", "n": n, "rep": r, "diameter": float(v)})
        mean = float(d.mean())
        se = float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else 0.0
        table.append({"n": n, "mean_diameter": mean, "std_error": se,
                      "scaled": mean * math.sqrt(n)})
        rows.append({"level": "aggregate", "n": n, "diameter": mean, "std_error": se,
                     "scaled": mean * math.sqrt(n)})
    means = np.array([t["mean_diameter"] for t in table])
    if np.any(means <= 0):
        raise ExperimentError("a mean diameter is zero; the log-log fit is undefined")
    slope, ci, r2 = _ols(np.log(cfg.n_grid), np.log(means), cfg.t)
    return ScalingResult(table, slope, ci, r2), rows


# -- lower bound on level-set diameters ---------------------------------------


def default_epsilon_grid(n: int, points: int = 10) -> list:
    """Grid spanning the two ends ``8 log n / n`` and ``n^{-1/2}``, whichever order they come in."""
    a, b = 8.0 * math.log(n) / n, n ** -0.5
    lo, hi = min(a, b), max(a, b)
    return [float(v) for v in np.linspace(lo, hi, points)]


def minkowski_constant(inner: geo.ConvexRegion, outer: geo.ConvexRegion, eps: float,
                       kmax: int = 30) -> float:
    """Largest ``c`` in ``{2^-k}`` with ``inner + B(0, c eps)`` inside ``outer``, else 0."""
    if outer.kind != geo.POLYGON or inner.is_empty or eps <= 0:
        return 0.0
    room = min(hp.offset - geo.support(inner, hp.normal) for hp in geo.region_facets(outer))
    c_exact = room / eps
    for k in range(kmax + 1):
        c = 2.0 ** -k
        if c <= c_exact:
            return c
    return 0.0


def _lower_bound_task(task):
    model, n, r, seed, eps_grid = task
    cloud = sample_elliptical(model, n, rep_seed(seed, n, r))
    solver = MedianSolver(cloud)
    k_star = solver.k_star
    inner = solver.median_set
    levels = [k_star - int(math.ceil(e * n - 1e-12)) for e in eps_grid]
    valid = [k for k in levels if k >= 1]
    eng = RegionEngine(cloud, min(valid), k_star) if valid else None
    out = []
    for e, k in zip(eps_grid, levels):
        if k < 1:
            out.append((e, k, None, None, None))
            continue
        reg = eng.region(k)
        diam = geo.region_diameter(reg)
        out.append((e, k, diam, diam / e, minkowski_constant(inner, reg, e)))
    return out


def run_lower_bound_check(cfg: ExperimentConfig, epsilon_grid=None, threads: int = 1,
                          budget_seconds: float | None = None):
    """Diameters of ``R_n(eps)`` over an ascending epsilon grid, per replication.

    Level for ``eps`` is ``k* - ceil(eps n)``; levels below 1 are the whole
    plane and are flagged and excluded.
    """
    if cfg.model.dim != 2:
        raise ExperimentError("the lower-bound check needs a 2-dimensional model")
    rows, reps_summary = [], []
    for n in cfg.n_grid:
        grid = sorted(float(e) for e in (epsilon_grid or cfg.params.get("epsilon_grid")
                                         or default_epsilon_grid(n)))
        tasks = [(cfg.model, n, r, cfg.seed, grid) for r in range(cfg.reps)]
        for r, res in enumerate(_run_tasks(_lower_bound_task, tasks, threads, budget_seconds)):
            diams = [d for (_, _, d, _, _) in res if d is not None]
            ratios = [q for (_, _, _, q, _) in res if q is not None]
            nested = all(b >= a for a, b in zip(diams, diams[1:]))
            for e, k, d, q, c in res:
                rows.append({"level": "rep", "n": n, "rep": r, "epsilon": e, "k": k,
                             "diameter": d, "ratio": q, "minkowski_c": c,
                             "full_plane": d is None})
            reps_summary.append({"n": n, "rep": r, "nested": nested,
                                 "min_ratio": min(ratios) if ratios else None})
    threshold = float(cfg.params.get("ratio_threshold", 0.1))
    good = [s for s in reps_summary if s["min_ratio"] is not None]
    summary = {
        "nested_fraction": sum(s["nested"] for s in reps_summary) / len(reps_summary),
        "ratio_threshold": threshold,
        "ratio_pass_fraction": (sum(s["min_ratio"] >= threshold for s in good) / len(good)
                                if good else 0.0),
        "min_ratio_median": float(np.median([s["min_ratio"] for s in good])) if good else None,
    }
    for s in reps_summary:
        rows.append({"level": "aggregate", **s})
    return summary, rows


# -- contamination ---------------------------------------------------------------


def _contamination_task(task):
    model, n, r, seed, plan, radii = task
    ss = rep_seed(seed, n, r)
    s_sample, s_attack = ss.spawn(2)
    cloud = sample_elliptical(model, n, s_sample)
    out = []
    for R in radii:
        p = ContaminationPlan(plan.epsilon, plan.kind, float(R), plan.direction, plan.points)
        Y = contaminate(cloud, p, s_attack)
        tk = np.asarray(MedianSolver(Y).median)
        out.append((R, float(np.linalg.norm(tk - model.mu)),
                    float(np.linalg.norm(Y.points.mean(axis=0) - model.mu))))
    return out


def run_contamination_error(cfg: ExperimentConfig, threads: int = 1,
                            budget_seconds: float | None = None):
    """Tukey-median and sample-mean errors under the configured attack, per radius."""
    if cfg.model.dim != 2:
        raise ExperimentError("contamination error needs a 2-dimensional model")
    plan = cfg.plan or ContaminationPlan(0.0)
    radii = [float(R) for R in cfg.params.get("radii", [plan.radius])]
    rows, summary = [], {}
    for n in cfg.n_grid:
        tasks = [(cfg.model, n, r, cfg.seed, plan, radii) for r in range(cfg.reps)]
        res = _run_tasks(_contamination_task, tasks, threads, budget_seconds)
        for r, reps in enumerate(res):
            for R, te, me in reps:
                rows.append({"level": "rep", "n": n, "rep": r, "radius": R,
                             "tukey_error": te, "mean_error": me})
        for j, R in enumerate(radii):
            te = np.array([reps[j][1] for reps in res])
            me = np.array([reps[j][2] for reps in res])
            agg = {"median_tukey_error": float(np.median(te)),
                   "median_mean_error": float(np.median(me)),
                   "q_tukey_error": float(np.quantile(te, cfg.t)),
                   "q_mean_error": float(np.quantile(me, cfg.t))}
            rows.append({"level": "aggregate", "n": n, "radius": R, **agg})
            summary[f"n={n},radius={format_float(R)}"] = agg
    return summary, rows


def _containment_task(task):
    n, r, seed, eps = task
    ss = rep_seed(seed, n, r)
    s_sample, s_attack, s_kind, s_query = ss.spawn(4)
    X = sample_elliptical(EllipticalModel.standard(2), n, s_sample)
    krng = np.random.default_rng(s_kind)
    kind = ("far_cluster", "smear", "replay")[int(krng.integers(3))]
    radius = float(krng.uniform(1.0, 100.0))
    ang = float(krng.uniform(0, 2 * math.pi))
    pts = krng.normal(0.0, 5.0, size=(n, 2)) if kind == "replay" else None
    plan = ContaminationPlan(eps, kind, radius, (math.cos(ang), math.sin(ang)), pts)
    Y = contaminate(X, plan, s_attack)
    m = plan.count(n)
    mu_y = MedianSolver(Y).median
    solver = MedianSolver(X)
    k = solver.k_star - 2 * m
    if k < 1:
        contained = True
    else:
        eng = RegionEngine(X, k, k)
        contained = geo.region_contains(eng.region(k), mu_y, tol=eng.tol)
    lo, hi = X.points.min(axis=0) - 1.0, X.points.max(axis=0) + 1.0
    Z = np.random.default_rng(s_query).uniform(lo, hi, size=(100, 2))
    dx = depth_counts_2d(X.points, Z)
    dy = depth_counts_2d(Y.points, Z)
    return kind, m, bool(contained), int(np.abs(dx - dy).max())


def run_containment_check(cfg: ExperimentConfig, threads: int = 1,
                          budget_seconds: float | None = None):
    """Does the contaminated median stay in the clean region at level ``k* - 2 floor(eps n)``?

    Each instance draws a strategy at random and also checks that no depth
    count moves by more than the number of replaced points.
    """
    eps = float(cfg.plan.epsilon) if cfg.plan else float(cfg.params.get("epsilon", 0.1))
    tasks = [(n, r, cfg.seed, eps) for n in cfg.n_grid for r in range(cfg.reps)]
    res = _run_tasks(_containment_task, tasks, threads, budget_seconds)
    rows = []
    for (n, r, _, _), (kind, m, ok, shift) in zip(tasks, res):
        rows.append({"level": "rep", "n": n, "rep": r, "strategy": kind, "replaced": m,
                     "contained": ok, "max_depth_shift": shift, "shift_ok": shift <= m})
    summary = {"instances": len(rows),
               "contained_fraction": sum(r["contained"] for r in rows) / len(rows),
               "shift_ok_fraction": sum(r["shift_ok"] for r in rows) / len(rows)}
    return summary, rows


# -- affine directions and effective rank --------------------------------------


def expected_radius(shape) -> float:
    """``E ||Sigma^{1/2} U||`` for ``U`` uniform on the unit circle, by quadrature."""
    S = np.asarray(shape, dtype=float)

    def f(th):
        c, s = math.cos(th), math.sin(th)
        return math.sqrt(S[0, 0] * c * c + 2 * S[0, 1] * c * s + S[1, 1] * s * s)

    val, _ = integrate.quad(f, 0.0, 2 * math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val / (2 * math.pi)


def _median_error_task(task):
    model, n, r, seed = task
    cloud = sample_elliptical(model, n, rep_seed(seed, n, r))
    return np.asarray(MedianSolver(cloud).median) - model.mu


def run_direction_uniformity(cfg: ExperimentConfig, threads: int = 1,
                             budget_seconds: float | None = None, bins: int = 12):
    """Angle of the whitened median error, chi-square over equal sectors."""
    model = cfg.model
    if model.dim != 2:
        raise ExperimentError("direction uniformity needs a 2-dimensional model")
    n = cfg.n_grid[0]
    tasks = [(model, n, r, cfg.seed) for r in range(cfg.reps)]
    errs = np.array(_run_tasks(_median_error_task, tasks, threads, budget_seconds))
    w_, V = np.linalg.eigh(model.shape)
    inv_half = (V / np.sqrt(w_)) @ V.T
    half = (V * np.sqrt(w_)) @ V.T
    W = errs @ inv_half.T
    nrm = np.linalg.norm(W, axis=1)
    keep = nrm > 0
    U = W[keep] / nrm[keep, None]
    ang = np.mod(np.arctan2(U[:, 1], U[:, 0]), 2 * math.pi)
    counts = np.bincount(np.minimum((ang / (2 * math.pi) * bins).astype(int), bins - 1),
                         minlength=bins)
    chi2, p = stats.chisquare(counts)
    radius = np.linalg.norm(U @ half.T, axis=1)
    mean_r = float(radius.mean())
    se_r = float(radius.std(ddof=1) / math.sqrt(radius.size)) if radius.size > 1 else 0.0
    summary = {"n": n, "used": int(keep.sum()), "excluded_zero": int((~keep).sum()),
               "chi2": float(chi2), "p_value": float(p), "mean_radius": mean_r,
               "se_radius": se_r, "radius_oracle": expected_radius(model.shape),
               "radius_upper": math.sqrt(float(np.trace(model.shape)) / 2)}
    rows = [{"level": "rep", "n": n, "rep": r, "w_x": float(W[r, 0]), "w_y": float(W[r, 1])}
            for r in range(W.shape[0])]
    rows += [{"level": "aggregate", "n": n, "sector": b, "count": int(c)}
             for b, c in enumerate(counts)]
    return summary, rows


def run_effective_rank_ratio(cfg: ExperimentConfig, threads: int = 1,
                             budget_seconds: float | None = None):
    """RMS median error under ``I`` divided by RMS error under ``diag(1, lam)``.

    Both arms reuse the same replication seeds.
    """
    lam = float(cfg.params.get("lam", 0.01))
    n = cfg.n_grid[0]
    radial = cfg.model.radial
    m1 = EllipticalModel(np.zeros(2), np.eye(2), radial)
    m2 = EllipticalModel(np.zeros(2), np.diag([1.0, lam]), radial)
    e1 = np.array(_run_tasks(_median_error_task, [(m1, n, r, cfg.seed) for r in range(cfg.reps)],
                             threads, budget_seconds))
    e2 = np.array(_run_tasks(_median_error_task, [(m2, n, r, cfg.seed) for r in range(cfg.reps)],
                             threads, budget_seconds))
    rms1 = float(np.sqrt((e1 ** 2).sum(axis=1).mean()))
    rms2 = float(np.sqrt((e2 ** 2).sum(axis=1).mean()))
    summary = {"n": n, "lam": lam, "rms_identity": rms1, "rms_anisotropic": rms2,
               "ratio": rms1 / rms2, "trace_prediction": math.sqrt(2.0 / (1.0 + lam))}
    rows = [{"level": "rep", "n": n, "rep": r,
             "err_identity": float(np.linalg.norm(e1[r])),
             "err_anisotropic": float(np.linalg.norm(e2[r]))} for r in range(cfg.reps)]
    return summary, rows


# -- empirical modulus of continuity ---------------------------------------------


def _modulus_task(task):
    model, n, r, seed, deltas, pairs = task
    s_sample, s_pairs = rep_seed(seed, n, r).spawn(2)
    cloud = sample_elliptical(model, n, s_sample)
    k = max(1, -(-n // 4))
    box = RegionEngine(cloud, k, k).region(k).as_array()
    if box.size == 0:
        box = cloud.points
    lo, hi = box.min(axis=0), box.max(axis=0)
    rng = np.random.default_rng(s_pairs)
    sups, running = [], 0
    for delta in deltas:
        z1 = rng.uniform(lo, hi, size=(pairs, 2))
        ang = rng.uniform(0, 2 * math.pi, size=pairs)
        rad = delta * np.sqrt(rng.random(pairs))
        z2 = z1 + rad[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])
        diff = np.abs(depth_counts_2d(cloud.points, z1) - depth_counts_2d(cloud.points, z2))
        # pairs drawn for smaller deltas are also within distance delta
        running = max(running, int(diff.max()))
        sups.append(running / n)
    return sups


def run_depth_modulus(cfg: ExperimentConfig, delta_grid=None, threads: int = 1,
                      budget_seconds: float | None = None):
    """Sampled sup of ``|D_n(z1) - D_n(z2)|`` over pairs at distance ``<= delta``."""
    deltas = sorted(float(d) for d in (delta_grid or cfg.params.get("delta_grid",
                                                                    [0.0, 0.05, 0.1, 0.2])))
    pairs = int(cfg.params.get("pairs", 200))
    rows, summary = [], {}
    for n in cfg.n_grid:
        tasks = [(cfg.model, n, r, cfg.seed, deltas, pairs) for r in range(cfg.reps)]
        sups = np.array(_run_tasks(_modulus_task, tasks, threads, budget_seconds))
        for r in range(cfg.reps):
            for j, d in enumerate(deltas):
                rows.append({"level": "rep", "n": n, "rep": r, "delta": d, "sup": sups[r, j]})
        mean_sup = sups.mean(axis=0)
        lead = np.array(deltas) / math.sqrt(2 * math.pi)
        rem = mean_sup - lead
        x = np.sqrt(np.array(deltas) / n)
        coef = float((x * rem).sum() / (x * x).sum()) if (x > 0).any() else 0.0
        for j, d in enumerate(deltas):
            rows.append({"level": "aggregate", "n": n, "delta": d, "sup": float(mean_sup[j]),
                         "leading": float(lead[j]), "remainder": float(rem[j])})
        summary[f"n={n}"] = {"deltas": deltas, "mean_sup": mean_sup.tolist(),
                             "leading": lead.tolist(), "remainder_coef": coef}
    return summary, rows


# -- weak convergence --------------------------------------------------------------


def _max_depth_task(task):
    model, n, r, seed = task
    cloud = sample_elliptical(model, n, rep_seed(seed, n, r))
    return math.sqrt(n) * (MedianSolver(cloud).k_star / n - 0.5)


def _limit_task(task):
    m, radius, spacing, r, seed = task
    grid = DirectionGrid(m)
    g = simulate_bridge(grid, rep_seed(seed, _LIMIT_TAG, r))
    f = evaluate_w(g, grid, Lattice(radius, spacing))
    return f.w_max, f.refined_w_max


def limit_maxima(m: int, radius: float, spacing: float, reps: int, seed: int, threads: int = 1,
                 budget_seconds: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Lattice maxima and exact maxima of the discretised ``W`` over ``reps`` bridge draws."""
    res = _run_tasks(_limit_task, [(m, radius, spacing, r, seed) for r in range(reps)],
                     threads, budget_seconds)
    arr = np.array(res, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def run_weak_convergence(cfg: ExperimentConfig, threads: int = 1,
                         budget_seconds: float | None = None):
    """KS distance between ``sqrt(n)(max depth - 1/2)`` and simulated ``max W``, per n.

    The primary limit statistic is the lattice maximum; the KS distance to the
    exact maximum of the discretised field is reported alongside.
    """
    m = int(cfg.params.get("m", 512))
    radius = float(cfg.params.get("radius", 8.0))
    spacing = float(cfg.params.get("spacing", 0.1))
    limit, refined = limit_maxima(m, radius, spacing, cfg.reps, cfg.seed, threads, budget_seconds)
    rows = [{"level": "rep", "arm": "limit", "rep": r, "value": float(v), "refined": float(w)}
            for r, (v, w) in enumerate(zip(limit, refined))]
    summary = {"m": m, "spacing": spacing, "limit_mean": float(limit.mean()),
               "refined_mean": float(refined.mean())}
    for n in cfg.n_grid:
        emp = np.array(_run_tasks(_max_depth_task, [(cfg.model, n, r, cfg.seed)
                                                    for r in range(cfg.reps)],
                                  threads, budget_seconds))
        ks = float(stats.ks_2samp(emp, limit).statistic)
        ks_ref = float(stats.ks_2samp(emp, refined).statistic)
        rows += [{"level": "rep", "arm": "empirical", "n": n, "rep": r, "value": float(v)}
                 for r, v in enumerate(emp)]
        rows.append({"level": "aggregate", "arm": "empirical", "n": n, "ks": ks,
                     "ks_refined": ks_ref, "value": float(emp.mean())})
        summary[f"ks_n={n}"] = ks
        summary[f"ks_refined_n={n}"] = ks_ref
        summary[f"mean_n={n}"] = float(emp.mean())
    return summary, rows


# -- dispatch ------------------------------------------------------------------------


def run_experiment(cfg: ExperimentConfig, threads: int = 1,
                   budget_seconds: float | None = None) -> ExperimentResult:
    kw = {"threads": threads, "budget_seconds": budget_seconds}
    if cfg.kind == DIAMETER_SCALING:
        fit, rows = run_diameter_scaling(cfg, **kw)
        summary = fit.to_dict()
        summary.pop("table")
    elif cfg.kind == LOWER_BOUND:
        summary, rows = run_lower_bound_check(cfg, **kw)
    elif cfg.kind == CONTAMINATION_ERROR:
        summary, rows = run_contamination_error(cfg, **kw)
    elif cfg.kind == CONTAINMENT:
        summary, rows = run_containment_check(cfg, **kw)
    elif cfg.kind == DIRECTION_UNIFORMITY:
        summary, rows = run_direction_uniformity(cfg, **kw)
    elif cfg.kind == EFFECTIVE_RANK:
        summary, rows = run_effective_rank_ratio(cfg, **kw)
    elif cfg.kind == DEPTH_MODULUS:
        summary, rows = run_depth_modulus(cfg, **kw)
    else:
        summary, rows = run_weak_convergence(cfg, **kw)
    return ExperimentResult(cfg.kind, rows, summary, cfg.config_hash(), cfg.seed)
