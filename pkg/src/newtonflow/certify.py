"""Numerical certificates for injectivity/bijectivity of local diffeomorphisms.

Each check estimates one hypothesis of a global inversion criterion on a
structured sample set and returns a Certificate.  Suprema over all of R^n are
not decidable by sampling, so verdicts are graded:

- ``satisfied``    no violation found, and the growth statistics look stable;
- ``violated``     a concrete witness point (or a decreasing coercivity
                   profile / convergent growth integral) falsifies the
                   hypothesis;
- ``inconclusive`` not enough evidence either way.

The auxiliary scalar functions k are the common ingredient: nonnegative,
coercive, locally Lipschitz, with right directional derivatives D+_v k.
Three families are built in:

- ``aux_log_h``        log of a/b + ||x - x1||^2 + c/(b-2) ||f(x)-f(x0)||^2
- ``aux_hadamard``     integral of 1/omega along ||x||, smoothed near 0
- ``aux_log_coercive`` log(1 + ||f(x)||^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from . import linalg
from .flow import newton_field
from .linalg import SingularError, as_vector
from .maps import C1Map, DomainError, NonFiniteError

POINT_SLACK = 1e-9            # numeric slack for pointwise inequalities
TREND_GROWTH_MARGIN = 0.05    # relative sup growth between inner/outer shells
FLATTEN_RATIO = 0.05          # late/early increment ratio that flags saturation
SMOOTHING_RADIUS = 1.0        # quadratic cap radius for aux_hadamard


class Verdict(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [float(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass(frozen=True)
class Certificate:
    """Structured verdict of one criterion check."""

    criterion: str
    verdict: Verdict
    extremal_value: Optional[float]
    witness: Optional[np.ndarray]
    threshold: Optional[float]
    samples_used: int
    samples_skipped_singular: int
    seed: Optional[int]
    stats: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "verdict": self.verdict.value,
            "extremal_value": self.extremal_value,
            "witness": _jsonable(self.witness) if self.witness is not None else None,
            "threshold": self.threshold,
            "samples_used": self.samples_used,
            "samples_skipped_singular": self.samples_skipped_singular,
            "seed": self.seed,
            "stats": _jsonable(self.stats),
        }


# --- samplers ---------------------------------------------------------------


@dataclass(frozen=True)
class GridSampler:
    """Regular grid over an axis-aligned box: ((lo, hi), ...) per axis."""

    box: tuple
    resolution: tuple | int

    seed = None

    def points(self, dim: int) -> np.ndarray:
        box = self.box
        if len(box) != dim:
            raise ValueError(f"box has {len(box)} axes, map has dim {dim}")
        res = self.resolution
        if isinstance(res, int):
            res = (res,) * dim
        if any(r < 1 for r in res):
            raise ValueError("resolution must be >= 1 per axis")
        axes = [np.linspace(lo, hi, r) for (lo, hi), r in zip(box, res)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)


@dataclass(frozen=True)
class BallSampler:
    """Uniform samples in the ball ||x|| <= radius, reproducible by seed."""

    radius: float
    count: int
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def points(self, dim: int) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        d = rng.standard_normal((self.count, dim))
        d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
        r = self.radius * rng.random(self.count) ** (1.0 / dim)
        return d * r[:, None]


@dataclass(frozen=True)
class SphereSampler:
    """Uniform samples on the sphere ||x|| = radius, reproducible by seed."""

    radius: float
    count: int
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def points(self, dim: int) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        d = rng.standard_normal((self.count, dim))
        d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
        return self.radius * d


def _sphere_points(dim: int, radius: float, count: int, rng) -> np.ndarray:
    d = rng.standard_normal((count, dim))
    d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
    if dim == 1:
        # random signs only; make both boundary points present
        d = np.concatenate([d, [[1.0], [-1.0]]])
    return radius * d


# --- auxiliary coercive functions -------------------------------------------


@dataclass(frozen=True)
class AuxFunction:
    """Nonnegative coercive scalar function with right directional derivatives.

    ``k`` evaluates the function; ``dplus_closed``, when present, is the
    closed-form D+_v k(x, v).  Without it, `dplus` falls back to a one-sided
    difference refined once by Richardson extrapolation.
    """

    kind: str
    k: Callable[[np.ndarray], float]
    dplus_closed: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    meta: dict = field(default_factory=dict)


def dplus(aux: AuxFunction, x, v) -> float:
    """Right directional derivative D+_v k(x)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    vn = float(np.linalg.norm(v))
    if vn == 0.0:
        raise ValueError("direction must be nonzero")
    if aux.dplus_closed is not None:
        return float(aux.dplus_closed(x, v))
    s = 1e-6 * (1.0 + float(np.linalg.norm(x))) / vn
    k0 = aux.k(x)
    d1 = (aux.k(x + s * v) - k0) / s
    d2 = (aux.k(x + 0.5 * s * v) - k0) / (0.5 * s)
    return float(2.0 * d2 - d1)


def aux_log_h(a: float, b: float, c: float, x0, x1, m: C1Map) -> AuxFunction:
    """ln(a/b + ||x-x1||^2 + c/(b-2) ||f(x)-f(x0)||^2), constants normalized.

    When (a, b) does not already satisfy a >= b > 2, the pair is replaced by
    (a+b+3, b+3); the replacement preserves the quadratic-growth inequality
    the function is paired with while making b - 2 positive.
    """
    if a < 0 or b < 0 or c < 0:
        raise ValueError("constants must be nonnegative")
    a0, b0 = a, b
    normalized = not (a >= b > 2.0)
    if normalized:
        a, b = a + b + 3.0, b + 3.0
    gamma = c / (b - 2.0)
    x0 = as_vector(x0, m.dim)
    x1 = as_vector(x1, m.dim)
    f0 = m.eval(x0)
    base = a / b

    if c == 0.0:

        def k(x):
            d = x - x1
            return math.log(base + float(d @ d))

        def dp(x, v):
            d = x - x1
            return 2.0 * float(d @ v) / (base + float(d @ d))

    else:

        def k(x):
            d = x - x1
            df = m.eval(x) - f0
            return math.log(base + float(d @ d) + gamma * float(df @ df))

        def dp(x, v):
            d = x - x1
            df = m.eval(x) - f0
            hv = base + float(d @ d) + gamma * float(df @ df)
            jv = m.jacobian(x) @ v
            return (2.0 * float(d @ v) + 2.0 * gamma * float(df @ jv)) / hv

    return AuxFunction(
        kind="log-h",
        k=k,
        dplus_closed=dp,
        meta={
            "a": a, "b": b, "c": c, "gamma": gamma,
            "normalized": normalized, "a_original": a0, "b_original": b0,
        },
    )


def aux_hadamard(omega: Callable[[float], float], rho0: float = SMOOTHING_RADIUS) -> AuxFunction:
    """Integral of 1/omega from 0 to ||x||, with a quadratic cap inside ||x|| <= rho0.

    The cap (value and slope matched at rho0) removes the kink of ||x|| at the
    origin so the function is C^1 everywhere.  ``omega`` must be positive and
    continuous on [0, inf).
    """
    for s in (0.0, 0.5 * rho0, rho0, 5.0, 100.0):
        w = float(omega(s))
        if not (w > 0.0) or not math.isfinite(w):
            raise ValueError(f"omega must be positive and finite (omega({s}) = {w})")

    def _integral(lo, hi):
        val, err = quad(lambda s: 1.0 / omega(s), lo, hi, limit=200)
        if not math.isfinite(val):
            raise ValueError("quadrature failure in aux_hadamard")
        return val

    i0 = _integral(0.0, rho0)
    c2 = 1.0 / (2.0 * rho0 * float(omega(rho0)))
    c0 = i0 - c2 * rho0 * rho0

    def k(x):
        rho = float(np.linalg.norm(x))
        if rho <= rho0:
            return c0 + c2 * rho * rho
        return i0 + _integral(rho0, rho)

    def dp(x, v):
        rho = float(np.linalg.norm(x))
        if rho == 0.0:
            return 0.0
        xv = float(np.asarray(x) @ np.asarray(v))
        if rho <= rho0:
            return 2.0 * c2 * xv
        return xv / (rho * float(omega(rho)))

    return AuxFunction(
        kind="hadamard", k=k, dplus_closed=dp,
        meta={"rho0": rho0, "c0": c0, "c2": c2, "omega": omega},
    )


def aux_log_coercive(m: C1Map) -> AuxFunction:
    """ln(1 + ||f(x)||^2): coercive exactly when f is."""

    def k(x):
        fx = m.eval(x)
        return math.log1p(float(fx @ fx))

    def dp(x, v):
        fx = m.eval(x)
        jv = m.jacobian(x) @ v
        return 2.0 * float(fx @ jv) / (1.0 + float(fx @ fx))

    return AuxFunction(kind="log-coercive", k=k, dplus_closed=dp, meta={"map": m.name})


def _k_safe(aux: AuxFunction, x) -> float:
    """k(x) with overflow mapped to +inf (coercivity scans reach huge radii)."""
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            v = float(aux.k(x))
        except (NonFiniteError, DomainError, OverflowError):
            return math.inf
    return v if math.isfinite(v) else math.inf


def coercivity_evidence(
    aux: AuxFunction,
    dim: int,
    radii: Sequence[float] | None = None,
    samples_per_sphere: int = 64,
    seed: int = 0,
) -> tuple[str, Optional[np.ndarray], dict]:
    """Probe k(x) -> inf as ||x|| -> inf on nested spheres.

    Returns (status, witness, details) with status one of:
    ``ok``          sphere minima grow without saturating;
    ``decreasing``  a larger sphere has a smaller minimum (witness attached);
    ``flattening``  growth increments collapse, as for a bounded k;
    ``undecided``   spheres had no finite samples.
    """
    if radii is None:
        radii = tuple(float(2**j) for j in range(11))
    rng = np.random.default_rng(seed)
    mins, witnesses = [], []
    for r in radii:
        pts = _sphere_points(dim, r, samples_per_sphere, rng)
        vals = np.array([_k_safe(aux, p) for p in pts])
        finite = np.isfinite(vals)
        if not finite.any():
            return "undecided", None, {"radii": list(radii), "minima": None}
        i = int(np.where(finite, vals, math.inf).argmin())
        mins.append(float(vals[i]))
        witnesses.append(pts[i])
    mins_arr = np.array(mins)
    diffs = np.diff(mins_arr)
    details = {"radii": list(radii), "minima": mins, "increments": diffs.tolist()}
    slack = POINT_SLACK * np.maximum(1.0, np.abs(mins_arr[:-1]))
    bad = np.nonzero(diffs < -slack)[0]
    if bad.size:
        j = int(bad[0])
        return "decreasing", witnesses[j + 1], details
    early = float(diffs[:3].max())
    late = float(diffs[-3:].max())
    if late <= FLATTEN_RATIO * max(early, 0.0) or late <= 1e-12:
        return "flattening", witnesses[-1], details
    return "ok", None, details


def _growth_trend(radii: np.ndarray, values: np.ndarray) -> tuple[Optional[bool], dict]:
    """Heuristic growth detector: compare sup over inner vs outer radius shells.

    Returns (ok, details); ok is None when there are too few samples to say.
    """
    n = len(values)
    if n < 16:
        return None, {"reason": "too-few-samples", "n": n}
    order = np.argsort(radii, kind="stable")
    vals = values[order]
    quarters = np.array_split(vals, 4)
    sups = [float(q.max()) for q in quarters]
    early = max(sups[0], sups[1])
    late = max(sups[2], sups[3])
    growing = late > early + TREND_GROWTH_MARGIN * max(1.0, abs(early))
    return not growing, {"shell_sups": sups, "early": early, "late": late}


# --- criterion checks -------------------------------------------------------


def check_theorem21(m: C1Map, x0, k: AuxFunction, sampler, seed: int | None = None) -> Certificate:
    """Sampled sup of D+_{F(x)} k(x) along the Newton field toward f(x0).

    The hypothesis being probed: k coercive and the sup finite.  Satisfied
    requires a stable (non-growing) sup across radius shells and positive
    coercivity evidence for k.
    """
    x0 = as_vector(x0, m.dim)
    f0 = m.eval(x0)
    pts = sampler.points(m.dim)
    seed = seed if seed is not None else getattr(sampler, "seed", None)

    sup = -math.inf
    witness = None
    skipped = 0
    radii, vals = [], []
    for x in pts:
        try:
            f_vec = newton_field(m, x, f0)
        except SingularError:
            skipped += 1
            continue
        except (NonFiniteError, DomainError):
            skipped += 1
            continue
        if not np.any(f_vec):
            continue  # at the equilibrium the field vanishes: D+ undefined
        val = dplus(k, x, f_vec)
        if not math.isfinite(val):
            return Certificate(
                "thm21", Verdict.VIOLATED, math.inf, np.asarray(x, dtype=float), None,
                len(vals) + 1, skipped, seed, {"reason": "non-finite derivative"},
            )
        radii.append(float(np.linalg.norm(x)))
        vals.append(val)
        if val > sup:
            sup = val
            witness = np.asarray(x, dtype=float)

    if not vals:
        return Certificate("thm21", Verdict.INCONCLUSIVE, None, None, None,
                           0, skipped, seed, {"reason": "no valid samples"})

    co_status, co_witness, co_details = coercivity_evidence(k, m.dim, seed=seed or 0)
    trend_ok, trend = _growth_trend(np.array(radii), np.array(vals))
    stats = {"sup": sup, "trend": trend, "coercivity": co_status,
             "coercivity_details": co_details}

    if co_status == "decreasing":
        return Certificate("thm21", Verdict.VIOLATED, sup, co_witness, None,
                           len(vals), skipped, seed, stats)
    if co_status in ("flattening", "undecided") or trend_ok is None or not trend_ok:
        return Certificate("thm21", Verdict.INCONCLUSIVE, sup, witness, None,
                           len(vals), skipped, seed, stats)
    return Certificate("thm21", Verdict.SATISFIED, sup, witness, None,
                       len(vals), skipped, seed, stats)


def check_cor22(m: C1Map, x0, x1, a: float, b: float, c: float, sampler,
                seed: int | None = None) -> Certificate:
    """Quadratic-growth bound (x-x1).F(x) <= a + b||x-x1||^2 + c||f(x)-f(x0)||^2.

    The left side is evaluated exactly (one Jacobian solve per sample); a
    sample violates when it exceeds the right side by more than
    POINT_SLACK*(1+|rhs|).
    """
    if a < 0 or b < 0 or c < 0:
        raise ValueError("constants must be nonnegative")
    x0 = as_vector(x0, m.dim)
    x1 = as_vector(x1, m.dim)
    f0 = m.eval(x0)
    pts = sampler.points(m.dim)
    seed = seed if seed is not None else getattr(sampler, "seed", None)

    worst = -math.inf
    witness = None
    skipped = 0
    used = 0
    violations = 0
    for x in pts:
        try:
            f_vec = newton_field(m, x, f0)
        except (SingularError, NonFiniteError, DomainError, OverflowError):
            skipped += 1
            continue
        d = x - x1
        lhs = float(d @ f_vec)
        rhs = a + b * float(d @ d)
        if c != 0.0:
            df = m.eval(x) - f0
            rhs += c * float(df @ df)
        margin = lhs - rhs
        used += 1
        if margin > POINT_SLACK * (1.0 + abs(rhs)):
            violations += 1
        if margin > worst:
            worst = margin
            witness = np.asarray(x, dtype=float)

    if used == 0:
        return Certificate("cor22", Verdict.INCONCLUSIVE, None, None, POINT_SLACK,
                           0, skipped, seed, {"reason": "no valid samples"})
    verdict = Verdict.VIOLATED if violations else Verdict.SATISFIED
    return Certificate("cor22", verdict, worst, witness, POINT_SLACK, used, skipped,
                       seed, {"violations": violations, "constants": {"a": a, "b": b, "c": c}})


def check_theorem31(m: C1Map, k: AuxFunction, sampler_x, n_dirs: int = 16,
                    seed: int = 0) -> Certificate:
    """Sampled sup of D+_v k(x) over v = f'(x)^{-1} u, u on the unit sphere.

    Directions are the 2n axis vectors plus n_dirs seeded random units,
    shared across sample points.  Satisfied additionally requires positive
    coercivity evidence for k (the bijectivity argument needs k coercive).
    """
    pts = sampler_x.points(m.dim)
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_dirs, m.dim))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
    axes = np.concatenate([np.eye(m.dim), -np.eye(m.dim)])
    dirs = np.concatenate([axes, dirs])

    sup = -math.inf
    witness = None
    skipped = 0
    radii, vals = [], []
    for x in pts:
        try:
            factors = linalg.lu_decompose(m.jacobian(x))
        except (SingularError, NonFiniteError, DomainError, OverflowError):
            skipped += 1
            continue
        point_max = -math.inf
        for u in dirs:
            v = linalg.solve(factors, u)
            val = dplus(k, x, v)
            if not math.isfinite(val):
                return Certificate(
                    "thm31", Verdict.VIOLATED, math.inf, np.asarray(x, dtype=float),
                    None, len(vals) + 1, skipped, seed,
                    {"reason": "non-finite derivative"},
                )
            point_max = max(point_max, val)
        radii.append(float(np.linalg.norm(x)))
        vals.append(point_max)
        if point_max > sup:
            sup = point_max
            witness = np.asarray(x, dtype=float)

    if not vals:
        return Certificate("thm31", Verdict.INCONCLUSIVE, None, None, None,
                           0, skipped, seed, {"reason": "no valid samples"})

    co_status, co_witness, co_details = coercivity_evidence(k, m.dim, seed=seed)
    trend_ok, trend = _growth_trend(np.array(radii), np.array(vals))
    stats = {"sup": sup, "n_dirs": int(dirs.shape[0]), "trend": trend,
             "coercivity": co_status, "coercivity_details": co_details}

    if co_status == "decreasing":
        return Certificate("thm31", Verdict.VIOLATED, sup, co_witness, None,
                           len(vals), skipped, seed, stats)
    if co_status in ("flattening", "undecided") or trend_ok is None or not trend_ok:
        return Certificate("thm31", Verdict.INCONCLUSIVE, sup, witness, None,
                           len(vals), skipped, seed, stats)
    return Certificate("thm31", Verdict.SATISFIED, sup, witness, None,
                       len(vals), skipped, seed, stats)


class OmegaPoly:
    """Polynomial growth bound omega(s) = c0 + c1 s + ... with c_i >= 0, c0 > 0.

    For this family the divergence of the integral of 1/omega is decided
    exactly: it diverges iff the degree is at most 1.
    """

    def __init__(self, coeffs: Sequence[float]):
        coeffs = tuple(float(c) for c in coeffs)
        if not coeffs or coeffs[0] <= 0.0:
            raise ValueError("omega needs a positive constant term")
        if any(c < 0.0 for c in coeffs):
            raise ValueError("omega coefficients must be nonnegative")
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        self.coeffs = coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def diverges(self) -> bool:
        return self.degree <= 1

    def __call__(self, s: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def __repr__(self):
        return f"OmegaPoly({list(self.coeffs)})"


def check_hadamard(m: C1Map, omega, sampler, radii: Sequence[float] | None = None,
                   seed: int | None = None) -> Certificate:
    """Growth-bound criterion: ||f'(x)^{-1}|| <= omega(||x||), integral of
    1/omega divergent.

    Part (i) is checked pointwise on the samples.  Part (ii) is decided
    symbolically for OmegaPoly bounds; for arbitrary callables only numeric
    evidence is collected and the verdict is capped at inconclusive.
    """
    pts = sampler.points(m.dim)
    seed = seed if seed is not None else getattr(sampler, "seed", None)

    worst = -math.inf
    witness = None
    used = 0
    pointwise_ok = True
    for x in pts:
        w = float(omega(float(np.linalg.norm(x))))
        try:
            inv_n = linalg.inverse_norm(m.jacobian(x))
        except (SingularError, NonFiniteError, DomainError, OverflowError):
            inv_n = math.inf
        margin = inv_n - w
        used += 1
        if margin > POINT_SLACK * (1.0 + abs(w)):
            pointwise_ok = False
        if margin > worst:
            worst = margin
            witness = np.asarray(x, dtype=float)

    stats: dict = {"pointwise_margin": worst, "pointwise_ok": pointwise_ok}
    if used == 0:
        return Certificate("hadamard", Verdict.INCONCLUSIVE, None, None, POINT_SLACK,
                           0, 0, seed, {"reason": "no valid samples"})

    if isinstance(omega, OmegaPoly):
        diverges = omega.diverges()
        stats["divergence"] = "diverges" if diverges else "converges"
        stats["divergence_decided"] = "symbolic"
        if not diverges:
            tail, _ = quad(lambda s: 1.0 / omega(s), 0.0, math.inf, limit=400)
            stats["integral_value"] = float(tail)
        if not pointwise_ok:
            return Certificate("hadamard", Verdict.VIOLATED, worst, witness,
                               POINT_SLACK, used, 0, seed, stats)
        if not diverges:
            return Certificate("hadamard", Verdict.VIOLATED, worst, None,
                               POINT_SLACK, used, 0, seed, stats)
        return Certificate("hadamard", Verdict.SATISFIED, worst, witness,
                           POINT_SLACK, used, 0, seed, stats)

    # user-supplied omega: numeric divergence evidence only
    if radii is None:
        radii = tuple(float(2**j) for j in range(11))
    integrals = []
    acc = 0.0
    lo = 0.0
    for r in radii:
        val, _ = quad(lambda s: 1.0 / omega(s), lo, r, limit=200)
        acc += val
        integrals.append(acc)
        lo = r
    increments = np.diff(np.array([0.0] + integrals))
    early = float(increments[:3].max())
    late = float(increments[-3:].max())
    flattening = late <= FLATTEN_RATIO * max(early, 0.0) or late <= 1e-12
    stats["divergence"] = "flattening" if flattening else "growing"
    stats["divergence_decided"] = "numeric-evidence"
    stats["integral_profile"] = integrals
    if not pointwise_ok:
        return Certificate("hadamard", Verdict.VIOLATED, worst, witness,
                           POINT_SLACK, used, 0, seed, stats)
    return Certificate("hadamard", Verdict.INCONCLUSIVE, worst, witness,
                       POINT_SLACK, used, 0, seed, stats)


def check_coercive_map(m: C1Map, radii: Sequence[float] = (1.0, 2.0, 4.0, 8.0, 16.0),
                       samples_per_sphere: int = 128, seed: int = 0,
                       growth_factor: float = 10.0) -> Certificate:
    """Coercivity evidence for f itself: min ||f|| on nested spheres must grow.

    Satisfied-evidence when the minimum over the largest sphere exceeds
    growth_factor times the minimum over the smallest; otherwise
    violated-evidence with the flattest direction as witness.  Sampling can
    only ever provide evidence here, not proof.
    """
    radii = tuple(float(r) for r in radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    rng = np.random.default_rng(seed)
    minima = []
    witnesses = []
    for r in radii:
        pts = _sphere_points(m.dim, r, samples_per_sphere, rng)
        best = math.inf
        best_pt = None
        for p in pts:
            try:
                v = float(np.linalg.norm(m.eval(p)))
            except (NonFiniteError, DomainError, OverflowError):
                v = math.inf
            if v < best:
                best = v
                best_pt = p
        if best_pt is None or not math.isfinite(best):
            return Certificate("coercive", Verdict.INCONCLUSIVE, None, None,
                               growth_factor, 0, 0, seed,
                               {"reason": "no finite samples", "radius": r})
        minima.append(best)
        witnesses.append(best_pt)
    stats = {"radii": list(radii), "minima": minima,
             "growth_factor": growth_factor, "evidence_only": True}
    grew = minima[-1] > growth_factor * minima[0]
    if grew:
        return Certificate("coercive", Verdict.SATISFIED, minima[-1],
                           np.asarray(witnesses[-1], dtype=float), growth_factor,
                           len(radii) * samples_per_sphere, 0, seed, stats)
    return Certificate("coercive", Verdict.VIOLATED, minima[-1],
                       np.asarray(witnesses[-1], dtype=float), growth_factor,
                       len(radii) * samples_per_sphere, 0, seed, stats)


def check_ball_criterion(m: C1Map, x0, r: float, sphere_samples: int = 1024,
                         seed: int = 0) -> Certificate:
    """Sign of (x - x0) . F(x) on the sphere ||x - x0|| = r.

    All values <= POINT_SLACK certifies the invertibility ball; the reported
    min/max witnesses expose the actual sign profile either way.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    x0 = as_vector(x0, m.dim)
    f0 = m.eval(x0)
    rng = np.random.default_rng(seed)
    pts = x0 + _sphere_points(m.dim, r, sphere_samples, rng)

    vmax = -math.inf
    vmin = math.inf
    wmax = wmin = None
    used = 0
    skipped = 0
    for x in pts:
        try:
            f_vec = newton_field(m, x, f0)
        except (SingularError, NonFiniteError, DomainError, OverflowError):
            skipped += 1
            continue
        val = float((x - x0) @ f_vec)
        used += 1
        if val > vmax:
            vmax, wmax = val, np.asarray(x, dtype=float)
        if val < vmin:
            vmin, wmin = val, np.asarray(x, dtype=float)

    if used == 0:
        return Certificate("ball", Verdict.INCONCLUSIVE, None, None, POINT_SLACK,
                           0, skipped, seed, {"reason": "no valid samples"})
    stats = {"min": vmin, "max": vmax, "min_witness": wmin, "max_witness": wmax,
             "radius": r}
    if vmax <= POINT_SLACK:
        return Certificate("ball", Verdict.SATISFIED, vmax, wmax, POINT_SLACK,
                           used, skipped, seed, stats)
    return Certificate("ball", Verdict.VIOLATED, vmax, wmax, POINT_SLACK,
                       used, skipped, seed, stats)


class SampledSup(NamedTuple):
    value: float
    witness: Optional[np.ndarray]
    samples_used: int


def check_bounded_inverse_on_ball(m: C1Map, r: float, count: int = 512,
                                  seed: int = 0) -> SampledSup:
    """Sampled sup of ||f'(x)^{-1}|| over the ball ||x|| <= r.

    In R^n with continuous f' this sup is automatically finite; the value
    feeds solver diagnostics.  A singular sample short-circuits to +inf with
    the offending point as witness.  Boundary sphere points are always
    included since the sup is typically attained there.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(seed)
    ball = BallSampler(r, count, seed).points(m.dim)
    shell = _sphere_points(m.dim, r, max(count // 4, 2 * m.dim), rng)
    pts = np.concatenate([ball, shell])

    sup = 0.0
    witness = None
    for x in pts:
        try:
            v = linalg.inverse_norm(m.jacobian(x))
        except SingularError:
            return SampledSup(math.inf, np.asarray(x, dtype=float), len(pts))
        if v > sup:
            sup = v
            witness = np.asarray(x, dtype=float)
    return SampledSup(sup, witness, len(pts))
