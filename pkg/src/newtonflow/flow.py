"""Continuous Newton (Davidenko) flow xdot = -f'(x)^{-1} (f(x) - y*).

Along an exact solution the residual r(t) = f(x(t)) - y* obeys the identity
r(t) = e^{-t} r(0): it shrinks exponentially *along a fixed direction*.  The
integrator below exploits that as a built-in oracle: every accepted step must
reproduce the e^{-dt} contraction of the residual vector to within a small
multiple of the local tolerance, which is a global correctness check no
generic ODE code has.  The same identity, measured over a whole trajectory,
is exposed as `decay_drift`.

The stepper is an embedded Dormand-Prince 5(4) pair with PI step-size
control.  Backward integration (the opposite vector field, used to show
solutions are global in the past) runs the same stepper with the time sign
flipped; the decay identity then predicts e^{+|dt|} growth.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import linalg
from .linalg import SingularError, as_vector
from .maps import C1Map, DomainError, NonFiniteError


class FlowStatus(str, Enum):
    CONVERGED = "converged"
    BLOWUP = "blowup"
    SINGULAR_JACOBIAN = "singular-jacobian"
    HORIZON_REACHED = "horizon-reached"
    STEP_FAILURE = "step-failure"


class Direction(Enum):
    FORWARD = 1
    BACKWARD = -1


@dataclass(frozen=True)
class FlowOptions:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    t_max: float = 40.0          # e^{-40} ~ 4e-18: below double precision
    blowup_radius: float = 1e8
    residual_tol: float = 1e-9
    max_steps: int = 100_000

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "t_max", "blowup_radius", "residual_tol"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


class FlowFailure(Exception):
    """solve_inverse could not reach the target; wraps the trajectory."""

    def __init__(self, trajectory: "Trajectory"):
        self.trajectory = trajectory
        self.status = trajectory.status
        super().__init__(f"flow terminated with status {trajectory.status.value}")


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped flow states.

    ``t`` is strictly increasing for forward runs and strictly decreasing for
    backward runs.  ``residuals[i] = f(states[i]) - target``.
    """

    t: np.ndarray
    states: np.ndarray
    residuals: np.ndarray
    status: FlowStatus
    steps: int
    target: np.ndarray

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def final_residual_norm(self) -> float:
        return float(np.linalg.norm(self.residuals[-1]))

    def drift_profile(self) -> np.ndarray:
        """Per-sample deviation ||r(t) - e^{-t} r(0)|| / ||r(0)||."""
        r0 = self.residuals[0]
        n0 = float(np.linalg.norm(r0))
        if n0 == 0.0:
            return np.zeros(len(self.t))
        pred = np.exp(-self.t)[:, None] * r0[None, :]
        return np.linalg.norm(self.residuals - pred, axis=1) / n0

    def summary(self) -> dict:
        return {
            "status": self.status.value,
            "t_final": self.t_final,
            "steps": self.steps,
            "final_x": [float(v) for v in self.final_state],
            "final_residual": self.final_residual_norm,
            "max_drift": float(self.drift_profile().max()),
        }

    def to_csv(self, path) -> None:
        """Columns: t, x_0..x_{n-1}, r_norm, drift."""
        drift = self.drift_profile()
        rnorm = np.linalg.norm(self.residuals, axis=1)
        n = self.states.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"x_{i}" for i in range(n)] + ["r_norm", "drift"])
            for i in range(len(self.t)):
                w.writerow(
                    [repr(float(self.t[i]))]
                    + [repr(float(v)) for v in self.states[i]]
                    + [repr(float(rnorm[i])), repr(float(drift[i]))]
                )


def newton_field(m: C1Map, x, target) -> np.ndarray:
    """F(x) = -f'(x)^{-1} (f(x) - y*), computed by a fresh LU solve."""
    x = as_vector(x, m.dim)
    target = as_vector(target, m.dim)
    fx = m.eval(x)
    jac = m.jacobian(x)
    return linalg.solve_dense(jac, target - fx)


def decay_drift(traj: Trajectory) -> float:
    """Max over samples of ||r(t) - e^{-t} r(0)|| / ||r(0)||.

    The flow's primary integration-error oracle: exactly zero in exact
    arithmetic, and bounded by a small multiple of the step tolerance
    times the step count for a healthy run.
    """
    return float(traj.drift_profile().max())


def direction_deviation(traj: Trajectory) -> float:
    """Max angle (radians) between r(t) and r(0) over the trajectory.

    The residual direction is invariant along exact solutions (the image
    moves on the half-line through the target), so any rotation is
    integration error.
    """
    r0 = traj.residuals[0]
    n0 = float(np.linalg.norm(r0))
    if n0 == 0.0:
        return 0.0
    norms = np.linalg.norm(traj.residuals, axis=1)
    keep = norms > 0.0
    cosang = (traj.residuals[keep] @ r0) / (norms[keep] * n0)
    return float(np.arccos(np.clip(cosang, -1.0, 1.0)).max())


# Dormand-Prince 5(4) coefficients.  The fifth-order solution is propagated;
# row E is (b5 - b4), the embedded error weights.  Stage 7 sits at the step
# endpoint (FSAL), which also hands us the candidate residual for free.
_A_ROWS = [
    np.array(row)
    for row in (
        (),
        (1 / 5,),
        (3 / 40, 9 / 40),
        (44 / 45, -56 / 15, 32 / 9),
        (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
        (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
        (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
    )
]
_E = np.array(
    (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_KI = 0.06          # PI controller: h *= safety * err^-(KI+KP) * err_prev^KP
_KP = 0.08
_H_MIN = 1e-14
_COND_LIMIT = 1e14  # spectral condition beyond this counts as singular
_EPS = float(np.finfo(float).eps)


def _field(fn, jacf, x, target):
    """(F, r, J) at x, unvalidated hot path.

    Non-finite values are not screened here: NaN/inf propagate into the step
    error or the decay violation, whose negated acceptance comparisons then
    reject the step.  Only structural failures raise.
    """
    r = fn(x) - target
    j = jacf(x)
    return linalg._solve_raw(j, -r), r, j


def integrate(
    m: C1Map,
    start,
    target,
    opts: FlowOptions | None = None,
    direction: Direction = Direction.FORWARD,
) -> Trajectory:
    """Integrate the Newton flow from ``start`` toward ``target``.

    The returned Trajectory's status reports how the run ended; in-flight
    failures (singular Jacobian, overflow, vanishing steps) become statuses
    rather than exceptions.  Samples are recorded at every accepted step.
    """
    opts = opts or FlowOptions()
    x = as_vector(start, m.dim)
    target = as_vector(target, m.dim)
    sgn = 1.0 if direction is Direction.FORWARD else -1.0
    oracle_tol = 10.0 * opts.rel_tol
    tnorm = float(np.linalg.norm(target))

    fn = m.fn
    jacf = m.jac if m.jac is not None else m._fd_jacobian

    fx = m.eval(x)  # validated once; map errors at the seed raise to the caller
    r = fx - target
    rnorm = float(np.linalg.norm(r))

    ts = [0.0]
    xs = [x.copy()]
    rs = [r.copy()]

    def finish(status, steps):
        return Trajectory(
            t=np.array(ts),
            states=np.array(xs),
            residuals=np.array(rs),
            status=status,
            steps=steps,
            target=target,
        )

    if rnorm <= opts.residual_tol:
        return finish(FlowStatus.CONVERGED, 0)

    try:
        f_cur, r, jac = _field(fn, jacf, x, target)
    except (SingularError, NonFiniteError, OverflowError):
        return finish(FlowStatus.SINGULAR_JACOBIAN, 0)
    smax, smin = linalg._extremes_raw(jac)
    if not (smin > 0.0 and smax / smin <= _COND_LIMIT):
        return finish(FlowStatus.SINGULAR_JACOBIAN, 0)

    # start small; the controller corrects within a few steps
    fmag = float(np.linalg.norm(f_cur))
    h = min(1e-2 * (1.0 + float(np.linalg.norm(x))) / (1.0 + fmag), opts.t_max, 1.0)

    tau = 0.0
    accepted = 0
    attempts = 0
    err_prev = 1.0
    last_rejected = False
    last_exc: Exception | None = None
    dim = m.dim
    blowup_sq = opts.blowup_radius * opts.blowup_radius
    k = np.empty((7, dim))

    while True:
        if attempts >= opts.max_steps:
            return finish(FlowStatus.STEP_FAILURE, accepted)
        attempts += 1
        h = min(h, opts.t_max - tau)
        if h < _H_MIN:
            if isinstance(last_exc, SingularError):
                return finish(FlowStatus.SINGULAR_JACOBIAN, accepted)
            return finish(FlowStatus.STEP_FAILURE, accepted)

        k[0] = sgn * f_cur
        try:
            for i in range(1, 6):
                y = x + h * (_A_ROWS[i] @ k[:i])
                k[i] = sgn * _field(fn, jacf, y, target)[0]
            x_new = x + h * (_A_ROWS[6] @ k[:6])
            f_new, r_new, jac_new = _field(fn, jacf, x_new, target)
            k[6] = sgn * f_new
        except (SingularError, NonFiniteError, DomainError, OverflowError, FloatingPointError) as exc:
            last_exc = exc
            last_rejected = True
            h *= 0.5
            continue

        # embedded 4th/5th-order error estimate, RMS-scaled; comparisons are
        # negated so NaN falls into the reject branch
        err_vec = (h * (_E @ k)) / (
            opts.abs_tol + opts.rel_tol * np.maximum(np.abs(x), np.abs(x_new))
        )
        err = math.sqrt(float(err_vec @ err_vec) / dim)
        if not (err <= 1.0):
            last_exc = None
            last_rejected = True
            h *= max(0.1, min(1.0, _SAFETY * err**-0.2)) if math.isfinite(err) else 0.5
            continue

        # decay oracle: the residual vector must contract by e^{-sgn*h},
        # direction included.  The floor term is the cancellation noise of
        # evaluating f(x) - y* in floating point; below it the identity is
        # unobservable, not violated.
        dev = r_new - math.exp(-sgn * h) * r
        viol = math.sqrt(abs(float(dev @ dev)))
        allowed = oracle_tol * rnorm + 32.0 * _EPS * (tnorm + rnorm)
        ratio = viol / allowed
        if not (ratio <= 1.0):
            last_exc = None
            last_rejected = True
            h *= 0.5
            continue

        tau += h
        accepted += 1
        x = x_new
        f_cur, r, jac = f_new, r_new, jac_new
        rnorm = math.sqrt(float(r @ r))
        ts.append(sgn * tau)
        xs.append(x)
        rs.append(r)

        if rnorm <= opts.residual_tol:
            return finish(FlowStatus.CONVERGED, accepted)
        if float(x @ x) >= blowup_sq:
            return finish(FlowStatus.BLOWUP, accepted)
        if tau >= opts.t_max * (1.0 - 1e-14):
            return finish(FlowStatus.HORIZON_REACHED, accepted)

        smax, smin = linalg._extremes_raw(jac)
        if not (smin > 0.0 and smax / smin <= _COND_LIMIT):
            return finish(FlowStatus.SINGULAR_JACOBIAN, accepted)

        comb = max(err, ratio, 1e-10)
        factor = _SAFETY * comb ** -(_KI + _KP) * err_prev**_KP
        if last_rejected:
            factor = min(factor, 1.0)
        h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        err_prev = comb
        last_rejected = False
        last_exc = None


def _newton_polish(m: C1Map, x, target, steps: int = 3) -> np.ndarray:
    """Guarded plain-Newton refinement: keep iterating while the residual drops."""
    target = as_vector(target, m.dim)
    x = as_vector(x, m.dim).copy()
    r = m.eval(x) - target
    best = float(np.linalg.norm(r))
    for _ in range(steps):
        if best == 0.0:
            break
        try:
            step = linalg.solve_dense(m.jacobian(x), r)
            x_try = x - step
            r_try = m.eval(x_try) - target
        except (SingularError, NonFiniteError, DomainError, OverflowError):
            break
        n_try = float(np.linalg.norm(r_try))
        if n_try >= best:
            break
        x, r, best = x_try, r_try, n_try
    return x


def solve_inverse(m: C1Map, target, start, opts: FlowOptions | None = None) -> np.ndarray:
    """Solve f(x) = y* globally: flow from ``start``, then polish with Newton.

    Returns x with ||f(x) - y*|| <= residual_tol.  Raises FlowFailure
    (carrying the trajectory) if the flow ends in any non-converged status.
    The flow lands globally close; the guarded Newton finish squeezes the
    last digits quadratically.
    """
    opts = opts or FlowOptions()
    traj = integrate(m, start, target, opts, Direction.FORWARD)
    if traj.status is not FlowStatus.CONVERGED:
        raise FlowFailure(traj)
    return _newton_polish(m, traj.final_state, target)
