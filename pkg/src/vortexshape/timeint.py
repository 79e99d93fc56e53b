"""Explicit Runge-Kutta integration with invariant monitoring.

Two methods: classical fixed-step RK4 and adaptive Dormand-Prince 5(4).
Vector fields are autonomous, ``rhs(y) -> dy/dt`` on flat float arrays.  An
exception raised by the vector field (a collision, a log-domain failure)
stops the run and the partial record carries the reason.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError
from .geometry import FloatArray

VectorField = Callable[[FloatArray], FloatArray]
Monitor = Callable[[FloatArray], float]
# maps a state to (possibly corrected state, number of corrections applied)
PostStep = Callable[[FloatArray], "tuple[FloatArray, int]"]

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "dp54"
    t_end: float = 10.0
    dt: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-10
    sample_stride: int = 1
    sample_dt: float | None = None
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.method not in ("rk4", "dp54"):
            raise ValueError(f"unknown method {self.method!r}; expected 'rk4' or 'dp54'")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if int(self.sample_stride) < 1:
            raise ValueError("sample_stride must be a positive integer")
        if self.sample_dt is not None and not self.sample_dt > 0:
            raise ValueError("sample_dt must be positive")


@dataclass
class TrajectoryRecord:
    times: FloatArray
    states: FloatArray
    monitors: dict[str, FloatArray] = field(default_factory=dict)
    halt_reason: str | None = None
    n_steps: int = 0
    n_rejected: int = 0
    n_corrections: int = 0

    @property
    def halted(self) -> bool:
        return self.halt_reason is not None

    @property
    def final_state(self) -> FloatArray:
        return self.states[-1]

    def drift(self, name: str, zero_tol: float = 1e-12) -> float:
        return drift(self.monitors[name], zero_tol)

    def drifts(self, zero_tol: float = 1e-12) -> dict[str, float]:
        return {k: drift(v, zero_tol) for k, v in self.monitors.items()}


def drift(series: ArrayLike, zero_tol: float = 1e-12) -> float:
    """Largest deviation from the first value, relative unless that value is ~0."""
    x = np.asarray(series, dtype=np.float64)
    ref = x[0]
    dev = float(np.max(np.abs(x - ref)))
    return dev if abs(ref) <= zero_tol else dev / abs(ref)


def rk4_step(rhs: VectorField, y: FloatArray, h: float) -> FloatArray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _dp54_step(rhs: VectorField, y: FloatArray, h: float, k1: FloatArray):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
        ks.append(rhs(yi))
    K = np.array(ks)
    y_new = y + h * (_B5 @ K)
    err = h * (_E @ K)
    return y_new, err, ks[-1]


def _error_norm(err, y, y_new, rtol, atol) -> float:
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(rhs: VectorField, y: FloatArray, f0: FloatArray, rtol: float, atol: float) -> float:
    scale = atol + rtol * np.abs(y)
    d0 = float(np.sqrt(np.mean((y / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = rhs(y + h0 * f0)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 5.0)
    return min(100.0 * h0, h1)


class _Recorder:
    def __init__(self, monitors: Mapping[str, Monitor]):
        self.monitors = dict(monitors)
        self.times: list[float] = []
        self.states: list[FloatArray] = []
        self.series: dict[str, list[float]] = {k: [] for k in self.monitors}

    def record(self, t: float, y: FloatArray) -> None:
        values = {k: float(m(y)) for k, m in self.monitors.items()}
        self.times.append(t)
        self.states.append(y.copy())
        for k, v in values.items():
            self.series[k].append(v)

    def build(self, **kw) -> TrajectoryRecord:
        return TrajectoryRecord(
            times=np.array(self.times),
            states=np.array(self.states),
            monitors={k: np.array(v) for k, v in self.series.items()},
            **kw,
        )


def integrate(
    rhs: VectorField,
    y0: ArrayLike,
    cfg: IntegratorConfig = IntegratorConfig(),
    monitors: Mapping[str, Monitor] | None = None,
    post_step: PostStep | None = None,
) -> TrajectoryRecord:
    """Integrate ``dy/dt = rhs(y)`` on ``[0, cfg.t_end]``.

    Samples are taken at t=0, every ``sample_stride`` accepted steps and at
    the final time.  With ``sample_dt`` set, steps are shortened so that the
    samples land exactly on multiples of ``sample_dt`` instead.
    ``post_step`` may correct the state after each accepted step (for
    instance renormalizing radii); its correction count is accumulated.
    """
    y = np.array(y0, dtype=np.float64).ravel()
    rec = _Recorder(monitors or {})
    rec.record(0.0, y)
    t = 0.0
    n_steps = n_rej = n_corr = 0
    t_end = cfg.t_end
    grid_dt = cfg.sample_dt
    next_sample = grid_dt if grid_dt is not None else None
    reason = None

    def target_time() -> float:
        return min(t_end, next_sample) if next_sample is not None else t_end

    def close(a: float, b: float) -> bool:
        return abs(a - b) <= 1e-12 * max(1.0, abs(b))

    try:
        if not np.all(np.isfinite(rhs(y))):
            raise DomainError("vector field is not finite at the initial state")
        if cfg.method == "rk4":
            while t < t_end and not close(t, t_end):
                if n_steps >= cfg.max_steps:
                    raise RuntimeError("maximum number of steps exceeded")
                h = min(cfg.dt, target_time() - t)
                y = rk4_step(rhs, y, h)
                if not np.all(np.isfinite(y)):
                    raise FloatingPointError("non-finite state")
                t_new = t + h
                if close(t_new, target_time()):
                    t_new = target_time()
                t = t_new
                if post_step is not None:
                    y, cnt = post_step(y)
                    n_corr += cnt
                n_steps += 1
                if _should_sample(t, n_steps, cfg, next_sample, t_end, close):
                    rec.record(t, y)
                    if next_sample is not None and close(t, next_sample):
                        next_sample = grid_dt * (round(next_sample / grid_dt) + 1)
        else:
            f = rhs(y)
            h = min(_initial_step(rhs, y, f, cfg.rtol, cfg.atol), t_end)
            while t < t_end and not close(t, t_end):
                if n_steps + n_rej >= cfg.max_steps:
                    raise RuntimeError("maximum number of steps exceeded")
                tgt = target_time()
                h_try = min(h, tgt - t)
                clipped = h_try < h
                y_new, err, f_new = _dp54_step(rhs, y, h_try, f)
                en = _error_norm(err, y, y_new, cfg.rtol, cfg.atol)
                if not np.isfinite(en):
                    raise FloatingPointError("non-finite error estimate")
                if en <= 1.0:
                    t_new = t + h_try
                    if close(t_new, tgt):
                        t_new = tgt
                    t, y, f = t_new, y_new, f_new
                    if post_step is not None:
                        y, cnt = post_step(y)
                        if cnt:
                            n_corr += cnt
                            f = rhs(y)
                    n_steps += 1
                    fac = SAFETY * en ** -0.2 if en > 0 else FAC_MAX
                    h_next = h_try * min(FAC_MAX, max(FAC_MIN, fac))
                    # a step shortened to hit a sample time should not shrink the next one
                    h = max(h, h_next) if clipped else h_next
                    if _should_sample(t, n_steps, cfg, next_sample, t_end, close):
                        rec.record(t, y)
                        if next_sample is not None and close(t, next_sample):
                            next_sample = grid_dt * (round(next_sample / grid_dt) + 1)
                else:
                    n_rej += 1
                    h = h_try * max(FAC_MIN, SAFETY * en**-0.2)
                    if h < 1e-14 * max(1.0, abs(t)):
                        raise FloatingPointError(f"step size underflow at t={t!r}")
    except (DomainError, FloatingPointError, ArithmeticError, RuntimeError) as exc:
        reason = f"{type(exc).__name__}: {exc} (t={t!r})"
    if rec.times[-1] != t:
        # last accepted state of a halted run
        try:
            rec.record(t, y)
        except (DomainError, ArithmeticError, FloatingPointError):
            pass
    return rec.build(halt_reason=reason, n_steps=n_steps, n_rejected=n_rej, n_corrections=n_corr)


def _should_sample(t, n_steps, cfg, next_sample, t_end, close) -> bool:
    if close(t, t_end):
        return True
    if next_sample is not None:
        return close(t, next_sample)
    return n_steps % int(cfg.sample_stride) == 0


def observed_order(errors: ArrayLike, steps: ArrayLike) -> float:
    """Least-squares slope of ``log(error)`` against ``log(step)``."""
    e = np.log(np.asarray(errors, dtype=np.float64))
    h = np.log(np.asarray(steps, dtype=np.float64))
    return float(np.polyfit(h, e, 1)[0])


__all__ = [
    "IntegratorConfig",
    "TrajectoryRecord",
    "integrate",
    "rk4_step",
    "drift",
    "observed_order",
]
