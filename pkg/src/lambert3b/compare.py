"""Score the closed-form trajectories against the numerical oracle."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ApproximationBreakdown, EmptyWindowWarning
from .oracle import CartesianState, IntegratorConfig, Trajectory, integrate, polar_to_cartesian
from .third_body import ThirdBodyTrajectory, third_body_trajectory
from .two_body import (
    DerivedConstants,
    ScenarioConfig,
    ValidityReport,
    check_validity,
    derive_constants,
    r1_of_t,
    r2_of_t,
    r_of_t,
    theta1_of_t,
    theta2_of_t,
)

__all__ = [
    "CHANNELS",
    "REL_FLOOR",
    "ClosedFormTrajectory",
    "ErrorSeries",
    "ComparisonSummary",
    "closed_form_trajectory",
    "oracle_initial_state",
    "oracle_channels",
    "validity_window",
    "run_comparison",
    "format_number",
]

CHANNELS = ("r", "r1", "r2", "theta1", "theta2", "r3", "theta3", "pos3")
REL_FLOOR = 1e-30


def format_number(x) -> str:
    """17 significant digits; ``nan``/``inf`` spelled as Python does."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


@dataclass
class ClosedFormTrajectory:
    """Closed-form channels on the output grid; NaN where an expression broke down."""

    t: np.ndarray
    r: np.ndarray
    r1: np.ndarray
    theta1: np.ndarray
    r2: np.ndarray
    theta2: np.ndarray
    third: ThirdBodyTrajectory

    @property
    def r3(self):
        return self.third.r3

    @property
    def theta3(self):
        return self.third.theta3

    def positions(self) -> np.ndarray:
        """Cartesian positions, shape ``(samples, 3, 2)``."""
        out = np.empty((self.t.size, 3, 2))
        for k, (rr, th) in enumerate(((self.r1, self.theta1), (self.r2, self.theta2), (self.r3, self.theta3))):
            out[:, k, 0] = rr * np.cos(th)
            out[:, k, 1] = rr * np.sin(th)
        return out


def _per_sample(fn, t):
    try:
        return np.asarray(fn(t), dtype=float)
    except ApproximationBreakdown:
        out = np.full(t.size, np.nan)
        for i, ti in enumerate(t):
            try:
                out[i] = fn(ti)
            except ApproximationBreakdown:
                pass
        return out


def closed_form_trajectory(cfg: ScenarioConfig, dc: DerivedConstants | None = None,
                           t=None) -> ClosedFormTrajectory:
    dc = dc or derive_constants(cfg)
    t = cfg.sample_times() if t is None else np.atleast_1d(np.asarray(t, dtype=float))
    third = third_body_trajectory(dc, cfg, t)
    return ClosedFormTrajectory(
        t=t,
        r=np.asarray(r_of_t(dc, t), dtype=float),
        r1=_per_sample(lambda x: r1_of_t(dc, cfg, x), t),
        theta1=np.asarray(theta1_of_t(dc, cfg, t), dtype=float),
        r2=_per_sample(lambda x: r2_of_t(dc, cfg, x), t),
        theta2=np.asarray(theta2_of_t(dc, cfg, t), dtype=float),
        third=third,
    )


def oracle_initial_state(cfg: ScenarioConfig, dc: DerivedConstants, fd_step: float | None = None):
    """Initial Cartesian state for the oracle, shared with the closed form at ``t0``.

    The third body starts at the closed-form ``(r3, theta3)``; its velocity is a
    one-sided difference over ``dt_out / 100``. Returns ``(state, masses, note)``;
    when the closed form has no third-body position at ``t0`` only the
    primaries are returned and ``note`` says why.
    """
    pos, vel = polar_to_cartesian(
        [cfg.r1o, cfg.r2o], [cfg.theta1o, cfg.theta2o],
        [cfg.rdot1o, cfg.rdot2o], [cfg.thetadot_o, cfg.thetadot_o],
    )
    step = cfg.dt_out / 100.0 if fd_step is None else fd_step
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        third = third_body_trajectory(dc, cfg, [cfg.t0, cfg.t0 + step])
    if np.all(np.isfinite(third.r3)):
        p = np.stack([third.r3 * np.cos(third.theta3), third.r3 * np.sin(third.theta3)], axis=-1)
        pos = np.vstack([pos, p[0]])
        vel = np.vstack([vel, (p[1] - p[0]) / step])
        return CartesianState(cfg.t0, pos, vel), cfg.masses, ""
    reason = "; ".join(third.failures.values()) or "non-finite third-body state"
    note = f"third body closed form unavailable at t0 ({reason}); oracle run with primaries only"
    return CartesianState(cfg.t0, pos, vel), cfg.masses[:2], note


def _align_angle(angle, reference):
    """Unwrap ``angle`` and shift it by 2 pi k onto ``reference`` at the first shared sample."""
    out = np.unwrap(angle)
    ok = np.flatnonzero(np.isfinite(reference) & np.isfinite(out))
    if ok.size:
        i = ok[0]
        out = out + 2.0 * math.pi * round((reference[i] - out[i]) / (2.0 * math.pi))
    return out


def oracle_channels(traj: Trajectory, closed: ClosedFormTrajectory) -> dict:
    """Polar channels of the oracle aligned to the closed form's angle branches."""
    pos = traj.pos
    ch = {
        "r": np.hypot(*(pos[:, 1] - pos[:, 0]).T),
        "r1": np.hypot(*pos[:, 0].T),
        "r2": np.hypot(*pos[:, 1].T),
        "theta1": _align_angle(np.arctan2(pos[:, 0, 1], pos[:, 0, 0]), closed.theta1),
        "theta2": _align_angle(np.arctan2(pos[:, 1, 1], pos[:, 1, 0]), closed.theta2),
    }
    if pos.shape[1] > 2:
        ch["r3"] = np.hypot(*pos[:, 2].T)
        ch["theta3"] = _align_angle(np.arctan2(pos[:, 2, 1], pos[:, 2, 0]), closed.theta3)
        ch["pos3"] = pos[:, 2]
    else:
        nan = np.full(traj.t.size, np.nan)
        ch["r3"] = nan
        ch["theta3"] = nan
        ch["pos3"] = np.full((traj.t.size, 2), np.nan)
    return ch


def validity_window(cfg: ScenarioConfig, dc: DerivedConstants, t) -> np.ndarray:
    """Largest prefix of ``t`` on which every gate condition holds."""
    r = np.asarray(r_of_t(dc, t), dtype=float)
    ok = (dc.B > 0) & (np.abs(dc.h_ang / r ** 2) < 1.0) & (r > dc.A / abs(dc.B))
    return np.logical_and.accumulate(ok)


@dataclass
class ErrorSeries:
    t: np.ndarray
    abs_err: dict
    rel_err: dict
    in_validity_window: np.ndarray

    def columns(self) -> list[str]:
        cols = ["t", "in_validity_window"]
        for name in CHANNELS:
            cols += [f"abs_err_{name}", f"rel_err_{name}"]
        return cols

    def rows(self):
        for i, ti in enumerate(self.t):
            row = [format_number(ti), "1" if self.in_validity_window[i] else "0"]
            for name in CHANNELS:
                row += [format_number(self.abs_err[name][i]), format_number(self.rel_err[name][i])]
            yield row

    def to_csv(self, path_or_buf=None) -> str | None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns())
        writer.writerows(self.rows())
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                fh.write(text)
        return None


@dataclass
class ComparisonSummary:
    max_rel_err_in_window: dict
    rms_rel_err_in_window: dict
    window: tuple
    validity: ValidityReport
    notes: list = field(default_factory=list)

    @property
    def window_empty(self) -> bool:
        return self.window[0] is None

    def as_pairs(self) -> list[tuple[str, str]]:
        pairs = []
        for name in CHANNELS:
            pairs.append((f"max_rel_err_{name}_in_window", format_number(self.max_rel_err_in_window[name])))
        for name in CHANNELS:
            pairs.append((f"rms_rel_err_{name}_in_window", format_number(self.rms_rel_err_in_window[name])))
        start, end = self.window
        pairs.append(("window_empty", "true" if self.window_empty else "false"))
        pairs.append(("window_start", "nan" if start is None else format_number(start)))
        pairs.append(("window_end", "nan" if end is None else format_number(end)))
        for key, value in self.validity.as_dict().items():
            text = format_number(value) if isinstance(value, float) else str(value).lower()
            pairs.append((f"validity_{key}", text))
        pairs.append(("notes", " | ".join(self.notes)))
        return pairs

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.as_pairs())


def _stats(values: np.ndarray):
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return math.nan, math.nan
    return float(np.max(finite)), float(np.sqrt(np.mean(finite ** 2)))


def run_comparison(cfg: ScenarioConfig, icfg: IntegratorConfig | None = None):
    """Closed form versus oracle on the scenario's output grid.

    Returns ``(ErrorSeries, ComparisonSummary)``. Samples outside the validity
    window are kept in the series but excluded from the summary statistics.
    """
    icfg = icfg or IntegratorConfig()
    dc = derive_constants(cfg)
    validity = check_validity(cfg, dc)
    closed = closed_form_trajectory(cfg, dc)
    t = closed.t
    notes = []

    initial, masses, note = oracle_initial_state(cfg, dc)
    if note:
        notes.append(note)
    traj = integrate(initial, masses, cfg.G, icfg, t[-1], cfg.dt_out)
    oracle = oracle_channels(traj, closed)

    cf = {
        "r": closed.r, "r1": closed.r1, "r2": closed.r2,
        "theta1": closed.theta1, "theta2": closed.theta2,
        "r3": closed.r3, "theta3": closed.theta3,
    }
    abs_err, rel_err = {}, {}
    for name in CHANNELS[:-1]:
        abs_err[name] = np.abs(cf[name] - oracle[name])
        rel_err[name] = abs_err[name] / np.maximum(np.abs(oracle[name]), REL_FLOOR)
    p3 = closed.positions()[:, 2]
    abs_err["pos3"] = np.hypot(*(p3 - oracle["pos3"]).T)
    rel_err["pos3"] = abs_err["pos3"] / np.maximum(np.hypot(*oracle["pos3"].T), REL_FLOOR)

    window = validity_window(cfg, dc, t)
    series = ErrorSeries(t=t, abs_err=abs_err, rel_err=rel_err, in_validity_window=window)

    max_in, rms_in = {}, {}
    for name in CHANNELS:
        max_in[name], rms_in[name] = _stats(rel_err[name][window])

    n_fail = len(closed.third.failures)
    if n_fail:
        notes.append(f"third body closed form failed at {n_fail} of {t.size} samples")
    if closed.third.branch_switches:
        notes.append(f"theta3 arccos branch switched at samples {closed.third.branch_switches}")
    notes.append(f"oracle {icfg.method} steps={traj.n_steps} rejected={traj.n_rejected}")

    if window.any():
        idx = np.flatnonzero(window)
        bounds = (float(t[idx[0]]), float(t[idx[-1]]))
    else:
        bounds = (None, None)
        warnings.warn("no sample lies inside the validity window", EmptyWindowWarning, stacklevel=2)
        whole = ", ".join(
            f"max_rel_err_{name}_horizon={format_number(_stats(rel_err[name])[0])}" for name in CHANNELS
        )
        notes.append(f"empty validity window; whole-horizon stats: {whole}")

    summary = ComparisonSummary(
        max_rel_err_in_window=max_in,
        rms_rel_err_in_window=rms_in,
        window=bounds,
        validity=validity,
        notes=notes,
    )
    return series, summary
