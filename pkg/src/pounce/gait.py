"""Spatiotemporal gait parameters from simulated trajectories.

Contact events come from the simulator's per-foot flags, debounced at
40 ms; metrics per foot are swing time (liftoff to touchdown), stance
time (touchdown to liftoff), step distance (touchdown displacement from
the contralateral limb's most recent touchdown along the direction of
movement), and step height (peak toe height per swing).
"""

from __future__ import annotations

import dataclasses
import io

import numpy as np

from .sim.config import LEG_NAMES

DEBOUNCE = 0.040            # seconds; < 2 samples at 50 Hz are merged
SAMPLE_DT = 0.02
TOUCHDOWN, LIFTOFF = "touchdown", "liftoff"
CONTRALATERAL = {"FL": "FR", "FR": "FL", "HL": "HR", "HR": "HL"}
FOOT_PAIR = {"FL": "front", "FR": "front", "HL": "hind", "HR": "hind"}


@dataclasses.dataclass
class ContactEvent:
    foot: str
    kind: str
    time: float
    position: np.ndarray        # world (x, z) at the event


@dataclasses.dataclass
class Trajectory:
    """Minimal slice of a rollout needed for gait analysis."""
    times: np.ndarray           # (T,)
    contacts: np.ndarray        # (T, 4) boolean
    foot_pos: np.ndarray        # (T, 4, 2) world
    root_x: np.ndarray          # (T,)

    @property
    def direction(self) -> float:
        """Sign of net movement along x."""
        d = self.root_x[-1] - self.root_x[0]
        return 1.0 if d >= 0 else -1.0


def _debounce(flags: np.ndarray, dt: float) -> np.ndarray:
    """Remove contact/airborne intervals shorter than DEBOUNCE."""
    out = flags.copy()
    min_samples = max(1, int(round(DEBOUNCE / dt)))
    changed = True
    while changed:
        changed = False
        T = len(out)
        i = 0
        while i < T:
            j = i
            while j < T and out[j] == out[i]:
                j += 1
            # interior interval shorter than the window flips to its neighbors
            if i > 0 and j < T and (j - i) < min_samples:
                out[i:j] = out[i - 1]
                changed = True
            i = j
    return out


def detect_contacts(traj: Trajectory) -> list:
    """Debounced ContactEvents at contact-flag transitions."""
    if len(traj.times) < 2:
        return []
    dt = float(np.median(np.diff(traj.times)))
    events = []
    for f in range(4):
        flags = _debounce(traj.contacts[:, f].astype(bool), dt)
        for t_idx in range(1, len(flags)):
            if flags[t_idx] != flags[t_idx - 1]:
                kind = TOUCHDOWN if flags[t_idx] else LIFTOFF
                events.append(ContactEvent(
                    foot=LEG_NAMES[f], kind=kind, time=float(traj.times[t_idx]),
                    position=traj.foot_pos[t_idx, f].copy()))
    events.sort(key=lambda e: (e.time, e.foot))
    return events


@dataclasses.dataclass
class FootMetrics:
    swing_times: list
    stance_times: list
    step_distances: list
    step_heights: list
    reason: str = ""

    def empty(self) -> bool:
        return not (self.swing_times or self.stance_times
                    or self.step_distances or self.step_heights)


def gait_metrics(events: list, traj: Trajectory) -> dict:
    """Per-foot spatiotemporal records; empty with a reason when a foot
    has fewer than two full strides."""
    direction = traj.direction
    by_foot = {name: [e for e in events if e.foot == name] for name in LEG_NAMES}
    out = {}
    for name in LEG_NAMES:
        evs = by_foot[name]
        touchdowns = [e for e in evs if e.kind == TOUCHDOWN]
        if len(touchdowns) < 2:
            out[name] = FootMetrics([], [], [], [], reason="fewer than 2 strides")
            continue
        swing, stance, heights = [], [], []
        for a, b in zip(evs, evs[1:]):
            span = b.time - a.time
            if a.kind == LIFTOFF and b.kind == TOUCHDOWN:
                swing.append(span)
                heights.append(_peak_height(traj, name, a.time, b.time))
            elif a.kind == TOUCHDOWN and b.kind == LIFTOFF:
                stance.append(span)
        distances = []
        other = [e for e in by_foot[CONTRALATERAL[name]] if e.kind == TOUCHDOWN]
        for td in touchdowns:
            prev = [e for e in other if e.time <= td.time]
            if prev:
                d = (td.position[0] - prev[-1].position[0]) * direction
                distances.append(float(d))
        out[name] = FootMetrics(swing, stance, distances, heights)
    return out


def _peak_height(traj: Trajectory, foot: str, t0: float, t1: float) -> float:
    f = LEG_NAMES.index(foot)
    mask = (traj.times >= t0) & (traj.times <= t1)
    if not mask.any():
        return 0.0
    return float(traj.foot_pos[mask, f, 1].max())


METRIC_NAMES = ("swing_time", "stance_time", "step_distance", "step_height")
_FIELD = {"swing_time": "swing_times", "stance_time": "stance_times",
          "step_distance": "step_distances", "step_height": "step_heights"}


def gait_report(groups: dict) -> list:
    """groups: label -> list of Trajectory. Returns rows of
    (group, foot_pair, metric, min, q1, median, q3, max, mean, n)."""
    if not groups:
        raise ValueError("no trajectory groups given")
    rows = []
    for label in sorted(groups):
        samples = {("front", m): [] for m in METRIC_NAMES}
        samples.update({("hind", m): [] for m in METRIC_NAMES})
        for traj in groups[label]:
            events = detect_contacts(traj)
            metrics = gait_metrics(events, traj)
            for foot, fm in metrics.items():
                pair = FOOT_PAIR[foot]
                for m in METRIC_NAMES:
                    samples[(pair, m)].extend(getattr(fm, _FIELD[m]))
        for (pair, metric), vals in sorted(samples.items()):
            if not vals:
                continue
            v = np.asarray(vals)
            rows.append({
                "group": label, "foot_pair": pair, "metric": metric,
                "min": float(v.min()), "q1": float(np.quantile(v, 0.25)),
                "median": float(np.median(v)), "q3": float(np.quantile(v, 0.75)),
                "max": float(v.max()), "mean": float(v.mean()), "n": len(v)})
    return rows


def report_csv(rows: list) -> str:
    out = io.StringIO()
    out.write("group,foot_pair,metric,min,q1,median,q3,max,mean,n\n")
    for r in rows:
        out.write(f"{r['group']},{r['foot_pair']},{r['metric']},"
                  f"{r['min']:.6f},{r['q1']:.6f},{r['median']:.6f},"
                  f"{r['q3']:.6f},{r['max']:.6f},{r['mean']:.6f},{r['n']}\n")
    return out.getvalue()


def trajectory_from_rollout(states: list) -> Trajectory:
    """Build a Trajectory from a list of RobotState at the policy rate."""
    return Trajectory(
        times=np.array([s.t for s in states]),
        contacts=np.array([s.contacts for s in states]),
        foot_pos=np.array([s.foot_pos for s in states]),
        root_x=np.array([s.x for s in states]))
