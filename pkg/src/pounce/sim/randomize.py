"""Per-episode domain randomization: friction, root pushes, torque limit."""

from __future__ import annotations

import dataclasses

import numpy as np

FRICTION_RANGE = (0.4, 1.0)
PUSH_HORIZONTAL_RANGE = (0.0, 50.0)
PUSH_VERTICAL_RANGE = (0.0, 10.0)
TORQUE_LIMIT_RANGE = (15.0, 18.0)
EVAL_TORQUE_LIMIT = 15.0


@dataclasses.dataclass
class RandomizationSpec:
    friction: float = 0.8
    push_period: float = 1.0
    push_duration: float = 0.2
    push_fx: float = 0.0            # signed; magnitude within [0, 50] N
    push_fz: float = 0.0            # signed; magnitude within [0, 10] N
    torque_limit: float = EVAL_TORQUE_LIMIT
    cylinder_radii: np.ndarray = dataclasses.field(
        default_factory=lambda: np.empty(0))

    def validate(self):
        lo, hi = FRICTION_RANGE
        if not lo <= self.friction <= hi:
            raise ValueError(f"friction {self.friction} outside {FRICTION_RANGE}")
        if not abs(self.push_fx) <= PUSH_HORIZONTAL_RANGE[1]:
            raise ValueError("horizontal push magnitude above 50 N")
        if not abs(self.push_fz) <= PUSH_VERTICAL_RANGE[1]:
            raise ValueError("vertical push magnitude above 10 N")
        if not TORQUE_LIMIT_RANGE[0] <= self.torque_limit <= TORQUE_LIMIT_RANGE[1]:
            raise ValueError(f"torque limit {self.torque_limit} outside {TORQUE_LIMIT_RANGE}")
        if self.cylinder_radii.size and (
                self.cylinder_radii.min() < 0 or self.cylinder_radii.max() > 0.02):
            raise ValueError("cylinder radius outside [0, 0.02] m")
        return self


def sample_randomization(rng: np.random.Generator,
                         pushes: bool = True) -> RandomizationSpec:
    """Draw one episode's randomization; push signs are uniform."""
    spec = RandomizationSpec(
        friction=rng.uniform(*FRICTION_RANGE),
        push_fx=rng.uniform(*PUSH_HORIZONTAL_RANGE) * rng.choice([-1.0, 1.0]) if pushes else 0.0,
        push_fz=rng.uniform(*PUSH_VERTICAL_RANGE) * rng.choice([-1.0, 1.0]) if pushes else 0.0,
        torque_limit=rng.uniform(*TORQUE_LIMIT_RANGE),
    )
    return spec.validate()


def evaluation_randomization() -> RandomizationSpec:
    """Deployment-style settings: no pushes, fixed 15 Nm torque limit."""
    return RandomizationSpec(friction=0.8, push_fx=0.0, push_fz=0.0,
                             torque_limit=EVAL_TORQUE_LIMIT).validate()
