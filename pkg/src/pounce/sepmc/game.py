"""Chase-tag game world.

A 4.5 x 4.5 m arena with hurdle strips and a spanning pole. Two agents
alternate chaser/evader roles: the chaser wins on closing within 0.6 m;
the evader swaps roles by reaching 0.3 m from the active flag, which
then respawns uniformly in free space. Games cap at 1000 ticks as a
draw. The default locomotion backend is a unicycle proxy; commands are
(direction, speed) exactly as the strategic level emits them.
"""

from __future__ import annotations

import dataclasses

import numpy as np

ARENA = 4.5
CATCH_DISTANCE = 0.6
FLAG_DISTANCE = 0.3
MAX_TICKS = 1000
TICK_HZ = 10.0
PROXY_SUBSTEPS = 5            # proxy integrates at 50 Hz
SPEED_RANGE = (0.5, 3.0)
HEADING_RATE_LIMIT = 3.0      # rad/s
SPEED_TAU = 0.3               # first-order lag toward commanded speed
HURDLE_SPEED_CAP = 0.5        # fraction of commanded speed inside hurdle strips
POLE_SPEED_CAP = 0.7
WALL_MARGIN = 0.05
FLAG_RESPAWN_DELAY = 10       # ticks the flag stays inactive after a swap

CHASER, EVADER = "chaser", "evader"


@dataclasses.dataclass
class Obstacle:
    kind: str                  # "hurdle" | "pole"
    x0: float
    y0: float
    x1: float
    y1: float

    def contains(self, p: np.ndarray) -> bool:
        return (min(self.x0, self.x1) <= p[0] <= max(self.x0, self.x1)
                and min(self.y0, self.y1) <= p[1] <= max(self.y0, self.y1))


def default_obstacles() -> list:
    """Two hurdle strips and one spanning pole, echoing the play arena."""
    return [
        Obstacle("hurdle", 1.0, 1.2, 1.1, 3.3),
        Obstacle("hurdle", 3.4, 1.2, 3.5, 3.3),
        Obstacle("pole", 1.8, 2.2, 2.7, 2.3),
    ]


@dataclasses.dataclass
class AgentState:
    position: np.ndarray       # (2,)
    heading: float
    speed: float
    role: str
    angular_velocity: float = 0.0


@dataclasses.dataclass
class NavigationCommand:
    direction: np.ndarray      # unit 2-vector
    speed: float

    def validate(self):
        n = np.linalg.norm(self.direction)
        if abs(n - 1.0) > 1e-9:
            raise ValueError("command direction must be a unit vector")
        return self

    @classmethod
    def from_angle(cls, angle: float, speed: float) -> "NavigationCommand":
        return cls(direction=np.array([np.cos(angle), np.sin(angle)]),
                   speed=float(speed))


@dataclasses.dataclass
class GameState:
    tick: int
    agents: list               # [AgentState, AgentState]
    flag: np.ndarray
    flag_active: bool
    flag_respawn_in: int
    obstacles: list
    result: str | None = None  # None | "agent0" | "agent1" | "draw"

    @property
    def chaser_index(self) -> int:
        return 0 if self.agents[0].role == CHASER else 1

    def agent_distance(self) -> float:
        return float(np.linalg.norm(self.agents[0].position - self.agents[1].position))


def _free_position(rng: np.random.Generator, obstacles, others=(),
                   clearance: float = 0.4) -> np.ndarray:
    for _ in range(1000):
        p = rng.uniform(WALL_MARGIN, ARENA - WALL_MARGIN, size=2)
        if any(o.contains(p) for o in obstacles):
            continue
        if any(np.linalg.norm(p - q) < clearance for q in others):
            continue
        return p
    raise RuntimeError("could not sample a free arena position")


def new_game(rng: np.random.Generator, obstacles=None) -> GameState:
    obstacles = default_obstacles() if obstacles is None else obstacles
    p0 = _free_position(rng, obstacles)
    p1 = _free_position(rng, obstacles, others=[p0], clearance=CATCH_DISTANCE + 0.4)
    flag = _free_position(rng, obstacles, others=[p0, p1])
    roles = [CHASER, EVADER] if rng.random() < 0.5 else [EVADER, CHASER]
    agents = [AgentState(position=p0, heading=float(rng.uniform(-np.pi, np.pi)),
                         speed=0.0, role=roles[0]),
              AgentState(position=p1, heading=float(rng.uniform(-np.pi, np.pi)),
                         speed=0.0, role=roles[1])]
    return GameState(tick=0, agents=agents, flag=flag, flag_active=True,
                     flag_respawn_in=0, obstacles=obstacles)


def _speed_cap_fraction(p: np.ndarray, obstacles) -> float:
    frac = 1.0
    for o in obstacles:
        if o.contains(p):
            frac = min(frac, HURDLE_SPEED_CAP if o.kind == "hurdle" else POLE_SPEED_CAP)
    return frac


def _advance_agent(agent: AgentState, cmd: NavigationCommand, obstacles):
    """Unicycle proxy: rate-limited heading, first-order speed lag,
    obstacle strips cap speed, walls clamp position."""
    dt = 1.0 / (TICK_HZ * PROXY_SUBSTEPS)
    target_heading = float(np.arctan2(cmd.direction[1], cmd.direction[0]))
    w_total = 0.0
    for _ in range(PROXY_SUBSTEPS):
        err = np.arctan2(np.sin(target_heading - agent.heading),
                         np.cos(target_heading - agent.heading))
        w = np.clip(err / dt, -HEADING_RATE_LIMIT, HEADING_RATE_LIMIT)
        agent.heading = float((agent.heading + w * dt + np.pi) % (2 * np.pi) - np.pi)
        w_total += w
        target_speed = cmd.speed * _speed_cap_fraction(agent.position, obstacles)
        agent.speed += (target_speed - agent.speed) * (dt / SPEED_TAU)
        step = agent.speed * dt * np.array([np.cos(agent.heading),
                                            np.sin(agent.heading)])
        agent.position = np.clip(agent.position + step,
                                 WALL_MARGIN, ARENA - WALL_MARGIN)
    agent.angular_velocity = float(w_total / PROXY_SUBSTEPS)


def step_game(state: GameState, commands, rng: np.random.Generator):
    """Advance one strategic tick. Returns (state, events); mutates state.

    commands: per-agent NavigationCommand; speeds outside [0.5, 3.0]
    clamp with a warning event.
    """
    if state.result is not None:
        raise ValueError("step_game called on a terminal state")
    events = []
    for i, cmd in enumerate(commands):
        sp = float(np.clip(cmd.speed, *SPEED_RANGE))
        if sp != cmd.speed:
            events.append({"type": "speed_clamped", "agent": i, "requested": cmd.speed})
            cmd = NavigationCommand(direction=cmd.direction, speed=sp)
        _advance_agent(state.agents[i], cmd, state.obstacles)
    state.tick += 1
    if not state.flag_active:
        state.flag_respawn_in -= 1
        if state.flag_respawn_in <= 0:
            state.flag = _free_position(rng, state.obstacles,
                                        others=[a.position for a in state.agents])
            state.flag_active = True
            events.append({"type": "flag_respawn", "position": state.flag.copy()})

    if state.agent_distance() < CATCH_DISTANCE:
        winner = state.chaser_index
        state.result = f"agent{winner}"
        events.append({"type": "catch", "winner": winner})
        return state, events

    evader = 1 - state.chaser_index
    if state.flag_active and \
            np.linalg.norm(state.agents[evader].position - state.flag) < FLAG_DISTANCE:
        for a in state.agents:
            a.role = CHASER if a.role == EVADER else EVADER
        state.flag_active = False
        state.flag_respawn_in = FLAG_RESPAWN_DELAY
        events.append({"type": "role_swap", "new_chaser": evader})

    if state.tick >= MAX_TICKS and state.result is None:
        state.result = "draw"
        events.append({"type": "draw"})
    return state, events


def game_reward(state: GameState, agent_index: int) -> float:
    """Zero-sum terminal reward: +1 winner, -1 loser, 0 each on a draw."""
    if state.result is None:
        raise ValueError("game_reward on a non-terminal state")
    if state.result == "draw":
        return 0.0
    return 1.0 if state.result == f"agent{agent_index}" else -1.0


TASK_OBS_DIM = 23


def task_observation(state: GameState, agent_index: int) -> np.ndarray:
    """23 features: role bit (1) + flag info (7) + opponent info (15)."""
    me = state.agents[agent_index]
    op = state.agents[1 - agent_index]
    out = np.empty(TASK_OBS_DIM)
    out[0] = 1.0 if me.role == CHASER else 0.0

    rel_f = state.flag - me.position
    dist_f = np.linalg.norm(rel_f)
    bearing_f = np.arctan2(rel_f[1], rel_f[0]) - me.heading
    out[1:3] = rel_f
    out[3] = dist_f
    out[4] = np.sin(bearing_f)
    out[5] = np.cos(bearing_f)
    out[6] = 1.0 if state.flag_active else 0.0
    out[7] = state.flag_respawn_in / FLAG_RESPAWN_DELAY

    vel = op.speed * np.array([np.cos(op.heading), np.sin(op.heading)])
    rel_o = op.position - me.position
    dist_o = np.linalg.norm(rel_o)
    bearing_o = np.arctan2(rel_o[1], rel_o[0]) - me.heading
    out[8:10] = op.position
    out[10] = np.sin(op.heading)
    out[11] = np.cos(op.heading)
    out[12:14] = vel
    out[14] = op.angular_velocity
    out[15:17] = rel_o
    out[17] = dist_o
    out[18] = np.sin(bearing_o)
    out[19] = np.cos(bearing_o)
    out[20] = 1.0 if op.role == CHASER else 0.0
    out[21:23] = 0.0           # padding to the fixed 15-wide opponent block
    return out
