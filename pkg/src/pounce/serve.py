"""Real-time chase-tag session host.

One asyncio game loop owns the authoritative GameState and ticks at
10 Hz; connection handlers only mutate the human command latch and the
reset flag. The policy side runs a trained strategic checkpoint (or a
scripted chaser fallback for tests) with its speed pinned to 0.5 m/s by
default, matching the evaluation setting.

Human side is agent 0; policy side is agent 1. WebSocket endpoint is
/play; anything else serves the static UI bundle.
"""

from __future__ import annotations

import asyncio
import json
import pathlib
import time

import numpy as np

from .sepmc.game import (ARENA, CATCH_DISTANCE, FLAG_DISTANCE, MAX_TICKS,
                         NavigationCommand, new_game, step_game)
from .sepmc.policy import StrategicPolicy, action_to_command
from .sepmc.train import observe, stack_obs

TICK_HZ = 10.0
RESULT_NAMES = {"agent0": "human", "agent1": "policy", "draw": "draw"}


def hello_message() -> dict:
    return {"type": "hello",
            "arena": {"w": ARENA, "h": ARENA},
            "rules": {"catch": CATCH_DISTANCE, "flag": FLAG_DISTANCE,
                      "max_ticks": MAX_TICKS}}


def state_message(state) -> dict:
    return {
        "type": "state",
        "tick": state.tick,
        "agents": [
            {"id": "human" if i == 0 else "policy",
             "x": float(a.position[0]), "y": float(a.position[1]),
             "heading": float(a.heading), "speed": float(a.speed),
             "role": a.role}
            for i, a in enumerate(state.agents)],
        "flag": {"x": float(state.flag[0]), "y": float(state.flag[1]),
                 "active": bool(state.flag_active)},
        "obstacles": [
            {"kind": o.kind, "x0": o.x0, "y0": o.y0, "x1": o.x1, "y1": o.y1}
            for o in state.obstacles],
        "result": RESULT_NAMES.get(state.result) if state.result else None,
    }


def error_message(reason: str) -> dict:
    return {"type": "error", "reason": reason}


class ScriptedChaser:
    """Fallback policy: drive straight at the opponent (or the flag when
    evading); used when no checkpoint is given and in tests."""

    stationary = False

    def command(self, state, agent_index: int, pinned_speed: float):
        me = state.agents[agent_index]
        if self.stationary:
            return NavigationCommand.from_angle(me.heading, 0.5)
        target = state.agents[1 - agent_index].position if me.role == "chaser" \
            else state.flag
        d = target - me.position
        return NavigationCommand.from_angle(float(np.arctan2(d[1], d[0])),
                                            pinned_speed)


class PolicyDriver:
    def __init__(self, arrays: dict, pinned_speed: float | None):
        self.policy = StrategicPolicy(np.random.default_rng(0))
        self.policy.load_arrays(arrays)
        self.h, self.c = self.policy.initial_state(1)
        self.pinned = pinned_speed
        self.rng = np.random.default_rng(0)

    def reset(self):
        self.h, self.c = self.policy.initial_state(1)

    def command(self, state, agent_index: int, pinned_speed: float):
        obs = stack_obs([observe(state, agent_index)])
        act, _, _, (self.h, self.c) = self.policy.act(
            obs, self.h, self.c, self.rng, deterministic=True)
        return action_to_command(act[0], state.agents[agent_index].heading,
                                 self.pinned)


class GameSession:
    """Authoritative session logic, transport-free for testability."""

    def __init__(self, policy_driver=None, seed: int = 0,
                 pinned_speed: float = 0.5):
        self.rng = np.random.default_rng(seed)
        self.policy_driver = policy_driver or ScriptedChaser()
        self.pinned_speed = pinned_speed
        self.state = new_game(self.rng)
        # command latch: last received wins, held between messages
        self.human_heading = 0.0
        self.human_speed = 0.5
        self.human_joined = False
        self.awaiting_reset = False

    def handle_message(self, msg: dict):
        """Returns a reply dict or None. Malformed input yields an error
        reply and leaves the session untouched."""
        if not isinstance(msg, dict) or "type" not in msg:
            return error_message("message must be an object with a type")
        kind = msg["type"]
        if kind == "join":
            side = msg.get("side")
            if side == "human":
                if self.human_joined:
                    return error_message("human seat already taken")
                self.human_joined = True
                return hello_message()
            if side == "spectate":
                return hello_message()
            return error_message("side must be 'human' or 'spectate'")
        if kind == "command":
            try:
                self.human_heading = float(msg["dir"])
                self.human_speed = float(msg["speed"])
            except (KeyError, TypeError, ValueError):
                return error_message("command needs numeric dir and speed")
            return None
        if kind == "reset":
            self.reset()
            return None
        return error_message(f"unknown message type {kind!r}")

    def reset(self):
        self.state = new_game(self.rng)
        self.awaiting_reset = False
        if hasattr(self.policy_driver, "reset"):
            self.policy_driver.reset()

    def release_seat(self):
        self.human_joined = False

    def tick(self):
        """Advance one game tick; on terminal, hold until reset."""
        if self.state.result is not None:
            self.awaiting_reset = True
            return state_message(self.state)
        human_cmd = NavigationCommand.from_angle(self.human_heading,
                                                 self.human_speed)
        policy_cmd = self.policy_driver.command(self.state, 1, self.pinned_speed)
        step_game(self.state, [human_cmd, policy_cmd], self.rng)
        return state_message(self.state)


async def serve(ckpt_arrays: dict | None, port: int, static_dir=None,
                pinned_speed: float = 0.5, seed: int = 0,
                ready_event: asyncio.Event | None = None,
                stop_event: asyncio.Event | None = None):
    """Run the session host until stop_event (or forever)."""
    import websockets

    driver = PolicyDriver(ckpt_arrays, pinned_speed) if ckpt_arrays else None
    session = GameSession(policy_driver=driver, seed=seed,
                          pinned_speed=pinned_speed)
    connections = set()
    human_conn = [None]

    async def handler(conn):
        connections.add(conn)
        is_human = False
        try:
            async for raw in conn:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await conn.send(json.dumps(error_message("invalid JSON")))
                    continue
                if msg.get("type") == "join" and msg.get("side") == "human" \
                        and human_conn[0] is not None:
                    await conn.send(json.dumps(error_message("human seat already taken")))
                    continue
                reply = session.handle_message(msg)
                if msg.get("type") == "join" and msg.get("side") == "human" \
                        and reply and reply.get("type") == "hello":
                    human_conn[0] = conn
                    is_human = True
                if reply is not None:
                    await conn.send(json.dumps(reply))
        finally:
            connections.discard(conn)
            if is_human:
                human_conn[0] = None
                session.release_seat()

    def process_request(conn, request):
        from websockets.datastructures import Headers
        from websockets.http11 import Response

        path = request.path.split("?")[0]
        if path == "/play":
            return None
        rel = "index.html" if path == "/" else path.lstrip("/")
        if static_dir is not None:
            full = (pathlib.Path(static_dir) / rel).resolve()
            if full.is_file() and full.is_relative_to(
                    pathlib.Path(static_dir).resolve()):
                ctype = {".html": "text/html", ".js": "text/javascript",
                         ".css": "text/css", ".map": "application/json",
                         ".svg": "image/svg+xml"}.get(
                             full.suffix, "application/octet-stream")
                body = full.read_bytes()
                return Response(200, "OK", Headers({
                    "Content-Type": ctype,
                    "Content-Length": str(len(body))}.items()), body)
        return conn.respond(404, "not found\n")

    async def loop():
        period = 1.0 / TICK_HZ
        next_tick = time.monotonic()
        while stop_event is None or not stop_event.is_set():
            msg = session.tick()
            payload = json.dumps(msg)
            dead = []
            for conn in list(connections):
                try:
                    await conn.send(payload)
                except Exception:
                    dead.append(conn)
            for conn in dead:
                connections.discard(conn)
            next_tick += period
            delay = next_tick - time.monotonic()
            if delay < -1.0:
                next_tick = time.monotonic()
                delay = 0.0
            await asyncio.sleep(max(delay, 0.0))

    async with websockets.serve(handler, "127.0.0.1", port,
                                process_request=process_request):
        if ready_event is not None:
            ready_event.set()
        await loop()
