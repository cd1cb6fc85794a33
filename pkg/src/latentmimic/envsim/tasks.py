"""Task registry: initial-condition sampling, success predicates, and
expert waypoint plans for the eight manipulation tasks.

Expert plans are pure functions of the current state (phase is inferred
from object/gripper configuration), so the scripted policy needs no
memory and stays deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .arms import ArmSpec, forward_kinematics
from .world import (
    BLOCK,
    BUTTON,
    CUBE,
    GRIP_CLOSE,
    GRIP_HOLD,
    GRIP_OPEN,
    LID,
    Obj,
    WorldState,
    rest_y,
)

REACH_TOL = 0.05
ZONE_TOL = 0.07
LIFT_Y = 0.4
EDGE_X = 0.58

Plan = tuple[np.ndarray, str]


@dataclass(frozen=True)
class TaskSpec:
    name: str
    make_objects: Callable[[np.random.Generator], list[Obj]]
    success: Callable[[WorldState, ArmSpec], bool]
    expert_plan: Callable[[ArmSpec, WorldState], Plan]
    max_expert_steps: int = 90


def _side(rng) -> float:
    return 1.0 if rng.random() < 0.5 else -1.0


def _ee(arm: ArmSpec, state: WorldState) -> np.ndarray:
    return forward_kinematics(arm, state.joint_angles)


# -- reach_point -------------------------------------------------------------


def _reach_objects(rng) -> list[Obj]:
    s = _side(rng)
    pos = np.array([s * rng.uniform(0.2, 0.5), rng.uniform(0.25, 0.45)])
    return [Obj("target", BUTTON, pos)]


def _reach_success(state, arm) -> bool:
    return float(np.linalg.norm(_ee(arm, state) - state.obj("target").position)) < REACH_TOL


def _reach_plan(arm, state) -> Plan:
    return state.obj("target").position.copy(), GRIP_HOLD


# -- press_button ------------------------------------------------------------


def _press_objects(rng) -> list[Obj]:
    s = _side(rng)
    pos = np.array([s * rng.uniform(0.2, 0.5), rng.uniform(0.12, 0.4)])
    return [Obj("button", BUTTON, pos)]


def _press_success(state, arm) -> bool:
    return state.obj("button").pressed


def _press_plan(arm, state) -> Plan:
    return state.obj("button").position.copy(), GRIP_CLOSE


# -- grasp helpers -----------------------------------------------------------


def _grasp_plan(arm, state, obj) -> Plan:
    """Approach above, descend, close."""
    ee = _ee(arm, state)
    if abs(ee[0] - obj.position[0]) > 0.03 and ee[1] > obj.position[1] + 0.12:
        return np.array([obj.position[0], 0.22]), GRIP_HOLD
    if abs(ee[0] - obj.position[0]) > 0.03:
        return np.array([obj.position[0], 0.22]), GRIP_HOLD
    if float(np.linalg.norm(ee - obj.position)) > 0.055:
        return obj.position.copy(), GRIP_HOLD
    return obj.position.copy(), GRIP_CLOSE


# -- lift_cube / lift_lid ----------------------------------------------------


def _lift_objects(kind):
    def make(rng) -> list[Obj]:
        s = _side(rng)
        pos = np.array([s * rng.uniform(0.2, 0.5), rest_y(kind)])
        return [Obj(kind, kind, pos)]

    return make


def _lift_success(kind):
    def success(state, arm) -> bool:
        o = state.obj(kind)
        return o.held and o.position[1] > LIFT_Y

    return success


def _lift_plan(kind):
    def plan(arm, state) -> Plan:
        o = state.obj(kind)
        if not o.held:
            return _grasp_plan(arm, state, o)
        x = float(np.clip(o.position[0], -0.45, 0.45))
        return np.array([x, 0.48]), GRIP_HOLD

    return plan


# -- pick_and_place ----------------------------------------------------------


def _pick_place_objects(rng) -> list[Obj]:
    s = _side(rng)
    cube = np.array([s * rng.uniform(0.2, 0.5), rest_y(CUBE)])
    zone = np.array([-s * rng.uniform(0.2, 0.5), rest_y(BUTTON)])
    return [Obj("cube", CUBE, cube), Obj("zone", BUTTON, zone)]


def _pick_place_success(state, arm) -> bool:
    cube = state.obj("cube")
    zone = state.obj("zone")
    return (not cube.held) and abs(cube.position[0] - zone.position[0]) <= ZONE_TOL and cube.position[
        1
    ] <= rest_y(CUBE) + 0.02


def _pick_place_plan(arm, state) -> Plan:
    cube = state.obj("cube")
    zone = state.obj("zone")
    ee = _ee(arm, state)
    if cube.held:
        if abs(ee[0] - zone.position[0]) > 0.03:
            return np.array([zone.position[0], 0.3]), GRIP_HOLD
        return np.array([zone.position[0], 0.3]), GRIP_OPEN
    if abs(cube.position[0] - zone.position[0]) <= ZONE_TOL:
        return ee, GRIP_HOLD
    return _grasp_plan(arm, state, cube)


# -- pushing tasks -----------------------------------------------------------


def _push_plan(arm, state, block, goal_x: float) -> Plan:
    ee = _ee(arm, state)
    s = 1.0 if goal_x >= block.position[0] else -1.0
    behind_x = block.position[0] - s * 0.13
    at_height = abs(ee[1] - block.position[1]) < 0.05
    behind = (ee[0] - block.position[0]) * s < -0.06
    if at_height and behind:
        return np.array([goal_x - s * 0.05, block.position[1]]), GRIP_HOLD
    if abs(ee[0] - behind_x) > 0.04:
        return np.array([behind_x, 0.26]), GRIP_HOLD
    return np.array([behind_x, block.position[1]]), GRIP_HOLD


def _slide_objects(rng) -> list[Obj]:
    # outward push on one side: keeps the end effector away from the base,
    # which the 2-link embodiment cannot fold close to
    s = _side(rng)
    bx = s * rng.uniform(0.25, 0.34)
    gx = bx + s * rng.uniform(0.2, 0.26)
    return [
        Obj("block", BLOCK, np.array([bx, rest_y(BLOCK)])),
        Obj("goal", BUTTON, np.array([gx, rest_y(BUTTON)])),
    ]


def _slide_success(state, arm) -> bool:
    return abs(state.obj("block").position[0] - state.obj("goal").position[0]) <= ZONE_TOL


def _slide_plan(arm, state) -> Plan:
    return _push_plan(arm, state, state.obj("block"), float(state.obj("goal").position[0]))


def _edge_objects(rng) -> list[Obj]:
    s = _side(rng)
    bx = s * rng.uniform(0.28, 0.42)
    return [Obj("block", BLOCK, np.array([bx, rest_y(BLOCK)]))]


def _edge_success(state, arm) -> bool:
    return abs(state.obj("block").position[0]) >= EDGE_X


def _edge_plan(arm, state) -> Plan:
    block = state.obj("block")
    s = 1.0 if block.position[0] >= 0 else -1.0
    return _push_plan(arm, state, block, s * 0.66)


# -- reach_then_press (two-phase) ---------------------------------------------


def _two_phase_objects(rng) -> list[Obj]:
    s = _side(rng)
    first = np.array([s * rng.uniform(0.25, 0.45), rng.uniform(0.3, 0.45)])
    second = np.array([-s * rng.uniform(0.25, 0.45), rng.uniform(0.15, 0.3)])
    return [Obj("first", BUTTON, first), Obj("second", BUTTON, second)]


def _two_phase_success(state, arm) -> bool:
    return state.obj("first").pressed and state.obj("second").pressed


def _two_phase_plan(arm, state) -> Plan:
    first = state.obj("first")
    second = state.obj("second")
    if not first.pressed:
        return first.position.copy(), GRIP_CLOSE
    if not second.pressed:
        return second.position.copy(), GRIP_CLOSE
    return _ee(arm, state), GRIP_HOLD


TASKS: dict[str, TaskSpec] = {
    t.name: t
    for t in [
        TaskSpec("reach_point", _reach_objects, _reach_success, _reach_plan, 70),
        TaskSpec("press_button", _press_objects, _press_success, _press_plan, 70),
        TaskSpec("lift_cube", _lift_objects(CUBE), _lift_success(CUBE), _lift_plan(CUBE), 90),
        TaskSpec("lift_lid", _lift_objects(LID), _lift_success(LID), _lift_plan(LID), 90),
        TaskSpec("slide_block", _slide_objects, _slide_success, _slide_plan, 110),
        TaskSpec("pick_and_place", _pick_place_objects, _pick_place_success, _pick_place_plan, 110),
        TaskSpec("reach_then_press", _two_phase_objects, _two_phase_success, _two_phase_plan, 110),
        TaskSpec("push_to_edge", _edge_objects, _edge_success, _edge_plan, 110),
    ]
}

DEFAULT_SUITES = {
    "grounding": ["reach_point", "press_button", "pick_and_place"],
    "bridging": ["lift_cube", "lift_lid", "slide_block"],
    "zeroshot": ["reach_then_press", "push_to_edge"],
}


def task_success(task: str, state: WorldState, arm: ArmSpec) -> bool:
    if task not in TASKS:
        raise KeyError(f"unknown task {task!r}")
    return TASKS[task].success(state, arm)
