"""World state and the deterministic step function.

Contact is predicate-level: a close command within grasp radius grasps,
an open command releases (the object drops straight to the table), blocks
are displaced by end-effector proximity, and buttons latch pressed on
contact with a closed gripper.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .arms import ArmSpec, forward_kinematics, home_joints

CUBE = "cube"
BUTTON = "button"
LID = "lid"
BLOCK = "block"

GRASPABLE = {CUBE, LID}
PUSHABLE = {BLOCK}

# rendered half-sizes (world units) and resting heights per kind
OBJ_HALF = {CUBE: (0.05, 0.05), LID: (0.08, 0.035), BLOCK: (0.055, 0.055), BUTTON: (0.05, 0.05)}


def rest_y(kind: str) -> float:
    return OBJ_HALF[kind][1]


GRIP_OPEN = "open"
GRIP_CLOSE = "close"
GRIP_HOLD = "hold"
GRIP_COMMANDS = (GRIP_OPEN, GRIP_HOLD, GRIP_CLOSE)


@dataclass
class Obj:
    id: str
    kind: str
    position: np.ndarray
    held: bool = False
    pressed: bool = False

    def copy(self) -> "Obj":
        return Obj(self.id, self.kind, self.position.copy(), self.held, self.pressed)


@dataclass
class WorldState:
    joint_angles: np.ndarray
    gripper_open: bool
    objects: list[Obj]
    step_count: int = 0

    def copy(self) -> "WorldState":
        return WorldState(
            self.joint_angles.copy(),
            self.gripper_open,
            [o.copy() for o in self.objects],
            self.step_count,
        )

    def obj(self, obj_id: str) -> Obj:
        for o in self.objects:
            if o.id == obj_id:
                return o
        raise KeyError(obj_id)

    def held_obj(self) -> Obj | None:
        for o in self.objects:
            if o.held:
                return o
        return None


@dataclass
class Action:
    joint_deltas: np.ndarray
    gripper: str = GRIP_HOLD

    def __post_init__(self):
        if self.gripper not in GRIP_COMMANDS:
            raise ValueError(f"unknown gripper command {self.gripper!r}")


@dataclass(frozen=True)
class WorldParams:
    grasp_radius: float = 0.08
    press_radius: float = 0.08
    push_radius: float = 0.075
    retarget_tol: float = 0.02


def initial_state(arm: ArmSpec, objects: list[Obj]) -> WorldState:
    return WorldState(home_joints(arm), True, [o.copy() for o in objects], 0)


def end_effector(arm: ArmSpec, state: WorldState) -> np.ndarray:
    return forward_kinematics(arm, state.joint_angles)


def step(state: WorldState, arm: ArmSpec, action: Action, params: WorldParams = WorldParams()) -> WorldState:
    """Advance one tick. Total and deterministic: never raises on inputs
    within type contracts; out-of-bound deltas are clipped."""
    nxt = state.copy()
    deltas = np.clip(np.asarray(action.joint_deltas, dtype=np.float64), -arm.max_joint_speed, arm.max_joint_speed)
    if deltas.shape != (arm.n_joints,):
        raise ValueError(f"action has {deltas.shape} deltas for a {arm.n_joints}-joint arm")
    nxt.joint_angles = np.clip(nxt.joint_angles + deltas, arm.limits_lo, arm.limits_hi)
    ee = forward_kinematics(arm, nxt.joint_angles)

    if action.gripper == GRIP_OPEN:
        nxt.gripper_open = True
    elif action.gripper == GRIP_CLOSE:
        nxt.gripper_open = False

    held = nxt.held_obj()
    if held is not None:
        if action.gripper == GRIP_OPEN:
            held.held = False
            held.position = np.array([held.position[0], rest_y(held.kind)])
        else:
            held.position = ee.copy()

    if action.gripper == GRIP_CLOSE and nxt.held_obj() is None and arm.gripper:
        best = None
        best_d = params.grasp_radius
        for o in nxt.objects:
            if o.kind in GRASPABLE:
                d = float(np.linalg.norm(o.position - ee))
                if d <= best_d:
                    best, best_d = o, d
        if best is not None:
            best.held = True
            best.position = ee.copy()

    for o in nxt.objects:
        if o.kind in PUSHABLE and not o.held:
            diff = o.position - ee
            d = float(np.linalg.norm(diff))
            if d < params.push_radius:
                dy = diff[1]
                reach_x = np.sqrt(max(params.push_radius**2 - dy * dy, 0.0))
                sign = np.sign(diff[0])
                if sign != 0.0 and reach_x > 0.0:
                    o.position = np.array([ee[0] + sign * reach_x, o.position[1]])

    if not nxt.gripper_open:
        for o in nxt.objects:
            if o.kind == BUTTON and not o.pressed:
                if float(np.linalg.norm(o.position - ee)) <= params.press_radius:
                    o.pressed = True

    nxt.step_count = state.step_count + 1
    return nxt


def proprio(arm: ArmSpec, state: WorldState) -> np.ndarray:
    """Flat proprioceptive vector: angles, sines, cosines, gripper bit."""
    q = state.joint_angles
    return np.concatenate([q, np.sin(q), np.cos(q), [1.0 if state.gripper_open else 0.0]])


def proprio_dim(arm: ArmSpec) -> int:
    return 3 * arm.n_joints + 1


GRIP_TO_FLOAT = {GRIP_CLOSE: -1.0, GRIP_HOLD: 0.0, GRIP_OPEN: 1.0}


def action_to_vec(action: Action) -> np.ndarray:
    return np.concatenate([action.joint_deltas, [GRIP_TO_FLOAT[action.gripper]]])


def vec_to_action(vec: np.ndarray, arm: ArmSpec) -> Action:
    vec = np.asarray(vec, dtype=np.float64)
    deltas = np.clip(vec[: arm.n_joints], -arm.max_joint_speed, arm.max_joint_speed)
    g = vec[arm.n_joints]
    grip = GRIP_CLOSE if g <= -0.5 else GRIP_OPEN if g >= 0.5 else GRIP_HOLD
    return Action(deltas, grip)


def action_dim(arm: ArmSpec) -> int:
    return arm.n_joints + 1


def gripper_onehot(g: float) -> np.ndarray:
    """[close, hold, open] indicator from the scalar gripper channel."""
    if g <= -0.5:
        return np.array([1.0, 0.0, 0.0])
    if g >= 0.5:
        return np.array([0.0, 0.0, 1.0])
    return np.array([0.0, 1.0, 0.0])
