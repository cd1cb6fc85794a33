"""Scripted waypoint-following experts and demonstration rollouts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arms import ArmSpec, forward_kinematics, inverse_kinematics
from .env import PlanarEnv
from .tasks import TASKS
from .world import Action, WorldParams, WorldState


EE_STEP = 0.05  # interpolation length toward the phase waypoint


def scripted_policy(task: str, arm: ArmSpec, state: WorldState) -> Action:
    """IK step toward the task's phase waypoint, clipped to joint speed.

    The IK target is interpolated a short distance toward the waypoint so
    consecutive solutions stay on one branch and the end effector tracks a
    straight line.
    """
    waypoint, grip = TASKS[task].expert_plan(arm, state)
    ee = forward_kinematics(arm, state.joint_angles)
    to_wp = waypoint - ee
    dist = float(np.linalg.norm(to_wp))
    near = waypoint if dist <= EE_STEP else ee + to_wp * (EE_STEP / dist)
    q_target = inverse_kinematics(arm, near, state.joint_angles)
    delta = np.clip(q_target - state.joint_angles, -arm.max_joint_speed, arm.max_joint_speed)
    return Action(delta, grip)


@dataclass
class ExpertRun:
    """Raw expert rollout: frames plus the joint/gripper trajectory needed
    for retargeted replay on another embodiment."""

    task: str
    arm: ArmSpec
    seed: int
    images: np.ndarray  # (F, H, W) float64
    proprio: np.ndarray  # (F, P)
    joints: np.ndarray  # (F, n_joints)
    actions: list[Action]  # length F - 1
    success: bool


def run_expert(
    task: str,
    arm: ArmSpec,
    seed: int,
    params: WorldParams = WorldParams(),
    hold_frames: int = 4,
) -> ExpertRun:
    env = PlanarEnv(task, arm, seed, params)
    images = [env.image()]
    prop = [env.proprio()]
    joints = [env.state.joint_angles.copy()]
    actions: list[Action] = []
    success = False
    for _ in range(TASKS[task].max_expert_steps):
        act = scripted_policy(task, arm, env.state)
        env.step(act)
        actions.append(act)
        images.append(env.image())
        prop.append(env.proprio())
        joints.append(env.state.joint_angles.copy())
        if env.success():
            success = True
            break
    if success:
        for _ in range(hold_frames):
            act = Action(np.zeros(arm.n_joints), "hold")
            env.step(act)
            actions.append(act)
            images.append(env.image())
            prop.append(env.proprio())
            joints.append(env.state.joint_angles.copy())
    return ExpertRun(
        task=task,
        arm=arm,
        seed=seed,
        images=np.stack(images),
        proprio=np.stack(prop),
        joints=np.stack(joints),
        actions=actions,
        success=success,
    )
