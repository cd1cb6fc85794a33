"""Planar arm kinematics for the two heterogeneous embodiments.

The source arm has three short links, the target two longer ones, with
different joint speed limits: same reach, genuinely different kinematics
and action dimensionality. The 2-link arm gets analytic inverse
kinematics with elbow-branch selection; longer chains use damped least
squares from a seed configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class OutOfReachError(ValueError):
    pass


@dataclass(frozen=True)
class ArmSpec:
    name: str
    link_lengths: tuple[float, ...]
    joint_limits: tuple[tuple[float, float], ...]
    max_joint_speed: float
    gripper: bool = True
    # rendering cues: the two embodiments must look different on screen
    link_gray: float = 0.9
    link_width_px: float = 2.0

    def __post_init__(self):
        if any(l <= 0 for l in self.link_lengths):
            raise ValueError("link lengths must be positive")
        if any(lo >= hi for lo, hi in self.joint_limits):
            raise ValueError("joint limits must satisfy lo < hi")
        if len(self.joint_limits) != len(self.link_lengths):
            raise ValueError("one limit pair per joint required")

    @property
    def n_joints(self) -> int:
        return len(self.link_lengths)

    @property
    def reach(self) -> float:
        return float(sum(self.link_lengths))

    @property
    def limits_lo(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.joint_limits])

    @property
    def limits_hi(self) -> np.ndarray:
        return np.array([hi for _, hi in self.joint_limits])


SOURCE_ARM = ArmSpec(
    name="source3",
    link_lengths=(0.28, 0.25, 0.22),
    joint_limits=((-3.05, 3.05), (-3.05, 3.05), (-3.05, 3.05)),
    max_joint_speed=0.07,
    link_gray=0.42,
    link_width_px=1.3,
)

TARGET_ARM = ArmSpec(
    name="target2",
    link_lengths=(0.40, 0.35),
    joint_limits=((-3.05, 3.05), (-3.0, 3.0)),
    max_joint_speed=0.22,
    link_gray=0.95,
    link_width_px=2.4,
)

ARMS = {a.name: a for a in (SOURCE_ARM, TARGET_ARM)}

IK_TOL = 1e-6
IK_MARGIN = 0.02


def forward_kinematics(arm: ArmSpec, joints) -> np.ndarray:
    joints = np.asarray(joints, dtype=np.float64)
    if joints.shape != (arm.n_joints,):
        raise ValueError(f"expected {arm.n_joints} joint angles, got shape {joints.shape}")
    phi = np.cumsum(joints)
    l = np.asarray(arm.link_lengths)
    return np.array([np.sum(l * np.cos(phi)), np.sum(l * np.sin(phi))])


def joint_positions(arm: ArmSpec, joints) -> np.ndarray:
    """(n_joints + 1, 2) chain of joint coordinates, base first."""
    joints = np.asarray(joints, dtype=np.float64)
    phi = np.cumsum(joints)
    l = np.asarray(arm.link_lengths)
    xs = np.concatenate([[0.0], np.cumsum(l * np.cos(phi))])
    ys = np.concatenate([[0.0], np.cumsum(l * np.sin(phi))])
    return np.stack([xs, ys], axis=1)


def jacobian(arm: ArmSpec, joints) -> np.ndarray:
    joints = np.asarray(joints, dtype=np.float64)
    phi = np.cumsum(joints)
    l = np.asarray(arm.link_lengths)
    n = arm.n_joints
    jac = np.zeros((2, n))
    for i in range(n):
        jac[0, i] = -np.sum(l[i:] * np.sin(phi[i:]))
        jac[1, i] = np.sum(l[i:] * np.cos(phi[i:]))
    return jac


def _clamp(arm: ArmSpec, joints: np.ndarray) -> np.ndarray:
    return np.clip(joints, arm.limits_lo, arm.limits_hi)


def _wrap(angle: float) -> float:
    return (angle + np.pi) % (2 * np.pi) - np.pi


def _ik_two_link(arm: ArmSpec, target: np.ndarray, seed: np.ndarray) -> np.ndarray | None:
    l1, l2 = arm.link_lengths
    x, y = target
    r2 = x * x + y * y
    c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if c2 < -1.0 or c2 > 1.0:
        return None
    c2 = np.clip(c2, -1.0, 1.0)
    base = np.arctan2(y, x)
    candidates = []
    for s in (+1.0, -1.0):
        th2 = s * np.arccos(c2)
        th1 = _wrap(base - np.arctan2(l2 * np.sin(th2), l1 + l2 * np.cos(th2)))
        q = np.array([th1, th2])
        if (q >= arm.limits_lo).all() and (q <= arm.limits_hi).all():
            candidates.append(q)
    if not candidates:
        return None
    return min(candidates, key=lambda q: float(np.sum((q - seed) ** 2)))


def _ik_dls(arm: ArmSpec, target: np.ndarray, seed: np.ndarray) -> np.ndarray | None:
    q = _clamp(arm, seed.copy())
    damping = 1e-3
    for _ in range(300):
        err = target - forward_kinematics(arm, q)
        if np.dot(err, err) < 1e-24:
            return q
        jac = jacobian(arm, q)
        jjt = jac @ jac.T + damping * np.eye(2)
        step = jac.T @ np.linalg.solve(jjt, err)
        norm = np.linalg.norm(step)
        if norm > 0.5:
            step *= 0.5 / norm
        q = _clamp(arm, q + step)
    err = target - forward_kinematics(arm, q)
    return q if np.linalg.norm(err) < IK_TOL else None


def inverse_kinematics(arm: ArmSpec, target, seed_joints) -> np.ndarray:
    """Joint angles whose forward kinematics match `target` within 1e-6.

    Nearest-to-seed branch selection for the 2-link arm; damped least
    squares with deterministic restarts otherwise.
    """
    target = np.asarray(target, dtype=np.float64)
    seed = np.asarray(seed_joints, dtype=np.float64)
    r = float(np.linalg.norm(target))
    if r > arm.reach - IK_MARGIN:
        raise OutOfReachError(f"target {target} beyond reach {arm.reach:.3f} of {arm.name}")
    if arm.n_joints == 2:
        inner = abs(arm.link_lengths[0] - arm.link_lengths[1])
        if r < inner + IK_MARGIN:
            raise OutOfReachError(f"target {target} inside inner radius of {arm.name}")
        q = _ik_two_link(arm, target, seed)
        if q is None:
            raise OutOfReachError(f"no in-limit solution for {target} on {arm.name}")
        return q
    q = _ik_dls(arm, target, seed)
    if q is not None:
        return q
    # deterministic restarts across elbow configurations
    for bend in (0.5, -0.5, 1.5, -1.5, 2.4, -2.4):
        guess = seed.copy()
        guess[1:] = bend
        guess[0] = np.arctan2(target[1], target[0])
        q = _ik_dls(arm, target, _clamp(arm, guess))
        if q is not None:
            return q
    raise OutOfReachError(f"inverse kinematics failed for {target} on {arm.name}")


HOME_EE = np.array([0.0, 0.55])

_HOME_CACHE: dict[str, np.ndarray] = {}


def home_joints(arm: ArmSpec) -> np.ndarray:
    """Fixed start pose; both embodiments share the same home EE position."""
    if arm.name not in _HOME_CACHE:
        seed = np.full(arm.n_joints, 0.0)
        seed[0] = np.pi / 2
        _HOME_CACHE[arm.name] = inverse_kinematics(arm, HOME_EE, seed)
    return _HOME_CACHE[arm.name].copy()
