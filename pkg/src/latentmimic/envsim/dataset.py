"""Episodes, paired-demonstration generation, and the on-disk store.

A pair is built by running the scripted expert on the source arm, then
replaying its end-effector path on the target arm through per-step
inverse kinematics with copied gripper commands. Frames stay aligned
one-to-one; pairs whose end effectors ever disagree by more than
`retarget_tol` (or where either run fails its task) are dropped and
regenerated from a fresh seed.

Episode files: little-endian binary, magic "DJEP", version, frame count,
proprio/action dims, image size, then frame-major float32 blocks
(image, proprio, action; the final frame's action slot is zero padding).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arms import ARMS, ArmSpec, OutOfReachError, forward_kinematics, inverse_kinematics
from .env import PlanarEnv
from .expert import ExpertRun, run_expert
from .world import Action, WorldParams, action_to_vec

MAGIC = b"DJEP"
VERSION = 1


class DatasetError(RuntimeError):
    pass


@dataclass
class Episode:
    embodiment: str
    task: str
    images: np.ndarray  # (F, H, W) float32
    proprio: np.ndarray  # (F, P) float32; P = 0 for source episodes
    actions: np.ndarray  # (F - 1, A) float32; A = 0 for source episodes
    success: bool
    seed: int

    @property
    def frames(self) -> int:
        return self.images.shape[0]

    def __post_init__(self):
        if self.actions.size and self.actions.shape[0] != self.frames - 1:
            raise ValueError("episodes with actions need len(observations) == len(actions) + 1")


@dataclass
class PairedDemo:
    source: Episode
    target: Episode
    frame_map: list[tuple[int, int]]

    def __post_init__(self):
        ks = [k for k, _ in self.frame_map]
        js = [j for _, j in self.frame_map]
        if any(n <= p for p, n in zip(ks, ks[1:])) or any(n <= p for p, n in zip(js, js[1:])):
            raise ValueError("frame_map must be strictly increasing in both coordinates")


def _episode_from_run(run: ExpertRun, with_actions: bool) -> Episode:
    if with_actions:
        prop = run.proprio.astype(np.float32)
        acts = np.stack([action_to_vec(a) for a in run.actions]).astype(np.float32)
    else:
        prop = np.zeros((run.images.shape[0], 0), dtype=np.float32)
        acts = np.zeros((run.images.shape[0] - 1, 0), dtype=np.float32)
    return Episode(
        embodiment=run.arm.name,
        task=run.task,
        images=run.images.astype(np.float32),
        proprio=prop,
        actions=acts,
        success=run.success,
        seed=run.seed,
    )


def retarget_replay(
    source_run: ExpertRun,
    target_arm: ArmSpec,
    params: WorldParams = WorldParams(),
) -> Episode | None:
    """Replay the source end-effector path on the target arm. Returns None
    when tracking exceeds retarget_tol, IK fails, or the task fails."""
    source_arm = source_run.arm
    ee_path = np.stack([forward_kinematics(source_arm, q) for q in source_run.joints])
    env = PlanarEnv(source_run.task, target_arm, source_run.seed, params)
    ee0 = forward_kinematics(target_arm, env.state.joint_angles)
    if np.linalg.norm(ee0 - ee_path[0]) > params.retarget_tol:
        return None
    images = [env.image()]
    prop = [env.proprio()]
    actions: list[Action] = []
    for k, src_action in enumerate(source_run.actions):
        try:
            q_goal = inverse_kinematics(target_arm, ee_path[k + 1], env.state.joint_angles)
        except OutOfReachError:
            return None
        delta = np.clip(
            q_goal - env.state.joint_angles, -target_arm.max_joint_speed, target_arm.max_joint_speed
        )
        act = Action(delta, src_action.gripper)
        env.step(act)
        actions.append(act)
        images.append(env.image())
        prop.append(env.proprio())
        ee = forward_kinematics(target_arm, env.state.joint_angles)
        if np.linalg.norm(ee - ee_path[k + 1]) > params.retarget_tol:
            return None
    if not env.success():
        return None
    return Episode(
        embodiment=target_arm.name,
        task=source_run.task,
        images=np.stack(images).astype(np.float32),
        proprio=np.stack(prop).astype(np.float32),
        actions=np.stack([action_to_vec(a) for a in actions]).astype(np.float32),
        success=True,
        seed=source_run.seed,
    )


def generate_pair(
    task: str,
    source_arm: ArmSpec,
    target_arm: ArmSpec,
    episode_seed: int,
    params: WorldParams = WorldParams(),
) -> PairedDemo | None:
    source_run = run_expert(task, source_arm, episode_seed, params)
    if not source_run.success:
        return None
    target_ep = retarget_replay(source_run, target_arm, params)
    if target_ep is None:
        return None
    source_ep = _episode_from_run(source_run, with_actions=False)
    frame_map = [(k, k) for k in range(source_ep.frames)]
    return PairedDemo(source_ep, target_ep, frame_map)


def generate_paired_dataset(
    tasks: list[str],
    episodes_per_task: int,
    source_arm: ArmSpec,
    target_arm: ArmSpec,
    seed: int,
    params: WorldParams = WorldParams(),
    max_retries: int = 25,
) -> dict[str, list[PairedDemo]]:
    out: dict[str, list[PairedDemo]] = {}
    for ti, task in enumerate(tasks):
        demos = []
        for slot in range(episodes_per_task):
            pair = None
            for attempt in range(max_retries):
                ss = np.random.SeedSequence([seed, ti, slot, attempt])
                episode_seed = int(ss.generate_state(1)[0])
                pair = generate_pair(task, source_arm, target_arm, episode_seed, params)
                if pair is not None:
                    break
            if pair is None:
                raise DatasetError(f"could not generate a valid pair for task {task!r} "
                                   f"after {max_retries} retries (slot {slot})")
            demos.append(pair)
        out[task] = demos
    return out


# ---------------------------------------------------------------------------
# binary episode files


def write_episode(path: Path, ep: Episode) -> None:
    frames = ep.frames
    p_dim = ep.proprio.shape[1]
    a_dim = ep.actions.shape[1] if ep.actions.size else 0
    h, w = ep.images.shape[1:]
    header = MAGIC + struct.pack("<IIIIHH", VERSION, frames, p_dim, a_dim, h, w)
    acts = np.zeros((frames, a_dim), dtype=np.float32)
    if a_dim:
        acts[: frames - 1] = ep.actions
    with open(path, "wb") as f:
        f.write(header)
        for k in range(frames):
            f.write(ep.images[k].astype("<f4").tobytes())
            if p_dim:
                f.write(ep.proprio[k].astype("<f4").tobytes())
            if a_dim:
                f.write(acts[k].astype("<f4").tobytes())


def read_episode(path: Path, embodiment: str, task: str, success: bool, seed: int) -> Episode:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise DatasetError(f"{path}: bad magic {raw[:4]!r}")
    header_len = 4 + struct.calcsize("<IIIIHH")
    version, frames, p_dim, a_dim, h, w = struct.unpack("<IIIIHH", raw[4:header_len])
    if version != VERSION:
        raise DatasetError(f"{path}: unsupported version {version}")
    per_frame = (h * w + p_dim + a_dim) * 4
    body = np.frombuffer(raw[header_len:], dtype="<f4")
    if body.size != frames * per_frame // 4:
        raise DatasetError(f"{path}: truncated body")
    body = body.reshape(frames, h * w + p_dim + a_dim)
    images = body[:, : h * w].reshape(frames, h, w)
    prop = body[:, h * w : h * w + p_dim]
    acts = body[:, h * w + p_dim :][: frames - 1] if a_dim else np.zeros((frames - 1, 0), np.float32)
    return Episode(embodiment, task, images.copy(), prop.copy(), acts.copy(), success, seed)


# ---------------------------------------------------------------------------
# dataset directories


def save_dataset(
    root: Path,
    pairs_by_task: dict[str, list[PairedDemo]],
    suites: dict[str, str],
    seed: int,
    params: WorldParams,
    source_arm: ArmSpec,
    target_arm: ArmSpec,
) -> None:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for task in sorted(pairs_by_task):
        for i, pair in enumerate(pairs_by_task[task]):
            pair_id = f"{task}-{i:03d}"
            for role, ep in (("source", pair.source), ("target", pair.target)):
                fname = f"{pair_id}_{role}.ep"
                write_episode(root / fname, ep)
                entries.append(
                    {
                        "file": fname,
                        "embodiment": ep.embodiment,
                        "task": task,
                        "length": ep.frames,
                        "success": bool(ep.success),
                        "seed": int(ep.seed),
                        "pair_id": pair_id,
                        "role": role,
                    }
                )
    manifest = {
        "version": VERSION,
        "seed": int(seed),
        "tasks": {t: suites[t] for t in sorted(pairs_by_task)},
        "retarget_tol": params.retarget_tol,
        "arms": {
            "source": source_arm.name,
            "target": target_arm.name,
        },
        "episodes": entries,
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))


@dataclass
class Dataset:
    root: Path
    manifest: dict
    pairs_by_task: dict[str, list[PairedDemo]] = field(default_factory=dict)

    @property
    def tasks(self) -> dict[str, str]:
        return self.manifest["tasks"]

    @property
    def target_arm(self) -> ArmSpec:
        return ARMS[self.manifest["arms"]["target"]]

    @property
    def source_arm(self) -> ArmSpec:
        return ARMS[self.manifest["arms"]["source"]]

    def tasks_in_suite(self, suite: str) -> list[str]:
        return sorted(t for t, s in self.tasks.items() if s == suite)


def load_dataset(root: Path) -> Dataset:
    root = Path(root)
    manifest = json.loads((root / "manifest.json").read_text())
    by_pair: dict[str, dict[str, Episode]] = {}
    order: list[str] = []
    for e in manifest["episodes"]:
        ep = read_episode(root / e["file"], e["embodiment"], e["task"], e["success"], e["seed"])
        if e["pair_id"] not in by_pair:
            by_pair[e["pair_id"]] = {}
            order.append(e["pair_id"])
        by_pair[e["pair_id"]][e["role"]] = ep
    pairs_by_task: dict[str, list[PairedDemo]] = {}
    for pid in order:
        roles = by_pair[pid]
        pair = PairedDemo(roles["source"], roles["target"], [(k, k) for k in range(roles["source"].frames)])
        pairs_by_task.setdefault(roles["source"].task, []).append(pair)
    return Dataset(root, manifest, pairs_by_task)
