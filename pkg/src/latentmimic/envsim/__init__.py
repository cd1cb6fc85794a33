from .arms import (
    ARMS,
    HOME_EE,
    IK_TOL,
    SOURCE_ARM,
    TARGET_ARM,
    ArmSpec,
    OutOfReachError,
    forward_kinematics,
    home_joints,
    inverse_kinematics,
    jacobian,
    joint_positions,
)
from .dataset import (
    Dataset,
    DatasetError,
    Episode,
    PairedDemo,
    generate_pair,
    generate_paired_dataset,
    load_dataset,
    read_episode,
    retarget_replay,
    save_dataset,
    write_episode,
)
from .env import PlanarEnv
from .expert import ExpertRun, run_expert, scripted_policy
from .render import ViewConfig, render
from .tasks import DEFAULT_SUITES, TASKS, task_success
from .world import (
    Action,
    Obj,
    WorldParams,
    WorldState,
    action_dim,
    action_to_vec,
    end_effector,
    gripper_onehot,
    initial_state,
    proprio,
    proprio_dim,
    step,
    vec_to_action,
)
