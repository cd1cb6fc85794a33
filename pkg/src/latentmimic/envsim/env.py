"""Closed-loop environment wrapper around the functional world."""

from __future__ import annotations

import numpy as np

from .arms import ArmSpec
from .render import ViewConfig, render
from .tasks import TASKS
from .world import Action, WorldParams, WorldState, initial_state, proprio


class PlanarEnv:
    """One task instance: object layout fixed by the episode seed."""

    def __init__(
        self,
        task: str,
        arm: ArmSpec,
        seed: int,
        params: WorldParams = WorldParams(),
        view: ViewConfig = ViewConfig(),
    ):
        if task not in TASKS:
            raise KeyError(f"unknown task {task!r}")
        self.task = TASKS[task]
        self.arm = arm
        self.params = params
        self.view = view
        self.seed = seed
        self.state: WorldState = None  # type: ignore[assignment]
        self.reset()

    def reset(self) -> WorldState:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed])))
        objects = self.task.make_objects(rng)
        self.state = initial_state(self.arm, objects)
        return self.state

    def step(self, action: Action) -> WorldState:
        from .world import step as world_step

        self.state = world_step(self.state, self.arm, action, self.params)
        return self.state

    def image(self) -> np.ndarray:
        return render(self.state, self.arm, self.view)

    def proprio(self) -> np.ndarray:
        return proprio(self.arm, self.state)

    def success(self) -> bool:
        return self.task.success(self.state, self.arm)
