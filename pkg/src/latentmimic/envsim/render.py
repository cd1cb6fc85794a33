"""Deterministic grayscale rasterization of the planar world.

Pure function of (state, arm): anti-aliased links at embodiment-specific
gray and width, filled object shapes with kind-specific intensities, and
a gripper marker whose brightness flips with open/closed. Pressed buttons
brighten, so task progress is visible to a pixels-only encoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arms import ArmSpec, joint_positions
from .world import BLOCK, BUTTON, CUBE, LID, OBJ_HALF, WorldState


@dataclass(frozen=True)
class ViewConfig:
    img_h: int = 32
    img_w: int = 32
    x_min: float = -0.8
    x_max: float = 0.8
    y_min: float = -0.2
    y_max: float = 1.4

    @property
    def scale(self) -> float:
        # isotropic by construction; renderer assumes square pixels
        return self.img_w / (self.x_max - self.x_min)


OBJ_GRAY = {CUBE: 0.75, LID: 0.6, BLOCK: 0.82, BUTTON: 0.5}
BUTTON_PRESSED_GRAY = 1.0
TABLE_GRAY = 0.22
BASE_GRAY = 0.3


def _grid(view: ViewConfig) -> tuple[np.ndarray, np.ndarray]:
    us = np.arange(view.img_w, dtype=np.float64)
    vs = np.arange(view.img_h, dtype=np.float64)
    return np.meshgrid(us, vs)


def _to_px(view: ViewConfig, p: np.ndarray) -> np.ndarray:
    px = (p[0] - view.x_min) * view.scale - 0.5
    py = (view.y_max - p[1]) * view.scale - 0.5
    return np.array([px, py])


def _paint(img: np.ndarray, cover: np.ndarray, gray: float) -> None:
    np.maximum(img, np.clip(cover, 0.0, 1.0) * gray, out=img)


def _segment_cover(uu, vv, a: np.ndarray, b: np.ndarray, width_px: float) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom < 1e-12:
        d = np.hypot(uu - a[0], vv - a[1])
    else:
        t = np.clip(((uu - a[0]) * ab[0] + (vv - a[1]) * ab[1]) / denom, 0.0, 1.0)
        d = np.hypot(uu - (a[0] + t * ab[0]), vv - (a[1] + t * ab[1]))
    return width_px / 2.0 + 0.5 - d


def _disc_cover(uu, vv, c: np.ndarray, radius_px: float) -> np.ndarray:
    d = np.hypot(uu - c[0], vv - c[1]) - radius_px
    return 0.5 - d


def _box_cover(uu, vv, c: np.ndarray, hw_px: float, hh_px: float) -> np.ndarray:
    dx = np.abs(uu - c[0]) - hw_px
    dy = np.abs(vv - c[1]) - hh_px
    outside = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
    inside = np.minimum(np.maximum(dx, dy), 0.0)
    return 0.5 - (outside + inside)


def render(state: WorldState, arm: ArmSpec, view: ViewConfig = ViewConfig()) -> np.ndarray:
    img = np.zeros((view.img_h, view.img_w), dtype=np.float64)
    uu, vv = _grid(view)
    s = view.scale

    # table line and base disc
    a = _to_px(view, np.array([view.x_min, 0.0]))
    b = _to_px(view, np.array([view.x_max, 0.0]))
    _paint(img, _segment_cover(uu, vv, a, b, 1.2), TABLE_GRAY)
    _paint(img, _disc_cover(uu, vv, _to_px(view, np.zeros(2)), 1.6), BASE_GRAY)

    for o in state.objects:
        c = _to_px(view, o.position)
        hw, hh = OBJ_HALF[o.kind]
        if o.kind == BUTTON:
            gray = BUTTON_PRESSED_GRAY if o.pressed else OBJ_GRAY[BUTTON]
            _paint(img, _disc_cover(uu, vv, c, hw * s), gray)
        else:
            _paint(img, _box_cover(uu, vv, c, hw * s, hh * s), OBJ_GRAY[o.kind])

    pts = joint_positions(arm, state.joint_angles)
    for i in range(len(pts) - 1):
        a = _to_px(view, pts[i])
        b = _to_px(view, pts[i + 1])
        _paint(img, _segment_cover(uu, vv, a, b, arm.link_width_px), arm.link_gray)

    ee = _to_px(view, pts[-1])
    if state.gripper_open:
        _paint(img, _disc_cover(uu, vv, ee, 1.0), 0.55)
    else:
        _paint(img, _disc_cover(uu, vv, ee, 1.8), 1.0)

    return img
