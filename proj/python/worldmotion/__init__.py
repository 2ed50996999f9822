"""Trajectory editing of parametric human motion and guidance map rendering."""

import json

from . import _core
from ._core import (
    BodyModel,
    Camera,
    DegenerateError,
    Error,
    IoError,
    Motion,
    ValidationError,
    align_speed,
    arc_length,
    axis_angle_to_matrix,
    bank_add,
    bank_get,
    bank_list,
    camera_to_world,
    ground_feet,
    heading_rotation,
    headings,
    load_asset,
    load_cameras,
    load_motion,
    look_at_camera,
    loop_clip,
    mannequin,
    matrix_to_axis_angle,
    project,
    register_points,
    render_frame,
    retarget_vertices,
    root_positions,
    save_asset,
    save_motion,
    skin_sequence,
    synth_scene,
    unproject,
    walking_clip,
    world_to_camera,
)

__all__ = [name for name in dir(_core) if not name.startswith("_")] + ["run_edit", "render_motion"]


def run_edit(bundle, trajectory, out, asset="", bank="", clip="", config="", overrides=()):
    """Edit the bundle's motion along a drawn trajectory. Returns the report as a dict."""
    return json.loads(_core.run_edit(bundle, trajectory, out, asset, bank, clip, config, list(overrides)))


def render_motion(sequence, camera, out, asset="", width=0, height=0, config="", overrides=()):
    """Render the five guidance map sequences. Returns the manifest as a dict."""
    return json.loads(_core.render_motion(sequence, camera, out, asset, width, height, config, list(overrides)))
