"""Static stability checks and ghost projection for block stacks.

Stability is the classic cumulative test: at every interface, the combined
center of mass of everything above must project inside the support rectangle
(the axis-aligned intersection of the two touching footprints; for the ground
interface, the bottom block's own footprint).  Mass is volume at uniform
density.  This stands in for a dynamics engine: no friction, no toppling
simulation, yaw fixed at 0.

All geometry is evaluated in coordinates relative to the stack target, so
integer-millimetre scenes give bit-identical reports under translation.
"""

from __future__ import annotations

import math
from dataclasses import replace

from .scene import (
    PlacementPlan,
    Pose,
    Scene,
    StabilityReport,
    StackLayer,
    StackState,
    table_objects,
)


class StabilityRefused(RuntimeError):
    """Commitment was refused because the projected stack is unstable."""

    def __init__(self, report: StabilityReport):
        self.report = report
        worst = min(report.margins) if report.margins else 0.0
        super().__init__(
            f"placement refused: unstable stack (worst margin {worst:.3f} mm)"
        )


def _rect(cx: float, cy: float, footprint) -> tuple[float, float, float, float]:
    half_w, half_d = footprint[0] / 2.0, footprint[1] / 2.0
    return (cx - half_w, cx + half_w, cy - half_d, cy + half_d)


def _intersect(a, b) -> tuple[float, float, float, float]:
    # May be empty (lo > hi); the margin formula handles that uniformly.
    return (max(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), min(a[3], b[3]))


def _signed_margin(cx: float, cy: float, rect) -> float:
    """Signed distance from a point to a rectangle boundary.

    Positive inside (distance to the nearest edge), negative outside (the
    Euclidean distance to the rectangle); per-axis ``min(c - lo, hi - c)``
    stays correct even for empty intersections, where it is negative.
    """
    dx = min(cx - rect[0], rect[1] - cx)
    dy = min(cy - rect[2], rect[3] - cy)
    if dx >= 0.0 and dy >= 0.0:
        return min(dx, dy)
    if dx < 0.0 and dy < 0.0:
        return -math.hypot(dx, dy)
    return min(dx, dy)


def check_stability(stack: StackState, scene: Scene) -> StabilityReport:
    """Per-interface margins for the whole stack; empty stacks are stable.

    The support rectangle of interface k is the intersection of the
    footprints of every layer below k (the load must stay over the common
    support column all the way to the table); for the ground interface it is
    the bottom footprint itself.  The overlap ratio of interface k is the
    fraction of layer k's footprint lying over that support.
    """
    n = len(stack.layers)
    if n == 0:
        return StabilityReport(stable=True, margins=(), overlap_ratios=())
    tx, ty = stack.target_position
    objs = [scene.object(layer.object_id) for layer in stack.layers]
    # Local coordinates relative to the target keep translation exact.
    centers = [(layer.pose.x - tx, layer.pose.y - ty) for layer in stack.layers]
    rects = [_rect(cx, cy, obj.footprint) for (cx, cy), obj in zip(centers, objs)]
    masses = [obj.volume for obj in objs]

    margins = []
    ratios = []
    support = rects[0]
    for k in range(n):
        if k > 0:
            contact = _intersect(support, rects[k])
            width = max(contact[1] - contact[0], 0.0)
            depth = max(contact[3] - contact[2], 0.0)
            ratio = width * depth / (objs[k].footprint[0] * objs[k].footprint[1])
        else:
            ratio = 1.0
        mass = sum(masses[k:])
        com_x = sum(m * c[0] for m, c in zip(masses[k:], centers[k:])) / mass
        com_y = sum(m * c[1] for m, c in zip(masses[k:], centers[k:])) / mass
        margins.append(_signed_margin(com_x, com_y, support))
        ratios.append(min(ratio, 1.0))
        support = _intersect(support, rects[k])
    return StabilityReport(
        stable=all(m >= 0.0 for m in margins),
        margins=tuple(margins),
        overlap_ratios=tuple(ratios),
    )


def stack_top_z(scene: Scene, stack: StackState) -> float:
    """Rest height for the next layer: the sum of committed layer heights."""
    return sum(scene.object(layer.object_id).height for layer in stack.layers)


def resolve_plan(
    scene: Scene, stack: StackState, object_id: str, offset=(0.0, 0.0)
) -> PlacementPlan:
    """Build the placement plan for an object at an offset from the stack center."""
    scene.object(object_id)  # existence check
    if stack.contains(object_id):
        raise ValueError(f"object {object_id!r} is already stacked")
    tx, ty = stack.target_position
    pose = Pose(
        x=tx + float(offset[0]),
        y=ty + float(offset[1]),
        z=stack_top_z(scene, stack),
        yaw=0.0,
    )
    return PlacementPlan(object_id=object_id, offset=(float(offset[0]), float(offset[1])), pose=pose)


def project_future_state(
    scene: Scene, stack: StackState, plan: PlacementPlan
) -> tuple[Scene, StabilityReport]:
    """Ghost preview: the scene as it would look after the placement.

    Returns a copy of the scene with the plan object re-posed on the stack top
    and marked as a ghost, plus the stability report of the extended stack.
    The committed scene and stack are never touched.
    """
    obj = scene.object(plan.object_id)
    if stack.contains(plan.object_id):
        raise ValueError(f"object {plan.object_id!r} is already stacked")
    future = StackState(
        target_position=stack.target_position,
        layers=stack.layers + (StackLayer(plan.object_id, plan.pose),),
    )
    report = check_stability(future, scene)
    ghost = scene.replace_object(
        replace(obj, position=(plan.pose.x, plan.pose.y), elevation=plan.pose.z, ghost=True)
    )
    return ghost, report


def check_collision(scene: Scene, plan: PlacementPlan, stack: StackState | None = None) -> bool:
    """True iff the ghost box overlaps a table object's box in all three axes.

    Touching faces do not collide (strict overlap); stacked objects and the
    plan object itself are excluded.
    """
    obj = scene.object(plan.object_id)
    stack = stack if stack is not None else StackState(target_position=(plan.pose.x, plan.pose.y))
    gx0, gx1, gy0, gy1 = _rect(plan.pose.x, plan.pose.y, obj.footprint)
    gz0, gz1 = plan.pose.z, plan.pose.z + obj.height
    for other in table_objects(scene, stack):
        if other.id == plan.object_id:
            continue
        ox0, ox1, oy0, oy1 = _rect(other.position[0], other.position[1], other.footprint)
        oz0, oz1 = other.elevation, other.elevation + other.height
        if gx0 < ox1 and ox0 < gx1 and gy0 < oy1 and oy0 < gy1 and gz0 < oz1 and oz0 < gz1:
            return True
    return False


def apply_placement(
    scene: Scene, stack: StackState, plan: PlacementPlan, force: bool = False
) -> tuple[Scene, StackState, StabilityReport]:
    """Commit a placement: re-pose the object at rest and append the layer.

    Refuses unstable placements unless ``force`` is set; either way the
    stability report of the resulting stack is returned.  Inputs are
    unchanged; the object leaves the table set by virtue of joining the stack.
    """
    obj = scene.object(plan.object_id)
    if stack.contains(plan.object_id):
        raise ValueError(f"object {plan.object_id!r} is already stacked")
    new_stack = StackState(
        target_position=stack.target_position,
        layers=stack.layers + (StackLayer(plan.object_id, plan.pose),),
    )
    report = check_stability(new_stack, scene)
    if not report.stable and not force:
        raise StabilityRefused(report)
    new_scene = scene.replace_object(
        replace(obj, position=(plan.pose.x, plan.pose.y), elevation=plan.pose.z, ghost=False)
    )
    return new_scene, new_stack, report
