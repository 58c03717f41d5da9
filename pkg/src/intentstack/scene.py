"""Tabletop scene documents: blocks, stacks, placement plans, stability reports.

A scene is a catalog of axis-aligned blocks on a rectangular table with a
center origin, plus named target positions where stacks are built.  A stack
references scene objects by id; an object is "on the table" exactly when no
stack layer references it, so the table set never needs separate bookkeeping.
Ghost objects (projected placements that are not committed) carry a ``ghost``
marker and an ``elevation`` giving the base height of the previewed pose.

All values are treated as immutable; geometry is in millimetres.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

Point = tuple[float, float]


@dataclass(frozen=True)
class SceneObject:
    """One rectangular block.

    ``position`` is the footprint center on the table plane; ``elevation`` is
    the height of the base above the table (0 for table objects, the rest
    height for ghosts and committed stack layers).
    """

    id: str
    color: str
    size: str
    footprint: tuple[float, float]
    height: float
    position: Point
    shape: str = "block"
    ghost: bool = False
    elevation: float = 0.0

    def __post_init__(self):
        if not self.id:
            raise ValueError("object id must be nonempty")
        w, d = self.footprint
        if not (w > 0 and d > 0 and self.height > 0):
            raise ValueError(f"object {self.id!r} has non-positive dimensions")
        object.__setattr__(self, "footprint", (float(w), float(d)))
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))

    @property
    def volume(self) -> float:
        return self.footprint[0] * self.footprint[1] * self.height


@dataclass(frozen=True)
class Scene:
    """Catalog of objects plus table geometry and named target positions."""

    objects: tuple[SceneObject, ...]
    table: tuple[float, float] = (1000.0, 1000.0)
    targets: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ValueError("scene contains duplicate object ids")
        half_w, half_d = self.table[0] / 2.0, self.table[1] / 2.0
        for o in self.objects:
            x, y = o.position
            if abs(x) > half_w or abs(y) > half_d:
                raise ValueError(
                    f"object {o.id!r} at {o.position} lies outside the {self.table} table"
                )

    def object(self, object_id: str) -> SceneObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(f"no object with id {object_id!r} in scene")

    def has_object(self, object_id: str) -> bool:
        return any(o.id == object_id for o in self.objects)

    def target_position(self, name: str) -> Point:
        try:
            x, y = self.targets[name]
        except KeyError:
            raise KeyError(f"no target named {name!r} in scene") from None
        return (float(x), float(y))

    def replace_object(self, obj: SceneObject) -> "Scene":
        """A copy of the scene with the same-id object swapped for ``obj``."""
        if not self.has_object(obj.id):
            raise KeyError(f"no object with id {obj.id!r} in scene")
        return replace(
            self, objects=tuple(obj if o.id == obj.id else o for o in self.objects)
        )


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    z: float
    yaw: float = 0.0


@dataclass(frozen=True)
class StackLayer:
    object_id: str
    pose: Pose


@dataclass(frozen=True)
class StackState:
    """Committed stack at a target position, layers ordered bottom to top."""

    target_position: Point
    layers: tuple[StackLayer, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(
            self,
            "target_position",
            (float(self.target_position[0]), float(self.target_position[1])),
        )
        ids = [layer.object_id for layer in self.layers]
        if len(set(ids)) != len(ids):
            raise ValueError("stack references an object more than once")

    def contains(self, object_id: str) -> bool:
        return any(layer.object_id == object_id for layer in self.layers)


@dataclass(frozen=True)
class PlacementPlan:
    """A candidate placement: object, offset from the stack center, rest pose."""

    object_id: str
    offset: Point
    pose: Pose


@dataclass(frozen=True)
class StabilityReport:
    """Static stability verdict with one margin and overlap ratio per interface.

    Interface 0 is the ground contact under the bottom layer; interface k
    supports layers k..top on the contact rectangle between layers k-1 and k.
    A margin is the signed distance (mm) from the supported center of mass to
    the support rectangle boundary, negative outside; margin 0 is stable.
    """

    stable: bool
    margins: tuple[float, ...]
    overlap_ratios: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "margins", tuple(float(m) for m in self.margins))
        object.__setattr__(
            self, "overlap_ratios", tuple(float(r) for r in self.overlap_ratios)
        )
        if len(self.margins) != len(self.overlap_ratios):
            raise ValueError("margins and overlap_ratios must align per interface")
        if self.stable != all(m >= 0.0 for m in self.margins):
            raise ValueError("stable flag inconsistent with margins")
        if any(not (0.0 <= r <= 1.0) for r in self.overlap_ratios):
            raise ValueError("overlap ratios must lie in [0, 1]")


def table_objects(scene: Scene, stack: StackState) -> list[SceneObject]:
    """Objects currently on the table: cataloged but not in any stack layer."""
    return [o for o in scene.objects if not stack.contains(o.id)]


# ---------------------------------------------------------------------------
# Documents


def object_to_dict(obj: SceneObject) -> dict:
    doc = {
        "id": obj.id,
        "color": obj.color,
        "size": obj.size,
        "shape": obj.shape,
        "footprint": list(obj.footprint),
        "height": obj.height,
        "position": list(obj.position),
    }
    if obj.ghost:
        doc["ghost"] = True
    if obj.elevation:
        doc["elevation"] = obj.elevation
    return doc


def object_from_dict(doc: dict) -> SceneObject:
    return SceneObject(
        id=doc["id"],
        color=doc["color"],
        size=doc["size"],
        shape=doc.get("shape", "block"),
        footprint=tuple(doc["footprint"]),
        height=doc["height"],
        position=tuple(doc["position"]),
        ghost=doc.get("ghost", False),
        elevation=doc.get("elevation", 0.0),
    )


def scene_to_dict(scene: Scene) -> dict:
    return {
        "table": list(scene.table),
        "targets": {name: list(pos) for name, pos in scene.targets.items()},
        "objects": [object_to_dict(o) for o in scene.objects],
    }


def scene_from_dict(doc: dict) -> Scene:
    return Scene(
        objects=tuple(object_from_dict(o) for o in doc["objects"]),
        table=tuple(doc.get("table", (1000.0, 1000.0))),
        targets={name: tuple(pos) for name, pos in doc.get("targets", {}).items()},
    )


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2) + "\n")


def load_scene(path) -> Scene:
    return scene_from_dict(json.loads(Path(path).read_text()))


def stack_to_dict(stack: StackState) -> dict:
    return {
        "target_position": list(stack.target_position),
        "layers": [
            {
                "object_id": layer.object_id,
                "pose": [layer.pose.x, layer.pose.y, layer.pose.z, layer.pose.yaw],
            }
            for layer in stack.layers
        ],
    }


def stack_from_dict(doc: dict) -> StackState:
    return StackState(
        target_position=tuple(doc["target_position"]),
        layers=tuple(
            StackLayer(object_id=e["object_id"], pose=Pose(*e["pose"]))
            for e in doc["layers"]
        ),
    )


def report_to_dict(report: StabilityReport) -> dict:
    return {
        "stable": report.stable,
        "margins": list(report.margins),
        "overlap_ratios": list(report.overlap_ratios),
    }


def report_from_dict(doc: dict) -> StabilityReport:
    return StabilityReport(
        stable=doc["stable"],
        margins=tuple(doc["margins"]),
        overlap_ratios=tuple(doc["overlap_ratios"]),
    )
