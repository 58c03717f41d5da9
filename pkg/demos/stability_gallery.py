"""A gallery of stacks from safely centered to physically refused.

Margins are signed distances in mm from the resting center of mass to
the edge of the supporting region at each interface; interface 0 is the
table.  Negative means the stack above that interface tips.

Run: python3 demos/stability_gallery.py
"""

from intentstack import (
    Pose,
    Scene,
    SceneObject,
    StabilityRefused,
    StackLayer,
    StackState,
    apply_placement,
    check_stability,
    resolve_plan,
)


def block(object_id, w, d, h, x=0.0):
    return SceneObject(id=object_id, color=object_id, size="small",
                       footprint=(w, d), height=h, position=(x, 0.0))


def tower(scene, specs):
    layers, z = [], 0.0
    for object_id, x in specs:
        layers.append(StackLayer(object_id, Pose(x=x, y=0.0, z=z, yaw=0.0)))
        z += scene.object(object_id).height
    return StackState(target_position=(0.0, 0.0), layers=tuple(layers))


def show(title, scene, specs):
    report = check_stability(tower(scene, specs), scene)
    verdict = "stable" if report.stable else "TIPS"
    print(f"{title:<34} {verdict:<7} margins "
          f"{tuple(round(m, 1) for m in report.margins)}")
    return report


scene = Scene(objects=(block("base", 80, 80, 40),
                       block("mid", 80, 80, 40, x=200),
                       block("cap", 80, 80, 80, x=400)))

show("centered pair", scene, [("base", 0), ("mid", 0)])
show("offset 25 mm, still fine", scene, [("base", 0), ("mid", 25)])
show("center of mass on the edge", scene, [("base", 0), ("mid", 40)])
show("5 mm past the edge", scene, [("base", 0), ("mid", 45)])

# Each neighbouring pair looks fine in isolation here, but the combined
# center of mass of everything above the base leaves its footprint.
show("staircase, pairwise plausible", scene,
     [("base", 0), ("mid", 35), ("cap", 60)])

# The commit path runs the same check and refuses to build a tipping
# stack unless explicitly forced.
stack = tower(scene, [("base", 0)])
plan = resolve_plan(scene, stack, "mid", offset=(45.0, 0.0))
try:
    apply_placement(scene, stack, plan)
except StabilityRefused as exc:
    print(f"\ncommit refused: margin {exc.report.margins[1]:.1f} mm")
_, forced, _ = apply_placement(scene, stack, plan, force=True)
print("forced anyway:", [layer.object_id for layer in forced.layers])
