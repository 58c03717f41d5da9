"""Geometry tests: stability margins, ghost projection, collision, commits."""

import copy
import math

import pytest
from hypothesis import given, strategies as st

from intentstack import (
    PlacementPlan,
    Pose,
    Scene,
    SceneObject,
    StabilityRefused,
    StabilityReport,
    StackLayer,
    StackState,
    apply_placement,
    check_collision,
    check_stability,
    project_future_state,
    resolve_plan,
)
from intentstack.presets import demo_scene
from intentstack.scene import scene_from_dict, scene_to_dict, table_objects
from intentstack.stacking import stack_top_z


def block(object_id, w, d, h, x=0.0, y=0.0):
    return SceneObject(
        id=object_id,
        color=object_id,
        size="small",
        footprint=(w, d),
        height=h,
        position=(x, y),
    )


def tower(scene, specs, target=(0.0, 0.0)):
    """StackState with the given (object_id, x, y) layers resting in order."""
    layers = []
    z = 0.0
    for object_id, x, y in specs:
        layers.append(StackLayer(object_id, Pose(x=x, y=y, z=z, yaw=0.0)))
        z += scene.object(object_id).height
    return StackState(target_position=target, layers=tuple(layers))


# ---------------------------------------------------------------------------
# Scene container


class TestScene:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            Scene(objects=(block("a", 40, 40, 40), block("a", 40, 40, 40, x=200)))

    def test_object_outside_table_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            Scene(objects=(block("a", 40, 40, 40, x=600),), table=(1000, 1000))

    def test_unknown_lookups_raise_keyerror(self):
        scene = demo_scene()
        with pytest.raises(KeyError):
            scene.object("purple")
        with pytest.raises(KeyError):
            scene.target_position("shelf")

    def test_replace_object_returns_new_scene(self):
        scene = demo_scene()
        moved = scene.replace_object(
            SceneObject("red", "red", "small", (40, 40), 40, (0, 0))
        )
        assert moved is not scene
        assert moved.object("red").position == (0.0, 0.0)
        assert scene.object("red").position == (-100.0, 150.0)

    def test_dict_roundtrip(self):
        scene = demo_scene()
        assert scene_from_dict(scene_to_dict(scene)) == scene


# ---------------------------------------------------------------------------
# Stability margins


class TestStability:
    def test_empty_stack_is_stable(self):
        scene = demo_scene()
        report = check_stability(StackState(target_position=(0, -250)), scene)
        assert report == StabilityReport(stable=True, margins=(), overlap_ratios=())

    def test_single_block_margin_is_half_min_extent(self):
        # 80x80 footprint centered on its own base: 40 mm to every edge.
        scene = demo_scene()
        stack = tower(scene, [("green", 0, -250)], target=(0, -250))
        report = check_stability(stack, scene)
        assert report.stable
        assert report.margins == (40.0,)
        assert report.overlap_ratios == (1.0,)

    def test_small_centered_on_large(self):
        scene = demo_scene()
        stack = tower(scene, [("green", 0, -250), ("red", 0, -250)], target=(0, -250))
        report = check_stability(stack, scene)
        assert report.stable
        # Both loads sit dead center over the 80x80 base.
        assert report.margins == (40.0, 40.0)
        assert report.overlap_ratios == (1.0, 1.0)

    def test_small_on_large_offset_45_overhangs_by_5(self):
        scene = demo_scene()
        stack = tower(scene, [("green", 0, -250), ("red", 45, -250)], target=(0, -250))
        report = check_stability(stack, scene)
        assert not report.stable
        assert report.margins[1] == -5.0
        # 40x40 top shifted 45: only a 15x40 sliver lies over the base.
        assert report.overlap_ratios[1] == pytest.approx(15 * 40 / 1600)
        # The base still holds the combined center of mass.
        assert report.margins[0] > 0.0

    def test_margin_zero_on_the_edge_counts_as_stable(self):
        scene = demo_scene()
        stack = tower(scene, [("green", 0, -250), ("red", 40, -250)], target=(0, -250))
        report = check_stability(stack, scene)
        assert report.stable
        assert report.margins[1] == 0.0

    def test_combined_com_fails_where_pairwise_checks_pass(self):
        # Three 80x80 layers: base and mid 40 tall, cap 80 tall, so the cap
        # weighs twice either slab.  Mid sits at +35, cap at +60.
        scene = Scene(
            objects=(
                block("base", 80, 80, 40),
                block("mid", 80, 80, 40, x=200),
                block("cap", 80, 80, 80, x=-200),
            )
        )
        stack = tower(scene, [("base", 0, 0), ("mid", 35, 0), ("cap", 60, 0)])

        # Adjacent pairs look fine in isolation: each layer's own center sits
        # inside the footprint directly beneath it.
        assert abs(35 - 0) < 40  # mid over base
        assert abs(60 - 35) < 40  # cap over mid

        report = check_stability(stack, scene)
        assert not report.stable
        # Mid+cap center of mass: (1*35 + 2*60) / 3 = 155/3, well past the
        # base half extent of 40.
        assert report.margins[1] == pytest.approx(40 - 155 / 3)
        assert report.margins[1] < 0
        # The whole-stack load stays on the table footprint, so the failure
        # is attributable to the mid interface, not the ground contact.
        assert report.margins[0] == pytest.approx(40 - 155 / 4)
        assert report.margins[0] > 0

    def test_support_column_narrows_with_depth(self):
        # Layer 2 must stand over the intersection of both footprints below,
        # not just over layer 1.
        scene = Scene(
            objects=(
                block("base", 80, 80, 40),
                block("mid", 80, 80, 40, x=200),
                block("cap", 40, 40, 40, x=-200),
            )
        )
        # Cap is centered on mid, but mid hangs 30 to the right of base, so
        # the shared column only spans x in [-10, 40].
        stack = tower(scene, [("base", 0, 0), ("mid", 30, 0), ("cap", 30, 0)])
        report = check_stability(stack, scene)
        assert report.margins[2] == pytest.approx(10.0)
        # Fully over mid, but a quarter of the cap pokes past the column.
        assert report.overlap_ratios[2] == pytest.approx(0.75)

    def test_fully_outside_support_margin_is_euclidean(self):
        scene = Scene(objects=(block("base", 80, 80, 40), block("cap", 40, 40, 40, x=200)))
        stack = tower(scene, [("base", 0, 0), ("cap", 70, 70)])
        report = check_stability(stack, scene)
        # Past the corner on both axes: distance to the corner (30, 30).
        assert report.margins[1] == pytest.approx(-math.hypot(30, 30))
        assert report.overlap_ratios[1] == pytest.approx(0.0)

    def test_centered_same_footprint_towers_stable_to_depth_ten(self):
        for depth in range(1, 11):
            scene = Scene(
                objects=tuple(
                    block(f"b{i}", 50, 50, 30, x=-400 + 60 * i) for i in range(depth)
                )
            )
            stack = tower(scene, [(f"b{i}", 0, 0) for i in range(depth)])
            report = check_stability(stack, scene)
            assert report.stable
            assert report.margins == (25.0,) * depth
            assert report.overlap_ratios == (1.0,) * depth

    def test_report_invariants_enforced(self):
        with pytest.raises(ValueError, match="inconsistent"):
            StabilityReport(stable=True, margins=(-1.0,), overlap_ratios=(1.0,))
        with pytest.raises(ValueError, match="align"):
            StabilityReport(stable=True, margins=(1.0,), overlap_ratios=())
        with pytest.raises(ValueError, match="ratios"):
            StabilityReport(stable=True, margins=(1.0,), overlap_ratios=(1.5,))


@given(
    w=st.integers(min_value=10, max_value=100).map(lambda v: 2 * v),
    d=st.integers(min_value=10, max_value=100).map(lambda v: 2 * v),
    top_w=st.integers(min_value=10, max_value=200),
    top_h=st.integers(min_value=10, max_value=120),
    overhang=st.integers(min_value=1, max_value=80),
)
def test_overhang_margin_is_exact(w, d, top_w, top_h, overhang):
    """A top block pushed past the support edge reads back the overhang."""
    dx = w / 2 + overhang
    scene = Scene(
        objects=(block("base", w, d, 40), block("top", top_w, d, top_h, x=300))
    )
    stack = tower(scene, [("base", 0, 0), ("top", dx, 0)])
    report = check_stability(stack, scene)
    assert not report.stable
    assert report.margins[1] == -float(overhang)


@given(
    dx=st.integers(min_value=-300, max_value=300),
    dy=st.integers(min_value=-300, max_value=300),
    offsets=st.lists(
        st.tuples(
            st.integers(min_value=-60, max_value=60),
            st.integers(min_value=-60, max_value=60),
        ),
        min_size=1,
        max_size=4,
    ),
)
def test_translation_invariance_is_exact(dx, dy, offsets):
    """Integer translations of the whole stack leave the report bit-identical."""
    scene = Scene(
        objects=tuple(
            block(f"b{i}", 80 - 10 * i, 80 - 10 * i, 30, x=-400 + 100 * i)
            for i in range(len(offsets))
        ),
        table=(2000, 2000),
    )

    def report_at(tx, ty):
        specs = [(f"b{i}", tx + ox, ty + oy) for i, (ox, oy) in enumerate(offsets)]
        return check_stability(tower(scene, specs, target=(tx, ty)), scene)

    assert report_at(dx, dy) == report_at(0, 0)


# ---------------------------------------------------------------------------
# Ghost projection


class TestProjection:
    def test_ghost_preview_marks_object_and_keeps_inputs_pure(self):
        scene = demo_scene()
        stack = StackState(target_position=scene.target_position("stack"))
        before_scene = copy.deepcopy(scene)
        before_stack = copy.deepcopy(stack)

        plan = resolve_plan(scene, stack, "green")
        ghost, report = project_future_state(scene, stack, plan)

        assert scene == before_scene
        assert stack == before_stack
        shown = ghost.object("green")
        assert shown.ghost is True
        assert shown.position == (0.0, -250.0)
        assert shown.elevation == 0.0
        assert report.stable
        # Everything else is untouched.
        for other in ("red", "blue", "yellow"):
            assert ghost.object(other) == scene.object(other)

    def test_ghost_reports_match_commit_reports(self):
        scene = demo_scene()
        stack = StackState(target_position=scene.target_position("stack"))
        plan = resolve_plan(scene, stack, "green")
        _, preview = project_future_state(scene, stack, plan)
        _, _, committed = apply_placement(scene, stack, plan)
        assert preview == committed

    def test_projecting_a_stacked_object_is_an_error(self):
        scene = demo_scene()
        stack = StackState(target_position=(0, -250))
        scene, stack, _ = apply_placement(scene, stack, resolve_plan(scene, stack, "green"))
        with pytest.raises(ValueError, match="already stacked"):
            resolve_plan(scene, stack, "green")
        plan = PlacementPlan("green", (0.0, 0.0), Pose(0.0, -250.0, 60.0, 0.0))
        with pytest.raises(ValueError, match="already stacked"):
            project_future_state(scene, stack, plan)


# ---------------------------------------------------------------------------
# Collision


class TestCollision:
    def scene_with_wall(self, x, y, h=40):
        return Scene(
            objects=(
                block("mover", 40, 40, 40, x=-300),
                block("wall", 40, 40, h, x=x, y=y),
            ),
            targets={"spot": (0, 0)},
        )

    def test_clear_target_has_no_collision(self):
        scene = self.scene_with_wall(300, 300)
        plan = resolve_plan(scene, StackState(target_position=(0, 0)), "mover")
        assert check_collision(scene, plan) is False

    def test_occupied_target_collides(self):
        scene = self.scene_with_wall(10, -10)
        plan = resolve_plan(scene, StackState(target_position=(0, 0)), "mover")
        assert check_collision(scene, plan) is True

    def test_touching_faces_do_not_collide(self):
        scene = self.scene_with_wall(40, 0)
        plan = resolve_plan(scene, StackState(target_position=(0, 0)), "mover")
        assert check_collision(scene, plan) is False

    def test_placement_above_a_short_obstacle_clears_it(self):
        # A 40-tall wall under the target does not reach a layer at z=80.
        scene = Scene(
            objects=(
                block("base", 80, 80, 80, x=-300),
                block("mover", 40, 40, 40, x=300),
                block("wall", 40, 40, 40),
            ),
            targets={"spot": (0, 0)},
        )
        stack = StackState(target_position=(0, 0))
        plan = PlacementPlan("base", (0.0, 0.0), Pose(0.0, 0.0, 0.0, 0.0))
        assert check_collision(scene, plan, stack) is True
        scene2, stack2, _ = apply_placement(scene, stack, plan, force=True)
        high = resolve_plan(scene2, stack2, "mover")
        assert high.pose.z == 80.0
        assert check_collision(scene2, high, stack2) is False

    def test_stacked_objects_are_not_obstacles(self):
        scene = demo_scene()
        stack = StackState(target_position=(0, -250))
        scene, stack, _ = apply_placement(scene, stack, resolve_plan(scene, stack, "green"))
        plan = resolve_plan(scene, stack, "red")
        # Green now occupies the target but belongs to the stack.
        assert check_collision(scene, plan, stack) is False


# ---------------------------------------------------------------------------
# Commits


class TestCommit:
    def test_demo_sequence_builds_the_tower(self):
        scene = demo_scene()
        stack = StackState(target_position=scene.target_position("stack"))
        for object_id in ("green", "red", "blue"):
            plan = resolve_plan(scene, stack, object_id)
            scene, stack, report = apply_placement(scene, stack, plan)
            assert report.stable

        assert [layer.object_id for layer in stack.layers] == ["green", "red", "blue"]
        assert [layer.pose.z for layer in stack.layers] == [0.0, 60.0, 100.0]
        assert stack_top_z(scene, stack) == 140.0
        assert [o.id for o in table_objects(scene, stack)] == ["yellow"]
        report = check_stability(stack, scene)
        assert report.stable and all(m > 0 for m in report.margins)

    def test_unstable_commit_refused_without_force(self):
        scene = demo_scene()
        stack = StackState(target_position=(0, -250))
        scene, stack, _ = apply_placement(scene, stack, resolve_plan(scene, stack, "green"))
        bad = resolve_plan(scene, stack, "red", offset=(45, 0))
        with pytest.raises(StabilityRefused) as err:
            apply_placement(scene, stack, bad)
        assert err.value.report.margins[1] == -5.0
        assert not stack.contains("red")

        forced_scene, forced_stack, report = apply_placement(scene, stack, bad, force=True)
        assert forced_stack.contains("red")
        assert not report.stable
        assert forced_scene.object("red").elevation == 60.0

    def test_duplicate_layer_rejected_by_stack_state(self):
        layer = StackLayer("green", Pose(0.0, 0.0, 0.0, 0.0))
        with pytest.raises(ValueError, match="more than once"):
            StackState(target_position=(0, 0), layers=(layer, layer))
