import numpy as np
import pytest

from intentstack.intent import (
    DegenerateTask,
    IntentTask,
    ObservationConfig,
    RewardConfig,
    build_model,
    gaze_observation_row,
    generate_question,
    parse_utterance,
    task_from_dict,
    task_to_dict,
)
from intentstack.pomdp import (
    action_kind,
    belief_update,
    best_action,
    make_belief,
    uniform_belief,
    validate_model,
)
from intentstack.presets import demo_scene, three_block_task
from intentstack.scene import Scene, SceneObject
from intentstack.solver import SolverConfig, solve


def scene_with(*objects) -> Scene:
    return Scene(objects=tuple(objects), table=(1000, 1000), targets={"stack": (0.0, -250.0)})


def block(oid, color, size, x, y, footprint=(40, 40), height=40):
    return SceneObject(
        id=oid, color=color, size=size, footprint=footprint, height=height, position=(x, y)
    )


# -- model compilation -----------------------------------------------------


def test_three_candidate_model_counts():
    m = build_model(demo_scene(), three_block_task(), ObservationConfig(), RewardConfig(), 0.99)
    assert len(m.states) == 4
    assert len(m.actions) == 1 + 2 + 3
    # 3 gaze tokens + 3 color tokens + 2 size tokens + null
    assert len(m.observations) == 9
    assert m.states[-1] == "terminal"
    assert validate_model(m) == []


def test_ask_color_row_for_green_state():
    m = build_model(demo_scene(), three_block_task(), ObservationConfig(), RewardConfig(), 0.99)
    ai = m.action_index("ask_color")
    si = m.state_index("green")
    row = {z: m.observation_fn[ai, si, m.obs_index(z)] for z in m.observations}
    assert row["color_green"] == pytest.approx(0.8)
    assert row["color_red"] == pytest.approx(0.1)
    assert row["color_blue"] == pytest.approx(0.1)
    assert sum(row.values()) == pytest.approx(1.0)


def test_shared_color_channel_is_uninformative():
    scene = scene_with(
        block("a", "red", "small", -100, 0),
        block("b", "red", "large", 100, 0, footprint=(80, 80), height=60),
    )
    task = IntentTask(candidates=("a", "b"))
    m = build_model(scene, task, ObservationConfig(), RewardConfig(), 0.99)
    ai = m.action_index("ask_color")
    row_a = m.observation_fn[ai, m.state_index("a")]
    row_b = m.observation_fn[ai, m.state_index("b")]
    assert np.array_equal(row_a, row_b)
    assert any("color" in w for w in m.metadata["warnings"])


def test_transition_structure():
    m = build_model(demo_scene(), three_block_task(), ObservationConfig(), RewardConfig(), 0.99)
    terminal = m.state_index("terminal")
    for a in m.actions:
        ai = m.action_index(a)
        if action_kind(a) in ("gaze", "ask"):
            assert np.array_equal(m.transition[ai], np.eye(len(m.states)))
        else:
            assert np.all(m.transition[ai, :, terminal] == 1.0)


def test_reward_structure_and_terminal_row():
    rew = RewardConfig()
    m = build_model(demo_scene(), three_block_task(), ObservationConfig(), rew, 0.99)
    terminal = m.state_index("terminal")
    assert np.all(m.reward[terminal, :] == 0.0)
    for cand in ("green", "red", "blue"):
        si = m.state_index(cand)
        ai = m.action_index(f"project_{cand}")
        assert m.reward[si, ai] == rew.r_correct
        other = m.state_index("red" if cand != "red" else "blue")
        assert m.reward[other, ai] == rew.r_incorrect
        assert m.reward[si, m.action_index("gaze")] == rew.c_gaze
        assert m.reward[si, m.action_index("ask_color")] == rew.c_ask


def test_projection_emits_null_deterministically():
    m = build_model(demo_scene(), three_block_task(), ObservationConfig(), RewardConfig(), 0.99)
    zi = m.obs_index("null")
    for cand in ("green", "red", "blue"):
        ai = m.action_index(f"project_{cand}")
        assert np.all(m.observation_fn[ai, :, zi] == 1.0)


def test_single_candidate_task_is_degenerate():
    with pytest.raises(DegenerateTask):
        build_model(
            demo_scene(),
            IntentTask(candidates=("green",)),
            ObservationConfig(),
            RewardConfig(),
            0.99,
        )


def test_relabeling_equivariance():
    scene = demo_scene()
    task = three_block_task()
    permuted = IntentTask(candidates=(task.candidates[2], task.candidates[0], task.candidates[1]))
    obs, rew = ObservationConfig(), RewardConfig()
    m1 = build_model(scene, task, obs, rew, 0.99)
    m2 = build_model(scene, permuted, obs, rew, 0.99)
    s_map = [m2.state_index(s) for s in m1.states]
    a_map = [m2.action_index(a) for a in m1.actions]
    z_map = [m2.obs_index(z) for z in m1.observations]
    t_re = m2.transition[np.ix_(a_map, s_map, s_map)]
    o_re = m2.observation_fn[np.ix_(a_map, s_map, z_map)]
    r_re = m2.reward[np.ix_(s_map, a_map)]
    assert np.array_equal(t_re, m1.transition)
    assert np.array_equal(o_re, m1.observation_fn)
    assert np.array_equal(r_re, m1.reward)


# -- gaze rows -------------------------------------------------------------


def test_gaze_row_uniform_error():
    row = gaze_observation_row(demo_scene(), three_block_task(), "green", ObservationConfig())
    assert row == pytest.approx([0.8, 0.1, 0.1])


def test_gaze_row_proximity_weighted():
    scene = scene_with(
        block("true", "green", "small", 0, 0),
        block("near", "red", "small", 50, 0),
        block("far", "blue", "small", 500, 0),
    )
    task = IntentTask(candidates=("true", "near", "far"))
    obs = ObservationConfig(gaze_mode="proximity_weighted", gaze_length_scale=100.0)
    row = gaze_observation_row(scene, task, "true", obs)
    assert row[0] == pytest.approx(0.8)
    assert row[1] > row[2]
    assert row.sum() == pytest.approx(1.0)


def test_gaze_row_perfect_accuracy_one_hot():
    row = gaze_observation_row(
        demo_scene(), three_block_task(), "red", ObservationConfig(p_correct=1.0)
    )
    assert row == pytest.approx([0.0, 1.0, 0.0])


# -- grammar ---------------------------------------------------------------


def test_parse_color():
    assert parse_utterance("green", "color").value == "green"
    assert parse_utterance("  GREEN ", "color").value == "green"
    assert parse_utterance("the green one please", "color").value == "green"


def test_parse_confirmation():
    assert parse_utterance("yes", "confirmation").value is True
    assert parse_utterance("nope", "confirmation").value is False
    assert parse_utterance("confirm", "confirmation").value is True


def test_parse_size_synonyms():
    assert parse_utterance("the big one", "size").value == "large"
    assert parse_utterance("tiny", "size").value == "small"
    assert parse_utterance("a little block please", "size").value == "small"


def test_parse_unknown_cases():
    assert parse_utterance("banana", "color").is_unknown
    assert parse_utterance("", "size").is_unknown
    # conflicting mentions cancel out
    assert parse_utterance("red or blue", "color").is_unknown
    # wrong category words do not leak across channels
    assert parse_utterance("green", "size").is_unknown


def test_parse_never_raises_on_noise():
    for text in ("!!!", "yes no", "large small", "12345", "   "):
        for expected in ("color", "size", "confirmation"):
            assert parse_utterance(text, expected).is_unknown


def test_question_templates():
    scene = demo_scene()
    assert generate_question("ask_color", scene) == "What color is the object you want?"
    assert generate_question("ask_size", scene) == "What size is the object you want?"
    assert generate_question("gaze", scene) == "Please look at the object you want next."
    assert (
        generate_question("project_green", scene)
        == "Place the large green block here. Is this correct?"
    )


# -- config validation -----------------------------------------------------


def test_observation_config_validation():
    with pytest.raises(ValueError):
        ObservationConfig(p_correct=0.0)
    with pytest.raises(ValueError):
        ObservationConfig(p_correct=1.2)
    with pytest.raises(ValueError):
        ObservationConfig(gaze_mode="proximity_weighted")
    ObservationConfig(gaze_mode="proximity_weighted", gaze_length_scale=50.0)


def test_reward_config_validation():
    with pytest.raises(ValueError):
        RewardConfig(c_gaze=-3.0, c_ask=-2.0)
    with pytest.raises(ValueError):
        RewardConfig(r_correct=-1.0)
    with pytest.raises(ValueError):
        RewardConfig(r_incorrect=1.0)


def test_task_roundtrip_and_validation():
    task = three_block_task()
    assert task_from_dict(task_to_dict(task)) == task
    with pytest.raises(ValueError):
        IntentTask(candidates=())
    with pytest.raises(ValueError):
        IntentTask(candidates=("a", "a"))


# -- solved-policy properties ---------------------------------------------


def test_reward_scaling_leaves_best_action_unchanged():
    scene = demo_scene()
    task = three_block_task()
    obs = ObservationConfig()
    scale = 3.0
    base = RewardConfig()
    scaled = RewardConfig(
        r_correct=base.r_correct * scale,
        r_incorrect=base.r_incorrect * scale,
        c_gaze=base.c_gaze * scale,
        c_ask=base.c_ask * scale,
    )
    config = SolverConfig(epsilon=0.5, max_backups=20000, max_seconds=None)
    m1 = build_model(scene, task, obs, base, 0.99)
    m2 = build_model(scene, task, obs, scaled, 0.99)
    b0 = uniform_belief(m1, over=m1.states[:-1])
    p1, _ = solve(m1, b0, config)
    config2 = SolverConfig(epsilon=0.5 * scale, max_backups=20000, max_seconds=None)
    p2, _ = solve(m2, b0, config2)
    rng = np.random.default_rng(41)
    beliefs = [b0] + [
        make_belief(list(x) + [0.0]) for x in rng.dirichlet(np.ones(3), size=25)
    ]
    for b in beliefs:
        assert best_action(p1, b, m1.actions) == best_action(p2, b, m2.actions)


def test_perfect_observations_project_within_two_steps():
    m = build_model(
        demo_scene(), three_block_task(), ObservationConfig(p_correct=1.0), RewardConfig(), 0.99
    )
    b0 = uniform_belief(m, over=m.states[:-1])
    policy, stats = solve(m, b0, SolverConfig(epsilon=0.5, max_backups=20000, max_seconds=None))
    assert stats.converged
    # every deterministic observation branch must reach a project action in
    # at most two information-gathering steps
    frontier = [(b0, 0)]
    while frontier:
        b, steps = frontier.pop()
        a = best_action(policy, b, m.actions)
        if action_kind(a) == "project":
            continue
        assert steps < 2, f"still gathering after {steps} steps via {a}"
        ai = m.action_index(a)
        for zi, z in enumerate(m.observations):
            prob = float(
                m.observation_fn[ai, :, zi] @ (b @ m.transition[ai])
            )
            if prob > 0.0:
                frontier.append((belief_update(m, b, a, z), steps + 1))
