"""Toy environment determinism, physics oracles, and policy statistics."""

import numpy as np
import pytest

from envsim.envs import (
    BallPaddleEnv,
    DitherPolicy,
    GridMazeEnv,
    MazeWalkSpinPolicy,
    TrackerPolicy,
    env_names,
    make_env,
    record_step,
)
from envsim.errors import DimensionError


class TestBallPaddle:
    def test_replay_determinism(self):
        rng = np.random.default_rng(0)
        actions = rng.integers(0, 3, size=200)
        frames_a = [make_env("ballpaddle32", 7).render()]
        env = make_env("ballpaddle32", 7)
        for a in actions:
            frames_a.append(env.step(int(a)))
        env2 = make_env("ballpaddle32", 7)
        frames_b = [env2.render()]
        for a in actions:
            frames_b.append(env2.step(int(a)))
        for fa, fb in zip(frames_a, frames_b):
            assert np.array_equal(fa, fb)

    def test_noop_moves_ball_by_velocity(self):
        env = make_env("ballpaddle32", 3)
        # place the ball mid-field, far from any wall or the paddle
        env.ball_x, env.ball_y = 10, 12
        env.vel_x, env.vel_y = 1, -1
        env.step(2)
        assert (env.ball_x, env.ball_y) == (11, 11)
        env.step(2)
        assert (env.ball_x, env.ball_y) == (12, 10)

    def test_wall_bounce(self):
        env = make_env("ballpaddle32", 3)
        env.ball_x, env.ball_y = env.X_MAX, 12
        env.vel_x, env.vel_y = 1, -1
        env.step(2)
        assert env.ball_x == env.X_MAX and env.vel_x == -1

    def test_paddle_bounce_and_miss(self):
        env = make_env("ballpaddle32", 3)
        env.paddle_x = 10
        env.ball_x, env.ball_y = 12, 27
        env.vel_x, env.vel_y = 0, 1
        env.step(2)
        assert env.vel_y == -1 and env.ball_y == env.Y_BOUNCE
        # now a miss: ball far from the paddle
        env.paddle_x = 1
        env.ball_x, env.ball_y = 25, 27
        env.vel_x, env.vel_y = 0, 1
        misses = env.misses
        env.step(2)
        assert env.misses == misses + 1
        assert env.ball_y == 5  # respawned near the top

    def test_score_strip_renders_misses(self):
        env = make_env("ballpaddle32", 3)
        env.misses = 3
        frame = env.render()  # (3, 32, 32)
        strip = frame[:, 0:2, :]
        assert np.array_equal(strip[:, 0, 0], [220, 40, 40])
        assert np.array_equal(strip[:, 0, 5], [220, 40, 40])
        assert not strip[:, 0, 6:].any()

    def test_paddle_clamped(self):
        env = make_env("ballpaddle32", 3)
        env.ball_y = 10  # keep the ball away from the paddle plane
        env.vel_y = -1
        for _ in range(5):
            if env.ball_y < 6:
                env.vel_y = 1
            env.step(0)
        assert env.paddle_x >= 1

    def test_invalid_action(self):
        with pytest.raises(DimensionError):
            make_env("ballpaddle32", 0).step(3)


class TestGridMaze:
    def test_replay_determinism(self):
        rng = np.random.default_rng(1)
        actions = rng.integers(0, 5, size=300)
        e1, e2 = make_env("gridmaze48", 11), make_env("gridmaze48", 11)
        for a in actions:
            f1, f2 = e1.step(int(a)), e2.step(int(a))
        assert np.array_equal(f1, f2)
        assert e1.pos == e2.pos and e1.heading == e2.heading

    def test_rotate_left_four_times_is_identity(self):
        env = make_env("gridmaze48", 5)
        for _ in range(20):  # wander a bit first
            env.step(0)
            env.step(3)
        pose = (env.pos, env.heading)
        ref = env.render()
        for _ in range(4):
            frame = env.step(2)
        assert (env.pos, env.heading) == pose
        assert np.array_equal(frame, ref)

    def test_rotation_changes_frame(self):
        env = make_env("gridmaze48", 5)
        before = env.render()
        after = env.step(2)
        assert not np.array_equal(before, after)

    def test_forward_moves_one_open_cell(self):
        env = make_env("gridmaze48", 9)
        # find a heading with an open neighbor
        from envsim.envs import _HEADING_DELTAS
        r, c = env.pos
        for h, (dr, dc) in enumerate(_HEADING_DELTAS):
            if not env.walls[r + dr, c + dc]:
                env.heading = h
                env.step(0)
                assert env.pos == (r + dr, c + dc)
                env.step(1)  # backward returns
                assert env.pos == (r, c)
                break
        else:
            pytest.fail("agent boxed in at start")

    def test_forward_blocked_by_wall(self):
        env = make_env("gridmaze48", 9)
        from envsim.envs import _HEADING_DELTAS
        r, c = env.pos
        for h, (dr, dc) in enumerate(_HEADING_DELTAS):
            if env.walls[r + dr, c + dc]:
                env.heading = h
                env.step(0)
                assert env.pos == (r, c)
                break

    def test_view_is_agent_centered(self):
        env = make_env("gridmaze48", 13)
        frame = env.render()  # (3, 48, 48); agent cell at view cell (8, 8)
        px = 8 * env.CELL_PX
        center = frame[:, px:px + 3, px:px + 3]
        # the agent stands on an open (floor) cell: dark pixels
        assert center.max() < 60

    def test_maze_structure(self):
        env = make_env("gridmaze48", 21)
        walls = env.walls
        assert walls[0].all() and walls[-1].all()
        assert walls[:, 0].all() and walls[:, -1].all()
        reach = env.reachable_cells()
        # tree over the 7x7 odd lattice: 49 nodes + 48 corridor cells
        assert len(reach) == 97
        open_cells = {(r, c) for r in range(16) for c in range(16) if not walls[r, c]}
        assert reach == open_cells  # fully connected

    def test_different_seeds_differ(self):
        assert not np.array_equal(make_env("gridmaze48", 1).walls,
                                  make_env("gridmaze48", 2).walls)


class TestPoliciesAndRepeat:
    def test_record_step_applies_tick_repeat(self):
        env = make_env("ballpaddle32", 0)
        env.ball_x, env.ball_y = 10, 10
        env.vel_x, env.vel_y = 1, 1
        record_step(env, 2)  # 4 ticks
        assert (env.ball_x, env.ball_y) == (14, 14)

    def test_maze_has_no_tick_repeat(self):
        env = make_env("gridmaze48", 0)
        h0 = env.heading
        record_step(env, 2)
        assert env.heading == (h0 - 1) % 4

    def test_tracker_policy_tracks(self):
        env = make_env("ballpaddle32", 0)
        env.ball_x = 25
        env.paddle_x = 2
        policy = TrackerPolicy(np.random.default_rng(0), eps=0.0)
        assert policy(env) == 1  # move right toward the ball
        env.ball_x = 2
        env.paddle_x = 20
        assert policy(env) == 0

    def test_maze_policy_spin_phase_constant(self):
        policy = MazeWalkSpinPolicy(np.random.default_rng(0))
        env = make_env("gridmaze48", 0)
        acts = [policy(env) for _ in range(30)]
        spin = acts[15:30]
        assert len(set(spin)) == 1
        assert spin[0] in (2, 3)

    def test_dither_statistics(self):
        # each step resamples a genuinely new action with p=0.7
        policy = DitherPolicy(np.random.default_rng(42), dither=0.7)
        actions = [policy() for _ in range(1001)]
        changes = sum(a != b for a, b in zip(actions, actions[1:]))
        n, p = 1000, 0.7
        sigma = np.sqrt(n * p * (1 - p))
        assert abs(changes - n * p) < 3 * sigma

    def test_walk_phase_dither_statistics(self):
        rng = np.random.default_rng(7)
        policy = MazeWalkSpinPolicy(rng, dither=0.7, phase_len=10**9)  # stay walking
        env = make_env("gridmaze48", 0)
        actions = [policy(env) for _ in range(1001)]
        changes = sum(a != b for a, b in zip(actions, actions[1:]))
        n, p = 1000, 0.7
        sigma = np.sqrt(n * p * (1 - p))
        assert abs(changes - n * p) < 3 * sigma

    def test_env_names(self):
        assert env_names() == ["ballpaddle32", "gridmaze48"]
        with pytest.raises(DimensionError):
            make_env("pong", 0)
