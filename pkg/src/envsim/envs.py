"""Deterministic toy pixel environments and scripted data-collection policies.

ballpaddle32: a 32x32 RGB paddle-and-ball field.  The ball bounces off the
side/top walls and the player paddle; a miss increments a score strip rendered
as pixels along the top rows and respawns the ball.  Actions: left, right,
noop.

gridmaze48: a 48x48 RGB egocentric rendering of a procedurally generated
16x16-cell maze (3 px per cell).  The view is centered on the agent and
rotated so the agent always faces up; per-cell wall colors are a deterministic
hash of the cell coordinates, giving every corridor a recognizable texture.
Actions: forward, backward, rotate-left, rotate-right, noop.

Both environments are pure state machines: a fixed seed plus a fixed action
sequence replays bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

BALL_COLOR = (255, 220, 100)
PADDLE_COLOR = (0, 200, 255)
WALL_COLOR = (128, 128, 128)
SCORE_COLOR = (220, 40, 40)
FLOOR_COLOR = (25, 25, 35)


@dataclass(frozen=True)
class EnvSpec:
    name: str
    frame_shape: tuple[int, int, int]
    n_actions: int
    action_names: tuple[str, ...]
    action_repeat: int
    episode_len: int
    codec_profile: str


ENV_SPECS = {
    "ballpaddle32": EnvSpec(
        name="ballpaddle32",
        frame_shape=(3, 32, 32),
        n_actions=3,
        action_names=("left", "right", "noop"),
        action_repeat=4,
        episode_len=500,
        codec_profile="toy32",
    ),
    "gridmaze48": EnvSpec(
        name="gridmaze48",
        frame_shape=(3, 48, 48),
        n_actions=5,
        action_names=("forward", "backward", "rotate-left", "rotate-right", "noop"),
        # rotations are exact 90-degree turns per tick, so recording every
        # tick keeps a 15-step spin close to one full turn per the maze
        # data-collection protocol
        action_repeat=1,
        episode_len=900,
        codec_profile="maze48",
    ),
}


def env_names() -> list[str]:
    return sorted(ENV_SPECS)


class BallPaddleEnv:
    """32x32 paddle/ball field with a pixel-rendered miss counter."""

    spec = ENV_SPECS["ballpaddle32"]

    PADDLE_W = 7
    PADDLE_Y = 29      # paddle occupies rows 29-30
    X_MIN, X_MAX = 1, 29   # ball left-edge range (ball is 2x2)
    Y_MIN = 3
    Y_BOUNCE = 27      # ball top row when bouncing off the paddle

    def __init__(self, seed: int = 0):
        self.reset(seed)

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self._seed = seed
        self.rng = np.random.default_rng(self._seed)
        self.paddle_x = 12
        self.misses = 0
        self._respawn()
        return self.render()

    def _respawn(self):
        self.ball_x = int(self.rng.integers(3, 28))
        self.ball_y = 5
        self.vel_x = int(self.rng.choice([-1, 1]))
        self.vel_y = 1

    def step(self, action: int) -> np.ndarray:
        """One tick: move the paddle, then the ball, then resolve bounces."""
        if not 0 <= action < self.spec.n_actions:
            raise DimensionError(f"invalid action {action} for ballpaddle32")
        if action == 0:
            self.paddle_x = max(1, self.paddle_x - 1)
        elif action == 1:
            self.paddle_x = min(31 - self.PADDLE_W, self.paddle_x + 1)

        nx = self.ball_x + self.vel_x
        ny = self.ball_y + self.vel_y
        if nx < self.X_MIN:
            nx, self.vel_x = self.X_MIN, 1
        elif nx > self.X_MAX:
            nx, self.vel_x = self.X_MAX, -1
        if ny < self.Y_MIN:
            ny, self.vel_y = self.Y_MIN, 1
        elif ny >= self.PADDLE_Y - 1:  # ball bottom would enter the paddle row
            hit = (nx + 1 >= self.paddle_x) and (nx <= self.paddle_x + self.PADDLE_W - 1)
            if hit:
                ny, self.vel_y = self.Y_BOUNCE, -1
                self.ball_x, self.ball_y = nx, ny
                return self.render()
            self.misses += 1
            self._respawn()
            return self.render()
        self.ball_x, self.ball_y = nx, ny
        return self.render()

    def render(self) -> np.ndarray:
        img = np.zeros((32, 32, 3), dtype=np.uint8)
        img[2, :, :] = WALL_COLOR
        img[2:, 0, :] = WALL_COLOR
        img[2:, 31, :] = WALL_COLOR
        img[31, :, :] = WALL_COLOR
        for i in range(self.misses % 16):
            img[0:2, 2 * i:2 * i + 2] = SCORE_COLOR
        img[self.PADDLE_Y:self.PADDLE_Y + 2,
            self.paddle_x:self.paddle_x + self.PADDLE_W] = PADDLE_COLOR
        img[self.ball_y:self.ball_y + 2, self.ball_x:self.ball_x + 2] = BALL_COLOR
        return img.transpose(2, 0, 1).copy()


# headings clockwise from north; row/col deltas in screen coordinates
_HEADING_DELTAS = ((-1, 0), (0, 1), (1, 0), (0, -1))


def _carve_maze(seed: int, cells: int = 16) -> np.ndarray:
    """Depth-first tree maze on the odd lattice; True marks walls."""
    rng = np.random.default_rng(seed)
    walls = np.ones((cells, cells), dtype=bool)
    nodes = [(r, c) for r in range(1, cells - 2, 2) for c in range(1, cells - 2, 2)]
    start = nodes[0]
    walls[start] = False
    stack = [start]
    visited = {start}
    while stack:
        r, c = stack[-1]
        options = []
        for dr, dc in ((-2, 0), (2, 0), (0, -2), (0, 2)):
            nr, nc = r + dr, c + dc
            if 1 <= nr < cells - 2 and 1 <= nc < cells - 2 and (nr, nc) not in visited:
                options.append((nr, nc))
        if not options:
            stack.pop()
            continue
        nr, nc = options[rng.integers(len(options))]
        walls[(r + nr) // 2, (c + nc) // 2] = False
        walls[nr, nc] = False
        visited.add((nr, nc))
        stack.append((nr, nc))
    return walls


def _wall_color(seed: int, r: int, c: int) -> np.ndarray:
    h = (r * 2654435761 + c * 40503 + seed * 97 + 12345) & 0xFFFFFFFF
    return np.array([150 + (h % 90), 150 + ((h >> 8) % 90), 150 + ((h >> 16) % 90)],
                    dtype=np.uint8)


class GridMazeEnv:
    """Egocentric maze view; the agent sits at the view center facing up."""

    spec = ENV_SPECS["gridmaze48"]

    CELLS = 16
    CELL_PX = 3

    def __init__(self, seed: int = 0):
        self.reset(seed)

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self._seed = seed
        self.walls = _carve_maze(self._seed, self.CELLS)
        self.pos = (1, 1)
        self.heading = 0
        self._cell_colors = self._paint_cells()
        return self.render()

    def _paint_cells(self) -> np.ndarray:
        colors = np.zeros((self.CELLS, self.CELLS, 3), dtype=np.uint8)
        for r in range(self.CELLS):
            for c in range(self.CELLS):
                if self.walls[r, c]:
                    colors[r, c] = _wall_color(self._seed, r, c)
                else:
                    base = np.array(FLOOR_COLOR, dtype=np.int16)
                    base += 8 if (r + c) % 2 == 0 else -8
                    colors[r, c] = np.clip(base, 0, 255).astype(np.uint8)
        return colors

    @property
    def agent_cell(self) -> tuple[int, int]:
        return self.pos

    def reachable_cells(self) -> frozenset:
        start = (1, 1)
        seen = {start}
        frontier = [start]
        while frontier:
            r, c = frontier.pop()
            for dr, dc in _HEADING_DELTAS:
                nr, nc = r + dr, c + dc
                if 0 <= nr < self.CELLS and 0 <= nc < self.CELLS \
                        and not self.walls[nr, nc] and (nr, nc) not in seen:
                    seen.add((nr, nc))
                    frontier.append((nr, nc))
        return frozenset(seen)

    def step(self, action: int) -> np.ndarray:
        if not 0 <= action < self.spec.n_actions:
            raise DimensionError(f"invalid action {action} for gridmaze48")
        if action in (0, 1):
            sign = 1 if action == 0 else -1
            dr, dc = _HEADING_DELTAS[self.heading]
            nr, nc = self.pos[0] + sign * dr, self.pos[1] + sign * dc
            if 0 <= nr < self.CELLS and 0 <= nc < self.CELLS and not self.walls[nr, nc]:
                self.pos = (nr, nc)
        elif action == 2:
            self.heading = (self.heading - 1) % 4
        elif action == 3:
            self.heading = (self.heading + 1) % 4
        return self.render()

    def render(self) -> np.ndarray:
        pad = self.CELLS // 2
        padded = np.empty((self.CELLS + 2 * pad, self.CELLS + 2 * pad, 3), dtype=np.uint8)
        padded[:, :] = (90, 90, 110)  # out-of-bounds filler
        padded[pad:pad + self.CELLS, pad:pad + self.CELLS] = self._cell_colors
        r, c = self.pos
        window = padded[r:r + self.CELLS, c:c + self.CELLS]
        view = np.rot90(window, k=self.heading)
        img = np.repeat(np.repeat(view, self.CELL_PX, axis=0), self.CELL_PX, axis=1)
        return np.ascontiguousarray(img.transpose(2, 0, 1))


def make_env(name: str, seed: int = 0):
    if name == "ballpaddle32":
        return BallPaddleEnv(seed)
    if name == "gridmaze48":
        return GridMazeEnv(seed)
    raise DimensionError(f"unknown environment {name!r}; available: {env_names()}")


def record_step(env, action: int) -> np.ndarray:
    """Apply one selected action for the env's tick-repeat; return the frame
    observed after the final tick (the only one recorded)."""
    repeat = env.spec.action_repeat
    for _ in range(repeat):
        frame = env.step(action)
    return frame


class TrackerPolicy:
    """Scripted imperfect ball tracker with epsilon-random actions."""

    def __init__(self, rng: np.random.Generator, eps: float = 0.2):
        self.rng = rng
        self.eps = eps

    def __call__(self, env: BallPaddleEnv) -> int:
        if self.rng.random() < self.eps:
            return int(self.rng.integers(env.spec.n_actions))
        center = env.paddle_x + env.PADDLE_W // 2
        target = env.ball_x
        if abs(center - target) <= 1:
            return 2
        return 0 if target < center else 1


class MazeWalkSpinPolicy:
    """Alternates a dithered random walk with constant spins, both 15 steps.

    Dithering: with the given probability, a genuinely new action replaces
    the current one at each walk step.
    """

    def __init__(self, rng: np.random.Generator, dither: float = 0.7,
                 phase_len: int = 15):
        self.rng = rng
        self.dither = dither
        self.phase_len = phase_len
        self._step = 0
        self._walking = True
        self._action = int(rng.integers(5))
        self._spin_action = 2

    def __call__(self, env: GridMazeEnv) -> int:
        if self._step == self.phase_len:
            self._step = 0
            self._walking = not self._walking
            if not self._walking:
                self._spin_action = int(self.rng.choice([2, 3]))
        self._step += 1
        if not self._walking:
            return self._spin_action
        if self.rng.random() < self.dither:
            others = [a for a in range(5) if a != self._action]
            self._action = int(self.rng.choice(others))
        return self._action


class DitherPolicy:
    """Pure dithered random walk (the exploration baseline)."""

    def __init__(self, rng: np.random.Generator, dither: float = 0.7,
                 n_actions: int = 5):
        self.rng = rng
        self.dither = dither
        self.n_actions = n_actions
        self._action = int(rng.integers(n_actions))

    def __call__(self, env=None) -> int:
        if self.rng.random() < self.dither:
            others = [a for a in range(self.n_actions) if a != self._action]
            self._action = int(self.rng.choice(others))
        return self._action
