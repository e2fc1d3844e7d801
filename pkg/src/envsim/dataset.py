"""Episode recording, frame preprocessing, and the binary dataset format.

Preprocessing subtracts per-channel means (computed over an initial window of
raw frames only) and then divides by 255, in that order.  The inverse restores
raw-scale values exactly in real arithmetic.

On-disk layout (all integers little-endian):

    magic   8 bytes  b"RESDAT1\\0"
    u32     env name length, then that many utf-8 bytes
    u32 x3  C, H, W
    u32     n_actions
    u32     M (preprocessing window)
    f64 x C per-channel means
    u32     episode count
    then per episode:
        u32     frame count N
        u8      N*C*H*W raw frame bytes
        u8      N-1 action ids
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .envs import ENV_SPECS, DitherPolicy, MazeWalkSpinPolicy, TrackerPolicy, \
    make_env, record_step
from .errors import DatasetFormatError, DimensionError

MAGIC = b"RESDAT1\x00"
DEFAULT_PREPROC_WINDOW = 2048


@dataclass
class PreprocStats:
    mean: np.ndarray  # (C,) float64, values in [0, 255]
    window: int

    def apply(self, frames: np.ndarray) -> np.ndarray:
        """(…, C, H, W) raw values -> (raw - channel mean) / 255."""
        mean = self.mean.reshape((-1, 1, 1))
        return (frames.astype(np.float32) - mean.astype(np.float32)) / np.float32(255.0)

    def invert(self, preprocessed: np.ndarray) -> np.ndarray:
        mean = self.mean.reshape((-1, 1, 1))
        return preprocessed.astype(np.float64) * 255.0 + mean

    def invert_to_u8(self, preprocessed: np.ndarray) -> np.ndarray:
        """Raw-scale bytes: clamp to [0, 255], round half to even."""
        raw = self.invert(preprocessed)
        return np.rint(np.clip(raw, 0.0, 255.0)).astype(np.uint8)


@dataclass
class Episode:
    frames: np.ndarray  # (N, C, H, W) uint8
    actions: np.ndarray  # (N-1,) uint8


@dataclass
class EpisodeDataset:
    env_name: str
    frame_shape: tuple[int, int, int]
    n_actions: int
    episodes: list[Episode]
    stats: PreprocStats
    split: str = "train"

    @property
    def total_frames(self) -> int:
        return sum(len(ep.frames) for ep in self.episodes)

    def preprocess(self, frames: np.ndarray) -> np.ndarray:
        return self.stats.apply(frames)

    def validate(self) -> None:
        for i, ep in enumerate(self.episodes):
            if len(ep.frames) != len(ep.actions) + 1:
                raise DimensionError(
                    f"episode {i}: {len(ep.frames)} frames vs {len(ep.actions)} actions")
            if ep.actions.size and int(ep.actions.max()) >= self.n_actions:
                raise DimensionError(f"episode {i}: action id out of range")
            if ep.frames.shape[1:] != self.frame_shape:
                raise DimensionError(f"episode {i}: frame shape {ep.frames.shape[1:]}")


def compute_preproc_stats(episodes: list[Episode],
                          window: int = DEFAULT_PREPROC_WINDOW) -> PreprocStats:
    """Per-channel means over exactly the first `window` raw frames, in
    episode order; the window clamps to the dataset size with a warning."""
    total = sum(len(ep.frames) for ep in episodes)
    if total == 0:
        raise DimensionError("cannot compute preprocessing stats of an empty dataset")
    if total < window:
        warnings.warn(
            f"preprocessing window {window} exceeds dataset size {total}; clamping",
            stacklevel=2)
        window = total
    channels = episodes[0].frames.shape[1]
    acc = np.zeros(channels, dtype=np.float64)
    remaining = window
    for ep in episodes:
        take = min(remaining, len(ep.frames))
        acc += ep.frames[:take].astype(np.float64).sum(axis=(0, 2, 3))
        remaining -= take
        if remaining == 0:
            break
    c, h, w = episodes[0].frames.shape[1:]
    return PreprocStats(mean=acc / (window * h * w), window=window)


def default_policy(env_name: str, rng: np.random.Generator):
    if env_name == "ballpaddle32":
        return TrackerPolicy(rng)
    if env_name == "gridmaze48":
        return MazeWalkSpinPolicy(rng)
    raise DimensionError(f"no default policy for {env_name!r}")


def generate_dataset(env_name: str, n_frames: int, seed: int, *,
                     policy_factory=None, episode_len: int | None = None,
                     window: int = DEFAULT_PREPROC_WINDOW,
                     split: str = "train") -> EpisodeDataset:
    """Record episodes until at least n_frames frames exist.

    Each selected action is applied for the environment's tick-repeat with
    only the final tick's frame recorded.  Episode e uses env seed
    seed*100003 + e, so distinct dataset seeds never share episode streams.
    """
    if env_name not in ENV_SPECS:
        raise DimensionError(f"unknown environment {env_name!r}")
    spec = ENV_SPECS[env_name]
    ep_len = episode_len or spec.episode_len
    episodes: list[Episode] = []
    recorded = 0
    ep_idx = 0
    policy_rng = np.random.default_rng(seed)
    factory = policy_factory or default_policy
    while recorded < n_frames:
        env = make_env(env_name, seed * 100003 + ep_idx)
        policy = factory(env_name, policy_rng)
        frames = [env.render()]
        actions = []
        for _ in range(ep_len):
            action = policy(env)
            frames.append(record_step(env, action))
            actions.append(action)
        episodes.append(Episode(np.stack(frames).astype(np.uint8),
                                np.array(actions, dtype=np.uint8)))
        recorded += len(frames)
        ep_idx += 1
    stats = compute_preproc_stats(episodes, window)
    ds = EpisodeDataset(env_name=env_name, frame_shape=spec.frame_shape,
                        n_actions=spec.n_actions, episodes=episodes,
                        stats=stats, split=split)
    ds.validate()
    return ds


def dataset_write(ds: EpisodeDataset, path) -> None:
    ds.validate()
    c, h, w = ds.frame_shape
    name = ds.env_name.encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(name)))
        f.write(name)
        f.write(struct.pack("<5I", c, h, w, ds.n_actions, ds.stats.window))
        f.write(struct.pack(f"<{c}d", *ds.stats.mean.tolist()))
        f.write(struct.pack("<I", len(ds.episodes)))
        for ep in ds.episodes:
            f.write(struct.pack("<I", len(ep.frames)))
            f.write(ep.frames.tobytes())
            f.write(ep.actions.tobytes())


class _Reader:
    def __init__(self, path):
        with open(path, "rb") as f:
            self.buf = f.read()
        self.off = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.off + n > len(self.buf):
            raise DatasetFormatError(
                f"{self.path}: truncated while reading {what}: "
                f"expected {self.off + n} bytes, file has {len(self.buf)}")
        out = self.buf[self.off:self.off + n]
        self.off += n
        return out

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]


def dataset_read(path) -> EpisodeDataset:
    r = _Reader(path)
    magic = r.take(len(MAGIC), "magic")
    if magic != MAGIC:
        if magic[:6] == MAGIC[:6]:
            raise DatasetFormatError(
                f"{path}: unsupported dataset version {magic!r}, expected {MAGIC!r}")
        raise DatasetFormatError(f"{path}: bad magic {magic!r}")
    name = r.take(r.u32("name length"), "env name").decode("utf-8")
    c = r.u32("channels")
    h = r.u32("height")
    w = r.u32("width")
    n_actions = r.u32("action count")
    window = r.u32("preprocessing window")
    mean = np.frombuffer(r.take(8 * c, "channel means"), dtype="<f8").astype(np.float64)
    n_eps = r.u32("episode count")
    episodes = []
    for i in range(n_eps):
        n = r.u32(f"episode {i} frame count")
        frames = np.frombuffer(r.take(n * c * h * w, f"episode {i} frames"),
                               dtype=np.uint8).reshape(n, c, h, w).copy()
        actions = np.frombuffer(r.take(n - 1, f"episode {i} actions"),
                                dtype=np.uint8).copy()
        episodes.append(Episode(frames, actions))
    if r.off != len(r.buf):
        raise DatasetFormatError(
            f"{path}: {len(r.buf) - r.off} trailing bytes after the last episode")
    ds = EpisodeDataset(env_name=name, frame_shape=(c, h, w), n_actions=n_actions,
                        episodes=episodes, stats=PreprocStats(mean=mean, window=window))
    ds.validate()
    return ds
