"""Benchmark series: Mackey-Glass generation, text-file ingestion, additive
noise and time-window embedding."""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, EmptyInputError, SeriesParseError


@dataclass(frozen=True)
class MackeyGlassParams:
    """ds/dt = beta s(t - tau) / (1 + s(t - tau)^n) - gamma_decay s(t)."""

    tau: float = 30.0
    beta: float = 0.2
    gamma_decay: float = 0.1
    exponent: float = 10.0
    integration_dt: float = 0.1
    sample_stride: float = 6.0
    initial_value: float = 1.2
    washout: int = 1000


NORMALIZATIONS = ("none", "minmax", "zscore")


@dataclass(frozen=True)
class SeriesConfig:
    source: str = "mackey-glass"
    length: int = 1607
    noise_std: float = 0.04
    seed: int = 0
    path: str = None
    normalize: str = "none"
    mg_params: MackeyGlassParams = field(default_factory=MackeyGlassParams)

    def __post_init__(self):
        if self.source not in ("mackey-glass", "file"):
            raise ConfigError(f"unknown series source {self.source!r}")
        if int(self.length) <= 0:
            raise ConfigError(f"series length must be > 0, got {self.length}")
        if self.noise_std < 0:
            raise ConfigError(f"noise_std must be >= 0, got {self.noise_std}")
        if self.normalize not in NORMALIZATIONS:
            raise ConfigError(
                f"normalize must be one of {', '.join(NORMALIZATIONS)}, got {self.normalize!r}"
            )


@dataclass
class EmbeddedDataset:
    """Windowed ``(input, target)`` pairs split sequentially into train/test."""

    inputs: np.ndarray
    targets: np.ndarray
    train_count: int
    test_count: int

    @property
    def X_train(self):
        return self.inputs[: self.train_count]

    @property
    def y_train(self):
        return self.targets[: self.train_count]

    @property
    def X_test(self):
        return self.inputs[self.train_count : self.train_count + self.test_count]

    @property
    def y_test(self):
        return self.targets[self.train_count : self.train_count + self.test_count]


def _mg_rhs(s, s_lag, p):
    return p.beta * s_lag / (1.0 + s_lag**p.exponent) - p.gamma_decay * s


def generate_mackey_glass(length, params=MackeyGlassParams()):
    """Integrate the Mackey-Glass delay equation with classical RK4.

    The history before ``t = 0`` is held at ``initial_value``. The delayed
    term at half steps is the mean of the two neighbouring grid values, so
    ``tau`` must be a multiple of ``integration_dt``. Returns ``length``
    samples taken every ``sample_stride`` time units after discarding
    ``washout`` samples.
    """
    p = params
    length = int(length)
    if length <= 0:
        raise ConfigError(f"length must be > 0, got {length}")
    if p.washout < 0:
        raise ConfigError("washout must be >= 0")
    dt = p.integration_dt
    lag = int(round(p.tau / dt))
    stride = int(round(p.sample_stride / dt))
    if lag < 1 or stride < 1 or abs(lag * dt - p.tau) > 1e-9 or abs(stride * dt - p.sample_stride) > 1e-9:
        raise ConfigError("tau and sample_stride must be positive multiples of integration_dt")

    n_samples = length + int(p.washout)
    n_steps = n_samples * stride
    # s[j] holds the state at t = (j - lag) dt; the first lag+1 entries are history
    s = np.empty(n_steps + lag + 1)
    s[: lag + 1] = p.initial_value
    for j in range(lag, lag + n_steps):
        cur = s[j]
        lag0 = s[j - lag]
        lag1 = s[j - lag + 1]
        lag_half = 0.5 * (lag0 + lag1)
        k1 = _mg_rhs(cur, lag0, p)
        k2 = _mg_rhs(cur + 0.5 * dt * k1, lag_half, p)
        k3 = _mg_rhs(cur + 0.5 * dt * k2, lag_half, p)
        k4 = _mg_rhs(cur + dt * k3, lag1, p)
        s[j + 1] = cur + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    sampled = s[lag + stride :: stride]
    return sampled[int(p.washout) : int(p.washout) + length].copy()


def load_series(path):
    """Read one number per line; a non-numeric first line is a header."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read series file {path}: {exc}") from exc
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        item = line.strip()
        if not item:
            continue
        try:
            values.append(float(item))
        except ValueError:
            if lineno == 1:
                continue
            raise SeriesParseError(path, lineno, item) from None
    if not values:
        raise EmptyInputError(f"series file {path} contains no values")
    return np.asarray(values)


def add_noise(series, noise_std, seed):
    """Add i.i.d. zero-mean Gaussian noise drawn from ``default_rng(seed)``."""
    series = np.asarray(series, dtype=float)
    if noise_std < 0:
        raise ConfigError(f"noise_std must be >= 0, got {noise_std}")
    if noise_std == 0:
        return series.copy()
    rng = np.random.default_rng(seed)
    return series + rng.normal(0.0, noise_std, size=series.shape)


def embed(series, window=7, horizon=1, train_count=None, test_count=None):
    """Time-window embedding: ``input[j] = s[j:j+window]``,
    ``target[j] = s[j+window-1+horizon]``.

    Without explicit counts every pair is a training pair.
    """
    s = np.asarray(series, dtype=float).ravel()
    window, horizon = int(window), int(horizon)
    if window < 1 or horizon < 1:
        raise ConfigError("window and horizon must be >= 1")
    n_pairs = s.size - window - horizon + 1
    if n_pairs < 1:
        raise ConfigError(
            f"series of length {s.size} too short for window={window}, horizon={horizon}"
        )
    inputs = np.lib.stride_tricks.sliding_window_view(s, window)[:n_pairs].copy()
    targets = s[window - 1 + horizon :][:n_pairs].copy()
    if train_count is None:
        train_count = n_pairs
    if test_count is None:
        test_count = n_pairs - train_count
    if train_count < 0 or test_count < 0 or train_count + test_count > n_pairs:
        raise ConfigError(
            f"{train_count} train + {test_count} test pairs requested, only {n_pairs} available"
        )
    return EmbeddedDataset(inputs, targets, int(train_count), int(test_count))


def required_length(train_count, test_count, window=7, horizon=1):
    """Series length yielding exactly ``train_count + test_count`` pairs."""
    return int(train_count) + int(test_count) + int(window) + int(horizon) - 1


def normalize(series, method):
    """Rescale to [0, 1] (``"minmax"``) or zero mean / unit std (``"zscore"``)."""
    s = np.asarray(series, dtype=float)
    if method == "none":
        return s
    if method == "minmax":
        span = s.max() - s.min()
        return (s - s.min()) / span if span > 0 else np.zeros_like(s)
    if method == "zscore":
        sd = s.std()
        return (s - s.mean()) / sd if sd > 0 else np.zeros_like(s)
    raise ConfigError(f"unknown normalization {method!r}")


def make_series(cfg):
    """Clean (noise-free) series described by ``cfg``."""
    if cfg.source == "mackey-glass":
        s = generate_mackey_glass(cfg.length, cfg.mg_params)
    elif cfg.path is None:
        raise ConfigError("file series requires a path")
    else:
        s = load_series(cfg.path)
    return normalize(s, cfg.normalize)
