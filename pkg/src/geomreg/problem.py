"""Inverse-problem data model and the synthetic spike-deconvolution generator."""
import configparser
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import _kernels
from .errors import DomainError, ShapeError
from .linalg import as_matrix, as_vector, read_csv_matrix, read_csv_vector, write_csv

__all__ = [
    "InverseProblem",
    "SimulationConfig",
    "gaussian_convolution_operator",
    "spike_source",
    "add_noise",
    "discrepancy",
    "simulate",
    "save_problem",
    "load_problem",
    "read_config_file",
]


@dataclass(frozen=True, eq=False)
class InverseProblem:
    F: np.ndarray
    y: np.ndarray
    delta: Optional[float] = None
    x_true: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        F = as_matrix(self.F, "F")
        y = as_vector(self.y, "y")
        if y.shape[0] != F.shape[0]:
            raise ShapeError(f"y has length {y.shape[0]}, F has {F.shape[0]} rows")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "y", y)
        if self.delta is not None:
            if not np.isfinite(self.delta) or self.delta < 0:
                raise DomainError(f"delta must be finite and >= 0, got {self.delta}")
            object.__setattr__(self, "delta", float(self.delta))
        if self.x_true is not None:
            x = as_vector(self.x_true, "x_true")
            if x.shape[0] != F.shape[1]:
                raise ShapeError(f"x_true has length {x.shape[0]}, F has {F.shape[1]} columns")
            object.__setattr__(self, "x_true", x)
            if self.delta is not None:
                r = float(np.linalg.norm(y - F @ x))
                if r > self.delta * (1 + 1e-12):
                    raise DomainError(f"noise bound violated: ||y - F x_true|| = {r} > delta = {self.delta}")

    @property
    def shape(self):
        return self.F.shape


@dataclass(frozen=True)
class SimulationConfig:
    """Spike train blurred by a Gaussian kernel plus white noise.

    The defaults (100 samples, five mixed-sign spikes, kernel std 3 samples,
    noise std 1e-3, about 2% of the clean-data norm) are artifact choices.
    """

    n: int = 100
    spike_positions: tuple = (15, 32, 50, 68, 85)
    spike_amplitudes: tuple = (1.0, -0.6, 0.8, 0.5, -0.9)
    kernel_width: float = 3.0
    noise_sigma: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "spike_positions", tuple(int(p) for p in self.spike_positions))
        object.__setattr__(self, "spike_amplitudes", tuple(float(a) for a in self.spike_amplitudes))
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        if len(self.spike_positions) != len(self.spike_amplitudes):
            raise DomainError("spike_positions and spike_amplitudes differ in length")
        for p in self.spike_positions:
            if not 0 <= p < self.n:
                raise DomainError(f"spike position {p} outside [0, {self.n})")
        if not self.kernel_width > 0:
            raise DomainError(f"kernel_width must be > 0, got {self.kernel_width}")
        if not self.noise_sigma >= 0:
            raise DomainError(f"noise_sigma must be >= 0, got {self.noise_sigma}")

    def to_dict(self):
        d = asdict(self)
        d["spike_positions"] = list(self.spike_positions)
        d["spike_amplitudes"] = list(self.spike_amplitudes)
        return d

    @classmethod
    def from_mapping(cls, mapping):
        """Build a config from loosely-typed key/value pairs (strings allowed).

        Keys may use ``-`` or ``_``; list values may be comma-separated strings.
        """
        known = {f.name for f in fields(cls)}
        kw = {}
        for key, value in mapping.items():
            name = key.strip().replace("-", "_")
            if name not in known:
                raise DomainError(f"unknown simulation key {key!r}")
            if value is None:
                continue
            if name in ("spike_positions", "spike_amplitudes"):
                if isinstance(value, str):
                    value = [v for v in value.replace(" ", "").split(",") if v]
                conv = int if name == "spike_positions" else float
                value = tuple(conv(v) for v in value)
            elif name in ("n", "seed"):
                value = int(value)
            else:
                value = float(value)
            kw[name] = value
        return cls(**kw)


def read_config_file(path):
    """Parse a flat ``key = value`` file (``#`` comments allowed) into a dict."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string("[top]\n" + text)
    return dict(parser["top"])


def gaussian_convolution_operator(n, kernel_width):
    """Symmetric Toeplitz matrix sampling a unit-mass Gaussian of std ``kernel_width``.

    No wraparound at the boundaries.
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if not kernel_width > 0:
        raise DomainError(f"kernel width must be positive, got {kernel_width}")
    return _kernels.gaussian_toeplitz(int(n), float(kernel_width))


def spike_source(cfg):
    x = np.zeros(cfg.n)
    for p, a in zip(cfg.spike_positions, cfg.spike_amplitudes):
        x[p] += a
    return x


def add_noise(y_clean, noise_sigma, seed):
    """Add i.i.d. N(0, noise_sigma^2) noise; return ``(y, ||noise||)``.

    Draws come from ``numpy.random.default_rng(seed)`` (PCG64 bit stream,
    ziggurat Gaussian transform), so equal seeds give bit-identical output on
    a given platform.
    """
    y_clean = as_vector(y_clean, "y_clean")
    if not noise_sigma >= 0:
        raise DomainError(f"noise_sigma must be >= 0, got {noise_sigma}")
    if noise_sigma == 0:
        return y_clean.copy(), 0.0
    rng = np.random.default_rng(seed)
    nu = noise_sigma * rng.standard_normal(y_clean.shape[0])
    return y_clean + nu, float(np.linalg.norm(nu))


def discrepancy(P, x):
    x = as_vector(x, "x")
    if x.shape[0] != P.F.shape[1]:
        raise ShapeError(f"x has length {x.shape[0]}, F has {P.F.shape[1]} columns")
    return float(np.linalg.norm(P.y - P.F @ x))


def simulate(cfg):
    F = gaussian_convolution_operator(cfg.n, cfg.kernel_width)
    x = spike_source(cfg)
    y, noise_norm = add_noise(F @ x, cfg.noise_sigma, cfg.seed)
    # recomputed residual can exceed ||nu|| by rounding when the noise is tiny
    delta = max(noise_norm, float(np.linalg.norm(y - F @ x)))
    return InverseProblem(F, y, delta=delta, x_true=x, meta={"seed": cfg.seed, "config": cfg.to_dict()})


def save_problem(P, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_csv(directory / "F.csv", P.F)
    write_csv(directory / "y.csv", P.y)
    if P.x_true is not None:
        write_csv(directory / "x_true.csv", P.x_true)
    meta = dict(P.meta)
    meta["delta"] = P.delta
    (directory / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return directory


def load_problem(directory):
    directory = Path(directory)
    F = read_csv_matrix(directory / "F.csv")
    y = read_csv_vector(directory / "y.csv")
    x_path = directory / "x_true.csv"
    x = read_csv_vector(x_path) if x_path.exists() else None
    meta_path = directory / "meta.json"
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    delta = meta.pop("delta", None)
    return InverseProblem(F, y, delta=delta, x_true=x, meta=meta)
