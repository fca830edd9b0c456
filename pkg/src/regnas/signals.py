"""Synthetic 2D signal bases and target-tensor assembly.

Five basis families: Sin1D, Sin2D, Dot, GDot and Resize.  Sine bases come in
two flavours: fully pinned (fixed frequency/phase, useful in tests) and banked
(a list of candidate frequencies; each channel draws its own frequency, phase
and, for Sin1D, axis).  Per-channel randomness is seeded by a labeled stream
per (stage, group, basis, channel, batch-slot) so global/local replication and
group-summation linearity are exactly testable.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .errors import InvalidFrequency, InvalidSpec, ScopeError

CHANNEL_CHOICES = (16, 32, 48, 64, 96)
NOISE_LEVELS = tuple(round(0.1 * i, 1) for i in range(11))


def _check_freq(f):
    if not (0.0 < f <= 0.5):
        raise InvalidFrequency(f"frequency {f} outside (0, 0.5]")


@dataclass(frozen=True)
class Sin1D:
    f: float
    phi: float = 0.0
    axis: str = "x"

    def __post_init__(self):
        _check_freq(self.f)
        if self.axis not in ("x", "y"):
            raise InvalidSpec(f"bad axis {self.axis}")


@dataclass(frozen=True)
class Sin2D:
    fx: float
    fy: float
    phi: float = 0.0

    def __post_init__(self):
        _check_freq(self.fx)
        _check_freq(self.fy)


@dataclass(frozen=True)
class Sin1DBank:
    """Per-channel draws: frequency from ``freqs``, random axis and phase."""

    freqs: tuple

    def __post_init__(self):
        for f in self.freqs:
            _check_freq(f)


@dataclass(frozen=True)
class Sin2DBank:
    freqs: tuple

    def __post_init__(self):
        for f in self.freqs:
            _check_freq(f)


@dataclass(frozen=True)
class Dot:
    k: float  # percent of pixels set to +-1

    def __post_init__(self):
        if not (0.0 <= self.k <= 100.0):
            raise InvalidSpec(f"dot percentage {self.k} outside [0, 100]")


@dataclass(frozen=True)
class GDot:
    k: float
    sigma: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.k <= 100.0):
            raise InvalidSpec(f"dot percentage {self.k} outside [0, 100]")
        if self.sigma <= 0:
            raise InvalidSpec("sigma must be positive")


@dataclass(frozen=True)
class Resize:
    pass


@dataclass(frozen=True)
class BasisSpec:
    family: object
    scope: str = "global"  # "global" or "local"

    def __post_init__(self):
        if self.scope not in ("global", "local"):
            raise InvalidSpec(f"bad scope {self.scope}")
        if isinstance(self.family, Resize) and self.scope == "global":
            raise ScopeError("resize reads per-image content; global scope is meaningless")


@dataclass(frozen=True)
class BasisGroup:
    """Bases summed elementwise into one block of ``channels`` channels."""

    bases: tuple
    channels: int

    def __post_init__(self):
        if not self.bases:
            raise InvalidSpec("group needs at least one basis")
        # the searchable space draws channels from CHANNEL_CHOICES; hand-built
        # presets may split a stage budget unevenly, so only positivity is hard
        if not isinstance(self.channels, int) or self.channels < 1:
            raise InvalidSpec(f"bad channel count {self.channels}")


@dataclass(frozen=True)
class StageTargetSpec:
    groups: tuple

    def __post_init__(self):
        if not self.groups:
            raise InvalidSpec("stage needs at least one group")

    @property
    def channels(self):
        return sum(g.channels for g in self.groups)


@dataclass(frozen=True)
class NoiseSpec:
    distribution: str  # "gaussian" or "uniform"
    level: float

    def __post_init__(self):
        if self.distribution not in ("gaussian", "uniform"):
            raise InvalidSpec(f"bad noise distribution {self.distribution}")
        if min(abs(self.level - v) for v in NOISE_LEVELS) > 1e-9:
            raise InvalidSpec(f"noise level {self.level} not on the 0.0..1.0 grid")


def gen_sin1d(f, phi, axis, h, w):
    _check_freq(f)
    if axis == "x":
        row = np.sin(2.0 * math.pi * f * np.arange(w) + phi)
        return np.tile(row, (h, 1))
    col = np.sin(2.0 * math.pi * f * np.arange(h) + phi)
    return np.tile(col[:, None], (1, w))


def gen_sin2d(fx, fy, phi, h, w):
    _check_freq(fx)
    _check_freq(fy)
    x = np.arange(w)[None, :]
    y = np.arange(h)[:, None]
    return np.sin(2.0 * math.pi * fx * x + 2.0 * math.pi * fy * y + phi)


def gen_dot(k, h, w, rng):
    n = int(math.floor(k / 100.0 * h * w + 0.5))  # round half up
    out = np.zeros(h * w)
    if n:
        pos = rng.choice(h * w, size=n, replace=False)
        out[pos] = rng.choice([-1.0, 1.0], size=n)
    return out.reshape(h, w)


def _gaussian_kernel(sigma):
    r = math.ceil(3.0 * sigma)
    x = np.arange(-r, r + 1, dtype=float)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum(), r


def _blur(m, sigma):
    k, r = _gaussian_kernel(sigma)
    p = np.pad(m, r, mode="reflect")
    p = np.apply_along_axis(lambda v: np.convolve(v, k, mode="valid"), 1, p)
    p = np.apply_along_axis(lambda v: np.convolve(v, k, mode="valid"), 0, p)
    return p


def gen_gdot(k, sigma, h, w, rng):
    m = _blur(gen_dot(k, h, w, rng), sigma)
    peak = np.abs(m).max()
    return m / peak if peak > 0 else m


def gen_resize(images, h_out, w_out, channels):
    """Average-pool each image to (h_out, w_out), tile to ``channels`` channels,
    and min-max rescale each image to [-1, 1]; constant images become zero."""
    b, c, h, w = images.shape
    fh, fw = h // h_out, w // w_out
    pooled = images[:, :, : fh * h_out, : fw * w_out]
    pooled = pooled.reshape(b, c, h_out, fh, w_out, fw).mean(axis=(3, 5))
    reps = -(-channels // c)
    tiled = np.tile(pooled, (1, reps, 1, 1))[:, :channels]
    lo = tiled.min(axis=(1, 2, 3), keepdims=True)
    hi = tiled.max(axis=(1, 2, 3), keepdims=True)
    span = hi - lo
    out = np.zeros_like(tiled)
    ok = (span > 0).reshape(-1)
    out[ok] = (2.0 * (tiled[ok] - lo[ok]) / span[ok]) - 1.0
    return out


def channel_map(family, h, w, rng):
    """One 2D realization of a (non-Resize) basis family."""
    if isinstance(family, Sin1D):
        return gen_sin1d(family.f, family.phi, family.axis, h, w)
    if isinstance(family, Sin2D):
        return gen_sin2d(family.fx, family.fy, family.phi, h, w)
    if isinstance(family, Sin1DBank):
        f = rng.choice(family.freqs)
        axis = "x" if rng.integers(2) == 0 else "y"
        phi = rng.uniform(0.0, 2.0 * math.pi)
        return gen_sin1d(f, phi, axis, h, w)
    if isinstance(family, Sin2DBank):
        fx = rng.choice(family.freqs)
        fy = rng.choice(family.freqs)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        return gen_sin2d(fx, fy, phi, h, w)
    if isinstance(family, Dot):
        return gen_dot(family.k, h, w, rng)
    if isinstance(family, GDot):
        return gen_gdot(family.k, family.sigma, h, w, rng)
    raise InvalidSpec(f"cannot realize {type(family).__name__} as a channel map")


def realize_stage_target(spec, b, h, w, seed_ctx, images=None):
    """Build the (b, C, h, w) target tensor for one stage.

    ``seed_ctx`` is the label prefix for the random streams, e.g.
    ``(master_seed, "target", stage_index)``.
    """
    blocks = []
    for gi, group in enumerate(spec.groups):
        block = np.zeros((b, group.channels, h, w))
        for ki, basis in enumerate(group.bases):
            if isinstance(basis.family, Resize):
                if images is None:
                    raise InvalidSpec("resize basis requires input images")
                block += gen_resize(images, h, w, group.channels)
                continue
            for c in range(group.channels):
                if basis.scope == "global":
                    r = rngmod.stream(*seed_ctx, gi, ki, c, -1)
                    block[:, c] += channel_map(basis.family, h, w, r)
                else:
                    for i in range(b):
                        r = rngmod.stream(*seed_ctx, gi, ki, c, i)
                        block[i, c] += channel_map(basis.family, h, w, r)
        blocks.append(block)
    return np.concatenate(blocks, axis=1)


def apply_input_noise(images, spec, rng):
    if spec is None or spec.level == 0.0:
        return images.copy()
    if spec.distribution == "gaussian":
        eps = rng.standard_normal(images.shape)
    else:
        eps = rng.uniform(-1.0, 1.0, size=images.shape)
    return images + spec.level * eps


@dataclass(frozen=True)
class RnnSignalSpec:
    """Sequence tensor recipe: summed local bases plus optional noise."""

    bases: tuple = ()
    noise: NoiseSpec | None = None

    def __post_init__(self):
        for basis in self.bases:
            if basis.scope != "local":
                raise ScopeError("rnn tensors use local scope only")
            if isinstance(basis.family, Resize):
                raise InvalidSpec("resize has no meaning for sequence tensors")


def realize_rnn_tensor(spec, l, b, d, seed_ctx):
    """(l, b, d) tensor: 2D generators with (h, w) read as (l, d), one draw
    per batch element, plus elementwise noise."""
    out = np.zeros((b, l, d))
    for ki, basis in enumerate(spec.bases):
        for i in range(b):
            r = rngmod.stream(*seed_ctx, ki, i)
            out[i] += channel_map(basis.family, l, d, r)
    if spec.noise is not None and spec.noise.level > 0:
        out = apply_input_noise(out, spec.noise, rngmod.stream(*seed_ctx, "noise"))
    return out.transpose(1, 0, 2)


def realize_rnn_tensors(input_spec, target_spec, l, b, d, master_seed):
    if d not in CHANNEL_CHOICES:
        raise InvalidSpec(f"d {d} not in {CHANNEL_CHOICES}")
    x = realize_rnn_tensor(input_spec, l, b, d, (master_seed, "rnn-in"))
    y = realize_rnn_tensor(target_spec, l, b, d, (master_seed, "rnn-out"))
    return x, y
