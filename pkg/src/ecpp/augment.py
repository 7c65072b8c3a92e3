"""Seedable image augmentation pipelines.

Images are numpy arrays of shape (3, h, w), float32, channel-major, with
pixel values in [0, 1] until a trailing Normalize op. Every op draws from its
own Philox substream keyed by (seed, op index), so a probabilistic skip in
one op can never shift the draws of the ops after it, and the whole pipeline
is a pure function of (pipeline, image, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .seeding import stream

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)
CIFAR_MEAN = (0.4914, 0.4822, 0.4465)
CIFAR_STD = (0.2023, 0.1994, 0.2010)

_LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float32)


def check_image(img: np.ndarray) -> None:
    if img.ndim != 3 or img.shape[0] != 3:
        raise ValueError(f"expected (3, h, w) image, got shape {img.shape}")


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resampling with half-pixel centers (no antialias)."""
    c, h, w = img.shape
    if (h, w) == (out_h, out_w):
        return img.astype(np.float32, copy=True)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0).astype(np.float32)[:, None]
    wx = (xs - x0).astype(np.float32)

    r0 = img[:, y0]
    r1 = img[:, y1]
    top = r0[:, :, x0] * (1 - wx) + r0[:, :, x1] * wx
    bot = r1[:, :, x0] * (1 - wx) + r1[:, :, x1] * wx
    return (top * (1 - wy) + bot * wy).astype(np.float32)


def luma(img: np.ndarray) -> np.ndarray:
    """Single-channel luminance, shape (h, w)."""
    return np.tensordot(_LUMA, img, axes=(0, 0))


def to_grayscale(img: np.ndarray) -> np.ndarray:
    g = luma(img).astype(np.float32)
    return np.repeat(g[None], 3, axis=0)


def rgb_to_hsv(img: np.ndarray) -> np.ndarray:
    r, g, b = img[0], img[1], img[2]
    maxc = img.max(axis=0)
    minc = img.min(axis=0)
    v = maxc
    delta = maxc - minc
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    safe = np.where(delta > 0, delta, 1.0)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    h = np.where(r == maxc, bc - gc, np.where(g == maxc, 2.0 + rc - bc, 4.0 + gc - rc))
    h = np.where(delta > 0, (h / 6.0) % 1.0, 0.0)
    return np.stack([h, s, v]).astype(np.float32)


def hsv_to_rgb(img: np.ndarray) -> np.ndarray:
    h, s, v = img[0], img[1], img[2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(np.int64) % 6
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b]).astype(np.float32)


def solarize(img: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    return np.where(img >= threshold, 1.0 - img, img).astype(np.float32)


def horizontal_flip(img: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(img[:, :, ::-1])


def normalize(img: np.ndarray, mean, std) -> np.ndarray:
    mean = np.asarray(mean, dtype=np.float32)
    std = np.asarray(std, dtype=np.float32)
    if np.any(std == 0):
        raise ValueError("normalize: zero std")
    return ((img - mean[:, None, None]) / std[:, None, None]).astype(np.float32)


def gaussian_blur(img: np.ndarray, kernel: int, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with reflect padding.

    The kernel is clipped to the smaller spatial extent and forced odd so
    tiny images stay blurrable.
    """
    _, h, w = img.shape
    k = min(kernel, h, w)
    if k % 2 == 0:
        k -= 1
    if k < 3:
        return img.astype(np.float32, copy=True)
    half = k // 2
    xs = np.arange(k, dtype=np.float64) - half
    kern = np.exp(-0.5 * (xs / sigma) ** 2)
    kern = (kern / kern.sum()).astype(np.float32)

    out = np.pad(img, ((0, 0), (half, half), (0, 0)), mode="reflect")
    out = np.lib.stride_tricks.sliding_window_view(out, k, axis=1) @ kern
    out = np.pad(out, ((0, 0), (0, 0), (half, half)), mode="reflect")
    out = np.lib.stride_tricks.sliding_window_view(out, k, axis=2) @ kern
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def color_jitter(img: np.ndarray, factors: tuple[float, float, float, float]) -> np.ndarray:
    """Apply brightness/contrast/saturation factors and a hue shift, in that order."""
    fb, fc, fs, dh = factors
    out = np.clip(img * fb, 0.0, 1.0)
    mean_gray = np.float32(luma(out).mean(dtype=np.float64))
    out = np.clip(out * fc + (1.0 - fc) * mean_gray, 0.0, 1.0)
    gray = luma(out).astype(np.float32)[None]
    out = np.clip(out * fs + (1.0 - fs) * gray, 0.0, 1.0)
    if dh != 0.0:
        hsv = rgb_to_hsv(out)
        hsv[0] = (hsv[0] + dh) % 1.0
        out = np.clip(hsv_to_rgb(hsv), 0.0, 1.0)
    return out.astype(np.float32)


def random_resized_crop(img: np.ndarray, out_size: int, scale: tuple[float, float],
                        rng: np.random.Generator,
                        aspect: tuple[float, float] = (3 / 4, 4 / 3)) -> np.ndarray:
    """Crop a window with area fraction ~ U(scale) and log-uniform aspect
    ratio, then bilinearly resize to out_size x out_size.

    Ten sampling attempts; windows that round to zero area or exceed the
    image count as failures. Fallback is the largest centered square.
    """
    check_image(img)
    _, h, w = img.shape
    area = h * w
    log_lo, log_hi = math.log(aspect[0]), math.log(aspect[1])
    for _ in range(10):
        target = rng.uniform(scale[0], scale[1]) * area
        ratio = math.exp(rng.uniform(log_lo, log_hi))
        cw = int(round(math.sqrt(target * ratio)))
        ch = int(round(math.sqrt(target / ratio)))
        if 0 < cw <= w and 0 < ch <= h:
            top = int(rng.integers(0, h - ch + 1))
            left = int(rng.integers(0, w - cw + 1))
            window = img[:, top:top + ch, left:left + cw]
            return bilinear_resize(window, out_size, out_size)
    side = min(h, w)
    top = (h - side) // 2
    left = (w - side) // 2
    return bilinear_resize(img[:, top:top + side, left:left + side], out_size, out_size)


# -- pipeline ops ------------------------------------------------------------


@dataclass(frozen=True)
class RandomResizedCrop:
    out_size: int
    scale: tuple[float, float] = (0.2, 1.0)
    aspect: tuple[float, float] = (3 / 4, 4 / 3)

    def __post_init__(self):
        lo, hi = self.scale
        if not (0 < lo <= hi <= 1):
            raise ValueError(f"crop scale must satisfy 0 < lo <= hi <= 1, got {self.scale}")
        if self.out_size <= 0:
            raise ValueError("out_size must be positive")

    def apply(self, img, rng):
        return random_resized_crop(img, self.out_size, self.scale, rng, self.aspect)


@dataclass(frozen=True)
class HorizontalFlip:
    p: float = 0.5

    def apply(self, img, rng):
        u = rng.random()
        return horizontal_flip(img) if u < self.p else img


@dataclass(frozen=True)
class ColorJitter:
    brightness: float
    contrast: float
    saturation: float
    hue: float
    p: float = 0.8

    def apply(self, img, rng):
        # all five draws happen regardless of the apply decision
        u = rng.random()
        fb = rng.uniform(max(0.0, 1 - self.brightness), 1 + self.brightness)
        fc = rng.uniform(max(0.0, 1 - self.contrast), 1 + self.contrast)
        fs = rng.uniform(max(0.0, 1 - self.saturation), 1 + self.saturation)
        dh = rng.uniform(-self.hue, self.hue)
        if u >= self.p:
            return img
        return color_jitter(img, (fb, fc, fs, dh))


@dataclass(frozen=True)
class Grayscale:
    p: float = 0.2

    def apply(self, img, rng):
        u = rng.random()
        return to_grayscale(img) if u < self.p else img


@dataclass(frozen=True)
class GaussianBlur:
    kernel: int = 23
    sigma: tuple[float, float] = (0.1, 2.0)
    p: float = 0.5

    def apply(self, img, rng):
        u = rng.random()
        sig = rng.uniform(self.sigma[0], self.sigma[1])
        if u >= self.p:
            return img
        return gaussian_blur(img, self.kernel, sig)


@dataclass(frozen=True)
class Solarize:
    threshold: float = 0.5
    p: float = 0.1

    def apply(self, img, rng):
        u = rng.random()
        return solarize(img, self.threshold) if u < self.p else img


@dataclass(frozen=True)
class Normalize:
    mean: tuple[float, float, float]
    std: tuple[float, float, float]

    def apply(self, img, rng):
        return normalize(img, self.mean, self.std)


@dataclass(frozen=True)
class AugmentPipeline:
    name: str
    out_size: int
    ops: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for i, op in enumerate(self.ops):
            p = getattr(op, "p", None)
            if p is not None and not 0 <= p <= 1:
                raise ValueError(f"op {op} has probability outside [0, 1]")
            if isinstance(op, Normalize) and i != len(self.ops) - 1:
                raise ValueError("Normalize must be the last op")


def apply(pipeline: AugmentPipeline, img: np.ndarray, seed: int,
          skip_normalize: bool = False) -> np.ndarray:
    """Run the pipeline on one image; pure in (pipeline, img, seed)."""
    check_image(img)
    out = img
    for op_index, op in enumerate(pipeline.ops):
        if skip_normalize and isinstance(op, Normalize):
            continue
        out = op.apply(out, stream(seed, op_index))
    return out


# -- the five named stacks ---------------------------------------------------


def simclr_full_large(out_size: int = 224, scale=(0.2, 1.0)) -> AugmentPipeline:
    return AugmentPipeline("simclr_full_large", out_size, (
        RandomResizedCrop(out_size, scale),
        HorizontalFlip(0.5),
        ColorJitter(0.8, 0.8, 0.8, 0.2, p=0.8),
        Grayscale(0.2),
        GaussianBlur(23, (0.1, 2.0), p=0.5),
        Solarize(0.5, p=0.1),
        Normalize(IMAGENET_MEAN, IMAGENET_STD),
    ))


def simclr_global_small(out_size: int = 96, scale=(0.2, 1.0)) -> AugmentPipeline:
    return AugmentPipeline("simclr_global_small", out_size,
                           simclr_full_large(out_size, scale).ops)


def crop_only_global_small(out_size: int = 96, scale=(0.2, 1.0)) -> AugmentPipeline:
    return AugmentPipeline("crop_only_global_small", out_size, (
        RandomResizedCrop(out_size, scale),
        Normalize(IMAGENET_MEAN, IMAGENET_STD),
    ))


def simclr_cifar(out_size: int = 32, scale=(0.2, 1.0)) -> AugmentPipeline:
    # no blur and no solarization in the CIFAR stack
    return AugmentPipeline("simclr_cifar", out_size, (
        RandomResizedCrop(out_size, scale),
        HorizontalFlip(0.5),
        ColorJitter(0.4, 0.4, 0.4, 0.1, p=0.8),
        Grayscale(0.2),
        Normalize(CIFAR_MEAN, CIFAR_STD),
    ))


def crop_only_cifar(out_size: int = 32, scale=(0.2, 1.0)) -> AugmentPipeline:
    return AugmentPipeline("crop_only_cifar", out_size, (
        RandomResizedCrop(out_size, scale),
        Normalize(CIFAR_MEAN, CIFAR_STD),
    ))


PIPELINES = {
    "simclr_full_large": simclr_full_large,
    "simclr_global_small": simclr_global_small,
    "crop_only_global_small": crop_only_global_small,
    "simclr_cifar": simclr_cifar,
    "crop_only_cifar": crop_only_cifar,
}
