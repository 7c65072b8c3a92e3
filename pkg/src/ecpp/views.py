"""Turning one source image into K augmented views.

The first two views are always full-resolution with the full SimCLR-style
stack. Additional views are small: half of them keep the full stack, the
other half are crop-only. Crops are global ([0.2, 1.0] area) for every view;
a local multi-crop variant ([0.05, 0.14]) stays constructible for
comparison experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import augment
from .seeding import mix64

SIMCLR_FULL = "simclr_full"
CROP_ONLY = "crop_only"
LARGE = "large"
SMALL = "small"

GLOBAL_CROP_SCALE = (0.2, 1.0)
LOCAL_CROP_SCALE = (0.05, 0.14)


@dataclass(frozen=True)
class ViewSpec:
    resolution: int
    scheme: str = SIMCLR_FULL
    size_class: str = LARGE

    def __post_init__(self):
        if self.scheme not in (SIMCLR_FULL, CROP_ONLY):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.size_class not in (LARGE, SMALL):
            raise ValueError(f"unknown size class {self.size_class!r}")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")


@dataclass(frozen=True)
class MultiViewConfig:
    k: int
    specs: tuple[ViewSpec, ...]
    large_resolution: int
    small_resolution: int
    family: str = "imagenet"  # which augmentation stacks: "imagenet" or "cifar"
    crop_scale: tuple[float, float] = GLOBAL_CROP_SCALE

    def __post_init__(self):
        if self.k != len(self.specs):
            raise ValueError(f"k={self.k} but {len(self.specs)} view specs")
        if self.k < 2:
            raise ValueError("need at least two views")
        if self.family not in ("imagenet", "cifar"):
            raise ValueError(f"unknown family {self.family!r}")
        for spec in self.specs[:2]:
            if spec.size_class != LARGE or spec.scheme != SIMCLR_FULL:
                raise ValueError("views 1-2 must be large with the full augmentation stack")
        for spec in self.specs:
            expected = self.large_resolution if spec.size_class == LARGE else self.small_resolution
            if spec.resolution != expected:
                raise ValueError(f"view resolution {spec.resolution} does not match "
                                 f"{spec.size_class} resolution {expected}")


def ecpp_default_config(k: int, large_res: int = 224, small_res: int = 96,
                        family: str = "imagenet",
                        crop_scale: tuple[float, float] = GLOBAL_CROP_SCALE) -> MultiViewConfig:
    """The default view layout: 2 large SimCLR views, then the k-2 small
    views split ceil/floor between the full stack and crop-only."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    specs = [ViewSpec(large_res, SIMCLR_FULL, LARGE), ViewSpec(large_res, SIMCLR_FULL, LARGE)]
    extra = k - 2
    n_simclr = (extra + 1) // 2
    for i in range(extra):
        scheme = SIMCLR_FULL if i < n_simclr else CROP_ONLY
        specs.append(ViewSpec(small_res, scheme, SMALL))
    return MultiViewConfig(k, tuple(specs), large_res, small_res, family, crop_scale)


def pipeline_for(spec: ViewSpec, family: str,
                 crop_scale: tuple[float, float] = GLOBAL_CROP_SCALE) -> augment.AugmentPipeline:
    """The augmentation stack implied by a view spec and dataset family."""
    if family == "cifar":
        if spec.scheme == SIMCLR_FULL:
            return augment.simclr_cifar(spec.resolution, crop_scale)
        return augment.crop_only_cifar(spec.resolution, crop_scale)
    if spec.scheme == CROP_ONLY:
        return augment.crop_only_global_small(spec.resolution, crop_scale)
    if spec.size_class == LARGE:
        return augment.simclr_full_large(spec.resolution, crop_scale)
    return augment.simclr_global_small(spec.resolution, crop_scale)


@dataclass
class ViewGenerator:
    """Caches one pipeline per view index for repeated generate calls."""
    cfg: MultiViewConfig
    pipelines: tuple = field(init=False)

    def __post_init__(self):
        self.pipelines = tuple(pipeline_for(s, self.cfg.family, self.cfg.crop_scale)
                               for s in self.cfg.specs)

    def view_seed(self, seed: int, epoch: int, step: int, item_index: int, view: int) -> int:
        return mix64(seed, epoch, step, item_index, view)

    def generate(self, img: np.ndarray, seed: int, epoch: int, step: int,
                 item_index: int, skip_normalize: bool = False) -> list[np.ndarray]:
        return [augment.apply(pipe, img, self.view_seed(seed, epoch, step, item_index, v),
                              skip_normalize=skip_normalize)
                for v, pipe in enumerate(self.pipelines)]


def generate_views(img: np.ndarray, cfg: MultiViewConfig, seed: int,
                   epoch: int = 0, step: int = 0, item_index: int = 0) -> list[np.ndarray]:
    """K augmented views of one image; view v depends only on its own derived seed."""
    return ViewGenerator(cfg).generate(img, seed, epoch, step, item_index)


def pixel_cost(cfg: MultiViewConfig) -> float:
    """Relative forward cost per item, in units of one large view."""
    large = cfg.large_resolution ** 2
    return float(sum(s.resolution ** 2 for s in cfg.specs) / large)
