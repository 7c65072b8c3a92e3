"""Augmentation pipeline contracts: determinism, ranges, shapes, and the
fixed parameter values of the named stacks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecpp import augment as aug


def make_image(seed=0, h=32, w=32):
    rng = np.random.default_rng(seed)
    return rng.random((3, h, w)).astype(np.float32)


def test_solarize_inverts_bright_pixels():
    img = np.full((3, 2, 2), 0.9, dtype=np.float32)
    out = aug.solarize(img, 0.5)
    np.testing.assert_allclose(out, 0.1, atol=1e-7)
    dark = np.full((3, 2, 2), 0.3, dtype=np.float32)
    np.testing.assert_array_equal(aug.solarize(dark, 0.5), dark)


def test_horizontal_flip_is_involution():
    img = make_image(1)
    np.testing.assert_array_equal(aug.horizontal_flip(aug.horizontal_flip(img)), img)


def test_grayscale_weights_and_fixed_point():
    img = make_image(2)
    gray = aug.to_grayscale(img)
    assert gray.shape == img.shape
    expect = 0.299 * img[0] + 0.587 * img[1] + 0.114 * img[2]
    np.testing.assert_allclose(gray[0], expect, atol=1e-6)
    np.testing.assert_allclose(aug.to_grayscale(gray), gray, atol=1e-6)


def test_normalize_cifar_mean_pixel_maps_to_zero():
    img = np.empty((3, 4, 4), dtype=np.float32)
    for c, m in enumerate(aug.CIFAR_MEAN):
        img[c] = m
    out = aug.normalize(img, aug.CIFAR_MEAN, aug.CIFAR_STD)
    np.testing.assert_allclose(out, 0.0, atol=1e-6)


def test_normalize_zero_std_rejected():
    with pytest.raises(ValueError):
        aug.normalize(make_image(), (0.5, 0.5, 0.5), (0.2, 0.0, 0.2))


def test_full_scale_unit_aspect_crop_is_whole_image():
    img = make_image(3, 16, 16)
    rng = np.random.default_rng(0)
    out = aug.random_resized_crop(img, 16, (1.0, 1.0), rng, aspect=(1.0, 1.0))
    np.testing.assert_array_equal(out, img)


def test_crop_resizes_to_requested_size():
    img = make_image(4, 224, 224)
    rng = np.random.default_rng(1)
    out = aug.random_resized_crop(img, 96, (0.2, 1.0), rng)
    assert out.shape == (3, 96, 96)


def test_crop_of_constant_image_is_constant():
    img = np.full((3, 24, 24), 0.37, dtype=np.float32)
    for seed in range(5):
        out = aug.random_resized_crop(img, 12, (0.2, 1.0), np.random.default_rng(seed))
        np.testing.assert_allclose(out, 0.37, atol=1e-6)


def test_bilinear_resize_identity_and_constant():
    img = make_image(5, 8, 8)
    np.testing.assert_array_equal(aug.bilinear_resize(img, 8, 8), img)
    const = np.full((3, 7, 9), 0.25, dtype=np.float32)
    np.testing.assert_allclose(aug.bilinear_resize(const, 13, 4), 0.25, atol=1e-6)


def test_blur_kernel_clips_for_small_images():
    img = make_image(6, 8, 8)
    out = aug.gaussian_blur(img, 23, 1.0)
    assert out.shape == img.shape
    # blurring a constant image is the identity
    const = np.full((3, 8, 8), 0.6, dtype=np.float32)
    np.testing.assert_allclose(aug.gaussian_blur(const, 23, 1.0), 0.6, atol=1e-6)


def test_blur_matches_direct_convolution():
    img = make_image(7, 9, 9)
    k, sigma = 5, 0.8
    out = aug.gaussian_blur(img, k, sigma)
    xs = np.arange(k) - k // 2
    kern = np.exp(-0.5 * (xs / sigma) ** 2)
    kern /= kern.sum()
    padded = np.pad(img, ((0, 0), (2, 2), (2, 2)), mode="reflect")
    expect = np.zeros_like(img)
    for i in range(9):
        for j in range(9):
            patch = padded[:, i:i + k, j:j + k]
            expect[:, i, j] = (patch * kern[:, None] * kern[None, :]).sum(axis=(1, 2))
    np.testing.assert_allclose(out, expect, atol=1e-5)


def test_hsv_round_trip():
    img = make_image(8)
    back = aug.hsv_to_rgb(aug.rgb_to_hsv(img))
    np.testing.assert_allclose(back, img, atol=1e-5)


def test_color_jitter_identity_factors():
    img = make_image(9)
    out = aug.color_jitter(img, (1.0, 1.0, 1.0, 0.0))
    np.testing.assert_allclose(out, img, atol=1e-6)


@pytest.mark.parametrize("name", sorted(aug.PIPELINES))
def test_apply_is_deterministic(name):
    pipe = aug.PIPELINES[name](32 if "cifar" in name else 48)
    img = make_image(10, 64, 64)
    a = aug.apply(pipe, img, seed=123)
    b = aug.apply(pipe, img, seed=123)
    assert a.tobytes() == b.tobytes()
    c = aug.apply(pipe, img, seed=124)
    assert a.shape == c.shape


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**63 - 1))
def test_output_shape_and_prenormalize_range(seed):
    pipe = aug.simclr_cifar(32)
    img = make_image(11, 40, 40)
    out = aug.apply(pipe, img, seed, skip_normalize=True)
    assert out.shape == (3, 32, 32)
    assert out.min() >= 0.0 and out.max() <= 1.0


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**63 - 1))
def test_imagenet_stack_shape_and_range(seed):
    pipe = aug.simclr_full_large(48)
    img = make_image(12, 64, 64)
    out = aug.apply(pipe, img, seed, skip_normalize=True)
    assert out.shape == (3, 48, 48)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_pipeline_parameter_table():
    large = aug.simclr_full_large()
    crop, flip, jitter, gray, blur, sol, norm = large.ops
    assert (crop.out_size, crop.scale) == (224, (0.2, 1.0))
    assert flip.p == 0.5
    assert (jitter.brightness, jitter.contrast, jitter.saturation, jitter.hue, jitter.p) == \
        (0.8, 0.8, 0.8, 0.2, 0.8)
    assert gray.p == 0.2
    assert (blur.kernel, blur.sigma, blur.p) == (23, (0.1, 2.0), 0.5)
    assert sol.p == 0.1
    assert (norm.mean, norm.std) == (aug.IMAGENET_MEAN, aug.IMAGENET_STD)

    small = aug.simclr_global_small()
    assert small.out_size == 96 and small.ops[0].out_size == 96

    crop_only = aug.crop_only_global_small()
    assert [type(op).__name__ for op in crop_only.ops] == ["RandomResizedCrop", "Normalize"]

    cifar = aug.simclr_cifar()
    kinds = [type(op).__name__ for op in cifar.ops]
    assert "GaussianBlur" not in kinds and "Solarize" not in kinds
    jitter_c = cifar.ops[2]
    assert (jitter_c.brightness, jitter_c.contrast, jitter_c.saturation, jitter_c.hue) == \
        (0.4, 0.4, 0.4, 0.1)
    assert cifar.ops[-1].mean == aug.CIFAR_MEAN

    cifar_crop = aug.crop_only_cifar()
    assert [type(op).__name__ for op in cifar_crop.ops] == ["RandomResizedCrop", "Normalize"]


def test_normalize_must_be_last():
    with pytest.raises(ValueError):
        aug.AugmentPipeline("bad", 32, (aug.Normalize(aug.CIFAR_MEAN, aug.CIFAR_STD),
                                        aug.HorizontalFlip()))


def test_invalid_crop_scale_rejected():
    with pytest.raises(ValueError):
        aug.RandomResizedCrop(32, (0.0, 1.0))
    with pytest.raises(ValueError):
        aug.RandomResizedCrop(32, (0.8, 0.4))
