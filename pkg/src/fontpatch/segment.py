"""Foreground/background separation for document images.

Text is dark ink on a light page, so foreground pixels are those at or
below the Otsu threshold. Constant images threshold to 0 and yield an
all-background mask ("no text present").
"""

from __future__ import annotations

import numpy as np

from .raster import GrayImage, as_gray, to_u8

ForegroundMask = np.ndarray  # 2-D bool, True on ink

# A patch counts as text-free when at most this fraction of its pixels
# is foreground under its own Otsu mask.
CLEAN_BACKGROUND_MAX_FG = 0.005


def otsu_threshold(img: GrayImage) -> int:
    """Threshold maximizing between-class variance; smallest value on ties.

    Foreground is ``pixel <= t``. The scan is exact: class weights and sums
    are integers, and candidate thresholds are compared by cross-multiplied
    integer fractions, so ties resolve deterministically.
    """
    img = as_gray(img)
    hist = np.bincount(img.ravel(), minlength=256)
    counts = [int(c) for c in hist]
    sums = [t * c for t, c in enumerate(counts)]
    n_total = sum(counts)
    s_total = sum(sums)
    # sigma_b(t) is proportional to A^2 / B with
    #   A = s0 * w1 - (s_total - s0) * w0,  B = w0 * w1.
    best_t, best_num, best_den = 0, 0, 1
    w0 = s0 = 0
    for t in range(256):
        w0 += counts[t]
        s0 += sums[t]
        w1 = n_total - w0
        if w0 == 0 or w1 == 0:
            continue
        a = s0 * w1 - (s_total - s0) * w0
        num, den = a * a, w0 * w1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def foreground_mask(img: GrayImage) -> ForegroundMask:
    """Boolean mask, True exactly where ``pixel <= otsu_threshold(img)``."""
    img = as_gray(img)
    return img <= otsu_threshold(img)


def is_text_free(patch: GrayImage, max_fg_fraction: float = CLEAN_BACKGROUND_MAX_FG) -> bool:
    """True when the patch's own Otsu foreground fraction is below the cutoff."""
    patch = as_gray(patch)
    return foreground_mask(patch).mean() < max_fg_fraction


def estimate_background(patches, target_w: int, target_h: int) -> GrayImage:
    """Pixel-wise mean of text-free patches of size target_w x target_h.

    Callers are responsible for filtering the inputs to patches without
    foreground (see :func:`is_text_free`).
    """
    if not patches:
        raise ValueError("estimate_background needs at least one patch")
    acc = np.zeros((target_h, target_w), dtype=np.float64)
    for i, patch in enumerate(patches):
        patch = as_gray(patch)
        if patch.shape != (target_h, target_w):
            raise ValueError(
                f"patch {i} is {patch.shape[1]}x{patch.shape[0]}, "
                f"expected {target_w}x{target_h}"
            )
        acc += patch
    return to_u8(acc / len(patches))


def mask_to_image(mask: ForegroundMask) -> GrayImage:
    """Render a mask as a {0, 255} image (foreground black) for inspection."""
    return np.where(mask, 0, 255).astype(np.uint8)
