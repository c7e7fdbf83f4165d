"""Labeled patch datasets built from page and line images.

Training patches are 256x256 crops on a stride-42 grid; pages are resized
first, line images are white-padded to 256 rows, and all-background
patches can be discarded by the minimum-intensity rule. Patch provenance
(source path, grid position, scale) travels with every patch so datasets
can be re-derived from a text manifest.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .raster import GrayImage, as_gray, resize_scale

TRAIN_PATCH = 256
TRAIN_STRIDE = 42
BACKGROUND_MIN_INTENSITY = 100

REGION_LABELS = ("text", "background", "figure", "annotation")
EXTENDED_CLASSES = ("background", "figure", "annotation")
NOISE_TEXT_CLASS = "Text"


@dataclass(frozen=True)
class PatchSource:
    """Where a patch came from: source image, grid top-left, image scale."""

    path: str
    x: int
    y: int
    scale: float = 1.0


@dataclass(frozen=True)
class LabeledPatch:
    image: GrayImage
    label: int
    source: PatchSource


@dataclass(frozen=True)
class RegionAnnotation:
    """Per training-grid-patch region label for one source image."""

    path: str
    x: int
    y: int
    region: str


@dataclass
class PatchDataset:
    classes: list[str]
    patches: list[LabeledPatch]
    split: str = "train"
    # Class names excluded from argmax at prediction time.
    disallowed: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("duplicate class names")
        for p in self.patches:
            if not 0 <= p.label < len(self.classes):
                raise ValueError(f"label {p.label} outside class set")

    def class_counts(self) -> list[int]:
        counts = [0] * len(self.classes)
        for p in self.patches:
            counts[p.label] += 1
        return counts


def grid_positions(dim: int, window: int, stride: int) -> list[int]:
    """Top-left offsets r*stride such that the window fits entirely."""
    if dim < window:
        return []
    return [r * stride for r in range((dim - window) // stride + 1)]


def extract_training_patches(
    img: GrayImage,
    label: int,
    stride: int = TRAIN_STRIDE,
    *,
    patch_size: int = TRAIN_PATCH,
    source_path: str = "",
    scale: float = 1.0,
) -> list[LabeledPatch]:
    """All patch_size x patch_size crops on the stride grid, row-major order."""
    img = as_gray(img)
    h, w = img.shape
    if h < patch_size or w < patch_size:
        raise ValueError(
            f"image {w}x{h} smaller than {patch_size} patch; pad it first"
        )
    out = []
    for y in grid_positions(h, patch_size, stride):
        for x in grid_positions(w, patch_size, stride):
            crop = img[y : y + patch_size, x : x + patch_size].copy()
            out.append(LabeledPatch(crop, label, PatchSource(source_path, x, y, scale)))
    return out


def pad_line_image(img: GrayImage, target_h: int = TRAIN_PATCH) -> GrayImage:
    """White-pad a line image to target height, content vertically centered.

    When the padding is odd the extra row goes below.
    """
    img = as_gray(img)
    h, w = img.shape
    if h > target_h:
        raise ValueError(f"line height {h} exceeds target {target_h}")
    if h == target_h:
        return img.copy()
    top = (target_h - h) // 2
    bottom = target_h - h - top
    return np.pad(img, ((top, bottom), (0, 0)), constant_values=255)


def pad_to_min(img: GrayImage, min_w: int = TRAIN_PATCH, min_h: int = TRAIN_PATCH) -> GrayImage:
    """White-pad (centered, extra row/col at bottom/right) up to a minimum size."""
    img = as_gray(img)
    h, w = img.shape
    if h >= min_h and w >= min_w:
        return img
    top = max(0, (min_h - h) // 2)
    bottom = max(0, min_h - h - top)
    left = max(0, (min_w - w) // 2)
    right = max(0, min_w - w - left)
    return np.pad(img, ((top, bottom), (left, right)), constant_values=255)


def is_background_patch(patch: GrayImage) -> bool:
    """True when the minimum intensity exceeds 100 (background-only patch)."""
    return int(as_gray(patch).min()) > BACKGROUND_MIN_INTENSITY


def build_dataset(
    pages,
    classes,
    *,
    scale: float = 1.0,
    stride: int = TRAIN_STRIDE,
    discard_background: bool = False,
    split: str = "train",
    line_format: bool = False,
) -> PatchDataset:
    """Patch a sequence of (image, label) or (image, label, path) pages.

    Pages are resized, padded to the 256 minimum (line images get the
    vertical line padding), and patched in page order then row-major grid
    order, so two builds from the same inputs are identical.
    """
    patches: list[LabeledPatch] = []
    for i, page in enumerate(pages):
        if len(page) == 3:
            img, label, path = page
        else:
            img, label = page
            path = f"page-{i}"
        img = resize_scale(as_gray(img), scale)
        if line_format:
            img = pad_line_image(img)
        img = pad_to_min(img)
        for p in extract_training_patches(
            img, label, stride, source_path=path, scale=scale
        ):
            if discard_background and is_background_patch(p.image):
                continue
            patches.append(p)
    return PatchDataset(list(classes), patches, split=split)


def _annotation_index(annotations) -> dict[tuple[str, int, int], str]:
    index = {}
    for a in annotations:
        if a.region not in REGION_LABELS:
            raise ValueError(f"unknown region label {a.region!r}")
        index[(a.path, a.x, a.y)] = a.region
    return index


def relabel_dataset(ds: PatchDataset, annotations, mode: str) -> PatchDataset:
    """Apply one of the region-annotation training-set modifications.

    filtered: drop non-text patches, class set unchanged.
    extended: add background/figure/annotation classes and reassign
      non-text patches to them; the new classes are prediction-disallowed.
    noise: script classes keep only their non-text patches; all text
      patches move to a new prediction-disallowed "Text" class.
    """
    if mode not in ("filtered", "extended", "noise"):
        raise ValueError(f"unknown relabel mode {mode!r}")
    index = _annotation_index(annotations)

    def region_of(p: LabeledPatch) -> str:
        key = (p.source.path, p.source.x, p.source.y)
        if key not in index:
            raise ValueError(
                f"no region annotation for patch at {key} (label {p.label})"
            )
        return index[key]

    if mode == "filtered":
        kept = [p for p in ds.patches if region_of(p) == "text"]
        return PatchDataset(list(ds.classes), kept, split=ds.split)

    if mode == "extended":
        classes = list(ds.classes) + list(EXTENDED_CLASSES)
        region_idx = {r: classes.index(r) for r in EXTENDED_CLASSES}
        patches = [
            p if region_of(p) == "text" else replace(p, label=region_idx[region_of(p)])
            for p in ds.patches
        ]
        return PatchDataset(
            classes, patches, split=ds.split, disallowed=EXTENDED_CLASSES
        )

    classes = list(ds.classes) + [NOISE_TEXT_CLASS]
    text_idx = classes.index(NOISE_TEXT_CLASS)
    patches = [
        replace(p, label=text_idx) if region_of(p) == "text" else p
        for p in ds.patches
    ]
    return PatchDataset(
        classes, patches, split=ds.split, disallowed=(NOISE_TEXT_CLASS,)
    )


# --- manifests and sidecar files ---

def save_manifest(ds: PatchDataset, path) -> None:
    """Write the dataset manifest: header comments, then one patch per line
    (source-path, scale, grid-x, grid-y, label-name, tab-separated)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# split\t{ds.split}\n")
        fh.write("# classes\t" + "\t".join(ds.classes) + "\n")
        if ds.disallowed:
            fh.write("# disallowed\t" + "\t".join(ds.disallowed) + "\n")
        for p in ds.patches:
            fh.write(
                f"{p.source.path}\t{p.source.scale:g}\t{p.source.x}\t{p.source.y}"
                f"\t{ds.classes[p.label]}\n"
            )


def load_manifest(path, load_image=None, *, line_format: bool = False) -> PatchDataset:
    """Rebuild a dataset from a manifest, re-deriving pixels from sources.

    load_image maps a source path to its GrayImage (defaults to PGM load).
    Every patch is re-cropped exactly as during the original build.
    """
    from .raster import load_pgm

    if load_image is None:
        load_image = load_pgm
    split = "train"
    classes: list[str] = []
    disallowed: tuple[str, ...] = ()
    rows: list[tuple[str, float, int, int, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].strip().split("\t")
                if fields[0] == "split":
                    split = fields[1]
                elif fields[0] == "classes":
                    classes = fields[1:]
                elif fields[0] == "disallowed":
                    disallowed = tuple(fields[1:])
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(fields)}")
            rows.append((fields[0], float(fields[1]), int(fields[2]), int(fields[3]), fields[4]))
    if not classes:
        raise ValueError(f"{path}: missing '# classes' header")
    class_idx = {c: i for i, c in enumerate(classes)}

    prepared: dict[tuple[str, float], GrayImage] = {}
    patches = []
    for src, scale, x, y, label_name in rows:
        if label_name not in class_idx:
            raise ValueError(f"{path}: unknown class {label_name!r}")
        key = (src, scale)
        if key not in prepared:
            img = resize_scale(as_gray(load_image(src)), scale)
            if line_format:
                img = pad_line_image(img)
            prepared[key] = pad_to_min(img)
        img = prepared[key]
        crop = img[y : y + TRAIN_PATCH, x : x + TRAIN_PATCH].copy()
        if crop.shape != (TRAIN_PATCH, TRAIN_PATCH):
            raise ValueError(f"{path}: patch at ({x},{y}) falls outside {src}")
        patches.append(LabeledPatch(crop, class_idx[label_name], PatchSource(src, x, y, scale)))
    return PatchDataset(classes, patches, split=split, disallowed=disallowed)


def materialize_patches(ds: PatchDataset, out_dir) -> list[str]:
    """Write every patch as <class>/<source-stem>_<x>_<y>.pgm under out_dir."""
    import os

    from .raster import save_pgm

    written = []
    for p in ds.patches:
        cls = ds.classes[p.label]
        stem = os.path.splitext(os.path.basename(p.source.path))[0] or "patch"
        d = os.path.join(out_dir, cls)
        os.makedirs(d, exist_ok=True)
        dest = os.path.join(d, f"{stem}_{p.source.x}_{p.source.y}.pgm")
        save_pgm(p.image, dest)
        written.append(dest)
    return written


def save_annotations(annotations, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in annotations:
            fh.write(f"{a.path}\t{a.x}\t{a.y}\t{a.region}\n")


def load_annotations(path) -> list[RegionAnnotation]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields")
            out.append(RegionAnnotation(fields[0], int(fields[1]), int(fields[2]), fields[3]))
    return out
