import numpy as np
import pytest

from fontpatch.dataset import (
    LabeledPatch,
    PatchDataset,
    PatchSource,
    RegionAnnotation,
    build_dataset,
    extract_training_patches,
    grid_positions,
    is_background_patch,
    load_annotations,
    load_manifest,
    materialize_patches,
    pad_line_image,
    pad_to_min,
    relabel_dataset,
    save_annotations,
    save_manifest,
)
from fontpatch.raster import save_pgm


def window_oracle(w, h, window, stride):
    """Slide a window one pixel at a time, keeping stride-grid positions."""
    positions = []
    for y in range(0, h - window + 1):
        for x in range(0, w - window + 1):
            if x % stride == 0 and y % stride == 0:
                positions.append((x, y))
    return positions


def test_single_placement():
    img = np.zeros((256, 256), dtype=np.uint8)
    patches = extract_training_patches(img, 0, 42)
    assert len(patches) == 1
    assert (patches[0].source.x, patches[0].source.y) == (0, 0)


def test_340x298_count():
    img = np.zeros((298, 340), dtype=np.uint8)  # h=298, w=340
    patches = extract_training_patches(img, 0, 42)
    assert len(patches) == 6  # 3 across x 2 down
    got = [(p.source.x, p.source.y) for p in patches]
    assert got == window_oracle(340, 298, 256, 42)


def test_patch_positions_match_window_oracle(rng):
    for _ in range(60):
        w = int(rng.integers(256, 700))
        h = int(rng.integers(256, 700))
        stride = int(rng.integers(1, 130))
        img = rng.integers(0, 256, size=(h, w), dtype=np.uint8)
        patches = extract_training_patches(img, 1, stride)
        got = [(p.source.x, p.source.y) for p in patches]
        assert got == window_oracle(w, h, 256, stride)


def test_patch_pixels_are_exact_crops(rng):
    img = rng.integers(0, 256, size=(300, 310), dtype=np.uint8)
    for p in extract_training_patches(img, 0, 42):
        x, y = p.source.x, p.source.y
        assert np.array_equal(p.image, img[y : y + 256, x : x + 256])


def test_small_image_padded_then_patched():
    img = np.zeros((255, 300), dtype=np.uint8)
    ds = build_dataset([(img, 0, "p")], ["c"], stride=42)
    assert len(ds.patches) == 2  # padded to 256 high -> 1x2 grid


def test_pad_line_image_even_and_odd():
    img = np.full((100, 40), 9, dtype=np.uint8)
    out = pad_line_image(img)
    assert out.shape == (256, 40)
    assert (out[:78] == 255).all() and (out[178:] == 255).all()
    assert np.array_equal(out[78:178], img)

    odd = pad_line_image(np.full((101, 4), 3, dtype=np.uint8))
    assert (odd[:77] == 255).all()  # 77 above, 78 below
    assert (odd[178:] == 255).all()

    same = pad_line_image(np.full((256, 4), 3, dtype=np.uint8))
    assert same.shape == (256, 4)
    with pytest.raises(ValueError):
        pad_line_image(np.zeros((257, 4), dtype=np.uint8))


def test_pad_to_min_centers_content():
    img = np.full((10, 10), 7, dtype=np.uint8)
    out = pad_to_min(img, 16, 15)
    assert out.shape == (15, 16)
    assert np.array_equal(out[2:12, 3:13], img)
    assert out[0, 0] == 255


def test_is_background_patch_threshold():
    assert is_background_patch(np.full((4, 4), 101, dtype=np.uint8))
    assert not is_background_patch(np.full((4, 4), 100, dtype=np.uint8))
    patch = np.full((4, 4), 200, dtype=np.uint8)
    patch[2, 2] = 0
    assert not is_background_patch(patch)


def test_build_dataset_scales_and_counts(rng):
    page = rng.integers(0, 90, size=(512, 512), dtype=np.uint8)
    ds = build_dataset([(page, 0, "pg")], ["c"], scale=1.0, stride=42)
    assert len(ds.patches) == 49
    ds_half = build_dataset([(page, 0, "pg")], ["c"], scale=0.5, stride=42)
    assert len(ds_half.patches) == 1


def test_build_dataset_discards_background():
    white = np.full((300, 300), 255, dtype=np.uint8)
    ds = build_dataset([(white, 0, "w")], ["c"], discard_background=True)
    assert len(ds.patches) == 0


def test_build_dataset_deterministic_serialization(tmp_path, rng):
    pages = [
        (rng.integers(0, 256, size=(300, 320), dtype=np.uint8), i % 2, f"p{i}")
        for i in range(3)
    ]
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    save_manifest(build_dataset(pages, ["x", "y"]), a)
    save_manifest(build_dataset(pages, ["x", "y"]), b)
    assert a.read_bytes() == b.read_bytes()


def make_annotated(n_text=10, n_figure=5):
    patches = []
    anns = []
    img = np.zeros((256, 256), dtype=np.uint8)
    for i in range(n_text + n_figure):
        src = PatchSource(f"img{i}", 0, 0)
        patches.append(LabeledPatch(img, i % 2, src))
        region = "text" if i < n_text else "figure"
        anns.append(RegionAnnotation(src.path, 0, 0, region))
    return PatchDataset(["uncial", "caroline"], patches), anns


def test_relabel_filtered():
    ds, anns = make_annotated()
    out = relabel_dataset(ds, anns, "filtered")
    assert len(out.patches) == 10
    assert out.classes == ds.classes
    assert out.disallowed == ()


def test_relabel_extended():
    ds, anns = make_annotated()
    out = relabel_dataset(ds, anns, "extended")
    assert len(out.patches) == 15
    assert out.classes == ["uncial", "caroline", "background", "figure", "annotation"]
    figure_idx = out.classes.index("figure")
    assert sum(p.label == figure_idx for p in out.patches) == 5
    assert out.disallowed == ("background", "figure", "annotation")


def test_relabel_noise():
    ds, anns = make_annotated()
    out = relabel_dataset(ds, anns, "noise")
    assert len(out.patches) == 15
    text_idx = out.classes.index("Text")
    assert sum(p.label == text_idx for p in out.patches) == 10
    script_counts = [sum(p.label == i for p in out.patches) for i in range(2)]
    assert sum(script_counts) == 5
    assert out.disallowed == ("Text",)


def test_relabel_conservation_random(rng):
    img = np.zeros((256, 256), dtype=np.uint8)
    regions = ["text", "background", "figure", "annotation"]
    for _ in range(10):
        n = int(rng.integers(1, 40))
        patches, anns = [], []
        for i in range(n):
            src = PatchSource(f"s{i}", int(rng.integers(3)) * 42, 0)
            patches.append(LabeledPatch(img, int(rng.integers(3)), src))
            anns.append(
                RegionAnnotation(src.path, src.x, src.y, regions[rng.integers(4)])
            )
        ds = PatchDataset(["a", "b", "c"], patches)
        n_text = sum(a.region == "text" for a in anns)
        filtered = relabel_dataset(ds, anns, "filtered")
        extended = relabel_dataset(ds, anns, "extended")
        noise = relabel_dataset(ds, anns, "noise")
        assert len(filtered.patches) + (n - n_text) == n
        assert len(extended.patches) == n
        assert len(noise.patches) == n


def test_relabel_missing_annotation():
    ds, anns = make_annotated()
    with pytest.raises(ValueError, match="no region annotation"):
        relabel_dataset(ds, anns[:-1], "noise")
    with pytest.raises(ValueError, match="unknown relabel mode"):
        relabel_dataset(ds, anns, "bogus")


def test_manifest_round_trip(tmp_path, rng):
    srcs = {}
    pages = []
    for i in range(2):
        img = rng.integers(0, 256, size=(300, 300), dtype=np.uint8)
        path = str(tmp_path / f"src{i}.pgm")
        save_pgm(img, path)
        srcs[path] = img
        pages.append((img, i, path))
    ds = build_dataset(pages, ["a", "b"], scale=0.9, stride=42, split="test")
    mpath = tmp_path / "manifest.tsv"
    save_manifest(ds, mpath)
    loaded = load_manifest(mpath)
    assert loaded.classes == ds.classes
    assert loaded.split == "test"
    assert len(loaded.patches) == len(ds.patches)
    for p, q in zip(ds.patches, loaded.patches):
        assert p.label == q.label
        assert p.source == q.source
        assert np.array_equal(p.image, q.image)


def test_materialize_patches_layout(tmp_path):
    img = np.full((256, 256), 60, dtype=np.uint8)
    ds = PatchDataset(["k"], [LabeledPatch(img, 0, PatchSource("dir/page1.pgm", 42, 0))])
    written = materialize_patches(ds, tmp_path)
    assert written == [str(tmp_path / "k" / "page1_42_0.pgm")]


def test_annotation_sidecar_round_trip(tmp_path):
    anns = [RegionAnnotation("a.pgm", 0, 42, "figure"), RegionAnnotation("b.pgm", 42, 0, "text")]
    path = tmp_path / "ann.tsv"
    save_annotations(anns, path)
    assert load_annotations(path) == anns


def test_grid_positions_too_small():
    assert grid_positions(100, 256, 42) == []
