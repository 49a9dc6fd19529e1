import numpy as np
import pytest

cv2 = pytest.importorskip("cv2")
pc = pytest.importorskip("photocari")


def _photo(rng, size):
    img = np.zeros((size, size, 3), np.uint8)
    img[:] = np.linspace(40, 200, size, dtype=np.uint8)[None, :, None]
    axes = (size // 4 + int(rng.integers(0, 4)), size // 3)
    cv2.ellipse(img, (size // 2, size // 2), axes, 0, 0, 360, (150, 170, 200), -1)
    return cv2.GaussianBlur(img, (7, 7), 3)


def _caricature(rng, size):
    img = np.full((size, size, 3), 240, np.uint8)
    axes = (size // 3, size // 2 - 4 - int(rng.integers(0, 4)))
    cv2.ellipse(img, (size // 2, size // 2), axes, 0, 0, 360, (60, 120, 240), -1)
    cv2.ellipse(img, (size // 2, size // 2), axes, 0, 0, 360, (0, 0, 0), 3)
    return img


@pytest.fixture(scope="session")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("photocari")
    rng = np.random.default_rng(0)
    for sub, make, prefix in (("photos", _photo, "p"), ("caricatures", _caricature, "c")):
        (root / "data" / sub).mkdir(parents=True)
        for i in range(4):
            cv2.imwrite(str(root / "data" / sub / f"{prefix}{i:02d}.png"), make(rng, 80))
    pc.make_extractor(str(root / "ext.pt"), "relu3_1", 1)
    return root


@pytest.fixture(scope="session")
def desk_overrides(workdir):
    return {
        "data_root": str(workdir / "data"),
        "checkpoint_dir": str(workdir / "ckpt"),
        "extractor_weights": str(workdir / "ext.pt"),
        "seed": 5,
        "hp": {"steps_stage1": 3, "steps_stage2": 3},
    }


@pytest.fixture(scope="session")
def trained(desk_overrides):
    pc.train(1, desk_overrides, preset="desk")
    return pc.train(2, desk_overrides, preset="desk")
