import pytest
from PIL import Image

from omni.dialogue import MediaRepository


def make_repo(root, n_images: int = 24, n_videos: int = 2) -> MediaRepository:
    root.mkdir(parents=True, exist_ok=True)
    for i in range(n_images):
        img = Image.new("RGB", (64 + 8 * i, 48 + 8 * i), (i * 10 % 255, 80, 120))
        img.save(root / f"img{i:03d}.png")
    for i in range(n_videos):
        (root / f"vid{i:03d}.mp4").write_bytes(b"\x00" * 16)
    repo = MediaRepository.scan(root)
    repo.save_index()
    return repo


@pytest.fixture
def media_repo(tmp_path):
    return make_repo(tmp_path / "repo")
