from omni.backends import BackendProfile
from omni.dialogue import entry_media_refs, RepoEntry
from omni.service import load_config
from omni.session import turn_token_cost


def test_load_config_from_yaml(tmp_path):
    cfg_file = tmp_path / "omni.yaml"
    cfg_file.write_text(
        "data_dir: /tmp/omni-test\n"
        "backend: {kind: toy, seed: 3}\n"
        "judge: {kind: toy}\n"
        "bench_workers: 2\n"
    )
    cfg = load_config(cfg_file)
    assert cfg.data_dir == "/tmp/omni-test"
    assert cfg.backend.seed == 3
    assert cfg.bench_workers == 2


def test_load_config_env_fallback(tmp_path, monkeypatch):
    cfg_file = tmp_path / "omni.yaml"
    cfg_file.write_text("data_dir: /tmp/x\n")
    monkeypatch.setenv("OMNI_BACKEND_URL", "http://models.internal")
    monkeypatch.setenv("OMNI_BACKEND_KEY", "k1")
    monkeypatch.delenv("OMNI_JUDGE_URL", raising=False)
    cfg = load_config(cfg_file)
    assert cfg.backend.kind == "remote"
    assert cfg.backend.endpoint == "http://models.internal"
    assert cfg.backend.api_key == "k1"
    assert cfg.judge.kind == "toy"


def test_profile_from_env_defaults_to_toy(monkeypatch):
    monkeypatch.delenv("OMNI_BACKEND_URL", raising=False)
    assert BackendProfile.from_env("backend").kind == "toy"


def test_video_entry_expands_to_frames(tmp_path):
    (tmp_path / "v.mp4").write_bytes(b"x")
    entry = RepoEntry(id="v", kind="video", path="v.mp4")
    refs = entry_media_refs(entry)
    assert len(refs) == 8
    assert all(r.width_px == r.height_px == 448 for r in refs)
    # One frame costs one tile: 64 tokens; a full video costs 512.
    assert turn_token_cost("", media=refs) == 8 * 64


def test_image_entry_keeps_dimensions():
    entry = RepoEntry(id="i", kind="image", path="i.png", width_px=896, height_px=448)
    (ref,) = entry_media_refs(entry)
    assert (ref.width_px, ref.height_px) == (896, 448)
