import json

from click.testing import CliRunner
from PIL import Image

from omni.bench import make_synthetic_mmmb, make_synthetic_msib, write_items
from omni.cli import main
from omni.dialogue import read_records


def test_preproc_image_record(tmp_path):
    path = tmp_path / "img.png"
    Image.new("RGB", (896, 448)).save(path)
    result = CliRunner().invoke(main, ["preproc", "image", str(path), "--max-tiles", "12"])
    assert result.exit_code == 0, result.output
    record = json.loads(result.output)
    assert record["grid"] == {"cols": 2, "rows": 1, "thumbnail": True}
    assert record["tile_count"] == 3
    assert record["token_count"] == 192


def test_preproc_audio_record(tmp_path):
    import numpy as np

    from omni.audio import Waveform, write_wav

    path = tmp_path / "a.wav"
    write_wav(path, Waveform(samples=np.zeros(16000, dtype=np.float32), sample_rate=16000))
    result = CliRunner().invoke(main, ["preproc", "audio", str(path)])
    assert result.exit_code == 0, result.output
    record = json.loads(result.output)
    assert record["token_count"] == 25
    assert record["mel_frames"] == 100
    assert record["mel_channels"] == 128


def test_gen_dialogues_jsonl(tmp_path, media_repo):
    out = tmp_path / "dialogues.jsonl"
    result = CliRunner().invoke(
        main,
        [
            "gen-dialogues",
            "--repo", str(media_repo.root),
            "--n", "3",
            "--turns", "5",
            "--seed", "4",
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    records = list(read_records(out))
    assert len(records) == 3
    assert all(len(r.turns) == 5 for r in records)


def test_bench_mmmb_cli(tmp_path):
    items_file = tmp_path / "items.jsonl"
    write_items(make_synthetic_mmmb(6, seed=2, echo_answers=True), items_file)
    out_dir = tmp_path / "run"
    result = CliRunner().invoke(
        main, ["bench", "mmmb", "--items", str(items_file), "--out", str(out_dir)]
    )
    assert result.exit_code == 0, result.output
    aggregates = json.loads(result.output.splitlines()[0])
    assert aggregates["scores"]["Average"] == 100.0
    assert (out_dir / "mmmb_table.tsv").exists()
    assert (out_dir / "degradation_turn_distance.png").exists()


def test_bench_msib_cli(tmp_path):
    items_file = tmp_path / "items.jsonl"
    write_items(make_synthetic_msib(6, seed=3), items_file)
    out_dir = tmp_path / "run"
    result = CliRunner().invoke(
        main, ["bench", "msib", "--items", str(items_file), "--out", str(out_dir)]
    )
    assert result.exit_code == 0, result.output
    assert (out_dir / "msib_table.tsv").exists()


def test_bench_mos_cli(tmp_path):
    ratings = tmp_path / "ratings.csv"
    ratings.write_text(
        "item_id,rater_id,score,dimension\n"
        "a,r1,3,RateControl\na,r2,4,RateControl\na,r3,5,RateControl\n"
    )
    result = CliRunner().invoke(main, ["bench", "mos", "--ratings", str(ratings)])
    assert result.exit_code == 0, result.output
    means = json.loads(result.output)
    assert means["RateControl"]["mean"] == 4.0
    assert means["RateControl"]["n_raters"] == 3


def test_gen_bench_cli(tmp_path):
    out = tmp_path / "items.jsonl"
    result = CliRunner().invoke(main, ["gen-bench", "mmmb", "--n", "10", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert len(out.read_text().splitlines()) == 10


def test_gen_dialogues_voiced_wavs_written(tmp_path, media_repo):
    out = tmp_path / "d.jsonl"
    audio_dir = tmp_path / "voiced"
    result = CliRunner().invoke(
        main,
        [
            "gen-dialogues",
            "--repo", str(media_repo.root),
            "--n", "2",
            "--turns", "3",
            "--seed", "9",
            "--out", str(out),
            "--voice",
            "--audio-dir", str(audio_dir),
        ],
    )
    assert result.exit_code == 0, result.output
    records = list(read_records(out))
    wavs = {p.stem for p in audio_dir.glob("*.wav")}
    for rec in records:
        for turn in rec.turns:
            assert turn.question_audio is not None
            assert turn.question_audio.audio_id in wavs
