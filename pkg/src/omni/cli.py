"""Command-line interface: preprocessing inspectors, dialogue generation,
benchmark runs (with tables and figures), and the HTTP service."""

from __future__ import annotations

import json
import sys
import uuid
from pathlib import Path

import click

from . import audio as audiolib
from . import vision
from .backends import BackendProfile, make_backend
from .bench import (
    BackendModel,
    BackendSpeechModel,
    BenchAborted,
    BenchReport,
    ingest_mos,
    load_mmmb_items,
    load_msib_items,
    make_synthetic_mmmb,
    make_synthetic_msib,
    mmmb_aggregates,
    msib_aggregates,
    run_mmmb,
    run_msib,
    write_items,
)
from .dialogue import (
    DialogueSpec,
    MediaRepository,
    ToyTTS,
    build_dialogue,
    uniform_mix,
    write_records,
)
from .errors import OmniError
from .session import QuestionCategory


@click.group()
def main() -> None:
    """Omni-modal interaction pipeline tools."""


# -- preprocessing ------------------------------------------------------------------

@main.group()
def preproc() -> None:
    """Input token accounting."""


@preproc.command("image")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--min-tiles", default=vision.DEFAULT_MIN_TILES, show_default=True)
@click.option("--max-tiles", default=vision.DEFAULT_MAX_TILES, show_default=True)
@click.option("--thumbnail/--no-thumbnail", default=True, show_default=True)
def preproc_image(path: str, min_tiles: int, max_tiles: int, thumbnail: bool) -> None:
    """Print grid, tile count, and visual token count for one image."""
    from PIL import Image

    with Image.open(path) as img:
        meta = vision.ImageMeta(img.width, img.height)
    grid = vision.select_tile_grid(meta, min_tiles, max_tiles, thumbnail)
    record = {
        "path": path,
        "width_px": meta.width_px,
        "height_px": meta.height_px,
        "grid": {"cols": grid.cols, "rows": grid.rows, "thumbnail": grid.use_thumbnail},
        "tile_count": grid.tile_count,
        "token_count": vision.visual_token_count(grid),
    }
    click.echo(json.dumps(record, sort_keys=True))


@preproc.command("audio")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def preproc_audio(path: str) -> None:
    """Print duration, mel frame count, and audio token count for a PCM WAV."""
    wave = audiolib.read_wav(path)
    wave16 = audiolib.resample(wave)
    mel = audiolib.log_mel(wave16)
    record = {
        "path": path,
        "sample_rate": wave.sample_rate,
        "duration_s": round(wave16.duration_s, 6),
        "mel_frames": mel.n_frames,
        "mel_channels": mel.frames.shape[1],
        "token_count": audiolib.audio_token_count(wave16.duration_s),
    }
    click.echo(json.dumps(record, sort_keys=True))


# -- dialogue generation ---------------------------------------------------------------

def _load_mix(path: str | None) -> dict[QuestionCategory, float]:
    if not path:
        return uniform_mix()
    doc = json.loads(Path(path).read_text())
    try:
        return {QuestionCategory(name): float(w) for name, w in doc.items()}
    except ValueError as exc:
        raise click.ClickException(f"bad category in mix file: {exc}")


def _load_profile(path: str | None) -> BackendProfile:
    if not path:
        return BackendProfile(kind="toy")
    doc = json.loads(Path(path).read_text())
    return BackendProfile.from_dict(doc)


@main.command("gen-dialogues")
@click.option("--repo", "repo_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--n", "count", default=1, show_default=True, help="Number of dialogues.")
@click.option("--turns", default=8, show_default=True)
@click.option("--mix", "mix_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_file", required=True, type=click.Path(dir_okay=False))
@click.option("--voice", is_flag=True, help="Attach toy-TTS audio to every question.")
@click.option("--backend-config", type=click.Path(exists=True, dir_okay=False))
@click.option("--audio-dir", type=click.Path(file_okay=False), help="Where voiced WAVs go.")
def gen_dialogues(
    repo_dir: str,
    count: int,
    turns: int,
    mix_file: str | None,
    seed: int,
    out_file: str,
    voice: bool,
    backend_config: str | None,
    audio_dir: str | None,
) -> None:
    """Construct seeded multi-turn dialogues from a media repository."""
    repo = MediaRepository.load(repo_dir)
    mix = _load_mix(mix_file)
    backend = make_backend(_load_profile(backend_config))
    tts = ToyTTS(seed=seed)
    records = []
    for k in range(count):
        spec = DialogueSpec(num_turns=turns, category_mix=mix, seed=seed + k, voice=voice)
        records.append(build_dialogue(repo, spec, backend, tts=tts, audio_dir=audio_dir))
    n = write_records(records, out_file)
    click.echo(f"wrote {n} dialogues to {out_file}")


# -- benchmarks -------------------------------------------------------------------------

@main.group()
def bench() -> None:
    """Benchmark runs and score aggregation."""


def _finish_report(report: BenchReport, out_dir: str) -> None:
    out = report.save(out_dir)
    click.echo(json.dumps(report.aggregates, sort_keys=True))
    click.echo(f"report written to {out}", err=True)


@bench.command("mmmb")
@click.option("--items", "items_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model-config", type=click.Path(exists=True, dir_okay=False))
@click.option("--judge-config", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--parallelism", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
def bench_mmmb(items_file, model_config, judge_config, out_dir, parallelism, seed) -> None:
    """Run the multi-turn memory benchmark."""
    items = load_mmmb_items(items_file)
    model_profile = _load_profile(model_config)
    judge_profile = _load_profile(judge_config)
    model = BackendModel(make_backend(model_profile))
    judge = make_backend(judge_profile)
    run_id = uuid.uuid4().hex[:12]
    config = {
        "items_file": items_file,
        "model_name": model_profile.model_name,
        "model": model_profile.to_dict(),
        "judge": judge_profile.to_dict(),
        "parallelism": parallelism,
        "seed": seed,
    }
    try:
        verdicts = run_mmmb(items, model, judge, parallelism=parallelism, seed=seed)
        status = "complete"
    except BenchAborted as exc:
        verdicts = exc.partial_report or []
        status = "partial"
        click.echo(f"aborted: {exc}", err=True)
    report = BenchReport(
        run_id=run_id,
        kind="mmmb",
        config=config,
        verdicts=[v.to_dict() for v in verdicts],
        aggregates=mmmb_aggregates(items, verdicts) if verdicts else {},
        status=status,
    )
    _finish_report(report, out_dir)
    if status == "partial":
        sys.exit(1)


@bench.command("msib")
@click.option("--items", "items_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model-config", type=click.Path(exists=True, dir_okay=False))
@click.option("--judge-config", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--parallelism", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
def bench_msib(items_file, model_config, judge_config, out_dir, parallelism, seed) -> None:
    """Run the speech interaction benchmark."""
    items = load_msib_items(items_file)
    model_profile = _load_profile(model_config)
    judge_profile = _load_profile(judge_config)
    model = BackendSpeechModel(make_backend(model_profile))
    judge = make_backend(judge_profile)
    run_id = uuid.uuid4().hex[:12]
    config = {
        "items_file": items_file,
        "model_name": model_profile.model_name,
        "model": model_profile.to_dict(),
        "judge": judge_profile.to_dict(),
        "parallelism": parallelism,
        "seed": seed,
    }
    try:
        verdicts = run_msib(items, model, judge, parallelism=parallelism, seed=seed)
        status = "complete"
    except BenchAborted as exc:
        verdicts = exc.partial_report or []
        status = "partial"
        click.echo(f"aborted: {exc}", err=True)
    report = BenchReport(
        run_id=run_id,
        kind="msib",
        config=config,
        verdicts=[v.to_dict() for v in verdicts],
        aggregates=msib_aggregates(verdicts) if verdicts else {},
        status=status,
    )
    _finish_report(report, out_dir)
    if status == "partial":
        sys.exit(1)


@bench.command("mos")
@click.option("--ratings", "ratings_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--items", "items_file", type=click.Path(exists=True, dir_okay=False),
              help="Optional items file supplying dimensions when the CSV has none.")
def bench_mos(ratings_file, items_file) -> None:
    """Aggregate human mean-opinion-score ratings per dimension."""
    mapping = None
    if items_file:
        mapping = {i.item_id: i.dimension for i in load_msib_items(items_file)}
    means = ingest_mos(ratings_file, item_dimensions=mapping)
    click.echo(json.dumps(means, sort_keys=True))


@main.command("gen-bench")
@click.argument("kind", type=click.Choice(["mmmb", "msib"]))
@click.option("--n", "count", default=300, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_file", required=True, type=click.Path(dir_okay=False))
@click.option("--echo-answers", is_flag=True,
              help="Embed markers so the toy backend answers perfectly (plumbing checks).")
def gen_bench(kind, count, seed, out_file, echo_answers) -> None:
    """Write a synthetic benchmark dataset."""
    if kind == "mmmb":
        items = make_synthetic_mmmb(count, seed=seed, echo_answers=echo_answers)
    else:
        items = make_synthetic_msib(count, seed=seed)
    n = write_items(items, out_file)
    click.echo(f"wrote {n} {kind} items to {out_file}")


# -- service -------------------------------------------------------------------------------

@main.command("serve")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
def serve(config_file, host, port) -> None:
    """Start the HTTP session/bench service."""
    import uvicorn

    from .service import ServiceConfig, create_app, load_config

    config = load_config(config_file) if config_file else ServiceConfig()
    uvicorn.run(create_app(config), host=host, port=port)


def _main() -> None:
    try:
        main(standalone_mode=True)
    except OmniError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    _main()
