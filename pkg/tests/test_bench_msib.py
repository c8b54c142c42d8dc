import json
import random
from pathlib import Path

import pytest

from omni.backends import BackendProfile, ToyBackend
from omni.bench import (
    BackendSpeechModel,
    BenchReport,
    MSIBResponse,
    MSIBVerdict,
    ScriptedSpeechModel,
    aggregate_msib,
    ingest_mos,
    make_synthetic_msib,
    msib_aggregates,
    parse_msib_verdict,
    render_judge_prompt,
    run_msib,
)
from omni.bench.items import MSIB_DIMENSIONS, load_msib_items, write_items
from omni.bench.msib import MSIBVerdictRecord
from omni.errors import ConfigError, ValidationError, VerdictParseError, VerdictRangeError

GOLDEN = Path(__file__).parent / "golden" / "msib_judge_prompt.txt"


def record(dim: str, content: int, speech: int, item_id: str = "x") -> MSIBVerdictRecord:
    return MSIBVerdictRecord(
        item_id=item_id,
        dimension=dim,
        verdict=MSIBVerdict(
            transcript="t",
            speech_quality_score=speech,
            content_quality_score=content,
            speech_score_reasoning="s",
            content_score_reasoning="c",
        ),
        judge_raw="{}",
        judge_model="scripted",
    )


class TestRenderJudgePrompt:
    def test_golden_byte_identity(self):
        golden = GOLDEN.read_text(encoding="utf-8")
        rendered = render_judge_prompt("X")
        assert rendered == golden.replace("{background_text}", "X")

    def test_empty_background_still_valid(self):
        golden = GOLDEN.read_text(encoding="utf-8")
        rendered = render_judge_prompt("")
        assert rendered == golden.replace("{background_text}", "")
        assert "{background_text}" not in rendered

    def test_braces_in_background_survive_single_pass(self):
        tricky = 'He said {"nested": "{background_text}"} twice'
        rendered = render_judge_prompt(tricky)
        assert tricky in rendered

    def test_missing_placeholder_is_config_error(self):
        with pytest.raises(ConfigError):
            render_judge_prompt("X", template="no placeholder here")

    def test_surroundings_unaffected_by_substitution(self):
        golden = GOLDEN.read_text(encoding="utf-8")
        a = render_judge_prompt("AAA")
        prefix, suffix = golden.split("{background_text}")
        assert a.startswith(prefix) and a.endswith(suffix)


class TestParseMSIBVerdict:
    def verdict_json(self, speech=4, content=5) -> str:
        return json.dumps(
            {
                "transcript": "hello there",
                "speech_quality_score": speech,
                "content_quality_score": content,
                "speech_score_reasoning": "clear",
                "content_score_reasoning": "matches",
            }
        )

    def test_round_trip(self):
        v = parse_msib_verdict(self.verdict_json(4, 5))
        assert (v.speech_quality_score, v.content_quality_score) == (4, 5)
        again = parse_msib_verdict(json.dumps(v.to_dict()))
        assert again == v

    def test_prose_wrapped_object(self):
        raw = "Sure! Here is my verdict:\n```json\n" + self.verdict_json(3, 3) + "\n```\nthanks"
        v = parse_msib_verdict(raw)
        assert v.speech_quality_score == 3

    def test_score_out_of_range(self):
        with pytest.raises(VerdictRangeError):
            parse_msib_verdict(self.verdict_json(speech=7))
        with pytest.raises(VerdictRangeError):
            parse_msib_verdict(self.verdict_json(content=0))
        with pytest.raises(VerdictRangeError):
            parse_msib_verdict(self.verdict_json(content=6))

    def test_missing_field(self):
        obj = json.loads(self.verdict_json())
        del obj["transcript"]
        with pytest.raises(VerdictParseError):
            parse_msib_verdict(json.dumps(obj))

    def test_non_object_raw(self):
        with pytest.raises(VerdictParseError):
            parse_msib_verdict("no json here at all")

    def test_boolean_score_rejected(self):
        obj = json.loads(self.verdict_json())
        obj["speech_quality_score"] = True
        with pytest.raises(VerdictParseError):
            parse_msib_verdict(json.dumps(obj))

    def test_first_object_wins(self):
        raw = self.verdict_json(2, 2) + "\n" + self.verdict_json(5, 5)
        assert parse_msib_verdict(raw).speech_quality_score == 2


class TestAggregateMSIB:
    def test_table_row_arithmetic(self):
        # 100 items: content mean exactly 3.14, speech mean exactly 3.98.
        contents = [3] * 86 + [4] * 14
        speeches = [3] * 2 + [4] * 98
        verdicts = [
            record("BasicConversation", c, s, item_id=f"i{k}")
            for k, (c, s) in enumerate(zip(contents, speeches))
        ]
        raw_avg = (sum(contents) / 100 + sum(speeches) / 100) / 2
        assert abs(raw_avg - 3.56) <= 0.005
        agg = aggregate_msib(verdicts)
        row = agg["dimensions"]["BasicConversation"]
        assert row["content"] == 3.14
        assert row["speech"] == 3.98
        assert row["average"] == 3.56

    def test_all_fives(self):
        verdicts = [record(d, 5, 5, item_id=f"{d}{k}") for d in MSIB_DIMENSIONS for k in range(3)]
        agg = aggregate_msib(verdicts)
        for d in MSIB_DIMENSIONS:
            assert agg["dimensions"][d] == {"content": 5.0, "speech": 5.0, "average": 5.0, "n": 3}
        assert agg["overall"]["average"] == 5.0

    def test_randomized_recount(self):
        rng = random.Random(7)
        verdicts = [
            record(rng.choice(MSIB_DIMENSIONS), rng.randint(1, 5), rng.randint(1, 5), f"i{k}")
            for k in range(200)
        ]
        agg = aggregate_msib(verdicts)
        for dim, row in agg["dimensions"].items():
            vs = [v.verdict for v in verdicts if v.dimension == dim]
            c = sum(v.content_quality_score for v in vs) / len(vs)
            s = sum(v.speech_quality_score for v in vs) / len(vs)
            assert row["content"] == pytest.approx(round(c, 2), abs=0.006)
            assert row["n"] == len(vs)
        # Overall pools all items.
        all_c = [v.verdict.content_quality_score for v in verdicts]
        assert agg["overall"]["n"] == len(verdicts)
        assert agg["overall"]["content"] == pytest.approx(sum(all_c) / len(all_c), abs=0.006)

    def test_empty_dimension_absent(self):
        verdicts = [record("RateControl", 4, 4)]
        agg = aggregate_msib(verdicts)
        assert set(agg["dimensions"]) == {"RateControl"}

    def test_unscored_excluded(self):
        broken = MSIBVerdictRecord(
            item_id="b", dimension="RateControl", verdict=None, judge_raw="?", judge_model="j",
            error="verdict parse: missing",
        )
        agg = aggregate_msib([record("RateControl", 4, 4), broken])
        assert agg["dimensions"]["RateControl"]["n"] == 1


class TestRunMSIB:
    def test_scripted_end_to_end(self):
        items = make_synthetic_msib(12, seed=1)
        model = ScriptedSpeechModel(lambda item: MSIBResponse(text="hello world"))
        verdicts = run_msib(items, model, ToyBackend(), parallelism=3)
        assert len(verdicts) == 12
        assert all(v.verdict is not None for v in verdicts)
        agg = msib_aggregates(verdicts)
        assert agg["n_scored"] == 12

    def test_backend_model_voices_audio(self):
        items = make_synthetic_msib(3, seed=2)
        model = BackendSpeechModel(ToyBackend(BackendProfile(kind="toy")))
        out = model.respond(items[0])
        assert out.text
        assert out.audio_wav and len(out.audio_wav) > 0

    def test_perfect_keyword_background(self):
        items = [
            item
            for item in make_synthetic_msib(6, seed=3)
        ]
        perfect = items[0]
        perfect = type(perfect)(
            item_id=perfect.item_id,
            dimension=perfect.dimension,
            turns=perfect.turns,
            background_text="PERFECT demo scenario",
        )
        model = ScriptedSpeechModel(lambda item: MSIBResponse(text="x"))
        verdicts = run_msib([perfect], model, ToyBackend())
        v = verdicts[0].verdict
        assert (v.speech_quality_score, v.content_quality_score) == (5, 5)

    def test_items_round_trip(self, tmp_path):
        items = make_synthetic_msib(10, seed=4)
        path = tmp_path / "msib.jsonl"
        write_items(items, path)
        back = load_msib_items(path)
        assert [i.to_dict() for i in back] == [i.to_dict() for i in items]

    def test_report_artifacts(self, tmp_path):
        items = make_synthetic_msib(12, seed=5)
        model = ScriptedSpeechModel(lambda item: MSIBResponse(text="fine answer"))
        verdicts = run_msib(items, model, ToyBackend())
        report = BenchReport(
            run_id="r2",
            kind="msib",
            config={"model_name": "scripted"},
            verdicts=[v.to_dict() for v in verdicts],
            aggregates=msib_aggregates(verdicts),
        )
        out = report.save(tmp_path / "run")
        assert (out / "msib_table.tsv").exists()
        assert (out / "msib_scores.png").exists()
        table = (out / "msib_table.tsv").read_text().splitlines()
        assert table[0].startswith("Row\tBasic Conversation")
        assert len(table) == 4


class TestIngestMOS:
    def write_csv(self, tmp_path, rows, header="item_id,rater_id,score,dimension"):
        path = tmp_path / "ratings.csv"
        path.write_text("\n".join([header] + rows) + "\n")
        return path

    def test_single_rating(self, tmp_path):
        path = self.write_csv(tmp_path, ["a,r1,4,RateControl"])
        out = ingest_mos(path)
        assert out == {"RateControl": {"mean": 4.0, "n_ratings": 1, "n_raters": 1}}

    def test_mean_of_three(self, tmp_path):
        path = self.write_csv(
            tmp_path, ["a,r1,3,RolePlaying", "a,r2,4,RolePlaying", "a,r3,5,RolePlaying"]
        )
        assert ingest_mos(path)["RolePlaying"]["mean"] == 4.0

    def test_duplicate_rater_rejected(self, tmp_path):
        path = self.write_csv(tmp_path, ["a,r1,4,RateControl", "a,r1,5,RateControl"])
        with pytest.raises(ValidationError):
            ingest_mos(path)

    def test_out_of_range_rejected(self, tmp_path):
        path = self.write_csv(tmp_path, ["a,r1,6,RateControl"])
        with pytest.raises(ValidationError):
            ingest_mos(path)

    def test_dimension_mapping_fallback(self, tmp_path):
        path = self.write_csv(tmp_path, ["a,r1,4", "b,r1,2"], header="item_id,rater_id,score")
        out = ingest_mos(path, item_dimensions={"a": "RateControl", "b": "RateControl"})
        assert out["RateControl"]["mean"] == 3.0
        with pytest.raises(ConfigError):
            ingest_mos(path)
