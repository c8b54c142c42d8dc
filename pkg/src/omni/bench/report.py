"""Benchmark run reports: a machine-readable JSON file, delimited score tables,
and degradation/score figures, all recomputable from the persisted verdicts."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .items import MEMORY_TYPES, MSIB_DIMENSIONS
from . import plots

REPORT_SCHEMA_VERSION = 1
ABSENT = "-"


@dataclass
class BenchReport:
    run_id: str
    kind: str  # "mmmb" | "msib"
    config: dict
    verdicts: list[dict]
    aggregates: dict
    status: str = "complete"  # "complete" | "partial"

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "run_id": self.run_id,
            "kind": self.kind,
            "status": self.status,
            "config": self.config,
            "aggregates": self.aggregates,
            "verdicts": self.verdicts,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BenchReport":
        return cls(
            run_id=d["run_id"],
            kind=d["kind"],
            config=d["config"],
            verdicts=d["verdicts"],
            aggregates=d["aggregates"],
            status=d.get("status", "complete"),
        )

    def save(self, out_dir: str | Path) -> Path:
        """Write report.json plus the rendered tables and figures."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)
        )
        if self.kind == "mmmb":
            self._save_mmmb_artifacts(out)
        elif self.kind == "msib":
            self._save_msib_artifacts(out)
        return out

    @classmethod
    def load(cls, out_dir: str | Path) -> "BenchReport":
        doc = json.loads((Path(out_dir) / "report.json").read_text())
        return cls.from_dict(doc)

    def _save_mmmb_artifacts(self, out: Path) -> None:
        scores = self.aggregates.get("scores", {})
        model = self.config.get("model_name", "model")
        columns = [*MEMORY_TYPES, "Average"]
        header = "Model\t" + "\t".join(
            ["Text Memory", "Image Memory", "Mixed Memory", "Average"]
        )
        cells = [f"{scores[c]:.2f}" if c in scores else ABSENT for c in columns]
        (out / "mmmb_table.tsv").write_text(header + "\n" + model + "\t" + "\t".join(cells) + "\n")
        degradation = self.aggregates.get("degradation", {})
        plots.plot_degradation_curve(
            {int(k): v for k, v in degradation.get("acc_by_turn_distance", {}).items()},
            "turn distance",
            out / "degradation_turn_distance.png",
            f"{model}: accuracy vs turn distance",
        )
        plots.plot_degradation_curve(
            {int(k): v for k, v in degradation.get("acc_by_num_images", {}).items()},
            "historical images to recall",
            out / "degradation_num_images.png",
            f"{model}: accuracy vs images to recall",
        )

    def _save_msib_artifacts(self, out: Path) -> None:
        dims = self.aggregates.get("dimensions", {})
        overall = self.aggregates.get("overall")
        pretty = {
            "BasicConversation": "Basic Conversation",
            "EmotionalExpression": "Emotional Expression",
            "RateControl": "Rate Control",
            "RolePlaying": "Role Playing",
            "CreativeCapacity": "Creative Capacity",
            "InstructionFollowing": "Instruction Following",
        }
        header = "Row\t" + "\t".join([pretty[d] for d in MSIB_DIMENSIONS] + ["Overall"])
        lines = [header]
        for row_key, row_name in (
            ("content", "Content Quality"),
            ("speech", "Speech Quality"),
            ("average", "Average"),
        ):
            cells = [
                f"{dims[d][row_key]:.2f}" if d in dims else ABSENT for d in MSIB_DIMENSIONS
            ]
            cells.append(f"{overall[row_key]:.2f}" if overall else ABSENT)
            lines.append(row_name + "\t" + "\t".join(cells))
        (out / "msib_table.tsv").write_text("\n".join(lines) + "\n")
        if dims:
            plots.plot_msib_scores(
                dims, out / "msib_scores.png", self.config.get("model_name", "model")
            )
