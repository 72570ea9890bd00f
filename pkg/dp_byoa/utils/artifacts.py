"""Artifact files of an experiment run."""

import json
import logging
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..config import RunConfig, dump_config
from ..evaluation.sweep import RunOutcome, UtilityRecord, aggregate_records, records_frame
from ..routers.experiment_router import ExperimentResult, ProbeRecord


logger = logging.getLogger(__name__)


def _vector(point: Optional[np.ndarray]) -> Optional[list[float]]:
    return None if point is None else [float(v) for v in point]


class ArtifactWriter:
    """Writer for the files of one output directory."""

    # File names inside the output directory
    ARTIFACT_FILES = {
        "config": "config.txt",
        "ledger": "ledger.jsonl",
        "results": "results.csv",
        "results_jsonl": "results.jsonl",
        "summary": "summary.csv",
        "probes": "probes.csv",
    }

    def __init__(self, output_dir: Union[str, Path] = "runs"):
        """
        Initialize the writer.

        Args:
            output_dir: Directory the artifacts go to; created on first write
        """
        self.output_dir = Path(output_dir)

    def get_path(self, artifact: str) -> Path:
        """
        Get the path of a named artifact.

        Args:
            artifact: Key of ARTIFACT_FILES

        Returns:
            Path inside the output directory
        """
        if artifact not in self.ARTIFACT_FILES:
            raise ValueError(f"Unknown artifact: {artifact}")
        return self.output_dir / self.ARTIFACT_FILES[artifact]

    def _prepare(self) -> None:
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def write_config(self, config: RunConfig) -> Path:
        self._prepare()
        path = self.get_path("config")
        path.write_text(dump_config(config), encoding="utf-8")
        return path

    def run_document(self, index: int, outcome: RunOutcome, config: RunConfig) -> dict[str, Any]:
        """JSON document of one run; `config` re-parses to the config that produced it."""
        output = outcome.output
        phases = [
            {
                "phase": trace.phase,
                "side": trace.side,
                "start": trace.start,
                "stop": trace.stop,
                "mu": trace.mu,
                "sigma": trace.sigma,
                "target": trace.target,
                "gradient_evals": trace.result.gradient_evals,
                "certificate": trace.result.certificate,
            }
            for trace in output.trace
        ]
        total = output.ledger.total()
        return {
            "run": index,
            "algorithm": output.algorithm,
            "seed": outcome.record.seed,
            "private": output.private,
            "config": dump_config(config),
            "record": outcome.record.model_dump(mode="json"),
            "ledger_total": {"epsilon": total.epsilon, "delta": total.delta},
            "x": _vector(output.x),
            "y": _vector(output.y),
            "x_pre_noise": _vector(output.x_pre_noise),
            "y_pre_noise": _vector(output.y_pre_noise),
            "x_projected": _vector(output.x_projected),
            "y_projected": _vector(output.y_projected),
            "phases": phases,
        }

    def write_run(self, index: int, outcome: RunOutcome, config: RunConfig) -> Path:
        self._prepare()
        path = self.output_dir / f"run_{index}.json"
        document = self.run_document(index, outcome, config)
        path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def write_ledger(self, outcomes: Sequence[RunOutcome]) -> Path:
        """All ledger entries, one JSON object per line, tagged with their run index."""
        self._prepare()
        path = self.get_path("ledger")
        lines = []
        for index, outcome in enumerate(outcomes):
            for entry in outcome.output.ledger.entries:
                lines.append(json.dumps({"run": index, **entry.model_dump(mode="json")}))
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return path

    def write_records(self, records: Sequence[UtilityRecord]) -> list[Path]:
        """results.csv in CSV_COLUMNS order plus its JSON-lines mirror."""
        self._prepare()
        frame = records_frame(records)
        csv_path = self.get_path("results")
        frame.to_csv(csv_path, index=False)
        jsonl_path = self.get_path("results_jsonl")
        jsonl_path.write_text(
            "".join(record.model_dump_json() + "\n" for record in records), encoding="utf-8"
        )
        return [csv_path, jsonl_path]

    def write_summary(self, records: Sequence[UtilityRecord]) -> Path:
        self._prepare()
        path = self.get_path("summary")
        aggregate_records(records).to_csv(path, index=False)
        return path

    def write_probes(self, probes: Sequence[ProbeRecord]) -> Path:
        self._prepare()
        path = self.get_path("probes")
        frame = pd.DataFrame(
            [probe.model_dump() for probe in probes], columns=list(ProbeRecord.model_fields)
        )
        frame.to_csv(path, index=False)
        return path

    def write_result(self, result: ExperimentResult) -> list[Path]:
        """
        Write every artifact an experiment result has.

        Args:
            result: Output of ExperimentRouter.route

        Returns:
            Paths written, in write order
        """
        written = [self.write_config(result.config)]
        for index, outcome in enumerate(result.outcomes):
            written.append(self.write_run(index, outcome, result.config))
        if result.outcomes:
            written.append(self.write_ledger(result.outcomes))
        if result.records:
            written.extend(self.write_records(result.records))
            written.append(self.write_summary(result.records))
        if result.probes:
            written.append(self.write_probes(result.probes))
        logger.info(f"Wrote {len(written)} artifacts to {self.output_dir}")
        return written
