"""Experiment harness: oracle-driven runs over the paraphrase corpus with
aggregated metrics per sentence, exported as CSV."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .dialogue import OracleUser, SessionEngine, run_pipeline
from .formulas import parse_formula
from .world import default_grid, load_demo


@dataclass
class ExperimentRow:
    row_id: str
    row_type: str
    sentence: str
    n_demos: int
    ground_truth: str
    ref_uis: float
    mean_efs: float = 0.0
    mean_uis: float = 0.0
    success_rate: float = 0.0
    mean_runtime: float = 0.0
    runs: int = 0


class ExperimentError(Exception):
    pass


def _data_path(name):
    return resources.files("stlworkbench.data").joinpath(name)


def load_suite(path=None):
    text = _data_path("suite_table.json").read_text() if path is None else Path(path).read_text()
    return json.loads(text)["rows"]


def load_paraphrases(path=None):
    """rowId -> list of input sentences (the original comes first)."""
    text = _data_path("paraphrases.tsv").read_text() if path is None else Path(path).read_text()
    corpus = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        row_id, sentence = line.split("\t", 1)
        corpus.setdefault(row_id, []).append(sentence)
    return corpus


def run_experiment_suite(suite=None, paraphrases=None, grid=None, engine=None,
                         out_csv=None, demo_dir=None):
    """Run every suite row once per paraphrase against the oracle and
    aggregate means and exact-match success rate."""
    suite = suite if suite is not None else load_suite()
    paraphrases = paraphrases if paraphrases is not None else load_paraphrases()
    grid = grid or default_grid()
    engine = engine or SessionEngine(grid)
    results = []
    for row in suite:
        gt = parse_formula(row["groundTruth"])
        oracle = OracleUser.for_formula(gt, engine.lexicon)
        demos = []
        for spec in row["demos"]:
            path = (Path(demo_dir) / spec["file"]) if demo_dir else _data_path("demos/" + spec["file"])
            demos.append(load_demo(path, grid, spec["label"]))
        inputs = paraphrases.get(row["id"])
        if not inputs:
            raise ExperimentError(f"no paraphrases for row {row['id']!r}")
        efs, uis, successes, runtimes = [], [], 0, []
        for sentence in inputs:
            selected, session = run_pipeline(sentence, demos, oracle, grid, engine)
            efs.append(session.metrics["enumeratedFormulas"])
            uis.append(session.metrics["userInteractions"])
            runtimes.append(session.metrics["runtimeSeconds"])
            if selected is not None and selected == gt:
                successes += 1
        n = len(inputs)
        results.append(ExperimentRow(
            row_id=row["id"],
            row_type=row["type"],
            sentence=row["nl"],
            n_demos=len(demos),
            ground_truth=row["groundTruth"],
            ref_uis=row.get("refUIs", 0.0),
            mean_efs=sum(efs) / n,
            mean_uis=sum(uis) / n,
            success_rate=successes / n,
            mean_runtime=sum(runtimes) / n,
            runs=n,
        ))
    if out_csv:
        write_csv(results, out_csv)
    return results


def write_csv(results, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "type", "nl", "nDemos", "enumeratedFormulas", "userInteractions",
            "successRate", "runtimeSeconds",
        ])
        for row in results:
            writer.writerow([
                row.row_type,
                row.sentence,
                row.n_demos,
                f"{row.mean_efs:.1f}",
                f"{row.mean_uis:.1f}",
                f"{row.success_rate:.2f}",
                f"{row.mean_runtime:.2f}",
            ])


def overall_success(results) -> float:
    total = sum(r.runs for r in results)
    if not total:
        return 0.0
    return sum(r.success_rate * r.runs for r in results) / total
