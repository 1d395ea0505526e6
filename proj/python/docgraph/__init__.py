"""Document layout graphs, GraphSage link prediction and entity tagging.

Thin wrapper over the C++ core. Configuration and input descriptions are
plain dicts here; they are passed to the core as JSON.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

from ._docgraph import (
    BBox,
    Document,
    DocgraphError,
    DocumentGraph,
    EdgeFeature,
    LinkTrainResult,
    PageSize,
    Sector,
    Segment,
    TextEmbedder,
    Token,
    build_graph,
    collect_labels,
    direction_sector,
    dlos_brute_force,
    dlos_neighbors,
    document_from_json,
    document_to_json,
    evaluate_entities,
    extract_spans,
    generate_synthetic_corpus,
    graph_from_json,
    graph_to_json,
    load_funsd_split,
    normalize_coords,
    parse_funsd,
    parse_generic,
    rect_distance,
    render_svg,
    serialize_generic,
    validate_document,
)
from . import _docgraph

__all__ = [
    "BBox", "Document", "DocgraphError", "DocumentGraph", "EdgeFeature", "LinkTrainResult", "PageSize",
    "Sector", "Segment", "TextEmbedder", "Token", "CommandResult", "build_graph", "collect_labels",
    "direction_sector", "dlos_brute_force", "dlos_neighbors", "document_from_json", "document_to_json",
    "evaluate_entities", "extract_spans", "generate_synthetic_corpus", "graph_from_json", "graph_to_json",
    "load_funsd_split", "normalize_coords", "parse_funsd", "parse_generic", "rect_distance", "render_svg",
    "replay", "run_command", "serialize_generic", "train_link", "validate_document",
]


@dataclass
class CommandResult:
    exit_code: int
    summary: str
    manifest: dict

    @property
    def ok(self) -> bool:
        return self.exit_code == 0


def run_command(command: str, config: Optional[Mapping[str, Any]] = None,
                inputs: Optional[Mapping[str, Any]] = None, out_dir: str | os.PathLike = ".") -> CommandResult:
    """Runs one of the CLI commands (generate-corpus, build-graph, train-link,
    run-experiment, render-svg) and returns its exit code, summary and manifest."""
    code, summary, manifest = _docgraph._run_command(
        command, json.dumps(dict(config or {})), json.dumps(dict(inputs or {})), os.fspath(out_dir))
    return CommandResult(code, summary, json.loads(manifest))


def replay(manifest: Mapping[str, Any] | str | os.PathLike, out_dir: str | os.PathLike) -> list[str]:
    """Re-runs a recorded manifest; returns the list of mismatches (empty when identical)."""
    if isinstance(manifest, Mapping):
        raw = json.dumps(manifest)
    else:
        with open(manifest, encoding="utf-8") as f:
            raw = f.read()
    _, mismatches = _docgraph._replay(raw, os.fspath(out_dir))
    return list(mismatches)


def train_link(docs: Sequence[Document], **config: Any) -> LinkTrainResult:
    """Link-prediction training over `docs`. Keyword arguments override the
    training config (epochs, lr, batch_size, lambda_, seed, gnn={...})."""
    if "lambda_" in config:
        config["lambda"] = config.pop("lambda_")
    return _docgraph._train_link(list(docs), json.dumps(config))
