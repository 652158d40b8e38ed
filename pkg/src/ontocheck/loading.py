"""File loading and the location of the bundled corpus."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable

from .instances import InstanceModel
from .model import Ontology, Workspace
from .refinement import RefinementMap
from .syntax import parse_instance_model, parse_ontologies, parse_refinement_map

StrPath = str | os.PathLike


def corpus_dir() -> Path:
    """The ``corpus/`` directory shipped at the repository root."""
    return Path(__file__).resolve().parents[2] / "corpus"


def load_ontologies(path: StrPath) -> list[Ontology]:
    return parse_ontologies(Path(path).read_bytes(), str(path))


def load_workspace(paths: Iterable[StrPath]) -> Workspace:
    """Parse every ontology file into one workspace, keyed by declared names."""
    onts: list[Ontology] = []
    for p in paths:
        onts.extend(load_ontologies(p))
    return Workspace(onts)


def load_instance_model(path: StrPath) -> InstanceModel:
    return parse_instance_model(Path(path).read_bytes(), str(path))


def load_refinement_map(path: StrPath) -> RefinementMap:
    return parse_refinement_map(Path(path).read_bytes(), str(path))


def bundled_workspace() -> Workspace:
    c = corpus_dir()
    return load_workspace([c / "ThingFO-lite.onto", c / "SituationCO.onto"])
