"""Parse, validate and cross-check layered ontologies and their instance models."""

from .axioms import AxiomRule, Witness, evaluate_axiom, evaluate_axiom_naive
from .conformance import Report, ValidationOptions, Violation, validate
from .instances import InstanceLink, InstanceModel, InstanceNode, instances_of, partners
from .loading import bundled_workspace, corpus_dir, load_workspace
from .model import (
    Layer,
    Multiplicity,
    Ontology,
    Term,
    TermRef,
    Workspace,
    check_ontology_wellformedness,
)
from .refinement import (
    MatrixReport,
    RefinementMap,
    endpoint_refines,
    multiplicity_refines,
    verify_refinement,
)
from .reports import serialize_report
from .syntax import (
    ParseError,
    parse_instance_model,
    parse_multiplicity,
    parse_ontologies,
    parse_ontology,
    parse_refinement_map,
    serialize_instance_model,
    serialize_ontology,
    serialize_refinement_map,
)

__version__ = "0.1.0"

__all__ = [
    "AxiomRule", "Witness", "evaluate_axiom", "evaluate_axiom_naive",
    "Report", "ValidationOptions", "Violation", "validate",
    "InstanceLink", "InstanceModel", "InstanceNode", "instances_of", "partners",
    "bundled_workspace", "corpus_dir", "load_workspace",
    "Layer", "Multiplicity", "Ontology", "Term", "TermRef", "Workspace",
    "check_ontology_wellformedness",
    "MatrixReport", "RefinementMap", "endpoint_refines", "multiplicity_refines",
    "verify_refinement",
    "serialize_report",
    "ParseError", "parse_instance_model", "parse_multiplicity", "parse_ontologies",
    "parse_ontology", "parse_refinement_map", "serialize_instance_model",
    "serialize_ontology", "serialize_refinement_map",
]
