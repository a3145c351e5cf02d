"""Method-engineering workbench for cloud-migration reengineering methods.

The package keeps a catalog of reusable method fragments (the metamodel),
derives bespoke reengineering methods from it per migration type and
phase selection, supports tailoring those methods, validates them against
the metamodel, persists them in an embedded store, and exchanges them as
XML documents. A CLI and an HTTP/JSON service expose the whole workflow.
"""

from mlsac.catalog import applicability_of, builtin_catalog, export_catalog, load_catalog
from mlsac.engine import explain_inclusion, instantiate, list_rules
from mlsac.errors import (
    DuplicateId,
    EmptySelection,
    IntegrityError,
    KindMismatch,
    MlsacError,
    NotFound,
    ParseError,
    ReplayError,
    StorageError,
    TailoringError,
    UnknownFragment,
    UnknownPhase,
    UnknownTarget,
    VersionMismatch,
)
from mlsac.model import (
    ApplicabilityEntry,
    ApplicabilityLevel,
    FragmentInclusion,
    FragmentKind,
    FragmentRelationship,
    KnowledgeSource,
    Metamodel,
    MethodFragment,
    MethodInstance,
    MethodModel,
    MigrationType,
    Provenance,
    RelationshipType,
    SequenceEdge,
    Severity,
    TechniqueAssignment,
    TechniqueBinding,
    TransformationRule,
    ValidationIssue,
    Waiver,
    check_conformance,
    method_relationships,
    relationship_set,
)
from mlsac.tailoring import (
    AddFragment,
    BindTechnique,
    EditDefinition,
    ExtendFragment,
    RemoveFragment,
    SetSequence,
    TailoringAction,
    TailoringResult,
    UnbindTechnique,
    apply_action,
    replay,
)
from mlsac.xmlio import export_xml, import_xml

__all__ = [name for name in dir() if not name.startswith("_")]
