"""Synthetic utterance-query pools, compositional splits, and
structurally-diverse sampling."""

from ._core import (
    ConfigError,
    DataError,
    DiversityReport,
    Distribution,
    Example,
    ParseTree,
    SampleState,
    SamplerPool,
    SamplingError,
    Schema,
    SplitError,
    SplitManifest,
    SyntheticAssignment,
    TemplatePartition,
    abstract_entities,
    abstract_template,
    assign_synthetic,
    atom_distribution,
    compositional_split,
    consistency_groups,
    diversity_report,
    entropy,
    entropy_of_counts,
    extract_atoms,
    extract_compounds,
    file_digest,
    generate,
    objective,
    parse_query,
    partition_templates,
    read_corpus,
    render_query,
    sample,
    template_of,
    tree_height,
    weighted_compound_distribution,
    write_corpus,
)

__all__ = [
    "ConfigError",
    "DataError",
    "DiversityReport",
    "Distribution",
    "Example",
    "ParseTree",
    "SampleState",
    "SamplerPool",
    "SamplingError",
    "Schema",
    "SplitError",
    "SplitManifest",
    "SyntheticAssignment",
    "TemplatePartition",
    "abstract_entities",
    "abstract_template",
    "assign_synthetic",
    "atom_distribution",
    "compositional_split",
    "consistency_groups",
    "diversity_report",
    "entropy",
    "entropy_of_counts",
    "extract_atoms",
    "extract_compounds",
    "file_digest",
    "generate",
    "objective",
    "parse_query",
    "partition_templates",
    "read_corpus",
    "render_query",
    "sample",
    "template_of",
    "tree_height",
    "weighted_compound_distribution",
    "write_corpus",
]
