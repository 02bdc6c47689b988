"""Probability-level classifier fusion with genetic weight search.

Combine the softmax outputs of several black-box classifiers into one
decision, either by plain averaging or through per-classifier weights
found by a small genetic algorithm, and score the result with NLL,
accuracy, and a row-percent confusion matrix.
"""

from .core import (
    EnsembleInputs,
    LabeledSamples,
    PredictionSet,
    ROW_SUM_TOLERANCE,
    argmax_class,
    argmax_classes,
    as_weights,
    fuse_majority,
    fuse_weighted,
)
from .errors import (
    AlignmentError,
    BreedingError,
    ConfigError,
    DegenerateWeightsError,
    DimensionError,
    EmptyInputError,
    FormatError,
    LabelRangeError,
    OracleScopeError,
    SoftvoteError,
    SplitError,
    ValidationError,
)
from .ga import (
    Chromosome,
    GAConfig,
    GAResult,
    GASnapshot,
    GenerationStats,
    crossover_fill,
    draw_fitness_sample,
    fitness,
    init_population,
    mutate_parents,
    run_ga,
    select_parents,
)
from .ingest import (
    Manifest,
    ManifestEntry,
    SplitSpec,
    default_class_names,
    load_ensemble,
    load_labels,
    load_manifest,
    load_predictions,
    read_ga_config,
    read_generator_spec,
    read_manifest,
    read_report,
    read_weights,
    render_report_table,
    report_to_json,
    split_samples,
    write_ensemble,
    write_ga_config,
    write_labels,
    write_manifest,
    write_predictions,
    write_report,
    write_weights,
)
from .metrics import EvaluationReport, NLL_EPSILON, accuracy, confusion_matrix, evaluate, nll
from .rng import make_rng
from .synthgen import ClassifierProfile, GeneratorSpec, brute_force_weights, generate

__all__ = [
    "AlignmentError",
    "BreedingError",
    "Chromosome",
    "ClassifierProfile",
    "ConfigError",
    "DegenerateWeightsError",
    "DimensionError",
    "EmptyInputError",
    "EnsembleInputs",
    "EvaluationReport",
    "FormatError",
    "GAConfig",
    "GAResult",
    "GASnapshot",
    "GenerationStats",
    "GeneratorSpec",
    "LabelRangeError",
    "LabeledSamples",
    "Manifest",
    "ManifestEntry",
    "NLL_EPSILON",
    "OracleScopeError",
    "PredictionSet",
    "ROW_SUM_TOLERANCE",
    "SoftvoteError",
    "SplitError",
    "SplitSpec",
    "ValidationError",
    "accuracy",
    "argmax_class",
    "argmax_classes",
    "as_weights",
    "brute_force_weights",
    "confusion_matrix",
    "crossover_fill",
    "default_class_names",
    "draw_fitness_sample",
    "evaluate",
    "fitness",
    "fuse_majority",
    "fuse_weighted",
    "generate",
    "init_population",
    "load_ensemble",
    "load_labels",
    "load_manifest",
    "load_predictions",
    "make_rng",
    "mutate_parents",
    "nll",
    "read_ga_config",
    "read_generator_spec",
    "read_manifest",
    "read_report",
    "read_weights",
    "render_report_table",
    "report_to_json",
    "run_ga",
    "select_parents",
    "split_samples",
    "write_ensemble",
    "write_ga_config",
    "write_labels",
    "write_manifest",
    "write_predictions",
    "write_report",
    "write_weights",
]
