"""Permission/intent feature extraction from Android manifests and information-gain ranking."""

from .apk import ApkSource, open_apk
from .axml import XmlTree, decode_manifest, to_text
from .features import ManifestFeatures, extract_features
from .ig import (
    ClassDistribution,
    FeatureScore,
    category_means,
    conditional_entropy,
    entropy,
    information_gain,
    rank_features,
)
from .model import (
    Category,
    ClassLabel,
    Dataset,
    FeatureColumn,
    FeatureVocabulary,
    Instance,
    assemble_dataset,
    build_vocabulary,
    sample_balanced,
    vectorize,
)
from .report import AnalysisReport, load_report, render_category_comparison, render_top_table, write_report

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "ApkSource",
    "Category",
    "ClassDistribution",
    "ClassLabel",
    "Dataset",
    "FeatureColumn",
    "FeatureScore",
    "FeatureVocabulary",
    "Instance",
    "ManifestFeatures",
    "XmlTree",
    "assemble_dataset",
    "build_vocabulary",
    "category_means",
    "conditional_entropy",
    "decode_manifest",
    "entropy",
    "extract_features",
    "information_gain",
    "load_report",
    "open_apk",
    "rank_features",
    "render_category_comparison",
    "render_top_table",
    "sample_balanced",
    "to_text",
    "vectorize",
    "write_report",
]
