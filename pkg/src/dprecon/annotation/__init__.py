"""Dropped-pronoun annotation: alignment, projection, monolingual generation."""

from .align import Model1, em_align, format_pharaoh, read_pharaoh
from .generator import DpGenerator, GeneratorConfig, label_monolingual, train_dp_generator
from .label import (
    LabeledSentence,
    label_parallel,
    labelling_f1,
    lexicon_from_alignments,
    read_inventory,
    read_lexicon,
)

__all__ = [
    "Model1",
    "em_align",
    "format_pharaoh",
    "read_pharaoh",
    "DpGenerator",
    "GeneratorConfig",
    "label_monolingual",
    "train_dp_generator",
    "LabeledSentence",
    "label_parallel",
    "labelling_f1",
    "lexicon_from_alignments",
    "read_inventory",
    "read_lexicon",
]
