"""Grapheme-aware BiLSTM-CNN-CRF sequence labeling for Devanagari NER."""

__version__ = "0.1.0"

from .corpus import Corpus, Sentence, TagScheme, Token, parse_conll, read_conll, write_conll
from .model import ModelConfig, SequenceLabeler
from .pipeline import TrainConfig, evaluate, train
from .segmentation import segment_characters, segment_graphemes

__all__ = [
    "Corpus",
    "Sentence",
    "TagScheme",
    "Token",
    "parse_conll",
    "read_conll",
    "write_conll",
    "ModelConfig",
    "SequenceLabeler",
    "TrainConfig",
    "evaluate",
    "train",
    "segment_characters",
    "segment_graphemes",
]
