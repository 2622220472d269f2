"""Bitext filtering, k-fold data selection, MT metrics and prompt tools."""

import json as _json

from ._core import (
    CharNGramLM,
    DragomanError,
    LangProfile,
    build_fewshot,
    char_ngram_cosine,
    classify,
    contextual_prompt,
    corpus_bleu,
    corpus_chrf,
    fold_assignment,
    format_pair,
    nearest_rank,
    select_demos,
    sentence_bleu,
    sentence_chrf,
    strip_masked,
    tokenize_13a,
)
from . import _core

DragomanError.code = property(lambda self: self.args[0])


def run_filter(config: str) -> dict:
    """Runs the filter stage from `key = value` config text."""
    return _json.loads(_core.run_filter(config))


def run_select(config: str) -> str:
    """Runs k-fold selection from config text; returns the sweep TSV."""
    return _core.run_select(config)


def evaluate(hypotheses, references, metrics=("bleu", "chrf", "chrf++")) -> dict:
    if isinstance(references, (str, bytes)) or hasattr(references, "__fspath__"):
        references = [references]
    return _json.loads(_core.evaluate(hypotheses, list(references), list(metrics)))


def oracle_sweep(nbest, references, widths, workers: int = 1) -> str:
    return _core.oracle_sweep(nbest, references, list(widths), workers)


__all__ = [
    "CharNGramLM", "DragomanError", "LangProfile", "build_fewshot", "char_ngram_cosine",
    "classify", "contextual_prompt", "corpus_bleu", "corpus_chrf", "evaluate", "fold_assignment",
    "format_pair", "nearest_rank", "oracle_sweep", "run_filter", "run_select", "select_demos",
    "sentence_bleu", "sentence_chrf", "strip_masked", "tokenize_13a",
]
