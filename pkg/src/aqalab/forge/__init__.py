"""Synthetic audio-QA data pipeline: prompts, LLM calls, parsing, composition."""

from .client import (
    ClientConfig,
    GenerationOutcome,
    HttpLLMClient,
    MockLLMClient,
    call_llm,
    load_generation_log,
    run_generation,
)
from .compose import (
    DEFAULT_FRACTIONS,
    CompositionReport,
    compose_splits,
    composition_report,
)
from .convert import (
    CAPTION_QUESTIONS,
    ENTAILMENT_OPTIONS,
    binary_to_qa,
    caption_to_qa,
    convert_existing,
    difference_to_qa,
    entailment_to_mcq,
)
from .parser import (
    OPTION_LETTERS,
    McqOption,
    RejectedPair,
    extract_options,
    parse_qa,
)
from .stats import AUDIO_LEXICON, CorpusStats, SubsetStats, compute_stats, words
from .templates import (
    DATA_TYPES,
    KINDS,
    QUESTIONS_PER_CALL,
    PromptTemplate,
    get_template,
    render_prompt,
)

__all__ = [
    "AUDIO_LEXICON",
    "CAPTION_QUESTIONS",
    "ClientConfig",
    "CompositionReport",
    "CorpusStats",
    "DATA_TYPES",
    "DEFAULT_FRACTIONS",
    "ENTAILMENT_OPTIONS",
    "GenerationOutcome",
    "HttpLLMClient",
    "KINDS",
    "McqOption",
    "MockLLMClient",
    "OPTION_LETTERS",
    "PromptTemplate",
    "QUESTIONS_PER_CALL",
    "RejectedPair",
    "SubsetStats",
    "binary_to_qa",
    "call_llm",
    "caption_to_qa",
    "compose_splits",
    "composition_report",
    "compute_stats",
    "convert_existing",
    "difference_to_qa",
    "entailment_to_mcq",
    "extract_options",
    "get_template",
    "load_generation_log",
    "parse_qa",
    "render_prompt",
    "run_generation",
    "words",
]
