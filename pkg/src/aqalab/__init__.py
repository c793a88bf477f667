"""aqalab: a desk-scale audio question-answering lab.

Pieces: a log-mel audio frontend, toy audio encoders, a mapper that turns
encoder outputs into language-model prefix embeddings, a small decoder LM
with optional low-rank adapters, a synthetic QA data forge, and an
evaluation harness with noise-reliance and hallucination probes.
"""

__version__ = "0.1.0"
