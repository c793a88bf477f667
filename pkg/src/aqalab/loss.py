"""Next-token cross-entropy over encoded examples.

The loss is a SUM of per-token terms, not a mean: every scored position
contributes -log p(token | everything before it), and batch loss is the sum
over examples. Adam is invariant to that overall scale, so the sum form is
safe to optimize directly and makes the uniform-distribution anchor exact:
n scored tokens against uniform logits over v classes cost exactly n*ln(v).

loss_scope picks which positions count. answer_only scores the answer
tokens (including the closing eos); full_sequence additionally scores the
question tokens inside the prefix.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

from .errors import ConfigError, NaNError
from .lm import DecoderLM
from .pipeline import EncodedExample

LOSS_SCOPES = ("answer_only", "full_sequence")


def example_loss(example: EncodedExample, lm: DecoderLM,
                 loss_scope: str = "answer_only") -> torch.Tensor:
    """Summed cross-entropy for one example. Logits at sequence position
    i predict the token at position i+1, so the answer token j is scored
    from row (prefix_len - 1 + j)."""
    if loss_scope not in LOSS_SCOPES:
        raise ConfigError(f"unknown loss_scope {loss_scope!r}")
    logits = lm(example.prefix.tokens, example.answer_ids)
    k = example.prefix.k
    m = len(example.answer_ids)
    answer_rows = logits[k - 1 : k - 1 + m]
    targets = torch.as_tensor(example.answer_ids, dtype=torch.long)
    loss = F.cross_entropy(answer_rows, targets, reduction="sum")
    if loss_scope == "full_sequence" and example.question_ids:
        first_text = example.prefix.segment_map.index("text")
        q = len(example.question_ids)
        question_rows = logits[first_text - 1 : first_text - 1 + q]
        q_targets = torch.as_tensor(example.question_ids, dtype=torch.long)
        loss = loss + F.cross_entropy(question_rows, q_targets, reduction="sum")
    return loss


def compute_loss(examples: list[EncodedExample], lm: DecoderLM,
                 loss_scope: str = "answer_only") -> torch.Tensor:
    if not examples:
        raise ConfigError("empty batch")
    total = example_loss(examples[0], lm, loss_scope)
    for ex in examples[1:]:
        total = total + example_loss(ex, lm, loss_scope)
    if not torch.isfinite(total):
        raise NaNError(f"non-finite loss: {float(total.detach())}")
    return total
