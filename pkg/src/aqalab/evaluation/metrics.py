"""Close-ended classification metrics and corpus BLEU-4.

Precision, recall, and F1 are macro-averaged over the class list; per-class
accuracy is the class's recall (for three-way entailment that yields one
accuracy per label). BLEU-4 is corpus-level modified n-gram precision with
a geometric mean over n=1..4, a brevity penalty, and add-epsilon smoothing
on zero match counts.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from ..errors import DataError
from ..forge.stats import words

BLEU_EPSILON = 1e-9


@dataclass
class ClassificationMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class_acc: dict[str, float] = field(default_factory=dict)
    n_examples: int = 0


def classification_metrics(gold: list[str], pred: list[str],
                           classes: list[str] | None = None,
                           ) -> ClassificationMetrics:
    """Accuracy plus macro P/R/F1 over `classes` (default: labels seen in
    gold). Predictions outside the class list can never be true positives;
    empty denominators score zero. Macro-F1 is the mean of per-class F1."""
    if len(gold) != len(pred):
        raise DataError(f"{len(gold)} gold labels vs {len(pred)} predictions")
    if not gold:
        raise DataError("no examples to score")
    class_list = list(classes) if classes is not None else sorted(set(gold))
    if not class_list:
        raise DataError("empty class list")

    tp = {c: 0 for c in class_list}
    fp = {c: 0 for c in class_list}
    fn = {c: 0 for c in class_list}
    correct = 0
    for g, p in zip(gold, pred):
        if g == p:
            correct += 1
        if g == p and g in tp:
            tp[g] += 1
        else:
            if p in fp:
                fp[p] += 1
            if g in fn:
                fn[g] += 1

    def safe(numerator: float, denominator: float) -> float:
        return numerator / denominator if denominator else 0.0

    precisions, recalls, f1s = [], [], []
    per_class_acc = {}
    for c in class_list:
        p_c = safe(tp[c], tp[c] + fp[c])
        r_c = safe(tp[c], tp[c] + fn[c])
        precisions.append(p_c)
        recalls.append(r_c)
        f1s.append(safe(2 * p_c * r_c, p_c + r_c))
        per_class_acc[c] = r_c

    n = len(class_list)
    return ClassificationMetrics(
        accuracy=correct / len(gold),
        precision=sum(precisions) / n,
        recall=sum(recalls) / n,
        f1=sum(f1s) / n,
        per_class_acc=per_class_acc,
        n_examples=len(gold),
    )


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidates: list[str], references: list[str], max_n: int = 4,
          epsilon: float = BLEU_EPSILON) -> float:
    """Corpus BLEU with one reference per candidate.

    p_n = clipped n-gram matches / candidate n-gram count, pooled over the
    corpus; a zero match count is replaced by `epsilon` matches so the
    geometric mean stays finite. Orders where the candidate corpus has no
    n-gram slots at all are dropped from the geometric mean (effective
    order), so a short identical pair still scores from the orders it can
    support. Brevity penalty exp(1 - r/c) applies when the candidate
    corpus is shorter than the reference corpus.
    """
    if not candidates or len(candidates) != len(references):
        raise DataError(
            f"{len(candidates)} candidates vs {len(references)} references")
    cand_tokens = [words(c) for c in candidates]
    ref_tokens = [words(r) for r in references]

    log_precisions = []
    for n in range(1, max_n + 1):
        matches = 0
        total = 0
        for cand, ref in zip(cand_tokens, ref_tokens):
            cand_counts = _ngram_counts(cand, n)
            ref_counts = _ngram_counts(ref, n)
            matches += sum(min(count, ref_counts[gram])
                           for gram, count in cand_counts.items())
            total += max(len(cand) - n + 1, 0)
        if total == 0:
            continue  # no slots at this order anywhere in the corpus
        p_n = matches / total if matches > 0 else epsilon / total
        log_precisions.append(math.log(p_n))

    c = sum(len(t) for t in cand_tokens)
    r = sum(len(t) for t in ref_tokens)
    if c == 0 or not log_precisions:
        return 0.0
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return brevity * math.exp(sum(log_precisions) / len(log_precisions))
