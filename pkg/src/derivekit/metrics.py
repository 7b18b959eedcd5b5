"""Reference-based text metrics, pairwise perturbation analyses, the manual
scoring function, and the 8-feature export row.

All metrics tokenize by whitespace and return values in [0, 1]. Candidate
and reference roles are fixed (no symmetry assumed). BLEU uses add-one
smoothing on n-gram orders with zero matches, stated in report metadata.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

DEFAULT_WEIGHTS = (0.2, 0.05, 0.15, 0.25, 0.25, 0.1)
DEFAULT_ALPHA = 0.001

ERROR_CATEGORIES = ("overall", "skip", "repeat", "incorrect", "irrelevant", "redundant")

METRIC_NAMES = ("rouge", "bleu", "gleu")
BLEU_SMOOTHING = "add-one on n-gram orders with zero matches"


class MetricError(Exception):
    pass


class ZeroDenominator(MetricError):
    pass


def _tokens(text: str) -> list[str]:
    return text.split()


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _overlap(cand: Counter, ref: Counter) -> int:
    return sum(min(count, ref[gram]) for gram, count in cand.items())


def rouge(candidate: str, reference: str, order: int = 2) -> float:
    """ROUGE-n F1 on whitespace tokens (default n=2)."""
    cand = _ngram_counts(_tokens(candidate), order)
    ref = _ngram_counts(_tokens(reference), order)
    total_c, total_r = sum(cand.values()), sum(ref.values())
    if total_c == 0 or total_r == 0:
        return 0.0
    hits = _overlap(cand, ref)
    if hits == 0:
        return 0.0
    precision = hits / total_c
    recall = hits / total_r
    return 2 * precision * recall / (precision + recall)


def rouge_l(candidate: str, reference: str) -> float:
    """ROUGE-L F1 (longest common subsequence)."""
    a, b = _tokens(candidate), _tokens(reference)
    if not a or not b:
        return 0.0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[-1]))
        prev = cur
    lcs = prev[-1]
    if lcs == 0:
        return 0.0
    precision = lcs / len(a)
    recall = lcs / len(b)
    return 2 * precision * recall / (precision + recall)


def bleu(candidate: str, reference: str, max_n: int = 4) -> float:
    """BLEU with uniform weights over 1..max_n and the brevity penalty;
    orders with zero matches take add-one smoothing."""
    cand_tokens, ref_tokens = _tokens(candidate), _tokens(reference)
    if not cand_tokens or not ref_tokens:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand = _ngram_counts(cand_tokens, n)
        total = sum(cand.values())
        hits = _overlap(cand, _ngram_counts(ref_tokens, n))
        if hits == 0:
            precision = (hits + 1) / (total + 1)
        else:
            precision = hits / total
        log_sum += math.log(precision)
    c, r = len(cand_tokens), len(ref_tokens)
    bp = 1.0 if c > r else math.exp(1 - r / c)
    return bp * math.exp(log_sum / max_n)


def gleu(candidate: str, reference: str, max_n: int = 4) -> float:
    """GLEU: min(precision, recall) over n-grams pooled across 1..max_n."""
    cand_tokens, ref_tokens = _tokens(candidate), _tokens(reference)
    if not cand_tokens or not ref_tokens:
        return 0.0
    hits = total_c = total_r = 0
    for n in range(1, max_n + 1):
        cand = _ngram_counts(cand_tokens, n)
        ref = _ngram_counts(ref_tokens, n)
        hits += _overlap(cand, ref)
        total_c += sum(cand.values())
        total_r += sum(ref.values())
    if total_c == 0 or total_r == 0:
        return 0.0
    return min(hits / total_c, hits / total_r)


def score_all(candidate: str, reference: str, rouge_order="2") -> dict[str, float]:
    """rouge_order: n-gram order ("1"/"2"/int) or "L" for LCS-based ROUGE."""
    if str(rouge_order).upper() == "L":
        r = rouge_l(candidate, reference)
    else:
        r = rouge(candidate, reference, int(rouge_order))
    return {
        "rouge": r,
        "bleu": bleu(candidate, reference),
        "gleu": gleu(candidate, reference),
    }


def perf_difference(m_static: float, m_perturbed: float) -> float:
    """Pairwise performance decrease M(s, s_hat) - M(p, p_hat)."""
    return m_static - m_perturbed


def perturbation_ratio(m_pred_pair: float, m_truth_pair: float) -> float:
    """M(s_hat, p_hat) / M(s, p); < 1 means predictions moved less than
    the ground-truth pair."""
    if m_truth_pair == 0:
        raise ZeroDenominator("ground-truth pair similarity is zero")
    return m_pred_pair / m_truth_pair


# ---------------------------------------------------------------------------
# manual scoring

@dataclass(frozen=True)
class ErrorAnnotation:
    """Six binary flags, 1 = the category is error-free."""

    overall: int
    skip: int
    repeat: int
    incorrect: int
    irrelevant: int
    redundant: int

    def __post_init__(self):
        for name in ERROR_CATEGORIES:
            if getattr(self, name) not in (0, 1):
                raise MetricError(f"flag {name} must be 0 or 1")

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in ERROR_CATEGORIES)


@dataclass(frozen=True)
class ScoreWeights:
    weights: tuple[float, ...] = DEFAULT_WEIGHTS
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if len(self.weights) != len(ERROR_CATEGORIES):
            raise MetricError("six category weights required")
        if any(w < 0 for w in self.weights):
            raise MetricError("weights must be >= 0")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise MetricError("weights must sum to 1")
        if self.alpha <= 0:
            raise MetricError("alpha must be > 0")


def manual_score(x: ErrorAnnotation, w: ScoreWeights = ScoreWeights()) -> float:
    """M(x; w, alpha) = alpha * (exp(ln((alpha+1)/alpha) * w.x) - 1).

    Error-free derivations score 1, derivations failing every category 0.
    """
    wx = sum(wi * xi for wi, xi in zip(w.weights, x.as_tuple()))
    return w.alpha * math.expm1(math.log((w.alpha + 1) / w.alpha) * wx)


# ---------------------------------------------------------------------------
# feature vector and score report

FEATURE_HEADER = (
    "id", "perturbation",
    "rouge", "bleu", "bleurt", "gleu",
    "ratio_rouge", "ratio_bleu", "ratio_bleurt", "ratio_gleu",
)


@dataclass
class ScoredRow:
    id: str
    perturbation: Optional[str]
    scores: dict[str, float]
    bleurt: Optional[float] = None
    ratios: dict[str, Optional[float]] = field(default_factory=dict)
    ratio_bleurt: Optional[float] = None


def feature_vector(row: ScoredRow) -> tuple:
    """Fixed-order training features: 4 metric scores then 4 ratios; static
    rows take ratio 1. Absent BLEURT slots stay None."""
    if row.perturbation is None:
        ratios = {m: 1.0 for m in METRIC_NAMES}
        ratio_bleurt: Optional[float] = 1.0 if row.bleurt is not None else None
    else:
        ratios = {m: row.ratios.get(m) for m in METRIC_NAMES}
        ratio_bleurt = row.ratio_bleurt
    return (
        row.scores["rouge"],
        row.scores["bleu"],
        row.bleurt,
        row.scores["gleu"],
        ratios["rouge"],
        ratios["bleu"],
        ratio_bleurt,
        ratios["gleu"],
    )


def _mean(values: Iterable[float]) -> Optional[float]:
    values = list(values)
    if not values:
        return None
    return sum(values) / len(values)


def build_score_report(
    predictions: dict[tuple[str, Optional[str]], str],
    references: dict[tuple[str, Optional[str]], str],
    rouge_order="2",
    bleurt_scores: Optional[dict[tuple[str, Optional[str]], float]] = None,
) -> tuple[dict, list[ScoredRow]]:
    """Score every (id, perturbation) prediction against its reference and
    assemble per-example rows, aggregates, and pairwise diff/ratio tables.

    Ratios compare the drift of predictions M(s_hat, p_hat) to the drift of
    references M(s, p); rows whose reference pair scores zero are excluded
    from ratio aggregates and counted.
    """
    bleurt_scores = bleurt_scores or {}
    rows: list[ScoredRow] = []
    keys = sorted(
        (k for k in predictions if k in references),
        key=lambda k: (k[1] or "", k[0]),
    )
    missing = sorted(str(k) for k in predictions.keys() ^ references.keys())
    for key in keys:
        rid, perturbation = key
        row = ScoredRow(
            rid,
            perturbation,
            score_all(predictions[key], references[key], rouge_order),
            bleurt=bleurt_scores.get(key),
        )
        rows.append(row)
    by_key = {(r.id, r.perturbation): r for r in rows}

    pairwise: dict[str, dict] = {}
    for row in rows:
        if row.perturbation is None:
            continue
        static_key = (row.id, None)
        static_row = by_key.get(static_key)
        if static_row is None:
            continue
        bucket = pairwise.setdefault(
            row.perturbation,
            {"pairs": 0, "diff": {m: [] for m in METRIC_NAMES},
             "ratio": {m: [] for m in METRIC_NAMES}, "ratio_excluded": 0},
        )
        bucket["pairs"] += 1
        for m in METRIC_NAMES:
            bucket["diff"][m].append(perf_difference(static_row.scores[m], row.scores[m]))
        pred_pair = score_all(
            predictions[static_key], predictions[(row.id, row.perturbation)], rouge_order
        )
        truth_pair = score_all(
            references[static_key], references[(row.id, row.perturbation)], rouge_order
        )
        excluded = False
        for m in METRIC_NAMES:
            try:
                ratio = perturbation_ratio(pred_pair[m], truth_pair[m])
            except ZeroDenominator:
                row.ratios[m] = None
                excluded = True
                continue
            row.ratios[m] = ratio
            bucket["ratio"][m].append(ratio)
        if excluded:
            bucket["ratio_excluded"] += 1

    report = {
        "config": {
            "rouge_order": str(rouge_order),
            "bleu_max_n": 4,
            "bleu_smoothing": BLEU_SMOOTHING,
            "tokenization": "whitespace",
        },
        "rows": [
            {
                "id": r.id,
                "perturbation": r.perturbation,
                "rouge": r.scores["rouge"],
                "bleu": r.scores["bleu"],
                "gleu": r.scores["gleu"],
                "external_bleurt": r.bleurt,
            }
            for r in rows
        ],
        "aggregates": dict(
            {"n": len(rows)},
            **{m: _mean(r.scores[m] for r in rows) for m in METRIC_NAMES},
        ),
        "pairwise": {
            kind: {
                "pairs": bucket["pairs"],
                "diff": {m: _mean(bucket["diff"][m]) for m in METRIC_NAMES},
                "ratio": {m: _mean(bucket["ratio"][m]) for m in METRIC_NAMES},
                "ratio_excluded": bucket["ratio_excluded"],
            }
            for kind, bucket in sorted(pairwise.items())
        },
        "unmatched_keys": missing,
        "schema_version": 1,
    }
    return report, rows


def feature_rows(rows: list[ScoredRow]) -> list[tuple]:
    out = []
    for r in rows:
        vec = feature_vector(r)
        out.append((r.id, r.perturbation or "") + vec)
    return out
