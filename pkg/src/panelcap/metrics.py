"""Attribute-retaining metric and baseline caption metrics.

The attribute score is a two-stage procedure: greedy token-embedding
similarity (BERT-score style F1) between every predicted/ground-truth
attribute pair, substitution of each predicted attribute by its best match
when that similarity clears the threshold tau, then plain Jaccard between
the substituted set and the ground truth. Per-panel scores are averaged
with a sample standard deviation.

All functions here are pure given an embedding provider, so every test can
run against the deterministic stub.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attributes import AttributeSet
from .embeddings import TokenEmbeddings
from .errors import EmbeddingError, EmptyTokensError
from .textnorm import ngrams, stem_token


def cosine_clamped(u, v) -> float:
    """Cosine similarity clamped into [0, 1].

    A zero vector scores 0 against anything. Bit-identical vectors score
    exactly 1.0 (the float round trip through norms can land 1 ulp short,
    which would matter for threshold comparisons).
    """
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if np.array_equal(a, b) and a.any():
        return 1.0
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(min(1.0, max(0.0, float(np.dot(a, b)) / (na * nb))))


def _similarity_grid(cand: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Pairwise clamped cosines, with the exact-equality fast path applied."""
    cand_norms = np.linalg.norm(cand, axis=1, keepdims=True)
    ref_norms = np.linalg.norm(ref, axis=1, keepdims=True)
    cand_unit = np.divide(cand, cand_norms, out=np.zeros_like(cand), where=cand_norms != 0)
    ref_unit = np.divide(ref, ref_norms, out=np.zeros_like(ref), where=ref_norms != 0)
    grid = np.clip(cand_unit @ ref_unit.T, 0.0, 1.0)
    equal = (cand[:, None, :] == ref[None, :, :]).all(axis=-1)
    nonzero = cand.any(axis=1)[:, None] & ref.any(axis=1)[None, :]
    grid[equal & nonzero] = 1.0
    return grid


def bertscore_greedy(cand_embeddings, ref_embeddings) -> tuple[float, float, float]:
    """Greedy max-matching precision, recall and F1 over token vectors.

    Precision is the mean over candidate tokens of the best similarity to
    any reference token; recall is symmetric; F1 is the harmonic mean
    (0 when both sides are 0).
    """
    cand = _as_matrix(cand_embeddings)
    ref = _as_matrix(ref_embeddings)
    if cand.shape[0] == 0 or ref.shape[0] == 0:
        raise EmptyTokensError("cannot score an empty token list")
    if cand.shape[1] != ref.shape[1]:
        raise ValueError(f"dimension mismatch: {cand.shape[1]} vs {ref.shape[1]}")
    grid = _similarity_grid(cand, ref)
    precision = float(grid.max(axis=1).mean())
    recall = float(grid.max(axis=0).mean())
    if precision == 0.0 and recall == 0.0:
        return 0.0, 0.0, 0.0
    f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def _as_matrix(embeddings) -> np.ndarray:
    if isinstance(embeddings, TokenEmbeddings):
        return embeddings.vectors
    arr = np.asarray(embeddings, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(0, 0) if arr.size == 0 else arr.reshape(1, -1)
    return arr


@dataclass(frozen=True)
class SimilarityMatrix:
    """Predicted-by-ground-truth grid of BERT-score F1 values in [0, 1]."""

    scores: np.ndarray
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]


@dataclass(frozen=True)
class MatchOutcome:
    substituted: AttributeSet
    matches: tuple[tuple[int, int, float], ...]
    tau: float


@dataclass(frozen=True)
class ArmResult:
    per_panel: tuple[float, ...]
    mean: float
    std: float
    tau: float


def pairwise_bs(pred: AttributeSet, gt: AttributeSet, provider) -> SimilarityMatrix:
    """BERT-score F1 between every predicted and ground-truth attribute."""
    if len(pred) == 0 or len(gt) == 0:
        raise ValueError("pairwise similarity requires two non-empty attribute sets")
    pred_emb = [_embed_attr(provider, a) for a in pred.items]
    gt_emb = [_embed_attr(provider, a) for a in gt.items]
    scores = np.zeros((len(pred), len(gt)))
    for j, pe in enumerate(pred_emb):
        for i, ge in enumerate(gt_emb):
            try:
                scores[j, i] = bertscore_greedy(pe, ge)[2]
            except Exception as exc:
                raise EmbeddingError(
                    f"scoring pair ({pred.items[j]!r}, {gt.items[i]!r}) failed: {exc}"
                ) from exc
    return SimilarityMatrix(scores=scores, row_labels=pred.items, col_labels=gt.items)


def _embed_attr(provider, attr: str):
    try:
        return provider.embed(attr)
    except Exception as exc:
        raise EmbeddingError(f"embedding attribute {attr!r} failed: {exc}") from exc


def substitute_attributes(
    pred: AttributeSet, gt: AttributeSet, sims: SimilarityMatrix, tau: float
) -> MatchOutcome:
    """Replace each predicted attribute by its best match at or above tau.

    The score of a predicted attribute against the whole ground-truth set is
    its row maximum. Ties at the maximum prefer the column whose string
    equals the predicted attribute (an exact string match must substitute to
    itself), then the lowest column index. Matching is many-to-one; the set
    semantics of the result merge duplicates.
    """
    if sims.scores.shape != (len(pred), len(gt)):
        raise ValueError(
            f"similarity matrix shape {sims.scores.shape} does not match "
            f"{len(pred)}x{len(gt)} attribute sets"
        )
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    gt_index = {a: i for i, a in enumerate(gt.items)}
    out: list[str] = []
    matches: list[tuple[int, int, float]] = []
    for j, attr in enumerate(pred.items):
        row = sims.scores[j]
        best = float(row.max())
        i_star = int(row.argmax())
        exact = gt_index.get(attr)
        if exact is not None and row[exact] == best:
            i_star = exact
        if best >= tau:
            out.append(gt.items[i_star])
            matches.append((j, i_star, best))
        else:
            out.append(attr)
    return MatchOutcome(substituted=AttributeSet(out), matches=tuple(matches), tau=tau)


def jaccard(a: AttributeSet, b: AttributeSet) -> float:
    """Intersection over union under normalized equality.

    Both sets empty scores 1.0 (a correctly empty prediction is rewarded);
    exactly one empty scores 0.0.
    """
    sa, sb = a.as_set(), b.as_set()
    if not sa and not sb:
        return 1.0
    if not sa or not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


def panel_similarities(
    gt_sets: list[AttributeSet], pred_sets: list[AttributeSet], provider
) -> list[SimilarityMatrix | None]:
    """Per-panel similarity matrices; None where either side is empty.

    Computed once so a tau sweep can reuse the embeddings across the grid.
    """
    if len(gt_sets) != len(pred_sets):
        raise ValueError(f"{len(gt_sets)} ground-truth sets vs {len(pred_sets)} predictions")
    if not gt_sets:
        raise ValueError("need at least one panel")
    out: list[SimilarityMatrix | None] = []
    for gt, pred in zip(gt_sets, pred_sets):
        out.append(pairwise_bs(pred, gt, provider) if len(gt) and len(pred) else None)
    return out


def arm_from_similarities(
    gt_sets: list[AttributeSet],
    pred_sets: list[AttributeSet],
    sims: list[SimilarityMatrix | None],
    tau: float,
) -> ArmResult:
    per_panel: list[float] = []
    for gt, pred, sim in zip(gt_sets, pred_sets, sims):
        if sim is None:
            per_panel.append(jaccard(pred, gt))
        else:
            outcome = substitute_attributes(pred, gt, sim, tau)
            per_panel.append(jaccard(outcome.substituted, gt))
    return ArmResult(
        per_panel=tuple(per_panel),
        mean=float(np.mean(per_panel)),
        std=_sample_std(per_panel),
        tau=tau,
    )


def arm(
    gt_sets: list[AttributeSet], pred_sets: list[AttributeSet], provider, tau: float
) -> ArmResult:
    """Attribute-retaining score over a list of panels at threshold tau."""
    sims = panel_similarities(gt_sets, pred_sets, provider)
    return arm_from_similarities(gt_sets, pred_sets, sims, tau)


def _sample_std(values) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1))


# ---------------------------------------------------------------------------
# Baseline caption metrics (sentence level)
# ---------------------------------------------------------------------------


def bleu_sentence(candidate: list[str], reference: list[str], max_n: int = 4) -> float:
    """Sentence BLEU: clipped n-gram precisions, add-1 smoothed for n >= 2,
    geometric mean, times the brevity penalty.

    The unigram precision is left unsmoothed, so zero unigram overlap scores
    exactly 0.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if not candidate:
        return 0.0
    precisions: list[float] = []
    for n in range(1, max_n + 1):
        cand_counts = ngrams(candidate, n)
        ref_counts = ngrams(reference, n)
        total = sum(cand_counts.values())
        clipped = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        if n == 1:
            if clipped == 0:
                return 0.0
            precisions.append(clipped / total)
        else:
            precisions.append((clipped + 1) / (total + 1))
    c, r = len(candidate), len(reference)
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return brevity * math.exp(sum(math.log(p) for p in precisions) / max_n)


def _lcs_length(a: list[str], b: list[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> float:
    """Longest-common-subsequence F1 (beta = 1)."""
    if not candidate and not reference:
        return 1.0
    if not candidate or not reference:
        return 0.0
    lcs = _lcs_length(list(candidate), list(reference))
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return 2.0 * precision * recall / (precision + recall)


def _align_unigrams(candidate: list[str], reference: list[str]) -> list[tuple[int, int]]:
    """Two-stage unigram alignment: exact matches first, then stem matches.

    Within a stage, candidate tokens are walked left to right and matched to
    the earliest unmatched reference occurrence, which keeps identical
    sequences in a single chunk.
    """
    pairs: list[tuple[int, int]] = []
    cand_free = [True] * len(candidate)
    ref_free = [True] * len(reference)
    for key in (lambda t: t, stem_token):
        for ci, token in enumerate(candidate):
            if not cand_free[ci]:
                continue
            wanted = key(token)
            for ri, ref_token in enumerate(reference):
                if ref_free[ri] and key(ref_token) == wanted:
                    pairs.append((ci, ri))
                    cand_free[ci] = False
                    ref_free[ri] = False
                    break
    return sorted(pairs)


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for ci, ri in pairs:
        if prev is None or ci != prev[0] + 1 or ri != prev[1] + 1:
            chunks += 1
        prev = (ci, ri)
    return chunks


def meteor_simplified(candidate: list[str], reference: list[str]) -> float:
    """Unigram F-mean (recall weight 9) with a fragmentation penalty.

    Matching runs an exact stage then a stem stage; no synonym dictionary,
    hence "simplified". penalty = 0.5 * (chunks / matches)^3 and the score
    is F_mean * (1 - penalty). Zero matches score 0.
    """
    if not candidate or not reference:
        return 0.0
    pairs = _align_unigrams(list(candidate), list(reference))
    matches = len(pairs)
    if matches == 0:
        return 0.0
    precision = matches / len(candidate)
    recall = matches / len(reference)
    f_mean = 10.0 * precision * recall / (recall + 9.0 * precision)
    penalty = 0.5 * (_count_chunks(pairs) / matches) ** 3
    return f_mean * (1.0 - penalty)
