"""Self-similarity of words over time: adjacent-slot series, change points,
distance-aggregated totals with frequency bands and a linearity fit."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .corpus import TimeSlot
from .linalg import rowwise_cosine
from .trainer import JointEmbeddingModel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DistributionSummary:
    """Box-plot statistics of a sample; whiskers sit at the 5th/95th percentiles."""

    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    mean: float
    n: int

    @classmethod
    def from_values(cls, values: np.ndarray) -> "DistributionSummary":
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            raise ValueError("cannot summarize an empty sample")
        p5, q1, med, q3, p95 = np.percentile(values, [5, 25, 50, 75, 95])
        return cls(
            median=float(med),
            q1=float(q1),
            q3=float(q3),
            whisker_lo=float(p5),
            whisker_hi=float(p95),
            mean=float(values.mean()),
            n=int(values.size),
        )


@dataclass
class SelfSimSeries:
    """Per adjacent slot pair: the word-level cosine sample and its summary."""

    pairs: list[tuple[TimeSlot, TimeSlot]]
    summaries: list[DistributionSummary]
    cosines: list[dict[str, float]]


def _top_indices(counts: np.ndarray, top_n: int) -> np.ndarray:
    order = np.lexsort((np.arange(counts.size), -counts))
    return order[:top_n]


def pairwise_self_similarity(
    model: JointEmbeddingModel,
    top_n: int = 3000,
    words: list[str] | None = None,
    frequency_scope: str = "global",
) -> SelfSimSeries:
    """Cosine of each frequent word with itself across adjacent slots.

    Candidates are the ``top_n`` most frequent vocabulary words (corpus-wide
    by default; ``frequency_scope="pair"`` ranks by the two slots of each
    pair instead), or an explicit ``words`` list. A word absent from either
    slot of a pair is skipped for that pair, never imputed. Pairs with no
    measurable word are dropped with a warning.
    """
    vocab = model.vocab
    if model.n_slots < 2:
        raise ValueError("need at least 2 slots for pairwise self-similarity")
    if frequency_scope not in ("global", "pair"):
        raise ValueError("frequency_scope must be 'global' or 'pair'")
    if words is not None:
        fixed = np.array([model._word_index(w) for w in words], dtype=np.int64)
    else:
        if top_n < 1 or top_n > len(vocab):
            raise ValueError(f"top_n must be in [1, {len(vocab)}]")
        fixed = _top_indices(vocab.global_counts, top_n) if frequency_scope == "global" else None

    pairs: list[tuple[TimeSlot, TimeSlot]] = []
    summaries: list[DistributionSummary] = []
    cosines: list[dict[str, float]] = []
    for i in range(model.n_slots - 1):
        j = i + 1
        if fixed is None:
            cand = _top_indices(vocab.slot_counts[i] + vocab.slot_counts[j], top_n)
        else:
            cand = fixed
        present = cand[(vocab.slot_counts[i, cand] > 0) & (vocab.slot_counts[j, cand] > 0)]
        if present.size == 0:
            log.warning(
                "no words shared by slots %s and %s; dropping the pair",
                model.slot_table[i].label,
                model.slot_table[j].label,
            )
            continue
        cos = rowwise_cosine(model.slot_vectors(i, present), model.slot_vectors(j, present))
        pairs.append((model.slot_table[i], model.slot_table[j]))
        summaries.append(DistributionSummary.from_values(cos))
        cosines.append({vocab.words[w]: float(c) for w, c in zip(present, cos)})
    return SelfSimSeries(pairs=pairs, summaries=summaries, cosines=cosines)


def detect_change_points(series: SelfSimSeries, k: int) -> list[tuple[int, float]]:
    """The k deepest interior local minima of the per-pair median sequence.

    Depth is the mean of the neighboring medians minus the minimum's median,
    so the measure is invariant under shifting all medians by a constant.
    Each change point is reported as (start year of the later slot, depth),
    deepest first, ties broken by the earlier year. Fewer minima than ``k``
    yields a shorter list.
    """
    medians = [s.median for s in series.summaries]
    if len(medians) < 3:
        raise ValueError("change-point detection needs at least 3 slot pairs")
    points = []
    for i in range(1, len(medians) - 1):
        if medians[i] < medians[i - 1] and medians[i] < medians[i + 1]:
            depth = (medians[i - 1] + medians[i + 1]) / 2.0 - medians[i]
            points.append((series.pairs[i][1].start, depth))
    points.sort(key=lambda p: (-p[1], p[0]))
    return points[: max(0, k)]


@dataclass
class TotalSelfSim:
    """Per-word mean cosine at every slot-distance, plus per-distance summaries."""

    distances: list[int]  # year gaps between slot starts, ascending
    words: list[str]
    word_indices: np.ndarray  # (n,) vocabulary indices
    global_counts: np.ndarray  # (n,)
    word_means: np.ndarray  # (n, n_distances)
    summaries: list[DistributionSummary]


def total_self_similarity(
    model: JointEmbeddingModel,
    min_per_slot: int = 50,
    stopwords: frozenset[str] = frozenset(),
) -> TotalSelfSim:
    """Self-similarity aggregated by the year distance between slot starts.

    Only non-stopwords occurring at least ``min_per_slot`` times in every
    slot are measured. For each such word the cosines of all unordered slot
    pairs are bucketed by distance and averaged, leaving one value per word
    and distance; the summaries then describe the word sample per distance.
    """
    vocab = model.vocab
    eligible_mask = (vocab.slot_counts >= min_per_slot).all(axis=0)
    for w in stopwords:
        i = vocab.index.get(w)
        if i is not None:
            eligible_mask[i] = False
    word_indices = np.flatnonzero(eligible_mask)
    if word_indices.size == 0:
        raise ValueError(
            f"no words occur at least {min_per_slot} times in every slot (after stopword removal)"
        )

    starts = [slot.start for slot in model.slot_table]
    dist_of_pair: dict[tuple[int, int], int] = {}
    for i in range(model.n_slots):
        for j in range(i + 1, model.n_slots):
            dist_of_pair[(i, j)] = abs(starts[i] - starts[j])
    distances = sorted(set(dist_of_pair.values()))
    dist_pos = {dist: k for k, dist in enumerate(distances)}

    sums = np.zeros((word_indices.size, len(distances)))
    counts = np.zeros(len(distances), dtype=np.int64)
    slot_mats = [model.slot_vectors(t, word_indices) for t in range(model.n_slots)]
    for (i, j), dist in dist_of_pair.items():
        cos = rowwise_cosine(slot_mats[i], slot_mats[j])
        sums[:, dist_pos[dist]] += cos
        counts[dist_pos[dist]] += 1
    word_means = sums / counts[None, :]
    summaries = [DistributionSummary.from_values(word_means[:, k]) for k in range(len(distances))]
    return TotalSelfSim(
        distances=distances,
        words=[vocab.words[i] for i in word_indices],
        word_indices=word_indices,
        global_counts=vocab.global_counts[word_indices],
        word_means=word_means,
        summaries=summaries,
    )


@dataclass
class FrequencyBands:
    """Low/high frequency halves of the eligible words with per-band summaries."""

    band_of: dict[str, str]  # word -> "low" | "high"
    summaries: dict[str, list[DistributionSummary]]  # band -> per distance
    distances: list[int]


def frequency_bands(total: TotalSelfSim) -> FrequencyBands:
    """Split the eligible words into equal low/high frequency bands.

    Words sort by global count (vocabulary index breaks ties); the lower
    half is the low band, and an odd word count puts the median word there.
    """
    n = len(total.words)
    if n < 2:
        raise ValueError("frequency bands need at least 2 eligible words")
    order = sorted(range(n), key=lambda r: (int(total.global_counts[r]), int(total.word_indices[r])))
    n_low = (n + 1) // 2
    low_rows = np.array(order[:n_low])
    high_rows = np.array(order[n_low:])
    band_of = {total.words[r]: "low" for r in low_rows}
    band_of.update({total.words[r]: "high" for r in high_rows})
    summaries = {
        "low": [
            DistributionSummary.from_values(total.word_means[low_rows, k])
            for k in range(len(total.distances))
        ],
        "high": [
            DistributionSummary.from_values(total.word_means[high_rows, k])
            for k in range(len(total.distances))
        ],
    }
    return FrequencyBands(band_of=band_of, summaries=summaries, distances=list(total.distances))


@dataclass(frozen=True)
class LinearFit:
    slope: float  # change in mean cosine per year of distance
    intercept: float
    r_squared: float


def linearity_fit(total: TotalSelfSim) -> LinearFit:
    """Ordinary least squares of per-distance mean cosine against distance.

    Constant means are reported as slope 0 with r-squared defined as 0.
    """
    if len(total.distances) < 3:
        raise ValueError("linearity fit needs at least 3 distinct distances")
    x = np.array(total.distances, dtype=np.float64)
    y = np.array([s.mean for s in total.summaries])
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(((x - x_mean) ** 2).sum())
    sst = float(((y - y_mean) ** 2).sum())
    if sst == 0.0:
        return LinearFit(slope=0.0, intercept=float(y_mean), r_squared=0.0)
    slope = float(((x - x_mean) * (y - y_mean)).sum() / sxx)
    intercept = float(y_mean - slope * x_mean)
    residuals = y - (slope * x + intercept)
    r_squared = 1.0 - float((residuals**2).sum()) / sst
    return LinearFit(slope=slope, intercept=intercept, r_squared=r_squared)
