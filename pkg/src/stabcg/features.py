"""Per-vertex statistical features computed over sampled maximal independent sets."""
from __future__ import annotations

import numpy as np

from .graph import Column, Graph, sample_random_mis
from .lp import DualVector

FEATURE_NAMES = ("f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "f9")


def mis_samples(g: Graph, seed: int) -> tuple[list[Column], list[Column]]:
    """Draw 5n random maximal independent sets plus one anchored set per vertex.

    The anchored sets guarantee every vertex appears in at least one sample, so
    the containment statistics below are always defined. Frequency is computed
    over the random samples only.
    """
    base = seed * 100_003
    random_part = [sample_random_mis(g, base + t) for t in range(5 * g.n)]
    anchored = [sample_random_mis(g, base + 5 * g.n + v, anchor=v) for v in range(g.n)]
    return random_part, anchored


def raw_features(g: Graph, freq_samples: list[Column], stat_samples: list[Column]) -> np.ndarray:
    """Unnormalized (n, 9) feature matrix.

    Columns: sample frequency; max/min/mean cardinality of containing samples;
    max/min/mean of the containing samples' average member degree; vertex
    degree; graph density. Every vertex must appear in some stat sample.
    """
    n = g.n
    out = np.zeros((n, 9))
    freq = np.zeros(n)
    for col in freq_samples:
        for v in col.vertices:
            freq[v] += 1.0
    out[:, 0] = freq / max(1, len(freq_samples))

    sizes: list[list[int]] = [[] for _ in range(n)]
    avg_degs: list[list[float]] = [[] for _ in range(n)]
    for col in stat_samples:
        size = len(col.vertices)
        avg_deg = sum(g.degree[v] for v in col.vertices) / size
        for v in col.vertices:
            sizes[v].append(size)
            avg_degs[v].append(avg_deg)
    for v in range(n):
        if not sizes[v]:
            raise ValueError(f"vertex {v} appears in no stat sample")
        out[v, 1] = max(sizes[v])
        out[v, 2] = min(sizes[v])
        out[v, 3] = sum(sizes[v]) / len(sizes[v])
        out[v, 4] = max(avg_degs[v])
        out[v, 5] = min(avg_degs[v])
        out[v, 6] = sum(avg_degs[v]) / len(avg_degs[v])
    out[:, 7] = g.degree
    out[:, 8] = g.density
    return out


def normalize_instance(features: np.ndarray) -> np.ndarray:
    """Min-max normalize each feature column within the instance; constants map to 0.5."""
    lo = features.min(axis=0)
    hi = features.max(axis=0)
    span = hi - lo
    out = np.full_like(features, 0.5, dtype=float)
    varying = span > 1e-12
    out[:, varying] = (features[:, varying] - lo[varying]) / span[varying]
    return out


def compute_features(g: Graph, seed: int) -> np.ndarray:
    """Instance-normalized (n, 9) feature matrix for dual-value prediction."""
    freq_samples, anchored = mis_samples(g, seed)
    return normalize_instance(raw_features(g, freq_samples, freq_samples + anchored))


def predict_degree_baseline(g: Graph) -> DualVector:
    """Degree-proportional dual estimate: degree / max degree (all ones when edgeless)."""
    deg = np.asarray(g.degree, dtype=float)
    top = deg.max() if g.n else 0.0
    if top <= 0:
        return DualVector(np.ones(g.n))
    return DualVector(np.clip(deg / top, 0.0, 1.0))
