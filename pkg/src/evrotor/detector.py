"""Coarse-to-fine rotor detection over a saliency map.

Thresholded saliency components are agglomerated into clusters whenever the
minimum distance between their union bboxes stays within d_merge. The top K
clusters by saliency mass are scored for periodicity; candidates that clear
tau_p are refined by checking each member component against a Gaussian shape
prior, which tightens the box to the consistent components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ValidationError
from .events import BBox, DetectorConfig, EventPeriod
from .features import (
    FeatureSeries,
    RegionScores,
    compute_features,
    extract_local_slices,
    periodicity_score,
    saliency_score,
)
from .saliency import Region, SaliencyMap, connected_components, saliency_map, threshold_mask


@dataclass
class Cluster:
    """Regions merged by proximity; scores are filled by the coarse stage."""

    members: tuple[Region, ...]
    bbox: BBox
    scores: RegionScores | None = None

    @property
    def area(self) -> int:
        return sum(member.area for member in self.members)


@dataclass(frozen=True, eq=False)
class Detection:
    """One detected rotor: box, scores, and the supporting pixels."""

    bbox: BBox
    s_p: int
    s_s: float
    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.ascontiguousarray(self.pixels, dtype=np.int32)
        if pixels.ndim != 2 or pixels.shape[1] != 2:
            raise ValidationError("detection pixels must form a (k, 2) array")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)


@dataclass
class PipelineResult:
    """Full intermediate state of one detection run, for inspection and dumps."""

    detections: list[Detection]
    saliency: SaliencyMap
    mask: np.ndarray
    regions: list[Region]
    clusters: list[Cluster]
    candidates: list[Cluster]
    candidate_features: list[FeatureSeries]


def rect_min_distance(a: BBox, b: BBox) -> float:
    """Shortest distance between two rectangles; 0 when they touch or overlap."""
    dx = max(max(a.x, b.x) - min(a.right, b.right), 0)
    dy = max(max(a.y, b.y) - min(a.bottom, b.bottom), 0)
    return math.hypot(dx, dy)


def _bbox_key(bbox: BBox) -> tuple[int, int, int, int]:
    return (bbox.y, bbox.x, bbox.h, bbox.w)


def cluster_regions(regions: list[Region], d_merge: float) -> list[Cluster]:
    """Greedy agglomeration of regions by union-bbox proximity.

    Repeatedly merges the two clusters whose union bboxes are closest, as
    long as that distance does not exceed d_merge, recomputing union bboxes
    after every merge. Equidistant pairs are broken toward the smaller
    row-major bbox ordering.
    """
    if d_merge < 0:
        raise ConfigurationError(f"d_merge must be non-negative, got {d_merge}")
    ordered = sorted(regions, key=lambda r: _bbox_key(r.bbox))
    if not ordered:
        return []
    members: list[list[Region] | None] = [[r] for r in ordered]
    boxes: list[BBox | None] = [r.bbox for r in ordered]
    n = len(ordered)
    # Pairwise distance matrix, maintained incrementally as clusters merge.
    dist = np.full((n, n), np.inf)
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = rect_min_distance(boxes[i], boxes[j])
    alive = n
    while alive > 1:
        flat = int(np.argmin(dist))
        best = float(dist.flat[flat])
        if best > d_merge:
            break
        tied = np.argwhere(dist == best)
        pick = None
        for i, j in tied:
            if i >= j:
                continue
            key = tuple(sorted((_bbox_key(boxes[i]), _bbox_key(boxes[j]))))
            if pick is None or key < pick[0]:
                pick = (key, int(i), int(j))
        _, i, j = pick
        if _bbox_key(boxes[j]) < _bbox_key(boxes[i]):
            i, j = j, i
        members[i].extend(members[j])
        boxes[i] = boxes[i].union(boxes[j])
        members[j] = None
        boxes[j] = None
        dist[j, :] = np.inf
        dist[:, j] = np.inf
        for k in range(n):
            if k != i and boxes[k] is not None:
                dist[i, k] = dist[k, i] = rect_min_distance(boxes[i], boxes[k])
        alive -= 1
    clusters = [
        Cluster(members=tuple(sorted(group, key=lambda r: _bbox_key(r.bbox))), bbox=box)
        for group, box in zip(members, boxes)
        if group is not None
    ]
    clusters.sort(key=lambda c: _bbox_key(c.bbox))
    return clusters


def _score_clusters(
    clusters: list[Cluster],
    period: EventPeriod,
    smap: SaliencyMap,
    config: DetectorConfig,
) -> tuple[list[Cluster], list[FeatureSeries]]:
    """Rank clusters by saliency mass, score the top K, filter by tau_p."""
    _, m = config.slicing_for(period)
    for cluster in clusters:
        mass = sum(saliency_score(region, smap) for region in cluster.members)
        cluster.scores = RegionScores(s_s=mass)
    ranked = sorted(
        clusters,
        key=lambda c: (-c.scores.s_s, -c.area, _bbox_key(c.bbox)),
    )
    top = ranked[: config.k_top]
    features: dict[int, FeatureSeries] = {}
    for cluster in top:
        local = extract_local_slices(period, cluster.bbox, m, config.region_margin)
        series = compute_features(local)
        s_p = periodicity_score(series, config.smooth_window)
        cluster.scores = RegionScores(s_s=cluster.scores.s_s, s_p=s_p)
        features[id(cluster)] = series
    passed = [c for c in top if c.scores.s_p >= config.tau_p]
    passed.sort(key=lambda c: (-c.scores.s_p, -c.scores.s_s, _bbox_key(c.bbox)))
    return passed, [features[id(c)] for c in passed]


def coarse_select(
    clusters: list[Cluster],
    period: EventPeriod,
    smap: SaliencyMap,
    config: DetectorConfig,
) -> list[Cluster]:
    """Candidates among the top-K salient clusters whose s_p clears tau_p.

    Returned clusters carry full RegionScores and are ranked by descending
    (s_p, s_s).
    """
    return _score_clusters(clusters, period, smap, config)[0]


def gaussian_fine_refine(candidate: Cluster, smap: SaliencyMap) -> Detection:
    """Tighten a candidate box around its Gaussian-shaped member components.

    A member is shape-consistent when the area of the 2-sigma ellipse of its
    gray-weighted pixel covariance stays within a factor of two of its pixel
    count, and its weighted centroid falls inside the candidate bbox. The
    detection covers the consistent members, or the whole candidate bbox when
    none qualify.
    """
    if candidate.scores is None or candidate.scores.s_p is None:
        raise ValidationError("candidate has no scores; run the coarse stage first")
    consistent: list[Region] = []
    for region in candidate.members:
        xs = region.pixels[:, 0].astype(np.float64)
        ys = region.pixels[:, 1].astype(np.float64)
        weights = smap.gray[region.pixels[:, 1], region.pixels[:, 0]].astype(np.float64)
        total = float(weights.sum())
        if total <= 0.0:
            continue
        mean_x = float((weights * xs).sum()) / total
        mean_y = float((weights * ys).sum()) / total
        dx = xs - mean_x
        dy = ys - mean_y
        cov_xx = float((weights * dx * dx).sum()) / total
        cov_xy = float((weights * dx * dy).sum()) / total
        cov_yy = float((weights * dy * dy).sum()) / total
        det = max(cov_xx * cov_yy - cov_xy * cov_xy, 0.0)
        ellipse_area = 4.0 * math.pi * math.sqrt(det)
        ratio = ellipse_area / region.area
        if 0.5 <= ratio <= 2.0 and candidate.bbox.contains(mean_x, mean_y):
            consistent.append(region)
    if consistent:
        bbox = consistent[0].bbox
        for region in consistent[1:]:
            bbox = bbox.union(region.bbox)
        pixels = np.concatenate([region.pixels for region in consistent])
    else:
        bbox = candidate.bbox
        pixels = np.concatenate([region.pixels for region in candidate.members])
    return Detection(
        bbox=bbox,
        s_p=candidate.scores.s_p,
        s_s=candidate.scores.s_s,
        pixels=pixels,
    )


def run_pipeline(period: EventPeriod, config: DetectorConfig | None = None) -> PipelineResult:
    """Run the full detection pipeline, keeping intermediates."""
    if config is None:
        config = DetectorConfig()
    n, _ = config.slicing_for(period)
    smap = saliency_map(period, n)
    mask = threshold_mask(smap, config.tau_s)
    regions = connected_components(mask)
    clusters = cluster_regions(regions, config.d_merge)
    candidates, features = _score_clusters(clusters, period, smap, config)
    detections = [gaussian_fine_refine(candidate, smap) for candidate in candidates]
    return PipelineResult(
        detections=detections,
        saliency=smap,
        mask=mask,
        regions=regions,
        clusters=clusters,
        candidates=candidates,
        candidate_features=features,
    )


def detect_period(period: EventPeriod, config: DetectorConfig | None = None) -> list[Detection]:
    """Detect rotors in one event period.

    Returns detections ranked by descending (s_p, s_s); empty or quiet
    periods yield an empty list.
    """
    return run_pipeline(period, config).detections
