"""Slow reference implementations used to cross-check the library.

Everything here is written against the observable contracts only, in the
most literal way possible (pure python loops, recompute-from-scratch), so
that agreement with the optimized library code is meaningful evidence.
"""

from __future__ import annotations

import math


def flood_fill_components(mask):
    """8-connected components of a boolean grid via BFS.

    mask is indexed [y][x].  Returns a list of frozensets of (x, y) pixels,
    one per component, in no particular order.
    """
    height = len(mask)
    width = len(mask[0]) if height else 0
    seen = [[False] * width for _ in range(height)]
    components = []
    for sy in range(height):
        for sx in range(width):
            if not mask[sy][sx] or seen[sy][sx]:
                continue
            queue = [(sx, sy)]
            seen[sy][sx] = True
            pixels = set()
            while queue:
                x, y = queue.pop()
                pixels.add((x, y))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        if dx == 0 and dy == 0:
                            continue
                        nx, ny = x + dx, y + dy
                        if 0 <= nx < width and 0 <= ny < height:
                            if mask[ny][nx] and not seen[ny][nx]:
                                seen[ny][nx] = True
                                queue.append((nx, ny))
            components.append(frozenset(pixels))
    return components


def rect_gap(a, b):
    """Minimum distance between two axis-aligned rectangles (x, y, w, h)."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    dx = max(max(ax, bx) - min(ax + aw, bx + bw), 0)
    dy = max(max(ay, by) - min(ay + ah, by + bh), 0)
    return math.hypot(dx, dy)


def _union_rect(a, b):
    x0 = min(a[0], b[0])
    y0 = min(a[1], b[1])
    x1 = max(a[0] + a[2], b[0] + b[2])
    y1 = max(a[1] + a[3], b[1] + b[3])
    return (x0, y0, x1 - x0, y1 - y0)


def _rect_key(rect):
    return (rect[1], rect[0], rect[3], rect[2])


def greedy_union_clusters(rects, d_merge):
    """Recompute-everything version of the greedy agglomeration.

    Each step scans every live pair from scratch, picks the minimum-distance
    pair (ties resolved by the sorted (y, x, h, w) key pair), and replaces
    both with their union rectangle.  Returns the member index sets and the
    final bounding rectangles, sorted by rectangle key.
    """
    clusters = [({i}, tuple(rect)) for i, rect in enumerate(rects)]
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                dist = rect_gap(clusters[i][1], clusters[j][1])
                if dist > d_merge:
                    continue
                pair_key = tuple(
                    sorted((_rect_key(clusters[i][1]), _rect_key(clusters[j][1])))
                )
                if best is None or (dist, pair_key) < (best[0], best[1]):
                    best = (dist, pair_key, i, j)
        if best is None:
            break
        _, _, i, j = best
        merged = (
            clusters[i][0] | clusters[j][0],
            _union_rect(clusters[i][1], clusters[j][1]),
        )
        clusters = [c for k, c in enumerate(clusters) if k not in (i, j)]
        clusters.append(merged)
    clusters.sort(key=lambda c: _rect_key(c[1]))
    return [(frozenset(members), rect) for members, rect in clusters]


def principal_angle_sweep(points, steps=3600):
    """Direction of maximum variance found by scanning projection angles.

    Returns the angle in [0, pi) whose unit direction maximizes the variance
    of the projected centered points.  Resolution is pi / steps.
    """
    n = len(points)
    cx = sum(p[0] for p in points) / n
    cy = sum(p[1] for p in points) / n
    best_angle = 0.0
    best_var = -1.0
    for k in range(steps):
        theta = math.pi * k / steps
        ux, uy = math.cos(theta), math.sin(theta)
        var = sum(((p[0] - cx) * ux + (p[1] - cy) * uy) ** 2 for p in points) / n
        if var > best_var:
            best_var = var
            best_angle = theta
    return best_angle


def average_precision_literal(is_tp, total_gt):
    """All-points interpolated AP computed straight from the definition.

    For every distinct achieved recall level r, the interpolated precision
    is the best precision among ranked prefixes whose recall is >= r; AP is
    the sum of interpolated precision times recall increment.
    """
    if total_gt <= 0:
        raise ValueError("total_gt must be positive")
    precisions = []
    recalls = []
    tp = 0
    for k, hit in enumerate(is_tp, start=1):
        if hit:
            tp += 1
        precisions.append(tp / k)
        recalls.append(tp / total_gt)
    area = 0.0
    prev_recall = 0.0
    for r in sorted(set(recalls)):
        if r <= prev_recall:
            continue
        interp = max(
            (p for p, rec in zip(precisions, recalls) if rec >= r), default=0.0
        )
        area += (r - prev_recall) * interp
        prev_recall = r
    return area


def pearson(a, b):
    """Plain-loop Pearson correlation of two equal-length sequences."""
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b)) / n
    va = sum((x - ma) ** 2 for x in a) / n
    vb = sum((y - mb) ** 2 for y in b) / n
    if va == 0.0 or vb == 0.0:
        return 0.0
    return cov / math.sqrt(va * vb)


def centered_moving_average(values, window):
    """Truncated-window centered moving average, plain loops."""
    half = window // 2
    out = []
    for i in range(len(values)):
        lo = max(i - half, 0)
        hi = min(i + half + 1, len(values))
        out.append(sum(values[lo:hi]) / (hi - lo))
    return out
