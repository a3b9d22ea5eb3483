"""Descriptor matching and ground-truth verification.

The "true match" count of an image pair is the number of descriptor matches
that also satisfy the geometric repeatability predicate (common part, center
distance, overlap error) under the known homography.  Matching itself is
greedy one-to-one nearest neighbor by default; a Lowe-style ratio test is
available as an alternative since evaluation protocols differ on this point.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRegion, DescriptorUnavailable, PointAtInfinity


@dataclass(frozen=True)
class DescriptorMatch:
    ref_index: int
    test_index: int
    distance: float  # Euclidean, in descriptor space


def _descriptor_matrices(ref, test):
    if ref.descriptor_dim == 0 or test.descriptor_dim == 0:
        raise DescriptorUnavailable("both keypoint sets need descriptors")
    if ref.descriptor_dim != test.descriptor_dim:
        raise DescriptorUnavailable(
            f"descriptor dimensions differ: {ref.descriptor_dim} vs {test.descriptor_dim}"
        )
    return ref.descriptors(), test.descriptors()


def _distance_matrix(a, b):
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def nn_match(ref, test):
    """Greedy one-to-one nearest-neighbor matching.

    Repeatedly takes the globally smallest remaining descriptor distance;
    exact ties fall to the smallest (ref_index, test_index).  Produces
    min(len(ref), len(test)) matches.
    """
    a, b = _descriptor_matrices(ref, test)
    if len(a) == 0 or len(b) == 0:
        return []
    d = _distance_matrix(a, b)
    n_test = d.shape[1]
    # A stable sort of the row-major flattening breaks ties exactly by
    # (ref_index, test_index).
    order = np.argsort(d.ravel(), kind="stable")
    want = min(d.shape)
    used_ref = np.zeros(d.shape[0], dtype=bool)
    used_test = np.zeros(n_test, dtype=bool)
    matches = []
    for flat in order.tolist():
        i, j = divmod(flat, n_test)
        if used_ref[i] or used_test[j]:
            continue
        used_ref[i] = True
        used_test[j] = True
        matches.append(DescriptorMatch(i, j, float(d[i, j])))
        if len(matches) == want:
            break
    matches.sort(key=lambda m: (m.ref_index, m.test_index))
    return matches


def ratio_match(ref, test, ratio=0.8):
    """Lowe ratio-test matching, made one-to-one.

    A reference descriptor is kept only when its nearest test distance is
    below `ratio` times the second nearest (ambiguous matches drop out);
    survivors are then resolved greedily like nn_match.  A single test
    descriptor leaves nothing to compare against, so the test is waived.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    a, b = _descriptor_matrices(ref, test)
    if len(a) == 0 or len(b) == 0:
        return []
    d = _distance_matrix(a, b)
    candidates = []
    for i in range(d.shape[0]):
        row = d[i]
        j = int(np.argmin(row))
        d1 = float(row[j])
        if d.shape[1] == 1:
            candidates.append((d1, i, j))
            continue
        d2 = float(np.partition(row, 1)[1])
        if d1 < ratio * d2:
            candidates.append((d1, i, j))
    candidates.sort()
    used_test = set()
    matches = []
    for dist, i, j in candidates:
        if j in used_test:
            continue
        used_test.add(j)
        matches.append(DescriptorMatch(i, j, dist))
    matches.sort(key=lambda m: (m.ref_index, m.test_index))
    return matches


def match_descriptors(ref, test, method="nn", ratio=0.8):
    if method == "nn":
        return nn_match(ref, test)
    if method == "ratio":
        return ratio_match(ref, test, ratio)
    raise ValueError(f"unknown matching method {method!r}")


def verify_matches(matches, ref, test, h, cfg) -> int:
    """Count matches that pass the geometric repeatability predicate.

    A match is a true match when both endpoints lie in the common part, the
    projected reference center falls within cfg.epsilon_px of the test
    center, and the region overlap error is below cfg.max_overlap_error.
    """
    from .geometry import project_point
    from .metrics import common_part_filter, region_overlap_error

    if not matches:
        return 0
    ref_common, test_common = common_part_filter(ref, test, h)
    ref_ok = set(ref_common.tolist())
    test_ok = set(test_common.tolist())

    count = 0
    for m in matches:
        if m.ref_index not in ref_ok or m.test_index not in test_ok:
            continue
        ref_kp = ref.keypoints[m.ref_index]
        test_kp = test.keypoints[m.test_index]
        proj = project_point(h, ref_kp.region.center)
        dx = proj[0] - test_kp.region.center[0]
        dy = proj[1] - test_kp.region.center[1]
        if not (dx * dx + dy * dy) ** 0.5 < cfg.epsilon_px:
            continue
        try:
            err = region_overlap_error(ref_kp.region, test_kp.region, h, cfg)
        except (DegenerateRegion, PointAtInfinity):
            continue
        if err < cfg.max_overlap_error:
            count += 1
    return count
