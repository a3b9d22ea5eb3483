"""Common-part filtering, correspondence search, and the repeatability rates.

Three rates are computed from one correspondence set so that they differ only
in their denominators:

    eq1 = n_rep / min(n_ref, n_test)      (the original definition)
    c1  = n_rep / n_ref                   (fixed-reference criterion)
    c2  = 2 n_rep / (n_ref + n_test)      (symmetric criterion)

where n_ref and n_test count keypoints inside the common part of the two
views and n_rep counts one-to-one correspondences under the predicate
"projected center within epsilon_px AND region overlap error below
max_overlap_error".
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRegion, PointAtInfinity, UndefinedMetric
from .geometry import (
    default_grid_step,
    map_region_to_reference,
    normalize_pair,
    overlap_error,
    project_points,
)

EQ1_POPULATIONS = ("common", "whole")
MATCHERS = ("nn", "ratio")


@dataclass(frozen=True)
class EvalConfig:
    epsilon_px: float = 1.5
    max_overlap_error: float = 0.40
    normalize_radius: float | None = 30.0
    grid_step: float | None = None
    eq1_population: str = "common"
    matcher: str = "nn"
    ratio_threshold: float = 0.8

    def __post_init__(self):
        if self.epsilon_px <= 0:
            raise ValueError("epsilon_px must be positive")
        if not 0.0 < self.max_overlap_error < 1.0:
            raise ValueError("max_overlap_error must lie in (0, 1)")
        if self.normalize_radius is not None and self.normalize_radius <= 0:
            raise ValueError("normalize_radius must be positive or None")
        if self.grid_step is not None and self.grid_step <= 0:
            raise ValueError("grid_step must be positive or None")
        if self.eq1_population not in EQ1_POPULATIONS:
            raise ValueError(f"eq1_population must be one of {EQ1_POPULATIONS}")
        if self.matcher not in MATCHERS:
            raise ValueError(f"matcher must be one of {MATCHERS}")
        if not 0.0 < self.ratio_threshold < 1.0:
            raise ValueError("ratio_threshold must lie in (0, 1)")


@dataclass(frozen=True)
class Correspondence:
    ref_index: int
    test_index: int
    center_distance: float  # pixels, measured in the test frame
    overlap_err: float


@dataclass(frozen=True)
class PairEvaluation:
    n_ref: int
    n_test: int
    n_rep: int
    true_matches: int
    descriptors_available: bool
    eq1: float | None
    c1: float | None
    c2: float | None


def common_part_filter(ref, test, h):
    """Indices of keypoints whose centers fall in the shared view.

    A reference keypoint belongs to the common part when h maps its center
    inside [0, test.width] x [0, test.height]; a test keypoint when h^-1 maps
    its center inside the reference bounds.  Boundary-inclusive.  Points whose
    projection blows up (homogeneous weight ~ 0) are excluded, not fatal.
    """
    ref_idx = _in_view(ref.centers(), h, test.width, test.height)
    test_idx = _in_view(test.centers(), h.inverse(), ref.width, ref.height)
    return ref_idx, test_idx


def _in_view(centers, h, width, height):
    if len(centers) == 0:
        return np.zeros(0, dtype=int)
    proj, ok = project_points(h, centers)
    with np.errstate(invalid="ignore"):
        inside = (
            ok
            & (proj[:, 0] >= 0.0)
            & (proj[:, 0] <= width)
            & (proj[:, 1] >= 0.0)
            & (proj[:, 1] <= height)
        )
    return np.flatnonzero(inside)


def region_overlap_error(ref_region, test_region, h, cfg):
    """Overlap error of a candidate pair in the reference frame.

    The test region is transported by the Jacobian quadratic form around the
    reference center, then both regions are optionally rescaled so the
    reference one matches cfg.normalize_radius before sampling.
    """
    mapped = map_region_to_reference(h, ref_region.center, test_region)
    a, b = ref_region, mapped
    if cfg.normalize_radius is not None:
        a, b = normalize_pair(a, b, cfg.normalize_radius)
    step = cfg.grid_step if cfg.grid_step is not None else default_grid_step(a, b)
    return overlap_error(a, b, step)


def find_correspondences(ref, test, h, cfg=EvalConfig()):
    """One-to-one correspondences under the repeatability predicate.

    Candidates are pairs whose test-frame center distance is below
    cfg.epsilon_px and whose overlap error is below cfg.max_overlap_error;
    they are resolved greedily in ascending (overlap error, center distance,
    ref index, test index) order.
    """
    _, _, corrs = _common_and_correspondences(ref, test, h, cfg)
    return corrs


def _common_and_correspondences(ref, test, h, cfg):
    ref_idx, test_idx = common_part_filter(ref, test, h)
    if len(ref_idx) == 0 or len(test_idx) == 0:
        return ref_idx, test_idx, []

    proj, ok = project_points(h, ref.centers()[ref_idx])
    # common-part membership already implies a finite projection
    assert bool(np.all(ok))
    test_centers = test.centers()[test_idx]
    d = np.sqrt(
        ((proj[:, None, :] - test_centers[None, :, :]) ** 2).sum(axis=2)
    )
    cand_i, cand_j = np.nonzero(d < cfg.epsilon_px)

    candidates = []
    for i, j in zip(cand_i.tolist(), cand_j.tolist()):
        ri = int(ref_idx[i])
        tj = int(test_idx[j])
        try:
            err = region_overlap_error(
                ref.keypoints[ri].region, test.keypoints[tj].region, h, cfg
            )
        except (DegenerateRegion, PointAtInfinity):
            continue
        if err < cfg.max_overlap_error:
            candidates.append((err, float(d[i, j]), ri, tj))

    candidates.sort()
    used_ref = set()
    used_test = set()
    matched = []
    for err, dist, ri, tj in candidates:
        if ri in used_ref or tj in used_test:
            continue
        used_ref.add(ri)
        used_test.add(tj)
        matched.append(Correspondence(ri, tj, dist, err))
    matched.sort(key=lambda c: (c.ref_index, c.test_index))
    return ref_idx, test_idx, matched


def eq1_repeatability(n_rep, n_ref, n_test) -> float:
    """Repeated fraction relative to the smaller detection count."""
    denom = min(n_ref, n_test)
    if denom <= 0:
        raise UndefinedMetric("min(n_ref, n_test) is zero")
    return n_rep / denom


def criterion1(n_rep, n_ref) -> float:
    """Repeated fraction relative to the reference-image count."""
    if n_ref <= 0:
        raise UndefinedMetric("n_ref is zero")
    return n_rep / n_ref


def criterion2(n_rep, n_ref, n_test) -> float:
    """Symmetric repeated fraction, 2 n_rep / (n_ref + n_test)."""
    if n_ref + n_test <= 0:
        raise UndefinedMetric("n_ref + n_test is zero")
    return 2.0 * n_rep / (n_ref + n_test)


def evaluate_pair(ref, test, h, cfg=EvalConfig()):
    """Full evaluation of one image pair against ground truth.

    All three rates are computed from the same correspondence set.  Rates
    whose denominator is zero come back as None.  true_matches is filled by
    descriptor matching when both sets carry descriptors, else 0 with the
    descriptors_available flag cleared.
    """
    ref_idx, test_idx, corrs = _common_and_correspondences(ref, test, h, cfg)
    n_ref = len(ref_idx)
    n_test = len(test_idx)
    n_rep = len(corrs)

    if cfg.eq1_population == "whole":
        eq1_args = (n_rep, len(ref.keypoints), len(test.keypoints))
    else:
        eq1_args = (n_rep, n_ref, n_test)

    def attempt(fn, *args):
        try:
            return fn(*args)
        except UndefinedMetric:
            return None

    eq1 = attempt(eq1_repeatability, *eq1_args)
    c1 = attempt(criterion1, n_rep, n_ref)
    c2 = attempt(criterion2, n_rep, n_ref, n_test)

    descriptors_available = (
        ref.descriptor_dim > 0 and ref.descriptor_dim == test.descriptor_dim
    )
    true_matches = 0
    if descriptors_available:
        from . import matching

        matches = matching.match_descriptors(
            ref, test, method=cfg.matcher, ratio=cfg.ratio_threshold
        )
        true_matches = matching.verify_matches(matches, ref, test, h, cfg)

    return PairEvaluation(
        n_ref=n_ref,
        n_test=n_test,
        n_rep=n_rep,
        true_matches=true_matches,
        descriptors_available=descriptors_available,
        eq1=eq1,
        c1=c1,
        c2=c2,
    )
