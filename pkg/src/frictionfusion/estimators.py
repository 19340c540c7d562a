"""Emulated friction estimators and the four planner-facing configurations.

Ground truth (gt) feeds the true profile straight through; local-only (l)
propagates a slip-gated under-vehicle estimate minus its worst-case error;
predictive-only (p) quantizes to road-surface-class minima; fused (f) merges
class means/margins with the local estimate through the GP pipeline.
"""

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .fusion import (
    DEFAULT_LOCAL_REACH,
    assemble_input,
    calibrate_prior,
    fuse,
)

MAX_LOCAL_ERROR = 0.025
AVAILABILITY_THRESHOLD = 0.5

CONFIG_KINDS = ("gt", "l", "p", "f")


@dataclass(frozen=True)
class FrictionProfile:
    """Piecewise-constant ground-truth friction over arc length.

    Segments are (s_start, mu) pairs with strictly increasing starts; the
    first segment must begin at negative s so the profile covers the road
    behind the run start.
    """

    segments: tuple

    def __init__(self, segments):
        segs = tuple((float(s), float(mu)) for s, mu in segments)
        if not segs:
            raise ValueError("profile needs at least one segment")
        starts = [s for s, _ in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment starts must be strictly increasing")
        if starts[0] >= 0.0:
            raise ValueError("first segment must start at negative s")
        for _, mu in segs:
            if not 0.05 <= mu <= 1.2:
                raise ValueError(f"mu values must lie in [0.05, 1.2], got {mu}")
        object.__setattr__(self, "segments", segs)

    def mu_at(self, s):
        """Friction of the segment containing s."""
        starts = [seg[0] for seg in self.segments]
        if s < starts[0]:
            raise ValueError(f"profile undefined below s={starts[0]}")
        idx = bisect.bisect_right(starts, s) - 1
        return self.segments[idx][1]

    def mu_on(self, positions):
        return np.array([self.mu_at(s) for s in np.asarray(positions).reshape(-1)])

    def shifted(self, offset):
        """Profile expressed in a frame displaced by ``offset`` meters."""
        return FrictionProfile(tuple((s + offset, mu) for s, mu in self.segments))

    @property
    def transition_points(self):
        return tuple(s for s, _ in self.segments[1:])


@dataclass(frozen=True)
class SurfaceClass:
    """Camera-distinguishable road surface class with its estimate statistics."""

    name: str
    mu_min: float
    mu_max: float
    mean: float
    margin: float


DRY = SurfaceClass("dry", mu_min=0.6, mu_max=math.inf, mean=0.8, margin=0.2)
WET = SurfaceClass("wet", mu_min=0.4, mu_max=0.6, mean=0.5, margin=0.1)
SNOW_ICE = SurfaceClass("snow_ice", mu_min=0.1, mu_max=0.4, mean=0.25, margin=0.15)

SURFACE_CLASSES = (DRY, WET, SNOW_ICE)


def classify(mu_gt_value):
    """Surface class containing a true friction value.

    Dry requires mu strictly above 0.6, so both class boundaries (0.4, 0.6)
    belong to wet. Values below 0.1 are outside the classifier's range.
    """
    if mu_gt_value < 0.1:
        raise ValueError(f"cannot classify friction below 0.1, got {mu_gt_value}")
    if mu_gt_value > 0.6:
        return DRY
    if mu_gt_value >= 0.4:
        return WET
    return SNOW_ICE


class LocalEstimator:
    """Slip-gated under-vehicle estimator with a persistent last estimate.

    The estimate is available only while tire-force utilization exceeds the
    threshold; the deterministic per-run error e_l models adversarial or
    fixed estimation error within the +-0.025 accuracy bound.
    """

    max_abs_error = MAX_LOCAL_ERROR
    availability_threshold = AVAILABILITY_THRESHOLD

    def __init__(self, e_l=0.0, initial_estimate=None):
        if abs(e_l) > MAX_LOCAL_ERROR + 1e-12:
            raise ValueError(f"|e_l| must be <= {MAX_LOCAL_ERROR}, got {e_l}")
        self.e_l = float(e_l)
        self.last_available = initial_estimate

    def seed(self, estimate):
        """Set the fallback estimate used before any sample has been available."""
        self.last_available = float(estimate)


def resolve_error(mode):
    """Map an error-mode name ('worst-over', 'worst-under', 'fixed=<v>') to e_l."""
    if mode == "worst-over":
        return MAX_LOCAL_ERROR
    if mode == "worst-under":
        return -MAX_LOCAL_ERROR
    if isinstance(mode, str) and mode.startswith("fixed="):
        try:
            value = float(mode[len("fixed="):])
        except ValueError:
            raise ValueError(f"bad fixed error value in {mode!r}") from None
        if abs(value) > MAX_LOCAL_ERROR:
            raise ValueError(f"fixed error must satisfy |e_l| <= {MAX_LOCAL_ERROR}")
        return value
    raise ValueError(f"unknown error mode {mode!r}")


def local_estimate(profile, lambda_t, estimator):
    """Under-vehicle estimate (mu_l, m_l), or None while utilization is too low."""
    if not 0.0 <= lambda_t <= 1.0:
        raise ValueError(f"lambda_t must lie in [0, 1], got {lambda_t}")
    if lambda_t <= AVAILABILITY_THRESHOLD:
        return None
    value = profile.mu_at(0.0) + estimator.e_l
    estimator.last_available = value
    return value, MAX_LOCAL_ERROR


@dataclass(frozen=True)
class Configuration:
    """Which estimate the planner consumes; fused carries its own prior/reach."""

    kind: str
    local_reach: float = DEFAULT_LOCAL_REACH
    prior: object = None

    def __post_init__(self):
        if self.kind not in CONFIG_KINDS:
            raise ValueError(f"kind must be one of {CONFIG_KINDS}, got {self.kind!r}")
        if self.kind == "f" and self.prior is None:
            object.__setattr__(self, "prior", calibrate_prior())


@dataclass(frozen=True)
class EstimateReport:
    """build_estimate output plus the diagnostics the simulator traces."""

    mu_hat: np.ndarray
    local_available: bool
    series: object = None
    fused: object = None


def emulate(config, profile, grid, lambda_t, estimator):
    """Produce the horizon estimate for one configuration, with diagnostics.

    The profile is expected in the grid's frame (s=0 under the vehicle).
    """
    pts = grid.points
    loc = local_estimate(profile, lambda_t, estimator)
    available = loc is not None

    if config.kind == "gt":
        return EstimateReport(mu_hat=profile.mu_on(pts), local_available=available)

    if config.kind == "l":
        if available:
            base = loc[0]
        else:
            if estimator.last_available is None:
                raise ValueError("no local estimate has ever been available and none was seeded")
            base = estimator.last_available
        mu_hat = np.full(grid.n_points, base - MAX_LOCAL_ERROR)
        return EstimateReport(mu_hat=mu_hat, local_available=available)

    if config.kind == "p":
        mu_hat = np.array([classify(profile.mu_at(s)).mu_min for s in pts])
        return EstimateReport(mu_hat=mu_hat, local_available=available)

    classes = [classify(profile.mu_at(s)) for s in pts]
    series = assemble_input(
        grid,
        predictive_mu=np.array([c.mean for c in classes]),
        predictive_margin=np.array([c.margin for c in classes]),
        local=loc,
        local_reach=config.local_reach,
    )
    fused = fuse(config.prior, series)
    return EstimateReport(
        mu_hat=fused.mu_hat, local_available=available, series=series, fused=fused
    )


def build_estimate(config, profile, grid, lambda_t, estimator):
    """Horizon estimate vector for one configuration (see ``emulate``)."""
    return emulate(config, profile, grid, lambda_t, estimator).mu_hat
