"""Fusion of local and camera-class friction estimates into a conservative bound.

Assembles per-point estimates with margins of error from the two sources,
converts the margins to observation noise, runs GP regression on the spatial
grid ahead of the vehicle, and extracts the lower edge of the 95% confidence
band as the fused estimate.
"""

from dataclasses import dataclass

import numpy as np

from .gp import GpPrior, ObservationSet, SquaredExponentialKernel, posterior

Z_95 = 1.96

PRIOR_LOW = 0.1
PRIOR_HIGH = 1.0

DEFAULT_DS = 1.0
DEFAULT_HORIZON = 50.0
DEFAULT_LENGTH_SCALE = 10.0
DEFAULT_LOCAL_REACH = 5.0


@dataclass(frozen=True)
class SGrid:
    """Uniform arc-length grid {0, ds, ..., s_f} ahead of the vehicle."""

    ds: float = DEFAULT_DS
    s_f: float = DEFAULT_HORIZON

    def __post_init__(self):
        if not self.ds > 0.0:
            raise ValueError(f"ds must be > 0, got {self.ds}")
        if not self.s_f > 0.0:
            raise ValueError(f"s_f must be > 0, got {self.s_f}")
        ratio = self.s_f / self.ds
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(f"s_f ({self.s_f}) must be an exact multiple of ds ({self.ds})")

    @property
    def n_points(self):
        return int(round(self.s_f / self.ds)) + 1

    @property
    def points(self):
        return np.arange(self.n_points) * self.ds


@dataclass(frozen=True)
class EstimateSeries:
    """Assembled input samples (mu', m') on the grid, one pair per point."""

    grid: SGrid
    mu_prime: np.ndarray
    margin: np.ndarray

    def __init__(self, grid, mu_prime, margin):
        mu = np.asarray(mu_prime, dtype=np.float64).reshape(-1)
        mg = np.asarray(margin, dtype=np.float64).reshape(-1)
        n = grid.n_points
        if len(mu) != n or len(mg) != n:
            raise ValueError(f"mu_prime and margin must have {n} entries to match the grid")
        if mg.min() < 0.0:
            raise ValueError("margin entries must be >= 0")
        if mu.min() <= 0.0 or mu.max() > 1.5:
            raise ValueError("mu_prime entries must lie in (0, 1.5]")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "mu_prime", mu)
        object.__setattr__(self, "margin", mg)


@dataclass(frozen=True)
class FusedEstimate:
    """Fused conservative estimate with the posterior kept for diagnostics."""

    grid: SGrid
    mu_hat: np.ndarray
    posterior: "PosteriorSummary"


def calibrate_prior(length_scale=DEFAULT_LENGTH_SCALE):
    """Prior whose 95% band is exactly [0.1, 1.0] at every position.

    The mean is the band midpoint and the signal std is the half-width
    divided by the 95% z-value, so mean +- 1.96*sigma_f recovers the band.
    """
    mean = 0.5 * (PRIOR_LOW + PRIOR_HIGH)
    sigma_f = 0.5 * (PRIOR_HIGH - PRIOR_LOW) / Z_95
    return GpPrior(mean=mean, kernel=SquaredExponentialKernel(sigma_f, length_scale))


def margin_to_std(margin):
    """Convert a 95% margin of error to an observation noise std."""
    return margin / Z_95


def assemble_input(grid, predictive_mu, predictive_margin, local=None,
                   local_reach=DEFAULT_LOCAL_REACH):
    """Overlay the local estimate on the predictive series for s < local_reach.

    ``predictive_mu``/``predictive_margin`` cover every grid point (scalars
    broadcast); ``local`` is an optional (mu_l, m_l) pair that replaces the
    predictive samples strictly below the reach threshold when present.
    """
    if local_reach < 0.0:
        raise ValueError("local_reach must be >= 0")
    n = grid.n_points
    mu = np.broadcast_to(np.asarray(predictive_mu, dtype=np.float64), (n,)).copy()
    mg = np.broadcast_to(np.asarray(predictive_margin, dtype=np.float64), (n,)).copy()
    if local is not None:
        mu_l, m_l = local
        near = grid.points < local_reach
        mu[near] = mu_l
        mg[near] = m_l
    return EstimateSeries(grid=grid, mu_prime=mu, margin=mg)


def fuse(prior, series):
    """Run GP regression on the series and take the lower 95% confidence bound.

    Observations sit at every grid point with noise std = margin/1.96;
    test locations are the same grid. The bound is reported as-is, with no
    clamping, since downstream planners treat it as a constraint level.
    """
    pts = series.grid.points
    obs = ObservationSet(
        locations=pts,
        values=series.mu_prime,
        noise_std=margin_to_std(series.margin),
    )
    summary = posterior(prior, obs, pts)
    mu_hat = summary.mean - Z_95 * summary.std
    return FusedEstimate(grid=series.grid, mu_hat=mu_hat, posterior=summary)
