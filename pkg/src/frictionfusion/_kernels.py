"""Hot numeric kernels with optional numba acceleration.

The squared-exponential Gram block and the sequential velocity-profile
passes are the inner loops of the package. Numba-compiled versions are
used by default when numba imports cleanly; set ``FRICTIONFUSION_NO_NUMBA=1``
to select the pure numpy/python implementations instead. Both variants stay
importable so ``benchmarks/bench_kernels.py`` can compare them.
"""

import math
import os

import numpy as np


def gram_numpy(xs_a, xs_b, sigma_f, length_scale):
    """Squared-exponential Gram block via broadcasting."""
    inv = 0.5 / (length_scale * length_scale)
    diff = np.subtract.outer(xs_a, xs_b)
    return (sigma_f * sigma_f) * np.exp(-(diff * diff) * inv)


def _gram_loops(xs_a, xs_b, sigma_f, length_scale):
    na = xs_a.shape[0]
    nb = xs_b.shape[0]
    out = np.empty((na, nb))
    s2 = sigma_f * sigma_f
    inv = 0.5 / (length_scale * length_scale)
    for i in range(na):
        for j in range(nb):
            d = xs_a[i] - xs_b[j]
            out[i, j] = s2 * math.exp(-d * d * inv)
    return out


def backward_pass_numpy(v_cap, kappa_abs, mu_g, ds):
    """Deceleration-limited speed envelope, swept from the horizon end.

    Braking capacity at each segment is the friction-circle leftover after
    the lateral acceleration demanded at the downstream point.
    """
    n = v_cap.shape[0]
    v = np.empty(n)
    v[n - 1] = v_cap[n - 1]
    for i in range(n - 2, -1, -1):
        lat = v[i + 1] * v[i + 1] * kappa_abs[i + 1]
        avail2 = mu_g[i + 1] * mu_g[i + 1] - lat * lat
        avail = math.sqrt(avail2) if avail2 > 0.0 else 0.0
        v[i] = min(v_cap[i], math.sqrt(v[i + 1] * v[i + 1] + 2.0 * avail * ds))
    return v


PREBRAKE_LATERAL_SHARE = 0.98
CAP_VIOLATION_TOL = 0.1


def forward_pass_numpy(v0, v_bound, v_cap, kappa_abs, mu_g, ds, brake_mask, f_lat, f_brake):
    """Integrate the speed profile forward from the current speed.

    Three regimes per segment: commanded violation braking (``brake_mask``)
    sheds speed at bounded lateral/brake shares of the circle; speeds above
    the pointwise curvature cap do the same (the curve cannot be held);
    speeds above only the backward envelope pre-brake with the full circle
    leftover (a thin lateral share is reserved so braking room never
    vanishes while riding the cap); otherwise the profile accelerates
    toward the envelope.
    """
    n = v_bound.shape[0]
    v = np.empty(n)
    v[0] = v0
    for i in range(n - 1):
        vi2 = v[i] * v[i]
        lat_demand = vi2 * kappa_abs[i]
        if brake_mask[i] or v[i] > v_cap[i] + CAP_VIOLATION_TOL:
            lat = min(lat_demand, f_lat * mu_g[i])
            left2 = mu_g[i] * mu_g[i] - lat * lat
            left = math.sqrt(left2) if left2 > 0.0 else 0.0
            brake = min(f_brake * mu_g[i], left)
            vn2 = vi2 - 2.0 * brake * ds
            vn = math.sqrt(vn2) if vn2 > 0.0 else 0.0
            if not brake_mask[i] and vn < v_bound[i + 1]:
                vn = v_bound[i + 1]
            v[i + 1] = vn
        elif v[i] > v_bound[i + 1]:
            lat = min(lat_demand, PREBRAKE_LATERAL_SHARE * mu_g[i])
            left2 = mu_g[i] * mu_g[i] - lat * lat
            brake = math.sqrt(left2) if left2 > 0.0 else 0.0
            vn2 = vi2 - 2.0 * brake * ds
            vn = math.sqrt(vn2) if vn2 > 0.0 else 0.0
            v[i + 1] = max(v_bound[i + 1], vn)
        else:
            lat = min(lat_demand, mu_g[i])
            left2 = mu_g[i] * mu_g[i] - lat * lat
            accel = math.sqrt(left2) if left2 > 0.0 else 0.0
            v[i + 1] = min(v_bound[i + 1], math.sqrt(vi2 + 2.0 * accel * ds))
    return v


def _env_disables_numba():
    return os.environ.get("FRICTIONFUSION_NO_NUMBA", "").lower() in ("1", "true", "yes")


try:
    from numba import njit

    HAVE_NUMBA = True
    gram_numba = njit(cache=True)(_gram_loops)
    backward_pass_numba = njit(cache=True)(backward_pass_numpy)
    forward_pass_numba = njit(cache=True)(forward_pass_numpy)
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False
    gram_numba = _gram_loops
    backward_pass_numba = backward_pass_numpy
    forward_pass_numba = forward_pass_numpy

USE_NUMBA = HAVE_NUMBA and not _env_disables_numba()

if USE_NUMBA:
    gram = gram_numba
    backward_pass = backward_pass_numba
    forward_pass = forward_pass_numba
else:
    gram = gram_numpy
    backward_pass = backward_pass_numpy
    forward_pass = forward_pass_numpy
