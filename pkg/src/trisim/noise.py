"""Sensor and placement error models, plus seeded stream derivation.

Three models feed the simulator:

* VertexErrorModel — per-maneuver placement error of a settled robot,
  decomposed in the frame of the triangle it just completed. Each axis draws a
  magnitude from a Gaussian truncated at zero (negative draws are resampled)
  and an independent uniform +-1 sign. The published per-axis statistics
  (mean 36 mm / std 21 mm lateral, 13 mm / 9 mm longitudinal) describe the
  *truncated* magnitudes, so the internal Gaussian parameters are calibrated
  numerically such that the resulting truncated distribution reproduces those
  statistics exactly; using the published numbers directly as (mu, sigma)
  would bias the truncated mean high (38.0 mm lateral) and the std low.

* HeadingErrorParams — heading estimation error of the dead-reckoning robot:
  a bounded first-order Gauss-Markov wander (exact discretization), an
  independent white read noise, and a per-run rate-bias ramp representing
  integrated rate-sensor drift (the component that makes dead-reckoning error
  grow with travel *time*, not distance).

* WssParams — wheel-speed-sensor model: v = (R + eps_R) * (1 + SF) * Omega + n.

All randomness flows through numpy Generators derived from
(master_seed, run_index, robot_id) so that every run/robot pair owns an
independent, reproducible stream regardless of execution order or thread
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, stats
from scipy.signal import lfilter


@dataclass(frozen=True)
class VertexErrorModel:
    """Target statistics (meters) of the per-maneuver placement error magnitudes."""

    mu_lat: float = 0.036
    sigma_lat: float = 0.021
    mu_lon: float = 0.013
    sigma_lon: float = 0.009


@dataclass(frozen=True)
class HeadingErrorParams:
    """Heading estimation error (radians / seconds)."""

    tau: float = 120.0
    sigma_gm: float = math.radians(2.5)  # 0.04363...
    sigma_white: float = math.radians(0.8)  # 0.01396...
    bias_rate_std: float = 0.006  # rad/s, per-run rate-bias ramp


@dataclass(frozen=True)
class WssParams:
    """Wheel speed sensor: v = (R + radius_bias) * (1 + scale_factor) * Omega + n."""

    wheel_radius: float = 0.148
    radius_bias: float = 0.0
    scale_factor: float = 0.16
    noise_std: float = 0.045


@dataclass(frozen=True)
class ErrorStats:
    mean: float
    std: float
    n: int


@lru_cache(maxsize=32)
def _calibrate_truncated(target_mean: float, target_std: float) -> tuple[float, float]:
    """Find (mu, sigma) of a zero-truncated Gaussian with the given moments.

    The truncated distribution is X | X >= 0 for X ~ N(mu, sigma). Feasible
    whenever 0 < target_std/target_mean < 1; the published ratios (0.58, 0.69)
    sit comfortably inside.
    """
    if target_mean == 0.0 and target_std == 0.0:
        return (0.0, 0.0)
    if target_std == 0.0:
        return (target_mean, 0.0)
    if target_mean <= 0.0:
        raise ValueError("truncated-magnitude mean must be positive when std > 0")

    def residual(x):
        mu, log_sigma = x
        sigma = math.exp(log_sigma)
        a = (0.0 - mu) / sigma
        m, v = stats.truncnorm.stats(a, np.inf, loc=mu, scale=sigma, moments="mv")
        return [float(m) - target_mean, math.sqrt(float(v)) - target_std]

    x0 = [target_mean, math.log(target_std)]
    sol, info, ier, msg = optimize.fsolve(residual, x0, full_output=True)
    if ier != 1:
        raise RuntimeError(f"truncated-Gaussian calibration failed: {msg}")
    return (float(sol[0]), float(math.exp(sol[1])))


def _draw_magnitude(rng: np.random.Generator, mu: float, sigma: float) -> float:
    if sigma == 0.0:
        return mu
    for _ in range(10000):
        x = mu + sigma * rng.standard_normal()
        if x >= 0.0:
            return x
    raise RuntimeError("magnitude resampling did not terminate")  # pragma: no cover


def sample_vertex_error(
    model: VertexErrorModel, rng: np.random.Generator
) -> tuple[float, float]:
    """Draw one signed (e_lat, e_lon) placement error in meters.

    Axes are independent; each is magnitude * sign with the magnitude from the
    calibrated truncated Gaussian and the sign uniform on {-1, +1}. Draw order
    (lat magnitude, lat sign, lon magnitude, lon sign) is part of the
    determinism contract.
    """
    mu_lat, sg_lat = _calibrate_truncated(model.mu_lat, model.sigma_lat)
    mu_lon, sg_lon = _calibrate_truncated(model.mu_lon, model.sigma_lon)
    mag_lat = _draw_magnitude(rng, mu_lat, sg_lat)
    sign_lat = 1.0 if rng.random() < 0.5 else -1.0
    mag_lon = _draw_magnitude(rng, mu_lon, sg_lon)
    sign_lon = 1.0 if rng.random() < 0.5 else -1.0
    if mag_lat == 0.0 and mag_lon == 0.0:
        return (0.0, 0.0)
    return (sign_lat * mag_lat, sign_lon * mag_lon)


def gm_step(
    phi: float, dt: float, params: HeadingErrorParams, rng: np.random.Generator
) -> float:
    """One exact-discretization step of the Gauss-Markov heading wander.

    phi' = exp(-dt/tau) * phi + w,  w ~ N(0, sigma_gm^2 * (1 - exp(-2 dt/tau)))

    The discretization is exact for any dt, so the stationary variance is
    sigma_gm^2 independent of step size.
    """
    a = math.exp(-dt / params.tau)
    q = params.sigma_gm * math.sqrt(1.0 - a * a)
    return a * phi + q * rng.standard_normal()


def gm_path(
    n: int,
    dt: float,
    params: HeadingErrorParams,
    rng: np.random.Generator,
    phi0: float = 0.0,
) -> np.ndarray:
    """Vectorized n-step Gauss-Markov path (same recursion as gm_step)."""
    a = math.exp(-dt / params.tau)
    q = params.sigma_gm * math.sqrt(1.0 - a * a)
    w = q * rng.standard_normal(n)
    y, _ = lfilter([1.0], [1.0, -a], w, zi=[a * phi0])
    return y


def read_heading_error(
    phi: float, params: HeadingErrorParams, rng: np.random.Generator
) -> float:
    """Instantaneous measured heading error: GM state plus white read noise."""
    return phi + params.sigma_white * rng.standard_normal()


def wss_measure(
    omega_wheel: float, params: WssParams, rng: np.random.Generator | None = None
) -> float:
    """Measured translational speed for a commanded wheel speed (rad/s)."""
    v = (params.wheel_radius + params.radius_bias) * (1.0 + params.scale_factor) * omega_wheel
    if rng is not None and params.noise_std > 0.0:
        v += params.noise_std * rng.standard_normal()
    return v


def error_stats(samples) -> ErrorStats:
    """Sample mean and (N-1)-denominator standard deviation."""
    xs = [float(s) for s in samples]
    n = len(xs)
    if n == 0:
        raise ValueError("error_stats needs at least one sample")
    mean = sum(xs) / n
    if n == 1:
        return ErrorStats(mean, 0.0, 1)
    var = sum((x - mean) ** 2 for x in xs) / (n - 1)
    return ErrorStats(mean, math.sqrt(var), n)


def robot_stream(master_seed: int, run_index: int, robot_id: int) -> np.random.Generator:
    """Independent reproducible stream for one (run, robot) pair."""
    ss = np.random.SeedSequence((int(master_seed), int(run_index), int(robot_id)))
    return np.random.default_rng(ss)
