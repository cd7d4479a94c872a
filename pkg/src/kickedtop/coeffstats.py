"""Statistics of rescaled expansion coefficients x_i = N |w_i|^2:
chi^2_nu reference distributions, log-variable histograms, cumulative
distributions, and SKLD / RMSE distance measures.

For fully chaotic dynamics the pooled x statistics follow the chi^2_nu
family (nu = 1, 2, 4 for orthogonal / unitary / symplectic coefficient
statistics; complex Floquet overlaps give nu = 2, and nu = 1 is the
Porter-Thomas case).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma

import numpy as np
from scipy.special import gammainc

__all__ = [
    "RescaledCoefficients",
    "LogHistogram",
    "DistanceReport",
    "pool_rescaled",
    "chisq_pdf",
    "chisq_logpdf_form",
    "chisq_cdf",
    "empirical_log_histogram",
    "distance_report",
]

DENSITY_FLOOR = 1e-300  # floor for predicted bin masses inside the KL sum


@dataclass(frozen=True)
class RescaledCoefficients:
    """Pooled rescaled weights x_i = N |w_i|^2 over many coherent states."""

    x: np.ndarray = field(repr=False)
    mean_x: float

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class LogHistogram:
    """Density-normalized histogram of ln x."""

    bin_edges: np.ndarray  # in ln x
    density: np.ndarray
    n_zero_excluded: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass(frozen=True)
class DistanceReport:
    """Distance of a pooled coefficient sample from a chi^2_nu reference.

    skld: square-root Kullback-Leibler divergence of the density
    (histogram estimate, Freedman-Diaconis bins in ln x).
    rmse: root-mean-square error between the empirical and reference
    cumulative distributions on [x_0, x_m].
    """

    skld: float
    rmse: float
    x_range: tuple[float, float]
    nu: int
    n_bins: int
    n_grid: int
    squared_cdf_integrand: bool


def pool_rescaled(weights: np.ndarray) -> RescaledCoefficients:
    """Pool x = N |w|^2 across states; weights is (n_states, N).

    Per state the mean of x is exactly 1 (normalization times N); the
    recorded mean_x is the pooled empirical mean used as the chi^2
    scale.
    """
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    x = (w * w.shape[1]).ravel()
    return RescaledCoefficients(x=x, mean_x=float(x.mean()))


def chisq_pdf(x, nu: int, mean_x: float = 1.0):
    """chi^2_nu density with scale mean_x.

    P_nu(x) = (nu/2<x>)^(nu/2) x^(nu/2-1) / Gamma(nu/2) exp(-nu x / 2<x>).
    """
    _check_nu(nu)
    x = np.asarray(x, dtype=float)
    h = 0.5 * nu / mean_x
    lognorm = 0.5 * nu * np.log(h) - lgamma(0.5 * nu)
    safe = np.where(x > 0, x, 1.0)
    out = np.exp(lognorm + (0.5 * nu - 1.0) * np.log(safe) - h * x)
    # endpoint x = 0: finite only for nu = 2 (value h), zero for nu = 4
    at_zero = {1: np.inf, 2: h, 4: 0.0}[nu]
    return np.where(x > 0, out, np.where(x == 0, at_zero, 0.0))


def chisq_logpdf_form(x, nu: int, mean_x: float = 1.0):
    """Density of ln x under chi^2_nu: P_nu(ln x) = x P_nu(x).

    Maximal at x = <x> for every nu.
    """
    x = np.asarray(x, dtype=float)
    return x * chisq_pdf(x, nu, mean_x)


def chisq_cdf(x, nu: int, mean_x: float = 1.0):
    """chi^2_nu cumulative: regularized lower incomplete gamma
    F_nu(x) = gamma(nu/2, nu x / 2<x>) / Gamma(nu/2)."""
    _check_nu(nu)
    x = np.asarray(x, dtype=float)
    return gammainc(0.5 * nu, 0.5 * nu * np.clip(x, 0.0, None) / mean_x)


def _check_nu(nu):
    if nu not in (1, 2, 4):
        raise ValueError(f"nu must be one of 1, 2, 4, got {nu}")


def _fd_log_edges(y: np.ndarray) -> np.ndarray:
    """Freedman-Diaconis bin edges for ln-x data y."""
    q75, q25 = np.percentile(y, [75, 25])
    iqr = q75 - q25
    if iqr == 0:
        raise ValueError("degenerate pool: zero interquartile range")
    width = 2.0 * iqr / y.size ** (1.0 / 3.0)
    n_bins = int(np.clip(np.ceil((y.max() - y.min()) / width), 10, 2000))
    return np.linspace(y.min(), y.max(), n_bins + 1)


def empirical_log_histogram(pool: RescaledCoefficients, bins=50) -> LogHistogram:
    """Histogram of ln x, density-normalized in the ln x variable.

    Exact zeros cannot enter a log histogram; they are dropped and
    counted.  ``bins`` may be an integer or precomputed ln-x edges.
    """
    if pool.n == 0:
        raise ValueError("empty pool")
    positive = pool.x[pool.x > 0]
    if positive.size == 0:
        raise ValueError("no positive entries in pool")
    y = np.log(positive)
    density, edges = np.histogram(y, bins=bins, density=True)
    return LogHistogram(
        bin_edges=edges, density=density, n_zero_excluded=pool.n - positive.size
    )


def distance_report(
    pool: RescaledCoefficients,
    nu: int = 2,
    squared_cdf_integrand: bool = True,
    n_grid: int = 2048,
) -> DistanceReport:
    """SKLD and RMSE of the pooled sample against chi^2_nu.

    SKLD: histogram density estimate of P(x) with Freedman-Diaconis
    binning in ln x; predicted bin masses below the floor are clamped.
    RMSE: empirical versus reference CDF on a uniform grid over
    [x_0, x_m] = [min x, max x].  The integrand is squared, as the name
    requires; ``squared_cdf_integrand=False`` reproduces the literal
    unsquared form (with absolute value so the root stays defined) for
    comparison purposes.
    """
    _check_nu(nu)
    positive = np.sort(pool.x[pool.x > 0])
    if positive.size < 2 or positive[0] == positive[-1]:
        raise ValueError("degenerate pool")
    mean_x = pool.mean_x

    # ---- SKLD over Freedman-Diaconis log-bins
    edges_y = _fd_log_edges(np.log(positive))
    edges_x = np.exp(edges_y)
    edges_x[0], edges_x[-1] = positive[0], positive[-1]  # guard rounding at the ends
    counts, _ = np.histogram(positive, bins=edges_x)
    p_hat = counts / positive.size
    q_ref = np.diff(chisq_cdf(edges_x, nu, mean_x))
    q_ref = np.maximum(q_ref, DENSITY_FLOOR)
    mask = p_hat > 0
    kl = float(np.sum(p_hat[mask] * np.log(p_hat[mask] / q_ref[mask])))
    skld = float(np.sqrt(max(kl, 0.0)))

    # ---- RMSE between cumulatives on [x_0, x_m]
    x0, xm = positive[0], positive[-1]
    grid = np.linspace(x0, xm, n_grid)
    f_emp = np.searchsorted(positive, grid, side="right") / positive.size
    f_ref = chisq_cdf(grid, nu, mean_x)
    diff = f_emp - f_ref
    integrand = diff**2 if squared_cdf_integrand else np.abs(diff)
    rmse = float(np.sqrt(np.trapezoid(integrand, grid) / (xm - x0)))

    return DistanceReport(
        skld=skld,
        rmse=rmse,
        x_range=(float(x0), float(xm)),
        nu=nu,
        n_bins=len(edges_x) - 1,
        n_grid=n_grid,
        squared_cdf_integrand=squared_cdf_integrand,
    )
