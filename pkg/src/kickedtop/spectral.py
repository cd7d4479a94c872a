"""Quasienergy spectral statistics: nearest-neighbor spacings, Brody
fits, and consecutive-spacing ratios.

All statistics are meant to be computed within a single parity sector;
superposing the sectors destroys level repulsion and fakes Poisson.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma

import numpy as np

__all__ = [
    "SpacingEnsemble",
    "BrodyFit",
    "RatioStats",
    "spacings_from_quasienergies",
    "brody_pdf",
    "brody_sample",
    "fit_brody",
    "ratio_stats",
]


@dataclass(frozen=True)
class SpacingEnsemble:
    """Normalized level spacings s_i = d_i / <d> (sorted) plus raw gaps."""

    spacings: np.ndarray = field(repr=False)
    raw_gaps: np.ndarray = field(repr=False)
    n_zero_gaps: int = 0

    @property
    def n(self) -> int:
        return self.spacings.size


@dataclass(frozen=True)
class BrodyFit:
    """Level-repulsion exponent in [0, 1] with the attained objective."""

    beta: float
    fit_error: float  # negative log-likelihood per sample at the optimum
    method: str = "mle"


@dataclass(frozen=True)
class RatioStats:
    """Mean consecutive-spacing ratio <r>, r_i = min(delta_i, 1/delta_i)."""

    mean_r: float
    count: int


def spacings_from_quasienergies(nu: np.ndarray, periodic: bool = True) -> SpacingEnsemble:
    """Consecutive gaps of a sorted quasienergy list, normalized to unit mean.

    With ``periodic`` the wrap-around gap nu[0] + 2pi - nu[-1] is
    included, since quasienergies live on a circle.  Exact repeats give
    zero spacings; they are kept but counted in ``n_zero_gaps``.
    """
    nu = np.asarray(nu, dtype=float)
    if nu.size < 3:
        raise ValueError("need at least 3 quasienergies")
    if np.any(np.diff(nu) < 0):
        raise ValueError("quasienergies must be sorted ascending")
    gaps = np.diff(nu)
    if periodic:
        gaps = np.append(gaps, nu[0] + 2 * np.pi - nu[-1])
    mean = gaps.mean()
    if mean == 0:
        raise ValueError("degenerate spectrum: all gaps zero")
    return SpacingEnsemble(
        spacings=np.sort(gaps / mean),
        raw_gaps=gaps,
        n_zero_gaps=int(np.count_nonzero(gaps == 0)),
    )


def brody_b(beta: float) -> float:
    """Normalization factor b_beta = Gamma((beta+2)/(beta+1))^(beta+1)."""
    return np.exp((beta + 1.0) * lgamma((beta + 2.0) / (beta + 1.0)))


def brody_pdf(s, beta: float):
    """Brody spacing density b(beta+1) s^beta exp(-b s^(beta+1)).

    Interpolates Poisson (beta=0) to Wigner-Dyson (beta=1); normalized
    with unit mean for every beta in [0, 1].
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    s = np.asarray(s, dtype=float)
    b = brody_b(beta)
    return b * (beta + 1.0) * s**beta * np.exp(-b * s ** (beta + 1.0))


def brody_sample(beta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n spacings from the Brody distribution by CDF inversion."""
    u = rng.random(n)
    b = brody_b(beta)
    return (-np.log1p(-u) / b) ** (1.0 / (beta + 1.0))


def _brody_nll(s: np.ndarray, beta: float) -> float:
    """Negative log-likelihood per sample of Brody(beta) on spacings s > 0."""
    b = brody_b(beta)
    ll = np.log(b * (beta + 1.0)) + beta * np.log(s) - b * s ** (beta + 1.0)
    return -float(ll.mean())


def fit_brody(ensemble: SpacingEnsemble, tol: float = 1e-6) -> BrodyFit:
    """Maximum-likelihood Brody exponent via golden-section search.

    The log-likelihood is unimodal in beta on [0, 1], so golden-section
    bracketing converges unconditionally.  Zero spacings carry no
    likelihood information for beta > 0 and are excluded.
    """
    s = ensemble.spacings[ensemble.spacings > 0]
    if s.size == 0:
        raise ValueError("degenerate ensemble: all spacings zero")
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, 1.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = _brody_nll(s, x1), _brody_nll(s, x2)
    while hi - lo > tol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = _brody_nll(s, x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = _brody_nll(s, x2)
    beta = 0.5 * (lo + hi)
    # the optimum may sit on the boundary; check the ends explicitly
    candidates = [(beta, _brody_nll(s, beta)), (0.0, _brody_nll(s, 0.0)), (1.0, _brody_nll(s, 1.0))]
    beta, nll = min(candidates, key=lambda t: t[1])
    return BrodyFit(beta=float(beta), fit_error=float(nll))


def ratio_stats(raw_gaps: np.ndarray) -> RatioStats:
    """Mean of r_i = min(d_{i+1}/d_i, d_i/d_{i+1}) over consecutive gaps.

    Scale-free, so no unfolding or normalization is needed.  Zero gaps
    are excluded before forming ratios.
    """
    gaps = np.asarray(raw_gaps, dtype=float)
    if gaps.size < 3:
        raise ValueError("need at least 3 gaps")
    gaps = gaps[gaps > 0]
    if gaps.size < 2:
        raise ValueError("all gaps zero: ratios undefined")
    delta = gaps[1:] / gaps[:-1]
    r = np.minimum(delta, 1.0 / delta)
    return RatioStats(mean_r=float(r.mean()), count=r.size)
