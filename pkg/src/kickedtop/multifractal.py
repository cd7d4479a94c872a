"""Multifractal analysis of coherent states expanded in the Floquet
eigenbasis: Renyi entropies, fractal dimensions D_q, phase-space fields
and averages, and finite-size scaling fits.

D_q = S_q / ln N with S_q the order-q Renyi (participation) entropy of
the expansion weights |w_i|^2 over the full (2j+1)-dimensional
eigenvector set; a generic coherent state has no definite parity, so
both sectors participate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classical import GridSpec, haar_sphere, rng_for_task
from .floquet import FloquetEigensystem
from .spin import CoherentState, SpinBasis, coherent_state_matrix

__all__ = [
    "ExpansionCoefficients",
    "MultifractalResult",
    "DqField",
    "ScalingFit",
    "expand_in_floquet_basis",
    "expand_states",
    "fractal_dimensions",
    "renyi_dimensions",
    "dq_field",
    "averaged_dq",
    "scaling_fit",
]

DEFAULT_QS = (1.0, 2.0, np.inf)
WEIGHT_CUTOFF = 1e-300  # below this, weights are dropped from q <= 1 sums (log guards)


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Probabilities |w_i|^2 of one state over an N-dimensional basis."""

    weights: np.ndarray = field(repr=False)
    basis_dim: int


@dataclass(frozen=True)
class MultifractalResult:
    """Fractal dimensions and Renyi entropies for a configured q set.

    For Monte-Carlo averages ``stderr`` holds the standard error of each
    D_q mean; it is None for single-state results.
    """

    q_values: tuple
    D_q: np.ndarray
    S_q: np.ndarray
    stderr: np.ndarray | None = None

    def dim(self, q) -> float:
        return float(self.D_q[self.q_values.index(q)])


@dataclass(frozen=True)
class DqField:
    """Fractal dimensions of coherent states on a (phi, theta) grid.

    ``values[i, k, l]`` pairs phi_centers[i] x theta_centers[k] with
    q_values[l].
    """

    q_values: tuple
    values: np.ndarray = field(repr=False)
    grid_spec: GridSpec

    def component(self, q) -> np.ndarray:
        return self.values[:, :, self.q_values.index(q)]


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of D_q(N) against the chosen 1/ln N model.

    ``intercept`` is the N -> infinity extrapolation; ``slope`` is the
    coefficient of the decaying term (f_q / g_q conventions: the model
    is D = intercept - slope * x(N)).  ``residual`` is the RMS misfit
    over the fitted points; no extrapolation credibility is implied
    beyond the fitted range.
    """

    model: str
    intercept: float
    slope: float
    residual: float


def expand_in_floquet_basis(
    state: CoherentState, eig: FloquetEigensystem
) -> ExpansionCoefficients:
    """Overlap probabilities |<nu_i|theta,phi>|^2 of one coherent state."""
    if state.amplitudes.size != eig.dim:
        raise ValueError(
            f"dimension mismatch: state dim {state.amplitudes.size}, eigenbasis dim {eig.dim}"
        )
    w = eig.eigenvectors.conj().T @ state.amplitudes
    return ExpansionCoefficients(weights=np.abs(w) ** 2, basis_dim=eig.dim)


def expand_states(amplitudes: np.ndarray, eig: FloquetEigensystem) -> np.ndarray:
    """Weights |<nu_i|psi_k>|^2 for column-stacked states; shape (n_states, N)."""
    if amplitudes.shape[0] != eig.dim:
        raise ValueError(
            f"dimension mismatch: states dim {amplitudes.shape[0]}, eigenbasis dim {eig.dim}"
        )
    return np.abs(eig.eigenvectors.conj().T @ amplitudes).T ** 2


def renyi_dimensions(weights: np.ndarray, q_values) -> tuple[np.ndarray, np.ndarray]:
    """Renyi entropies S_q and dimensions D_q for rows of a weight matrix.

    weights: (n_states, N) probabilities, each row summing to 1.
    Handles the special orders exactly: Shannon entropy at q = 1 and
    -ln(max) at q = inf (never as a large-q limit, which would
    underflow).  Returns (S, D), each shaped (n_states, n_q).
    """
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    n_states, dim = w.shape
    if dim < 2:
        raise ValueError("basis dimension must be at least 2 (ln N = 0 otherwise)")
    logn = np.log(dim)
    s = np.empty((n_states, len(q_values)))
    wc = np.where(w >= WEIGHT_CUTOFF, w, 1.0)  # neutral value under w*ln(w) and counting
    support = w >= WEIGHT_CUTOFF
    for l, q in enumerate(q_values):
        if q < 0:
            raise ValueError(f"q must be >= 0, got {q}")
        if np.isinf(q):
            s[:, l] = -np.log(np.max(w, axis=1))
        elif q == 1.0:
            s[:, l] = -np.sum(np.where(support, wc * np.log(wc), 0.0), axis=1)
        elif q == 0.0:
            s[:, l] = np.log(np.count_nonzero(support, axis=1))
        else:
            if q < 1.0:
                mom = np.sum(np.where(support, wc**q, 0.0), axis=1)
            else:
                mom = np.sum(w**q, axis=1)
            s[:, l] = np.log(mom) / (1.0 - q)
    return s, s / logn


def fractal_dimensions(coeffs: ExpansionCoefficients, q_values=DEFAULT_QS) -> MultifractalResult:
    """Fractal dimensions D_q = S_q / ln N of one expansion."""
    if coeffs.basis_dim < 2:
        raise ValueError("D_q undefined for basis dimension 1 (division by ln 1)")
    s, d = renyi_dimensions(coeffs.weights[None, :], q_values)
    return MultifractalResult(q_values=tuple(q_values), D_q=d[0], S_q=s[0])


def dq_field(
    basis: SpinBasis,
    eig: FloquetEigensystem,
    grid_spec: GridSpec | None = None,
    q_values=DEFAULT_QS,
) -> DqField:
    """D_q of coherent states on a uniform (phi, theta) grid.

    The grid is uniform in the angles (matching phase-space maps), not
    Haar-weighted; use :func:`averaged_dq` for measure-weighted averages.
    """
    if grid_spec is None:
        grid_spec = GridSpec(n_phi=100, n_theta=100)
    phi, theta = grid_spec.mesh()
    amps = coherent_state_matrix(basis, theta, phi)
    weights = expand_states(amps, eig)
    _, d = renyi_dimensions(weights, q_values)
    return DqField(
        q_values=tuple(q_values),
        values=d.reshape(grid_spec.n_phi, grid_spec.n_theta, len(q_values)),
        grid_spec=grid_spec,
    )


def averaged_dq(
    basis: SpinBasis,
    eig: FloquetEigensystem,
    n_samples: int = 10_000,
    q_values=DEFAULT_QS,
    seed: int = 0,
    task_index: int = 0,
) -> MultifractalResult:
    """Phase-space averaged fractal dimensions over Haar-uniform states.

    Uses the classical module's sphere-sampling scheme and (seed,
    task_index) substream discipline, so scan results are reproducible
    regardless of scheduling.
    """
    theta, phi = haar_sphere(n_samples, rng_for_task(seed, task_index))
    amps = coherent_state_matrix(basis, theta, phi)
    weights = expand_states(amps, eig)
    s, d = renyi_dimensions(weights, q_values)
    return MultifractalResult(
        q_values=tuple(q_values),
        D_q=d.mean(axis=0),
        S_q=s.mean(axis=0),
        stderr=d.std(axis=0, ddof=1) / np.sqrt(n_samples),
    )


def scaling_fit(points, model: str = "linear_in_invlogN") -> ScalingFit:
    """Fit averaged D_q against system size N.

    points: sequence of (N, D_q) pairs over several system sizes.
    Models (x = 1/ln N):
        linear_in_invlogN:  D = intercept - slope * x
        loglog_in_invlogN:  D = intercept - slope * ln(ln N) * x
    The loglog form is the random-matrix asymptotic for q = infinity.
    """
    pts = sorted((float(n), float(dq)) for n, dq in points)
    if len(pts) < 2:
        raise ValueError("need at least 2 (N, D_q) points to fit 2 parameters")
    n = np.array([p[0] for p in pts])
    d = np.array([p[1] for p in pts])
    if model == "linear_in_invlogN":
        x = 1.0 / np.log(n)
    elif model == "loglog_in_invlogN":
        x = np.log(np.log(n)) / np.log(n)
    else:
        raise ValueError(f"unknown model {model!r}")
    coef = np.polyfit(-x, d, 1)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = d - (intercept - slope * x)
    return ScalingFit(
        model=model,
        intercept=intercept,
        slope=slope,
        residual=float(np.sqrt(np.mean(resid**2))),
    )
