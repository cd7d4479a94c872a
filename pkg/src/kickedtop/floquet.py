"""Kicked-top Floquet operator: construction in the Dicke basis,
diagonalization with parity resolution, and stroboscopic evolution.

One period = free precession about x by angle alpha followed by a
torsional kick exp(-i kappa Jz^2 / 2j).  The operator conserves the
parity e^(i pi (Jx + j)), which splits the spectrum into an even sector
of dimension j+1 and an odd sector of dimension j (integer j).

Eigenphase convention: F|v> = e^(+i nu)|v> with nu restricted to the
principal range [-pi, pi).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .spin import SpinBasis, jx_tridiagonal

__all__ = [
    "KickedTopParams",
    "FloquetOperator",
    "FloquetEigensystem",
    "DiagonalizationError",
    "wigner_d_matrix",
    "build_floquet",
    "parity_operator",
    "diagonalize",
    "diagonalize_sectors",
    "evolve_state",
]

EVEN, ODD = 1, -1


class DiagonalizationError(RuntimeError):
    """Eigensolver failure or unresolved parity, with the offending size/params."""


@dataclass(frozen=True)
class KickedTopParams:
    """Kicked-top parameters: precession angle, kick strength, spin size."""

    alpha: float
    kappa: float
    j: int

    def __post_init__(self):
        if not 0.0 <= self.alpha < 2 * np.pi:
            raise ValueError(f"alpha must lie in [0, 2pi), got {self.alpha}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.j < 1 or self.j != int(self.j):
            raise ValueError(f"j must be an integer >= 1, got {self.j}")
        object.__setattr__(self, "j", int(self.j))

    @property
    def basis(self) -> SpinBasis:
        return SpinBasis(self.j)


@dataclass(frozen=True)
class FloquetOperator:
    """Dense one-period propagator in the Dicke basis."""

    matrix: np.ndarray = field(repr=False)
    params: KickedTopParams

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class FloquetEigensystem:
    """Quasienergies in [-pi, pi), orthonormal eigenvectors, parity labels.

    ``eigenvectors[:, i]`` belongs to ``quasienergies[i]``; ``parities[i]``
    is +1 (even) or -1 (odd).  Sorted by quasienergy ascending, ties
    broken even-first.  ``degenerate_clusters`` counts quasienergy
    clusters that needed explicit re-orthonormalization (gauge fixed,
    see ``diagonalize``); nonzero values flag gauge-dependent downstream
    quantities.
    """

    quasienergies: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    parities: np.ndarray = field(repr=False)
    params: KickedTopParams | None = None
    degenerate_clusters: int = 0

    @property
    def dim(self) -> int:
        return self.quasienergies.size

    def sector(self, parity: str) -> np.ndarray:
        """Quasienergies of one parity sector ('even' or 'odd'), sorted."""
        want = EVEN if parity == "even" else ODD
        return np.sort(self.quasienergies[self.parities == want])


def jx_eigenbasis(basis: SpinBasis) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues k_x = -j..j and orthonormal eigenvectors of J_x.

    J_x is real symmetric tridiagonal in the Dicke basis; its exact
    spectrum is the integer (or half-integer) ladder -j..j, so the
    computed eigenvalues are snapped onto it after a sanity check.
    """
    d, e = jx_tridiagonal(basis)
    try:
        vals, vecs = sla.eigh_tridiagonal(d, e)
    except Exception as exc:  # pragma: no cover - LAPACK failure is pathological
        raise DiagonalizationError(
            f"J_x eigensolver failed for dim={basis.dim}: {exc}"
        ) from exc
    k = basis.m_values  # same ladder as m, ascending
    defect = np.max(np.abs(vals - k))
    if defect > 1e-8 * max(1.0, basis.j):
        raise DiagonalizationError(f"J_x spectrum defect {defect:.3e} at dim={basis.dim}")
    return k, vecs


def wigner_d_matrix(basis: SpinBasis, alpha: float) -> np.ndarray:
    """Rotation matrix <j,m| exp(-i alpha J_x) |j,m'> in the Dicke basis.

    Built by spectral sum over the J_x eigenbasis; unitary to ~1e-10.
    """
    k, v = jx_eigenbasis(basis)
    return (v * np.exp(-1j * alpha * k)) @ v.T


def build_floquet(params: KickedTopParams) -> FloquetOperator:
    """Kicked-top propagator F[m,m'] = exp(-i kappa m^2 / 2j) d_mm'(alpha)."""
    basis = params.basis
    m = basis.m_values
    kick = np.exp(-1j * params.kappa * m**2 / (2.0 * params.j))
    d = wigner_d_matrix(basis, params.alpha)
    return FloquetOperator(matrix=kick[:, None] * d, params=params)


def parity_operator(basis: SpinBasis) -> np.ndarray:
    """Parity e^(i pi (Jx + j)): +1/-1 on alternate J_x eigenvectors.

    In the J_x eigenbasis the eigenvalue is e^(i pi (k_x + j)) = (-1)^(k_x+j),
    i.e. +1 on every second ladder state starting from k_x = -j.  Rotating
    back to the Dicke basis gives a real symmetric involution.
    """
    k, v = jx_eigenbasis(basis)
    signs = np.where((np.arange(basis.dim) % 2) == 0, 1.0, -1.0)
    return (v * signs) @ v.T


def _principal_phase(eigvals: np.ndarray) -> np.ndarray:
    """arg() of unit-circle eigenvalues folded into [-pi, pi)."""
    nu = np.angle(eigvals)
    return np.where(nu >= np.pi, nu - 2 * np.pi, nu)


def _phase_clusters(nu_sorted: np.ndarray, gap_tol: float) -> list[np.ndarray]:
    """Group sorted phases into clusters separated by gaps < gap_tol.

    Works on the circle: the wrap-around gap nu[0] + 2pi - nu[-1] can
    merge the first and last runs.
    """
    n = nu_sorted.size
    if n == 1:
        return [np.array([0])]
    gaps = np.diff(nu_sorted)
    breaks = np.nonzero(gaps >= gap_tol)[0]  # break after index b
    if breaks.size == 0:
        return [np.arange(n)]
    runs = []
    start = 0
    for b in breaks:
        runs.append(np.arange(start, b + 1))
        start = b + 1
    runs.append(np.arange(start, n))
    wrap_gap = nu_sorted[0] + 2 * np.pi - nu_sorted[-1]
    if len(runs) > 1 and wrap_gap < gap_tol:
        runs[0] = np.concatenate([runs.pop(), runs[0]])
    return runs


def _fix_cluster_gauge(block: np.ndarray, parity: np.ndarray, jz2: np.ndarray):
    """Orthonormalize a degenerate cluster and give every column sharp parity.

    Within each resulting parity subspace the residual gauge freedom is
    fixed by diagonalizing the compressed Jz^2 (Jz itself is parity-odd
    and compresses to zero, so it cannot split anything).
    Returns (block, parity_expectations).
    """
    q, _ = np.linalg.qr(block)
    pc = q.conj().T @ parity @ q
    pvals, pw = np.linalg.eigh((pc + pc.conj().T) / 2)
    q = q @ pw
    for sign in (-1.0, 1.0):
        idx = np.nonzero(np.abs(pvals - sign) < 0.5)[0]
        if idx.size > 1:
            sub = q[:, idx]
            zc = sub.conj().T @ (jz2[:, None] * sub)
            _, zw = np.linalg.eigh((zc + zc.conj().T) / 2)
            q[:, idx] = sub @ zw
    return q, pvals


def _normalize_column_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    phases = pivots / np.abs(pivots)
    return vecs / phases[None, :]


def diagonalize(
    op: FloquetOperator,
    parity: np.ndarray,
    gap_tol: float = 1e-10,
    parity_tol: float = 1e-6,
) -> FloquetEigensystem:
    """Full eigensystem of F with parity-resolved eigenvectors.

    Uses a general complex eigensolver on the unitary F and reads the
    quasienergies as principal-value phases.  Quasienergy clusters with
    internal gaps below ``gap_tol`` are re-orthonormalized and rotated to
    simultaneously diagonalize the parity (plus a deterministic Jz^2
    gauge within residual degeneracies).  Every returned eigenvector has
    |<v|Pi|v>| = 1 within ``parity_tol``; violations raise
    DiagonalizationError.
    """
    f = op.matrix
    try:
        eigvals, vecs = sla.eig(f)
    except Exception as exc:
        raise DiagonalizationError(
            f"eigensolver failed for dim={op.dim}, params={op.params}: {exc}"
        ) from exc
    nu = _principal_phase(eigvals)
    order = np.argsort(nu, kind="stable")
    nu, vecs = nu[order], vecs[:, order]
    vecs /= np.linalg.norm(vecs, axis=0, keepdims=True)

    m = op.params.basis.m_values
    jz2 = (m * m).astype(float)
    n_clusters = 0
    for idx in _phase_clusters(nu, gap_tol):
        if idx.size < 2:
            continue
        n_clusters += 1
        vecs[:, idx], _ = _fix_cluster_gauge(vecs[:, idx], parity, jz2)

    pexp = np.real(np.sum(vecs.conj() * (parity @ vecs), axis=0))
    if np.max(np.abs(np.abs(pexp) - 1.0)) > parity_tol:
        worst = float(np.max(np.abs(np.abs(pexp) - 1.0)))
        raise DiagonalizationError(
            f"parity expectation off +/-1 by {worst:.3e} for dim={op.dim}, "
            f"params={op.params}; unresolved degenerate subspace"
        )
    parities = np.where(pexp > 0, EVEN, ODD).astype(np.int8)

    vecs = _normalize_column_phases(vecs)
    order = np.lexsort((parities == ODD, nu))  # ascending nu, even first on ties
    return FloquetEigensystem(
        quasienergies=nu[order],
        eigenvectors=vecs[:, order],
        parities=parities[order],
        params=op.params,
        degenerate_clusters=n_clusters,
    )


def diagonalize_sectors(params: KickedTopParams, gap_tol: float = 1e-10) -> FloquetEigensystem:
    """Sector-first route: diagonalize F projected on each parity block.

    Builds the even/odd subspace bases from the fixed-parity J_x
    eigenvectors, diagonalizes each (j+1)- and j-dimensional block
    separately, and assembles a full-space eigensystem.  Independent of
    :func:`diagonalize` apart from shared operator construction; used as
    a cross-check and as the cheaper path for spectral statistics.
    """
    basis = params.basis
    k, v = jx_eigenbasis(basis)
    m = basis.m_values
    kick = np.exp(-1j * params.kappa * m**2 / (2.0 * params.j))
    phase = np.exp(-1j * params.alpha * k)

    jz2 = (m * m).astype(float)
    nus, vec_blocks, pars = [], [], []
    for par, cols in ((EVEN, slice(0, None, 2)), (ODD, slice(1, None, 2))):
        b = v[:, cols]  # orthonormal basis of the sector, real
        # F b = kick * (V e^{-i alpha k} V^T) b collapses to kick * (b * phase)
        fb = b.T @ (kick[:, None] * (b * phase[cols]))
        try:
            eigvals, w = sla.eig(fb)
        except Exception as exc:
            raise DiagonalizationError(
                f"sector eigensolver failed for dim={fb.shape[0]}, params={params}: {exc}"
            ) from exc
        nu = _principal_phase(eigvals)
        order = np.argsort(nu, kind="stable")
        nu, w = nu[order], w[:, order]
        w /= np.linalg.norm(w, axis=0, keepdims=True)
        for idx in _phase_clusters(nu, gap_tol):
            if idx.size < 2:
                continue
            q, _ = np.linalg.qr(w[:, idx])
            full = b @ q
            zc = full.conj().T @ (jz2[:, None] * full)
            _, zw = np.linalg.eigh((zc + zc.conj().T) / 2)
            w[:, idx] = q @ zw
        nus.append(nu)
        vec_blocks.append(b @ w)
        pars.append(np.full(nu.size, par, dtype=np.int8))

    nu = np.concatenate(nus)
    vecs = _normalize_column_phases(np.concatenate(vec_blocks, axis=1))
    parities = np.concatenate(pars)
    order = np.lexsort((parities == ODD, nu))
    return FloquetEigensystem(
        quasienergies=nu[order],
        eigenvectors=vecs[:, order],
        parities=parities[order],
        params=params,
    )


def evolve_state(op: FloquetOperator, psi0: np.ndarray, n_kicks: int) -> np.ndarray:
    """Stroboscopic evolution psi_n = F^n psi_0 by repeated application."""
    if n_kicks < 0:
        raise ValueError("n_kicks must be >= 0")
    psi = np.array(psi0, dtype=complex)
    for _ in range(n_kicks):
        psi = op.matrix @ psi
    return psi
