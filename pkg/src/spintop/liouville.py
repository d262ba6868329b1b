"""Driven-dissipative collective-spin Lindblad generator and its tensor-basis
matrix form.

The model is a spin j = N/2 with coherent drive of strength `omega` along x
and collective decay at rate `gamma_rate` through J-:

    d rho / dt = -i omega [Jx, rho]
                 + (gamma_rate / N) (J- rho J+ - {J+ J-, rho} / 2)

Expanded over the spherical tensor basis, the generator becomes a D x D
matrix (D = (2j+1)^2) acting on coefficient vectors, with the structure of a
two-dimensional hopping model on the (k, q) wedge: the dissipator moves
weight between neighbouring ranks k at fixed q (asymmetrically, plus an
on-site term), while the drive moves weight between neighbouring q at fixed
k.  `extract_hoppings` reads those amplitudes off the matrix and verifies
nothing lives outside the five-point stencil.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .spincore import (
    SphericalTensorBasis,
    SpinOperators,
    SpinRepresentation,
    basis_isometry,
    build_spin_operators,
    build_tensor_basis,
    decompose,
    tensor_index,
    tensor_index_inverse,
)

__all__ = [
    "ModelParameters",
    "LiouvillianMatrix",
    "HoppingCoefficients",
    "SpectralDecomposition",
    "DegenerateSteadyStateError",
    "apply_liouvillian",
    "build_superoperator",
    "build_superoperator_vectorized",
    "extract_hoppings",
    "spectrum",
    "steady_state",
]

# Five-point stencil of allowed couplings in (delta k, delta q).
ALLOWED_STEPS = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1))


class DegenerateSteadyStateError(RuntimeError):
    """More than one eigenvalue inside the steady-state tolerance."""


@dataclass(frozen=True)
class ModelParameters:
    """Drive strength, collective decay rate, and particle number."""

    omega: float
    gamma_rate: float
    n_spins: int

    def __post_init__(self):
        if self.omega < 0 or self.gamma_rate < 0:
            raise ValueError("omega and gamma_rate must be nonnegative")
        if self.n_spins < 1 or self.n_spins != int(self.n_spins):
            raise ValueError(f"n_spins must be a positive integer, got {self.n_spins}")

    @property
    def rep(self) -> SpinRepresentation:
        return SpinRepresentation.from_n_spins(self.n_spins)

    @property
    def gamma_ratio(self) -> float:
        """Dimensionless decay-to-drive ratio, the control parameter of the
        oscillatory phase.  Undefined (inf) at omega = 0."""
        if self.omega == 0:
            return float("inf")
        return self.gamma_rate / self.omega


def apply_liouvillian(
    rho: np.ndarray, params: ModelParameters, ops: SpinOperators | None = None
) -> np.ndarray:
    """Apply the generator to a density-like matrix in the |j,m> basis."""
    if ops is None:
        ops = build_spin_operators(params.rep)
    rho = np.asarray(rho, dtype=complex)
    dim = ops.rep.dim
    if rho.shape != (dim, dim):
        raise ValueError(f"expected {dim}x{dim} matrix, got {rho.shape}")
    jx, jp, jm = ops.jx, ops.jplus, ops.jminus
    out = -1j * params.omega * (jx @ rho - rho @ jx)
    if params.gamma_rate:
        rate = params.gamma_rate / params.n_spins
        jpjm = jp @ jm
        out = out + rate * (jm @ rho @ jp - 0.5 * (jpjm @ rho + rho @ jpjm))
    return out


@dataclass(frozen=True)
class LiouvillianMatrix:
    """The generator as a dense matrix on tensor coefficients a[n].

    Row/column order follows `tensor_index`; the (0,0) row vanishes because
    the dynamics preserves the trace.
    """

    m: np.ndarray
    params: ModelParameters
    basis: SphericalTensorBasis = field(repr=False)

    @property
    def size(self) -> int:
        return self.m.shape[0]

    def max_abs(self) -> float:
        return float(np.abs(self.m).max())


def build_superoperator(
    rep: SpinRepresentation,
    params: ModelParameters,
    basis: SphericalTensorBasis | None = None,
) -> LiouvillianMatrix:
    """Project the generator onto the tensor basis: m[a,b] = <T_a, L(T_b)>."""
    if rep.n_spins != params.n_spins:
        raise ValueError(
            f"representation N = {rep.n_spins} does not match params N = {params.n_spins}"
        )
    if basis is None:
        basis = build_tensor_basis(rep)
    if basis.rep != rep:
        raise ValueError("basis was built for a different representation")
    ops = build_spin_operators(rep)
    dim = rep.dim
    size = basis.size
    jx, jp, jm = ops.jx, ops.jplus, ops.jminus
    stack = basis.tensors  # (size, dim, dim)
    out = -1j * params.omega * (
        np.einsum("ij,njk->nik", jx, stack) - np.einsum("nij,jk->nik", stack, jx)
    )
    if params.gamma_rate:
        rate = params.gamma_rate / params.n_spins
        jpjm = jp @ jm
        out = out + rate * (
            np.einsum("ij,njk,kl->nil", jm, stack, jp)
            - 0.5 * (np.einsum("ij,njk->nik", jpjm, stack)
                     + np.einsum("nij,jk->nik", stack, jpjm))
        )
    flat = stack.reshape(size, -1)
    m = flat.conj() @ out.reshape(size, -1).T
    return LiouvillianMatrix(m=m, params=params, basis=basis)


def build_superoperator_vectorized(
    rep: SpinRepresentation, params: ModelParameters
) -> np.ndarray:
    """Independent construction path: the generator on row-major vec(rho).

    Uses vec(A rho B) = (A kron B^T) vec(rho).  Conjugating by the
    tensor-basis isometry must reproduce `build_superoperator` to roundoff;
    the two paths share no code beyond the spin matrices.
    """
    ops = build_spin_operators(rep)
    dim = rep.dim
    eye = np.eye(dim)
    jx, jp, jm = ops.jx, ops.jplus, ops.jminus
    sup = -1j * params.omega * (np.kron(jx, eye) - np.kron(eye, jx.T))
    if params.gamma_rate:
        rate = params.gamma_rate / params.n_spins
        jpjm = jp @ jm
        sup = sup + rate * (
            np.kron(jm, jp.T)
            - 0.5 * (np.kron(jpjm, eye) + np.kron(eye, jpjm.T))
        )
    return sup


def tensor_basis_superoperator_from_vectorized(
    liouv_vec: np.ndarray, basis: SphericalTensorBasis
) -> np.ndarray:
    """Rotate a vectorized superoperator into the tensor-coefficient basis."""
    v = basis_isometry(basis)
    return v.conj().T @ liouv_vec @ v


@dataclass(frozen=True)
class HoppingCoefficients:
    """Amplitudes of the five-point stencil, indexed by linear site index.

    `tplus[n]` couples a[k+1, q] into the equation for a[k, q] at site
    n = (k, q); `tminus[n]` couples a[k-1, q]; `gamma_onsite[n]` is minus the
    diagonal entry (positive real part = decay); `wplus[n]` / `wminus[n]`
    couple a[k, q+1] / a[k, q-1] and carry the full matrix entry including
    the -i prefactor of the drive term.  `residual_norm` is the largest
    magnitude found outside the stencil and should be roundoff.
    """

    tplus: np.ndarray
    tminus: np.ndarray
    gamma_onsite: np.ndarray
    wplus: np.ndarray
    wminus: np.ndarray
    residual_norm: float
    labels: list[tuple[int, int]]

    def nonreciprocity(self) -> float:
        """Max over sites of | |t+(k,q)| - |t-(k+1,q)| | for the same bond."""
        worst = 0.0
        index = {lab: n for n, lab in enumerate(self.labels)}
        for n, (k, q) in enumerate(self.labels):
            up = index.get((k + 1, q))
            if up is not None:
                worst = max(worst, abs(abs(self.tplus[n]) - abs(self.tminus[up])))
        return worst


def extract_hoppings(liouv: LiouvillianMatrix) -> HoppingCoefficients:
    """Read the stencil amplitudes off the matrix and measure the residual."""
    m = liouv.m
    size = liouv.size
    labels = [tensor_index_inverse(n) for n in range(size)]
    index = {lab: n for n, lab in enumerate(labels)}
    tplus = np.zeros(size, dtype=complex)
    tminus = np.zeros(size, dtype=complex)
    gamma_onsite = np.zeros(size, dtype=complex)
    wplus = np.zeros(size, dtype=complex)
    wminus = np.zeros(size, dtype=complex)
    stencil_mask = np.zeros((size, size), dtype=bool)
    for n, (k, q) in enumerate(labels):
        gamma_onsite[n] = -m[n, n]
        stencil_mask[n, n] = True
        for (dk, dq), target in (
            ((1, 0), tplus), ((-1, 0), tminus), ((0, 1), wplus), ((0, -1), wminus)
        ):
            src = index.get((k + dk, q + dq))
            if src is not None:
                target[n] = m[n, src]
                stencil_mask[n, src] = True
    residual = float(np.abs(np.where(stencil_mask, 0.0, m)).max())
    return HoppingCoefficients(
        tplus=tplus,
        tminus=tminus,
        gamma_onsite=gamma_onsite,
        wplus=wplus,
        wminus=wminus,
        residual_norm=residual,
        labels=labels,
    )


@dataclass(frozen=True)
class SpectralDecomposition:
    """Full eigensystem of the generator, biorthogonally normalized.

    Eigenvalues are sorted by descending real part, ties broken by ascending
    |Im|.  `left[:, i]^dag m = eigenvalues[i] left[:, i]^dag` and
    `left[:, i]^dag right[:, i] = 1`.  `pair_condition[i]` is the eigenvalue
    condition number 1/|l^dag r| before normalization (1 for a normal matrix).
    `steady_indices` lists eigenvalues with |lambda| below `zero_tol`.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    pair_condition: np.ndarray
    steady_indices: tuple[int, ...]
    zero_tol: float

    @property
    def steady_index(self) -> int:
        if len(self.steady_indices) == 0:
            raise DegenerateSteadyStateError("no eigenvalue within steady-state tolerance")
        if len(self.steady_indices) > 1:
            raise DegenerateSteadyStateError(
                f"{len(self.steady_indices)} eigenvalues within steady-state "
                f"tolerance {self.zero_tol:.3e}; steady space is degenerate"
            )
        return self.steady_indices[0]


def _refine_eigenpairs(matrix, vals, vecs, scale, conjugate_vals=False):
    """Inverse-iteration polish of eigenvector columns with poor residuals.

    LAPACK's nonsymmetric eigenvectors occasionally come out several digits
    worse than backward stability allows (observed for the steady eigenvalue
    of these generators); one or two shifted solves restore roundoff-level
    residuals.  Eigenvalues are re-estimated by Rayleigh quotient only for
    the columns touched, and only a strictly better pair is kept.
    """
    n = matrix.shape[0]
    targets = vals.conj() if conjugate_vals else vals
    resid = np.linalg.norm(matrix @ vecs - vecs * targets, axis=0)
    eye = np.eye(n)
    for i in np.nonzero(resid > 1e-9 * scale)[0]:
        lam, best_vec, best_resid = targets[i], vecs[:, i], resid[i]
        y = vecs[:, i]
        for _ in range(3):
            try:
                z = np.linalg.solve(matrix - lam * eye, y)
            except np.linalg.LinAlgError:
                z = np.linalg.solve(matrix - (lam + 1e-13 * scale) * eye, y)
            norm = np.linalg.norm(z)
            if not np.isfinite(norm) or norm == 0.0:
                break
            y = z / norm
            lam = np.vdot(y, matrix @ y)
            r = np.linalg.norm(matrix @ y - lam * y)
            if r < best_resid:
                best_resid, best_vec = r, y
                targets[i] = lam
            if r < 1e-12 * scale:
                break
        vecs[:, i] = best_vec
    return (targets.conj() if conjugate_vals else targets), vecs


def _eig_refined(matrix):
    try:
        vals, vl, vr = sla.eig(matrix, left=True, right=True)
    except Exception as exc:  # pragma: no cover - LAPACK failure is exotic
        raise RuntimeError(f"dense eigensolver failed: {exc}") from exc
    scale = float(np.linalg.norm(matrix))
    if scale > 0:
        vals, vr = _refine_eigenpairs(matrix, vals, vr, scale)
        _, vl = _refine_eigenpairs(matrix.conj().T, vals, vl, scale, conjugate_vals=True)
    return vals, vl, vr


def spectrum(
    liouv: LiouvillianMatrix,
    zero_tol: float | None = None,
    block_tol: float = 1e-13,
) -> SpectralDecomposition:
    """Dense non-symmetric eigendecomposition with left/right pairing.

    Exactly decoupled sectors (entries below block_tol * max|m| treated as
    zero, e.g. the rank blocks of the undamped generator) are diagonalized
    independently, so eigenvectors of degenerate eigenvalues keep their
    block support instead of being mixed arbitrarily by the solver.

    zero_tol defaults to 1e-9 * max|m| and controls only the steady-state
    flagging, not the decomposition itself.  Eigensolver failures raise.
    """
    from scipy.sparse import csgraph, csr_matrix

    m = liouv.m
    size = m.shape[0]
    if zero_tol is None:
        zero_tol = 1e-9 * max(liouv.max_abs(), 1e-300)
    mask = np.abs(m) > block_tol * max(liouv.max_abs(), 1e-300)
    n_comp, comp_of = csgraph.connected_components(
        csr_matrix(mask | mask.T), directed=False
    )
    if n_comp == 1:
        vals, vl, vr = _eig_refined(m)
    else:
        vals = np.empty(size, dtype=complex)
        vl = np.zeros((size, size), dtype=complex)
        vr = np.zeros((size, size), dtype=complex)
        col = 0
        for comp in range(n_comp):
            idx = np.nonzero(comp_of == comp)[0]
            sub = m[np.ix_(idx, idx)]
            sub_vals, sub_vl, sub_vr = _eig_refined(sub)
            span = slice(col, col + len(idx))
            vals[span] = sub_vals
            vl[idx, span] = sub_vl
            vr[idx, span] = sub_vr
            col += len(idx)
    order = np.lexsort((np.abs(vals.imag), -vals.real))
    vals = vals[order]
    vl = vl[:, order]
    vr = vr[:, order]
    overlap = np.einsum("ij,ij->j", vl.conj(), vr)
    small = np.abs(overlap) < 1e-300
    overlap[small] = 1.0  # defective pair; conditioning reported as inf below
    pair_condition = 1.0 / np.abs(overlap)
    pair_condition[small] = np.inf
    vl = vl / overlap.conj()  # now l^dag r = 1 per pair
    steady = tuple(int(i) for i in np.nonzero(np.abs(vals) < zero_tol)[0])
    return SpectralDecomposition(
        eigenvalues=vals,
        right=vr,
        left=vl,
        pair_condition=pair_condition,
        steady_indices=steady,
        zero_tol=float(zero_tol),
    )


def steady_state(
    liouv: LiouvillianMatrix, decomp: SpectralDecomposition | None = None
) -> np.ndarray:
    """Unit-trace steady state as a coefficient vector (a[0] = 1/sqrt(2j+1)).

    The near-zero eigenspace is located through `spectrum` (degeneracy
    raises DegenerateSteadyStateError); the vector itself is the SVD null
    vector of the generator, which is accurate to roundoff where the
    eigensolver's version can be several digits worse.
    """
    if decomp is None:
        decomp = spectrum(liouv)
    decomp.steady_index  # degeneracy check
    vec = np.linalg.svd(liouv.m)[2][-1].conj()
    a00 = vec[0]
    if abs(a00) < 1e-14:
        raise RuntimeError("steady eigenvector has no trace component")
    dim = liouv.basis.dim
    vec = vec * ((1.0 / np.sqrt(dim)) / a00)
    return vec
