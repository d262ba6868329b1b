"""Collective-spin algebra: spin operators, Clebsch-Gordan coefficients, and the
orthonormal spherical tensor operator basis.

Conventions (fixed once, used everywhere downstream):

* The ``|j,m>`` basis is ordered with m descending, ``m = +j, j-1, ..., -j``.
* Clebsch-Gordan coefficients follow the Condon-Shortley phase convention and
  are evaluated with the Racah closed-form sum using log-factorials, so large
  spins (2j up to ~60) do not overflow.
* Tensor operators satisfy ``T[k][q]^dag = (-1)^q T[k][-q]`` and are
  orthonormal under the Hilbert-Schmidt inner product ``<A, B> = Tr[A^dag B]``.
* The linear index of ``(k, q)`` is ``k*k + k + q``, giving contiguous rank
  blocks of size ``2k + 1``.

With these choices the rank-1 triplet comes out proportional to
``(+J-, +Jz, -J+)`` with positive constants ``sqrt(3/(2 j (j+1) (2j+1)))`` for
``q = +-1`` and ``sqrt(3/(j (j+1) (2j+1)))`` for ``q = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpinRepresentation",
    "SpinOperators",
    "SphericalTensorBasis",
    "build_spin_operators",
    "clebsch_gordan",
    "build_tensor_basis",
    "tensor_index",
    "tensor_index_inverse",
    "decompose",
    "reconstruct",
]


def _is_half_integer(x, tol=1e-9):
    return abs(2 * x - round(2 * x)) < tol


@dataclass(frozen=True)
class SpinRepresentation:
    """A single collective spin-j sector, j = N/2 for N underlying spin-1/2s."""

    j: float

    def __post_init__(self):
        if self.j < 0 or not _is_half_integer(self.j):
            raise ValueError(f"j must be a nonnegative half-integer, got {self.j}")
        object.__setattr__(self, "j", round(2 * self.j) / 2)

    @property
    def dim(self) -> int:
        return round(2 * self.j) + 1

    @property
    def n_spins(self) -> int:
        return round(2 * self.j)

    @classmethod
    def from_n_spins(cls, n: int) -> "SpinRepresentation":
        if n < 0 or n != int(n):
            raise ValueError(f"n_spins must be a nonnegative integer, got {n}")
        return cls(j=n / 2)

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order (descending)."""
        return self.j - np.arange(self.dim)


@dataclass(frozen=True)
class SpinOperators:
    """Dense spin-j matrices in the |j,m> basis, m descending."""

    rep: SpinRepresentation
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray

    def as_dict(self):
        return {"jx": self.jx, "jy": self.jy, "jz": self.jz}


def build_spin_operators(rep: SpinRepresentation) -> SpinOperators:
    """Construct jx, jy, jz, jplus, jminus for the given representation.

    Matrix elements follow <j,m+1|J+|j,m> = sqrt(j(j+1) - m(m+1)); with the
    descending-m ordering J+ is strictly upper bidiagonal.
    """
    j = rep.j
    dim = rep.dim
    m = rep.m_values()
    jz = np.diag(m.astype(complex))
    jplus = np.zeros((dim, dim), dtype=complex)
    if dim > 1:
        # column i holds m = j - i; J+ raises it to row i-1
        mm = m[1:]
        jplus[np.arange(dim - 1), np.arange(1, dim)] = np.sqrt(
            j * (j + 1) - mm * (mm + 1)
        )
    jminus = jplus.conj().T
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j
    ops = SpinOperators(rep=rep, jx=jx, jy=jy, jz=jz, jplus=jplus, jminus=jminus)
    return ops


def _lnfact(n: int) -> float:
    return math.lgamma(n + 1)


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley).

    Evaluated with the Racah closed-form sum; factorials enter as
    log-gammas so coefficients stay finite well past 20!.

    Returns 0 when the magnetic selection rule M = m1 + m2 or the triangle
    inequality |j1-j2| <= J <= j1+j2 fails.  Invalid quantum numbers (not
    half-integral, |m| > j, or inconsistent integrality) raise ValueError.
    """
    args = (j1, m1, j2, m2, J, M)
    if not all(_is_half_integer(x) for x in args):
        raise ValueError(f"quantum numbers must be half-integers, got {args}")
    j1, m1, j2, m2, J, M = (round(2 * x) / 2 for x in args)
    if abs(m1) > j1 or abs(m2) > j2 or abs(M) > J:
        raise ValueError(f"|m| exceeds j in {args}")
    for jj, mm in ((j1, m1), (j2, m2), (J, M)):
        if abs((jj - mm) - round(jj - mm)) > 1e-9:
            raise ValueError(f"j - m must be integral, got j={jj}, m={mm}")
    if M != m1 + m2:
        return 0.0
    if not (abs(j1 - j2) <= J <= j1 + j2):
        return 0.0
    if abs((j1 + j2 - J) - round(j1 + j2 - J)) > 1e-9:
        return 0.0

    def f(x):
        n = round(x)
        if n < 0:
            raise ValueError(f"negative factorial argument {x}")
        return _lnfact(n)

    ln_pref = 0.5 * (
        math.log(2 * J + 1)
        + f(j1 + j2 - J) + f(j1 - j2 + J) + f(-j1 + j2 + J) - f(j1 + j2 + J + 1)
        + f(J + M) + f(J - M)
        + f(j1 - m1) + f(j1 + m1) + f(j2 - m2) + f(j2 + m2)
    )
    tmin = round(max(0, j2 - J - m1, j1 + m2 - J))
    tmax = round(min(j1 + j2 - J, j1 - m1, j2 + m2))
    total = 0.0
    for t in range(tmin, tmax + 1):
        ln_den = (
            f(t) + f(j1 + j2 - J - t) + f(j1 - m1 - t)
            + f(j2 + m2 - t) + f(J - j2 + m1 + t) + f(J - j1 - m2 + t)
        )
        total += (-1) ** t * math.exp(ln_pref - ln_den)
    return total


def tensor_index(k: int, q: int, j=None) -> int:
    """Linear index of the (k, q) tensor: k^2 + k + q.

    Rank blocks are contiguous; the inverse map is `tensor_index_inverse`.
    When j is given the range 0 <= k <= 2j is also enforced.
    """
    if k != int(k) or q != int(q):
        raise ValueError(f"(k, q) must be integers, got ({k}, {q})")
    k, q = int(k), int(q)
    if k < 0 or abs(q) > k:
        raise ValueError(f"require 0 <= |q| <= k, got (k, q) = ({k}, {q})")
    if j is not None and k > round(2 * j):
        raise ValueError(f"k = {k} exceeds 2j = {round(2 * j)}")
    return k * k + k + q


def tensor_index_inverse(index: int) -> tuple[int, int]:
    """Inverse of `tensor_index`: index -> (k, q)."""
    if index < 0 or index != int(index):
        raise ValueError(f"index must be a nonnegative integer, got {index}")
    index = int(index)
    k = math.isqrt(index)
    q = index - k * k - k
    return k, q


@dataclass(frozen=True)
class SphericalTensorBasis:
    """Orthonormal spherical tensor operators T^k_q for one spin-j sector.

    `tensors` is a (dim^2, dim, dim) complex array stacked in linear-index
    order; `ranks` holds k per linear index (the chain coordinate of the
    hopping picture).
    """

    rep: SpinRepresentation
    tensors: np.ndarray
    ranks: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.tensors.shape[0]

    @property
    def dim(self) -> int:
        return self.rep.dim

    def tensor(self, k: int, q: int) -> np.ndarray:
        return self.tensors[tensor_index(k, q, self.rep.j)]

    def labels(self) -> list[tuple[int, int]]:
        return [tensor_index_inverse(n) for n in range(self.size)]

    def gram_residual(self) -> float:
        """Max deviation of the Hilbert-Schmidt Gram matrix from identity."""
        flat = self.tensors.reshape(self.size, -1)
        gram = flat.conj() @ flat.T
        return float(np.abs(gram - np.eye(self.size)).max())


def build_tensor_basis(rep: SpinRepresentation) -> SphericalTensorBasis:
    """Build all (2j+1)^2 orthonormal tensors for spin j.

    Matrix elements are <j,m'|T^k_q|j,m> = c_k <j,m; k,q | j,m'> with
    c_k = sqrt((2k+1)/(2j+1)), which makes the Hilbert-Schmidt Gram matrix
    the identity.
    """
    j = rep.j
    dim = rep.dim
    two_j = rep.n_spins
    m_vals = rep.m_values()
    tensors = np.zeros(((two_j + 1) ** 2, dim, dim), dtype=complex)
    ranks = np.zeros((two_j + 1) ** 2, dtype=int)
    for k in range(two_j + 1):
        c = math.sqrt((2 * k + 1) / (2 * j + 1))
        for q in range(-k, k + 1):
            n = tensor_index(k, q)
            ranks[n] = k
            t = tensors[n]
            for col, m in enumerate(m_vals):
                mp = m + q
                if abs(mp) <= j:
                    row = round(j - mp)
                    t[row, col] = c * clebsch_gordan(j, m, k, q, j, mp)
    return SphericalTensorBasis(rep=rep, tensors=tensors, ranks=ranks)


def decompose(rho: np.ndarray, basis: SphericalTensorBasis) -> np.ndarray:
    """Coefficients a with a[n] = Tr[T_n^dag rho], so rho = sum_n a[n] T_n.

    For Hermitian rho the coefficients obey a[k,q]^* = (-1)^q a[k,-q].
    """
    rho = np.asarray(rho)
    if rho.shape != (basis.dim, basis.dim):
        raise ValueError(f"expected {basis.dim}x{basis.dim} matrix, got {rho.shape}")
    flat = basis.tensors.reshape(basis.size, -1)
    return flat.conj() @ rho.ravel()


def reconstruct(coeffs: np.ndarray, basis: SphericalTensorBasis) -> np.ndarray:
    """Rebuild the dim x dim matrix from its tensor coefficients."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (basis.size,):
        raise ValueError(f"expected {basis.size} coefficients, got {coeffs.shape}")
    flat = basis.tensors.reshape(basis.size, -1)
    return (coeffs @ flat).reshape(basis.dim, basis.dim)


def basis_isometry(basis: SphericalTensorBasis) -> np.ndarray:
    """Unitary V whose column n is the row-major vectorization of T_n.

    Maps tensor coefficients to vectorized matrices: vec(rho) = V a.  Used to
    cross-check the superoperator against its computational-basis form.
    """
    return basis.tensors.reshape(basis.size, -1).T.copy()
