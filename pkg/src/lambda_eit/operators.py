"""Operators and states on the truncated qubit (x) resonator space.

Basis ordering is qubit-major: the index of ``|q, n>`` is ``q * n_fock + n``
with ``q = 0`` for the ground state ``g`` and ``q = 1`` for the excited state
``e``.  For ``n_fock = 2`` the order is ``|g0>, |g1>, |e0>, |e1>``.

Matrices are plain ``numpy`` arrays.  Arrays returned from the cached
constructors are read-only so they can be shared freely between workers.

Superoperators use column stacking: ``vec(A X B) = (B^T kron A) vec(X)``.
"""
from functools import lru_cache

import numpy as np

from .errors import DimensionError, DomainError, SizeError

MAX_DIM = 64
DEFAULT_N_FOCK = 7


def _check_n_fock(n_fock):
    if int(n_fock) != n_fock or n_fock < 2:
        raise DimensionError(f"n_fock must be an integer >= 2, got {n_fock!r}")
    return int(n_fock)


def n_fock_of(dim):
    """Recover ``n_fock`` from a full-space dimension ``2 * n_fock``."""
    if dim % 2 or dim < 4:
        raise DimensionError(f"dimension {dim} is not 2*n_fock with n_fock >= 2")
    return dim // 2


def _frozen(m):
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def identity(n_fock):
    n_fock = _check_n_fock(n_fock)
    return _frozen(np.eye(2 * n_fock, dtype=complex))


@lru_cache(maxsize=None)
def qubit_lowering(n_fock):
    """``sigma (x) I``: lowers the qubit, leaves the photon number alone."""
    n_fock = _check_n_fock(n_fock)
    sigma = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    return _frozen(np.kron(sigma, np.eye(n_fock)))


@lru_cache(maxsize=None)
def resonator_lowering(n_fock):
    """``I (x) a`` with ``a`` truncated at ``n_fock`` photon levels."""
    n_fock = _check_n_fock(n_fock)
    a = np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), 1).astype(complex)
    return _frozen(np.kron(np.eye(2), a))


@lru_cache(maxsize=None)
def qubit_number(n_fock):
    sm = qubit_lowering(n_fock)
    return _frozen(sm.conj().T @ sm)


@lru_cache(maxsize=None)
def photon_number(n_fock):
    a = resonator_lowering(n_fock)
    return _frozen(a.conj().T @ a)


def kron(A, B, max_dim=MAX_DIM):
    A = np.asarray(A)
    B = np.asarray(B)
    dim = A.shape[0] * B.shape[0]
    if dim > max_dim:
        raise SizeError(f"kron result dimension {dim} exceeds maximum {max_dim}")
    return np.kron(A, B)


def basis_index(q, n, n_fock):
    if q not in (0, 1) or not 0 <= n < n_fock:
        raise DimensionError(f"no basis state |{q},{n}> with n_fock={n_fock}")
    return q * n_fock + n


def basis_density(q, n, n_fock):
    """Projector ``|q,n><q,n|``."""
    n_fock = _check_n_fock(n_fock)
    rho = np.zeros((2 * n_fock, 2 * n_fock), dtype=complex)
    i = basis_index(q, n, n_fock)
    rho[i, i] = 1.0
    return rho


def ground_state(n_fock):
    return basis_density(0, 0, n_fock)


def expectation(rho, op):
    """``Tr(rho op)``."""
    rho = np.asarray(rho)
    op = np.asarray(op)
    if rho.shape != op.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"shape mismatch: rho {rho.shape} vs op {op.shape}")
    # Tr(rho op) = sum_ij rho_ij op_ji
    return complex(np.einsum("ij,ji->", rho, op))


def is_hermitian(m, atol=1e-12):
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) < atol


def check_density_matrix(rho, trace_tol=1e-9, herm_tol=1e-12, pos_tol=1e-9):
    """Raise ``DomainError`` unless ``rho`` is a valid density matrix.

    Checks unit trace, Hermiticity and positivity with the given tolerances.
    Returns ``rho`` so it can be used inline.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    tr = np.trace(rho)
    if abs(tr.real - 1.0) > trace_tol or abs(tr.imag) > max(herm_tol, trace_tol * 1e-3):
        raise DomainError(f"trace {tr} differs from 1")
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > herm_tol:
        raise DomainError(f"not Hermitian (max |rho - rho^dag| = {herm_err:.2e})")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam < -pos_tol:
        raise DomainError(f"negative eigenvalue {lam:.3e}")
    return rho


def trace_distance(rho, sigma):
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma)))))


# --- column-stacking superoperator helpers -------------------------------

def vec(m):
    return np.asarray(m).reshape(-1, order="F")


def unvec(v, dim=None):
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def spre(A):
    """Superoperator of ``X -> A X``."""
    return np.kron(np.eye(A.shape[0]), A)


def spost(A):
    """Superoperator of ``X -> X A``."""
    return np.kron(A.T, np.eye(A.shape[0]))


def commutator_superop(H):
    """Superoperator of ``X -> -i [H, X]``."""
    return -1j * (spre(H) - spost(H))


def dissipator_superop(c):
    """Superoperator of ``D[c] X = 2 c X c^dag - X c^dag c - c^dag c X``.

    Note the factor 2 on the jump term: with this normalisation the
    population decay rate under ``(r/2) D[c]`` is ``r``.
    """
    cdc = c.conj().T @ c
    return 2.0 * np.kron(c.conj(), c) - spre(cdc) - spost(cdc)
