"""Dense operator and superoperator algebra.

All superoperators in this package act on column-stacked vectorizations:
``vec(A) = A.T.ravel()``, so that ``vec(A X B) = (B^T kron A) vec(X)``.
Column ``a`` of a superoperator matrix is therefore the vectorized image of
the basis matrix ``E_{a mod d, a div d}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class InvalidInputError(ValueError):
    """Raised for malformed or non-finite operator input."""


class ContractViolation(ValueError):
    """Raised when a supplied map fails a structural requirement (e.g. linearity)."""


def _as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    return A


def vec(A: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(A).T.ravel()


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    return v.reshape(d, d).T


def basis_matrix(d: int, a: int) -> np.ndarray:
    """Basis matrix attached to column ``a`` of a superoperator."""
    E = np.zeros((d, d), dtype=complex)
    E[a % d, a // d] = 1.0
    return E


def apply_superop(S: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Apply superoperator matrix ``S`` to the operator ``A``."""
    A = np.asarray(A)
    return unvec(S @ vec(A), A.shape[0])


def superop_dim(S: np.ndarray) -> int:
    n = S.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n or S.shape != (n, n):
        raise InvalidInputError(f"not a superoperator matrix: shape {S.shape}")
    return d


# -- norms and inner products -----------------------------------------------

def trace_norm(A) -> float:
    """Sum of singular values."""
    A = _as_square(A)
    return float(np.sum(np.linalg.svd(A, compute_uv=False)))


def op_norm(A) -> float:
    """Operator (spectral) norm."""
    return float(np.linalg.norm(np.asarray(A), 2))


def hs_inner(A, B) -> complex:
    """Hilbert-Schmidt inner product Tr(A* B)."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise InvalidInputError(f"dimension mismatch {A.shape} vs {B.shape}")
    return complex(np.vdot(A, B))


def is_hermitian(A, tol: float = 1e-12) -> bool:
    A = np.asarray(A)
    scale = max(np.linalg.norm(A), 1.0)
    return bool(np.linalg.norm(A - A.conj().T) <= tol * scale)


def is_projector(P, tol: float = 1e-10) -> bool:
    P = np.asarray(P)
    return is_hermitian(P, tol) and bool(np.linalg.norm(P @ P - P) <= tol)


# -- superoperator construction ------------------------------------------------

def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices (np.kron without its generic-rank overhead)."""
    m, n = A.shape
    p, q = B.shape
    return (A[:, None, :, None] * B[None, :, None, :]).reshape(m * p, n * q)


def left_mul(A: np.ndarray) -> np.ndarray:
    """Superoperator X -> A X."""
    d = A.shape[0]
    return kron(np.eye(d), A)


def right_mul(B: np.ndarray) -> np.ndarray:
    """Superoperator X -> X B."""
    d = B.shape[0]
    return kron(B.T, np.eye(d))


def conj_superop(A: np.ndarray) -> np.ndarray:
    """Superoperator X -> A X A*."""
    return kron(A.conj(), A)


def commutator_superop(H: np.ndarray) -> np.ndarray:
    """Superoperator X -> -i[H, X]."""
    d = H.shape[0]
    eye = np.eye(d)
    return -1j * (kron(eye, H) - kron(H.T, eye))


def dissipator_superop(jumps) -> np.ndarray:
    """Superoperator X -> sum_l (G X G* - 1/2 {G* G, X})."""
    jumps = list(jumps)
    if not jumps:
        raise InvalidInputError("empty jump list")
    d = jumps[0].shape[0]
    eye = np.eye(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    for G in jumps:
        GG = G.conj().T @ G
        out += kron(G.conj(), G) - 0.5 * kron(eye, GG) - 0.5 * kron(GG.T, eye)
    return out


def lindblad_superop(H: np.ndarray, jumps, g: float) -> np.ndarray:
    """Matrix of L^{[g]} = -i[H, .] + g * dissipator."""
    L = commutator_superop(H)
    if g != 0 and jumps:
        L = L + g * dissipator_superop(jumps)
    return L


def pinching_superop(projectors) -> np.ndarray:
    """Superoperator X -> sum_j P_j X P_j (the map P_0 for spectral projectors)."""
    return sum(conj_superop(P) for P in projectors)


def superop_from_action(d: int, action, check_linearity: bool = True, seed: int = 0,
                        n_checks: int = 3, tol: float = 1e-10) -> np.ndarray:
    """Tabulate a linear map on d x d matrices as a superoperator matrix.

    Linearity is probed on random pairs; a failure raises ContractViolation.
    """
    cols = [vec(np.asarray(action(basis_matrix(d, a)), dtype=complex)) for a in range(d * d)]
    S = np.column_stack(cols)
    if check_linearity:
        rng = np.random.default_rng(seed)
        for _ in range(n_checks):
            A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            B = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
            lhs = np.asarray(action(a * A + b * B))
            rhs = a * np.asarray(action(A)) + b * np.asarray(action(B))
            if np.linalg.norm(lhs - rhs) > tol * max(1.0, np.linalg.norm(rhs)):
                raise ContractViolation("supplied action is not linear")
            if np.linalg.norm(apply_superop(S, A) - np.asarray(action(A))) > tol * max(1.0, np.linalg.norm(A)):
                raise ContractViolation("supplied action is not linear")
    return S


# -- channel diagnostics ---------------------------------------------------------

def choi_matrix(S: np.ndarray) -> np.ndarray:
    """Choi matrix C = sum_{ab} E_ab kron S(E_ab)."""
    d = superop_dim(S)
    C = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[a, b] = 1.0
            C += kron(E, apply_superop(S, E))
    return C


def trace_deficit(S: np.ndarray) -> float:
    """max over basis matrices E of |Tr S(E) - Tr E|."""
    d = superop_dim(S)
    # Tr X = vec(I)^T vec(X), so the deficit is the row vec(I)^T (S - 1)
    row = vec(np.eye(d)) @ (S - np.eye(d * d))
    return float(np.max(np.abs(row)))


@dataclass(frozen=True)
class CPTPReport:
    ok: bool
    min_choi_eig: float
    trace_deficit: float
    tol: float

    def __bool__(self):
        return self.ok


def is_cptp(S: np.ndarray, tol: float = 1e-7) -> CPTPReport:
    """Check complete positivity (Choi spectrum) and trace preservation."""
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    C = choi_matrix(S)
    C = 0.5 * (C + C.conj().T)
    mineig = float(np.linalg.eigvalsh(C)[0])
    deficit = trace_deficit(S)
    return CPTPReport(mineig >= -tol and deficit <= tol, mineig, deficit, tol)


# -- random states and induced norms ---------------------------------------------

def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real


def induced_trace_norm(S: np.ndarray, n_states: int = 200, seed: int = 0) -> float:
    """Sampled lower bound on sup ||S(X)||_1 / ||X||_1.

    The supremum is taken over ``n_states`` random pure states together with
    the d^2 basis matrices (each of unit trace norm).
    """
    d = superop_dim(S)
    rng = np.random.default_rng(seed)
    best = 0.0
    for a in range(d * d):
        best = max(best, trace_norm(unvec(S[:, a], d)))
    for _ in range(n_states):
        rho = random_pure_state(d, rng)
        best = max(best, trace_norm(apply_superop(S, rho)))
    return best


# -- serialization ------------------------------------------------------------------

def operator_to_json(A: np.ndarray) -> dict:
    """Row-major list of [re, im] pairs plus the dimension."""
    A = _as_square(A)
    return {"dim": int(A.shape[0]),
            "entries": [[float(z.real), float(z.imag)] for z in A.ravel()]}


def operator_from_json(obj) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    d = int(obj["dim"])
    entries = np.asarray(obj["entries"], dtype=float)
    if entries.shape != (d * d, 2):
        raise InvalidInputError(f"expected {d * d} [re, im] pairs, got shape {entries.shape}")
    return (entries[:, 0] + 1j * entries[:, 1]).reshape(d, d)
