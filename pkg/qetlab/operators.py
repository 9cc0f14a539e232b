"""
Dense operator algebra for registers of one to three qubits.

Operators, unitaries and density matrices are plain ``numpy`` complex arrays of
dimension 2, 4 or 8 over the computational basis |q_{n-1} ... q_0>, with the
first label of a system being the most significant factor. The three-qubit
register is ordered [B, An, A], the order of the carbons C1, C2, C3 used as
B, An and A in the experiment; every embedding in the package derives from
``REGISTER``.
"""

import logging
import math
import string
from enum import Enum
from functools import reduce
from typing import Sequence

import numpy as np
import numpy.typing as npt

from qetlab import config
from qetlab.exceptions import DimensionError, InvalidOperatorError, UnknownQubitError

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
StateVector = npt.NDArray[np.complex128]

ALLOWED_DIMS = (2, 4, 8)
MAX_DIM = 8

JACOBI_MAX_SWEEPS = 100
_JACOBI_EPS = 1e-15
_JACOBI_TINY = 1e-300


class QubitLabel(str, Enum):
    """Subsystem names of the register."""

    A = "A"
    B = "B"
    AN = "An"


REGISTER: tuple[QubitLabel, ...] = (QubitLabel.B, QubitLabel.AN, QubitLabel.A)
PAIR: tuple[QubitLabel, ...] = (QubitLabel.A, QubitLabel.B)


def _frozen(values) -> ComplexMatrix:
    arr = np.array(values, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


IDENTITY = _frozen(np.eye(2))
SIGMA_X = _frozen([[0, 1], [1, 0]])
SIGMA_Y = _frozen([[0, -1j], [1j, 0]])
SIGMA_Z = _frozen([[1, 0], [0, -1]])
PROJ_0 = _frozen([[1, 0], [0, 0]])
PROJ_1 = _frozen([[0, 0], [0, 1]])


def as_operator(m: npt.ArrayLike) -> ComplexMatrix:
    """Return ``m`` as a complex square array with dimension in {2, 4, 8}."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"operator must be square, got shape {arr.shape}")
    if arr.shape[0] not in ALLOWED_DIMS:
        raise DimensionError(f"operator dimension {arr.shape[0]} not in {ALLOWED_DIMS}")
    return arr


def _check_system(system: Sequence[QubitLabel]) -> tuple[QubitLabel, ...]:
    system = tuple(QubitLabel(q) for q in system)
    if not 1 <= len(system) <= 3:
        raise DimensionError(f"systems hold one to three qubits, got {len(system)}")
    if len(set(system)) != len(system):
        raise UnknownQubitError(f"duplicate labels in system {system}")
    return system


def _position(label: QubitLabel, system: Sequence[QubitLabel]) -> int:
    try:
        return list(system).index(QubitLabel(label))
    except (ValueError, KeyError):
        raise UnknownQubitError(f"qubit {label!r} is not part of system {tuple(system)}") from None


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Kronecker product with ``a`` as the more significant factor."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    for m in (a, b):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"kron needs square factors, got shape {m.shape}")
    dim = a.shape[0] * b.shape[0]
    if dim > MAX_DIM:
        raise DimensionError(f"kron result of dimension {dim} exceeds {MAX_DIM}")
    return np.kron(a, b)


def embed(op: npt.ArrayLike, target: QubitLabel, system: Sequence[QubitLabel]) -> ComplexMatrix:
    """Place a single-qubit operator on ``target``, identities elsewhere."""
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (2, 2):
        raise DimensionError(f"embed expects a 2x2 operator, got {op.shape}")
    system = _check_system(system)
    position = _position(target, system)
    factors = [op if i == position else IDENTITY for i in range(len(system))]
    return reduce(kron, factors)


def permute_operator(
    op: npt.ArrayLike,
    current: Sequence[QubitLabel],
    target: Sequence[QubitLabel],
) -> ComplexMatrix:
    """Re-express an operator given over ``current`` in the ordering ``target``."""
    current = _check_system(current)
    target = _check_system(target)
    if set(current) != set(target):
        raise UnknownQubitError(f"orderings {current} and {target} name different qubits")
    op = np.asarray(op, dtype=np.complex128)
    n = len(current)
    perm = [current.index(q) for q in target]
    tensor = op.reshape((2,) * (2 * n))
    tensor = tensor.transpose(perm + [n + p for p in perm])
    return tensor.reshape(2**n, 2**n)


def permute_state(
    vec: npt.ArrayLike,
    current: Sequence[QubitLabel],
    target: Sequence[QubitLabel],
) -> StateVector:
    """Re-express a state vector given over ``current`` in the ordering ``target``."""
    current = _check_system(current)
    target = _check_system(target)
    if set(current) != set(target):
        raise UnknownQubitError(f"orderings {current} and {target} name different qubits")
    n = len(current)
    perm = [current.index(q) for q in target]
    return np.asarray(vec, dtype=np.complex128).reshape((2,) * n).transpose(perm).reshape(2**n)


def embed_pair(
    op: npt.ArrayLike,
    qubits: Sequence[QubitLabel],
    system: Sequence[QubitLabel],
) -> ComplexMatrix:
    """Place a two-qubit operator whose first factor is ``qubits[0]``."""
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (4, 4):
        raise DimensionError(f"embed_pair expects a 4x4 operator, got {op.shape}")
    system = _check_system(system)
    qubits = tuple(QubitLabel(q) for q in qubits)
    for q in qubits:
        _position(q, system)
    rest = [q for q in system if q not in qubits]
    full = reduce(kron, [op] + [IDENTITY] * len(rest))
    return permute_operator(full, list(qubits) + rest, system)


def partial_trace(
    rho: npt.ArrayLike,
    keep: Sequence[QubitLabel],
    system: Sequence[QubitLabel],
) -> ComplexMatrix:
    """
    Trace out every qubit of ``system`` not listed in ``keep``.

    The result is ordered as ``keep``. An empty ``keep`` returns the 1x1 trace.
    """
    system = _check_system(system)
    keep = tuple(QubitLabel(q) for q in keep)
    for q in keep:
        _position(q, system)
    if len(set(keep)) != len(keep):
        raise UnknownQubitError(f"duplicate labels in keep {keep}")

    n = len(system)
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (2**n, 2**n):
        raise DimensionError(f"state of shape {rho.shape} does not match {n} qubits")

    rows = string.ascii_lowercase[:n]
    cols = [string.ascii_lowercase[n + i] if q in keep else rows[i] for i, q in enumerate(system)]
    out_rows = "".join(rows[system.index(q)] for q in keep)
    out_cols = "".join(cols[system.index(q)] for q in keep)
    reduced = np.einsum(f"{rows}{''.join(cols)}->{out_rows}{out_cols}", rho.reshape((2,) * (2 * n)))
    dim = 2 ** len(keep)
    return np.asarray(reduced).reshape(dim, dim)


def ket(bits: str) -> StateVector:
    """Computational basis vector, e.g. ``ket("01")`` = |0>|1>."""
    if not bits or set(bits) - {"0", "1"}:
        raise DimensionError(f"invalid basis label {bits!r}")
    vec = np.zeros(2 ** len(bits), dtype=np.complex128)
    vec[int(bits, 2)] = 1.0
    return vec


def density(vec: npt.ArrayLike) -> ComplexMatrix:
    """Projector |v><v| of a state vector."""
    vec = np.asarray(vec, dtype=np.complex128)
    return np.outer(vec, vec.conj())


def orthogonal_complement(vec: npt.ArrayLike) -> StateVector:
    """Unit vector orthogonal to a single-qubit state: (a, b) -> (-b*, a*)."""
    a, b = np.asarray(vec, dtype=np.complex128)
    return np.array([-np.conj(b), np.conj(a)], dtype=np.complex128)


def dagger(m: npt.ArrayLike) -> ComplexMatrix:
    return np.asarray(m, dtype=np.complex128).conj().T


def commutator(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    return a @ b - b @ a


def max_abs(m: npt.ArrayLike) -> float:
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def is_unitary(u: npt.ArrayLike, tol: float | None = None) -> bool:
    tol = config.VALIDITY_TOL if tol is None else tol
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return max_abs(dagger(u) @ u - np.eye(u.shape[0])) <= tol


def is_hermitian(m: npt.ArrayLike, tol: float | None = None) -> bool:
    tol = config.VALIDITY_TOL if tol is None else tol
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return max_abs(m - dagger(m)) <= tol


def is_density_matrix(rho: npt.ArrayLike, tol: float | None = None) -> bool:
    """Hermitian, unit trace and positive semidefinite, all within ``tol``."""
    tol = config.VALIDITY_TOL if tol is None else tol
    try:
        rho = as_operator(rho)
    except DimensionError:
        return False
    if not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    eigenvalues, _ = hermitian_eig(rho, tol=tol)
    return bool(eigenvalues[0] >= -tol)


def require_unitary(u: npt.ArrayLike, name: str = "operator", tol: float | None = None) -> ComplexMatrix:
    u = np.asarray(u, dtype=np.complex128)
    if not is_unitary(u, tol):
        raise InvalidOperatorError(f"{name} is not unitary")
    return u


def require_density_matrix(rho: npt.ArrayLike, name: str = "state", tol: float | None = None) -> ComplexMatrix:
    rho = as_operator(rho)
    if not is_density_matrix(rho, tol):
        raise InvalidOperatorError(f"{name} is not a valid density matrix")
    return rho


def hermitian_eig(m: npt.ArrayLike, tol: float | None = None) -> tuple[np.ndarray, ComplexMatrix]:
    """
    Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot a_pq with a diagonal
    unitary and then applies the real rotation that zeroes it.

    Returns:
        (eigenvalues ascending, eigenvectors as columns)

    Raises:
        InvalidOperatorError: if ``m`` is not Hermitian within ``tol``.
    """
    tol = config.VALIDITY_TOL if tol is None else tol
    a = as_operator(m).copy()
    if not is_hermitian(a, tol):
        raise InvalidOperatorError("hermitian_eig received a non-Hermitian matrix")
    a = (a + dagger(a)) / 2
    n = a.shape[0]
    vectors = np.eye(n, dtype=np.complex128)
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n), vectors

    for sweep in range(JACOBI_MAX_SWEEPS):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= _JACOBI_EPS * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= _JACOBI_TINY:
                    continue
                phase = np.conj(apq / r)
                theta = 0.5 * math.atan2(2.0 * r, a[q, q].real - a[p, p].real)
                c, s = math.cos(theta), math.sin(theta)
                rot = np.array([[c, s], [-s * phase, c * phase]], dtype=np.complex128)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = dagger(rot) @ a[idx, :]
                vectors[:, idx] = vectors[:, idx] @ rot
    else:
        logger.warning("Jacobi eigensolver stopped after %d sweeps", JACOBI_MAX_SWEEPS)

    eigenvalues = np.real(np.diag(a)).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], vectors[:, order]


def expectation(rho: npt.ArrayLike, obs: npt.ArrayLike, tol: float | None = None) -> float:
    """Tr(obs rho) as a real number."""
    tol = config.VALIDITY_TOL if tol is None else tol
    rho = np.asarray(rho, dtype=np.complex128)
    obs = np.asarray(obs, dtype=np.complex128)
    if rho.shape != obs.shape:
        raise DimensionError(f"state {rho.shape} and observable {obs.shape} differ in shape")
    value = np.trace(obs @ rho)
    if abs(value.imag) > tol:
        raise InvalidOperatorError(
            f"expectation has imaginary part {value.imag:.3e}; observable is not Hermitian"
        )
    return float(value.real)
