"""Dense complex matrix functions and norms.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. The
``as_*`` validators check the invariants of the three matrix kinds used
throughout the package (general, Hermitian, unitary) and return read-only
copies, so a validated matrix cannot be mutated behind a caller's back.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .errors import (
    BranchCutViolation,
    ContourTooTight,
    ConvergenceFailure,
    DimensionMismatch,
    InvalidMatrix,
    NonDiagonalizable,
    SingularMatrix,
)

DEFAULT_BRANCH_TOL = 1e-6
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
SCHUR_OFFDIAG_TOL = 1e-8
COND_LIMIT = 1e8
RESOLVENT_LIMIT = 1e12


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _frozen(M: np.ndarray) -> np.ndarray:
    M.setflags(write=False)
    return M


def as_matrix(M) -> np.ndarray:
    """Validate a dense square complex matrix and return a read-only copy."""
    A = np.array(M, dtype=np.complex128, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise InvalidMatrix(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidMatrix("matrix has non-finite entries")
    return _frozen(A)


def as_hermitian(M, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate hermiticity (relative max-norm test) and return the symmetrized matrix."""
    A = np.array(as_matrix(M))
    scale = np.abs(A).max()
    asym = np.abs(A - A.conj().T).max()
    if asym > tol * scale:
        raise InvalidMatrix(f"matrix is not Hermitian: max|M - M^H| = {asym:.3e}")
    return _frozen(0.5 * (A + A.conj().T))


def as_unitary(M, tol: float = UNITARY_TOL) -> np.ndarray:
    A = as_matrix(M)
    defect = unitarity_defect(A)
    if defect > tol:
        raise InvalidMatrix(f"matrix is not unitary: max|U^H U - 1| = {defect:.3e}")
    return A


def unitarity_defect(U: np.ndarray) -> float:
    n = U.shape[0]
    return float(np.abs(U.conj().T @ U - np.eye(n)).max())


def _same_shape(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes differ: {A.shape} vs {B.shape}")


# ---------------------------------------------------------------------------
# spectral decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues and a unitary frame whose columns are eigenvectors.

    For unitary input ``eigenvalues`` holds the eigenphases in (-pi, pi] and
    ``phases`` is True; the eigenvalues proper are ``exp(1j * eigenvalues)``.
    """

    eigenvalues: np.ndarray
    frame: np.ndarray
    phases: bool = False

    def spectrum(self) -> np.ndarray:
        return np.exp(1j * self.eigenvalues) if self.phases else self.eigenvalues

    def apply(self, values) -> np.ndarray:
        """Return ``frame @ diag(values) @ frame^H``."""
        return (self.frame * np.asarray(values)) @ self.frame.conj().T

    def reconstruct(self) -> np.ndarray:
        return self.apply(self.spectrum())

    def branch_distance(self) -> float:
        """Smallest distance (radians) from an eigenphase to +-pi."""
        if not self.phases:
            raise ValueError("branch distance is defined for unitary decompositions only")
        if self.eigenvalues.size == 0:
            return np.pi
        return float(np.min(np.pi - np.abs(self.eigenvalues)))


def eig_hermitian(M) -> SpectralDecomposition:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""
    H = as_hermitian(M)
    try:
        w, V = sla.eigh(H)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise ConvergenceFailure(f"eigh failed: {exc}") from exc
    return SpectralDecomposition(_frozen(w), _frozen(V))


def diagonalize_unitary(W, branch_tol: float = DEFAULT_BRANCH_TOL) -> SpectralDecomposition:
    """Diagonalize a unitary through its complex Schur form.

    The Schur form of a normal matrix is diagonal up to roundoff; a residual
    off-diagonal part above ``SCHUR_OFFDIAG_TOL`` means the input was not
    normal and is rejected. Raises :class:`BranchCutViolation` when an
    eigenphase lies within ``branch_tol`` of +-pi.
    """
    if branch_tol <= 0:
        raise ValueError("branch_tol must be positive")
    U = as_unitary(W)
    try:
        T, Z = sla.schur(U, output="complex")
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise ConvergenceFailure(f"Schur decomposition failed: {exc}") from exc
    d = np.diag(T)
    off = np.abs(np.triu(T, 1)).max() if T.shape[0] > 1 else 0.0
    if off > SCHUR_OFFDIAG_TOL:
        raise InvalidMatrix(f"Schur form not diagonal (off-diagonal {off:.3e}); input not normal")
    theta = np.angle(d)
    dec = SpectralDecomposition(_frozen(theta), _frozen(Z), phases=True)
    dist = dec.branch_distance()
    if dist <= branch_tol:
        raise BranchCutViolation(
            f"eigenphase within {dist:.3e} rad of pi (branch_tol={branch_tol:g})"
        )
    return dec


def exp_i_hermitian(A, t: float = 1.0) -> np.ndarray:
    """``exp(1j * t * A)`` for Hermitian ``A`` by spectral calculus."""
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    dec = eig_hermitian(A)
    return _frozen(dec.apply(np.exp(1j * t * dec.eigenvalues)))


def principal_log_unitary(W, branch_tol: float = DEFAULT_BRANCH_TOL) -> np.ndarray:
    """Principal logarithm of a unitary; the result is skew-Hermitian."""
    dec = diagonalize_unitary(W, branch_tol)
    L = dec.apply(1j * dec.eigenvalues)
    return _frozen(0.5 * (L - L.conj().T))


def principal_log_invertible(
    M,
    branch_tol: float = DEFAULT_BRANCH_TOL,
    cond_limit: float = COND_LIMIT,
    singular_tol: float = 1e-12,
) -> np.ndarray:
    """Principal logarithm of a diagonalizable invertible matrix.

    Uses the eigenvector frame ``M = V diag(lam) V^-1``. Defective or nearly
    defective input (frame condition number above ``cond_limit``) is refused
    rather than processed with silent accuracy loss.
    """
    A = as_matrix(M)
    lam, V = _eig_general(A)
    _check_invertible_spectrum(lam, A, branch_tol, singular_tol)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > cond_limit:
        raise NonDiagonalizable(f"eigenvector frame condition number {cond:.3e} exceeds {cond_limit:.1e}")
    L = np.linalg.solve(V.T, (V * np.log(lam)).T).T
    return _frozen(L)


def _eig_general(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return sla.eig(A)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise ConvergenceFailure(f"eig failed: {exc}") from exc


def eigvals_general(M) -> np.ndarray:
    A = as_matrix(M)
    try:
        return sla.eigvals(A)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise ConvergenceFailure(f"eigvals failed: {exc}") from exc


def _check_invertible_spectrum(lam, A, branch_tol, singular_tol) -> None:
    scale = max(1.0, float(np.abs(A).max()))
    small = np.abs(lam).min()
    if small <= singular_tol * scale:
        raise SingularMatrix(f"eigenvalue of modulus {small:.3e} (matrix is singular)")
    dist = float(np.min(np.pi - np.abs(np.angle(lam))))
    if dist <= branch_tol:
        raise BranchCutViolation(
            f"eigenvalue argument within {dist:.3e} rad of the negative real axis"
        )


# ---------------------------------------------------------------------------
# norms and commutators
# ---------------------------------------------------------------------------

def _svdvals(M) -> np.ndarray:
    try:
        return sla.svdvals(np.asarray(M, dtype=np.complex128))
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise ConvergenceFailure(f"SVD failed: {exc}") from exc


def trace_norm(M) -> float:
    """Schatten-1 norm: the sum of singular values."""
    return float(_svdvals(M).sum())


def operator_norm(M) -> float:
    s = _svdvals(M)
    return float(s[0]) if s.size else 0.0


def commutator(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    _same_shape(A, B)
    return A @ B - B @ A


def trace_of_commutator(A, B) -> complex:
    """``Tr(AB - BA)`` without forming either product."""
    A = np.asarray(A)
    B = np.asarray(B)
    _same_shape(A, B)
    return complex(np.sum(A * B.T) - np.sum(B * A.T))


def holmgren_bound(M) -> float:
    """Max of the largest absolute row sum and the largest absolute column sum.

    Always an upper bound for the operator norm.
    """
    a = np.abs(np.asarray(M))
    return float(max(a.sum(axis=1).max(), a.sum(axis=0).max()))


# ---------------------------------------------------------------------------
# Lipschitz estimate for the principal log (keyhole contour)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourSpec:
    """Keyhole contour around the unit circle, open towards -1.

    Two arcs at radii ``1 - delta`` and ``1 + delta`` spanning arguments in
    ``[-(pi - phi), pi - phi]``, closed by radial segments. ``samples`` is the
    total number of quadrature nodes.
    """

    delta: float = 0.5
    phi: float = np.pi / 4
    samples: int = 2048

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1) so the origin stays outside")
        if not 0 < self.phi < np.pi:
            raise ValueError("phi must lie in (0, pi)")
        if self.samples < 8:
            raise ValueError("samples must be at least 8")

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes on the contour and trapezoid weights for ``|dz|``."""
        a = np.pi - self.phi
        r_in, r_out = 1.0 - self.delta, 1.0 + self.delta
        pieces = [
            ("arc", r_out, -a, a),
            ("ray", a, r_out, r_in),
            ("arc", r_in, a, -a),
            ("ray", -a, r_in, r_out),
        ]
        lengths = [2 * a * r_out, r_out - r_in, 2 * a * r_in, r_out - r_in]
        total = sum(lengths)
        zs, ws = [], []
        for (kind, p, lo, hi), length in zip(pieces, lengths):
            n = max(2, int(round(self.samples * length / total)))
            s = np.linspace(lo, hi, n)
            z = p * np.exp(1j * s) if kind == "arc" else s * np.exp(1j * p)
            h = length / (n - 1)
            w = np.full(n, h)
            w[0] = w[-1] = h / 2
            zs.append(z)
            ws.append(w)
        return np.concatenate(zs), np.concatenate(ws)

    def encloses_arc(self) -> float:
        """Half-width of the unit-circle arc guaranteed to lie inside."""
        return np.pi - 2 * self.phi


def default_contour(S, T, delta: float = 0.5, samples: int = 2048,
                    branch_tol: float = DEFAULT_BRANCH_TOL) -> ContourSpec:
    """Contour whose opening sits halfway between the spectra and -1."""
    th = np.concatenate([
        diagonalize_unitary(S, branch_tol).eigenvalues,
        diagonalize_unitary(T, branch_tol).eigenvalues,
    ])
    gap = np.pi - np.abs(th).max()
    return ContourSpec(delta=delta, phi=gap / 2, samples=samples)


@dataclass(frozen=True)
class LogLipschitzReport:
    lhs: float
    rhs_factor: float
    rhs: float
    holds: bool
    resolvent_sup: float = field(default=np.nan)
    log_integral: float = field(default=np.nan)


def log_difference_bound_check(S, T, contour: ContourSpec | None = None) -> LogLipschitzReport:
    """Compare ``||log S - log T||_1`` with ``2 pi C ||S - T||_1``.

    ``C`` is the product of the largest sampled resolvent norms of ``S`` and
    ``T`` on the contour times ``(1/4 pi^2) * integral |log z| |dz|``. Both
    unitaries are normal, so a resolvent norm is the inverse distance from the
    node to the spectrum.
    """
    S = as_unitary(S)
    T = as_unitary(T)
    _same_shape(S, T)
    if contour is None:
        contour = default_contour(S, T)
    ds = diagonalize_unitary(S, contour.phi)
    dt = diagonalize_unitary(T, contour.phi)

    lhs = trace_norm(ds.apply(1j * ds.eigenvalues) - dt.apply(1j * dt.eigenvalues))

    z, w = contour.nodes()
    rs = 1.0 / np.abs(z[:, None] - ds.spectrum()[None, :]).min(axis=1)
    rt = 1.0 / np.abs(z[:, None] - dt.spectrum()[None, :]).min(axis=1)
    worst = max(rs.max(), rt.max())
    if not np.isfinite(worst) or worst > RESOLVENT_LIMIT:
        raise ContourTooTight(f"resolvent norm {worst:.3e} on the contour")
    sup = float((rs * rt).max())
    integral = float(np.sum(w * np.abs(np.log(z))))
    C = sup * integral / (4 * np.pi ** 2)
    rhs = 2 * np.pi * C * trace_norm(S - T)
    holds = lhs <= rhs + 1e-8 * (1 + rhs)
    return LogLipschitzReport(lhs, C, rhs, bool(holds), sup, integral)


# ---------------------------------------------------------------------------
# matrix container
# ---------------------------------------------------------------------------

MAGIC = b"BOTTMAT\x01"
KIND_TAGS = {"general": 0, "hermitian": 1, "unitary": 2}
_HEADER = struct.Struct("<8sQB7x")


def _validate_kind(M, kind: str) -> np.ndarray:
    if kind == "hermitian":
        return as_hermitian(M)
    if kind == "unitary":
        return as_unitary(M)
    if kind == "general":
        return as_matrix(M)
    raise ValueError(f"unknown matrix kind {kind!r}")


def save_matrix(path, M, kind: str = "general") -> None:
    """Write a matrix to the container format.

    Binary layout (little-endian): 8-byte magic, uint64 dimension, uint8 kind
    tag, 7 padding bytes, then ``dim * dim`` (re, im) float64 pairs in
    row-major order. A path ending in ``.txt`` selects the text variant: a
    header line ``BOTTMAT 1 <dim> <kind>`` followed by one line per row of
    interleaved ``re im`` values printed with 17 significant digits.
    """
    A = _validate_kind(M, kind)
    path = Path(path)
    n = A.shape[0]
    if path.suffix == ".txt":
        lines = [f"BOTTMAT 1 {n} {kind}"]
        for row in A:
            lines.append(" ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row))
        path.write_text("\n".join(lines) + "\n")
        return
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, KIND_TAGS[kind]))
        fh.write(np.ascontiguousarray(A, dtype="<c16").tobytes())


def load_matrix(path) -> tuple[np.ndarray, str]:
    """Read a container written by :func:`save_matrix`; returns ``(matrix, kind)``."""
    path = Path(path)
    if path.suffix == ".txt":
        lines = path.read_text().splitlines()
        head = lines[0].split()
        if len(head) != 4 or head[0] != "BOTTMAT" or head[1] != "1":
            raise InvalidMatrix(f"{path}: bad text container header")
        n, kind = int(head[2]), head[3]
        vals = np.array([[float(x) for x in ln.split()] for ln in lines[1:1 + n]])
        if vals.shape != (n, 2 * n):
            raise InvalidMatrix(f"{path}: expected {n} rows of {2 * n} values")
        A = vals[:, 0::2] + 1j * vals[:, 1::2]
        return _validate_kind(A, kind), kind
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise InvalidMatrix(f"{path}: truncated header")
    magic, n, tag = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidMatrix(f"{path}: not a matrix container")
    kinds = {v: k for k, v in KIND_TAGS.items()}
    if tag not in kinds:
        raise InvalidMatrix(f"{path}: unknown kind tag {tag}")
    body = data[_HEADER.size:]
    if len(body) != 16 * n * n:
        raise InvalidMatrix(f"{path}: payload size does not match dimension {n}")
    A = np.frombuffer(body, dtype="<c16").reshape(n, n)
    return _validate_kind(A, kinds[tag]), kinds[tag]
