"""Bott index of unitary and invertible pairs, the Chern trace, and executable
forms of the index theorems (homotopy invariance, logarithmic law, the
``g(t)`` curve, the vanishing bound and the ``e^{iA} U`` factorization).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import matcore as mc
from .errors import (
    BranchCutViolation,
    CommutatorTooLarge,
    DimensionMismatch,
    HypothesisViolated,
    InvalidMatrix,
    NotAProjection,
    RoundingAmbiguous,
    SingularMatrix,
    TraceNotImaginary,
)

TWO_PI = 2.0 * math.pi
PROJECTION_TOL = 1e-10
REAL_PART_TOL = 1e-8


@dataclass(frozen=True)
class BottResult:
    raw_trace: complex
    value: int
    residual: float
    comm_norm: float
    comm_trace_norm: float
    min_branch_distance: float

    def as_dict(self) -> dict:
        return {
            "raw_trace_re": self.raw_trace.real,
            "raw_trace_im": self.raw_trace.imag,
            "value": self.value,
            "residual": self.residual,
            "comm_norm": self.comm_norm,
            "comm_trace_norm": self.comm_trace_norm,
            "min_branch_distance": self.min_branch_distance,
        }


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def _to_result(raw: complex, comm: np.ndarray, branch_distance: float,
               rounding_guard: float) -> BottResult:
    if abs(raw.real) > REAL_PART_TOL * (1 + abs(raw)):
        raise TraceNotImaginary(f"log-trace has real part {raw.real:.3e}")
    x = raw / (2j * math.pi)
    value = round_half_away(x.real)
    residual = abs(x - value)
    if residual >= rounding_guard:
        raise RoundingAmbiguous(f"index {x.real:.6f} is {residual:.3e} from the nearest integer")
    s = mc._svdvals(comm)
    return BottResult(complex(raw), value, float(residual), float(s[0]), float(s.sum()),
                      float(branch_distance))


def _pair(U, V) -> tuple[np.ndarray, np.ndarray]:
    U = mc.as_unitary(U)
    V = mc.as_unitary(V)
    if U.shape != V.shape:
        raise DimensionMismatch(f"shapes differ: {U.shape} vs {V.shape}")
    return U, V


def _commutator_product(U, V) -> np.ndarray:
    return U @ V @ U.conj().T @ V.conj().T


def _bott_unitary(U, V, branch_tol, rounding_guard):
    U, V = _pair(U, V)
    W = _commutator_product(U, V)
    try:
        dec = mc.diagonalize_unitary(W, branch_tol)
    except BranchCutViolation as exc:
        raise CommutatorTooLarge(f"UVU*V* has {exc}") from exc
    raw = 1j * float(np.sum(dec.eigenvalues))
    res = _to_result(raw, U @ V - V @ U, dec.branch_distance(), rounding_guard)
    return res, dec


def bott_index(U, V, branch_tol: float = mc.DEFAULT_BRANCH_TOL,
               rounding_guard: float = 0.5) -> BottResult:
    """``(1/2 pi i) Tr log(U V U^* V^*)`` for a pair of unitaries.

    The trace of the principal log is the sum of the eigenphases of the
    commutator product. The pair is rejected with :class:`CommutatorTooLarge`
    when an eigenphase lies within ``branch_tol`` of +-pi, i.e. when
    ``||[U, V]|| < 2`` fails or is too close to failing.
    """
    return _bott_unitary(U, V, branch_tol, rounding_guard)[0]


def bott_index_invertible(rho, eta, branch_tol: float = mc.DEFAULT_BRANCH_TOL,
                          rounding_guard: float = 0.5, cond_limit: float = 1e14) -> BottResult:
    """Bott index of two invertible matrices.

    Sums ``log |lam_j| + i arg lam_j`` over the eigenvalues of
    ``rho eta rho^-1 eta^-1``; the moduli cancel because the determinant is
    one, leaving ``(1/2 pi) sum arg lam_j``.
    """
    rho = mc.as_matrix(rho)
    eta = mc.as_matrix(eta)
    if rho.shape != eta.shape:
        raise DimensionMismatch(f"shapes differ: {rho.shape} vs {eta.shape}")
    inv = []
    for name, M in (("rho", rho), ("eta", eta)):
        c = np.linalg.cond(M)
        if not np.isfinite(c) or c > cond_limit:
            raise SingularMatrix(f"{name} is numerically singular (cond {c:.3e})")
        inv.append(np.linalg.inv(M))
    M = rho @ eta @ inv[0] @ inv[1]
    lam = mc.eigvals_general(M)
    mc._check_invertible_spectrum(lam, M, branch_tol, 1e-12)
    raw = complex(np.sum(np.log(np.abs(lam))), np.sum(np.angle(lam)))
    dist = float(np.min(np.pi - np.abs(np.angle(lam))))
    return _to_result(raw, rho @ eta - eta @ rho, dist, rounding_guard)


def polar_decompose(rho, tol: float = 1e-13) -> tuple[np.ndarray, np.ndarray]:
    """Right polar decomposition ``rho = U_rho |rho|`` through the SVD."""
    A = mc.as_matrix(rho)
    W, s, Vh = np.linalg.svd(A)
    if s[-1] <= tol * max(s[0], 1.0):
        raise SingularMatrix(f"smallest singular value {s[-1]:.3e}")
    U = W @ Vh
    absrho = (Vh.conj().T * s) @ Vh
    return mc.as_unitary(U), mc.as_hermitian(absrho)


def _projection_matrix(P) -> np.ndarray:
    P = getattr(P, "matrix", P)
    try:
        P = mc.as_hermitian(P)
    except InvalidMatrix as exc:
        raise NotAProjection(str(exc)) from exc
    defect = np.abs(P @ P - P).max()
    if defect > PROJECTION_TOL:
        raise NotAProjection(f"max|P^2 - P| = {defect:.3e}")
    return P


def chern_trace(P, Lx, Ly) -> complex:
    """``2 pi i Tr[P Lx P, P Ly P]``.

    For Hermitian arguments the commutator trace is purely imaginary, so the
    result is real up to roundoff. On a finite-dimensional space the trace of
    any commutator vanishes, so this is zero up to roundoff as well; the
    value is meaningful as a cross-check of the Bott index only through that
    identity.
    """
    P = _projection_matrix(P)
    A = P @ np.asarray(Lx) @ P
    B = P @ np.asarray(Ly) @ P
    return 2j * math.pi * mc.trace_of_commutator(A, B)


def windowed_chern_trace(P, Lx, Ly, window) -> complex:
    """``2 pi i`` times the commutator trace restricted to the sites in ``window``.

    ``window`` is a boolean mask over the basis. Unlike :func:`chern_trace`
    this partial trace does not vanish identically: around a crossing of the
    two switches it approximates the Chern number of the filled bands.
    """
    P = _projection_matrix(P)
    A = P @ np.asarray(Lx) @ P
    B = P @ np.asarray(Ly) @ P
    mask = np.asarray(window, dtype=bool)
    diag = np.einsum("ij,ji->i", A, B) - np.einsum("ij,ji->i", B, A)
    return complex(2j * math.pi * diag[mask].sum())


# ---------------------------------------------------------------------------
# g(t) curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveSample:
    t: float
    g_value: complex
    predicted: complex
    defect: float


class _Flow:
    """``t -> exp(t G)`` for a skew-Hermitian generator ``G``."""

    def __init__(self, G):
        G = mc.as_matrix(G)
        try:
            self.dec = mc.eig_hermitian(-1j * G)
        except InvalidMatrix as exc:
            raise InvalidMatrix(f"generator is not skew-Hermitian: {exc}") from exc
        self.G = G

    def __call__(self, t: float) -> np.ndarray:
        return self.dec.apply(np.exp(1j * t * self.dec.eigenvalues))


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def g_curve(generators: Sequence, t_samples: Sequence[float],
            branch_tol: float = mc.DEFAULT_BRANCH_TOL, workers: int = 1) -> list[CurveSample]:
    """Sample ``g(t) = Tr log(...)`` against its closed form ``t^2 Tr[...]``.

    Two generators ``(A, B)``: the product ``e^{tA} e^{tB} e^{-tA} e^{-tB}``
    and prediction ``t^2 Tr[A, B]``. Three generators ``(A, B, C)``: the
    product ``e^{tA} e^{tB} e^{tC} e^{-tB} e^{-tA} e^{-tC}`` and prediction
    ``t^2 (Tr[A, C] + Tr[B, C])``. Generators are skew-Hermitian.
    """
    if len(generators) not in (2, 3):
        raise ValueError("g_curve takes two or three generators")
    flows = [_Flow(G) for G in generators]
    shapes = {f.G.shape for f in flows}
    if len(shapes) != 1:
        raise DimensionMismatch(f"generator shapes differ: {sorted(shapes)}")
    Gs = [f.G for f in flows]
    if len(Gs) == 2:
        base = mc.trace_of_commutator(Gs[0], Gs[1])
    else:
        base = mc.trace_of_commutator(Gs[0], Gs[2]) + mc.trace_of_commutator(Gs[1], Gs[2])

    def sample(t: float) -> CurveSample:
        t = float(t)
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t={t} outside [0, 1]")
        E = [f(t) for f in flows]
        if len(E) == 2:
            A, B = E
            W = A @ B @ A.conj().T @ B.conj().T
        else:
            A, B, C = E
            AB = A @ B
            W = AB @ C @ AB.conj().T @ C.conj().T
        try:
            dec = mc.diagonalize_unitary(W, branch_tol)
        except BranchCutViolation as exc:
            raise BranchCutViolation(f"at t={t:g}: {exc}") from exc
        g = 1j * float(np.sum(dec.eigenvalues))
        pred = t * t * base
        return CurveSample(t, g, pred, float(abs(g - pred)))

    return _map(sample, list(t_samples), workers)


# ---------------------------------------------------------------------------
# logarithmic law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogLawResult:
    """Both sides of the trace identity and of the Bott additivity.

    ``lhs`` is ``Tr log`` of the commutator product of ``(e^{iA} e^{iB},
    e^{iC})`` and ``rhs`` the sum of ``Tr log`` for ``(e^{iA}, e^{iC})`` and
    ``(e^{iB}, e^{iC})``. ``rhs_ab_bc`` keeps the variant pairing ``(A, B)``
    with ``(B, C)`` for comparison.
    """

    lhs: complex
    rhs: complex
    bott_lhs: int
    bott_rhs_sum: int
    rhs_ab_bc: complex
    max_hypothesis_norm: float


HYPOTHESIS_PAIRS = {
    "theorem": (("A", "B"), ("C", "B")),
    "proof": (("A", "C"), ("B", "C")),
}
HYPOTHESIS_PAIRS["both"] = HYPOTHESIS_PAIRS["theorem"] + HYPOTHESIS_PAIRS["proof"]


def _log_trace(U, V, branch_tol) -> complex:
    W = _commutator_product(U, V)
    dec = mc.diagonalize_unitary(W, branch_tol)
    return 1j * float(np.sum(dec.eigenvalues))


def log_law_check(A, B, C, grid: int = 32, bound: float = 1.0, margin: float = 0.05,
                  hypotheses: str = "both",
                  branch_tol: float = mc.DEFAULT_BRANCH_TOL) -> LogLawResult:
    """Evaluate the logarithmic law for Hermitian ``A, B, C``.

    The commutator-norm hypotheses ``||[e^{itX}, e^{itY}]|| < bound`` are
    checked with ``margin`` on ``grid + 1`` equally spaced times in [0, 1].
    ``hypotheses`` selects the pairs: ``"theorem"`` uses (A, B) and (C, B),
    ``"proof"`` uses (A, C) and (B, C), ``"both"`` all four.
    """
    if hypotheses not in HYPOTHESIS_PAIRS:
        raise ValueError(f"hypotheses must be one of {sorted(HYPOTHESIS_PAIRS)}")
    decs = {k: mc.eig_hermitian(M) for k, M in (("A", A), ("B", B), ("C", C))}
    if len({d.frame.shape for d in decs.values()}) != 1:
        raise DimensionMismatch("A, B, C must have equal dimensions")

    def e(k: str, t: float) -> np.ndarray:
        d = decs[k]
        return d.apply(np.exp(1j * t * d.eigenvalues))

    worst = 0.0
    for t in np.linspace(0.0, 1.0, grid + 1):
        for x, y in HYPOTHESIS_PAIRS[hypotheses]:
            n = mc.operator_norm(mc.commutator(e(x, t), e(y, t)))
            worst = max(worst, n)
            if n >= bound - margin:
                raise HypothesisViolated(
                    f"||[e^(it{x}), e^(it{y})]|| = {n:.4f} >= {bound} - {margin} at t={t:.4f}",
                    t=float(t), norm=n)
    eA, eB, eC = e("A", 1.0), e("B", 1.0), e("C", 1.0)
    lhs = _log_trace(eA @ eB, eC, branch_tol)
    rhs = _log_trace(eA, eC, branch_tol) + _log_trace(eB, eC, branch_tol)
    rhs_ab_bc = _log_trace(eA, eB, branch_tol) + _log_trace(eB, eC, branch_tol)
    bott_lhs = bott_index(eA @ eB, eC, branch_tol).value
    bott_rhs = bott_index(eA, eC, branch_tol).value + bott_index(eB, eC, branch_tol).value
    return LogLawResult(lhs, rhs, bott_lhs, bott_rhs, rhs_ab_bc, worst)


# ---------------------------------------------------------------------------
# homotopy
# ---------------------------------------------------------------------------

class HomotopySample(NamedTuple):
    s: float
    bott: int | None
    comm_norm: float
    branch_distance: float


@dataclass(frozen=True)
class HomotopyReport:
    """Samples of ``Bott(e^{isA} U, e^{isB} V)`` along ``s`` in [0, 1].

    ``path_admissible`` requires every sample to be computable with
    ``||[U(s), V(s)]|| < 2`` and, in addition, the Lipschitz certificate
    ``(c_k + c_{k+1} + L h) / 2 < 2`` on every interval, where
    ``L = 2 (||A|| + ||B||)`` bounds the speed of the commutator norm. A jump
    of the index between two samples can only hide in an interval where the
    certificate fails.
    """

    samples: list[HomotopySample]
    constant: bool
    path_admissible: bool
    sampled_admissible: bool
    lipschitz: float

    @property
    def values(self) -> list[int | None]:
        return [x.bott for x in self.samples]


def homotopy_scan(U, V, A, B, n_steps: int = 16, branch_tol: float = mc.DEFAULT_BRANCH_TOL,
                  workers: int = 1) -> HomotopyReport:
    if n_steps < 2:
        raise ValueError("n_steps must be at least 2")
    U, V = _pair(U, V)
    da = mc.eig_hermitian(A)
    db = mc.eig_hermitian(B)
    if da.frame.shape != U.shape or db.frame.shape != U.shape:
        raise DimensionMismatch("generators must match the unitaries' dimension")

    def sample(k: int) -> HomotopySample:
        s = k / n_steps
        Us = da.apply(np.exp(1j * s * da.eigenvalues)) @ U
        Vs = db.apply(np.exp(1j * s * db.eigenvalues)) @ V
        try:
            r = bott_index(Us, Vs, branch_tol)
            return HomotopySample(s, r.value, r.comm_norm, r.min_branch_distance)
        except CommutatorTooLarge:
            W = _commutator_product(Us, Vs)
            th = np.angle(np.linalg.eigvals(W))
            return HomotopySample(s, None, mc.operator_norm(Us @ Vs - Vs @ Us),
                                  float(np.min(np.pi - np.abs(th))))

    samples = _map(sample, range(n_steps + 1), workers)
    values = [x.bott for x in samples]
    constant = None not in values and len(set(values)) == 1
    sampled = None not in values and all(x.comm_norm < 2 for x in samples)
    lip = 2.0 * (np.abs(da.eigenvalues).max() + np.abs(db.eigenvalues).max())
    h = 1.0 / n_steps
    certified = sampled and all(
        (a.comm_norm + b.comm_norm + lip * h) / 2 < 2 for a, b in zip(samples, samples[1:])
    )
    return HomotopyReport(samples, constant, bool(certified), bool(sampled), float(lip))


# ---------------------------------------------------------------------------
# vanishing bound and trace-class differences
# ---------------------------------------------------------------------------

class VanishingReport(NamedTuple):
    bott: int
    log_trace_norm_over_2pi: float
    quarter_comm_trace_norm: float


def vanishing_check(U, V, branch_tol: float = mc.DEFAULT_BRANCH_TOL) -> VanishingReport:
    """The chain ``|Bott| <= ||log UVU*V*||_1 / 2 pi <= ||[U, V]||_1 / 4``."""
    res, dec = _bott_unitary(U, V, branch_tol, 0.5)
    log_norm = mc.trace_norm(dec.apply(1j * dec.eigenvalues))
    return VanishingReport(res.value, log_norm / TWO_PI, res.comm_trace_norm / 4)


def unitary_difference_generator(U, V, branch_tol: float = mc.DEFAULT_BRANCH_TOL) -> np.ndarray:
    """Hermitian ``A`` with ``V = e^{iA} U``, namely ``-i log(V U^*)``."""
    U, V = _pair(U, V)
    L = mc.principal_log_unitary(V @ U.conj().T, branch_tol)
    return mc.as_hermitian(-1j * L)
