"""Independent oracles and batch property suites.

``fhs_chern_oracle`` computes the Chern number of the filled bands of a clean
Hofstadter torus in momentum space (link-variable plaquette fluxes), with no
reference to the real-space machinery. ``run_suite`` executes one seeded
property set and returns a :class:`SuiteVerdict` with per-trial records.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from . import indices as ix
from . import matcore as mc
from . import models as md
from .errors import (BottError, GaplessAtMu, GaugeInconsistent, HypothesisViolated,
                     NotTranslationInvariant, UnknownSuite)

# ---------------------------------------------------------------------------
# verdicts and ensembles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleSpec:
    n_trials: int = 20
    seed: int = 0
    scale: float = 0.1
    dim: int = 8

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def trial_seed(self, trial: int) -> int:
        return self.seed ^ trial

    def rng(self, trial: int) -> np.random.Generator:
        return np.random.default_rng(self.trial_seed(trial))


@dataclass
class TrialRecord:
    trial: int
    digest: str
    passed: bool
    defect: float
    values: dict = field(default_factory=dict)


@dataclass
class SuiteVerdict:
    suite_name: str
    trials: int
    failures: int
    worst_defect: float
    details: list[TrialRecord]

    @classmethod
    def from_records(cls, name: str, records: list[TrialRecord]) -> "SuiteVerdict":
        records = sorted(records, key=lambda r: r.trial)
        finite = [r.defect for r in records if math.isfinite(r.defect)]
        worst = max(finite) if finite else 0.0
        if any(not math.isfinite(r.defect) for r in records):
            worst = math.inf
        return cls(name, len(records), sum(not r.passed for r in records), worst, records)

    @property
    def passed(self) -> bool:
        return self.failures == 0


def digest(*arrays) -> str:
    """Short SHA-256 over the raw bytes of the given arrays."""
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# random matrices
# ---------------------------------------------------------------------------


def random_hermitian(rng: np.random.Generator, dim: int, norm: float) -> np.ndarray:
    """GUE sample rescaled to operator norm ``norm``."""
    X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    H = (X + X.conj().T) / 2
    n = mc.operator_norm(H)
    return mc.as_hermitian(H * (norm / n) if n > 0 else H)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar unitary from the QR factorization of a Ginibre matrix."""
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_admissible_pair(ens: EnsembleSpec, trial: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``(e^{iA}, e^{iB})`` with Hermitian ``A, B`` of norm ``ens.scale``.

    ``||[U, V]|| <= 2 ||A|| ||B|| + O(scale^3)``, so the pair is admissible
    for ``scale`` well below 1. Deterministic in ``(ens.seed, trial)``.
    """
    rng = ens.rng(trial)
    A = random_hermitian(rng, ens.dim, ens.scale)
    B = random_hermitian(rng, ens.dim, ens.scale)
    return mc.exp_i_hermitian(A), mc.exp_i_hermitian(B)


def golden_pair() -> tuple[np.ndarray, np.ndarray]:
    """The 3x3 pair with ``Bott(U, V) = -1`` and ``Bott(U^2, V) = +1``."""
    U = np.roll(np.eye(3, dtype=np.complex128), 1, axis=0)
    w = np.exp(2j * math.pi / 3)
    V = np.diag([w, np.conj(w), 1.0]).astype(np.complex128)
    return U, V


# ---------------------------------------------------------------------------
# momentum-space Chern oracle
# ---------------------------------------------------------------------------


def bloch_hamiltonian(kx: float, Ky: float, params: md.ModelParams) -> np.ndarray:
    """Hofstadter Bloch matrix on a magnetic cell of ``q`` sites along y.

    ``kx`` is the momentum along x, ``Ky`` the momentum conjugate to a
    translation by the whole cell.
    """
    q, a, t = params.flux_q, params.flux_p / params.flux_q, params.hopping
    y = np.arange(q)
    F = np.zeros((q, q), dtype=np.complex128)
    F[y[1:], y[:-1]] = -t
    F[0, q - 1] += -t * np.exp(-1j * Ky)
    H = F + F.conj().T
    H[y, y] += -2 * t * np.cos(kx - 2 * math.pi * a * y)
    return H


MIN_GRID = 8


def _momentum_grid(spec: md.LatticeSpec, params: md.ModelParams, min_points: int = 1):
    """Momenta of the magnetic Brillouin zone of the torus.

    Each direction is refined by an integer factor until it has at least
    ``min_points`` points, so the torus momenta are always included.
    """
    Nx, Ny = spec.Lx, spec.Ly // params.flux_q
    Nx *= -(-min_points // Nx)
    Ny *= -(-min_points // Ny)
    return 2 * math.pi * np.arange(Nx) / Nx, 2 * math.pi * np.arange(Ny) / Ny


def bloch_spectrum(spec: md.LatticeSpec, params: md.ModelParams) -> np.ndarray:
    """Sorted union of Bloch spectra over the magnetic Brillouin zone."""
    kxs, Kys = _momentum_grid(spec, params)
    E = [np.linalg.eigvalsh(bloch_hamiltonian(kx, Ky, params)) for kx in kxs for Ky in Kys]
    return np.sort(np.concatenate(E))


def _check_clean_torus(spec: md.LatticeSpec, params: md.ModelParams) -> None:
    if params.disorder_W != 0:
        raise NotTranslationInvariant(f"disorder_W = {params.disorder_W:g} breaks translation symmetry")
    if spec.boundary != "torus":
        raise NotTranslationInvariant("the momentum-space oracle needs a torus")
    if spec.orbitals_per_site != 1:
        raise NotTranslationInvariant("the momentum-space oracle handles one orbital per site")
    if spec.Ly % params.flux_q:
        raise GaugeInconsistent(f"flux denominator {params.flux_q} does not divide Ly={spec.Ly}")


def fhs_chern_oracle(spec: md.LatticeSpec, params: md.ModelParams, mu: float,
                     min_gap: float = 1e-3, min_points: int = MIN_GRID) -> int:
    """Chern number of the bands below ``mu`` from lattice plaquette fluxes.

    Link variables ``U_j(k) = det <u(k)|u(k + e_j)>`` over the occupied
    frames; the plaquette flux is the principal argument of their product
    around each cell of the ``Lx x (Ly/q)`` momentum grid. The total is an
    integer for any grid and independent of the eigenvector phases, but it
    equals the band Chern number only once every plaquette flux is small; a
    grid direction with fewer than ``min_points`` momenta is refined.
    """
    _check_clean_torus(spec, params)
    kxs, Kys = _momentum_grid(spec, params, min_points)
    Nx, Ny = len(kxs), len(Kys)
    frames = np.empty((Nx, Ny), dtype=object)
    n_occ = None
    for i, kx in enumerate(kxs):
        for j, Ky in enumerate(Kys):
            E, W = np.linalg.eigh(bloch_hamiltonian(kx, Ky, params))
            close = np.abs(E - mu).min()
            if close < min_gap / 2:
                raise GaplessAtMu(f"Bloch level {close:.3e} away from mu={mu:g}")
            n = int(np.count_nonzero(E < mu))
            if n_occ is None:
                n_occ = n
            elif n != n_occ:
                raise GaplessAtMu(f"mu={mu:g} is not in a band gap (occupation varies over k)")
            frames[i, j] = W[:, :n]
    if not n_occ:
        return 0

    def link(a, b) -> complex:
        d = np.linalg.det(a.conj().T @ b)
        return d / abs(d)

    total = 0.0
    for i in range(Nx):
        for j in range(Ny):
            u = frames[i, j]
            ux = frames[(i + 1) % Nx, j]
            uy = frames[i, (j + 1) % Ny]
            uxy = frames[(i + 1) % Nx, (j + 1) % Ny]
            loop = link(u, ux) * link(ux, uxy) * np.conj(link(uy, uxy)) * np.conj(link(u, uy))
            total += np.angle(loop)
    c = total / (2 * math.pi)
    return int(round(c))


# ---------------------------------------------------------------------------
# Hofstadter instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """A clean gapped Hofstadter torus with ramped switches."""

    L: int
    flux_p: int
    flux_q: int
    filling: int
    ramp: float

    @property
    def label(self) -> str:
        return f"{self.L}x{self.L} flux {self.flux_p}/{self.flux_q} gap {self.filling} ramp {self.ramp:g}"

    def lattice(self) -> md.LatticeSpec:
        return md.LatticeSpec(self.L, self.L)

    def params(self) -> md.ModelParams:
        return md.ModelParams(self.flux_p, self.flux_q)


def hofstadter_instances(min_gap: float = 0.1) -> list[Instance]:
    """Every resolvable gap of flux 1/3 (12x12), 1/4 (16x16) and 1/6 (24x24).

    Ramps span half the linear size.
    """
    out = []
    for L, q in ((12, 3), (16, 4), (24, 6)):
        H = md.build_hofstadter(md.LatticeSpec(L, L), md.ModelParams(1, q))
        for r, _, _ in md.band_gap_centers(H, q, min_gap):
            out.append(Instance(L, 1, q, r, L / 2))
    return out


@dataclass(frozen=True)
class PLPEvaluation:
    """Everything computed for one Hofstadter instance."""

    mu: float
    gap: float
    filled: int
    bott: ix.BottResult | None
    bott_error: BottError | None
    chern_trace: complex
    windowed_chern: complex
    fhs: int | None
    bounds: md.CommutatorBoundReport


def evaluate_plp(spec: md.LatticeSpec, params: md.ModelParams, mu: float,
                 switch_x: md.SwitchProfile, switch_y: md.SwitchProfile,
                 min_gap: float = 1e-3, branch_tol: float = mc.DEFAULT_BRANCH_TOL,
                 rounding_guard: float = 0.5, H: np.ndarray | None = None) -> PLPEvaluation:
    """Build ``H, P, Lambda_x, Lambda_y`` and every index attached to them."""
    if H is None:
        H = md.build_hofstadter(spec, params)
    P = md.fermi_projection(H, mu, min_gap)
    Lx = md.switch_operator(spec, "x", switch_x)
    Ly = md.switch_operator(spec, "y", switch_y)
    U, V = md.plp_unitary(P, Lx), md.plp_unitary(P, Ly)
    try:
        bott, err = ix.bott_index(U, V, branch_tol, rounding_guard), None
    except BottError as exc:
        bott, err = None, exc
    ct = ix.chern_trace(P, Lx, Ly)
    wct = ix.windowed_chern_trace(P, Lx, Ly, md.central_window(spec))
    try:
        fhs = fhs_chern_oracle(spec, params, mu, min_gap)
    except (NotTranslationInvariant, GaugeInconsistent, GaplessAtMu):
        fhs = None
    bounds = md.commutator_bound_report(H, P, Lx, Ly, params.range_R,
                                        switch_x.width, unitaries=(U, V))
    return PLPEvaluation(mu, P.gap, P.filled, bott, err, ct, wct, fhs, bounds)


def _instance_eval(inst: Instance) -> PLPEvaluation:
    spec, params = inst.lattice(), inst.params()
    H = md.build_hofstadter(spec, params)
    r, mu, _ = next(g for g in md.band_gap_centers(H, inst.flux_q, 0.0) if g[0] == inst.filling)
    ramp = md.SwitchProfile.ramp(inst.ramp)
    return evaluate_plp(spec, params, mu, ramp, ramp, H=H)


def g_curve_instance() -> tuple[np.ndarray, np.ndarray]:
    """Skew-Hermitian ``2 pi i P Lambda P`` generators on an 8x8 flux-1/4 torus.

    With full-width ramps every ``e^{tA}, e^{tB}``, ``t`` in [0, 1], stays
    away from the branch cut.
    """
    spec, params = md.LatticeSpec(8, 8), md.ModelParams(1, 4)
    H = md.build_hofstadter(spec, params)
    _, mu, _ = md.band_gap_centers(H, 4)[0]
    P = md.fermi_projection(H, mu).matrix
    ramp = md.SwitchProfile.ramp(8.0)
    Lx, Ly = md.switch_operator(spec, "x", ramp), md.switch_operator(spec, "y", ramp)
    return 2j * math.pi * (P @ Lx @ P), 2j * math.pi * (P @ Ly @ P)


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

G_TIMES = tuple(round(0.1 * k, 10) for k in range(1, 11))


def _integrality(ens: EnsembleSpec, trial: int) -> TrialRecord:
    if trial < 2:
        U, V = golden_pair()
        if trial == 1:
            U = U @ U
        r = ix.bott_index(U, V)
        want = -1 if trial == 0 else 1
        return TrialRecord(trial, digest(U, V), r.value == want and r.residual < 1e-10,
                           r.residual, {"bott": r.value, "expected": want})
    rng = ens.rng(trial)
    U, V = random_admissible_pair(ens, trial)
    W = random_unitary(rng, ens.dim)
    r = ix.bott_index(U, V)
    swapped = ix.bott_index(V, U).value
    conj = ix.bott_index(W @ U @ W.conj().T, W @ V @ W.conj().T).value
    ok = r.residual < 1e-6 and swapped == -r.value and conj == r.value
    return TrialRecord(trial, digest(U, V, W), ok, r.residual,
                       {"bott": r.value, "swapped": swapped, "conjugated": conj})


def _homotopy(ens: EnsembleSpec, trial: int) -> TrialRecord:
    U, V = golden_pair()
    rng = ens.rng(trial)
    scale = min(ens.scale, 0.1)
    A = random_hermitian(rng, 3, rng.uniform(0, scale))
    B = random_hermitian(rng, 3, rng.uniform(0, scale))
    rep = ix.homotopy_scan(U, V, A, B, 16)
    ok = rep.path_admissible and rep.constant and rep.values[0] == -1
    return TrialRecord(trial, digest(A, B), ok, float(max(x.comm_norm for x in rep.samples)),
                       {"values": rep.values, "path_admissible": rep.path_admissible})


def _loglaw(ens: EnsembleSpec, trial: int) -> TrialRecord:
    rng = ens.rng(trial)
    s = min(ens.scale, 0.6)
    A, B, C = (random_hermitian(rng, ens.dim, s * rng.uniform(0.5, 1.0)) for _ in range(3))
    try:
        res = ix.log_law_check(A, B, C)
    except HypothesisViolated as exc:
        return TrialRecord(trial, digest(A, B, C), False, math.inf,
                           {"error": str(exc), "t": exc.t, "norm": exc.norm})
    d = abs(res.lhs - res.rhs)
    ok = d < 1e-8 and res.bott_lhs == res.bott_rhs_sum
    return TrialRecord(trial, digest(A, B, C), ok, d,
                       {"bott_lhs": res.bott_lhs, "bott_rhs_sum": res.bott_rhs_sum,
                        "max_hypothesis_norm": res.max_hypothesis_norm})


def _invertible(ens: EnsembleSpec, trial: int) -> TrialRecord:
    U, V = golden_pair()
    rng = ens.rng(trial)
    K, R, S, T = (random_hermitian(rng, 3, rng.uniform(0, 0.05)) for _ in range(4))
    rho = U @ sla.expm(K + 1j * R)
    eta = V @ sla.expm(S + 1j * T)
    r = ix.bott_index_invertible(rho, eta)
    ref = ix.bott_index(U, V).value
    return TrialRecord(trial, digest(rho, eta), r.value == ref == -1, r.residual,
                       {"bott_invertible": r.value, "bott": ref})


_INSTANCE_CACHE: dict[Instance, PLPEvaluation] = {}


def cached_instance(inst: Instance) -> PLPEvaluation:
    if inst not in _INSTANCE_CACHE:
        _INSTANCE_CACHE[inst] = _instance_eval(inst)
    return _INSTANCE_CACHE[inst]


def _instance_for(trial: int) -> Instance:
    insts = hofstadter_instances()
    return insts[trial % len(insts)]


def _bott_chern(ens: EnsembleSpec, trial: int) -> TrialRecord:
    inst = _instance_for(trial)
    ev = cached_instance(inst)
    ct = ev.chern_trace.real
    vals = {"instance": inst.label, "mu": ev.mu, "chern_trace": ct,
            "windowed_chern": ev.windowed_chern.real, "fhs": ev.fhs}
    if ev.bott is None:
        vals["error"] = f"{type(ev.bott_error).__name__}: {ev.bott_error}"
        return TrialRecord(trial, inst.label, False, math.inf, vals)
    vals["bott"] = ev.bott.value
    d = abs(ev.bott.value - ct)
    ok = d < 1e-6 and ev.bott.value == ev.fhs
    return TrialRecord(trial, inst.label, ok, d, vals)


def _appendix_a(ens: EnsembleSpec, trial: int) -> TrialRecord:
    rng = ens.rng(trial)
    S = mc.exp_i_hermitian(random_hermitian(rng, ens.dim, rng.uniform(0.05, math.pi / 2)))
    T = mc.exp_i_hermitian(random_hermitian(rng, ens.dim, rng.uniform(0.05, math.pi / 2)))
    rep = mc.log_difference_bound_check(S, T)
    return TrialRecord(trial, digest(S, T), rep.holds, max(0.0, rep.lhs - rep.rhs),
                       {"lhs": rep.lhs, "rhs": rep.rhs, "C": rep.rhs_factor})


def _appendix_b(ens: EnsembleSpec, trial: int) -> TrialRecord:
    if trial == 0:
        U, V = golden_pair()
        rep = ix.vanishing_check(U, V)
        ok = (abs(rep.bott) <= rep.log_trace_norm_over_2pi + 1e-8
              and rep.log_trace_norm_over_2pi <= rep.quarter_comm_trace_norm + 1e-8
              and 4 * rep.quarter_comm_trace_norm >= 4)
        return TrialRecord(0, digest(U, V), ok, 0.0, rep._asdict())
    rng = ens.rng(trial)
    A = random_hermitian(rng, ens.dim, 1.0)
    B = random_hermitian(rng, ens.dim, 1.0)
    eps = ens.scale
    while True:
        U, V = mc.exp_i_hermitian(A, eps), mc.exp_i_hermitian(B, eps)
        if mc.trace_norm(U @ V - V @ U) < 4:
            break
        eps /= 2
    rep = ix.vanishing_check(U, V)
    slack = min(rep.log_trace_norm_over_2pi - abs(rep.bott),
                rep.quarter_comm_trace_norm - rep.log_trace_norm_over_2pi)
    ok = rep.bott == 0 and slack >= -1e-8
    return TrialRecord(trial, digest(U, V), ok, max(0.0, -slack), rep._asdict())


def _appendix_c(ens: EnsembleSpec, trial: int) -> TrialRecord:
    rng = ens.rng(trial)
    U = random_unitary(rng, ens.dim)
    V = mc.exp_i_hermitian(random_hermitian(rng, ens.dim, rng.uniform(0.1, 2.0))) @ U
    A = ix.unitary_difference_generator(U, V)
    recon = mc.operator_norm(mc.exp_i_hermitian(A) @ U - V)
    lhs = mc.trace_norm(A)
    rhs = math.pi / 2 * mc.trace_norm(np.eye(ens.dim) - V @ U.conj().T)
    ok = recon < 1e-9 and lhs <= rhs + 1e-8
    return TrialRecord(trial, digest(U, V), ok, recon,
                       {"reconstruction": recon, "trace_norm_A": lhs, "bound": rhs})


_G_CACHE: list = []


def _g_generators():
    if not _G_CACHE:
        _G_CACHE.append(g_curve_instance())
    return _G_CACHE[0]


def _g_curve(ens: EnsembleSpec, trial: int) -> TrialRecord:
    A, B = _g_generators()
    if trial == 0:
        gens, mode = (A, B), 2
    else:
        rng = ens.rng(trial)
        C = 1j * random_hermitian(rng, A.shape[0], min(ens.scale, 0.1))
        gens, mode = (A, B, C), 3
    curve = ix.g_curve(gens, G_TIMES)
    worst = max(s.defect for s in curve)
    return TrialRecord(trial, digest(*gens), worst < 1e-8, worst,
                       {"mode": mode, "g_at_1": curve[-1].g_value.imag})


def _bounds_chain(ens: EnsembleSpec, trial: int) -> TrialRecord:
    inst = _instance_for(trial)
    b = cached_instance(inst).bounds
    ok = b.chain_holds and b.holmgren_dominates
    return TrialRecord(trial, inst.label, ok, max(0.0, b.actual - b.chain_bound),
                       {"actual": b.actual, "chain_bound": b.chain_bound,
                        "comm_Lx_P": b.comm_Lx_P, "comm_Ly_P": b.comm_Ly_P})


@dataclass(frozen=True)
class Suite:
    runner: Callable[[EnsembleSpec, int], TrialRecord]
    result: str
    fixed_trials: int | None = None
    min_trials: int = 1


SUITES: dict[str, Suite] = {
    "integrality": Suite(_integrality, "integrality of the Bott index", min_trials=2),
    "homotopy": Suite(_homotopy, "homotopy invariance along e^{isA}U"),
    "loglaw": Suite(_loglaw, "logarithmic law for e^{iA}e^{iB} against e^{iC}"),
    "invertible": Suite(_invertible, "reduction of invertible pairs to their unitary parts"),
    "bott-chern": Suite(_bott_chern, "Bott index of the PLP unitaries equals the Chern trace"),
    "appendixA": Suite(_appendix_a, "Lipschitz bound for the principal logarithm"),
    "appendixB": Suite(_appendix_b, "vanishing bound |Bott| <= ||[U,V]||_1 / 4"),
    "appendixC": Suite(_appendix_c, "trace-class generator with V = e^{iA}U"),
    "g-curve": Suite(_g_curve, "g(t) = t^2 Tr[A,B] and its three-generator form"),
    "bounds-chain": Suite(_bounds_chain, "commutator chain for the PLP unitaries and Holmgren dominance"),
}

SUITE_NAMES = tuple(SUITES)

# Every theorem-level result and the suite that exercises it.
SUITE_MANIFEST: dict[str, str] = {
    "Bott index definition and integrality": "integrality",
    "homotopy invariance": "homotopy",
    "logarithmic law and its counterexample": "loglaw",
    "invertible pairs and polar decomposition": "invertible",
    "commutator bound chain and Holmgren bound": "bounds-chain",
    "Bott equals Chern trace": "bott-chern",
    "g(t) closed form": "g-curve",
    "logarithm Lipschitz bound": "appendixA",
    "vanishing bound": "appendixB",
    "trace-class generator factorization": "appendixC",
    "three-generator g(t) form": "g-curve",
}


def _guarded(runner, ens: EnsembleSpec, trial: int) -> TrialRecord:
    try:
        return runner(ens, trial)
    except BottError as exc:
        return TrialRecord(trial, "", False, math.inf, {"error": f"{type(exc).__name__}: {exc}"})


def run_suite(name: str, ens: EnsembleSpec | None = None, workers: int = 1) -> SuiteVerdict:
    """Run one named suite over ``ens.n_trials`` seeded trials."""
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    ens = ens or EnsembleSpec()
    suite = SUITES[name]
    n = ens.n_trials
    if name in ("bott-chern", "bounds-chain"):
        n = len(hofstadter_instances())
    n = max(n, suite.min_trials)

    def one(k: int) -> TrialRecord:
        return _guarded(suite.runner, ens, k)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, range(n)))
    else:
        records = [one(k) for k in range(n)]
    return SuiteVerdict.from_records(name, records)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def verdict_lines(verdict: SuiteVerdict) -> list[str]:
    """JSON lines: one per trial, then a summary line."""
    lines = []
    for r in verdict.details:
        lines.append(json.dumps(_jsonable({"suite": verdict.suite_name, **asdict(r)}), sort_keys=True))
    lines.append(json.dumps(_jsonable({
        "suite": verdict.suite_name, "summary": True, "trials": verdict.trials,
        "failures": verdict.failures, "worst_defect": verdict.worst_defect,
    }), sort_keys=True))
    return lines


def summary_table(verdicts: list[SuiteVerdict]) -> str:
    rows = [("suite", "trials", "failures", "worst_defect", "status")]
    for v in verdicts:
        rows.append((v.suite_name, str(v.trials), str(v.failures), f"{v.worst_defect:.3e}",
                     "PASS" if v.passed else "FAIL"))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)
