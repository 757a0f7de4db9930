"""Finite square-lattice tight-binding models.

Hofstadter Hamiltonian with uniform flux and on-site disorder, Fermi
projections, switch-function operators, the ``e^{2 pi i P L P}`` unitaries
and commutator-bound diagnostics.

Basis ordering: site ``(x, y)`` has index ``(x * Ly + y) * orbitals + o``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import matcore as mc
from .errors import DimensionGuard, GaplessAtMu, GaugeInconsistent, ThresholdOutOfRange

MAX_DIM = 4096
FOUR_PI_SQ = 4.0 * math.pi ** 2


@dataclass(frozen=True)
class LatticeSpec:
    Lx: int
    Ly: int
    boundary: Literal["torus", "open"] = "torus"
    orbitals_per_site: int = 1

    def __post_init__(self):
        if self.Lx < 1 or self.Ly < 1 or self.orbitals_per_site < 1:
            raise ValueError("lattice sizes and orbital count must be positive")
        if self.boundary not in ("torus", "open"):
            raise ValueError(f"boundary must be 'torus' or 'open', not {self.boundary!r}")
        if self.dim > MAX_DIM:
            raise DimensionGuard(f"Hilbert dimension {self.dim} exceeds {MAX_DIM}")

    @property
    def n_sites(self) -> int:
        return self.Lx * self.Ly

    @property
    def dim(self) -> int:
        return self.n_sites * self.orbitals_per_site

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer ``x`` and ``y`` of every basis vector."""
        x, y = np.meshgrid(np.arange(self.Lx), np.arange(self.Ly), indexing="ij")
        o = self.orbitals_per_site
        return np.repeat(x.ravel(), o), np.repeat(y.ravel(), o)

    def centered_coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates shifted so that the sample midpoint sits at zero."""
        x, y = self.coordinates()
        return x - (self.Lx - 1) / 2, y - (self.Ly - 1) / 2


@dataclass(frozen=True)
class ModelParams:
    """Flux ``flux_p / flux_q`` per plaquette, disorder width, hopping, seed."""

    flux_p: int = 0
    flux_q: int = 1
    disorder_W: float = 0.0
    hopping: float = 1.0
    seed: int = 0
    range_R: int = 1

    def __post_init__(self):
        if self.flux_q < 1:
            raise ValueError("flux_q must be at least 1")
        if math.gcd(self.flux_p, self.flux_q) != 1:
            raise ValueError(f"flux {self.flux_p}/{self.flux_q} is not in lowest terms")
        if self.disorder_W < 0:
            raise ValueError("disorder_W must be non-negative")
        if self.range_R < 1:
            raise ValueError("range_R must be a positive integer")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def flux(self) -> float:
        return self.flux_p / self.flux_q


def onsite_disorder(params: ModelParams, n_sites: int) -> np.ndarray:
    """Uniform values in ``[-W/2, W/2]``, one per site.

    Drawn from a Philox (counter-based) stream keyed by the seed; site ``i``
    always receives the ``i``-th draw, whatever the lattice shape.
    """
    if params.disorder_W == 0:
        return np.zeros(n_sites)
    gen = np.random.Generator(np.random.Philox(key=params.seed))
    return params.disorder_W * (gen.random(n_sites) - 0.5)


def build_hofstadter(spec: LatticeSpec, params: ModelParams) -> np.ndarray:
    """Nearest-neighbour Hofstadter Hamiltonian in the Landau gauge.

    The hop from ``(x, y)`` to ``(x + 1, y)`` carries ``-t exp(2 pi i (p/q) y)``;
    vertical hops carry ``-t``. On the torus the gauge is periodic only when
    ``q`` divides ``Ly``. Bonds that wrap onto the same pair of sites (a
    side of length 2) add up.
    """
    if spec.boundary == "torus" and spec.Ly % params.flux_q:
        raise GaugeInconsistent(
            f"flux denominator {params.flux_q} does not divide Ly={spec.Ly} on the torus"
        )
    Lx, Ly = spec.Lx, spec.Ly
    t = params.hopping
    a = params.flux_p / params.flux_q
    idx = np.arange(spec.n_sites).reshape(Lx, Ly)
    H = np.zeros((spec.n_sites, spec.n_sites), dtype=np.complex128)

    xs, ys = np.meshgrid(np.arange(Lx), np.arange(Ly), indexing="ij")
    periodic = spec.boundary == "torus"
    # x-bonds
    keep = np.ones_like(xs, dtype=bool) if periodic else xs < Lx - 1
    if Lx > 1 or periodic:
        src = idx[xs[keep], ys[keep]]
        dst = idx[(xs[keep] + 1) % Lx, ys[keep]]
        np.add.at(H, (dst, src), -t * np.exp(2j * np.pi * a * ys[keep]))
    # y-bonds
    keep = np.ones_like(ys, dtype=bool) if periodic else ys < Ly - 1
    if Ly > 1 or periodic:
        src = idx[xs[keep], ys[keep]]
        dst = idx[xs[keep], (ys[keep] + 1) % Ly]
        np.add.at(H, (dst, src), -t)
    H = H + H.conj().T
    H[np.diag_indices_from(H)] += onsite_disorder(params, spec.n_sites)
    if spec.orbitals_per_site > 1:
        H = np.kron(H, np.eye(spec.orbitals_per_site))
    return mc.as_hermitian(H)


def site_distance(spec: LatticeSpec) -> np.ndarray:
    """Euclidean distance between basis sites (minimum image on the torus)."""
    x, y = spec.coordinates()
    dx = np.abs(x[:, None] - x[None, :])
    dy = np.abs(y[:, None] - y[None, :])
    if spec.boundary == "torus":
        dx = np.minimum(dx, spec.Lx - dx)
        dy = np.minimum(dy, spec.Ly - dy)
    return np.hypot(dx, dy)


@dataclass(frozen=True)
class FermiProjection:
    matrix: np.ndarray
    mu: float
    gap: float
    filled: int


def spectral_gap(H, mu: float, energies: np.ndarray | None = None) -> float:
    """Distance between the nearest eigenvalues below and above ``mu``.

    Returns ``inf`` when ``mu`` lies outside the spectrum (one side empty).
    """
    E = mc.eig_hermitian(H).eigenvalues if energies is None else np.asarray(energies)
    below = E[E < mu]
    above = E[E >= mu]
    if below.size == 0 or above.size == 0:
        return math.inf
    return float(above.min() - below.max())


def fermi_projection(H, mu: float, min_gap: float = 1e-3) -> FermiProjection:
    """Spectral projection of ``H`` onto energies below ``mu``.

    Raises :class:`GaplessAtMu` when an eigenvalue lies within ``min_gap / 2``
    of ``mu``.
    """
    dec = mc.eig_hermitian(H)
    E = dec.eigenvalues
    close = np.abs(E - mu).min()
    if close < min_gap / 2:
        raise GaplessAtMu(f"eigenvalue {close:.3e} away from mu={mu:g} (min_gap={min_gap:g})")
    n = int(np.count_nonzero(E < mu))
    V = dec.frame[:, :n]
    P = V @ V.conj().T
    P = mc.as_hermitian(P) if n else mc.as_hermitian(np.zeros_like(dec.frame))
    return FermiProjection(P, float(mu), spectral_gap(H, mu, E), n)


def band_gap_centers(H, n_bands: int, min_gap: float = 1e-3) -> list[tuple[int, float, float]]:
    """Gaps that separate complete groups of ``dim / n_bands`` states.

    Returns ``(r, mu, gap)`` for each filling ``r = 1 .. n_bands-1`` whose gap
    exceeds ``min_gap``; ``mu`` is the gap midpoint. For the clean Hofstadter
    model at flux ``p/q`` use ``n_bands = q``.
    """
    E = mc.eig_hermitian(H).eigenvalues
    if E.size % n_bands:
        raise ValueError(f"dimension {E.size} is not a multiple of {n_bands}")
    per = E.size // n_bands
    out = []
    for r in range(1, n_bands):
        lo, hi = E[r * per - 1], E[r * per]
        if hi - lo > min_gap:
            out.append((r, float((lo + hi) / 2), float(hi - lo)))
    return out


@dataclass(frozen=True)
class SwitchProfile:
    """Monotone 0 -> 1 switch in a centered lattice coordinate.

    ``step`` jumps at ``(L_l + L_r) / 2``; ``linear`` ramps from 0 at ``L_l``
    to 1 at ``L_r``.
    """

    kind: Literal["step", "linear"] = "linear"
    L_l: float = -4.0
    L_r: float = 4.0

    def __post_init__(self):
        if self.kind not in ("step", "linear"):
            raise ValueError(f"kind must be 'step' or 'linear', not {self.kind!r}")
        if not self.L_l < 0 < self.L_r:
            raise ValueError("need L_l < 0 < L_r")

    @classmethod
    def ramp(cls, width: float) -> "SwitchProfile":
        return cls("linear", -width / 2, width / 2)

    @classmethod
    def step(cls, half_width: float = 0.25) -> "SwitchProfile":
        return cls("step", -half_width, half_width)

    @property
    def width(self) -> float:
        return self.L_r - self.L_l

    def __call__(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if self.kind == "step":
            return (c >= (self.L_l + self.L_r) / 2).astype(float)
        return np.clip((c - self.L_l) / (self.L_r - self.L_l), 0.0, 1.0)


def switch_operator(spec: LatticeSpec, axis: Literal["x", "y"], profile: SwitchProfile) -> np.ndarray:
    """Diagonal operator ``Lambda(X)`` (or ``Lambda(Y)``) on the lattice."""
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    L = spec.Lx if axis == "x" else spec.Ly
    if profile.L_l < -L / 2 or profile.L_r > L / 2:
        raise ThresholdOutOfRange(
            f"thresholds ({profile.L_l:g}, {profile.L_r:g}) outside the sample [-{L / 2:g}, {L / 2:g}]"
        )
    cx, cy = spec.centered_coordinates()
    vals = profile(cx if axis == "x" else cy)
    return mc.as_hermitian(np.diag(vals.astype(np.complex128)))


def plp_unitary(P, L) -> np.ndarray:
    """``exp(2 pi i P L P)`` by spectral calculus."""
    P = getattr(P, "matrix", P)
    return mc.exp_i_hermitian(mc.as_hermitian(P @ np.asarray(L) @ P), 2 * math.pi)


@dataclass(frozen=True)
class CommutatorBoundReport:
    comm_Lx_H: float
    comm_Ly_H: float
    comm_Lx_P: float
    comm_Ly_P: float
    holmgren_Lx_H: float
    holmgren_Ly_H: float
    holmgren_Lx_P: float
    holmgren_Ly_P: float
    chain_bound: float
    actual: float
    heuristic: float
    chain_holds: bool
    holmgren_dominates: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def commutator_bound_report(H, P, Lx, Ly, range_R: int = 1,
                            switch_width: float | None = None,
                            unitaries: tuple | None = None) -> CommutatorBoundReport:
    """Norms entering the admissibility chain for the ``e^{2 pi i P L P}`` pair.

    ``chain_bound`` is ``4 pi^2 (||[Lx, P]|| + ||[Ly, P]||)``, ``actual`` the
    measured ``||[e^{2 pi i P Lx P}, e^{2 pi i P Ly P}]||`` and ``heuristic``
    the scale ``(R / L) (||H|| / gap)``.
    """
    Pm = getattr(P, "matrix", P)
    gap = getattr(P, "gap", None)
    c = {
        "Lx_H": mc.commutator(Lx, H),
        "Ly_H": mc.commutator(Ly, H),
        "Lx_P": mc.commutator(Lx, Pm),
        "Ly_P": mc.commutator(Ly, Pm),
    }
    exact = {k: mc.operator_norm(v) for k, v in c.items()}
    holm = {k: mc.holmgren_bound(v) for k, v in c.items()}
    if unitaries is None:
        unitaries = (plp_unitary(Pm, Lx), plp_unitary(Pm, Ly))
    U, V = unitaries
    actual = mc.operator_norm(U @ V - V @ U)
    chain = FOUR_PI_SQ * (exact["Lx_P"] + exact["Ly_P"])
    if switch_width and gap and math.isfinite(gap) and gap > 0:
        heuristic = range_R / switch_width * mc.operator_norm(H) / gap
    else:
        heuristic = math.nan
    return CommutatorBoundReport(
        exact["Lx_H"], exact["Ly_H"], exact["Lx_P"], exact["Ly_P"],
        holm["Lx_H"], holm["Ly_H"], holm["Lx_P"], holm["Ly_P"],
        chain, actual, heuristic,
        chain_holds=bool(actual <= chain + 1e-10),
        holmgren_dominates=all(holm[k] >= exact[k] - 1e-10 for k in exact),
    )


def central_window(spec: LatticeSpec, half_x: float | None = None,
                   half_y: float | None = None) -> np.ndarray:
    """Boolean mask of the sites within a rectangle around the sample midpoint."""
    cx, cy = spec.centered_coordinates()
    hx = spec.Lx / 4 if half_x is None else half_x
    hy = spec.Ly / 4 if half_y is None else half_y
    return (np.abs(cx) <= hx) & (np.abs(cy) <= hy)
