"""Plane-wave dispersion analysis and proper-time mode evolution.

A Fourier mode chi exp(-i k.z) turns the free second-order operator into
multiplication by the on-shell gap  Delta = hbar^2 (k.k) - m^2 c^2,  so
its proper-time evolution has the closed form

    phi(tau) = exp(i epsilon Delta tau / (hbar m)) phi(0).

Modes are therefore stationary exactly when Delta = 0, i.e. on the mass
shell; no time-stepping error enters the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .clifford import DIRAC, ArrayC, GammaSet, mdot
from .constants import PhysicalConstants
from .emfield import PotentialSpec


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class FourMomentum:
    """Real wave four-vector (lower-index components, units 1/length)."""

    k: np.ndarray

    def __post_init__(self) -> None:
        k = np.asarray(self.k, dtype=float)
        if k.shape != (4,):
            raise SpectrumError(f"wave vector must have shape (4,), got {k.shape}")
        k.setflags(write=False)
        object.__setattr__(self, "k", k)

    def gap(self, consts: PhysicalConstants) -> float:
        """Delta = hbar^2 k.k - m^2 c^2 (real since k is real)."""
        return consts.hbar ** 2 * mdot(self.k, self.k).real - consts.mass_shell

    def is_on_shell(self, consts: PhysicalConstants, rel_tol: float = 1e-12) -> bool:
        return abs(self.gap(consts)) <= rel_tol * consts.mass_shell


@dataclass(frozen=True)
class ModeState:
    chi: ArrayC
    k: FourMomentum
    tau: float = 0.0

    def __post_init__(self) -> None:
        chi = np.asarray(self.chi, dtype=np.complex128).reshape(4)
        chi.setflags(write=False)
        object.__setattr__(self, "chi", chi)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.chi))


def dispersion_solve(spatial_k, consts: PhysicalConstants) -> tuple[float, float]:
    """The two k^0 roots of the mass shell for given spatial wave components."""
    kvec = np.asarray(spatial_k, dtype=float).reshape(3)
    k0 = float(np.sqrt(np.dot(kvec, kvec) + consts.mass_shell / consts.hbar ** 2))
    return k0, -k0


def matrix_nullspace(M: ArrayC, rel_tol: float = 1e-8) -> ArrayC:
    """Orthonormal nullspace basis of a matrix via SVD (rows are vectors)."""
    _, s, vh = np.linalg.svd(np.asarray(M, dtype=np.complex128))
    cutoff = rel_tol * (s[0] if s.size else 0.0)
    return vh[s <= cutoff].conj()


def nullspace_spinors(k: FourMomentum, gammas: GammaSet = DIRAC,
                      consts: PhysicalConstants = PhysicalConstants(),
                      rel_tol: float = 1e-8) -> ArrayC:
    """Orthonormal basis of null(hbar slash(k) - mc I); dimension 2 on shell."""
    if abs(k.gap(consts)) > 1e-10 * consts.mass_shell:
        raise SpectrumError(
            f"no nontrivial nullspace: k is off shell by Delta={k.gap(consts):g}")
    M = consts.hbar * gammas.slash(k.k) - consts.mc * np.eye(4)
    basis = matrix_nullspace(M, rel_tol)
    if basis.shape[0] != 2:
        raise SpectrumError(f"expected a 2-dimensional nullspace, found {basis.shape[0]}")
    return basis


def mode_phase_factor(k: FourMomentum, dtau: float, consts: PhysicalConstants) -> complex:
    """exp(i epsilon Delta dtau / (hbar m)) -- one step of the closed form."""
    return complex(np.exp(1j * consts.epsilon * k.gap(consts) * dtau / (consts.hbar * consts.m)))


def propertime_evolve(state: ModeState, A: PotentialSpec, dtau: float, steps: int,
                      consts: PhysicalConstants) -> list[ModeState]:
    """Evolve a Fourier mode in proper time (free potential only).

    Returns the trajectory [state, state_1, ..., state_steps]; each step
    multiplies the amplitude by the exact per-mode phase factor, so
    on-shell modes are fixed points to rounding.
    """
    if A.name != "free":
        raise SpectrumError("proper-time mode evolution supports the free potential only")
    if steps < 0 or dtau <= 0:
        raise SpectrumError("need steps >= 0 and dtau > 0")
    factor = mode_phase_factor(state.k, dtau, consts)
    traj = [state]
    chi = state.chi
    for n in range(1, steps + 1):
        chi = factor * chi
        traj.append(replace(state, chi=chi, tau=state.tau + n * dtau))
    return traj


def fit_mode_frequency(traj: list[ModeState]) -> float:
    """Angular frequency of the mode's phase rotation, from a linear fit.

    Uses the overlap with the initial amplitude, whose phase advances
    linearly for the closed-form evolution.
    """
    if len(traj) < 2:
        raise SpectrumError("need at least two states to fit a frequency")
    chi0 = traj[0].chi
    n0 = np.vdot(chi0, chi0)
    if n0 == 0:
        raise SpectrumError("cannot fit the frequency of a null mode")
    taus = np.array([s.tau for s in traj])
    overlaps = np.array([np.vdot(chi0, s.chi) / n0 for s in traj])
    phases = np.unwrap(np.angle(overlaps))
    slope = np.polyfit(taus - taus[0], phases, 1)[0]
    return float(slope)


@dataclass(frozen=True)
class LegacyModeReport:
    """Side-by-side stationarity residuals of the two factored forms.

    legacy_residual: |(hbar^2 (k.k) I - mc hbar slash(k)) chi|
    new_residual:    |(hbar^2 (k.k) - m^2 c^2) chi| = |Delta| |chi|
    """

    gap: float
    chi_norm: float
    legacy_residual: float
    new_residual: float


def legacy_mode_condition(k: FourMomentum, chi, gammas: GammaSet = DIRAC,
                          consts: PhysicalConstants = PhysicalConstants()) -> LegacyModeReport:
    chi = np.asarray(chi, dtype=np.complex128).reshape(4)
    kk = mdot(k.k, k.k).real
    hbar, mc = consts.hbar, consts.mc
    legacy = (hbar ** 2 * kk) * chi - mc * hbar * (gammas.slash(k.k) @ chi)
    gap = k.gap(consts)
    return LegacyModeReport(
        gap=gap,
        chi_norm=float(np.linalg.norm(chi)),
        legacy_residual=float(np.linalg.norm(legacy)),
        new_residual=float(abs(gap) * np.linalg.norm(chi)),
    )


def delta_sweep(k1: float, gaps, consts: PhysicalConstants, dtau: float, steps: int,
                stationary_tol: float = 1e-10) -> list[dict]:
    """Evolve one mode per requested gap value and flag the stationary ones.

    k^0 is solved from the gap at fixed spatial component k^1, the mode
    is evolved for ``steps`` proper-time steps, and a mode counts as
    stationary when its final amplitude deviates from the initial one by
    at most stationary_tol in relative norm.
    """
    records = []
    chi0 = np.array([1.0, 0.0, 0.0, 0.0], dtype=np.complex128)
    for gap in gaps:
        k0sq = (gap + consts.mass_shell) / consts.hbar ** 2 + k1 ** 2
        if k0sq < 0:
            raise SpectrumError(f"gap {gap} gives no real k^0 at k^1={k1}")
        k = FourMomentum(np.array([np.sqrt(k0sq), k1, 0.0, 0.0]))
        traj = propertime_evolve(ModeState(chi0, k), PotentialSpec("free"),
                                 dtau, steps, consts)
        drift = float(np.linalg.norm(traj[-1].chi - traj[0].chi) / np.linalg.norm(traj[0].chi))
        records.append({
            "k0": float(k.k[0]),
            "k1": float(k1),
            "delta": float(k.gap(consts)),
            "measured_frequency": fit_mode_frequency(traj),
            "closed_form_frequency": consts.epsilon * k.gap(consts) / (consts.hbar * consts.m),
            "final_drift": drift,
            "stationary": drift <= stationary_tol,
        })
    return records
