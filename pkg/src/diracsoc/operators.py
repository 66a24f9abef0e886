"""First- and second-order proper-time operators and their factored forms.

All operators act on 4-component fields and return the same.  The
second-order right-hand side (``fock_rhs``) and the product of the two
first-order factors (``factored_rhs``) agree for divergence-free
potentials; for a potential with d.A = g != 0 their difference is the
field -i e hbar g(z) phi, which ``gauge_discrepancy_prediction``
computes directly.

Compositions are evaluated by genuinely applying one operator to the
output of the other on the grid -- there is no symbolic fusion -- so the
equivalence checks are honest numerical tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import DIRAC, METRIC_DIAG, ArrayC, GammaSet, as_four_vector
from .constants import PhysicalConstants
from .emfield import PotentialSpec, evaluate_potential, field_strength, potential_jacobian
from .grid import Field, dalembertian, l2norm, partial_or_zero, plane_wave


class OperatorError(ValueError):
    pass


def _require_spinor(psi: Field) -> None:
    if not psi.is_spinor:
        raise OperatorError("operator expects a 4-component field")


def _check_potential_support(psi: Field, A: PotentialSpec) -> None:
    # the grid cannot represent variation along inactive axes
    for mu in range(psi.grid.dims, 4):
        if _varies_along(A, mu):
            raise OperatorError(
                f"potential {A.name} varies along inactive axis {mu}; "
                f"use a grid with dims > {mu}")


def _varies_along(A: PotentialSpec, mu: int) -> bool:
    if A.name == "free":
        return False
    if A.name == "constant_electric":
        return mu == 1
    if A.name == "constant_magnetic":
        return mu in (1, 2)
    if A.name in ("em_plane_wave", "custom_wave"):
        _, k = A.wave_vectors()
        return k[mu] != 0.0
    from .emfield import _parse_poly_key
    return any(_parse_poly_key(key)[1][mu] > 0 for key in A.params)


def _sampled_potential(psi: Field, A: PotentialSpec) -> np.ndarray:
    return evaluate_potential(A, psi.grid.coords4())


def _gamma_mix(mat: ArrayC, comp: np.ndarray) -> np.ndarray:
    """Apply a 4x4 matrix in spinor space: out_a = sum_b M_ab v_b."""
    return np.tensordot(mat, comp, axes=(1, 0))


def minimal_coupling_slash(psi: Field, A: PotentialSpec, consts: PhysicalConstants,
                           gammas: GammaSet = DIRAC, backend: str = "spectral") -> Field:
    """gamma^nu (i hbar d_nu - e A_nu) psi -- the mass-free first-order part."""
    _require_spinor(psi)
    _check_potential_support(psi, A)
    Av = _sampled_potential(psi, A)
    out = np.zeros_like(psi.values)
    for nu in range(4):
        term = 1j * consts.hbar * partial_or_zero(psi, nu, backend).values
        if np.any(Av[nu] != 0):
            term = term - consts.e * Av[nu] * psi.values
        out = out + _gamma_mix(gammas.gammas[nu], term)
    return Field(psi.grid, out)


def dirac_apply(psi: Field, A: PotentialSpec, consts: PhysicalConstants,
                gammas: GammaSet = DIRAC, backend: str = "spectral") -> Field:
    """(i hbar gamma^nu d_nu - e gamma^nu A_nu - m c) psi."""
    base = minimal_coupling_slash(psi, A, consts, gammas, backend)
    return Field(psi.grid, base.values - consts.mc * psi.values)


def conjugate_apply(psi: Field, A: PotentialSpec, consts: PhysicalConstants,
                    gammas: GammaSet = DIRAC, backend: str = "spectral") -> Field:
    """(i hbar gamma^mu d_mu - e gamma^mu A_mu + m c) psi."""
    base = minimal_coupling_slash(psi, A, consts, gammas, backend)
    return Field(psi.grid, base.values + consts.mc * psi.values)


def build_spinor(phi: Field, A: PotentialSpec, consts: PhysicalConstants,
                 gammas: GammaSet = DIRAC, backend: str = "spectral") -> Field:
    """psi = i hbar gamma^mu d_mu phi - e gamma^mu A_mu phi + m c phi.

    Identical to ``conjugate_apply``; exposed under the name of the
    spinor construction it implements.
    """
    return conjugate_apply(phi, A, consts, gammas, backend)


def fock_rhs(phi: Field, A: PotentialSpec, consts: PhysicalConstants,
             gammas: GammaSet = DIRAC, backend: str = "spectral") -> Field:
    """Second-order right-hand side, term by term:

    -m^2 c^2 phi - hbar^2 d^mu d_mu phi
    - (i e hbar / 4) [gamma^mu, gamma^nu] F_munu phi
    - 2 i e hbar A^mu d_mu phi + e^2 A^mu A_mu phi
    """
    _require_spinor(phi)
    _check_potential_support(phi, A)
    hbar, e, mc = consts.hbar, consts.e, consts.mc
    coords = phi.grid.coords4()
    Av = evaluate_potential(A, coords)

    out = -(mc ** 2) * phi.values
    out = out - hbar ** 2 * dalembertian(phi, backend).values

    F = field_strength(A, coords, method="analytic")
    for mu in range(4):
        for nu in range(4):
            if np.any(F[mu, nu] != 0):
                comm = gammas.commutator(mu, nu)
                out = out - (0.25j * e * hbar) * _gamma_mix(comm, F[mu, nu] * phi.values)

    for mu in range(4):
        if np.any(Av[mu] != 0):
            dphi = partial_or_zero(phi, mu, backend).values
            out = out - 2j * e * hbar * METRIC_DIAG[mu] * Av[mu] * dphi

    asq = sum(METRIC_DIAG[mu] * Av[mu] * Av[mu] for mu in range(4))
    if np.any(asq != 0):
        out = out + e ** 2 * asq * phi.values
    return Field(phi.grid, out)


def factored_rhs(phi: Field, A: PotentialSpec, consts: PhysicalConstants,
                 gammas: GammaSet = DIRAC, backend: str = "spectral") -> Field:
    """(i hbar gamma d - e gamma A - mc)(i hbar gamma d - e gamma A + mc) phi."""
    return dirac_apply(conjugate_apply(phi, A, consts, gammas, backend),
                       A, consts, gammas, backend)


def legacy_factored_rhs(phi: Field, A: PotentialSpec, consts: PhysicalConstants,
                        gammas: GammaSet = DIRAC, backend: str = "spectral") -> Field:
    """(i hbar gamma d - e gamma A - mc)(i hbar gamma d - e gamma A) phi.

    The earlier factored form whose second factor lacks the +mc term;
    kept for side-by-side comparison with ``factored_rhs``.
    """
    return dirac_apply(minimal_coupling_slash(phi, A, consts, gammas, backend),
                       A, consts, gammas, backend)


def gauge_discrepancy_prediction(phi: Field, A: PotentialSpec, consts: PhysicalConstants,
                                 backend: str = "spectral") -> Field:
    """-i e hbar (d_mu A^mu)(z) phi: the symmetric term absent from fock_rhs.

    factored_rhs - fock_rhs equals this field; it vanishes identically
    in Lorenz gauge, which is the content of the equivalence theorem.
    """
    _require_spinor(phi)
    J = potential_jacobian(A, phi.grid.coords4(), method="analytic")
    div = sum(METRIC_DIAG[mu] * J[mu, mu] for mu in range(4))
    return Field(phi.grid, -1j * consts.e * consts.hbar * div * phi.values)


def factorization_discrepancy(phi: Field, A: PotentialSpec, consts: PhysicalConstants,
                              gammas: GammaSet = DIRAC, backend: str = "spectral"
                              ) -> tuple[float, float, float]:
    """(relative, absolute, |fock|) discrepancy between the two forms."""
    fock = fock_rhs(phi, A, consts, gammas, backend)
    fact = factored_rhs(phi, A, consts, gammas, backend)
    diff = l2norm(fact - fock)
    ref = l2norm(fock)
    rel = diff / ref if ref > 0 else np.inf
    return rel, diff, ref


@dataclass(frozen=True)
class KGResidual:
    residuals: np.ndarray  # per-component relative Klein-Gordon defect
    degenerate: np.ndarray  # True where the component vanishes identically

    @property
    def max_residual(self) -> float:
        live = self.residuals[~self.degenerate]
        return float(live.max()) if live.size else 0.0


def kg_residual_componentwise(psi: Field, A: PotentialSpec, consts: PhysicalConstants,
                              backend: str = "spectral") -> KGResidual:
    """r_a = |(d^mu d_mu + m^2 c^2 / hbar^2) psi_a| / |psi_a| per component.

    Defined for the free potential only: with fields present the
    second-order operator carries the spin coupling and the components
    mix.
    """
    _require_spinor(psi)
    if A.name != "free":
        raise OperatorError("componentwise Klein-Gordon residual is defined for A=free")
    k2 = consts.mass_shell / consts.hbar ** 2
    op = dalembertian(psi, backend).values + k2 * psi.values
    residuals = np.zeros(4)
    degenerate = np.zeros(4, dtype=bool)
    for a in range(4):
        na = float(np.sqrt(np.mean(np.abs(psi.values[a]) ** 2)))
        if na == 0.0:
            degenerate[a] = True
            continue
        residuals[a] = float(np.sqrt(np.mean(np.abs(op[a]) ** 2))) / na
    return KGResidual(residuals, degenerate)


def dirac_plane_wave(grid, k, chi, consts: PhysicalConstants,
                     gammas: GammaSet = DIRAC) -> Field:
    """psi = (hbar slash(k) + mc) chi exp(-i k.z).

    For on-shell k this lies in the kernel of ``dirac_apply`` with A=0,
    since (hbar slash(k) - mc)(hbar slash(k) + mc) = (hbar^2 k.k - m^2c^2) I.
    """
    k = as_four_vector(k)
    chi = np.asarray(chi, dtype=np.complex128).reshape(4)
    amp = (consts.hbar * gammas.slash(k) + consts.mc * np.eye(4)) @ chi
    return plane_wave(grid, k, chi=amp)
