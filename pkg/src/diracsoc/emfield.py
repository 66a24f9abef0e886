"""Analytic four-potential catalog and field-strength machinery.

Potentials are stored and returned as lower-index components ``A_mu``,
each an entire function of the coordinates, so they can be evaluated at
complex arguments.  Positions are passed as the four coordinates
``z^mu`` (scalars or broadcasting arrays).

Sign conventions fixed here and recorded in test fixtures:

* ``constant_electric(E)``: ``A_0 = -E z^1``, giving ``F_01 = +E``.
* ``constant_magnetic(B)``: symmetric gauge ``A_1 = -(B/2) z^2``,
  ``A_2 = +(B/2) z^1``, giving ``F_12 = +B``.
* ``em_plane_wave(eps, k)``: ``A_mu = eps_mu cos(k . z + phase)`` with the
  transversality constraint ``k . eps = 0`` enforced, so the divergence
  vanishes identically.
* ``custom_wave`` is the same waveform without the transversality
  constraint; with ``k . eps != 0`` it is the catalog's deliberately
  gauge-violating entry.
* ``custom_polynomial``: per-component polynomial terms keyed
  ``a<mu>_<e0><e1><e2><e3>``, e.g. ``a0_1000 = 2.5`` for
  ``A_0 = 2.5 z^0``.  Used for constants and for non-periodic
  negative tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .clifford import DIRAC, METRIC_DIAG, ArrayC, GammaSet
from .constants import PhysicalConstants

CATALOG = ("free", "constant_electric", "constant_magnetic", "em_plane_wave",
           "custom_polynomial", "custom_wave")

_WAVE_KEYS = tuple(f"eps{mu}" for mu in range(4)) + tuple(f"k{mu}" for mu in range(4))


class PotentialError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialSpec:
    """A named analytic four-potential with real parameters."""

    name: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in CATALOG:
            raise PotentialError(f"unknown potential {self.name!r}; catalog: {CATALOG}")
        object.__setattr__(self, "params", dict(self.params))
        missing = [k for k in _required_keys(self.name) if k not in self.params]
        if missing:
            raise PotentialError(f"{self.name}: missing parameters {missing}")
        if self.name == "em_plane_wave":
            eps, k = _wave_vectors(self.params)
            kdoteps = np.sum(METRIC_DIAG * k * eps)
            if abs(kdoteps) > 1e-12 * max(1.0, np.abs(k).max() * np.abs(eps).max()):
                raise PotentialError(
                    f"em_plane_wave requires k.eps = 0 (transverse polarization), got {kdoteps}")
        if self.name == "custom_polynomial":
            for key in self.params:
                _parse_poly_key(key)

    def wave_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        if self.name not in ("em_plane_wave", "custom_wave"):
            raise PotentialError(f"{self.name} has no wave vectors")
        return _wave_vectors(self.params)


def _required_keys(name: str) -> tuple[str, ...]:
    if name == "constant_electric":
        return ("E",)
    if name == "constant_magnetic":
        return ("B",)
    if name in ("em_plane_wave", "custom_wave"):
        return _WAVE_KEYS
    return ()


def _wave_vectors(params: Mapping[str, float]) -> tuple[np.ndarray, np.ndarray]:
    eps = np.array([params[f"eps{mu}"] for mu in range(4)], dtype=float)
    k = np.array([params[f"k{mu}"] for mu in range(4)], dtype=float)
    return eps, k


def _parse_poly_key(key: str) -> tuple[int, tuple[int, int, int, int]]:
    # a<mu>_<e0><e1><e2><e3>, single-digit exponents
    if (len(key) != 7 or key[0] != "a" or key[2] != "_"
            or not key[1].isdigit() or not key[3:].isdigit() or int(key[1]) > 3):
        raise PotentialError(f"bad polynomial term key {key!r}; expected a<mu>_<e0e1e2e3>")
    return int(key[1]), tuple(int(c) for c in key[3:])


# -- catalog constructors ----------------------------------------------------

def free() -> PotentialSpec:
    return PotentialSpec("free")


def constant_electric(E: float) -> PotentialSpec:
    return PotentialSpec("constant_electric", {"E": E})


def constant_magnetic(B: float) -> PotentialSpec:
    return PotentialSpec("constant_magnetic", {"B": B})


def em_plane_wave(eps, k, phase: float = 0.0) -> PotentialSpec:
    params = {f"eps{mu}": float(eps[mu]) for mu in range(4)}
    params.update({f"k{mu}": float(k[mu]) for mu in range(4)})
    params["phase"] = float(phase)
    return PotentialSpec("em_plane_wave", params)


def custom_wave(eps, k, phase: float = 0.0) -> PotentialSpec:
    params = {f"eps{mu}": float(eps[mu]) for mu in range(4)}
    params.update({f"k{mu}": float(k[mu]) for mu in range(4)})
    params["phase"] = float(phase)
    return PotentialSpec("custom_wave", params)


def custom_polynomial(terms: Mapping[str, float]) -> PotentialSpec:
    return PotentialSpec("custom_polynomial", terms)


def constant_potential(a) -> PotentialSpec:
    """Uniform four-potential A_mu = a_mu (a degree-0 polynomial entry)."""
    return custom_polynomial({f"a{mu}_0000": float(a[mu]) for mu in range(4) if a[mu] != 0.0})


# -- evaluation --------------------------------------------------------------

def _coords(z) -> list[np.ndarray]:
    zs = [np.asarray(z[mu], dtype=np.complex128) for mu in range(4)]
    return list(np.broadcast_arrays(*zs))


def evaluate_potential(spec: PotentialSpec, z) -> np.ndarray:
    """A_mu(z): lower-index components, shape (4,) + broadcast(z)."""
    zs = _coords(z)
    shape = zs[0].shape
    A = np.zeros((4,) + shape, dtype=np.complex128)
    if spec.name == "free":
        pass
    elif spec.name == "constant_electric":
        A[0] = -spec.params["E"] * zs[1]
    elif spec.name == "constant_magnetic":
        A[1] = -0.5 * spec.params["B"] * zs[2]
        A[2] = 0.5 * spec.params["B"] * zs[1]
    elif spec.name in ("em_plane_wave", "custom_wave"):
        eps, k = spec.wave_vectors()
        phase = spec.params.get("phase", 0.0)
        kz = sum(k[mu] * zs[mu] for mu in range(4)) + phase
        c = np.cos(kz)
        for mu in range(4):
            if eps[mu] != 0.0:
                A[mu] = eps[mu] * c
    else:  # custom_polynomial
        for key, coef in spec.params.items():
            mu, exps = _parse_poly_key(key)
            term = np.full(shape, complex(coef))
            for nu, p in enumerate(exps):
                if p:
                    term = term * zs[nu] ** p
            A[mu] = A[mu] + term
    return A


def potential_jacobian(spec: PotentialSpec, z, method: str = "analytic",
                       h: float = 1e-3, order: int = 2) -> np.ndarray:
    """J[mu, nu] = d A_nu / d z^mu, shape (4, 4) + broadcast(z)."""
    if method == "finite_difference":
        return _jacobian_fd(spec, z, h, order)
    if method != "analytic":
        raise PotentialError(f"unknown differentiation method {method!r}")
    zs = _coords(z)
    shape = zs[0].shape
    J = np.zeros((4, 4) + shape, dtype=np.complex128)
    if spec.name == "free":
        pass
    elif spec.name == "constant_electric":
        J[1, 0] = -spec.params["E"]
    elif spec.name == "constant_magnetic":
        J[2, 1] = -0.5 * spec.params["B"]
        J[1, 2] = 0.5 * spec.params["B"]
    elif spec.name in ("em_plane_wave", "custom_wave"):
        eps, k = spec.wave_vectors()
        phase = spec.params.get("phase", 0.0)
        kz = sum(k[mu] * zs[mu] for mu in range(4)) + phase
        s = np.sin(kz)
        for mu in range(4):
            if k[mu] == 0.0:
                continue
            for nu in range(4):
                if eps[nu] != 0.0:
                    J[mu, nu] = -k[mu] * eps[nu] * s
    else:  # custom_polynomial
        for key, coef in spec.params.items():
            nu, exps = _parse_poly_key(key)
            for mu, p in enumerate(exps):
                if p == 0:
                    continue
                term = np.full(shape, complex(coef * p))
                for rho, q in enumerate(exps):
                    qq = q - 1 if rho == mu else q
                    if qq:
                        term = term * zs[rho] ** qq
                J[mu, nu] = J[mu, nu] + term
    return J


def _jacobian_fd(spec: PotentialSpec, z, h: float, order: int) -> np.ndarray:
    if h <= 0:
        raise PotentialError("finite-difference step must be positive")
    if order not in (2, 4):
        raise PotentialError("finite-difference order must be 2 or 4")
    zs = _coords(z)
    shape = zs[0].shape
    J = np.zeros((4, 4) + shape, dtype=np.complex128)

    def shifted(mu, delta):
        pt = [zs[nu] + (delta if nu == mu else 0.0) for nu in range(4)]
        return evaluate_potential(spec, pt)

    for mu in range(4):
        if order == 2:
            J[mu] = (shifted(mu, h) - shifted(mu, -h)) / (2 * h)
        else:
            J[mu] = (-shifted(mu, 2 * h) + 8 * shifted(mu, h)
                     - 8 * shifted(mu, -h) + shifted(mu, -2 * h)) / (12 * h)
    return J


def field_strength(spec: PotentialSpec, z, method: str = "analytic",
                   h: float = 1e-3, order: int = 2) -> np.ndarray:
    """F[mu, nu] = d_mu A_nu - d_nu A_mu, shape (4, 4) + broadcast(z)."""
    J = potential_jacobian(spec, z, method=method, h=h, order=order)
    return J - np.swapaxes(J, 0, 1)


def lorenz_residual(spec: PotentialSpec, z, method: str = "analytic",
                    h: float = 1e-3, order: int = 2):
    """Divergence d_mu A^mu(z); identically zero for gauge-respecting entries."""
    J = potential_jacobian(spec, z, method=method, h=h, order=order)
    res = sum(METRIC_DIAG[mu] * J[mu, mu] for mu in range(4))
    return complex(res) if np.ndim(res) == 0 else res


def is_lorenz_gauge(spec: PotentialSpec) -> bool:
    """True when the entry's divergence vanishes identically by construction."""
    if spec.name in ("free", "constant_electric", "constant_magnetic", "em_plane_wave"):
        return True
    if spec.name == "custom_wave":
        eps, k = spec.wave_vectors()
        return bool(abs(np.sum(METRIC_DIAG * k * eps)) < 1e-14)
    # polynomial: divergence is again a polynomial; test its coefficients
    div: dict[tuple[int, int, int, int], float] = {}
    for key, coef in spec.params.items():
        mu, exps = _parse_poly_key(key)
        if exps[mu] == 0:
            continue
        d = list(exps)
        d[mu] -= 1
        d = tuple(d)
        div[d] = div.get(d, 0.0) + METRIC_DIAG[mu] * coef * exps[mu]
    return all(abs(c) < 1e-14 for c in div.values())


def spin_coupling_matrix(F: ArrayC, consts: PhysicalConstants,
                         gammas: GammaSet = DIRAC, form: str = "sigma") -> ArrayC:
    """Spin/EM coupling (e hbar / 2m) sigma^{munu} F_{munu} as a 4x4 matrix.

    ``form="sigma"`` contracts the spin tensor directly;
    ``form="commutator"`` evaluates the equivalent
    (i e hbar / 4m) [gamma^mu, gamma^nu] F_{munu}.  The two routes are
    algebraically identical and are compared in tests.  The coupling is
    independent of the charge-sign branch epsilon by construction.
    """
    F = np.asarray(F, dtype=np.complex128)
    if F.shape != (4, 4):
        raise PotentialError(f"pointwise field strength must be 4x4, got {F.shape}")
    out = np.zeros((4, 4), dtype=np.complex128)
    if form == "sigma":
        pref = consts.e * consts.hbar / (2 * consts.m)
        for mu in range(4):
            for nu in range(4):
                if F[mu, nu] != 0:
                    out += pref * gammas.spin_tensor(mu, nu) * F[mu, nu]
    elif form == "commutator":
        pref = 1j * consts.e * consts.hbar / (4 * consts.m)
        for mu in range(4):
            for nu in range(4):
                if F[mu, nu] != 0:
                    out += pref * gammas.commutator(mu, nu) * F[mu, nu]
    else:
        raise PotentialError(f"unknown coupling form {form!r}")
    return out
