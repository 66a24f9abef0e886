"""Stochastic layer: optimal control, HJB residuals, and the complex SDE.

The equation of motion is  dz_mu = w_mu ds + sigma_mu dW_mu  with real,
independent Wiener increments dW_mu; all complexity enters through the
complex diffusion amplitudes sigma_mu and the complex control w.  Real
and imaginary parts of each increment are therefore exactly
(anti-)correlated, with the sign pattern set by the charge-sign branch
epsilon.

Positions and controls are stored as lower-index components, matching
the equation of motion; coordinates z^mu are recovered by metric raising
where a potential has to be evaluated.

Randomness: every path owns a counter-based substream
(Philox key = seed, counter word 2 = path index), so ensembles are
bit-reproducible for a fixed seed and independent of any scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .clifford import DIRAC, METRIC_DIAG, ArrayC, as_four_vector
from .constants import PhysicalConstants
from .emfield import PotentialSpec, evaluate_potential, field_strength, free
from .grid import Field, dalembertian, partial_or_zero


class SocError(ValueError):
    pass


class HopfColeError(SocError):
    pass


# -- optimal control ---------------------------------------------------------

@dataclass(frozen=True)
class ControlField:
    """Markov control policy w_mu(z), complex four-velocity per position.

    ``fn`` maps positions of shape (..., 4) to controls of the same
    shape.  ``constant`` is set when the policy does not depend on z.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    label: str
    constant: ArrayC | None = None


def constant_control(w, label: str | None = None) -> ControlField:
    w = as_four_vector(w)
    lab = label or "constant"
    return ControlField(fn=lambda z: np.broadcast_to(w, z.shape).copy(),
                        label=lab, constant=w)


def zero_control() -> ControlField:
    return constant_control(np.zeros(4), "zero")


def optimal_control_mode(k, consts: PhysicalConstants, A_const=None) -> ControlField:
    """Control of a plane-wave log-amplitude: w_mu = eps/m (hbar k_mu - e A_mu).

    This is the closed form obtained from d_mu(-i k.z) = -i k_mu; the
    optional constant potential shifts every component uniformly.
    """
    k = as_four_vector(k)
    a = np.zeros(4, dtype=np.complex128) if A_const is None else as_four_vector(A_const)
    w = (consts.epsilon / consts.m) * (consts.hbar * k - consts.e * a)
    return constant_control(w, label="plane_wave_mode")


def optimal_control(jtilde: Field, A: PotentialSpec, consts: PhysicalConstants,
                    backend: str = "spectral") -> np.ndarray:
    """w_mu = (eps/m)(i hbar d_mu Jtilde - e A_mu) sampled on the grid.

    Returns the four control components stacked along the first axis.
    """
    if jtilde.is_spinor:
        raise SocError("the log-amplitude must be a scalar field")
    Av = evaluate_potential(A, jtilde.grid.coords4())
    w = np.empty((4,) + jtilde.grid.shape, dtype=np.complex128)
    for mu in range(4):
        dj = partial_or_zero(jtilde, mu, backend).values
        w[mu] = (consts.epsilon / consts.m) * (1j * consts.hbar * dj - consts.e * Av[mu])
    if not np.all(np.isfinite(w.view(np.float64))):
        raise SocError("control field has non-finite entries (bad gradient?)")
    return w


def weak_condition_residual(w, consts: PhysicalConstants):
    """w_mu w^mu - c^2; zero for controls derived from on-shell modes."""
    if isinstance(w, ControlField):
        if w.constant is None:
            raise SocError("pass sampled control components for non-constant policies")
        w = w.constant
    w = np.asarray(w, dtype=np.complex128)
    if w.shape[0] != 4:
        raise SocError("control components must be stacked along the first axis")
    eta = METRIC_DIAG.reshape((4,) + (1,) * (w.ndim - 1))
    res = np.sum(eta * w * w, axis=0) - consts.c ** 2
    return complex(res) if np.ndim(res) == 0 else res


# -- HJB residual and Hopf-Cole identity -------------------------------------

def hjb_residual_mode(k, consts: PhysicalConstants, A_const=None) -> complex:
    """Stationary HJB residual of the plane-wave log-amplitude -i k.z.

    LHS - RHS with LHS = 0; for A = 0 this equals -Delta, the negated
    on-shell gap.
    """
    k = as_four_vector(k)
    a = np.zeros(4, dtype=np.complex128) if A_const is None else as_four_vector(A_const)
    grad = consts.hbar * k - consts.e * a  # i hbar (-i k_mu) - e A_mu
    quad = complex(np.sum(METRIC_DIAG * grad * grad))
    rhs = -consts.mass_shell + quad
    return -rhs


def hjb_residual(jtilde: Field, A: PotentialSpec, consts: PhysicalConstants,
                 tau_derivative: Field | None = None, backend: str = "spectral",
                 spin_scalar=0.0) -> Field:
    """LHS - RHS of the scalar HJB equation on the grid.

    LHS = -i eps hbar m dtau_J (zero when no proper-time derivative is
    supplied); RHS = -m^2c^2 - hbar^2 d^mu d_mu J - spin_scalar
    + (i hbar d^mu J - e A^mu)(i hbar d_mu J - e A_mu).

    The spin coupling is a 4x4 matrix in general; for a scalar
    log-amplitude the caller must supply its scalar restriction (an
    eigenvalue, or zero when the field strength vanishes).
    """
    if jtilde.is_spinor:
        raise SocError("the log-amplitude must be a scalar field")
    if isinstance(spin_scalar, Field):
        spin_scalar = spin_scalar.values
    Av = evaluate_potential(A, jtilde.grid.coords4())
    quad = np.zeros(jtilde.grid.shape, dtype=np.complex128)
    for mu in range(4):
        g = 1j * consts.hbar * partial_or_zero(jtilde, mu, backend).values - consts.e * Av[mu]
        quad += METRIC_DIAG[mu] * g * g
    rhs = (-consts.mass_shell
           - consts.hbar ** 2 * dalembertian(jtilde, backend).values
           - np.asarray(spin_scalar)
           + quad)
    lhs = np.zeros_like(rhs)
    if tau_derivative is not None:
        lhs = -1j * consts.epsilon * consts.hbar * consts.m * tau_derivative.values
    return Field(jtilde.grid, lhs - rhs)


def hopf_cole_check(phi: Field, backend: str = "spectral",
                    floor_rel: float = 1e-8) -> float:
    """Max |(dJ)^2 + ddJ - ddphi/phi| over the grid, with J = log phi.

    Both sides are computed through genuinely different routes: the left
    through derivatives of the pointwise logarithm, the right through
    derivatives of phi itself.  phi must be bounded away from zero.
    """
    if phi.is_spinor:
        raise HopfColeError("the Hopf-Cole check takes a scalar field")
    mag = np.abs(phi.values)
    floor = floor_rel * float(mag.max())
    if float(mag.min()) < floor:
        idx = np.unravel_index(int(np.argmin(mag)), mag.shape)
        point = tuple(float(phi.grid.axis(mu)[idx[mu]]) for mu in range(phi.grid.dims))
        raise HopfColeError(
            f"|phi| = {mag.min():.3e} < {floor:.3e} near grid point {point}; "
            "the logarithm is ill-conditioned there")
    jt = Field(phi.grid, np.log(phi.values))
    lhs = dalembertian(jt, backend).values.copy()
    for mu in range(phi.grid.dims):
        dj = partial_or_zero(jt, mu, backend).values
        lhs += METRIC_DIAG[mu] * dj * dj
    rhs = dalembertian(phi, backend).values / phi.values
    return float(np.abs(lhs - rhs).max())


def hopf_cole_exponential_error(a: complex, points=None, h: float = 5e-3) -> float:
    """The identity error for phi = exp(a z^1), by local finite differences.

    Both routes use 4th-order central stencils at isolated points, so no
    periodicity is needed; the exact value of both sides is -a^2.
    """
    a = complex(a)
    if points is None:
        points = np.linspace(-1.0, 1.0, 9)
    pts = np.asarray(points, dtype=np.complex128)
    if np.abs(a.imag * (np.abs(pts) + 2 * h)).max() >= np.pi:
        raise HopfColeError("sample points wind past the logarithm branch cut")
    offsets = h * np.array([-2, -1, 0, 1, 2])
    stencil1 = np.array([1, -8, 0, 8, -1]) / (12 * h)
    stencil2 = np.array([-1, 16, -30, 16, -1]) / (12 * h * h)
    worst = 0.0
    for z in pts:
        phi = np.exp(a * (z + offsets))
        jt = np.log(phi)
        d1j = np.dot(stencil1, jt)
        d2j = np.dot(stencil2, jt)
        d2p = np.dot(stencil2, phi)
        lhs = METRIC_DIAG[1] * (d1j * d1j + d2j)
        rhs = METRIC_DIAG[1] * d2p / phi[2]
        worst = max(worst, abs(lhs - rhs))
    return worst


# -- diffusion coefficients and the SDE --------------------------------------

@dataclass(frozen=True)
class DiffusionCoefficients:
    """Complex diffusion amplitudes with their exact squares.

    sigma_mu = sqrt(hbar/m) (1 + i eps) x (1 for mu=0, i otherwise), the
    principal-branch choice; the squares satisfy
    sigma_mu^2 = 2 i eps eta^{mumu} hbar / m.
    """

    sigma: ArrayC
    squares: ArrayC
    branch: str

    def __post_init__(self) -> None:
        for name in ("sigma", "squares"):
            v = np.asarray(getattr(self, name), dtype=np.complex128).reshape(4)
            v.setflags(write=False)
            object.__setattr__(self, name, v)


def make_diffusion(consts: PhysicalConstants) -> DiffusionCoefficients:
    root = math.sqrt(consts.hbar / consts.m)
    rho = root * (1.0 + 1j * consts.epsilon)  # sqrt(2 hbar/m) exp(i eps pi/4)
    sigma = np.array([rho, 1j * rho, 1j * rho, 1j * rho])
    squares = 2j * consts.epsilon * (consts.hbar / consts.m) * METRIC_DIAG.astype(np.complex128)
    sign = "+" if consts.epsilon == 1 else "-"
    return DiffusionCoefficients(sigma, squares, branch=f"rho_eps=exp({sign}i*pi/4)")


def zero_diffusion() -> DiffusionCoefficients:
    """Diffusion disabled; the recursion degenerates to straight lines."""
    z = np.zeros(4, dtype=np.complex128)
    return DiffusionCoefficients(z, z, branch="disabled")


@dataclass(frozen=True)
class EnsembleParams:
    n_paths: int
    steps: int
    ds: float
    z0: ArrayC = field(default_factory=lambda: np.zeros(4, dtype=np.complex128))
    store_controls: bool = True

    def __post_init__(self) -> None:
        if self.n_paths < 1 or self.steps < 1:
            raise SocError("need n_paths >= 1 and steps >= 1")
        if self.ds <= 0:
            raise SocError("step size must be positive")
        object.__setattr__(self, "z0", as_four_vector(self.z0))


@dataclass
class TrajectoryEnsemble:
    """Paths of the complex controlled diffusion, lower-index positions."""

    paths: ArrayC            # (n_paths, steps+1, 4)
    controls: ArrayC | None  # (n_paths, steps, 4)
    seed: int
    ds: float
    diffusion: DiffusionCoefficients
    control_label: str
    potential: PotentialSpec
    truncated: np.ndarray    # per-path blow-up flag
    first_bad_step: np.ndarray  # step index of the blow-up, -1 if clean
    action_samples: ArrayC | None = None

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    @property
    def steps(self) -> int:
        return self.paths.shape[1] - 1


def _path_noise(seed: int, n_paths: int, steps: int) -> np.ndarray:
    """Real N(0,1) increments, one counter-based substream per path."""
    xi = np.empty((n_paths, steps, 4))
    for p in range(n_paths):
        gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, p, 0]))
        xi[p] = gen.standard_normal((steps, 4))
    return xi


def simulate(params: EnsembleParams, w: ControlField, A: PotentialSpec | None,
             consts: PhysicalConstants, seed: int,
             diffusion: DiffusionCoefficients | None = None) -> TrajectoryEnsemble:
    """Forward Euler recursion z' = z + w(z) ds + sigma sqrt(ds) xi.

    Paths whose positions stop being finite are frozen at their last
    finite value and flagged as truncated.
    """
    A = A if A is not None else free()
    diff = diffusion if diffusion is not None else make_diffusion(consts)
    n, steps, ds = params.n_paths, params.steps, params.ds
    xi = _path_noise(seed, n, steps)
    amp = diff.sigma * math.sqrt(ds)

    paths = np.empty((n, steps + 1, 4), dtype=np.complex128)
    controls = np.empty((n, steps, 4), dtype=np.complex128) if params.store_controls else None
    truncated = np.zeros(n, dtype=bool)
    first_bad = np.full(n, -1, dtype=np.int64)

    z = np.broadcast_to(params.z0, (n, 4)).copy()
    paths[:, 0] = z
    for s in range(steps):
        wv = w.fn(z)
        if controls is not None:
            controls[:, s] = wv
        with np.errstate(over="ignore", invalid="ignore"):  # blow-ups are flagged below
            z_new = z + wv * ds + amp * xi[:, s]
        bad = ~np.isfinite(z_new.view(np.float64)).reshape(n, 8).all(axis=1)
        fresh = bad & ~truncated
        if np.any(fresh):
            first_bad[fresh] = s
            truncated |= fresh
        if np.any(truncated):
            z_new[truncated] = z[truncated]  # freeze blown-up paths
            if controls is not None:
                controls[truncated, s] = 0.0
        z = z_new
        paths[:, s + 1] = z
    return TrajectoryEnsemble(paths=paths, controls=controls, seed=seed, ds=ds,
                              diffusion=diff, control_label=w.label, potential=A,
                              truncated=truncated, first_bad_step=first_bad)


# -- stochastic action -------------------------------------------------------

REST_FRAME_SPIN_UP = np.array([1.0, 0.0, 0.0, 0.0], dtype=np.complex128)


@dataclass(frozen=True)
class ActionEstimate:
    mean: complex
    stderr: float
    samples: ArrayC
    n_branch_flags: int      # steps with Re(w.w) < 0 (principal-root cut)
    n_degenerate_flags: int  # steps with w.w = 0 (degenerate kinetic term)


def accumulate_action(ensemble: TrajectoryEnsemble, A: PotentialSpec | None,
                      consts: PhysicalConstants, reference_bispinor=None) -> ActionEstimate:
    """Per-path stochastic action sum_s L(z_s, w_s) ds, with

    L = -mc sqrt(w.w) - eps e A.w - <chi| (e hbar/2m) sigma^{munu} F_munu |chi>.

    The square root takes the principal branch; steps that cross its cut
    (Re(w.w) < 0) are counted in ``n_branch_flags``.  The spin term is
    collapsed to a scalar by sandwiching with a fixed unit reference
    bispinor (rest-frame spin-up by default) -- a convention, recorded in
    output metadata.
    """
    if ensemble.controls is None:
        raise SocError("ensemble was simulated without stored controls")
    A = A if A is not None else ensemble.potential
    chi = np.asarray(reference_bispinor if reference_bispinor is not None
                     else REST_FRAME_SPIN_UP, dtype=np.complex128).reshape(4)
    nrm = np.vdot(chi, chi).real
    if nrm == 0:
        raise SocError("reference bispinor must be nonzero")

    w = ensemble.controls                      # (n, steps, 4)
    z = ensemble.paths[:, :-1, :]              # position at the start of each step
    eta = METRIC_DIAG.reshape(1, 1, 4)
    wsq = np.sum(eta * w * w, axis=2)
    branch_flags = int(np.count_nonzero(wsq.real < 0))
    degenerate_flags = int(np.count_nonzero(wsq == 0))
    lagrangian = -consts.mc * np.sqrt(wsq)

    coords = [METRIC_DIAG[mu] * z[..., mu] for mu in range(4)]  # raise to z^mu
    Av = evaluate_potential(A, coords)
    lagrangian = lagrangian - consts.epsilon * consts.e * np.sum(
        eta * np.moveaxis(Av, 0, -1) * w, axis=2)

    if A.name != "free":
        F = field_strength(A, coords, method="analytic")
        # <chi| sigma^{munu} |chi> is a constant scalar per index pair
        gam = DIRAC
        pref = consts.e * consts.hbar / (2 * consts.m)
        sandwich = np.zeros((4, 4), dtype=np.complex128)
        for mu in range(4):
            for nu in range(4):
                sandwich[mu, nu] = np.vdot(chi, gam.spin_tensor(mu, nu) @ chi) / nrm
        spin = pref * np.einsum("mn,mn...->...", sandwich, F)
        lagrangian = lagrangian - spin

    samples = np.sum(lagrangian, axis=1) * ensemble.ds
    mean = complex(np.mean(samples))
    if ensemble.n_paths > 1:
        var = np.var(samples.real, ddof=1) + np.var(samples.imag, ddof=1)
        stderr = float(np.sqrt(var / ensemble.n_paths))
    else:
        stderr = float("nan")
    ensemble.action_samples = samples
    return ActionEstimate(mean=mean, stderr=stderr, samples=samples,
                          n_branch_flags=branch_flags,
                          n_degenerate_flags=degenerate_flags)


# -- generator consistency ---------------------------------------------------

@dataclass(frozen=True)
class PolynomialTestFunction:
    """Holomorphic polynomial in the four complex position components."""

    coeffs: dict
    label: str

    def __post_init__(self) -> None:
        for exps, _ in self.coeffs.items():
            if len(exps) != 4 or any(e < 0 for e in exps):
                raise SocError(f"bad exponent tuple {exps}")
            if sum(exps) > 4:
                raise SocError("test polynomials must have degree <= 4")

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape[:-1], dtype=np.complex128)
        for exps, c in self.coeffs.items():
            term = np.full(z.shape[:-1], complex(c))
            for mu, p in enumerate(exps):
                if p:
                    term = term * z[..., mu] ** p
            out = out + term
        return out

    def grad(self, z0) -> ArrayC:
        z0 = as_four_vector(z0)
        g = np.zeros(4, dtype=np.complex128)
        for exps, c in self.coeffs.items():
            for mu, p in enumerate(exps):
                if p == 0:
                    continue
                term = complex(c) * p
                for nu, q in enumerate(exps):
                    qq = q - 1 if nu == mu else q
                    term *= z0[nu] ** qq
                g[mu] += term
        return g

    def hess_diag(self, z0) -> ArrayC:
        z0 = as_four_vector(z0)
        hd = np.zeros(4, dtype=np.complex128)
        for exps, c in self.coeffs.items():
            for mu, p in enumerate(exps):
                if p < 2:
                    continue
                term = complex(c) * p * (p - 1)
                for nu, q in enumerate(exps):
                    qq = q - 2 if nu == mu else q
                    term *= z0[nu] ** qq
                hd[mu] += term
        return hd


def monomial(mu: int, power: int = 1, label: str | None = None) -> PolynomialTestFunction:
    exps = [0, 0, 0, 0]
    exps[mu] = power
    default = f"z{mu}^{power}" if power > 1 else f"z{mu}"
    return PolynomialTestFunction({tuple(exps): 1.0}, label or default)


def standard_test_battery() -> list[PolynomialTestFunction]:
    return [
        monomial(1),
        monomial(0),
        monomial(1, 2),
        PolynomialTestFunction({(1, 1, 0, 0): 1.0}, "z0*z1"),
        monomial(0, 2),
        monomial(1, 3),
    ]


@dataclass(frozen=True)
class GeneratorReport:
    label: str
    estimate: complex
    exact: complex
    abs_error: float
    rel_error: float
    stderr: float
    n_paths: int
    ds: float
    passed: bool


def run_generator_battery(consts: PhysicalConstants, ds: float, n_paths: int,
                          seed: int, n_sigma: float = 3.0,
                          drift=(0.3, -0.2, 0.1, 0.05)) -> list[GeneratorReport]:
    """The standard six-function battery, one independent substream set each.

    Linear test functions run with a constant drift (the diffusion term
    cancels for them); the nonlinear ones run drift-free so the one-step
    recursion has no O(ds) bias and the 3-sigma verdict is sharp.
    """
    drift_w = constant_control(np.asarray(drift, dtype=np.complex128), "battery_drift")
    reports = []
    for i, f in enumerate(standard_test_battery()):
        w = drift_w if f.label in ("z0", "z1") else zero_control()
        reports.append(generator_check(f, w, consts, ds=ds, n_paths=n_paths,
                                       seed=seed + 7919 * (i + 1), n_sigma=n_sigma))
    return reports


def generator_check(f: PolynomialTestFunction, w: ControlField,
                    consts: PhysicalConstants, ds: float, n_paths: int, seed: int,
                    z0=None, diffusion: DiffusionCoefficients | None = None,
                    n_sigma: float = 3.0) -> GeneratorReport:
    """Compare (E[f(z_ds)] - f(z_0))/ds against the generator of the diffusion,

        G f = w_mu df/dz_mu + 1/2 sum_mu sigma_mu^2 d2f/dz_mu^2,

    evaluated at z_0.  The pass verdict is |estimate - G f| <= n_sigma
    standard errors of the Monte Carlo mean.
    """
    z0 = np.zeros(4, dtype=np.complex128) if z0 is None else as_four_vector(z0)
    diff = diffusion if diffusion is not None else make_diffusion(consts)
    params = EnsembleParams(n_paths=n_paths, steps=1, ds=ds, z0=z0, store_controls=False)
    ens = simulate(params, w, free(), consts, seed, diffusion=diff)
    f1 = f(ens.paths[:, 1, :])
    f0 = complex(f(z0.reshape(1, 4))[0])
    estimate = complex((np.mean(f1) - f0) / ds)
    var = np.var(f1.real, ddof=1) + np.var(f1.imag, ddof=1)
    stderr = float(np.sqrt(var / n_paths) / ds)

    w0 = w.fn(z0.reshape(1, 4))[0]
    exact = complex(np.dot(w0, f.grad(z0)) + 0.5 * np.dot(diff.squares, f.hess_diag(z0)))
    abs_error = abs(estimate - exact)
    rel_error = abs_error / abs(exact) if exact != 0 else float("inf")
    return GeneratorReport(label=f.label, estimate=estimate, exact=exact,
                           abs_error=abs_error, rel_error=rel_error, stderr=stderr,
                           n_paths=n_paths, ds=ds,
                           passed=abs_error <= n_sigma * stderr)
