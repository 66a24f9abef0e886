"""Regular periodic spacetime lattice with spectral and fd4 differentiation.

The first ``dims`` coordinates (z^0, z^1, ...) are active; fields are
sampled on a uniform periodic grid over them and are constant along the
remaining coordinates.  The default experiment dimensionality is 1+1.
Axis mu spans [0, extent[mu]) with points[mu] samples, so the mode
numbers n give commensurate wave components k_mu = 2 pi n / extent[mu].

``partial`` differentiates with respect to the coordinate z^mu, i.e. it
returns the lower-index derivative field d_mu f.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import METRIC_DIAG, as_four_vector


class GridError(ValueError):
    pass


BACKENDS = ("spectral", "fd4")


@dataclass(frozen=True)
class SpacetimeGrid:
    dims: int = 2
    extent: tuple[float, ...] = (2 * np.pi, 2 * np.pi)
    points: tuple[int, ...] = (256, 256)

    def __post_init__(self) -> None:
        if not 1 <= self.dims <= 4:
            raise GridError(f"dims must be 1..4, got {self.dims}")
        object.__setattr__(self, "extent", tuple(float(x) for x in self.extent))
        object.__setattr__(self, "points", tuple(int(n) for n in self.points))
        if len(self.extent) != self.dims or len(self.points) != self.dims:
            raise GridError("extent and points must have one entry per active axis")
        for L in self.extent:
            if L <= 0:
                raise GridError(f"axis extent must be positive, got {L}")
        for n in self.points:
            if n < 8 or (n & (n - 1)) != 0:
                raise GridError(f"points per axis must be a power of two >= 8, got {n}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.extent, self.points))

    def is_active(self, mu: int) -> bool:
        return 0 <= mu < self.dims

    def axis(self, mu: int) -> np.ndarray:
        if not self.is_active(mu):
            raise GridError(f"axis {mu} is inactive on a {self.dims}-dim grid")
        return np.arange(self.points[mu]) * self.spacing[mu]

    def meshes(self) -> list[np.ndarray]:
        return list(np.meshgrid(*(self.axis(mu) for mu in range(self.dims)), indexing="ij"))

    def coords4(self) -> list:
        """All four coordinates; inactive ones are the scalar 0.0."""
        active = self.meshes()
        return [active[mu] if mu < self.dims else 0.0 for mu in range(4)]

    def angular_frequencies(self, mu: int) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.points[mu], d=self.spacing[mu])

    def commensurate_wavevector(self, modes) -> np.ndarray:
        """k_mu = 2 pi n_mu / L_mu for integer mode numbers (inactive axes 0)."""
        k = np.zeros(4)
        for mu, n in enumerate(modes):
            if n != 0 and not self.is_active(mu):
                raise GridError(f"nonzero mode on inactive axis {mu}")
            if self.is_active(mu):
                k[mu] = 2 * np.pi * n / self.extent[mu]
        return k


@dataclass(frozen=True)
class Field:
    """Complex scalar (grid.shape) or 4-component spinor ((4,)+grid.shape)."""

    grid: SpacetimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape == self.grid.shape:
            pass
        elif v.shape == (4,) + self.grid.shape:
            pass
        else:
            raise GridError(
                f"field shape {v.shape} matches neither scalar {self.grid.shape} "
                f"nor spinor {(4,) + self.grid.shape}")
        if not np.all(np.isfinite(v.view(np.float64))):
            raise GridError("field contains non-finite values")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def is_spinor(self) -> bool:
        return self.values.ndim == self.grid.dims + 1

    @property
    def ncomp(self) -> int:
        return 4 if self.is_spinor else 1

    def component(self, a: int) -> np.ndarray:
        return self.values[a] if self.is_spinor else self.values

    def __add__(self, other: "Field") -> "Field":
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.grid, self.values - other.values)

    def __rmul__(self, c) -> "Field":
        return Field(self.grid, c * self.values)


ScalarField = Field
SpinorField = Field


def l2norm(f: Field) -> float:
    """Root-mean-square magnitude over all components and points."""
    return float(np.sqrt(np.mean(np.abs(f.values) ** 2)))


def _axis_of(f: Field, mu: int) -> int:
    return mu + (1 if f.is_spinor else 0)


def partial(f: Field, mu: int, backend: str = "spectral") -> Field:
    """d f / d z^mu on the periodic grid (lower-index derivative)."""
    if not f.grid.is_active(mu):
        raise GridError(f"cannot differentiate along inactive axis {mu}")
    if backend == "spectral":
        ik = 1j * f.grid.angular_frequencies(mu)
        n = f.grid.points[mu]
        if n % 2 == 0:
            ik = ik.copy()
            ik[n // 2] = 0.0  # symmetric convention for the Nyquist mode
        axis = _axis_of(f, mu)
        shape = [1] * f.values.ndim
        shape[axis] = n
        fhat = np.fft.fft(f.values, axis=axis)
        out = np.fft.ifft(ik.reshape(shape) * fhat, axis=axis)
    elif backend == "fd4":
        axis = _axis_of(f, mu)
        h = f.grid.spacing[mu]
        v = f.values
        out = (-np.roll(v, -2, axis=axis) + 8 * np.roll(v, -1, axis=axis)
               - 8 * np.roll(v, 1, axis=axis) + np.roll(v, 2, axis=axis)) / (12 * h)
    else:
        raise GridError(f"unknown backend {backend!r}; valid: {BACKENDS}")
    return Field(f.grid, out)


def partial_or_zero(f: Field, mu: int, backend: str = "spectral") -> Field:
    """Like ``partial`` but inactive axes return the zero field."""
    if not f.grid.is_active(mu):
        return Field(f.grid, np.zeros_like(f.values))
    return partial(f, mu, backend)


def dalembertian(f: Field, backend: str = "spectral") -> Field:
    """d^mu d_mu f = eta^{munu} d_nu d_mu f over the active axes."""
    out = np.zeros_like(f.values)
    for mu in range(f.grid.dims):
        out = out + METRIC_DIAG[mu] * partial(partial(f, mu, backend), mu, backend).values
    return Field(f.grid, out)


def plane_wave(grid: SpacetimeGrid, k, chi=None, amplitude: complex = 1.0) -> Field:
    """exp(-i k.z) (times a constant bispinor chi, if given).

    k holds lower-index components; its inactive-axis components must
    vanish since the grid cannot represent that dependence.
    """
    k = as_four_vector(k)
    for mu in range(grid.dims, 4):
        if k[mu] != 0:
            raise GridError(f"plane wave needs k[{mu}]=0 on a {grid.dims}-dim grid")
    zs = grid.meshes()
    phase = sum(k[mu] * zs[mu] for mu in range(grid.dims))
    wave = amplitude * np.exp(-1j * phase)
    if chi is None:
        return Field(grid, wave)
    chi = np.asarray(chi, dtype=np.complex128).reshape(4)
    return Field(grid, chi.reshape((4,) + (1,) * grid.dims) * wave[np.newaxis])


def random_band_limited(grid: SpacetimeGrid, max_mode: int, rng: np.random.Generator,
                        spinor: bool = False) -> Field:
    """Random field whose spectrum is supported on modes |n_mu| <= max_mode."""
    for n, L in zip(grid.points, grid.extent):
        if max_mode >= n // 2:
            raise GridError(f"max_mode {max_mode} reaches the Nyquist mode of {n} points")
    ncomp = 4 if spinor else 1
    comps = []
    block_shape = tuple(2 * max_mode + 1 for _ in range(grid.dims))
    window = tuple(np.r_[0:max_mode + 1, -max_mode:0] for _ in range(grid.dims))
    for _ in range(ncomp):
        spec = np.zeros(grid.shape, dtype=np.complex128)
        block = rng.standard_normal(block_shape) + 1j * rng.standard_normal(block_shape)
        spec[np.ix_(*window)] = block
        comps.append(np.fft.ifftn(spec) * np.sqrt(np.prod(grid.shape)))
    values = comps[0] if not spinor else np.stack(comps)
    return Field(grid, values)


def field_to_csv(f: Field, path) -> None:
    """Dump point coordinates and component values (17 significant digits)."""
    zs = f.grid.meshes()
    d = f.grid.dims
    header = [f"z{mu}" for mu in range(d)]
    for a in range(f.ncomp):
        header += [f"c{a}_re", f"c{a}_im"]
    cols = [z.ravel() for z in zs]
    for a in range(f.ncomp):
        comp = f.component(a).ravel()
        cols += [comp.real, comp.imag]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join("%.17g" % float(x) for x in row) + "\n")
