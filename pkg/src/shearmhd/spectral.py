"""Discrete Fourier representation on a truncated doubly periodic domain.

The x-period is fixed to 2*pi, so the x-wavenumber k runs over the integers
{-Nx/2, ..., Nx/2-1}.  The y-period is 2*pi*Ly, so the y-wavenumber eta runs
over (1/Ly)*{-Ny/2, ..., Ny/2-1}.  Coefficient arrays have shape (Nx, Ny)
with axis 0 indexing k and axis 1 indexing eta, both in standard FFT order.
Nyquist rows/columns are kept identically zero.

Conventions used throughout the package:

* physical samples  f(x_j, y_m) = sum_{k,eta} fhat(k,eta) e^{i(k x_j + eta y_m)},
  i.e. ``phys = Nx*Ny * ifft2(coeffs)`` and ``coeffs = fft2(phys)/(Nx*Ny)``;
* quadratic products are evaluated on a zero-padded grid (>= 3/2 rule per
  axis) so that the retained modes carry the exact convolution, then
  truncated by the 2/3-rule mask |k| <= Nx/3, |eta*Ly| <= Ny/3;
* weighted norms are discretizations of sum_k integral d(eta):
  ``norm(f)^2 = (1/Ly) * sum_{k,eta} w(k,eta)^2 |fhat|^2``.

Shear-frame derivative symbols: d_x -> i k, d_y^t -> i(eta - k t),
Lambda_t = sqrt(k^2 + (eta - k t)^2), Delta_t^{-1} -> -1/Lambda_t^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Mode layout and cached wavenumber arrays for one doubly periodic box."""

    Nx: int
    Ny: int
    Ly: float = 1.0

    def __post_init__(self):
        if self.Nx < 4 or self.Ny < 4 or self.Nx % 2 or self.Ny % 2:
            raise ValueError("Nx, Ny must be even integers >= 4")
        if self.Ly <= 0:
            raise ValueError("Ly must be positive")
        k = np.fft.fftfreq(self.Nx, d=1.0 / self.Nx)  # integers, FFT order
        n = np.fft.fftfreq(self.Ny, d=1.0 / self.Ny)  # integer eta-index
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "eta", n / self.Ly)
        object.__setattr__(self, "K", k[:, None])
        object.__setattr__(self, "ETA", (n / self.Ly)[None, :])
        keep = (np.abs(k[:, None]) <= self.Nx / 3.0) & (np.abs(n[None, :]) <= self.Ny / 3.0)
        object.__setattr__(self, "dealias_keep", keep)
        nyq = (k[:, None] == -self.Nx // 2) | (n[None, :] == -self.Ny // 2)
        object.__setattr__(self, "nyquist", nyq)

    @property
    def shape(self):
        return (self.Nx, self.Ny)

    def zeros(self):
        return np.zeros(self.shape, dtype=np.complex128)


def dealias_mask(grid: Grid) -> np.ndarray:
    """Boolean mask, true exactly for |k| <= Nx/3 and |eta*Ly| <= Ny/3."""
    return grid.dealias_keep.copy()


def lambda_t(k, eta, t):
    """Half-Laplacian symbol sqrt(k^2 + (eta - k*t)^2); 0 only at (0,0)."""
    return np.hypot(np.asarray(k, dtype=float), np.asarray(eta) - np.asarray(k) * t)


@dataclass(frozen=True)
class ShearSymbols:
    """Per-mode sheared-frame derivative symbols at a fixed time.

    Attributes are full (Nx, Ny) arrays: ``ikx`` = ik, ``idyt`` = i(eta-kt),
    ``u`` = eta - k*t, ``lam2`` = k^2+u^2, ``inv_lap`` = Delta_t^{-1} symbol
    -1/lam2 (0 at the (0,0) mode, where inversion is undefined).
    """

    grid: Grid
    t: float
    ikx: np.ndarray = field(init=False)
    idyt: np.ndarray = field(init=False)
    u: np.ndarray = field(init=False)
    lam2: np.ndarray = field(init=False)
    lam: np.ndarray = field(init=False)
    inv_lap: np.ndarray = field(init=False)

    def __post_init__(self):
        g = self.grid
        u = g.ETA - g.K * self.t
        lam2 = g.K**2 + u**2
        with np.errstate(divide="ignore"):
            inv = np.where(lam2 > 0, -1.0 / np.where(lam2 > 0, lam2, 1.0), 0.0)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "ikx", 1j * g.K * np.ones_like(u))
        object.__setattr__(self, "idyt", 1j * u)
        object.__setattr__(self, "lam2", lam2)
        object.__setattr__(self, "lam", np.sqrt(lam2))
        object.__setattr__(self, "inv_lap", inv)


def shear_symbols(grid: Grid, t: float) -> ShearSymbols:
    return ShearSymbols(grid, float(t))


@dataclass
class SpectralField:
    """Complex Fourier coefficient table plus a Hermitian-symmetry flag."""

    grid: Grid
    coeffs: np.ndarray
    reality: bool = True

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ValueError("coefficient shape does not match grid")
        if self.reality:
            check_hermitian(self.coeffs)

    def copy(self):
        return SpectralField(self.grid, self.coeffs.copy(), self.reality)


def conj_flip(coeffs: np.ndarray) -> np.ndarray:
    """conj(f)(-k,-eta), the Hermitian partner table."""
    out = np.conj(coeffs[::-1, ::-1])
    out = np.roll(out, 1, axis=0)
    out = np.roll(out, 1, axis=1)
    return out


def hermitian_defect(coeffs: np.ndarray) -> float:
    """Relative departure from fhat(-k,-eta) = conj(fhat(k,eta))."""
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(coeffs - conj_flip(coeffs))) / scale)


def check_hermitian(coeffs: np.ndarray, rtol: float = HERMITIAN_RTOL):
    d = hermitian_defect(coeffs)
    if d > rtol:
        raise ValueError(f"field violates Hermitian symmetry (defect {d:.3e})")


def hermitize(coeffs: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian subspace (average with the partner table)."""
    return 0.5 * (coeffs + conj_flip(coeffs))


def to_physical(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(coeffs) * (grid.Nx * grid.Ny)


def from_physical(grid: Grid, values: np.ndarray) -> np.ndarray:
    return np.fft.fft2(values) / (grid.Nx * grid.Ny)


def _pad_len(n: int) -> int:
    m = (3 * n) // 2
    return m + (m % 2)


def _pad(coeffs: np.ndarray, Mx: int, My: int) -> np.ndarray:
    Nx, Ny = coeffs.shape
    out = np.zeros((Mx, My), dtype=np.complex128)
    hx, hy = Nx // 2, Ny // 2
    out[:hx, :hy] = coeffs[:hx, :hy]
    out[:hx, My - hy:] = coeffs[:hx, hy:]
    out[Mx - hx:, :hy] = coeffs[hx:, :hy]
    out[Mx - hx:, My - hy:] = coeffs[hx:, hy:]
    return out


def _unpad(coeffs: np.ndarray, Nx: int, Ny: int) -> np.ndarray:
    Mx, My = coeffs.shape
    out = np.zeros((Nx, Ny), dtype=np.complex128)
    hx, hy = Nx // 2, Ny // 2
    out[:hx, :hy] = coeffs[:hx, :hy]
    out[:hx, hy:] = coeffs[:hx, My - hy:]
    out[hx:, :hy] = coeffs[Mx - hx:, :hy]
    out[hx:, hy:] = coeffs[Mx - hx:, My - hy:]
    return out


class ProductWorkspace:
    """Reusable padded-transform pipeline for quadratic products.

    Inverse transforms of any number of factors are taken on the padded grid,
    pointwise products formed there, and results transformed back and cut to
    the 2/3-rule mask.  Padding >= 3/2 per axis makes the retained modes of a
    quadratic product equal to the exact convolution (no aliased corner even
    when Nx or Ny is divisible by 3).
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.Mx = _pad_len(grid.Nx)
        self.My = _pad_len(grid.Ny)

    def phys(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(_pad(coeffs, self.Mx, self.My)) * (self.Mx * self.My)

    def spec(self, values: np.ndarray, mask: bool = True) -> np.ndarray:
        c = _unpad(np.fft.fft2(values), self.grid.Nx, self.grid.Ny) / (self.Mx * self.My)
        if mask:
            c *= self.grid.dealias_keep
        return c


def nonlinear_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Dealiased pointwise product of two fields (exact convolution on the mask)."""
    if f.grid is not g.grid and f.grid != g.grid:
        raise ValueError("grid mismatch")
    ws = ProductWorkspace(f.grid)
    c = ws.spec(ws.phys(f.coeffs) * ws.phys(g.coeffs))
    if f.reality and g.reality:
        c = hermitize(c)
    return SpectralField(f.grid, c, reality=f.reality and g.reality)


def convolution_direct(grid: Grid, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """O(N^2) reference convolution, (f*g)(k,eta) = sum f(k',eta')g(k-k',eta-eta').

    Sum runs over all table entries of f; modes falling outside the table are
    dropped (true truncated convolution, no periodic wrap).  Test oracle only.
    """
    Nx, Ny = grid.shape
    out = np.zeros((Nx, Ny), dtype=np.complex128)
    kix = np.fft.fftfreq(Nx, 1.0 / Nx).astype(int)
    niy = np.fft.fftfreq(Ny, 1.0 / Ny).astype(int)
    index_x = {v: i for i, v in enumerate(kix)}
    index_y = {v: i for i, v in enumerate(niy)}
    for i1, k1 in enumerate(kix):
        for j1, n1 in enumerate(niy):
            a = f[i1, j1]
            if a == 0:
                continue
            for i2, k2 in enumerate(kix):
                ks = k1 + k2
                if ks not in index_x:
                    continue
                for j2, n2 in enumerate(niy):
                    ns = n1 + n2
                    if ns not in index_y:
                        continue
                    out[index_x[ks], index_y[ns]] += a * g[i2, j2]
    return out


def sheared_gradient(f: SpectralField, t: float):
    """(d_x f, d_y^t f) as coefficient tables."""
    sym = shear_symbols(f.grid, t)
    return sym.ikx * f.coeffs, sym.idyt * f.coeffs


def random_hermitian_coeffs(grid: Grid, rng: np.random.Generator,
                            envelope: np.ndarray | None = None) -> np.ndarray:
    """Random mean-free Hermitian table with Nyquist rows zeroed."""
    raw = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if envelope is not None:
        raw = raw * envelope
    c = hermitize(raw)
    c[grid.nyquist] = 0.0
    c[0, 0] = 0.0
    return c


def l2_norm(grid: Grid, *tables: np.ndarray) -> float:
    """sqrt((1/Ly) * sum |fhat|^2) accumulated over all given tables."""
    s = sum(float(np.sum(np.abs(t) ** 2)) for t in tables)
    return float(np.sqrt(s / grid.Ly))


def physical_l2_norm(grid: Grid, *tables: np.ndarray) -> float:
    """Sample-quadrature L2 norm scaled to match :func:`l2_norm` (Parseval)."""
    dx = 2 * np.pi / grid.Nx
    dy = 2 * np.pi * grid.Ly / grid.Ny
    s = 0.0
    for c in tables:
        p = to_physical(grid, c)
        s += float(np.sum(np.abs(p) ** 2)) * dx * dy
    return float(np.sqrt(s / (4 * np.pi**2 * grid.Ly**2)))
