"""Periodic Fourier grid and the spectral operators used by every model.

Fields are plain 1-D ``numpy`` arrays of physical samples living on a
:class:`Grid`.  Spectral coefficients use the real-FFT layout
(``numpy.fft.rfft``), i.e. modes ``k = 0 .. n/2`` with the Nyquist mode last.

Conventions
-----------
* Even multipliers (``|xi|**(2 nu)``, second derivative) keep the Nyquist mode.
* Odd multipliers (first and third derivatives) zero it: ``i xi`` has no
  real-valued counterpart at ``k = -n/2``.
* Products are formed on a zero-padded grid and truncated back, which makes
  polynomial nonlinearities exact on the retained modes.  Factors enter the
  product without their Nyquist mode and the product's Nyquist mode is
  discarded.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

logger = logging.getLogger(__name__)

ROUNDTRIP_RTOL = 1e-13
REALNESS_ATOL = 1e-13


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid of ``n`` points on ``[0, length)``."""

    n: int
    length: float
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValueError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"grid size must be even and >= 8, got {self.n}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValueError(f"grid length must be positive, got {self.length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Full ladder ``2 pi k / L`` for ``k = -n/2 .. n/2 - 1`` (sorted)."""
        k = np.arange(-self.n // 2, self.n // 2)
        return 2 * np.pi * k / self.length

    @cached_property
    def k(self) -> np.ndarray:
        """Non-negative wavenumbers in rfft order (last entry is Nyquist)."""
        return 2 * np.pi * np.arange(self.n // 2 + 1) / self.length

    @cached_property
    def ik(self) -> np.ndarray:
        """Symbol of d/dx with the Nyquist mode zeroed."""
        ik = 1j * self.k
        ik[-1] = 0.0
        return ik

    def frac_symbol(self, nu: float) -> np.ndarray:
        """``|xi|**(2 nu)`` on the rfft modes; the zero mode maps to 0."""
        key = ("frac", float(nu))
        if key not in self._cache:
            sym = np.zeros_like(self.k)
            sym[1:] = self.k[1:] ** (2.0 * nu)
            self._cache[key] = sym
        return self._cache[key]

    def to_spectral(self, f: np.ndarray) -> np.ndarray:
        return np.fft.rfft(f)

    def to_physical(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.irfft(fh, n=self.n)

    def integrate(self, f: np.ndarray) -> float:
        """Trapezoid rule over one period (spectrally exact for periodic data)."""
        return float(np.sum(f) * self.dx)

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return self.integrate(f * g)


def make_grid(n: int, length: float) -> Grid:
    return Grid(n, length)


def full_spectrum(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Complex coefficients indexed like :attr:`Grid.wavenumbers`."""
    check_field(grid, f)
    return np.fft.fftshift(np.fft.fft(f))


def check_field(grid: Grid, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (grid.n,):
        raise ValueError(f"field has shape {f.shape}, grid expects ({grid.n},)")
    if not np.all(np.isfinite(f)):
        raise ValueError("field contains non-finite values")
    return f


def check_nu(nu: float, warn: bool = False) -> float:
    nu = float(nu)
    if not (math.isfinite(nu) and nu > 0):
        raise ValueError(f"dispersion exponent nu must be > 0, got {nu}")
    if warn and nu < 1:
        logger.warning("nu = %g < 1 lies outside the well-posed range nu >= 1", nu)
    return nu


def roundtrip_error(grid: Grid, f: np.ndarray) -> float:
    """Relative max-norm error of physical -> spectral -> physical."""
    f = check_field(grid, f)
    scale = max(np.max(np.abs(f)), np.finfo(float).tiny)
    return float(np.max(np.abs(grid.to_physical(grid.to_spectral(f)) - f)) / scale)


def apply_multiplier(grid: Grid, f: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    return grid.to_physical(symbol * grid.to_spectral(f))


def fractional_laplacian(grid: Grid, f: np.ndarray, nu: float) -> np.ndarray:
    """``(-D^2)^nu f`` realized as the Fourier multiplier ``|xi|**(2 nu)``."""
    f = check_field(grid, f)
    nu = check_nu(nu)
    return apply_multiplier(grid, f, grid.frac_symbol(nu))


def derivative(grid: Grid, f: np.ndarray, order: int = 1) -> np.ndarray:
    f = check_field(grid, f)
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order!r}")
    if order == 2:
        symbol = -grid.k**2
    else:
        symbol = grid.ik**order
    return apply_multiplier(grid, f, symbol)


def _padded_size(n: int, ratio: float) -> int:
    m = int(math.ceil(n * ratio))
    return m + (m % 2)


def default_pad_ratio(n_factors: int) -> float:
    """Padding that keeps an ``n_factors``-fold product unaliased."""
    return max(1.5, (n_factors + 1) / 2)


def dealiased_product_hat(grid: Grid, *factors_hat: np.ndarray, pad_ratio: float | None = None) -> np.ndarray:
    """Spectral coefficients of the product of fields given spectrally."""
    if not factors_hat:
        raise ValueError("need at least one factor")
    if len(factors_hat) == 1:
        out = factors_hat[0].copy()
        out[-1] = 0.0
        return out
    if pad_ratio is None:
        pad_ratio = default_pad_ratio(len(factors_hat))
    if pad_ratio < (len(factors_hat) + 1) / 2:
        raise ValueError(
            f"pad ratio {pad_ratio} too small for a {len(factors_hat)}-fold product"
        )
    n, m = grid.n, _padded_size(grid.n, pad_ratio)
    half = n // 2
    prod = np.ones(m)
    for fh in factors_hat:
        padded = np.zeros(m // 2 + 1, dtype=complex)
        padded[:half] = fh[:half]
        prod *= np.fft.irfft(padded, n=m)
    out = np.fft.rfft(prod)[: half + 1] * (m / n) ** (len(factors_hat) - 1)
    out[-1] = 0.0
    return out


def dealiased_product(grid: Grid, *factors: np.ndarray, pad_ratio: float | None = None) -> np.ndarray:
    hats = [grid.to_spectral(check_field(grid, f)) for f in factors]
    return grid.to_physical(dealiased_product_hat(grid, *hats, pad_ratio=pad_ratio))


def power_nonlinearity(grid: Grid, f: np.ndarray, p: int, pad_ratio: float | None = None) -> np.ndarray:
    """Dealiased pointwise power ``f**(p + 1)``."""
    f = check_field(grid, f)
    p = check_power(p)
    fh = grid.to_spectral(f)
    return grid.to_physical(dealiased_product_hat(grid, *([fh] * (p + 1)), pad_ratio=pad_ratio))


def check_power(p) -> int:
    if isinstance(p, bool) or int(p) != p or p < 1:
        raise ValueError(f"nonlinearity power p must be an integer >= 1, got {p!r}")
    return int(p)


def shift(grid: Grid, f: np.ndarray, s: float) -> np.ndarray:
    """Samples of the trigonometric interpolant of ``f`` at ``x_j + s``."""
    fh = grid.to_spectral(check_field(grid, f))
    phase = np.exp(1j * grid.k * s)
    # the Nyquist cosine keeps only its even part under translation
    phase[-1] = np.cos(grid.k[-1] * s)
    return grid.to_physical(fh * phase)


def interpolate(grid: Grid, f: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``f`` at arbitrary points."""
    fh = grid.to_spectral(check_field(grid, f)) / grid.n
    weights = np.full(fh.shape, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    points = np.asarray(points, dtype=float)
    phases = np.exp(1j * np.multiply.outer(points, grid.k))
    return np.real(phases @ (weights * fh))


def periodic_gaussian(grid: Grid, center: float, sigma: float, amplitude: float = 1.0, images: int = 3) -> np.ndarray:
    """``amplitude * exp(-(x - center)**2 / sigma**2)`` summed over periodic images."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = grid.nodes
    out = np.zeros(grid.n)
    for m in range(-images, images + 1):
        out += np.exp(-((x - center - m * grid.length) ** 2) / sigma**2)
    return amplitude * out


def random_bandlimited(grid: Grid, rng: np.random.Generator, kmax: int, amplitude: float = 1.0, mean: float = 0.0) -> np.ndarray:
    """Random real field with Fourier content on modes ``1..kmax`` only."""
    if not 1 <= kmax < grid.n // 2:
        raise ValueError(f"kmax must lie in [1, {grid.n // 2 - 1}]")
    fh = np.zeros(grid.n // 2 + 1, dtype=complex)
    fh[1 : kmax + 1] = rng.standard_normal(kmax) + 1j * rng.standard_normal(kmax)
    f = grid.to_physical(fh)
    return mean + amplitude * f / np.max(np.abs(f))
