"""Seeded generators for the synthetic experiment protocols.

All protocols build on a linear mixed-effects model on an equally spaced grid
over [0, 1]: realisation i is mu(t) + xi_{i,1} phi_1(t) + xi_{i,2} phi_2(t)
+ noise, with Fourier basis functions phi_1(t) = sqrt(2) sin(2 pi t) and
phi_2(t) = sqrt(2) cos(2 pi t). Normal parameters are (mean, variance)
throughout, exponential coefficients are centred to zero mean, and every
generator is bitwise-reproducible from its spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .panels import SamplePanel

PROTOCOLS = ("meanshift", "varshift", "lineardep", "sharedcoeff", "rotation")
COEFF_DISTS = ("gaussian", "student", "uniform", "exponential")

# stable per-protocol stream labels mixed into the seed
_PROTOCOL_ID = {name: i + 1 for i, name in enumerate(PROTOCOLS)}

# default coefficient variances of the mixed-effects model
_VAR_COEFF_1 = 10.0
_VAR_COEFF_2 = 5.0
_VAR_NOISE = 0.25


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of one synthetic panel-pair draw.

    ``n`` only matters for the two-sample protocols; the dependence protocols
    produce paired panels with m rows each. ``y_noise_var`` is the variance of
    the additive noise on Y in the linear-dependence protocol (a test hook;
    the protocol's stated value is 1).
    """

    protocol: str
    m: int
    n: int | None = None
    t: int = 10
    t_y: int | None = None
    delta_mu: float = 0.0
    delta_sigma: float = 0.0
    theta: float = 0.0
    coeff_dist: str = "gaussian"
    y_noise_var: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ParameterError(f"unknown protocol: {self.protocol!r}")
        if self.m < 1 or self.t < 1:
            raise ParameterError(f"need m >= 1 and t >= 1, got m={self.m}, t={self.t}")
        if self.n is not None and self.n < 1:
            raise ParameterError(f"need n >= 1, got n={self.n}")
        if self.delta_mu < 0 or self.delta_sigma < 0:
            raise ParameterError("shift parameters must be nonnegative")
        if self.protocol == "rotation":
            if not 0.0 <= self.theta <= math.pi / 4:
                raise ParameterError(f"theta must lie in [0, pi/4], got {self.theta}")
            if self.coeff_dist not in ("student", "uniform", "exponential"):
                raise ParameterError(
                    f"rotation needs coeff_dist in student/uniform/exponential, "
                    f"got {self.coeff_dist!r}"
                )
        elif self.coeff_dist != "gaussian":
            raise ParameterError(f"{self.protocol} uses gaussian coefficients only")

    @property
    def n_rows_y(self) -> int:
        return self.m if self.n is None else self.n


def time_grid(t: int) -> np.ndarray:
    """t equally spaced points spanning [0, 1] inclusive; [0] for t = 1."""
    return np.linspace(0.0, 1.0, t)


def fourier_basis(t) -> tuple[np.ndarray, np.ndarray]:
    """The two Fourier basis functions sqrt(2) sin(2 pi t), sqrt(2) cos(2 pi t)."""
    t = np.asarray(t, dtype=np.float64)
    root2 = math.sqrt(2.0)
    return root2 * np.sin(2.0 * math.pi * t), root2 * np.cos(2.0 * math.pi * t)


def _rng_for(spec: GeneratorSpec) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([int(spec.seed), _PROTOCOL_ID[spec.protocol]])
    )


def _coefficients(rng: np.random.Generator, dist: str, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw the two basis-function coefficient vectors for one panel."""
    if dist == "gaussian":
        return (
            rng.normal(0.0, math.sqrt(_VAR_COEFF_1), m),
            rng.normal(0.0, math.sqrt(_VAR_COEFF_2), m),
        )
    if dist == "student":
        return rng.standard_t(3, m), rng.standard_t(5, m)
    if dist == "uniform":
        return rng.uniform(-10.0, 10.0, m), rng.uniform(-5.0, 5.0, m)
    # centred exponentials: subtract the mean 1/lambda so coefficients have zero mean
    return (
        rng.exponential(1.0 / 1.5, m) - 1.0 / 1.5,
        rng.exponential(1.0 / 3.0, m) - 1.0 / 3.0,
    )


def _mixed_values(
    mu: np.ndarray,
    xi1: np.ndarray,
    xi2: np.ndarray,
    noise: np.ndarray,
    grid: np.ndarray,
) -> np.ndarray:
    phi1, phi2 = fourier_basis(grid)
    return mu[None, :] + np.outer(xi1, phi1) + np.outer(xi2, phi2) + noise


def gen_mixed_effects(spec: GeneratorSpec) -> tuple[SamplePanel, SamplePanel]:
    """Mean-shift or variance-shift panel pair.

    Mean shift: mu_X(t) = t, mu_Y(t) = t + delta_mu * t^3, all coefficient
    variances shared. Variance shift: both means 0, the first coefficient of
    Y has variance 10 + delta_sigma.
    """
    if spec.protocol not in ("meanshift", "varshift"):
        raise ParameterError(f"gen_mixed_effects got protocol {spec.protocol!r}")
    rng = _rng_for(spec)
    grid = time_grid(spec.t)
    m, n = spec.m, spec.n_rows_y
    if spec.protocol == "meanshift":
        mu_x = grid.copy()
        mu_y = grid + spec.delta_mu * grid**3
        var_y1 = _VAR_COEFF_1
    else:
        mu_x = np.zeros_like(grid)
        mu_y = np.zeros_like(grid)
        var_y1 = _VAR_COEFF_1 + spec.delta_sigma
    xi_x1 = rng.normal(0.0, math.sqrt(_VAR_COEFF_1), m)
    xi_x2 = rng.normal(0.0, math.sqrt(_VAR_COEFF_2), m)
    eps_x = rng.normal(0.0, math.sqrt(_VAR_NOISE), (m, spec.t))
    xi_y1 = rng.normal(0.0, math.sqrt(var_y1), n)
    xi_y2 = rng.normal(0.0, math.sqrt(_VAR_COEFF_2), n)
    eps_y = rng.normal(0.0, math.sqrt(_VAR_NOISE), (n, spec.t))
    x = _mixed_values(mu_x, xi_x1, xi_x2, eps_x, grid)
    y = _mixed_values(mu_y, xi_y1, xi_y2, eps_y, grid)
    return SamplePanel(x, grid), SamplePanel(y, grid)


def gen_linear_dep(spec: GeneratorSpec) -> tuple[SamplePanel, SamplePanel]:
    """X from the mean-shift model (mu(t) = t); Y is X's first measurement plus noise.

    Y has a single time point per realisation, so the pair probes dependence
    between one point in time and a whole series.
    """
    if spec.protocol != "lineardep":
        raise ParameterError(f"gen_linear_dep got protocol {spec.protocol!r}")
    rng = _rng_for(spec)
    grid = time_grid(spec.t)
    m = spec.m
    xi1 = rng.normal(0.0, math.sqrt(_VAR_COEFF_1), m)
    xi2 = rng.normal(0.0, math.sqrt(_VAR_COEFF_2), m)
    eps = rng.normal(0.0, math.sqrt(_VAR_NOISE), (m, spec.t))
    x = _mixed_values(grid, xi1, xi2, eps, grid)
    eps_y = rng.normal(0.0, math.sqrt(spec.y_noise_var), m)
    y = x[:, :1] + eps_y[:, None]
    return SamplePanel(x, grid), SamplePanel(y, grid[:1])


def gen_shared_coeff(spec: GeneratorSpec) -> tuple[SamplePanel, SamplePanel]:
    """Paired panels from the mean-shift model that share the second coefficient.

    Everything else (first coefficients, noises) is drawn independently, so
    the shared xi_2 is the only source of dependence.
    """
    if spec.protocol != "sharedcoeff":
        raise ParameterError(f"gen_shared_coeff got protocol {spec.protocol!r}")
    rng = _rng_for(spec)
    grid_x = time_grid(spec.t)
    grid_y = time_grid(spec.t if spec.t_y is None else spec.t_y)
    m = spec.m
    xi_x1 = rng.normal(0.0, math.sqrt(_VAR_COEFF_1), m)
    xi_y1 = rng.normal(0.0, math.sqrt(_VAR_COEFF_1), m)
    xi_shared = rng.normal(0.0, math.sqrt(_VAR_COEFF_2), m)
    eps_x = rng.normal(0.0, math.sqrt(_VAR_NOISE), (m, grid_x.shape[0]))
    eps_y = rng.normal(0.0, math.sqrt(_VAR_NOISE), (m, grid_y.shape[0]))
    x = _mixed_values(grid_x, xi_x1, xi_shared, eps_x, grid_x)
    y = _mixed_values(grid_y, xi_y1, xi_shared, eps_y, grid_y)
    return SamplePanel(x, grid_x), SamplePanel(y, grid_y)


def gen_rotation(spec: GeneratorSpec) -> tuple[SamplePanel, SamplePanel]:
    """Independent panels mixed pointwise by a 2x2 rotation of angle theta.

    theta = 0 leaves the panels independent (and bitwise unchanged); larger
    angles create stronger dependence. Coefficients come from the configured
    heavy-tailed/bounded/skewed family; both base panels use mu(t) = t.
    """
    if spec.protocol != "rotation":
        raise ParameterError(f"gen_rotation got protocol {spec.protocol!r}")
    rng = _rng_for(spec)
    grid = time_grid(spec.t)
    m = spec.m
    xi_x1, xi_x2 = _coefficients(rng, spec.coeff_dist, m)
    eps_x = rng.normal(0.0, math.sqrt(_VAR_NOISE), (m, spec.t))
    xi_y1, xi_y2 = _coefficients(rng, spec.coeff_dist, m)
    eps_y = rng.normal(0.0, math.sqrt(_VAR_NOISE), (m, spec.t))
    x0 = _mixed_values(grid, xi_x1, xi_x2, eps_x, grid)
    y0 = _mixed_values(grid, xi_y1, xi_y2, eps_y, grid)
    cos_t = math.cos(spec.theta)
    sin_t = math.sin(spec.theta)
    x = cos_t * x0 - sin_t * y0
    y = sin_t * x0 + cos_t * y0
    return SamplePanel(x, grid), SamplePanel(y, grid)


_GENERATORS = {
    "meanshift": gen_mixed_effects,
    "varshift": gen_mixed_effects,
    "lineardep": gen_linear_dep,
    "sharedcoeff": gen_shared_coeff,
    "rotation": gen_rotation,
}


def generate(spec: GeneratorSpec) -> tuple[SamplePanel, SamplePanel]:
    """Dispatch to the protocol's generator."""
    return _GENERATORS[spec.protocol](spec)
