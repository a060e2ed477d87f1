"""Exception types shared across the package.

The CLI maps these onto distinct exit codes: input/shape problems and
numerical degeneracies are reported separately from plain usage errors.
"""


class PanelTestError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(PanelTestError):
    """Incompatible vector lengths, grid lengths, or panel shapes."""


class ParameterError(PanelTestError):
    """A parameter is outside its admissible range (sigma, alpha, theta, ...)."""


class SampleSizeError(PanelTestError):
    """Too few realisations, or mismatched realisation counts where equality is required."""


class InputError(PanelTestError):
    """Malformed or inconsistent input data (CSV parse errors, metadata gaps, ...)."""


class DegenerateBandwidthError(PanelTestError):
    """Median-heuristic bandwidth is zero (all rows identical)."""


class DegenerateNullError(PanelTestError):
    """Null-distribution moments unusable for the Gamma approximation."""


class SearchError(PanelTestError):
    """Bandwidth search could not produce a finite criterion on any grid point."""


class SplitError(PanelTestError):
    """Train/test split would leave a side too small for the estimators."""
