"""
Error types for cavcool

Every failure the library can signal is a subclass of CavcoolError. Each one
also derives from the closest builtin exception so callers can catch either
the domain type or the builtin, and carries a stable machine ``code`` that
scans and JSON verdicts record instead of a message.
"""

from typing import Optional


class CavcoolError(Exception):
    """Base class for all cavcool errors"""

    code = "cavcool_error"


class DegenerateCoupling(CavcoolError, ValueError):
    """Cavity coupling vanishes at zeroth order (cos φ = 0 or g̃ = 0)"""

    code = "degenerate_coupling"


class NonPositiveInput(CavcoolError, ValueError):
    """A physical input that must be strictly positive was not"""

    code = "non_positive_input"


class PoleAtResonance(CavcoolError, ArithmeticError):
    """The characteristic function f(x) vanishes at an evaluation point"""

    code = "pole_at_resonance"

    def __init__(self, which: str, value: complex):
        self.which = which
        self.value = value
        super().__init__(f"|{which}| = {abs(value):.3e} is below the pole floor (exact dressed pole)")


class DivergentOptimum(CavcoolError, ArithmeticError):
    """Δ_opt(δc) is requested at δc = −ν where it diverges"""

    code = "divergent_optimum"


class HeatingRegion(CavcoolError, ValueError):
    """Parameters lie where the chosen limit formula predicts heating"""

    code = "heating_region"


class GeometryViolation(CavcoolError, ValueError):
    """The geometry does not satisfy the precondition of a limit formula"""

    code = "geometry_violation"


class RegimeMismatch(CavcoolError, ValueError):
    """A limit formula was called outside the detuning it is derived for"""

    code = "regime_mismatch"


class ExpansionInvalid(CavcoolError, ValueError):
    """κ is too large for the first-order small-κ expansion"""

    code = "expansion_invalid"


class TruncationLeak(CavcoolError, RuntimeError):
    """Population reached the top level of a truncated basis"""

    code = "truncation_leak"


class HeatingRegime(CavcoolError, ValueError):
    """A− ≤ A+: the mean phonon number grows instead of relaxing

    ``mean_n`` holds the growing solution so callers can still report it.
    """

    code = "heating_regime"

    def __init__(self, message: str, mean_n=None):
        self.mean_n = mean_n
        super().__init__(message)


class DegenerateKernel(CavcoolError, ArithmeticError):
    """The Liouvillian has more than one steady state"""

    code = "degenerate_kernel"


class SingularResolvent(CavcoolError, ArithmeticError):
    """L + iν is numerically singular"""

    code = "singular_resolvent"


class StepTooLarge(CavcoolError, RuntimeError):
    """A single MCWF step could jump with probability above the bound"""

    code = "step_too_large"


class GridMismatch(CavcoolError, ValueError):
    """Trajectories to be averaged do not share a time grid"""

    code = "grid_mismatch"


class ConfigError(CavcoolError, ValueError):
    """Invalid configuration file or override"""

    code = "config_error"

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message)
