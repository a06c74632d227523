"""Exception types shared across the package."""


class CoronaSpectraError(Exception):
    """Base class for all package-specific errors."""


class GroupError(CoronaSpectraError):
    """Malformed group data or an element that does not belong to the group."""


class WindowOverflow(GroupError):
    """Requested window enumeration exceeds the configured size cap."""


class MarginError(CoronaSpectraError):
    """Assembly margin smaller than the kernel support radius."""


class TermCapExceeded(CoronaSpectraError):
    """Symbolic kernel product grew past the term cap after simplification."""


class DivergentProbe(CoronaSpectraError):
    """Sampled values along a probe fail the convergence test."""


class UnsupportedAlgebraPattern(CoronaSpectraError):
    """Coefficient algebra outside the supported corona patterns."""


class NotSlowlyOscillating(CoronaSpectraError):
    """Operation requires a slowly oscillating coefficient class."""


class NonAbelianGroup(CoronaSpectraError):
    """Scalar symbol calculus requested on a nonabelian group."""


class UnsupportedGroup(CoronaSpectraError):
    """Group kind outside the scope of the requested transform."""


class UnsupportedLimitKernel(CoronaSpectraError):
    """Limit kernel carries coefficient classes the spectral routes cannot handle."""


class IncommensurablePeriods(CoronaSpectraError):
    """No common period lattice small enough for Bloch reduction."""


class EigenSolverError(CoronaSpectraError):
    """Dense eigensolver failed to converge."""


class DualDataError(CoronaSpectraError):
    """Irrep table fails unitarity, homomorphism, completeness or irreducibility."""


class ConfigError(CoronaSpectraError):
    """Invalid run configuration; carries a JSON-pointer-ish location."""

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        if pointer:
            message = f"{message} (at {pointer})"
        super().__init__(message)
