"""Exception hierarchy shared by all modules."""


class MobileAtlasError(Exception):
    """Base class for all library errors."""


# --- map construction and validation ---

class NotInvolution(MobileAtlasError):
    """Edge pairing is not a fixed-point-free involution."""


class NotConnected(MobileAtlasError):
    """The permutation pair does not act transitively on the darts."""


class NonPlanar(MobileAtlasError):
    """Euler characteristic differs from 2 (positive genus)."""


class NotEulerian(MobileAtlasError):
    """Faces admit no proper two-coloring (some vertex has odd valence)."""


class ConnectivityViolated(MobileAtlasError):
    """Some vertex is unreachable from the origin through allowed edges."""

    def __init__(self, vertex):
        super().__init__(f"vertex {vertex} unreachable from origin")
        self.vertex = vertex


class NotBivalent(MobileAtlasError):
    """A face scheduled for squeezing is not bivalent (or is degenerate)."""


# --- mobiles ---

class DegenerateMap(MobileAtlasError):
    """Single-vertex petal map: carries no labeled vertex, not encodable."""


class RatchetViolated(MobileAtlasError):
    """Contour word has a decrease larger than 1 or one not after a corner."""


class NotWellLabeled(MobileAtlasError):
    """Mobile fails one of the corner/crossing/positivity rules."""


class OrderTooLow(MobileAtlasError):
    """Solved series does not reach the size requested from the sampler."""


# --- series and solver ---

class NonInvertible(MobileAtlasError):
    """Series inversion requested on a series with the wrong constant term."""


class NotContractive(MobileAtlasError):
    """A fixed-point system has a dependency cycle with zero grading gain."""


class NoConvergence(MobileAtlasError):
    """Sweeps did not stabilize within order + 2 iterations."""


class NonDivisible(MobileAtlasError):
    """An exact division left a remainder; signals an internal bug."""


# --- models ---

class ToleranceNotMet(MobileAtlasError):
    """Root bracketing could not reach the requested residual tolerance."""


class UnequalLeaves(MobileAtlasError):
    """Leaf matching requires as many black leaves as white leaves."""


# --- oracle ---

class CapExceeded(MobileAtlasError):
    """Enumeration request is above the exhaustive-search hard cap."""
