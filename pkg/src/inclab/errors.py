"""Exception hierarchy shared by all inclab modules."""


class InclabError(Exception):
    """Base class for all inclab errors."""


class BadDiagonal(InclabError):
    """A site kernel has a nonzero self-jump rate r(x, x)."""


class NotIrreducible(InclabError):
    """The directed graph of positive jump rates is not strongly connected."""


class NotReversible(InclabError):
    """Detailed balance m(x) r(x, y) = m(y) r(y, x) fails beyond tolerance."""


class SpaceOverflow(InclabError):
    """The configuration space is too large for exact indexing."""


class OutOfRange(InclabError):
    """A rank or configuration lies outside the configuration space."""


class EmptySite(InclabError):
    """Attempt to move a particle from a site with no particles."""


class SameSite(InclabError):
    """Attempt to move a particle from a site to itself."""


class BadParameter(InclabError):
    """A scalar parameter is outside its admissible range."""


class BadWeights(InclabError):
    """A conductance list for a series network is empty or not positive."""


class SolverDiverged(InclabError):
    """An iterative linear solve hit its iteration cap before tolerance."""


class BadSets(InclabError):
    """Source and target sets for a Dirichlet problem overlap or are empty."""


class ScaleNotApplicable(InclabError):
    """A time-scale predictor was asked about a kernel outside its shape."""


class BadSpec(InclabError):
    """A test-function specification is inconsistent with the requested scale."""


class HorizonExceeded(InclabError):
    """A simulated trajectory hit its event cap before finishing."""


class ScenarioError(InclabError):
    """A scenario or kernel config file is malformed."""
