"""Exception hierarchy.

Every error carries a ``category`` used by the CLI to pick an exit code:
``domain`` errors (exit 1) mean the inputs were legal but the requested
value does not exist (a non-unit has no inverse, a singular matrix has no
inverse, ...); ``resource`` errors (exit 2) mean a configured cap was hit;
``input`` errors (exit 3) mean the request itself was malformed.
"""


class ModcosetError(Exception):
    category = "domain"


class MixedContext(ModcosetError):
    """Operands live in different rings Z/p^mu Z."""


class NotUnit(ModcosetError):
    """Inversion of an element divisible by p."""


class BadLevel(ModcosetError):
    """reduce_level target outside 1..mu."""


class DimMismatch(ModcosetError):
    """Matrix shapes incompatible for the requested operation."""


class NotSquare(ModcosetError):
    pass


class NotInvertible(ModcosetError):
    """Matrix is singular, i.e. singular modulo p."""


class NoSolution(ModcosetError):
    """Linear system has no solution over the ring."""


class NoFactor(ModcosetError):
    """No u with b' = b u (kernel of b not contained in kernel of b')."""


class RankMismatch(ModcosetError):
    """Submodules of different ambient rank."""


class ObjectMismatch(ModcosetError):
    """Category objects do not chain for composition."""


class BadSizes(ModcosetError):
    pass


class SizeMismatch(ModcosetError):
    pass


class NotNilpotent(ModcosetError):
    pass


class NotIdempotent(ModcosetError):
    pass


class NotACharacter(ModcosetError):
    """The supplied map on the subgroup is not multiplicative."""


class NotBulletTrivial(ModcosetError):
    """Character is nontrivial on a bullet-tier subgroup element."""


class SearchSpaceTooLarge(ModcosetError):
    category = "resource"


class CapExceeded(ModcosetError):
    category = "resource"


class IncompleteClosure(ModcosetError):
    """Operation requires a closure that was flagged incomplete."""


class MalformedInput(ModcosetError):
    category = "input"
