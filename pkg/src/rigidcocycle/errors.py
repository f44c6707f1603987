"""Exception hierarchy shared by all modules."""


class RigidCocycleError(Exception):
    """Base class for all library errors."""


# -- p-adic layer -------------------------------------------------------------

class EvenPrimeUnsupported(RigidCocycleError):
    pass


class NoRoot(RigidCocycleError):
    """Square root does not exist in the requested field."""


class NonUnitInput(RigidCocycleError):
    pass


class ZeroInput(RigidCocycleError):
    pass


class PrecisionUnderflow(RigidCocycleError):
    pass


# -- quaternion layer ---------------------------------------------------------

class RamifiedPrime(RigidCocycleError):
    pass


class SearchExhausted(RigidCocycleError):
    """Element search ran out of candidates; retry with a larger bound."""


# -- fuchsian layer -----------------------------------------------------------

class EllipticCenter(RigidCocycleError):
    pass


class PrecisionExhausted(RigidCocycleError):
    """Interval arithmetic could not certify a sign; escalate precision."""


class UnverifiedRelator(RigidCocycleError):
    pass


class NotInDerivedClosure(RigidCocycleError):
    pass


class DegenerateConfiguration(RigidCocycleError):
    pass


# -- embeddings ---------------------------------------------------------------

class NoEmbedding(RigidCocycleError):
    pass


class NormalizationFailed(RigidCocycleError):
    pass


class NotHyperbolic(RigidCocycleError):
    pass


# -- homology / cohomology ----------------------------------------------------

class BoundaryNonzero(RigidCocycleError):
    pass


class NotGenusZero(RigidCocycleError):
    pass


class CosetClassificationFailed(RigidCocycleError):
    pass


class DegreeNonZero(RigidCocycleError):
    pass


class A0MembershipFailed(RigidCocycleError):
    pass


class RegionViolation(RigidCocycleError):
    pass


class PointInUnitDisc(RigidCocycleError):
    pass


class NotInSigma0(RigidCocycleError):
    pass


class CosetSolveFailed(RigidCocycleError):
    pass


class NonZeroDegree(RigidCocycleError):
    pass


# -- evaluation / recognition -------------------------------------------------

class CoincidentPoints(RigidCocycleError):
    pass


class RamifiedOrRepeatedRoots(RigidCocycleError):
    pass


class FixtureInsufficientPrecision(RigidCocycleError):
    pass


class ConfigError(RigidCocycleError):
    pass
