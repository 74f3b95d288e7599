"""Exception hierarchy shared by every kernelcat module."""


class KernelcatError(Exception):
    """Base class for all errors raised by kernelcat."""


# finite spaces, distributions and kernels
class EmptySpace(KernelcatError):
    pass


class DuplicateAtom(KernelcatError):
    pass


class ReservedCharacter(KernelcatError):
    pass


class UnknownAtom(KernelcatError):
    pass


class IncompleteMap(KernelcatError):
    pass


class DomainMismatch(KernelcatError):
    pass


class BadFactor(KernelcatError):
    pass


class InvalidDistribution(KernelcatError):
    pass


# bayesian inversion
class NotAbsolutelyContinuous(KernelcatError):
    """The measurement charges data atoms that have zero evidence."""

    def __init__(self, atoms):
        self.atoms = tuple(atoms)
        super().__init__(
            "measurement puts mass on zero-evidence atoms: " + ", ".join(self.atoms)
        )


class ZeroMassEvent(KernelcatError):
    pass


# function spaces
class SpaceTooLarge(KernelcatError):
    pass


# gaussian machinery
class SingularBlock(KernelcatError):
    pass


class DegenerateGram(KernelcatError):
    pass


class DegenerateUpdate(KernelcatError):
    pass


class BadVariance(KernelcatError):
    pass


class SingularPrior(KernelcatError):
    pass


class DependentBasis(KernelcatError):
    pass


class InvalidGaussian(KernelcatError):
    pass


# markov chains and filtering
class BadInterval(KernelcatError):
    pass


class OutOfOrder(KernelcatError):
    pass


# cli / model files
class ParseError(KernelcatError):
    pass


class ValidationError(KernelcatError):
    """A model file failed validation; ``field`` names the offending location."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnknownExample(KernelcatError):
    pass
