"""Exception hierarchy shared by every k3dyn module."""

from __future__ import annotations


class K3DynError(Exception):
    """Base class for all library errors."""


# exact arithmetic
class DivisionByZero(K3DynError, ZeroDivisionError):
    pass


class IncompatibleField(K3DynError, ValueError):
    """Two irrational quadratic elements live in different fields Q(sqrt d)."""


class NotSquarefree(K3DynError, ValueError):
    pass


# lattices
class LatticeMismatch(K3DynError, ValueError):
    pass


class DegenerateGenerators(K3DynError, ValueError):
    pass


# spectra and certificates
class IrreducibleCubic(K3DynError):
    pass


class RepeatedEigenvalueDefect(K3DynError):
    pass


class FieldMismatch(K3DynError):
    pass


class NoExpandingEigenvalue(K3DynError):
    pass


class NotPolarized(K3DynError, ValueError):
    """The declared class is not an eigenvector with the declared eigenvalue."""


class AlphaNotExpanding(K3DynError, ValueError):
    pass


class NotHyperbolic(K3DynError):
    pass


class NotAmpleWitness(K3DynError):
    """No positive span over the ample basis was found.

    This is "undetermined", not a proof of non-ampleness.
    """


class NotApplicable(K3DynError):
    pass


class NotEffectiveSample(K3DynError, ValueError):
    pass


class CertificateFailure(K3DynError):
    """An exact identity that must hold did not."""


# point dynamics
class NotARoot(K3DynError, ValueError):
    pass


class DegenerateFiber(K3DynError):
    pass


class PointNotOnSurface(K3DynError, ValueError):
    pass


class WordMismatch(K3DynError, ValueError):
    pass
