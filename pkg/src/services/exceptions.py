"""
Erreurs du moteur de vérification toposkms
Les erreurs d'entrée dérivent de ValueError, les autres de TopoKMSError
"""


class TopoKMSError(Exception):
    """Erreur de base du moteur"""


class ValidationError(TopoKMSError, ValueError):
    """Entrée invalide (matrice, contexte, scénario...)"""


class ParseError(ValidationError):
    """Fichier de scénario illisible"""


# numerics
class NotHermitian(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class NotProjection(ValidationError):
    pass


class DimMismatch(ValidationError):
    pass


class NoConvergence(TopoKMSError):
    pass


# algebra
class NonCommuting(ValidationError):
    pass


class TrivialAlgebra(ValidationError):
    pass


class LatticeTooLarge(TopoKMSError):
    pass


class NotInAlgebra(ValidationError):
    pass


class PosetTooLarge(TopoKMSError):
    pass


# presheaf
class NotIncluded(ValidationError):
    pass


class NotInLattice(ValidationError):
    pass


class NotClopen(ValidationError):
    """Famille non fermée par restriction"""


class PosetNotClosed(ValidationError):
    pass


class DomainMismatch(ValidationError):
    pass


class EnumerationTooLarge(TopoKMSError):
    pass


# measure
class InconsistentTable(ValidationError):
    pass


class NotAdditive(ValidationError):
    pass


class Infeasible(TopoKMSError):
    pass


# kms
class NotFaithful(ValidationError):
    pass


class AmbiguousMatch(TopoKMSError):
    pass


class ContextMissing(ValidationError):
    pass


# modular
class NotCyclicSeparating(ValidationError):
    pass


class InvalidImage(ValidationError):
    pass
