"""Exception hierarchy shared by all poncelet_lab modules."""

from __future__ import annotations


class PonceletError(Exception):
    """Base class for every error raised by the package."""

    def to_dict(self) -> dict:
        out = {"type": type(self).__name__, "message": str(self)}
        for key, value in vars(self).items():
            if not key.startswith("_"):
                out[key] = value
        return out


# projective kernel
class DegenerateInput(PonceletError):
    pass


class NotOnConic(PonceletError):
    pass


class IdenticalConics(PonceletError):
    pass


class PencilSplitFailure(PonceletError):
    pass


class SingularConic(PonceletError):
    pass


# dynamics
class InvalidFlag(PonceletError):
    pass


class VertexAtInfinity(PonceletError):
    def __init__(self, index: int, message: str | None = None):
        super().__init__(message or f"vertex {index} lies on the line at infinity")
        self.index = index


class NotRealNested(PonceletError):
    pass


class BracketFailure(PonceletError):
    pass


class CountMismatch(PonceletError):
    def __init__(self, found: int, expected: int):
        super().__init__(f"found {found} labeled degenerate polygons, expected {expected}")
        self.found = found
        self.expected = expected


# centers
class ZeroArea(PonceletError):
    pass


class CollinearPoints(PonceletError):
    def __init__(self, message: str = "points are collinear", triangle: int | None = None):
        super().__init__(message if triangle is None else f"{message} (triangle {triangle})")
        self.triangle = triangle


class InvalidPairing(PonceletError):
    pass


class NonConvergent(PonceletError):
    pass


# invariants lab
class TooFewPoints(PonceletError):
    pass


class AllSamplesDegenerate(PonceletError):
    pass


# spherical
class SouthernPoint(PonceletError):
    pass


class AntipodalDegeneracy(PonceletError):
    pass


# cli / plotting
class EmptyDataset(PonceletError):
    pass


class ConfigError(PonceletError):
    pass
