# -*- coding: UTF-8 -*-
#!/usr/bin/env python


class TailFitError(Exception):
    pass


class DomainError(TailFitError, ValueError):
    pass


class DivergentSeriesError(DomainError):
    pass


class EmptyTailError(TailFitError):
    pass


class DegenerateTailError(TailFitError):
    pass


class FeasibilityError(TailFitError):

    def __init__(self, message, bound=None):
        super(FeasibilityError, self).__init__(message)
        self.bound = bound


class ConvergenceError(TailFitError):

    def __init__(self, message, residual=None, iterations=None):
        super(ConvergenceError, self).__init__(message)
        self.residual = residual
        self.iterations = iterations


class NoFitError(TailFitError):
    """Every k_min candidate of a scan failed; ``causes`` maps k_min to the reason."""

    def __init__(self, family, causes):
        self.family = family
        self.causes = dict(causes)
        summary = "; ".join("k_min={}: {}".format(k, m) for k, m in sorted(self.causes.items())[:5])
        if len(self.causes) > 5:
            summary += "; ... ({} candidates)".format(len(self.causes))
        super(NoFitError, self).__init__("no {} fit: {}".format(family, summary or "empty grid"))


class IngestionError(TailFitError):
    pass


class ManifestFormatError(IngestionError):
    pass


class BoundaryWarning(UserWarning):
    pass


class EmptySelectionError(TailFitError):
    """A category filter matched nothing; ``available`` lists what the input had."""

    def __init__(self, wanted, available):
        self.wanted = wanted
        self.available = list(available)
        super(EmptySelectionError, self).__init__("no category {!r} in the input, available: {}".format(
            wanted, ", ".join(self.available) or "none"))
