"""Exception hierarchy for the registration pipeline."""


class MacregError(Exception):
    """Base class for all macreg errors."""


class DegenerateInput(MacregError):
    """Point set is rank-deficient; no stable rigid pose can be fit."""


class DegenerateCloud(MacregError):
    """Point cloud has no usable spatial extent (all points coincide)."""


class CapacityExceeded(MacregError):
    """Correspondence set is too large for dense graph construction."""


class BudgetExceeded(MacregError):
    """Maximal clique enumeration exceeded the configured clique-count cap."""


class NoClique(MacregError):
    """The graph contains no clique of the required minimum size."""


class MissingNormals(MacregError):
    """Normal-consistency filtering requested but normals are absent."""


class NoHypotheses(MacregError):
    """No pose hypothesis could be generated; registration failed."""


class FileFormatError(MacregError):
    """A data file failed to parse; carries path and 1-based line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:" if line is None else f"{path}:{line}: "
        super().__init__(prefix + message)
