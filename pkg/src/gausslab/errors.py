class GausslabError(Exception):
    """Base class for all library errors."""


class EmptyFamily(GausslabError, ValueError):
    """No admissible cube of the enumeration contains the point."""


class AlphaOutOfRange(GausslabError, ValueError):
    pass


class InvalidExponents(GausslabError, ValueError):
    pass


class DegenerateWeight(GausslabError, ValueError):
    """The dual weight v^(1-p') has a cell of infinite or undefined mass."""


class ParseError(GausslabError, ValueError):
    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class ConfigError(GausslabError, ValueError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
