"""Exception hierarchy shared by every layer of the engine."""


class WcoalgError(Exception):
    """Base class for all errors raised by the package."""


class BudgetExceeded(WcoalgError):
    """A constructed object would hold more elements than the active budget."""


class NotParallel(WcoalgError):
    pass


class CodMismatch(WcoalgError):
    pass


class NotIso(WcoalgError):
    pass


class TypingMismatch(WcoalgError):
    """Domains, codomains or indices of the inputs do not line up."""


class NotStrong(WcoalgError):
    pass


class FlagMissing(WcoalgError):
    """An operation needs a structural flag the functor does not carry."""


class OplaxLawViolation(WcoalgError):
    pass


class LawViolation(WcoalgError):
    """A constructed (co)algebra failed its defining equations."""


class NotCoalgMorphism(WcoalgError):
    pass


class HypothesisViolated(WcoalgError):
    pass


class Exceeded(WcoalgError):
    """An initial chain did not stabilise within the step budget.

    ``traces`` maps a chain name to its recorded cardinality trace.
    """

    def __init__(self, message, traces=None):
        super().__init__(message)
        self.traces = dict(traces or {})


class ParseError(WcoalgError):
    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class ValidationError(WcoalgError):
    def __init__(self, message, law=None, witness=None):
        super().__init__(message)
        self.law = law
        self.witness = witness
