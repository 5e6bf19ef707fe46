"""Exception hierarchy for protocol, ledger and harness failures."""


class ProtocolError(Exception):
    """Base class for every declared error raised by the package."""


# ledger
class EmptyBatch(ProtocolError):
    pass


class InvalidTransaction(ProtocolError, ValueError):
    def __init__(self, message: str, tx_id: int | None = None):
        super().__init__(message)
        self.tx_id = tx_id


class LedgerFormatError(ProtocolError):
    pass


# participants
class DuplicateId(ProtocolError):
    pass


class UnknownParticipant(ProtocolError, KeyError):
    pass


class NotAReporter(ProtocolError):
    pass


class NonPositiveTheta(ProtocolError, ValueError):
    pass


class NoHistory(ProtocolError):
    pass


class EmptyRoles(ProtocolError, ValueError):
    pass


# scoring
class EmptyPanel(ProtocolError):
    pass


class NoValidators(ProtocolError):
    pass


class InvalidWeights(ProtocolError, ValueError):
    pass


class InvalidRating(ProtocolError, ValueError):
    pass


# selection
class InsufficientJournalists(ProtocolError):
    pass


class InsufficientMachineAnalyzers(ProtocolError):
    pass


class ProviderFailure(ProtocolError):
    def __init__(self, message: str, panelist: str | None = None):
        super().__init__(message)
        self.panelist = panelist


# classifier
class DegenerateCorpus(ProtocolError, ValueError):
    pass


class DimensionMismatch(ProtocolError, ValueError):
    pass


# lifecycle
class UnknownArticle(ProtocolError, KeyError):
    pass


class AlreadyResolved(ProtocolError):
    pass


class InvalidState(ProtocolError):
    """An operation was requested in a lifecycle state that does not allow it."""


class CommitmentMismatch(ProtocolError):
    pass


# harness
class ConfigError(ProtocolError, ValueError):
    pass


class OverlappingVocabularies(ConfigError):
    pass
