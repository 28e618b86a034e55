"""Exception hierarchy for the ansatz-search toolkit."""


class LLMQASError(Exception):
    """Base class for every error raised by this package."""


# simulator
class InvalidQubitCount(LLMQASError, ValueError):
    pass


class InvalidQubit(LLMQASError, ValueError):
    pass


class MissingParameter(LLMQASError, ValueError):
    pass


class ParamLengthMismatch(LLMQASError, ValueError):
    pass


# ansatz construction and proposal parsing
class ProposalError(LLMQASError, ValueError):
    """A proposer reply (or spec) could not be turned into an ansatz."""


class NoAnsatzList(ProposalError):
    pass


class InvalidBlockIndex(ProposalError):
    pass


class MissingTwoLocalConfig(ProposalError):
    pass


class MalformedTwoLocalConfig(ProposalError):
    pass


# training
class InvalidDiscriminatorOutput(LLMQASError, ValueError):
    pass


class BatchTooSmall(LLMQASError, ValueError):
    pass


class DegenerateTarget(LLMQASError, ValueError):
    pass


class LengthMismatch(LLMQASError, ValueError):
    pass


class NonFiniteGradient(LLMQASError, FloatingPointError):
    pass


# orchestration and I/O
class ProposerUnavailable(LLMQASError, RuntimeError):
    pass


class ConfigNotFound(LLMQASError, FileNotFoundError):
    pass


class ConfigInvalid(LLMQASError, ValueError):
    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class PersistError(LLMQASError, OSError):
    pass


class UnknownSchemaVersion(LLMQASError, ValueError):
    pass


class EmptyCampaign(LLMQASError, ValueError):
    pass
