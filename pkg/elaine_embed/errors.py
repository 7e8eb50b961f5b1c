import typing as t


class GraphParseError(Exception): ...


class ValidationError(Exception): ...


class ContractViolation(Exception): ...


class CheckpointError(Exception): ...


class ConfigError(Exception): ...


class TrainingFault(Exception):
    """Raised when the training loss stops being finite.

    `history` holds the per-epoch mean losses completed before the fault.
    """

    def __init__(self, message: str, *, epoch: int, step: int, history: list[t.Any]):
        super().__init__(f"{message} (epoch {epoch}, step {step})")
        self.epoch = epoch
        self.step = step
        self.history = history
