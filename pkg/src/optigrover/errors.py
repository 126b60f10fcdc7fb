"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """A caller supplied an argument outside an operation's domain."""


class InvalidStateError(RuntimeError):
    """An object is not in the state an operation requires."""


class CompileError(RuntimeError):
    """The rewrite engine failed to reach a fixpoint or broke equivalence."""


class ModelInconsistencyError(RuntimeError):
    """A physical model produced a result matching no ideal counterpart."""
