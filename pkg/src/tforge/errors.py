"""Exception types shared across tforge modules."""


class TforgeError(Exception):
    """Base class for all tforge errors."""


class ZeroFactor(TforgeError):
    """A factor (T-gate parity vector) must be nonzero."""


class DimensionMismatch(TforgeError):
    """Operands have incompatible qubit counts."""


class BadLength(TforgeError):
    """Truth table length is not a power of two matching the variable count."""


class DegreeTooHigh(TforgeError):
    """Phase polynomial has a monomial of degree > 3."""


class NonCliffordResidue(TforgeError):
    """Phase coefficients are not those of a CNOT+T circuit."""


class UnknownGate(TforgeError):
    """Unsupported gate kind in a circuit file."""


class QubitOutOfRange(TforgeError):
    """Gate operand index exceeds the declared qubit count."""


class DuplicateOperand(TforgeError):
    """A multi-qubit gate lists the same qubit twice."""


class MissingHeader(TforgeError):
    """Circuit file does not start with a 'qubits N' header."""


class SingularMatrix(TforgeError):
    """GF(2) matrix is not invertible."""


class TerminalState(TforgeError):
    """Attempted to act on a finished game state."""


class TooManyActions(TforgeError):
    """Qubit count exceeds the action enumeration cap."""


class EmptyPolicy(TforgeError):
    """Action-selection called with an empty visit distribution."""


class ShapeMismatch(TforgeError):
    """Network input does not match the model configuration."""


class VersionMismatch(TforgeError):
    """Checkpoint config hash does not match its version tag."""


class CorruptCheckpoint(TforgeError):
    """Checkpoint file is truncated or fails its checksum."""


class ConfigConflict(TforgeError):
    """Training/game/model configs are mutually inconsistent."""


class MissingFixture(TforgeError):
    """A benchmark tensor fixture is not available."""


class ParseError(TforgeError):
    """Malformed row in an imported baseline file."""


class UnknownId(TforgeError):
    """Imported baseline references a circuit id absent from the eval set."""
