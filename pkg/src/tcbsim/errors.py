"""Exception hierarchy shared across the package.

Kept in one leaf module so the compiled and interpreted kernel twins raise
identical classes.
"""


class TcbError(Exception):
    """Base class for all simulator errors."""


# --- wire / serialization ---

class WireError(TcbError):
    """Malformed length-prefixed binary data."""


# --- crypto ---

class EnvelopeError(TcbError):
    """Base class for envelope rejection reasons."""


class SuiteMismatch(EnvelopeError):
    """Keys or envelope were produced under a different cipher suite."""


class MacFailure(EnvelopeError):
    """Ciphertext authentication failed; nothing was decrypted."""


class SignatureFailure(EnvelopeError):
    """Wrapped keys are not signed by the claimed sender."""


class MalformedEnvelope(EnvelopeError):
    """Envelope bytes do not parse."""


class OriginatorInvalid(TcbError):
    """Document's originator signature does not verify."""


class AlreadyCountersigned(TcbError):
    pass


class CredentialFailure(TcbError):
    """Wrong credential for a sealed key file."""


class FieldValueInvalid(TcbError):
    """Completed personal field does not match its declared kind."""


# --- peers / registry ---

class BadAdminPassword(TcbError):
    pass


class DuplicatePeerName(TcbError):
    """Registry already holds a different certificate under this name."""


class CertificateInvalid(TcbError):
    """Presented certificate failed chain validation."""


# --- repository / kernel ---

class NotInSecureMode(TcbError):
    pass


class PathMissing(TcbError):
    pass


class HandleExpired(TcbError):
    """Key handle used after its secure-mode session ended."""


class QueueFull(TcbError):
    pass


class UnknownSensor(TcbError):
    pass


class UnroutablePeripheral(TcbError):
    """Attempt to remap an interrupt source that is pinned to the secure world."""


class CorruptRepositoryBlob(TcbError):
    pass


# --- apps ---

class UnknownContact(TcbError):
    pass


class BrokerSignatureInvalid(TcbError):
    pass


# --- scenario / CLI ---

class SchemaError(TcbError):
    """Scenario script failed schema validation (CLI exit code 2)."""


class ScenarioAssertionFailure(TcbError):
    """An embedded scenario assertion failed (CLI exit code 1)."""


class PortInUse(TcbError):
    pass
