"""Exception hierarchy shared by every edocsig module."""


class EdocError(Exception):
    """Base class for all errors raised by this package."""


# XML model
class MalformedXml(EdocError, ValueError):
    pass


class UnsupportedEncoding(EdocError, ValueError):
    pass


class UnsupportedConstruct(EdocError, ValueError):
    pass


class NodeNotFound(EdocError, LookupError):
    pass


# crypto primitives
class UnknownAlgorithm(EdocError, ValueError):
    pass


class KeyMismatch(EdocError, ValueError):
    pass


class MalformedKey(EdocError, ValueError):
    pass


class MalformedBase64(EdocError, ValueError):
    pass


# signature envelopes
class MalformedSignature(EdocError, ValueError):
    pass


class UnresolvableReference(EdocError, LookupError):
    pass


# definitions and schemas
class MalformedDefinition(EdocError, ValueError):
    pass


class SchemaTooRich(EdocError, ValueError):
    pass


# stylesheets
class UnsupportedStylesheet(EdocError, ValueError):
    pass


class MatchFailure(EdocError, ValueError):
    pass


class MissingField(EdocError, LookupError):
    def __init__(self, field: str, message: str | None = None):
        super().__init__(message or f"missing field {field!r}")
        self.field = field


class MalformedTransformData(EdocError, ValueError):
    pass


# e-documents
class MalformedEDocument(EdocError, ValueError):
    pass


class UnknownField(EdocError, LookupError):
    def __init__(self, field: str):
        super().__init__(f"unknown field {field!r}")
        self.field = field


class ValueRejected(EdocError, ValueError):
    """Instance values failed validation; ``report`` holds the findings."""

    def __init__(self, report):
        first = report.violations[0] if report.violations else ("?", "rejected")
        super().__init__(f"{first[0]}: {first[1]}")
        self.report = report


# repository
class DuplicateId(EdocError, ValueError):
    pass


class SignatureInvalid(EdocError, ValueError):
    pass


class StorageFailure(EdocError, OSError):
    pass


class NotFound(EdocError, LookupError):
    pass


class CorruptEntry(EdocError, ValueError):
    pass


class AmbiguousNamespace(EdocError, LookupError):
    pass
