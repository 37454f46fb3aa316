"""Signed, schema-validated XML e-documents."""

from .canonical_xml import NodePath, XmlDocument, XmlElement, XmlName, canonicalize, parse, serialize
from .edoc import EDocument, SignedProperties, UnsignedProperties, pipeline_verify, verify_edoc, wrap_and_sign
from .repository import Repository

__all__ = [
    "EDocument",
    "NodePath",
    "Repository",
    "SignedProperties",
    "UnsignedProperties",
    "XmlDocument",
    "XmlElement",
    "XmlName",
    "canonicalize",
    "parse",
    "pipeline_verify",
    "serialize",
    "verify_edoc",
    "wrap_and_sign",
]
