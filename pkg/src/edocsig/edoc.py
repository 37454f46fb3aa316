"""The e-document envelope and its verification pipeline.

An e-document is an ``aida:eDocument`` root whose first child is
``aida:signedContent`` (holding exactly one content element) followed by
one or more parallel ``dsig:Signature`` elements over that same content.

Signatures are always computed and checked against the envelope as
:func:`emit_edoc` renders it, so layout differences in a parsed file
(indentation around the content, extra declarations on the root) never
change a digest; only the content element and the signatures matter.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from . import sigcore, xmldsig
from .canonical_xml import (
    NodePath,
    XmlDocument,
    XmlElement,
    XmlName,
    canonicalize,
    element,
    locate,
    serialize,
)
from .errors import (
    EdocError,
    MalformedDefinition,
    MalformedEDocument,
    MalformedSignature,
    MissingField,
    UnknownField,
    UnresolvableReference,
    ValueRejected,
)
from .namespaces import AIDA_ENVELOPE, XSI
from .schema import DocumentTypeDefinition, parse_type_definition_element, validate_instance
from .xmldsig import VerificationReport, XmlSignature


def _a(local: str) -> XmlName:
    return XmlName(AIDA_ENVELOPE, "aida", local)


E_DOCUMENT = _a("eDocument")
SIGNED_CONTENT = _a("signedContent")
CONTENT_PATH = NodePath((SIGNED_CONTENT,))
ENVELOPE_SCOPE = {"aida": AIDA_ENVELOPE, "xsi": XSI}
SCHEMA_LOCATION = XmlName(XSI, "xsi", "schemaLocation")


# -- properties ---------------------------------------------------------------


def _b64_text(el: XmlElement) -> bytes:
    return sigcore.base64_decode("".join(el.text.split()))


@dataclass(frozen=True)
class SignedProperties:
    """Signed attributes; unrecognised children are carried through untouched."""

    transform_data_id: str | None = None
    document_hash: sigcore.Digest | None = None
    extra: tuple[XmlElement, ...] = ()

    def to_element(self) -> XmlElement:
        children = []
        if self.transform_data_id is not None:
            children.append(element(_a("transformDataID"), self.transform_data_id))
        if self.document_hash is not None:
            children.append(element(_a("documentHash"), sigcore.base64_encode(self.document_hash.value)))
        return element(_a("signedProperties"), *children, *self.extra)

    @classmethod
    def from_element(cls, el: XmlElement, digest_method: str = sigcore.SHA1) -> SignedProperties:
        transform_id = None
        doc_hash = None
        extra = []
        for child in el.elements():
            if child.name.matches(_a("transformDataID")):
                transform_id = child.text.strip()
            elif child.name.matches(_a("documentHash")):
                try:
                    doc_hash = sigcore.Digest(digest_method, _b64_text(child))
                except ValueError as exc:
                    raise MalformedEDocument(f"documentHash: {exc}") from None
            else:
                extra.append(child)
        return cls(transform_id, doc_hash, tuple(extra))


@dataclass(frozen=True)
class UnsignedProperties:
    signature_value_timestamp: bytes | None = None
    extra: tuple[XmlElement, ...] = ()

    def to_element(self) -> XmlElement:
        children = []
        if self.signature_value_timestamp is not None:
            children.append(
                element(_a("signatureValueTimeStamp"), sigcore.base64_encode(self.signature_value_timestamp))
            )
        return element(_a("unsignedProperties"), *children, *self.extra)

    @classmethod
    def from_element(cls, el: XmlElement) -> UnsignedProperties:
        stamp = None
        extra = []
        for child in el.elements():
            if child.name.matches(_a("signatureValueTimeStamp")):
                try:
                    stamp = _b64_text(child)
                except ValueError as exc:
                    raise MalformedEDocument(f"signatureValueTimeStamp: {exc}") from None
            else:
                extra.append(child)
        return cls(stamp, tuple(extra))


def _content_digest_method(sig: XmlSignature) -> str:
    return sig.content_references[0].digest_method


def signed_properties(sig: XmlSignature) -> SignedProperties:
    return SignedProperties.from_element(sig.signed_properties, _content_digest_method(sig))


def unsigned_properties(sig: XmlSignature) -> UnsignedProperties:
    return UnsignedProperties.from_element(sig.unsigned_properties)


# -- envelope -----------------------------------------------------------------


@dataclass(frozen=True)
class EDocument:
    signed_content: XmlElement
    signatures: tuple[XmlSignature, ...]

    def __post_init__(self):
        object.__setattr__(self, "signatures", tuple(self.signatures))
        if not self.signatures:
            raise ValueError("an e-document needs at least one signature")
        for sig in self.signatures:
            refs = sig.content_references
            if len(refs) != 1 or not _same_path(refs[0].target, CONTENT_PATH):
                raise ValueError("every signature must cover aida:signedContent and nothing else")


def _same_path(target, path: NodePath) -> bool:
    return (
        isinstance(target, NodePath)
        and len(target.steps) == len(path.steps)
        and all(a.matches(b) for a, b in zip(target.steps, path.steps))
    )


def _wrapper(content: XmlElement) -> XmlElement:
    return element(SIGNED_CONTENT, content)


def document_hash(content: XmlElement, algorithm: str = sigcore.SHA1) -> sigcore.Digest:
    """Digest of the canonical content element as it sits inside the envelope."""
    return sigcore.digest(canonicalize(content, ENVELOPE_SCOPE), algorithm)


def _sign(content, key, cert, props, unsigned, digest_method, signature_method) -> XmlSignature:
    return xmldsig.sign_enveloping(
        _wrapper(content),
        key,
        cert,
        props.to_element(),
        unsigned.to_element(),
        target=CONTENT_PATH,
        inherited_ns=ENVELOPE_SCOPE,
        digest_method=digest_method,
        signature_method=signature_method,
    )


def wrap_and_sign(
    content: XmlElement,
    key: sigcore.KeyPair,
    cert: bytes | None = None,
    props: SignedProperties = SignedProperties(),
    unsigned: UnsignedProperties = UnsignedProperties(),
    *,
    digest_method: str = sigcore.SHA1,
    signature_method: str | None = None,
) -> EDocument:
    sig = _sign(content, key, cert, props, unsigned, digest_method, signature_method)
    return EDocument(content, (sig,))


def countersign(
    edoc: EDocument,
    key: sigcore.KeyPair,
    cert: bytes | None = None,
    props: SignedProperties = SignedProperties(),
    unsigned: UnsignedProperties = UnsignedProperties(),
    *,
    digest_method: str = sigcore.SHA1,
    signature_method: str | None = None,
) -> EDocument:
    """Add an independent parallel signature over the same content."""
    sig = _sign(edoc.signed_content, key, cert, props, unsigned, digest_method, signature_method)
    return EDocument(edoc.signed_content, edoc.signatures + (sig,))


def attach_timestamp(edoc: EDocument, index: int, timestamp: bytes) -> EDocument:
    """Store an opaque timestamp in one signature's unsigned properties."""
    sig = edoc.signatures[index]
    unsigned = replace(unsigned_properties(sig), signature_value_timestamp=timestamp)
    sigs = list(edoc.signatures)
    sigs[index] = replace(sig, unsigned_properties=unsigned.to_element())
    return EDocument(edoc.signed_content, tuple(sigs))


def emit_edoc(e: EDocument) -> XmlDocument:
    root = element(
        E_DOCUMENT,
        _wrapper(e.signed_content),
        *(xmldsig.emit(s) for s in e.signatures),
        attrs=[(SCHEMA_LOCATION, f"{AIDA_ENVELOPE} aida:eDocument")],
        ns=ENVELOPE_SCOPE,
    )
    return XmlDocument(root)


def serialize_edoc(e: EDocument, indent: str | None = None) -> bytes:
    """Serialize; ``indent`` lays out the envelope and signatures but never the signed content."""
    doc = emit_edoc(e)
    if indent is None:
        return serialize(doc)
    nl = "\n" + indent
    wrapper = element(SIGNED_CONTENT, nl + indent, e.signed_content, nl)
    children: list = []
    for kid in (wrapper, *(_layout(xmldsig.emit(s), indent, 1) for s in e.signatures)):
        children += [nl, kid]
    children.append("\n")
    return serialize(XmlDocument(doc.root.replace(children=tuple(children))))


def _layout(el: XmlElement, indent: str, level: int) -> XmlElement:
    # properties are digested as written, so their subtree keeps its exact text
    if el.name.matches(xmldsig.PROPERTIES) or not el.elements():
        return el
    if any(isinstance(c, str) and c.strip() for c in el.children):
        return el
    children: list = []
    for kid in el.elements():
        children += ["\n" + indent * (level + 1), _layout(kid, indent, level + 1)]
    children.append("\n" + indent * level)
    return el.replace(children=tuple(children))


def parse_edoc(doc: XmlDocument) -> EDocument:
    root = doc.root
    if not root.name.matches(E_DOCUMENT):
        raise MalformedEDocument(f"expected aida:eDocument, got {root.name.qname}")
    if any(isinstance(c, str) and c.strip() for c in root.children):
        raise MalformedEDocument("text directly inside aida:eDocument")
    kids = root.elements()
    if not kids or not kids[0].name.matches(SIGNED_CONTENT):
        raise MalformedEDocument("the first child of aida:eDocument must be aida:signedContent")
    wrapper = kids[0]
    content = wrapper.elements()
    if len(content) != 1 or wrapper.text.strip():
        raise MalformedEDocument("aida:signedContent must hold exactly one element")
    if wrapper.attributes:
        raise MalformedEDocument("aida:signedContent takes no attributes")
    if len(kids) < 2:
        raise MalformedEDocument("an e-document needs at least one signature")

    scope = root.scope()
    # content keeps bindings it relied on from the envelope
    inner = content[0]
    needed = {p: u for p, u in wrapper.scope(scope).items() if p != "xml" and ENVELOPE_SCOPE.get(p) != u}
    if needed:
        own = dict(inner.namespace_declarations)
        missing = tuple((p, u) for p, u in needed.items() if p not in own)
        inner = inner.replace(namespace_declarations=inner.namespace_declarations + missing)

    sigs = []
    for kid in kids[1:]:
        if not kid.name.matches(xmldsig.SIGNATURE):
            raise MalformedEDocument(f"unexpected {kid.name.qname} after aida:signedContent")
        try:
            sigs.append(xmldsig.absorb(kid, scope))
        except MalformedSignature as exc:
            raise MalformedEDocument(f"signature {len(sigs) + 1}: {exc}") from None
    try:
        return EDocument(inner, tuple(sigs))
    except ValueError as exc:
        raise MalformedEDocument(str(exc)) from None


# -- verification -------------------------------------------------------------


def _resolver(e: EDocument):
    root = emit_edoc(e).root

    def resolve(target):
        if not isinstance(target, NodePath):
            raise UnresolvableReference(f"detached target {target!r} inside an e-document")
        found, scope = locate(root, target)
        return canonicalize(found, scope)

    return resolve


def verify_edoc(e: EDocument) -> list[VerificationReport]:
    resolve = _resolver(e)
    return [xmldsig.verify_signature(s, resolve) for s in e.signatures]


def document_hash_problems(e: EDocument) -> list[str]:
    problems = []
    for i, sig in enumerate(e.signatures, 1):
        claimed = signed_properties(sig).document_hash
        if claimed is not None and document_hash(e.signed_content, claimed.algorithm) != claimed:
            problems.append(f"signature {i}: documentHash does not match the content")
    return problems


# -- instances ----------------------------------------------------------------


def make_instance(definition: DocumentTypeDefinition, values: Mapping[str, str]) -> XmlElement:
    """Build and validate an instance element with one child per field, in schema order."""
    schema = definition.compiled_schema
    order = schema.element_order
    for name in values:
        if name not in order:
            raise UnknownField(name)
    for name in order:
        if name not in values:
            raise MissingField(name)
    instance = element(
        schema.qualified(schema.root_element),
        *(element(schema.qualified(name), values[name]) for name in order),
        attrs=[(SCHEMA_LOCATION, f"{schema.target_namespace} {definition.type_id.value}")],
        ns={schema.namespace_prefix: schema.target_namespace, "xsi": XSI},
    )
    report = validate_instance(instance, definition)
    if not report.valid:
        raise ValueRejected(report)
    return instance


def definition_of(def_edoc: EDocument) -> DocumentTypeDefinition:
    return parse_type_definition_element(def_edoc.signed_content, ENVELOPE_SCOPE)


# -- pipeline -----------------------------------------------------------------

STEPS = (
    "fetch-definition",
    "verify-definition-signature",
    "validate-structure",
    "verify-instance-signature",
)
PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"


@dataclass(frozen=True)
class StepResult:
    name: str
    outcome: str
    detail: str = ""


@dataclass(frozen=True)
class PipelineReport:
    steps: tuple[StepResult, ...]

    @property
    def overall(self) -> bool:
        return len(self.steps) == len(STEPS) and all(s.outcome == PASS for s in self.steps)

    def step(self, name: str) -> StepResult:
        return next(s for s in self.steps if s.name == name)


def _signature_problems(reports: list[VerificationReport]) -> list[str]:
    return [f"signature {i}: {r.failure_reason}" for i, r in enumerate(reports, 1) if not r.valid]


def pipeline_verify(instance_edoc: EDocument, repo) -> PipelineReport:
    """Fetch the definition, verify it, validate the instance, verify the instance."""
    results: list[StepResult] = []
    state: dict = {}

    def fetch():
        ns = instance_edoc.signed_content.name.namespace_uri
        state["def_edoc"] = repo.find_definition_by_namespace(ns)
        return f"definition for namespace {ns}"

    def verify_definition():
        problems = _signature_problems(verify_edoc(state["def_edoc"]))
        if problems:
            return problems
        try:
            state["definition"] = definition_of(state["def_edoc"])
        except MalformedDefinition as exc:
            return [f"definition content unreadable: {exc}"]
        return f"{len(state['def_edoc'].signatures)} signature(s) valid"

    def validate():
        report = validate_instance(instance_edoc.signed_content, state["definition"])
        if not report.valid:
            return [f"{label}: {message}" for label, message in report.violations]
        return f"conforms to {state['definition'].type_id}"

    def verify_instance():
        problems = _signature_problems(verify_edoc(instance_edoc)) + document_hash_problems(instance_edoc)
        return problems or f"{len(instance_edoc.signatures)} signature(s) valid"

    for name, run in zip(STEPS, (fetch, verify_definition, validate, verify_instance)):
        if results and results[-1].outcome != PASS:
            results.append(StepResult(name, SKIPPED, "earlier step failed"))
            continue
        try:
            outcome = run()
        except EdocError as exc:
            outcome = [f"{type(exc).__name__}: {exc}"]
        if isinstance(outcome, list):
            results.append(StepResult(name, FAIL, "; ".join(outcome)))
        else:
            results.append(StepResult(name, PASS, outcome))
    return PipelineReport(tuple(results))
