"""XML Signature envelopes: enveloping and detached signing, emit/absorb, verification.

A signature always carries three kinds of reference: one per signed content
target, one over its own ``KeyInfo`` and one over the ``signedProperties``
element inside its ``Object``. The ``SignedInfo`` listing those digests is
canonicalized and signed.

Reference targets are either a :class:`NodePath` or an opaque label for a
detached blob. A path whose first step is ``dsig:Signature`` is relative to
the signature itself; it is resolved against the signature's own emitted
element so that parallel signatures in one document never see each other's
``KeyInfo``. Every other path is handed to the caller's ``resolve`` callback.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Union

from cryptography import x509
from cryptography.hazmat.primitives.asymmetric import rsa

from . import sigcore
from .canonical_xml import NodePath, XmlElement, XmlName, canonicalize, element, locate
from .errors import (
    KeyMismatch,
    MalformedBase64,
    MalformedKey,
    MalformedSignature,
    NodeNotFound,
    UnknownAlgorithm,
    UnresolvableReference,
)
from .namespaces import AIDA_ENVELOPE, C14N, DSIG

Target = Union[NodePath, str]


def _d(local: str) -> XmlName:
    return XmlName(DSIG, "dsig", local)


def _a(local: str) -> XmlName:
    return XmlName(AIDA_ENVELOPE, "aida", local)


SIGNATURE = _d("Signature")
SIGNED_INFO = _d("SignedInfo")
SIGNATURE_VALUE = _d("SignatureValue")
KEY_INFO = _d("KeyInfo")
OBJECT = _d("Object")
PROPERTIES = _a("properties")
SIGNED_PROPERTIES = _a("signedProperties")
UNSIGNED_PROPERTIES = _a("unsignedProperties")

KEY_INFO_PATH = NodePath((SIGNATURE, KEY_INFO))
SIGNED_PROPERTIES_PATH = NodePath((SIGNATURE, OBJECT, PROPERTIES, SIGNED_PROPERTIES))
SELF_TARGETS = (KEY_INFO_PATH, SIGNED_PROPERTIES_PATH)
SIGNATURE_SCOPE = {"dsig": DSIG}

EMPTY_SIGNED_PROPERTIES = element(SIGNED_PROPERTIES)
EMPTY_UNSIGNED_PROPERTIES = element(UNSIGNED_PROPERTIES)


def is_self_target(target: Target) -> bool:
    return isinstance(target, NodePath) and bool(target.steps) and target.steps[0].matches(SIGNATURE)


def target_label(target: Target) -> str:
    return target.to_uri() if isinstance(target, NodePath) else target


@dataclass(frozen=True)
class Reference:
    target: Target
    digest_method: str
    digest_value: bytes

    def __post_init__(self):
        size = sigcore.digest_algorithm(self.digest_method).size
        if len(self.digest_value) != size:
            raise ValueError(f"digest value must be {size} bytes for {self.digest_method}")
        if isinstance(self.target, str) and self.target.startswith("#"):
            raise ValueError(f"blob label {self.target!r} may not start with '#'")


@dataclass(frozen=True)
class SignedInfo:
    signature_method: str
    references: tuple[Reference, ...]
    canonicalization_method: str = C14N

    def __post_init__(self):
        object.__setattr__(self, "references", tuple(self.references))
        if not self.references:
            raise ValueError("SignedInfo needs at least one reference")
        targets = [r.target for r in self.references]
        if len(set(targets)) != len(targets):
            raise ValueError("two references share a target")


@dataclass(frozen=True)
class KeyInfo:
    """Either an opaque DER certificate or a bare PEM public key."""

    certificate: bytes | None = None
    public_key: bytes | None = None

    def __post_init__(self):
        if (self.certificate is None) == (self.public_key is None):
            raise ValueError("KeyInfo holds exactly one of certificate or public_key")

    def verification_key(self) -> bytes:
        if self.public_key is not None:
            return self.public_key
        try:
            cert = x509.load_der_x509_certificate(self.certificate)
        except ValueError as exc:
            raise MalformedKey(f"unreadable certificate: {exc}") from None
        return sigcore.public_pem(cert.public_key())


@dataclass(frozen=True)
class XmlSignature:
    signed_info: SignedInfo
    signature_value: sigcore.SignatureBytes
    key_info: KeyInfo
    signed_properties: XmlElement = EMPTY_SIGNED_PROPERTIES
    unsigned_properties: XmlElement = EMPTY_UNSIGNED_PROPERTIES

    @property
    def content_references(self) -> list[Reference]:
        return [r for r in self.signed_info.references if not is_self_target(r.target)]


@dataclass(frozen=True)
class VerificationReport:
    signature_valid: bool
    reference_results: tuple[tuple[str, bool], ...]
    failure_reason: str | None = None

    @property
    def valid(self) -> bool:
        return self.signature_valid

    def result_for(self, target: Target) -> bool:
        label = target_label(target)
        return dict(self.reference_results)[label]


# -- emit -------------------------------------------------------------------


def _algorithm(name: XmlName, uri: str) -> XmlElement:
    return element(name, attrs={"Algorithm": uri})


def emit_reference(ref: Reference) -> XmlElement:
    uri = target_label(ref.target)
    ns = {}
    if isinstance(ref.target, NodePath):
        ns = {p: u for p, u in ref.target.bindings().items() if p != "dsig"}
    return element(
        _d("Reference"),
        _algorithm(_d("DigestMethod"), ref.digest_method),
        element(_d("DigestValue"), sigcore.base64_encode(ref.digest_value)),
        attrs={"URI": uri},
        ns=ns,
    )


def emit_signed_info(info: SignedInfo) -> XmlElement:
    return element(
        SIGNED_INFO,
        _algorithm(_d("CanonicalizationMethod"), info.canonicalization_method),
        _algorithm(_d("SignatureMethod"), info.signature_method),
        *(emit_reference(r) for r in info.references),
    )


def _b64_int(n: int) -> str:
    return sigcore.base64_encode(n.to_bytes((n.bit_length() + 7) // 8 or 1, "big"))


def emit_key_info(info: KeyInfo) -> XmlElement:
    if info.certificate is not None:
        body = element(
            _d("X509Data"), element(_d("X509Certificate"), sigcore.base64_encode(info.certificate))
        )
    else:
        key = sigcore.load_public_key(info.public_key)
        if not isinstance(key, rsa.RSAPublicKey):
            raise MalformedKey("only RSA public keys can be carried as KeyValue")
        nums = key.public_numbers()
        body = element(
            _d("KeyValue"),
            element(
                _d("RSAKeyValue"),
                element(_d("Modulus"), _b64_int(nums.n)),
                element(_d("Exponent"), _b64_int(nums.e)),
            ),
        )
    return element(KEY_INFO, body)


def emit(sig: XmlSignature) -> XmlElement:
    """The ``dsig:Signature`` element: SignedInfo, SignatureValue, KeyInfo, Object."""
    properties = element(
        PROPERTIES, sig.signed_properties, sig.unsigned_properties, ns={"aida": AIDA_ENVELOPE}
    )
    return element(
        SIGNATURE,
        emit_signed_info(sig.signed_info),
        element(SIGNATURE_VALUE, sigcore.base64_encode(sig.signature_value.value)),
        emit_key_info(sig.key_info),
        element(OBJECT, properties),
        ns=SIGNATURE_SCOPE,
    )


# -- absorb -----------------------------------------------------------------


def _only_elements(el: XmlElement) -> list[XmlElement]:
    if any(isinstance(c, str) and c.strip() for c in el.children):
        raise MalformedSignature(f"unexpected text inside {el.name.qname}")
    return el.elements()


def _child(el: XmlElement, name: XmlName) -> XmlElement:
    found = el.find(name)
    if found is None:
        raise MalformedSignature(f"{el.name.qname} lacks {name.qname}")
    return found


def _b64(el: XmlElement) -> bytes:
    try:
        return sigcore.base64_decode("".join(el.text.split()))
    except MalformedBase64 as exc:
        raise MalformedSignature(f"{el.name.qname}: {exc}") from None


def _algorithm_of(el: XmlElement) -> str:
    uri = el.get("Algorithm")
    if uri is None:
        raise MalformedSignature(f"{el.name.qname} lacks an Algorithm attribute")
    return uri


def absorb_reference(el: XmlElement, scope: Mapping[str, str]) -> Reference:
    scope = el.scope(scope)
    uri = el.get("URI")
    if uri is None:
        raise MalformedSignature("Reference lacks a URI")
    transforms = el.find(_d("Transforms"))
    if transforms is not None and transforms.elements():
        raise MalformedSignature("Reference transforms are not supported")
    method = _algorithm_of(_child(el, _d("DigestMethod")))
    sigcore.digest_algorithm(method)
    value = _b64(_child(el, _d("DigestValue")))
    try:
        target: Target = NodePath.from_uri(uri, scope) if uri.startswith("#") else uri
        return Reference(target, method, value)
    except ValueError as exc:
        raise MalformedSignature(f"bad reference {uri!r}: {exc}") from None


def absorb_key_info(el: XmlElement) -> KeyInfo:
    x509_data = el.find(_d("X509Data"))
    if x509_data is not None:
        return KeyInfo(certificate=_b64(_child(x509_data, _d("X509Certificate"))))
    key_value = el.find(_d("KeyValue"))
    if key_value is not None:
        rsa_value = _child(key_value, _d("RSAKeyValue"))
        n = int.from_bytes(_b64(_child(rsa_value, _d("Modulus"))), "big")
        e = int.from_bytes(_b64(_child(rsa_value, _d("Exponent"))), "big")
        try:
            key = rsa.RSAPublicNumbers(e, n).public_key()
        except ValueError as exc:
            raise MalformedSignature(f"bad RSAKeyValue: {exc}") from None
        return KeyInfo(public_key=sigcore.public_pem(key))
    raise MalformedSignature("KeyInfo carries neither X509Data nor KeyValue")


def absorb(el: XmlElement, inherited_ns: Mapping[str, str] | None = None) -> XmlSignature:
    """Inverse of :func:`emit`; layout whitespace between structural children is ignored."""
    if not el.name.matches(SIGNATURE):
        raise MalformedSignature(f"expected dsig:Signature, got {el.name.qname}")
    scope = el.scope(inherited_ns)
    _only_elements(el)
    try:
        info_el = _child(el, SIGNED_INFO)
        info_scope = info_el.scope(scope)
        signature_method = _algorithm_of(_child(info_el, _d("SignatureMethod")))
        sigcore.signature_algorithm(signature_method)
        c14n = _algorithm_of(_child(info_el, _d("CanonicalizationMethod")))
        refs = tuple(absorb_reference(r, info_scope) for r in info_el.findall(_d("Reference")))
        try:
            signed_info = SignedInfo(signature_method, refs, c14n)
        except ValueError as exc:
            raise MalformedSignature(str(exc)) from None
        if c14n != C14N:
            raise MalformedSignature(f"unsupported canonicalization {c14n!r}")

        value = sigcore.SignatureBytes(signature_method, _b64(_child(el, SIGNATURE_VALUE)))
        key_info = absorb_key_info(_child(el, KEY_INFO))

        props = _child(_child(el, OBJECT), PROPERTIES)
        signed = _child(props, SIGNED_PROPERTIES)
        unsigned = _child(props, UNSIGNED_PROPERTIES)
    except UnknownAlgorithm as exc:
        raise MalformedSignature(str(exc)) from None
    except ValueError as exc:
        if isinstance(exc, MalformedSignature):
            raise
        raise MalformedSignature(str(exc)) from None

    self_targets = [r.target for r in refs if is_self_target(r.target)]
    if sorted(map(str, self_targets)) != sorted(map(str, SELF_TARGETS)):
        raise MalformedSignature("signature must reference its KeyInfo and signedProperties exactly once")
    if len(refs) < 3:
        raise MalformedSignature("signature covers no content")
    return XmlSignature(signed_info, value, key_info, signed, unsigned)


# -- signing ----------------------------------------------------------------


def _self_digest(sig_el: XmlElement, target: NodePath, method: str) -> bytes:
    relative = NodePath(target.steps[1:])
    found, scope = locate(sig_el, relative, {})
    return sigcore.digest(canonicalize(found, scope), method).value


def _finish(
    content_refs: list[Reference],
    key: sigcore.KeyPair,
    cert: bytes | None,
    signed_props: XmlElement,
    unsigned_props: XmlElement,
    signature_method: str,
    digest_method: str,
) -> XmlSignature:
    if not signed_props.name.matches(SIGNED_PROPERTIES):
        raise ValueError("signed properties must be an aida:signedProperties element")
    if not unsigned_props.name.matches(UNSIGNED_PROPERTIES):
        raise ValueError("unsigned properties must be an aida:unsignedProperties element")
    sigcore.signature_algorithm(signature_method)
    if cert is not None:
        key_info = KeyInfo(certificate=cert)
        if key_info.verification_key() != sigcore.public_key_of(key.private_key):
            raise KeyMismatch("certificate does not carry the signing key's public key")
    else:
        key_info = KeyInfo(public_key=sigcore.public_key_of(key.private_key))

    placeholder = sigcore.SignatureBytes(signature_method, b"\0")
    zero = bytes(sigcore.digest_algorithm(digest_method).size)
    draft_refs = content_refs + [Reference(t, digest_method, zero) for t in SELF_TARGETS]
    draft = XmlSignature(
        SignedInfo(signature_method, draft_refs), placeholder, key_info, signed_props, unsigned_props
    )
    draft_el = emit(draft)
    refs = content_refs + [
        Reference(t, digest_method, _self_digest(draft_el, t, digest_method)) for t in SELF_TARGETS
    ]
    signed_info = SignedInfo(signature_method, refs)
    value = sigcore.sign(key.private_key, signed_info_bytes(signed_info), signature_method)
    return XmlSignature(signed_info, value, key_info, signed_props, unsigned_props)


def signed_info_bytes(info: SignedInfo) -> bytes:
    """Canonical SignedInfo bytes, the exact input of the signature value."""
    return canonicalize(emit_signed_info(info), SIGNATURE_SCOPE)


def sign_enveloping(
    content: XmlElement,
    key: sigcore.KeyPair,
    cert: bytes | None = None,
    signed_props: XmlElement = EMPTY_SIGNED_PROPERTIES,
    unsigned_props: XmlElement = EMPTY_UNSIGNED_PROPERTIES,
    *,
    target: NodePath = NodePath(),
    inherited_ns: Mapping[str, str] | None = None,
    signature_method: str | None = None,
    digest_method: str = sigcore.SHA1,
) -> XmlSignature:
    """Sign ``content``, which the host document will hold at ``target``.

    ``inherited_ns`` are the bindings in scope above ``content`` in that
    document; they are part of its canonical form.
    """
    if is_self_target(target):
        raise ValueError("content target may not point into the signature")
    data = canonicalize(content, inherited_ns)
    ref = Reference(target, digest_method, sigcore.digest(data, digest_method).value)
    return _finish(
        [ref], key, cert, signed_props, unsigned_props, signature_method or key.algorithm, digest_method
    )


def sign_detached(
    blob: bytes,
    key: sigcore.KeyPair,
    cert: bytes | None = None,
    signed_props: XmlElement = EMPTY_SIGNED_PROPERTIES,
    unsigned_props: XmlElement = EMPTY_UNSIGNED_PROPERTIES,
    *,
    label: str = "blob",
    signature_method: str | None = None,
    digest_method: str = sigcore.SHA1,
) -> XmlSignature:
    """Sign raw bytes kept outside the signature; pairing them back up is the caller's job."""
    ref = Reference(label, digest_method, sigcore.digest(blob, digest_method).value)
    return _finish(
        [ref], key, cert, signed_props, unsigned_props, signature_method or key.algorithm, digest_method
    )


# -- verification -----------------------------------------------------------


def verify_signature(sig: XmlSignature, resolve: Callable[[Target], bytes]) -> VerificationReport:
    """Check every reference digest and the signature over SignedInfo.

    Mismatches are reported, not raised. ``resolve`` maps each content
    target to the bytes that were digested (canonical bytes for node paths,
    raw bytes for blob labels).
    """
    public_key = sig.key_info.verification_key()
    sig_el = emit(sig)
    results = []
    failures = []
    for ref in sig.signed_info.references:
        if is_self_target(ref.target):
            try:
                actual = _self_digest(sig_el, ref.target, ref.digest_method)
            except NodeNotFound as exc:
                raise UnresolvableReference(str(exc)) from None
        else:
            try:
                data = resolve(ref.target)
            except (LookupError, KeyError) as exc:
                raise UnresolvableReference(f"cannot resolve {target_label(ref.target)}: {exc}") from None
            actual = sigcore.digest(data, ref.digest_method).value
        ok = actual == ref.digest_value
        results.append((target_label(ref.target), ok))
        if not ok:
            failures.append(f"digest mismatch for {target_label(ref.target)}")

    if not sigcore.verify(public_key, signed_info_bytes(sig.signed_info), sig.signature_value):
        failures.append("SignatureValue does not verify over SignedInfo")
    return VerificationReport(
        signature_valid=not failures,
        reference_results=tuple(results),
        failure_reason="; ".join(failures) or None,
    )
