"""Restricted stylesheets and the signed transform-data wrapper.

The stylesheet language is a closed subset of XSLT 1.0: one ``xsl:output``,
one ``xsl:template`` matching a single qualified name, and a template body
of literal result elements, literal text and ``xsl:value-of`` with a
one-step child select. Anything else is refused when the sheet is parsed,
never silently skipped at render time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .canonical_xml import XmlDocument, XmlElement, XmlName, element
from .errors import (
    MalformedTransformData,
    MatchFailure,
    MissingField,
    UnsupportedStylesheet,
)
from .namespaces import AIDA_ENVELOPE, XML, XSI, XSL
from .schema import DocumentTypeId

TRANSFORM_METHOD = "xslt"
OUTPUT_FORMAT = "mhtml"


@dataclass(frozen=True)
class ValueOf:
    field: XmlName


@dataclass(frozen=True)
class TemplateElement:
    """Literal result element; children may hold placeholders."""

    name: XmlName
    attributes: tuple[tuple[XmlName, str], ...]
    namespace_declarations: tuple[tuple[str, str], ...]
    children: tuple[Union["TemplateElement", ValueOf, str], ...]


@dataclass(frozen=True)
class Stylesheet:
    match_root: XmlName
    body: TemplateElement
    output_method: str
    source: XmlElement

    def placeholders(self) -> list[ValueOf]:
        found = []

        def walk(node):
            for child in node.children:
                if isinstance(child, ValueOf):
                    found.append(child)
                elif isinstance(child, TemplateElement):
                    walk(child)

        walk(self.body)
        return found


def _xsl(local: str) -> XmlName:
    return XmlName(XSL, "xsl", local)


def _qname(value: str, scope: Mapping[str, str], what: str) -> XmlName:
    value = value.strip()
    prefix, _, local = value.rpartition(":")
    if not local or "/" in value or "[" in value or "(" in value or "*" in value or "@" in value:
        raise UnsupportedStylesheet(f"{what} {value!r} is not a single qualified name")
    if prefix and prefix not in scope:
        raise UnsupportedStylesheet(f"{what} {value!r} uses an unbound prefix")
    try:
        return XmlName(scope.get(prefix, "") if prefix else "", prefix, local)
    except ValueError as exc:
        raise UnsupportedStylesheet(f"{what} {value!r}: {exc}") from None


def _plain_attrs(el: XmlElement, allowed: set[str]) -> dict[str, str]:
    out = {}
    for name, value in el.attributes:
        if name.namespace_uri or name.local not in allowed:
            raise UnsupportedStylesheet(f"attribute {name.qname} on {el.name.qname} is not supported")
        out[name.local] = value
    return out


def _no_content(el: XmlElement) -> None:
    if el.elements() or el.text.strip():
        raise UnsupportedStylesheet(f"{el.name.qname} must be empty")


def _template_node(el: XmlElement, scope: dict[str, str], preserve: bool = False):
    scope = el.scope(scope)
    if el.name.namespace_uri == XSL:
        if el.name.local != "value-of":
            raise UnsupportedStylesheet(f"xsl:{el.name.local} is not supported")
        attrs = _plain_attrs(el, {"select"})
        if "select" not in attrs:
            raise UnsupportedStylesheet("xsl:value-of without select")
        _no_content(el)
        return ValueOf(_qname(attrs["select"], scope, "select"))
    for name, _ in el.attributes:
        if name.namespace_uri == XSL:
            raise UnsupportedStylesheet(f"XSLT attribute {name.qname} is not supported")
    space = el.get("space", XML)
    preserve = preserve if space is None else space == "preserve"
    # whitespace-only stylesheet text is stripped, as in XSLT, unless xml:space says otherwise
    children = tuple(
        c if isinstance(c, str) else _template_node(c, scope, preserve)
        for c in el.children
        if not isinstance(c, str) or preserve or c.strip()
    )
    decls = tuple((p, u) for p, u in el.namespace_declarations if u != XSL)
    return TemplateElement(el.name, el.attributes, decls, children)


def parse_stylesheet_element(root: XmlElement, inherited: Mapping[str, str] | None = None) -> Stylesheet:
    if not root.name.matches(_xsl("stylesheet")):
        raise UnsupportedStylesheet(f"expected xsl:stylesheet, got {root.name.qname}")
    if _plain_attrs(root, {"version"}).get("version") != "1.0":
        raise UnsupportedStylesheet("stylesheet version must be 1.0")
    scope = root.scope(inherited)
    if root.text.strip():
        raise UnsupportedStylesheet("text at stylesheet top level")
    outputs, templates = [], []
    for child in root.elements():
        if child.name.matches(_xsl("output")):
            outputs.append(child)
        elif child.name.matches(_xsl("template")):
            templates.append(child)
        else:
            raise UnsupportedStylesheet(f"top-level {child.name.qname} is not supported")
    if len(outputs) != 1 or len(templates) != 1:
        raise UnsupportedStylesheet("a stylesheet holds exactly one xsl:output and one xsl:template")

    output_method = _plain_attrs(outputs[0], {"method"}).get("method", "xml")
    _no_content(outputs[0])
    template = templates[0]
    tattrs = _plain_attrs(template, {"match"})
    if "match" not in tattrs:
        raise UnsupportedStylesheet("template without match")
    tscope = template.scope(scope)
    match_root = _qname(tattrs["match"], tscope, "match")

    if template.text.strip():
        raise UnsupportedStylesheet("text outside the literal result element")
    results = template.elements()
    if len(results) != 1 or results[0].name.namespace_uri == XSL:
        raise UnsupportedStylesheet("template body must be exactly one literal result element")
    body = _template_node(results[0], tscope)
    body = _declare_used(body, {p: u for p, u in tscope.items() if u != XSL and p != "xml"})
    return Stylesheet(match_root, body, output_method, root)


def _declare_used(body: TemplateElement, inherited: dict[str, str]) -> TemplateElement:
    """Carry inherited bindings the output needs onto the result root."""
    used: dict[str, str] = {}

    def walk(node: TemplateElement, declared: set[str]):
        declared = declared | {p for p, _ in node.namespace_declarations}
        names = [node.name] + [n for n, _ in node.attributes]
        for n in names:
            if n.prefix not in declared and n.prefix != "xml" and (n.prefix or n.namespace_uri):
                used[n.prefix] = n.namespace_uri
        for child in node.children:
            if isinstance(child, TemplateElement):
                walk(child, declared)

    walk(body, set())
    extra = tuple((p, u) for p, u in sorted(used.items()) if inherited.get(p) == u)
    if not extra:
        return body
    return TemplateElement(body.name, body.attributes, body.namespace_declarations + extra, body.children)


def parse_stylesheet(doc: XmlDocument) -> Stylesheet:
    return parse_stylesheet_element(doc.root)


def apply(sheet: Stylesheet, instance_root: XmlElement) -> XmlDocument:
    """Render ``instance_root`` through ``sheet``."""
    if not instance_root.name.matches(sheet.match_root):
        raise MatchFailure(
            f"template matches {sheet.match_root.qname}, instance root is {instance_root.name.qname}"
        )
    return XmlDocument(_render(sheet.body, instance_root))


def _render(node: TemplateElement, instance: XmlElement) -> XmlElement:
    children: list = []
    for child in node.children:
        if isinstance(child, ValueOf):
            source = instance.find(child.field)
            if source is None:
                raise MissingField(child.field.local, f"value-of selects absent field {child.field.qname}")
            piece = source.string_value()
        elif isinstance(child, TemplateElement):
            children.append(_render(child, instance))
            continue
        else:
            piece = child
        if not piece:
            continue
        if children and isinstance(children[-1], str):
            children[-1] += piece
        else:
            children.append(piece)
    return XmlElement(node.name, node.attributes, node.namespace_declarations, tuple(children))


# -- transform data ---------------------------------------------------------


@dataclass(frozen=True)
class TransformData:
    transform_id: str
    document_type_id: DocumentTypeId
    language: str
    stylesheet: Stylesheet
    transform_method: str = TRANSFORM_METHOD
    output_format: str = OUTPUT_FORMAT

    def __post_init__(self):
        if not self.transform_id.strip() or self.transform_id != self.transform_id.strip():
            raise ValueError("transform id must be non-empty without surrounding whitespace")
        if (self.transform_method, self.output_format) != (TRANSFORM_METHOD, OUTPUT_FORMAT):
            raise ValueError("only xslt producing mhtml is supported")


def _a(local: str) -> XmlName:
    return XmlName(AIDA_ENVELOPE, "aida", local)


def emit_transform_data_element(t: TransformData) -> XmlElement:
    caps = element(
        _a("requiredDisplayCapabilities"),
        element(_a("transformMethod"), t.transform_method),
        element(_a("language"), t.language),
        element(_a("outputFormat"), t.output_format),
    )
    return element(
        _a("transformData"),
        element(_a("transformDataID"), t.transform_id),
        element(_a("documentTypeID"), t.document_type_id.value),
        caps,
        element(_a("transform"), element(_a("documentFrameXSLStylesheet"), t.stylesheet.source)),
        attrs=[(XmlName(XSI, "xsi", "schemaLocation"), f"{AIDA_ENVELOPE} aida:displayData")],
        ns={"aida": AIDA_ENVELOPE, "xsi": XSI},
    )


def emit_transform_data(t: TransformData) -> XmlDocument:
    return XmlDocument(emit_transform_data_element(t))


def _one(el: XmlElement, local: str) -> XmlElement:
    found = el.findall(_a(local))
    if len(found) != 1:
        raise MalformedTransformData(f"{el.name.qname} must contain exactly one aida:{local}")
    return found[0]


def _text(el: XmlElement, local: str) -> str:
    child = _one(el, local)
    if child.elements():
        raise MalformedTransformData(f"aida:{local} must hold text only")
    return child.text.strip()


def parse_transform_data_element(root: XmlElement, inherited: Mapping[str, str] | None = None) -> TransformData:
    if not root.name.matches(_a("transformData")):
        raise MalformedTransformData(f"expected aida:transformData, got {root.name.qname}")
    scope = root.scope(inherited)
    caps = _one(root, "requiredDisplayCapabilities")
    frame = _one(_one(root, "transform"), "documentFrameXSLStylesheet")
    sheets = frame.elements()
    if len(sheets) != 1 or frame.text.strip():
        raise MalformedTransformData("documentFrameXSLStylesheet must hold exactly one stylesheet")
    fscope = frame.scope(_one(root, "transform").scope(scope))
    try:
        return TransformData(
            transform_id=_text(root, "transformDataID"),
            document_type_id=DocumentTypeId(_text(root, "documentTypeID")),
            language=_text(caps, "language"),
            stylesheet=parse_stylesheet_element(sheets[0], fscope),
            transform_method=_text(caps, "transformMethod"),
            output_format=_text(caps, "outputFormat"),
        )
    except UnsupportedStylesheet as exc:
        raise MalformedTransformData(f"embedded stylesheet: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, MalformedTransformData):
            raise
        raise MalformedTransformData(str(exc)) from None


def parse_transform_data(doc: XmlDocument) -> TransformData:
    return parse_transform_data_element(doc.root)
