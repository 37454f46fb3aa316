"""Generic type definitions, their compiled schemas, and instance validation.

A generic definition names a root element, a namespace, a prefix and an
ordered list of typed fields. Compiling it yields a document type
definition whose schema is rendered in a small, closed subset of XML
Schema: one root element holding a sequence of element references, a
``shortString`` simple type capped at 250 characters, and one declaration
per field. Parsing a hand-written definition accepts exactly that subset.
"""

from __future__ import annotations

import datetime
import math
import re
from dataclasses import dataclass
from enum import Enum

from .canonical_xml import XmlDocument, XmlElement, XmlName, element
from .errors import MalformedDefinition, SchemaTooRich
from .namespaces import AIDA_ANY, AIDA_DEFINITIONS, XSD, XSI

SHORT_STRING_LIMIT = 250
TYPE_ID_LIMIT = 100

_NCNAME = re.compile(r"^[^\W\d][\w.\-]*$")
_TYPE_ID = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*://[^\s/]+(/\S*)?$")
_DATE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_TIME = re.compile(r"^([01]\d|2[0-3]):[0-5]\d:[0-5]\d\.\d{3}$")
_INT = re.compile(r"^(0|-?[1-9]\d*)$")
_DOUBLE = re.compile(r"^[+-]?\d+(\.\d+)?([eE][+-]?\d+)?$")


class Kind(str, Enum):
    STRING = "string"
    SHORT_STRING = "shortString"
    DATE = "date"
    TIME = "time"
    INT = "int"
    DOUBLE = "double"
    BOOLEAN = "boolean"


# generic-schema tag for each kind; the boolean tag is capitalised in the field-type table
_GENERIC_TAG = {k: k.value for k in Kind} | {Kind.BOOLEAN: "Boolean"}
_TAG_KIND = {tag: kind for kind, tag in _GENERIC_TAG.items()} | {"boolean": Kind.BOOLEAN}
_XSD_TYPE = {
    Kind.STRING: "string",
    Kind.DATE: "date",
    Kind.TIME: "time",
    Kind.INT: "int",
    Kind.DOUBLE: "double",
    Kind.BOOLEAN: "boolean",
}
_XSD_KIND = {v: k for k, v in _XSD_TYPE.items()}


@dataclass(frozen=True)
class FieldType:
    kind: Kind
    max_length: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.max_length is not None:
            if self.kind is not Kind.SHORT_STRING:
                raise ValueError("max_length applies to shortString only")
            if not 0 < self.max_length <= SHORT_STRING_LIMIT:
                raise ValueError(f"shortString max must be in 1..{SHORT_STRING_LIMIT}")

    @property
    def limit(self) -> int | None:
        if self.kind is Kind.SHORT_STRING:
            return self.max_length or SHORT_STRING_LIMIT
        return None

    def check(self, value: str) -> str | None:
        """Return a violation message, or None when ``value`` is acceptable."""
        if self.kind is Kind.STRING:
            return None
        if self.kind is Kind.SHORT_STRING:
            if len(value) > self.limit:
                return f"length {len(value)} exceeds {self.limit}"
            return None
        # non-string types collapse surrounding whitespace before the lexical check
        lexeme = value.strip()
        return _LEXICAL[self.kind](lexeme)


def _check_date(s: str) -> str | None:
    m = _DATE.match(s)
    if not m:
        return f"lexical: {s!r} is not YYYY-MM-DD"
    try:
        datetime.date(*map(int, m.groups()))
    except ValueError:
        return f"lexical: {s!r} is not a calendar date"
    return None


def _check_time(s: str) -> str | None:
    return None if _TIME.match(s) else f"lexical: {s!r} is not HH:MM:SS.SSS"


def _check_int(s: str) -> str | None:
    if not _INT.match(s):
        return f"lexical: {s!r} is not a canonical integer"
    if not -(2**31) <= int(s) <= 2**31 - 1:
        return f"lexical: {s} is outside the signed 32-bit range"
    return None


def _check_double(s: str) -> str | None:
    if not _DOUBLE.match(s) or math.isinf(float(s)):
        return f"lexical: {s!r} is not a double"
    return None


def _check_boolean(s: str) -> str | None:
    return None if s in ("true", "false") else f"lexical: {s!r} is not true or false"


_LEXICAL = {
    Kind.DATE: _check_date,
    Kind.TIME: _check_time,
    Kind.INT: _check_int,
    Kind.DOUBLE: _check_double,
    Kind.BOOLEAN: _check_boolean,
}


@dataclass(frozen=True)
class FieldDef:
    name: str
    field_type: FieldType
    searchable: bool = False

    def __post_init__(self):
        if not _NCNAME.match(self.name):
            raise ValueError(f"field name {self.name!r} is not a valid XML name")


@dataclass(frozen=True)
class GenericTypeDefinition:
    document_root: str
    document_namespace: str
    namespace_prefix: str
    fields: tuple[FieldDef, ...]

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        for label, value in (("documentRoot", self.document_root), ("namespacePrefix", self.namespace_prefix)):
            if not _NCNAME.match(value):
                raise ValueError(f"{label} {value!r} is not a valid XML name")
        if not self.document_namespace:
            raise ValueError("documentNamespace is empty")
        if not self.fields:
            raise ValueError("a definition needs at least one field")
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise ValueError("duplicate field name")


@dataclass(frozen=True)
class DocumentTypeId:
    value: str

    def __post_init__(self):
        if len(self.value) > TYPE_ID_LIMIT:
            raise ValueError(f"document type id longer than {TYPE_ID_LIMIT} characters")
        if not _TYPE_ID.match(self.value):
            raise ValueError(f"document type id {self.value!r} does not look like a URL")

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CompiledSchema:
    root_element: str
    target_namespace: str
    namespace_prefix: str
    fields: tuple[tuple[str, FieldType], ...]

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple((n, t) for n, t in self.fields))

    @property
    def element_order(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.fields)

    def field_type(self, name: str) -> FieldType:
        return dict(self.fields)[name]

    def qualified(self, local: str) -> XmlName:
        return XmlName(self.target_namespace, self.namespace_prefix, local)


@dataclass(frozen=True)
class DocumentTypeDefinition:
    type_id: DocumentTypeId
    compiled_schema: CompiledSchema
    source_generic: GenericTypeDefinition | None = None

    def __post_init__(self):
        if self.source_generic is not None and compile_schema(self.source_generic) != self.compiled_schema:
            raise ValueError("compiled schema does not match its generic source")


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[tuple[str, str], ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.valid


# -- generic definitions ----------------------------------------------------


def _g(local: str, ns: str = AIDA_DEFINITIONS) -> XmlName:
    return XmlName(ns, "aida", local)


def _kids(el: XmlElement, error=MalformedDefinition) -> list[XmlElement]:
    if any(isinstance(c, str) and c.strip() for c in el.children) and el.elements():
        raise error(f"unexpected text inside {el.name.qname}")
    return el.elements()


def _one(el: XmlElement, name: XmlName) -> XmlElement:
    found = el.findall(name)
    if len(found) != 1:
        raise MalformedDefinition(f"{el.name.qname} must contain exactly one {name.qname}")
    return found[0]


def _text_of(el: XmlElement, name: XmlName) -> str:
    child = _one(el, name)
    if child.elements():
        raise MalformedDefinition(f"{name.qname} must hold text only")
    return child.text.strip()


def _parse_field(el: XmlElement, ns: str) -> FieldDef:
    name = _text_of(el, _g("name", ns))
    tags = [k for k in _kids(el) if not k.name.matches(_g("name", ns))]
    if len(tags) != 1:
        raise MalformedDefinition(f"field {name!r} must have exactly one type tag")
    tag = tags[0]
    if tag.name.namespace_uri != ns or tag.name.local not in _TAG_KIND:
        raise MalformedDefinition(f"field {name!r} has unknown type tag {tag.name.qname}")
    if tag.children and (tag.elements() or tag.text.strip()):
        raise MalformedDefinition(f"type tag of field {name!r} must be empty")
    kind = _TAG_KIND[tag.name.local]

    max_length = None
    searchable = False
    for attr, value in tag.attributes:
        if attr.namespace_uri:
            continue
        if attr.local == "max":
            if kind is not Kind.SHORT_STRING:
                raise MalformedDefinition(f"field {name!r}: max is only allowed on shortString")
            if not value.strip().isdigit():
                raise MalformedDefinition(f"field {name!r}: max {value!r} is not a positive integer")
            max_length = int(value)
            if not 0 < max_length <= SHORT_STRING_LIMIT:
                raise MalformedDefinition(
                    f"field {name!r}: max {max_length} exceeds the shortString bound of {SHORT_STRING_LIMIT}"
                )
        elif attr.local == "searchable":
            if value not in ("true", "false"):
                raise MalformedDefinition(f"field {name!r}: searchable must be true or false")
            searchable = value == "true"
        else:
            raise MalformedDefinition(f"field {name!r}: unknown attribute {attr.local}")
    try:
        return FieldDef(name, FieldType(kind, max_length), searchable)
    except ValueError as exc:
        raise MalformedDefinition(str(exc)) from None


def parse_generic_element(root: XmlElement) -> GenericTypeDefinition:
    if root.name.local != "genericSchema" or root.name.namespace_uri not in AIDA_ANY:
        raise MalformedDefinition(f"expected aida:genericSchema, got {root.name.qname}")
    ns = root.name.namespace_uri
    field_list = _one(root, _g("fieldList", ns))
    fields = []
    for child in _kids(field_list):
        if not child.name.matches(_g("field", ns)):
            raise MalformedDefinition(f"unexpected {child.name.qname} in fieldList")
        fields.append(_parse_field(child, ns))
    try:
        return GenericTypeDefinition(
            _text_of(root, _g("documentRoot", ns)),
            _text_of(root, _g("documentNamespace", ns)),
            _text_of(root, _g("namespacePrefix", ns)),
            tuple(fields),
        )
    except ValueError as exc:
        raise MalformedDefinition(str(exc)) from None


def parse_generic(doc: XmlDocument) -> GenericTypeDefinition:
    return parse_generic_element(doc.root)


def emit_generic_element(generic: GenericTypeDefinition, declare: bool = True) -> XmlElement:
    """Generic schema tree; ``declare=False`` when nested where aida is already bound."""
    fields = []
    for f in generic.fields:
        attrs = {}
        if f.field_type.max_length is not None:
            attrs["max"] = str(f.field_type.max_length)
        if f.searchable:
            attrs["searchable"] = "true"
        tag = element(_g(_GENERIC_TAG[f.field_type.kind]), attrs=attrs)
        fields.append(element(_g("field"), element(_g("name"), f.name), tag))
    return element(
        _g("genericSchema"),
        element(_g("documentRoot"), generic.document_root),
        element(_g("documentNamespace"), generic.document_namespace),
        element(_g("namespacePrefix"), generic.namespace_prefix),
        element(_g("fieldList"), *fields),
        ns={"aida": AIDA_DEFINITIONS} if declare else {},
    )


def emit_generic(generic: GenericTypeDefinition) -> XmlDocument:
    return XmlDocument(emit_generic_element(generic))


# -- compile ----------------------------------------------------------------


def compile_schema(generic: GenericTypeDefinition) -> CompiledSchema:
    return CompiledSchema(
        generic.document_root,
        generic.document_namespace,
        generic.namespace_prefix,
        tuple((f.name, f.field_type) for f in generic.fields),
    )


def compile(generic: GenericTypeDefinition, type_id: DocumentTypeId | str) -> DocumentTypeDefinition:
    if isinstance(type_id, str):
        type_id = DocumentTypeId(type_id)
    return DocumentTypeDefinition(type_id, compile_schema(generic), generic)


def _x(local: str) -> XmlName:
    return XmlName(XSD, "xsd", local)


def _restriction(base: str, max_length: int) -> XmlElement:
    return element(
        _x("restriction"), element(_x("maxLength"), attrs={"value": str(max_length)}), attrs={"base": base}
    )


def emit_schema(schema: CompiledSchema) -> XmlElement:
    """Render ``schema`` in the restricted XML Schema vocabulary."""
    p = schema.namespace_prefix
    refs = [element(_x("element"), attrs={"ref": f"{p}:{name}"}) for name in schema.element_order]
    decls = [
        element(
            _x("element"),
            element(_x("complexType"), element(_x("sequence"), *refs)),
            attrs={"name": schema.root_element},
        ),
        element(
            _x("simpleType"), _restriction("xsd:string", SHORT_STRING_LIMIT), attrs={"name": "shortString"}
        ),
    ]
    for name, ftype in schema.fields:
        if ftype.kind is Kind.SHORT_STRING and ftype.max_length is not None:
            decls.append(
                element(
                    _x("element"),
                    element(_x("simpleType"), _restriction(f"{p}:shortString", ftype.max_length)),
                    attrs={"name": name},
                )
            )
        elif ftype.kind is Kind.SHORT_STRING:
            decls.append(element(_x("element"), attrs={"name": name, "type": f"{p}:shortString"}))
        else:
            decls.append(element(_x("element"), attrs={"name": name, "type": f"xsd:{_XSD_TYPE[ftype.kind]}"}))
    return element(
        _x("schema"),
        *decls,
        attrs={"targetNamespace": schema.target_namespace},
        ns={p: schema.target_namespace, "xsd": XSD},
    )


def emit_type_definition(definition: DocumentTypeDefinition) -> XmlDocument:
    children = [
        element(_g("documentTypeID"), definition.type_id.value),
        element(_g("schema"), emit_schema(definition.compiled_schema)),
    ]
    if definition.source_generic is not None:
        children.append(emit_generic_element(definition.source_generic, declare=False))
    root = element(
        _g("documentTypeData"),
        *children,
        attrs=[(XmlName(XSI, "xsi", "schemaLocation"), f"{AIDA_DEFINITIONS} aida:documentTypeData")],
        ns={"aida": AIDA_DEFINITIONS, "xsi": XSI},
    )
    return XmlDocument(root)


# -- restricted schema parsing ----------------------------------------------


def _attrs(el: XmlElement, allowed: set[str]) -> dict[str, str]:
    found = {}
    for attr, value in el.attributes:
        if attr.namespace_uri or attr.local not in allowed:
            raise SchemaTooRich(f"{el.name.qname} attribute {attr.qname} is outside the supported subset")
        found[attr.local] = value
    return found


def _xsd_kids(el: XmlElement) -> list[XmlElement]:
    if el.text.strip():
        raise SchemaTooRich(f"text inside {el.name.qname}")
    kids = el.elements()
    for kid in kids:
        if kid.name.namespace_uri != XSD:
            raise SchemaTooRich(f"{kid.name.qname} is not an XML Schema construct")
    return kids


def _expect(el: XmlElement, local: str) -> None:
    if el.name.local != local:
        raise SchemaTooRich(f"xsd:{el.name.local} is outside the supported subset (expected xsd:{local})")


def _resolve_qname(value: str, scope: dict[str, str]) -> tuple[str, str]:
    prefix, _, local = value.strip().rpartition(":")
    if prefix not in scope and prefix:
        raise MalformedDefinition(f"unbound prefix in {value!r}")
    return scope.get(prefix, ""), local


def _parse_restriction(el: XmlElement, scope: dict[str, str]) -> tuple[tuple[str, str], int]:
    _expect(el, "restriction")
    attrs = _attrs(el, {"base"})
    if "base" not in attrs:
        raise MalformedDefinition("restriction without base")
    facets = _xsd_kids(el)
    if len(facets) != 1:
        raise SchemaTooRich("a restriction must carry exactly one maxLength facet")
    _expect(facets[0], "maxLength")
    if _xsd_kids(facets[0]):
        raise SchemaTooRich("maxLength takes no children")
    value = _attrs(facets[0], {"value"}).get("value", "")
    if not value.isdigit():
        raise MalformedDefinition(f"maxLength {value!r} is not a positive integer")
    return _resolve_qname(attrs["base"], el.scope(scope)), int(value)


def parse_schema(el: XmlElement, inherited: dict[str, str] | None = None) -> CompiledSchema:
    """Read an ``xsd:schema`` element restricted to the compiled-output subset."""
    if not el.name.matches(_x("schema")):
        raise MalformedDefinition(f"expected xsd:schema, got {el.name.qname}")
    scope = el.scope(inherited)
    target = _attrs(el, {"targetNamespace"}).get("targetNamespace")
    if not target:
        raise MalformedDefinition("schema lacks targetNamespace")
    prefixes = sorted(p for p, u in scope.items() if u == target and p)
    if not prefixes:
        raise MalformedDefinition("no prefix is bound to the target namespace")

    root_decl = None
    short_string_seen = False
    field_decls: dict[str, FieldType] = {}
    for decl in _xsd_kids(el):
        dscope = decl.scope(scope)
        if decl.name.local == "simpleType":
            attrs = _attrs(decl, {"name"})
            if attrs.get("name") != "shortString" or short_string_seen:
                raise SchemaTooRich("only a single top-level shortString simple type is supported")
            (base_ns, base), limit = _parse_restriction(_single(decl), dscope)
            if (base_ns, base) != (XSD, "string") or limit != SHORT_STRING_LIMIT:
                raise SchemaTooRich(f"shortString must restrict xsd:string to maxLength {SHORT_STRING_LIMIT}")
            short_string_seen = True
            continue
        _expect(decl, "element")
        attrs = _attrs(decl, {"name", "type"})
        if "name" not in attrs:
            raise MalformedDefinition("top-level element without a name")
        name = attrs["name"]
        kids = _xsd_kids(decl)
        if kids and kids[0].name.local == "complexType":
            if root_decl is not None or "type" in attrs:
                raise SchemaTooRich("only one complex root element is supported")
            root_decl = (name, *_parse_sequence(kids, dscope, target))
            continue
        if name in field_decls:
            raise MalformedDefinition(f"field {name!r} declared twice")
        field_decls[name] = _parse_field_decl(decl, attrs, kids, dscope, target)

    if root_decl is None:
        raise MalformedDefinition("schema declares no root element")
    root_name, order, ref_prefix = root_decl
    missing = [n for n in order if n not in field_decls]
    if missing:
        raise MalformedDefinition(f"sequence references undeclared elements: {', '.join(missing)}")
    unused = [n for n in field_decls if n not in order]
    if unused:
        raise SchemaTooRich(f"elements declared outside the root sequence: {', '.join(unused)}")
    if any(t.kind is Kind.SHORT_STRING for t in field_decls.values()) and not short_string_seen:
        raise MalformedDefinition("shortString used but not declared")
    return CompiledSchema(root_name, target, ref_prefix or prefixes[0], tuple((n, field_decls[n]) for n in order))


def _single(el: XmlElement) -> XmlElement:
    kids = _xsd_kids(el)
    if len(kids) != 1:
        raise SchemaTooRich(f"{el.name.qname} must contain exactly one child")
    return kids[0]


def _parse_sequence(kids: list[XmlElement], scope: dict[str, str], target: str) -> tuple[list[str], str]:
    """Field order of the root sequence, plus the prefix its references use."""
    if len(kids) != 1:
        raise SchemaTooRich("root element must contain only a complexType")
    ctype = kids[0]
    _attrs(ctype, set())
    seq = _single(ctype)
    _expect(seq, "sequence")
    _attrs(seq, set())
    order = []
    prefix = ""
    sscope = seq.scope(ctype.scope(scope))
    for ref in _xsd_kids(seq):
        _expect(ref, "element")
        attrs = _attrs(ref, {"ref"})
        if "ref" not in attrs or _xsd_kids(ref):
            raise SchemaTooRich("sequence members must be bare element references")
        ns, local = _resolve_qname(attrs["ref"], ref.scope(sscope))
        if ns != target:
            raise SchemaTooRich(f"reference {attrs['ref']!r} leaves the target namespace")
        if local in order:
            raise SchemaTooRich(f"{local} appears twice in the sequence")
        order.append(local)
        prefix = prefix or attrs["ref"].strip().rpartition(":")[0]
    if not order:
        raise MalformedDefinition("root sequence is empty")
    return order, prefix


def _parse_field_decl(decl, attrs, kids, scope, target) -> FieldType:
    if "type" in attrs:
        if kids:
            raise SchemaTooRich("element with both type and inline content")
        ns, local = _resolve_qname(attrs["type"], scope)
        if ns == XSD and local in _XSD_KIND:
            return FieldType(_XSD_KIND[local])
        if (ns, local) == (target, "shortString"):
            return FieldType(Kind.SHORT_STRING)
        raise SchemaTooRich(f"type {attrs['type']!r} is outside the supported subset")
    if len(kids) != 1:
        raise SchemaTooRich(f"element {attrs['name']!r} needs a type or one inline simpleType")
    _expect(kids[0], "simpleType")
    _attrs(kids[0], set())
    (base_ns, base), limit = _parse_restriction(_single(kids[0]), kids[0].scope(scope))
    if (base_ns, base) != (target, "shortString"):
        raise SchemaTooRich("inline restrictions must derive from shortString")
    if not 0 < limit <= SHORT_STRING_LIMIT:
        raise MalformedDefinition(f"maxLength {limit} exceeds {SHORT_STRING_LIMIT}")
    return FieldType(Kind.SHORT_STRING, limit)


def parse_type_definition(doc: XmlDocument) -> DocumentTypeDefinition:
    return parse_type_definition_element(doc.root)


def parse_type_definition_element(root: XmlElement, inherited: dict[str, str] | None = None) -> DocumentTypeDefinition:
    if root.name.local != "documentTypeData" or root.name.namespace_uri not in AIDA_ANY:
        raise MalformedDefinition(f"expected aida:documentTypeData, got {root.name.qname}")
    ns = root.name.namespace_uri
    scope = root.scope(inherited)
    allowed = {_g("documentTypeID", ns).key, _g("schema", ns).key}
    generic_el = None
    for kid in _kids(root):
        if kid.name.local == "genericSchema" and kid.name.namespace_uri in AIDA_ANY:
            if generic_el is not None:
                raise MalformedDefinition("more than one genericSchema")
            generic_el = kid
        elif kid.name.key not in allowed:
            raise MalformedDefinition(f"unexpected {kid.name.qname} in documentTypeData")
    try:
        type_id = DocumentTypeId(_text_of(root, _g("documentTypeID", ns)))
    except ValueError as exc:
        raise MalformedDefinition(str(exc)) from None
    schema_wrapper = _one(root, _g("schema", ns))
    schemas = _kids(schema_wrapper)
    if len(schemas) != 1:
        raise MalformedDefinition("aida:schema must hold exactly one xsd:schema")
    compiled = parse_schema(schemas[0], schema_wrapper.scope(scope))
    generic = parse_generic_element(generic_el) if generic_el is not None else None
    try:
        return DocumentTypeDefinition(type_id, compiled, generic)
    except ValueError as exc:
        raise MalformedDefinition(str(exc)) from None


# -- instance validation ----------------------------------------------------


def validate_instance(instance_root: XmlElement, definition: DocumentTypeDefinition) -> ValidationReport:
    """Check an instance against its definition; every finding lands in the report."""
    schema = definition.compiled_schema
    violations: list[tuple[str, str]] = []
    expected_root = schema.qualified(schema.root_element)
    if not instance_root.name.matches(expected_root):
        violations.append(
            ("structure", f"root {{{instance_root.name.namespace_uri}}}{instance_root.name.local} "
             f"is not {{{schema.target_namespace}}}{schema.root_element}")
        )
        return ValidationReport(tuple(violations))
    if any(isinstance(c, str) and c.strip() for c in instance_root.children):
        violations.append(("structure", "text content directly inside the root element"))

    declared = schema.element_order
    seen: list[str] = []
    for child in instance_root.elements():
        name = child.name
        if name.namespace_uri != schema.target_namespace or name.local not in declared:
            violations.append(("structure", f"unknown element {name.qname}"))
            continue
        if name.local in seen:
            violations.append((name.local, "duplicate field"))
            continue
        seen.append(name.local)
        violations.extend(_check_field(child, schema.field_type(name.local)))

    for name in declared:
        if name not in seen:
            violations.append((name, "missing field"))
    present_order = [n for n in declared if n in seen]
    if seen != present_order:
        first = next(a for a, b in zip(seen, present_order) if a != b)
        violations.append((first, "field order differs from the declared sequence"))
    return ValidationReport(tuple(violations))


def _check_field(el: XmlElement, ftype: FieldType) -> list[tuple[str, str]]:
    name = el.name.local
    found = []
    if el.elements():
        found.append((name, "structure: field must hold text only"))
    if el.attributes:
        found.append((name, "structure: field may not carry attributes"))
    problem = ftype.check(el.text)
    if problem:
        found.append((name, problem))
    return found
