"""Namespace-aware XML tree with parsing, serialization and canonical form.

The tree is deliberately small: elements, attributes, namespace
declarations and text. Comments, CDATA sections, DTDs and processing
instructions are rejected at parse time so that nothing which could make
two readings of the same bytes disagree ever reaches a digest.

Canonical form (bit-exact, relied upon by every signature):

* UTF-8, no XML declaration, start and end tag for every element;
* at the apex element every namespace binding in scope is rendered, below
  it a declaration is rendered only when it differs from the binding the
  parent already has in scope;
* namespace declarations come first, sorted by prefix (default first),
  then attributes sorted by (namespace URI, local name);
* text escapes ``&``, ``<``, ``>`` and CR; attribute values escape ``&``,
  ``<``, ``"``, TAB, LF and CR. Everything else is byte-preserved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Mapping, Union
from xml.parsers import expat

from .errors import MalformedXml, NodeNotFound, UnsupportedConstruct, UnsupportedEncoding
from .namespaces import XML

_NCNAME = re.compile(r"^[^\W\d][\w.\-]*$")
_ENCODING_DECL = re.compile(rb"^\s*<\?xml[^>]*?encoding\s*=\s*[\"']([^\"']+)[\"']")

BASE_SCOPE: Mapping[str, str] = {"xml": XML}


@dataclass(frozen=True)
class XmlName:
    namespace_uri: str
    prefix: str
    local: str

    def __post_init__(self):
        if not _NCNAME.match(self.local):
            raise ValueError(f"invalid local name {self.local!r}")
        if self.prefix:
            if not _NCNAME.match(self.prefix):
                raise ValueError(f"invalid prefix {self.prefix!r}")
            if not self.namespace_uri:
                raise ValueError(f"prefix {self.prefix!r} has no namespace")

    @classmethod
    def of(cls, namespace_uri: str, qname: str) -> XmlName:
        """Build a name from ``prefix:local`` (or bare ``local``)."""
        prefix, _, local = qname.rpartition(":")
        return cls(namespace_uri, prefix, local)

    @property
    def qname(self) -> str:
        return f"{self.prefix}:{self.local}" if self.prefix else self.local

    @property
    def key(self) -> tuple[str, str]:
        return (self.namespace_uri, self.local)

    def matches(self, other: XmlName) -> bool:
        return self.key == other.key

    def __str__(self):
        return self.qname


Node = Union["XmlElement", str]


@dataclass(frozen=True)
class XmlElement:
    name: XmlName
    attributes: tuple[tuple[XmlName, str], ...] = ()
    namespace_declarations: tuple[tuple[str, str], ...] = ()
    children: tuple[Node, ...] = ()

    def __post_init__(self):
        decls = self.namespace_declarations
        if isinstance(decls, Mapping):
            decls = decls.items()
        object.__setattr__(self, "namespace_declarations", tuple((p, u) for p, u in decls))
        object.__setattr__(self, "attributes", tuple((n, v) for n, v in self.attributes))
        object.__setattr__(self, "children", tuple(self.children))

        prefixes = [p for p, _ in self.namespace_declarations]
        if len(set(prefixes)) != len(prefixes):
            raise ValueError(f"duplicate namespace declaration on {self.name}")
        keys = [n.key for n, _ in self.attributes]
        if len(set(keys)) != len(keys):
            raise ValueError(f"duplicate attribute on {self.name}")

    # -- navigation ---------------------------------------------------------

    def elements(self) -> list[XmlElement]:
        return [c for c in self.children if isinstance(c, XmlElement)]

    def find(self, name: XmlName) -> XmlElement | None:
        for child in self.children:
            if isinstance(child, XmlElement) and child.name.key == name.key:
                return child
        return None

    def findall(self, name: XmlName) -> list[XmlElement]:
        return [c for c in self.elements() if c.name.key == name.key]

    def get(self, local: str, namespace_uri: str = "") -> str | None:
        for name, value in self.attributes:
            if name.key == (namespace_uri, local):
                return value
        return None

    @property
    def text(self) -> str:
        """Concatenated direct text children."""
        return "".join(c for c in self.children if isinstance(c, str))

    def string_value(self) -> str:
        """Concatenated text of all descendants, in document order."""
        return "".join(_iter_text(self))

    def has_mixed_text(self) -> bool:
        """True when a non-whitespace text child sits next to element children."""
        return any(isinstance(c, str) and c.strip() for c in self.children) and bool(self.elements())

    def scope(self, inherited: Mapping[str, str] | None = None) -> dict[str, str]:
        """Namespace bindings in scope on this element."""
        merged = dict(BASE_SCOPE if inherited is None else inherited)
        merged.update(self.namespace_declarations)
        return merged

    def replace(self, **changes) -> XmlElement:
        return replace(self, **changes)


def _iter_text(element: XmlElement) -> Iterator[str]:
    for child in element.children:
        if isinstance(child, str):
            yield child
        else:
            yield from _iter_text(child)


@dataclass(frozen=True)
class XmlDocument:
    root: XmlElement
    encoding_label: str = "UTF-8"

    def __post_init__(self):
        if self.encoding_label != "UTF-8":
            raise UnsupportedEncoding(self.encoding_label)
        check_namespaces(self.root)


def check_namespaces(element: XmlElement, inherited: Mapping[str, str] | None = None) -> None:
    """Raise MalformedXml if any name in the tree uses an unbound or rebound prefix."""
    scope = element.scope(inherited)
    name = element.name
    if scope.get(name.prefix, "") != name.namespace_uri:
        raise MalformedXml(f"element {name.qname} is not bound to {name.namespace_uri!r} in scope")
    for attr, _ in element.attributes:
        if attr.prefix:
            if scope.get(attr.prefix) != attr.namespace_uri:
                raise MalformedXml(f"attribute {attr.qname} has an unbound prefix")
        elif attr.namespace_uri:
            raise MalformedXml(f"unprefixed attribute {attr.local} cannot carry a namespace")
    for child in element.children:
        if isinstance(child, XmlElement):
            check_namespaces(child, scope)


def element(
    name: XmlName,
    *children: Node,
    attrs: Iterable[tuple[XmlName, str]] | Mapping[str, str] = (),
    ns: Mapping[str, str] | Iterable[tuple[str, str]] = (),
) -> XmlElement:
    """Terse constructor; plain-string attribute keys are unqualified names."""
    if isinstance(attrs, Mapping):
        attrs = [(XmlName("", "", k), v) for k, v in attrs.items()]
    return XmlElement(name, tuple(attrs), ns, tuple(c for c in children if c != ""))


# -- node paths -------------------------------------------------------------


@dataclass(frozen=True)
class NodePath:
    """Child-element steps from a root; no steps selects the root itself."""

    steps: tuple[XmlName, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def to_uri(self) -> str:
        return "#/" + "/".join(step.qname for step in self.steps)

    @classmethod
    def from_uri(cls, uri: str, scope: Mapping[str, str]) -> NodePath:
        if not uri.startswith("#/"):
            raise ValueError(f"not a node path: {uri!r}")
        body = uri[2:]
        steps = []
        for qname in body.split("/") if body else ():
            prefix, _, local = qname.rpartition(":")
            if prefix and prefix not in scope:
                raise ValueError(f"unbound prefix {prefix!r} in {uri!r}")
            steps.append(XmlName(scope.get(prefix, ""), prefix, local))
        return cls(tuple(steps))

    def bindings(self) -> dict[str, str]:
        return {s.prefix: s.namespace_uri for s in self.steps if s.prefix}

    def __truediv__(self, step: XmlName) -> NodePath:
        return NodePath(self.steps + (step,))

    def __str__(self):
        return self.to_uri()


def locate(
    root: XmlElement, path: NodePath, inherited: Mapping[str, str] | None = None
) -> tuple[XmlElement, dict[str, str]]:
    """Follow ``path`` from ``root``; return the element and its inherited scope."""
    current = root
    scope = dict(BASE_SCOPE if inherited is None else inherited)
    for step in path.steps:
        found = current.find(step)
        if found is None:
            raise NodeNotFound(f"no {step.qname} under {current.name.qname} (path {path})")
        scope = current.scope(scope)
        current = found
    return current, scope


def select(doc: XmlDocument, path: NodePath) -> XmlElement:
    return locate(doc.root, path)[0]


# -- parsing ----------------------------------------------------------------


class _TreeBuilder:
    def __init__(self):
        self.stack: list[tuple[XmlName, list, list, list]] = []
        self.pending_ns: list[tuple[str, str]] = []
        self.root: XmlElement | None = None

    @staticmethod
    def _name(raw: str) -> XmlName:
        parts = raw.split(" ")
        if len(parts) == 1:
            return XmlName("", "", parts[0])
        if len(parts) == 2:
            return XmlName(parts[0], "", parts[1])
        return XmlName(parts[0], parts[2], parts[1])

    def xml_decl(self, version, encoding, standalone):
        if encoding and encoding.upper().replace("_", "-") not in ("UTF-8", "UTF8"):
            raise UnsupportedEncoding(f"declared encoding {encoding!r}; only UTF-8 is supported")

    def start_ns(self, prefix, uri):
        self.pending_ns.append((prefix or "", uri or ""))

    def start(self, raw_name, raw_attrs):
        name = self._name(raw_name)
        attrs = [(self._name(raw_attrs[i]), raw_attrs[i + 1]) for i in range(0, len(raw_attrs), 2)]
        self.stack.append((name, attrs, self.pending_ns, []))
        self.pending_ns = []

    def end(self, raw_name):
        name, attrs, decls, children = self.stack.pop()
        built = XmlElement(name, tuple(attrs), tuple(decls), tuple(children))
        if self.stack:
            self.stack[-1][3].append(built)
        else:
            self.root = built

    def text(self, data):
        if not self.stack:
            return
        children = self.stack[-1][3]
        if children and isinstance(children[-1], str):
            children[-1] += data
        else:
            children.append(data)

    @staticmethod
    def reject(what):
        def handler(*_):
            raise UnsupportedConstruct(f"{what} are not supported")

        return handler


def parse(data: bytes) -> XmlDocument:
    """Parse UTF-8 XML bytes into an XmlDocument."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    declared = _ENCODING_DECL.match(data)
    if declared:
        _TreeBuilder().xml_decl(None, declared.group(1).decode("ascii", "replace"), None)

    builder = _TreeBuilder()
    parser = expat.ParserCreate(encoding="UTF-8", namespace_separator=" ")
    parser.namespace_prefixes = True
    parser.ordered_attributes = True
    parser.buffer_text = True
    parser.XmlDeclHandler = builder.xml_decl
    parser.StartNamespaceDeclHandler = builder.start_ns
    parser.StartElementHandler = builder.start
    parser.EndElementHandler = builder.end
    parser.CharacterDataHandler = builder.text
    parser.CommentHandler = _TreeBuilder.reject("comments")
    parser.ProcessingInstructionHandler = _TreeBuilder.reject("processing instructions")
    parser.StartCdataSectionHandler = _TreeBuilder.reject("CDATA sections")
    parser.StartDoctypeDeclHandler = _TreeBuilder.reject("document type declarations")
    try:
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise MalformedXml(str(exc)) from None
    except ValueError as exc:
        if isinstance(exc, (UnsupportedConstruct, UnsupportedEncoding, MalformedXml)):
            raise
        raise MalformedXml(str(exc)) from None
    if builder.root is None:
        raise MalformedXml("no root element")
    return XmlDocument(builder.root)


# -- escaping ---------------------------------------------------------------

_TEXT_ESCAPES = str.maketrans({"&": "&amp;", "<": "&lt;", ">": "&gt;", "\r": "&#xD;"})
_ATTR_ESCAPES = str.maketrans(
    {"&": "&amp;", "<": "&lt;", '"': "&quot;", "\t": "&#x9;", "\n": "&#xA;", "\r": "&#xD;"}
)


def escape_text(value: str) -> str:
    return value.translate(_TEXT_ESCAPES)


def escape_attr(value: str) -> str:
    return value.translate(_ATTR_ESCAPES)


def _ns_attr(prefix: str, uri: str) -> str:
    return f' xmlns:{prefix}="{escape_attr(uri)}"' if prefix else f' xmlns="{escape_attr(uri)}"'


# -- serialization ----------------------------------------------------------


def serialize(doc: XmlDocument, indent: str | None = None) -> bytes:
    """Emit an XML declaration followed by the tree.

    With ``indent`` set, whitespace is added inside element-only content;
    the result then re-parses to the indented tree, not to ``doc``.
    """
    root = doc.root if indent is None else indented(doc.root, indent)
    out = ['<?xml version="1.0" encoding="UTF-8"?>\n']
    _write(root, out)
    out.append("\n")
    return "".join(out).encode("utf-8")


def _write(el: XmlElement, out: list[str]) -> None:
    out.append("<" + el.name.qname)
    for prefix, uri in el.namespace_declarations:
        out.append(_ns_attr(prefix, uri))
    for name, value in el.attributes:
        out.append(f' {name.qname}="{escape_attr(value)}"')
    if not el.children:
        out.append("/>")
        return
    out.append(">")
    for child in el.children:
        if isinstance(child, str):
            out.append(escape_text(child))
        else:
            _write(child, out)
    out.append(f"</{el.name.qname}>")


def indented(el: XmlElement, indent: str = "  ", level: int = 0) -> XmlElement:
    """Return a copy with whitespace layout inside element-only content."""
    kids = el.elements()
    if not kids or any(isinstance(c, str) and c.strip() for c in el.children):
        return el
    inner = "\n" + indent * (level + 1)
    children: list[Node] = []
    for kid in kids:
        children += [inner, indented(kid, indent, level + 1)]
    children.append("\n" + indent * level)
    return el.replace(children=tuple(children))


def strip_layout(el: XmlElement) -> XmlElement:
    """Drop whitespace-only text inside element-only content, recursively."""
    if not el.elements():
        return el
    if any(isinstance(c, str) and c.strip() for c in el.children):
        return el
    return el.replace(children=tuple(strip_layout(c) for c in el.children if not isinstance(c, str)))


# -- canonical form ---------------------------------------------------------


def canonicalize(element: XmlElement, inherited_ns: Mapping[str, str] | None = None) -> bytes:
    """Canonical bytes of ``element`` given the bindings in scope above it."""
    out: list[str] = []
    scope = {p: u for p, u in (inherited_ns or {}).items() if p != "xml"}
    _c14n(element, scope, {}, out)
    return "".join(out).encode("utf-8")


def _c14n(el: XmlElement, scope: dict[str, str], rendered: dict[str, str], out: list[str]) -> None:
    scope = dict(scope)
    scope.update((p, u) for p, u in el.namespace_declarations if p != "xml")
    out.append("<" + el.name.qname)
    for prefix in sorted(scope):
        uri = scope[prefix]
        if rendered.get(prefix, "" if prefix == "" else None) != uri:
            out.append(_ns_attr(prefix, uri))
    for name, value in sorted(el.attributes, key=lambda a: a[0].key):
        out.append(f' {name.qname}="{escape_attr(value)}"')
    out.append(">")
    for child in el.children:
        if isinstance(child, str):
            out.append(escape_text(child))
        else:
            _c14n(child, scope, scope, out)
    out.append(f"</{el.name.qname}>")
