import random
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_bytes
from edocsig.canonical_xml import (
    NodePath,
    XmlDocument,
    XmlElement,
    XmlName,
    canonicalize,
    element,
    locate,
    parse,
    select,
    serialize,
    strip_layout,
)
from edocsig.errors import MalformedXml, NodeNotFound, UnsupportedConstruct, UnsupportedEncoding
from xmlgen import mutate, normalized, random_document, shuffle_attributes, xml_trees


def c14n(text: str, inherited=None) -> bytes:
    return canonicalize(parse(text.encode()).root, inherited)


class TestParse:
    def test_smallest_nesting(self):
        root = parse(b"<a><b>x</b></a>").root
        assert root.name.local == "a"
        assert [c.name.local for c in root.elements()] == ["b"]
        assert root.elements()[0].text == "x"

    def test_generic_listing(self):
        root = parse(fixture_bytes("tax_generic.xml")).root
        assert (root.name.prefix, root.name.local) == ("aida", "genericSchema")
        assert root.name.namespace_uri == "http://aida.infonova.at"

    def test_preserves_attribute_order_and_whitespace(self):
        root = parse(b'<r z="1" a="2">\n  <c/>\n</r>').root
        assert [n.local for n, _ in root.attributes] == ["z", "a"]
        assert root.children[0] == "\n  " and root.children[2] == "\n"

    def test_namespaces_resolved(self):
        root = parse(b'<p:r xmlns:p="urn:p" xmlns="urn:d"><c p:k="v"/></p:r>').root
        child = root.elements()[0]
        assert child.name == XmlName("urn:d", "", "c")
        assert child.attributes[0][0] == XmlName("urn:p", "p", "k")
        assert dict(root.namespace_declarations) == {"p": "urn:p", "": "urn:d"}

    @pytest.mark.parametrize(
        "data",
        [b"<a><b></a>", b'<a x="1" x="2"/>', b"<p:a/>", b"<a>\x01</a>", b"", b"<a/><b/>"],
    )
    def test_malformed(self, data):
        with pytest.raises(MalformedXml):
            parse(data)

    @pytest.mark.parametrize(
        "data",
        [
            b"<!DOCTYPE a><a/>",
            b"<a><!-- note --></a>",
            b"<a><?pi data?></a>",
            b"<a><![CDATA[x]]></a>",
        ],
    )
    def test_unsupported_constructs(self, data):
        with pytest.raises(UnsupportedConstruct):
            parse(data)

    def test_non_utf8_encoding(self):
        with pytest.raises(UnsupportedEncoding):
            parse(b'<?xml version="1.0" encoding="ISO-8859-1"?><a/>')

    def test_utf8_declaration_accepted(self):
        doc = parse('<?xml version="1.0" encoding="utf-8" ?><a>é</a>'.encode())
        assert doc.root.text == "é"


class TestSerialize:
    def test_text(self):
        out = serialize(XmlDocument(element(XmlName("", "", "a"), "x")))
        assert out.startswith(b'<?xml version="1.0" encoding="UTF-8"?>')
        assert b"<a>x</a>" in out

    def test_attribute_ampersand(self):
        out = serialize(XmlDocument(element(XmlName("", "", "a"), attrs={"k": "x&y"})))
        assert b'k="x&amp;y"' in out

    def test_instance_listing_round_trip(self):
        doc = parse(fixture_bytes("tax_instance.xml"))
        assert parse(serialize(doc)) == doc

    def test_indent_only_adds_layout(self):
        doc = parse(b"<a><b><c>t</c></b><d/></a>")
        again = parse(serialize(doc, indent="  "))
        assert strip_layout(again.root) == doc.root

    def test_unbound_prefix_rejected(self):
        with pytest.raises(ValueError):
            XmlDocument(XmlElement(XmlName("urn:p", "p", "a")))

    @settings(max_examples=200)
    @given(xml_trees)
    def test_round_trip(self, tree):
        doc = XmlDocument(tree)
        assert parse(serialize(doc)) == doc


class TestCanonicalize:
    def test_sorts_attributes_and_expands_empty(self):
        assert c14n('<a b="2" a="1"/>') == b'<a a="1" b="2"></a>'

    def test_attribute_order_irrelevant(self):
        assert c14n('<a x="1" y="2" z="3"/>') == c14n('<a z="3" x="1" y="2"/>')

    def test_namespaced_attributes_sort_by_uri_then_local(self):
        out = c14n('<a xmlns:z="urn:a" xmlns:b="urn:b" b:k="1" z:k="2" k="0"/>')
        assert out == b'<a xmlns:b="urn:b" xmlns:z="urn:a" k="0" z:k="2" b:k="1"></a>'

    def test_declarations_default_first(self):
        out = c14n('<r xmlns:b="urn:b" xmlns="urn:d" xmlns:a="urn:a"/>')
        assert out == b'<r xmlns="urn:d" xmlns:a="urn:a" xmlns:b="urn:b"></r>'

    def test_redundant_redeclaration_dropped(self):
        out = c14n('<p:r xmlns:p="urn:p"><p:c xmlns:p="urn:p"/></p:r>')
        assert out == b'<p:r xmlns:p="urn:p"><p:c></p:c></p:r>'

    def test_inherited_bindings_rendered_at_apex(self):
        root = parse(b'<p:r xmlns:p="urn:p"><p:c/></p:r>').root
        child, scope = locate(root, NodePath((XmlName("urn:p", "p", "c"),)))
        assert canonicalize(child, scope) == b'<p:c xmlns:p="urn:p"></p:c>'

    def test_escapes(self):
        out = c14n('<a k="&lt;&amp;&quot;&gt;&#9;&#10;&#13;">&lt;&amp;&gt;&#13;"\'</a>')
        assert out == b'<a k="&lt;&amp;&quot;>&#x9;&#xA;&#xD;">&lt;&amp;&gt;&#xD;"\'</a>'

    def test_whitespace_kept(self):
        assert c14n("<a>\n  <b/>\n</a>") == b"<a>\n  <b></b>\n</a>"

    def test_text_difference_detected(self):
        assert c14n("<a>x</a>") != c14n("<a>y</a>")
        assert c14n("<a><b/></a>") != c14n("<a><c/></a>")
        assert c14n('<a k="1"/>') != c14n('<a k="2"/>')

    def test_agrees_with_stdlib_c14n_without_namespaces(self):
        rng = random.Random(5)
        for _ in range(200):
            doc = XmlDocument(random_document(rng, with_ns=False))
            ours = canonicalize(doc.root)
            theirs = ET.canonicalize(xml_data=serialize(doc).decode("utf-8")).encode("utf-8")
            assert ours == theirs

    @settings(max_examples=200)
    @given(xml_trees)
    def test_idempotent(self, tree):
        once = canonicalize(tree)
        assert canonicalize(parse(once).root) == once

    @settings(max_examples=200)
    @given(xml_trees, st.randoms(use_true_random=False))
    def test_order_invariant(self, tree, rng):
        assert canonicalize(shuffle_attributes(tree, rng)) == canonicalize(tree)

    @settings(max_examples=200)
    @given(xml_trees, st.randoms(use_true_random=False))
    def test_injective_under_mutation(self, tree, rng):
        changed = mutate(tree, rng)
        assert normalized(changed) != normalized(tree)
        assert canonicalize(changed) != canonicalize(tree)

    @settings(max_examples=100)
    @given(st.integers(0, 2**32))
    def test_canonical_bytes_decode_to_the_tree(self, seed):
        tree = random_document(random.Random(seed))
        assert normalized(parse(canonicalize(tree)).root) == normalized(tree)


class TestSelect:
    DOC = parse(b'<e xmlns:aida="urn:aida"><aida:signedContent><x/></aida:signedContent><aida:signedContent/></e>')

    def test_empty_path_is_root(self):
        assert select(self.DOC, NodePath()) is self.DOC.root

    def test_first_match(self):
        found = select(self.DOC, NodePath((XmlName("urn:aida", "aida", "signedContent"),)))
        assert found.elements()[0].name.local == "x"

    def test_missing(self):
        with pytest.raises(NodeNotFound):
            select(self.DOC, NodePath((XmlName("urn:aida", "aida", "nonexistent"),)))

    def test_uri_round_trip(self):
        path = NodePath((XmlName("urn:aida", "aida", "signedContent"), XmlName("", "", "x")))
        assert path.to_uri() == "#/aida:signedContent/x"
        assert NodePath.from_uri(path.to_uri(), {"aida": "urn:aida"}) == path
        assert NodePath.from_uri("#/", {}) == NodePath()
