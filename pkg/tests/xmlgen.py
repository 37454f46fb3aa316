"""Random small XML trees for property and acceptance tests."""

import random

from hypothesis import strategies as st

from edocsig.canonical_xml import XmlElement, XmlName

NAMESPACES = {"p": "urn:example:p", "q": "urn:example:q"}
LOCALS = ["a", "b", "item", "x1", "data", "n-m", "k.v"]
TEXT_ALPHABET = "ab &<>\"'\t\n\r=éß✓𝄞"
MAX_DEPTH = 6
MAX_CHILDREN = 8


def _text(rng: random.Random) -> str:
    return "".join(rng.choice(TEXT_ALPHABET) for _ in range(rng.randint(1, 6)))


def _name(rng: random.Random, with_ns: bool) -> XmlName:
    local = rng.choice(LOCALS)
    if with_ns and rng.random() < 0.5:
        prefix = rng.choice(sorted(NAMESPACES))
        return XmlName(NAMESPACES[prefix], prefix, local)
    return XmlName("", "", local)


def _append(children: list, node) -> None:
    if isinstance(node, str) and children and isinstance(children[-1], str):
        children[-1] += node
    else:
        children.append(node)


def random_element(rng: random.Random, depth: int = 1, with_ns: bool = True) -> XmlElement:
    attrs = {}
    for _ in range(rng.randint(0, 3)):
        name = _name(rng, with_ns)
        attrs.setdefault(name.key, (name, _text(rng)))
    children: list = []
    if depth < MAX_DEPTH:
        limit = MAX_CHILDREN if depth <= 2 else 3
        for _ in range(rng.randint(0, limit)):
            if rng.random() < 0.4:
                _append(children, _text(rng))
            else:
                _append(children, random_element(rng, depth + 1, with_ns))
    return XmlElement(_name(rng, with_ns), tuple(attrs.values()), (), tuple(children))


def random_document(rng: random.Random, with_ns: bool = True) -> XmlElement:
    root = random_element(rng, 1, with_ns)
    decls = tuple(sorted(NAMESPACES.items())) if with_ns else ()
    return root.replace(namespace_declarations=decls)


def shuffle_attributes(el: XmlElement, rng: random.Random) -> XmlElement:
    attrs = list(el.attributes)
    rng.shuffle(attrs)
    decls = list(el.namespace_declarations)
    rng.shuffle(decls)
    kids = tuple(c if isinstance(c, str) else shuffle_attributes(c, rng) for c in el.children)
    return XmlElement(el.name, tuple(attrs), tuple(decls), kids)


def normalized(el: XmlElement) -> XmlElement:
    """Order-insensitive comparison form: attributes and declarations sorted."""
    kids = tuple(c if isinstance(c, str) else normalized(c) for c in el.children)
    return XmlElement(
        el.name,
        tuple(sorted(el.attributes, key=lambda a: a[0].key)),
        tuple(sorted(el.namespace_declarations)),
        kids,
    )


def _elements_with_paths(el: XmlElement, path=()):
    yield path, el
    for i, child in enumerate(el.children):
        if isinstance(child, XmlElement):
            yield from _elements_with_paths(child, path + (i,))


def _replace_at(el: XmlElement, path, new: XmlElement) -> XmlElement:
    if not path:
        return new
    kids = list(el.children)
    kids[path[0]] = _replace_at(kids[path[0]], path[1:], new)
    return el.replace(children=tuple(kids))


def mutate(root: XmlElement, rng: random.Random) -> XmlElement:
    """One small structural edit; the result always differs from ``root``."""
    path, target = rng.choice(list(_elements_with_paths(root)))
    choice = rng.randrange(4)
    if choice == 0:
        changed = target.replace(name=XmlName(target.name.namespace_uri, target.name.prefix, target.name.local + "z"))
    elif choice == 1:
        marker = XmlName("", "", "mutated")
        kept = tuple(a for a in target.attributes if a[0].key != marker.key)
        if len(kept) == len(target.attributes):
            kept += ((marker, "1"),)
        changed = target.replace(attributes=kept)
    elif choice == 2:
        kids = list(target.children)
        if kids and isinstance(kids[-1], str):
            kids[-1] += "!"
        else:
            kids.append("!")
        changed = target.replace(children=tuple(kids))
    else:
        if target.children:
            changed = target.replace(children=target.children[:-1])
        else:
            changed = target.replace(children=(XmlElement(XmlName("", "", "new")),))
    return _replace_at(root, path, changed)


# -- hypothesis strategies ------------------------------------------------

_names = st.builds(XmlName, st.just(""), st.just(""), st.sampled_from(LOCALS))
_texts = st.text(alphabet=TEXT_ALPHABET, min_size=1, max_size=8)


def _merge(children):
    out: list = []
    for c in children:
        _append(out, c)
    return tuple(out)


def _attrs(pairs):
    seen = {}
    for name, value in pairs:
        seen.setdefault(name.key, (name, value))
    return tuple(seen.values())


def _element(children_strategy):
    return st.builds(
        lambda name, attrs, kids: XmlElement(name, _attrs(attrs), (), _merge(kids)),
        _names,
        st.lists(st.tuples(_names, _texts), max_size=3),
        children_strategy,
    )


leaf_elements = _element(st.lists(_texts, max_size=1))
xml_trees = st.recursive(
    leaf_elements,
    lambda inner: _element(st.lists(st.one_of(inner, _texts), max_size=4)),
    max_leaves=12,
)
