import random
from pathlib import Path

import pytest

from edocsig import canonical_xml as cx
from edocsig import edoc, schema, sigcore, transform
from edocsig.repository import DEFINITION, TRANSFORM, Repository

FIXTURES = Path(__file__).parent / "fixtures"
TAX_TYPE_ID = "aida://www.polito.it/tax"
TAX_NS = "http://www.polito.it/tax"


def fixture_bytes(name: str) -> bytes:
    return (FIXTURES / name).read_bytes()


def read_values(name: str = "tax_values.txt") -> dict[str, str]:
    lines = (FIXTURES / name).read_text(encoding="utf-8").splitlines()
    return dict(line.split("=", 1) for line in lines if line)


def seeded_key(seed: int, algorithm: str = sigcore.RSA_SHA1) -> sigcore.KeyPair:
    return sigcore.generate_keypair(algorithm, 1024, random.Random(seed))


@pytest.fixture(scope="session")
def key():
    return seeded_key(1)


@pytest.fixture(scope="session")
def other_key():
    return seeded_key(2)


@pytest.fixture(scope="session")
def generic():
    return schema.parse_generic(cx.parse(fixture_bytes("tax_generic.xml")))


@pytest.fixture(scope="session")
def definition(generic):
    return schema.compile(generic, TAX_TYPE_ID)


@pytest.fixture(scope="session")
def instance_root():
    return cx.parse(fixture_bytes("tax_instance.xml")).root


@pytest.fixture(scope="session")
def stylesheet():
    return transform.parse_stylesheet(cx.parse(fixture_bytes("tax_stylesheet.xml")))


@pytest.fixture(scope="session")
def values():
    return read_values()


@pytest.fixture(scope="session")
def signed_definition(definition, key):
    return edoc.wrap_and_sign(schema.emit_type_definition(definition).root, key)


@pytest.fixture(scope="session")
def signed_transform(stylesheet, key):
    data = transform.TransformData("taxTrafo1", schema.DocumentTypeId(TAX_TYPE_ID), "en", stylesheet)
    return edoc.wrap_and_sign(transform.emit_transform_data_element(data), key)


@pytest.fixture(scope="session")
def signed_instance(instance_root, key):
    props = edoc.SignedProperties("taxTrafo1", edoc.document_hash(instance_root))
    return edoc.wrap_and_sign(instance_root, key, props=props)


@pytest.fixture
def seeded_repo(tmp_path, signed_definition, signed_transform):
    repo = Repository(tmp_path / "repo")
    repo.store(DEFINITION, signed_definition)
    repo.store(TRANSFORM, signed_transform)
    return repo
