"""edocsig command line: author, sign, store, instantiate, verify and render e-documents.

Typical session from an empty directory::

    edocsig keygen key.pem --cert-out cert.pem
    edocsig compile tax_generic.xml --type-id aida://www.polito.it/tax --out tax_def.xml
    edocsig --key key.pem --cert cert.pem sign tax_def.xml --kind definition --out tax_def.signed.xml
    edocsig --repo repo store tax_def.signed.xml --kind definition
    edocsig --key key.pem --cert cert.pem sign tax.xsl --kind transform \\
        --transform-id taxTrafo1 --type-id aida://www.polito.it/tax --out trafo.signed.xml
    edocsig --repo repo store trafo.signed.xml --kind transform
    edocsig --repo repo --key key.pem --cert cert.pem instantiate values.txt \\
        --type-id aida://www.polito.it/tax --transform-id taxTrafo1 --out tax.signed.xml
    edocsig --repo repo verify tax.signed.xml
    edocsig --repo repo render tax.signed.xml --out tax.mhtml

Exit status is 0 only when the operation fully succeeded; diagnostics go to stderr.
"""

from __future__ import annotations

import datetime
import functools
import random
import sys
from dataclasses import dataclass
from pathlib import Path

import click
from cryptography import x509
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.x509.oid import NameOID

from . import edoc as ed
from . import schema, sigcore
from .canonical_xml import parse, serialize
from .errors import EdocError, MalformedEDocument, MissingField, ValueRejected
from .namespaces import XSL
from .repository import DEFINITION, INSTANCE, KINDS, TRANSFORM, Repository
from .transform import (
    TransformData,
    apply,
    emit_transform_data_element,
    parse_stylesheet_element,
    parse_transform_data_element,
)

ALGORITHMS = {
    "rsa-sha1": (sigcore.RSA_SHA1, sigcore.SHA1),
    "rsa-sha256": (sigcore.RSA_SHA256, sigcore.SHA256),
}
LAYOUT = "  "


class CliError(click.ClickException):
    """Domain failure: message on stderr, exit status 1."""

    def show(self, file=None):
        click.echo(f"error: {self.format_message()}", err=True)


@dataclass
class CliConfig:
    repo_path: Path
    key_path: Path | None
    cert_path: Path | None
    algorithm: str
    report_format: str

    @property
    def signature_method(self) -> str:
        return ALGORITHMS[self.algorithm][0]

    @property
    def digest_method(self) -> str:
        return ALGORITHMS[self.algorithm][1]

    def keypair(self) -> sigcore.KeyPair:
        if self.key_path is None:
            raise CliError("this command needs --key")
        return sigcore.keypair_from_pem(_read(self.key_path), self.signature_method)

    def certificate(self) -> bytes | None:
        if self.cert_path is None:
            return None
        return load_certificate(_read(self.cert_path))

    def repository(self, create: bool = False) -> Repository:
        return Repository(self.repo_path, create=create)


def _read(path: Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}") from None


def load_certificate(data: bytes) -> bytes:
    """DER bytes of a PEM or DER certificate."""
    try:
        if b"-----BEGIN" in data:
            cert = x509.load_pem_x509_certificate(data)
        else:
            cert = x509.load_der_x509_certificate(data)
    except ValueError as exc:
        raise CliError(f"cannot load certificate: {exc}") from None
    return cert.public_bytes(serialization.Encoding.DER)


def self_signed_certificate(
    key: sigcore.KeyPair, subject: str, rng: random.Random | None = None
) -> bytes:
    """PEM certificate for ``key``; seeded runs get a fixed serial and validity window."""
    private = sigcore.load_private_key(key.private_key)
    name = x509.Name([x509.NameAttribute(NameOID.COMMON_NAME, subject)])
    if rng is None:
        start = datetime.datetime.now(datetime.timezone.utc)
        serial = x509.random_serial_number()
    else:
        start = datetime.datetime(2024, 1, 1, tzinfo=datetime.timezone.utc)
        serial = rng.getrandbits(159) | 1
    cert = (
        x509.CertificateBuilder()
        .subject_name(name)
        .issuer_name(name)
        .public_key(private.public_key())
        .serial_number(serial)
        .not_valid_before(start)
        .not_valid_after(start + datetime.timedelta(days=3650))
        # certificate signature is independent of the document algorithm; current libraries refuse SHA-1 here
        .sign(private, hashes.SHA256())
    )
    return cert.public_bytes(serialization.Encoding.PEM)


def _load_xml(path: str):
    return parse(_read(Path(path)))


def _load_edoc(path: str) -> ed.EDocument:
    return ed.parse_edoc(_load_xml(path))


def _signature_failures(e: ed.EDocument) -> list[str]:
    return [f"signature {i}: {r.failure_reason}" for i, r in enumerate(ed.verify_edoc(e), 1) if not r.valid]


def domain_errors(func):
    """Turn library failures into a one-line diagnostic and exit status 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValueRejected as exc:
            lines = [f"{label}: {message}" for label, message in exc.report.violations]
            raise CliError("value rejected: " + "; ".join(lines)) from None
        except MissingField as exc:
            raise CliError(f"missing field {exc.field!r}") from None
        except (EdocError, ValueError, OSError) as exc:
            raise CliError(f"{type(exc).__name__}: {exc}") from None

    return wrapper


@click.group()
@click.option("--repo", "repo_path", type=click.Path(path_type=Path), default="repo",
              envvar="EDOCSIG_REPO", show_default=True, help="Repository directory.")
@click.option("--key", "key_path", type=click.Path(path_type=Path), envvar="EDOCSIG_KEY",
              help="PEM private key used for signing.")
@click.option("--cert", "cert_path", type=click.Path(path_type=Path), envvar="EDOCSIG_CERT",
              help="Signer certificate (PEM or DER) embedded in KeyInfo.")
@click.option("--algorithm", type=click.Choice(sorted(ALGORITHMS)), default="rsa-sha1", show_default=True)
@click.option("--report-format", type=click.Choice(["text", "lines"]), default="text", show_default=True)
@click.pass_context
def main(ctx, repo_path, key_path, cert_path, algorithm, report_format):
    """Secure e-documents: XML signatures over schema-validated content."""
    ctx.obj = CliConfig(repo_path, key_path, cert_path, algorithm, report_format)


@main.command()
@click.argument("out", type=click.Path())
@click.option("--cert-out", type=click.Path(), help="Also write a self-signed certificate here.")
@click.option("--size", type=int, default=2048, show_default=True, help="RSA modulus bits.")
@click.option("--seed", type=int, help="Deterministic key material (testing only).")
@click.option("--subject", default="edocsig signer", show_default=True, help="Certificate common name.")
@click.pass_obj
@domain_errors
def keygen(cfg: CliConfig, out, cert_out, size, seed, subject):
    """Generate an RSA signing key (PKCS#8 PEM) and optionally a certificate."""
    rng = random.Random(seed) if seed is not None else None
    key = sigcore.generate_keypair(cfg.signature_method, size, rng)
    _write(out, key.private_key)
    if cert_out:
        _write(cert_out, self_signed_certificate(key, subject, rng))


@main.command("compile")
@click.argument("generic", type=click.Path())
@click.option("--type-id", required=True, help="Document type id, e.g. aida://www.polito.it/tax.")
@click.option("--out", type=click.Path(), help="Output file (default stdout).")
@domain_errors
def compile_cmd(generic, type_id, out):
    """Compile a generic type definition into a documentTypeData file."""
    definition = schema.compile(schema.parse_generic(_load_xml(generic)), type_id)
    _write(out, serialize(schema.emit_type_definition(definition), indent=LAYOUT))


def _transform_content(root, transform_id, type_id, language):
    if root.name.namespace_uri == XSL:
        if not (transform_id and type_id):
            raise CliError("wrapping a bare stylesheet needs --transform-id and --type-id")
        data = TransformData(transform_id, schema.DocumentTypeId(type_id), language, parse_stylesheet_element(root))
        return emit_transform_data_element(data)
    parse_transform_data_element(root)
    return root


@main.command()
@click.argument("path", type=click.Path())
@click.option("--kind", type=click.Choice(KINDS), required=True)
@click.option("--out", type=click.Path(), help="Output file (default stdout).")
@click.option("--transform-id", help="Transform id; for instances, recorded as transformDataID.")
@click.option("--type-id", help="Document type id when wrapping a bare stylesheet.")
@click.option("--language", default="en", show_default=True, help="Language when wrapping a bare stylesheet.")
@click.pass_obj
@domain_errors
def sign(cfg: CliConfig, path, kind, out, transform_id, type_id, language):
    """Wrap a definition, transform or instance in a signed e-document."""
    root = _load_xml(path).root
    props = ed.SignedProperties()
    if kind == DEFINITION:
        schema.parse_type_definition_element(root)
    elif kind == TRANSFORM:
        root = _transform_content(root, transform_id, type_id, language)
    else:
        props = ed.SignedProperties(transform_id, ed.document_hash(root, cfg.digest_method))
    signed = ed.wrap_and_sign(
        root, cfg.keypair(), cfg.certificate(), props,
        digest_method=cfg.digest_method, signature_method=cfg.signature_method,
    )
    _write(out, ed.serialize_edoc(signed, indent=LAYOUT))


@main.command()
@click.argument("path", type=click.Path())
@click.option("--kind", type=click.Choice(KINDS), required=True)
@click.option("--id", "id_", help="Id for instances (definitions and transforms carry their own).")
@click.pass_obj
@domain_errors
def store(cfg: CliConfig, path, kind, id_):
    """Verify a signed e-document and add it to the repository."""
    stored = cfg.repository(create=True).store(kind, _load_edoc(path), id_)
    click.echo(stored)


@main.command()
@click.argument("kind", type=click.Choice(KINDS))
@click.argument("id_", metavar="ID")
@click.option("--out", type=click.Path(), help="Output file (default stdout).")
@click.pass_obj
@domain_errors
def fetch(cfg: CliConfig, kind, id_, out):
    """Write a stored e-document."""
    _write(out, ed.serialize_edoc(cfg.repository().fetch(kind, id_), indent=LAYOUT))


@main.command("list")
@click.argument("kind", type=click.Choice(KINDS))
@click.pass_obj
@domain_errors
def list_cmd(cfg: CliConfig, kind):
    """List stored ids of one kind with their content digests."""
    for id_, digest in cfg.repository().list(kind):
        click.echo(f"{id_}\t{digest}")


def read_values(text: str) -> dict[str, str]:
    """Parse ``field=value`` lines; blank lines are skipped, values are taken verbatim."""
    values: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        name, sep, value = line.partition("=")
        name = name.strip()
        if not sep or not name:
            raise CliError(f"values line {n}: expected field=value")
        if name in values:
            raise CliError(f"values line {n}: field {name!r} given twice")
        values[name] = value
    return values


@main.command()
@click.argument("values_file", type=click.Path())
@click.option("--type-id", required=True)
@click.option("--transform-id", help="Transform to record in signedProperties.")
@click.option("--id", "id_", help="Also store the instance in the repository under this id.")
@click.option("--out", type=click.Path(), help="Output file (default stdout).")
@click.pass_obj
@domain_errors
def instantiate(cfg: CliConfig, values_file, type_id, transform_id, id_, out):
    """Build, validate and sign an instance from field=value lines."""
    repo = cfg.repository()
    def_edoc = repo.fetch(DEFINITION, type_id)
    failures = _signature_failures(def_edoc)
    if failures:
        raise CliError("definition signature invalid: " + "; ".join(failures))
    try:
        text = _read(Path(values_file)).decode("utf-8")
    except UnicodeDecodeError:
        raise CliError(f"{values_file} is not UTF-8") from None
    instance = ed.make_instance(ed.definition_of(def_edoc), read_values(text))
    props = ed.SignedProperties(transform_id, ed.document_hash(instance, cfg.digest_method))
    signed = ed.wrap_and_sign(
        instance, cfg.keypair(), cfg.certificate(), props,
        digest_method=cfg.digest_method, signature_method=cfg.signature_method,
    )
    if id_:
        repo.store(INSTANCE, signed, id_)
    _write(out, ed.serialize_edoc(signed, indent=LAYOUT))


@main.command()
@click.argument("path", type=click.Path())
@click.pass_obj
@domain_errors
def verify(cfg: CliConfig, path):
    """Run the four-step verification of a signed instance."""
    report = ed.pipeline_verify(_load_edoc(path), cfg.repository())
    for step in report.steps:
        if cfg.report_format == "lines":
            click.echo(f"{step.name}\t{step.outcome}\t{step.detail}")
        else:
            click.echo(f"{step.name} {step.outcome}: {step.detail}")
    if cfg.report_format == "lines":
        click.echo(f"overall\t{'PASS' if report.overall else 'FAIL'}\t")
    else:
        click.echo(f"overall {'PASS' if report.overall else 'FAIL'}")
    if not report.overall:
        failed = next(s for s in report.steps if s.outcome == ed.FAIL)
        raise CliError(f"{failed.name} failed")


@main.command()
@click.argument("path", type=click.Path())
@click.option("--out", type=click.Path(), help="Output file (default stdout).")
@click.pass_obj
@domain_errors
def render(cfg: CliConfig, path, out):
    """Render a signed instance through its verified transform."""
    instance = _load_edoc(path)
    failures = _signature_failures(instance)
    if failures:
        raise CliError("instance signature invalid: " + "; ".join(failures))
    ids = {ed.signed_properties(s).transform_data_id for s in instance.signatures} - {None}
    if len(ids) != 1:
        raise MalformedEDocument("instance must name exactly one transformDataID")
    trafo_edoc = cfg.repository().fetch(TRANSFORM, ids.pop())
    failures = _signature_failures(trafo_edoc)
    if failures:
        raise CliError("transform signature invalid: " + "; ".join(failures))
    trafo = parse_transform_data_element(trafo_edoc.signed_content, ed.ENVELOPE_SCOPE)
    _write(out, serialize(apply(trafo.stylesheet, instance.signed_content)))


if __name__ == "__main__":
    main()
