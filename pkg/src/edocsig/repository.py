"""Directory-backed store for signed definitions, transforms and instances.

Layout under the repository root::

    index.tsv        kind<TAB>id<TAB>sha256-hex<TAB>filename<TAB>namespace
    entries/<f>.xml  serialized e-document, f = sha256(kind NUL id)
    .lock            advisory writer lock

Entry bytes are written (temp file, fsync, rename) before the index is
replaced the same way, so a crash can leave an orphan entry file but never
an index line without its bytes. Readers take no lock; they always see
either the old or the new index file.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from filelock import FileLock

from .canonical_xml import parse
from .edoc import ENVELOPE_SCOPE, EDocument, definition_of, parse_edoc, serialize_edoc, verify_edoc
from .errors import (
    AmbiguousNamespace,
    CorruptEntry,
    DuplicateId,
    EdocError,
    NotFound,
    SignatureInvalid,
    StorageFailure,
)
from .transform import parse_transform_data_element

DEFINITION, TRANSFORM, INSTANCE = "definition", "transform", "instance"
KINDS = (DEFINITION, TRANSFORM, INSTANCE)
INDEX_FILE = "index.tsv"
ENTRIES_DIR = "entries"
LOCK_FILE = ".lock"


@dataclass(frozen=True)
class IndexEntry:
    kind: str
    id: str
    digest: str
    filename: str
    namespace: str = ""

    def line(self) -> str:
        return "\t".join((self.kind, self.id, self.digest, self.filename, self.namespace))


def entry_filename(kind: str, id: str) -> str:
    return hashlib.sha256(f"{kind}\0{id}".encode("utf-8")).hexdigest() + ".xml"


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")


def _check_id(id: str) -> None:
    if not id or any(ch in id for ch in "\t\r\n"):
        raise ValueError(f"invalid id {id!r}: must be non-empty without tabs or line breaks")


def _write_atomic(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    _fsync_dir(path.parent)


def _fsync_dir(path: Path) -> None:
    try:
        fd = os.open(path, os.O_RDONLY)
    except OSError:
        return
    try:
        os.fsync(fd)
    except OSError:
        pass
    finally:
        os.close(fd)


def natural_id(kind: str, edoc: EDocument) -> tuple[str | None, str]:
    """(id, namespace) implied by the content; instances have no natural id."""
    if kind == DEFINITION:
        definition = definition_of(edoc)
        return definition.type_id.value, definition.compiled_schema.target_namespace
    if kind == TRANSFORM:
        return parse_transform_data_element(edoc.signed_content, ENVELOPE_SCOPE).transform_id, ""
    return None, ""


class Repository:
    def __init__(self, root: str | os.PathLike, create: bool = True):
        self.root = Path(root)
        self.entries = self.root / ENTRIES_DIR
        self.index_path = self.root / INDEX_FILE
        if create:
            try:
                self.entries.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise StorageFailure(f"cannot create repository at {self.root}: {exc}") from None
        elif not self.root.is_dir():
            raise NotFound(f"no repository at {self.root}")
        self._lock = FileLock(str(self.root / LOCK_FILE))

    # -- index --------------------------------------------------------------

    def _index(self) -> dict[tuple[str, str], IndexEntry]:
        try:
            text = self.index_path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return {}
        except OSError as exc:
            raise StorageFailure(f"cannot read index: {exc}") from None
        entries = {}
        for n, line in enumerate(text.splitlines(), 1):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise CorruptEntry(f"index line {n} has {len(parts)} fields, expected 5")
            entry = IndexEntry(*parts)
            entries[(entry.kind, entry.id)] = entry
        return entries

    def _write_index(self, entries: dict[tuple[str, str], IndexEntry]) -> None:
        lines = [e.line() + "\n" for _, e in sorted(entries.items())]
        _write_atomic(self.index_path, "".join(lines).encode("utf-8"))

    # -- operations ---------------------------------------------------------

    def store(self, kind: str, edoc: EDocument, id: str | None = None) -> str:
        """Verify and persist ``edoc``; returns the id it is stored under."""
        _check_kind(kind)
        bad = [f"signature {i}: {r.failure_reason}" for i, r in enumerate(verify_edoc(edoc), 1) if not r.valid]
        if bad:
            raise SignatureInvalid("; ".join(bad))
        implied, namespace = natural_id(kind, edoc)
        if implied is None:
            if id is None:
                raise ValueError("instances need a caller-assigned id")
        elif id is not None and id != implied:
            raise ValueError(f"{kind} carries id {implied!r}, not {id!r}")
        id = implied if implied is not None else id
        _check_id(id)

        data = serialize_edoc(edoc)
        entry = IndexEntry(kind, id, hashlib.sha256(data).hexdigest(), entry_filename(kind, id), namespace)
        try:
            with self._lock:
                index = self._index()
                if (kind, id) in index:
                    raise DuplicateId(f"duplicate id: {kind} {id!r} is already stored")
                _write_atomic(self.entries / entry.filename, data)
                index[(kind, id)] = entry
                self._write_index(index)
        except OSError as exc:
            raise StorageFailure(f"cannot store {kind} {id!r}: {exc}") from None
        return id

    def _load(self, entry: IndexEntry) -> EDocument:
        try:
            data = (self.entries / entry.filename).read_bytes()
        except FileNotFoundError:
            raise CorruptEntry(f"{entry.kind} {entry.id!r}: entry file missing") from None
        except OSError as exc:
            raise StorageFailure(f"cannot read {entry.kind} {entry.id!r}: {exc}") from None
        if hashlib.sha256(data).hexdigest() != entry.digest:
            raise CorruptEntry(f"{entry.kind} {entry.id!r}: stored bytes do not match the indexed digest")
        try:
            return parse_edoc(parse(data))
        except EdocError as exc:
            raise CorruptEntry(f"{entry.kind} {entry.id!r}: {exc}") from None

    def fetch(self, kind: str, id: str) -> EDocument:
        _check_kind(kind)
        entry = self._index().get((kind, id))
        if entry is None:
            raise NotFound(f"no {kind} with id {id!r}")
        return self._load(entry)

    def find_definition_by_namespace(self, namespace_uri: str) -> EDocument:
        hits = [e for e in self._index().values() if e.kind == DEFINITION and e.namespace == namespace_uri]
        if not hits:
            raise NotFound(f"no definition with target namespace {namespace_uri!r}")
        if len(hits) > 1:
            ids = ", ".join(sorted(e.id for e in hits))
            raise AmbiguousNamespace(f"namespace {namespace_uri!r} is claimed by {ids}")
        return self._load(hits[0])

    def list(self, kind: str) -> list[tuple[str, str]]:
        _check_kind(kind)
        return sorted((e.id, e.digest) for e in self._index().values() if e.kind == kind)

    def sweep(self) -> list[str]:
        """Remove entry files no index line refers to (left by interrupted stores)."""
        with self._lock:
            live = {e.filename for e in self._index().values()}
            removed = []
            for path in sorted(self.entries.iterdir()):
                if path.name not in live:
                    path.unlink()
                    removed.append(path.name)
            return removed
