"""npm-style registry dumps: parsing, record cache, and time snapshots.

A dump is newline-delimited JSON with one package document per line, or a
CouchDB ``{"rows": [{"doc": ...}, ...]}`` wrapper (compact or
pretty-printed), optionally gzip-compressed.  Only the runtime
``dependencies`` map of each version is kept, reduced to package names.
"""
from __future__ import annotations

import gzip
import io
import itertools
import json
import logging
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import IO, Iterable, Iterator

from .graph import DependencyGraph, build_graph

logger = logging.getLogger(__name__)

GZIP_MAGIC = b"\x1f\x8b"
# Latest representable instant; used as the cutoff for the current-state network.
END_OF_TIME = datetime.max.replace(tzinfo=timezone.utc)

_FRACTION = re.compile(r"(\.\d+)")


@dataclass(frozen=True)
class VersionEntry:
    version: str
    release_time: datetime
    dependency_names: frozenset[str] = frozenset()


@dataclass(frozen=True)
class PackageRecord:
    """A package and its versions, ascending by (release_time, version)."""

    name: str
    versions: tuple[VersionEntry, ...] = ()

    def latest_at(self, cutoff: datetime) -> VersionEntry | None:
        """Last version released at or before ``cutoff``."""
        best = None
        for v in self.versions:
            if v.release_time <= cutoff:
                best = v
            else:
                break
        return best


@dataclass
class ParseReport:
    """Records from one dump together with everything that was skipped."""

    records: list[PackageRecord] = field(default_factory=list)
    errors: list[tuple[int, str]] = field(default_factory=list)
    skipped_documents: int = 0
    dropped_versions: int = 0
    bad_timestamps: int = 0
    duplicate_names: int = 0


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime.

    Accepts the ``Z`` suffix and any number of fractional-second digits,
    which :meth:`datetime.fromisoformat` on 3.10 does not.
    """
    if not isinstance(text, str):
        raise ValueError(f"timestamp is not a string: {text!r}")
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    m = _FRACTION.search(s)
    if m:
        digits = m.group(1)[1:]
        s = s[: m.start()] + "." + digits[:6].ljust(6, "0") + s[m.end() :]
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def parse_cutoff(text: str) -> datetime:
    """Cutoff timestamp for snapshots.

    A bare year (``2014``) or date (``2014-12-31``) means the last second of
    that year or day in UTC; anything else is read as a full timestamp.
    """
    s = text.strip()
    if re.fullmatch(r"\d{4}", s):
        return datetime(int(s), 12, 31, 23, 59, 59, tzinfo=timezone.utc)
    if re.fullmatch(r"\d{4}-\d{2}-\d{2}", s):
        day = datetime.fromisoformat(s).replace(tzinfo=timezone.utc)
        return day + timedelta(hours=23, minutes=59, seconds=59)
    return parse_timestamp(s)


# ---------------------------------------------------------------------------
# dump parsing
# ---------------------------------------------------------------------------


def open_maybe_gzip(source: str | os.PathLike | IO[bytes]) -> IO[bytes]:
    """Binary stream over ``source``, transparently gunzipped by magic bytes."""
    raw = open(source, "rb") if isinstance(source, (str, os.PathLike)) else source
    if not isinstance(raw, io.BufferedReader) and not hasattr(raw, "peek"):
        raw = io.BufferedReader(raw)  # type: ignore[arg-type]
    if raw.peek(2)[:2] == GZIP_MAGIC:  # type: ignore[attr-defined]
        return gzip.GzipFile(fileobj=raw)  # type: ignore[return-value]
    return raw


def _unwrap(obj: object) -> Iterator[object]:
    """Yield package documents from a line object or a rows wrapper."""
    if isinstance(obj, dict) and "rows" in obj and "name" not in obj:
        for row in obj["rows"] or ():
            yield from _unwrap(row)
    elif isinstance(obj, dict) and "doc" in obj and "name" not in obj:
        yield obj["doc"]
    else:
        yield obj


def _parse_lines(lines: Iterable[tuple[int, bytes]], report: ParseReport) -> Iterator[object]:
    for lineno, raw in lines:
        text = raw.decode("utf-8", errors="replace").strip()
        if text.endswith(","):
            text = text[:-1]
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            report.errors.append((lineno, f"malformed JSON: {exc.msg}"))
            continue
        yield from _unwrap(obj)


def _iter_documents(stream: IO[bytes], report: ParseReport) -> Iterator[object]:
    lines = enumerate(stream, 1)
    for lineno, raw in lines:
        if raw.strip():
            break
    else:
        return
    try:
        json.loads(raw)
    except json.JSONDecodeError:
        if raw.lstrip().startswith(b"{"):
            # first line is not a whole document: try the stream as one
            # JSON value (pretty-printed or per-row rows wrapper)
            body = raw + b"".join(r for _, r in lines)
            try:
                yield from _unwrap(json.loads(body))
                return
            except json.JSONDecodeError:
                lines = enumerate(body.splitlines(keepends=True), lineno)
                yield from _parse_lines(lines, report)
                return
    yield from _parse_lines(itertools.chain([(lineno, raw)], lines), report)


def _record_from_document(doc: object, report: ParseReport) -> PackageRecord | None:
    if not isinstance(doc, dict) or not isinstance(doc.get("name"), str) or not doc["name"]:
        report.skipped_documents += 1
        return None
    versions = doc.get("versions") or {}
    times = doc.get("time") or {}
    if not isinstance(versions, dict) or not isinstance(times, dict):
        report.skipped_documents += 1
        return None
    entries = []
    for ver, vdoc in versions.items():
        stamp = times.get(ver)
        if stamp is None:
            report.dropped_versions += 1
            continue
        try:
            when = parse_timestamp(stamp)
        except (ValueError, OverflowError):
            report.bad_timestamps += 1
            report.dropped_versions += 1
            continue
        deps = vdoc.get("dependencies") if isinstance(vdoc, dict) else None
        names = frozenset(deps) if isinstance(deps, dict) else frozenset()
        entries.append(VersionEntry(ver, when, names))
    entries.sort(key=lambda e: (e.release_time, e.version))
    return PackageRecord(doc["name"], tuple(entries))


def parse_registry_dump(source: str | os.PathLike | IO[bytes]) -> ParseReport:
    """Parse a registry dump into name-sorted :class:`PackageRecord` objects.

    Malformed lines, nameless documents and versions without a usable
    release time are skipped and tallied in the returned report.  When a
    name occurs twice the later document wins.
    """
    report = ParseReport()
    by_name: dict[str, PackageRecord] = {}
    stream = open_maybe_gzip(source)
    try:
        for doc in _iter_documents(stream, report):
            rec = _record_from_document(doc, report)
            if rec is None:
                continue
            if rec.name in by_name:
                report.duplicate_names += 1
            by_name[rec.name] = rec
    finally:
        if isinstance(source, (str, os.PathLike)):
            stream.close()
    report.records = [by_name[k] for k in sorted(by_name)]
    if report.errors or report.skipped_documents or report.dropped_versions:
        logger.info(
            "parsed %d packages; %d bad lines, %d skipped docs, %d dropped versions",
            len(report.records),
            len(report.errors),
            report.skipped_documents,
            report.dropped_versions,
        )
    return report


# ---------------------------------------------------------------------------
# record cache (gzip line-JSON)
# ---------------------------------------------------------------------------


def _format_time(t: datetime) -> str:
    return t.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def record_to_json(rec: PackageRecord) -> str:
    versions = [[v.version, _format_time(v.release_time), sorted(v.dependency_names)] for v in rec.versions]
    return json.dumps({"name": rec.name, "versions": versions}, ensure_ascii=False, separators=(",", ":"))


def record_from_json(text: str) -> PackageRecord:
    obj = json.loads(text)
    versions = tuple(VersionEntry(v, parse_timestamp(t), frozenset(d)) for v, t, d in obj["versions"])
    return PackageRecord(obj["name"], versions)


def write_cache(records: Iterable[PackageRecord], path: str | os.PathLike) -> None:
    """Serialize records as gzip-compressed line JSON (deterministic bytes)."""
    with open(path, "wb") as raw:
        # mtime=0 keeps the gzip header free of wall-clock time
        with gzip.GzipFile(filename="", fileobj=raw, mode="wb", mtime=0) as gz:
            for rec in records:
                gz.write(record_to_json(rec).encode("utf-8") + b"\n")


def read_cache(path: str | os.PathLike) -> list[PackageRecord]:
    with open_maybe_gzip(path) as fh:
        return [record_from_json(line.decode("utf-8")) for line in fh if line.strip()]


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SnapshotSpec:
    cutoff: datetime

    def __post_init__(self) -> None:
        if self.cutoff.tzinfo is None:
            raise ValueError("snapshot cutoff must be timezone-aware")


@dataclass
class Snapshot:
    """Labeled edge list of the network as of one cutoff."""

    nodes: list[str]
    edges: list[tuple[str, str]]
    dropped_edges: int = 0

    def to_graph(self) -> DependencyGraph:
        return build_graph(self.edges, self.nodes)


def snapshot_edges(records: Iterable[PackageRecord], spec: SnapshotSpec | datetime) -> Snapshot:
    """Network as it stood at ``spec.cutoff``.

    Each package with a version released at or before the cutoff
    contributes its latest such version; dependencies on packages that are
    not themselves in the snapshot are dropped and counted.
    """
    cutoff = spec.cutoff if isinstance(spec, SnapshotSpec) else spec
    chosen: dict[str, VersionEntry] = {}
    for rec in records:
        v = rec.latest_at(cutoff)
        if v is not None:
            chosen[rec.name] = v
    nodes = sorted(chosen)
    edges = []
    dropped = 0
    for name in nodes:
        for dep in sorted(chosen[name].dependency_names):
            if dep in chosen:
                edges.append((name, dep))
            else:
                dropped += 1
    return Snapshot(nodes, edges, dropped)


def latest_edges(records: Iterable[PackageRecord]) -> Snapshot:
    """Current-state network: every package at its newest version."""
    return snapshot_edges(records, END_OF_TIME)

