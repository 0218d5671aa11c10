"""Text formats for dynamic networks and cover timelines.

Temporal edge list: one ``t u v`` record per line (whitespace separated,
0-based integers, ``#`` starts a comment line).  Cover timeline: a JSON
array over snapshots, each an array of ``{"label": int, "members": [...]}``.
"""

from __future__ import annotations

import io
import json
import os
import warnings
from contextlib import contextmanager
from typing import IO, Union

from .model import Cover, CoverTimeline, DynamicNetwork

Source = Union[str, os.PathLike, IO[bytes], IO[str]]


class ParseError(ValueError):
    """Malformed input; ``lineno`` is 1-based when known."""

    def __init__(self, msg: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {msg}" if lineno is not None else msg)


@contextmanager
def _open_text(source: Source, mode: str = "r"):
    if isinstance(source, (str, os.PathLike)):
        with open(source, mode, encoding="utf-8", newline="\n") as fh:
            yield fh
        return
    if isinstance(source, io.TextIOBase):
        yield source
        return
    tf = io.TextIOWrapper(source, encoding="utf-8", newline="\n")
    try:
        yield tf
        tf.flush()
    finally:
        tf.detach()


def load_temporal_edgelist(source: Source, n_hint: int | None = None) -> DynamicNetwork:
    """Parse a temporal edge list into a :class:`DynamicNetwork`.

    The snapshot count is ``max t + 1`` and the node count is ``max id + 1``
    or ``n_hint`` if larger.  Self-loop records are dropped with a warning.
    """
    records: list[tuple[int, int, int]] = []
    dropped = 0
    max_t = max_id = -1
    with _open_text(source) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 3:
                raise ParseError(f"expected 3 fields 't u v', got {len(parts)}", lineno)
            try:
                t, u, v = (int(x) for x in parts)
            except ValueError:
                raise ParseError(f"non-integer field in {s!r}", lineno) from None
            if t < 0 or u < 0 or v < 0:
                raise ParseError("negative snapshot or node id", lineno)
            # self-loops still define the snapshot and node ranges
            max_t, max_id = max(max_t, t), max(max_id, u, v)
            if u == v:
                dropped += 1
                continue
            records.append((t, u, v))
    if max_t < 0:
        raise ParseError("empty temporal edge list")
    if dropped:
        warnings.warn(f"dropped {dropped} self-loop record(s)", stacklevel=2)
    n = max(max_id + 1, n_hint or 0)
    per_t: list[set[tuple[int, int]]] = [set() for _ in range(max_t + 1)]
    for t, u, v in records:
        per_t[t].add((min(u, v), max(u, v)))
    return DynamicNetwork.from_edges(n, [sorted(es) for es in per_t])


def write_temporal_edgelist(net: DynamicNetwork, sink: Source) -> None:
    """Write every edge once per snapshot as ``t u v`` with ``u < v``, sorted."""
    with _open_text(sink, "w") as fh:
        for t in range(net.T):
            for u, v in net.edges(t):
                fh.write(f"{t} {u} {v}\n")


def load_node_names(source: Source) -> dict[int, str]:
    """Read an optional ``id<TAB>name`` mapping file."""
    names = {}
    with _open_text(source) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.rstrip("\n")
            if not s.strip() or s.startswith("#"):
                continue
            idx, sep, name = s.partition("\t")
            if not sep:
                raise ParseError("expected 'id<TAB>name'", lineno)
            try:
                names[int(idx)] = name
            except ValueError:
                raise ParseError(f"bad node id {idx!r}", lineno) from None
    return names


def timeline_to_json(tl: CoverTimeline) -> list:
    if tl.labels is None:
        raise ValueError("cover timeline must carry labels before serialization")
    return [
        [{"label": lab, "members": sorted(members)} for lab, members in tl.labeled(t)]
        for t in range(tl.T)
    ]


def write_cover_timeline(tl: CoverTimeline, sink: Source) -> None:
    """Serialize a labeled timeline as one JSON document."""
    doc = json.dumps(timeline_to_json(tl), separators=(",", ":"))
    with _open_text(sink, "w") as fh:
        fh.write(doc)
        fh.write("\n")


def load_cover_timeline(source: Source, n: int | None = None) -> CoverTimeline:
    """Read a cover-timeline JSON document.

    Without ``n`` the node count is taken as the largest member id plus one.
    """
    with _open_text(source) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, list) or not all(isinstance(s, list) for s in doc):
        raise ParseError("cover timeline must be an array of arrays")
    if not doc:
        raise ParseError("cover timeline has no snapshots")
    try:
        max_id = max((m for snap in doc for c in snap for m in c["members"]), default=-1)
        n = max(n or 0, max_id + 1, 1)
        covers, labels = [], []
        for snap in doc:
            comms = [frozenset(c["members"]) for c in snap]
            cover = Cover(n, tuple(comms))
            lab_of = {frozenset(c["members"]): int(c["label"]) for c in snap}
            if len(lab_of) != len(snap):
                raise ParseError("duplicate community within a snapshot")
            covers.append(cover)
            labels.append(tuple(lab_of[c] for c in cover.communities))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed community record: {exc}") from None
    return CoverTimeline(tuple(covers), tuple(labels))
