"""Activity-log ingestion: records, pairwise link expansion and time framing.

The input is a flat log of team participations.  Every row names one team,
the activity it belongs to, the activity type (A = rewarding,
B = non-rewarding), an RFC 3339 timestamp and the member list.  Supported
encodings are CSV (members joined with ``;`` in one quoted column) and JSON
Lines (members as an array).
"""

from __future__ import annotations

import csv
import io
import json
from bisect import bisect_right
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from itertools import combinations
from typing import IO, Iterable, Sequence

from .graph import DynamicNetwork, FrameGraph

CSV_HEADER = ["team_id", "activity_id", "activity_type", "timestamp", "members"]


class ActivityType(str, Enum):
    A = "A"  # rewarding
    B = "B"  # non-rewarding


class LogParseError(ValueError):
    """Malformed input row.  Carries the 1-based line number and field name."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        detail = message
        if field is not None:
            detail = f"{detail} (field {field!r})"
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail)
        self.line = line
        self.field = field


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp to an aware UTC datetime.

    Accepts the ``Z`` suffix (Python 3.10's ``fromisoformat`` does not) and
    treats a missing offset as UTC.
    """
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


@dataclass(frozen=True)
class TeamRecord:
    """One team participation event.

    ``members`` is stored as a sorted tuple so downstream expansion is
    independent of input ordering.  Singleton teams are legal: they produce
    no links but still register the member as a participant.
    """

    team_id: str
    activity_id: str
    activity_type: ActivityType
    timestamp: datetime
    members: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError(f"team {self.team_id!r} has no members")
        ordered = tuple(sorted(self.members))
        if len(set(ordered)) != len(ordered):
            raise ValueError(f"team {self.team_id!r} lists a member twice")
        object.__setattr__(self, "members", ordered)
        object.__setattr__(self, "activity_type", ActivityType(self.activity_type))
        if self.timestamp.tzinfo is None:
            raise ValueError(f"team {self.team_id!r} has a naive timestamp")


@dataclass(frozen=True)
class LinkRecord:
    """One undirected co-participation link between two members.

    The endpoint pair is canonical (``member_a < member_b``); self-links are
    rejected.
    """

    member_a: str
    member_b: str
    team_id: str
    activity_id: str
    activity_type: ActivityType
    timestamp: datetime

    def __post_init__(self) -> None:
        if self.member_a == self.member_b:
            raise ValueError(f"self-link on member {self.member_a!r}")
        if self.member_b < self.member_a:
            a, b = self.member_b, self.member_a
            object.__setattr__(self, "member_a", a)
            object.__setattr__(self, "member_b", b)

    @property
    def pair(self) -> tuple[str, str]:
        return (self.member_a, self.member_b)


@dataclass(frozen=True)
class Participation:
    """One (member, team) attendance, kept for activity accounting."""

    member: str
    team_id: str
    activity_id: str
    activity_type: ActivityType
    timestamp: datetime


def _text_lines(source) -> Iterable[str]:
    if isinstance(source, (str, bytes)):
        if isinstance(source, bytes):
            source = source.decode("utf-8")
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    if hasattr(source, "read"):
        return io.TextIOWrapper(source, encoding="utf-8")
    return source


def parse_log(source, format: str = "csv") -> list[TeamRecord]:
    """Parse an activity log from a path-less stream or string.

    Args:
        source: text/bytes content or an open file object.
        format: ``"csv"`` or ``"jsonl"``.

    Raises:
        LogParseError: on any malformed row, quoting line and field.
    """
    if format == "csv":
        return _parse_csv(_text_lines(source))
    if format == "jsonl":
        return _parse_jsonl(_text_lines(source))
    raise ValueError(f"unknown log format {format!r}")


def infer_format(path) -> str:
    """Log encoding implied by the file suffix: jsonl-ish or csv."""
    return "jsonl" if str(path).endswith((".jsonl", ".ndjson", ".json")) else "csv"


def load_log(path, format: str | None = None) -> list[TeamRecord]:
    """Read a log file; infers the format from the suffix unless given."""
    if format is None:
        format = infer_format(path)
    with open(str(path), encoding="utf-8") as handle:
        return parse_log(handle, format)


def _record(fields: dict, line: int) -> TeamRecord:
    for key in ("team_id", "activity_id", "activity_type", "timestamp"):
        value = fields.get(key)
        if not isinstance(value, str) or not value.strip():
            raise LogParseError("missing or empty value", line=line, field=key)
    try:
        kind = ActivityType(fields["activity_type"].strip())
    except ValueError:
        raise LogParseError(
            f"activity type must be A or B, got {fields['activity_type']!r}",
            line=line,
            field="activity_type",
        ) from None
    try:
        ts = parse_timestamp(fields["timestamp"])
    except ValueError as exc:
        raise LogParseError(str(exc), line=line, field="timestamp") from None
    members = fields["members"]
    if not isinstance(members, (list, tuple)) or not members:
        raise LogParseError("empty member list", line=line, field="members")
    cleaned = []
    for item in members:
        if not isinstance(item, str) or not item.strip():
            raise LogParseError("blank member id", line=line, field="members")
        cleaned.append(item.strip())
    try:
        return TeamRecord(
            team_id=fields["team_id"].strip(),
            activity_id=fields["activity_id"].strip(),
            activity_type=kind,
            timestamp=ts,
            members=tuple(cleaned),
        )
    except ValueError as exc:
        raise LogParseError(str(exc), line=line, field="members") from None


def _parse_csv(lines: Iterable[str]) -> list[TeamRecord]:
    reader = csv.reader(lines)
    records = []
    header = next(reader, None)
    if header is None:
        return records
    if [h.strip() for h in header] != CSV_HEADER:
        raise LogParseError(
            f"expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}",
            line=1,
        )
    for number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise LogParseError(
                f"expected {len(CSV_HEADER)} columns, got {len(row)}", line=number
            )
        fields = dict(zip(CSV_HEADER, row))
        fields["members"] = [m for m in fields["members"].split(";")]
        records.append(_record(fields, number))
    return records


def _parse_jsonl(lines: Iterable[str]) -> list[TeamRecord]:
    records = []
    for number, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LogParseError(f"invalid JSON: {exc}", line=number) from None
        if not isinstance(payload, dict):
            raise LogParseError("row is not a JSON object", line=number)
        records.append(_record(payload, number))
    return records


def expand_teams(records: Iterable[TeamRecord]) -> list[LinkRecord]:
    """Expand each team into links for every unordered member pair.

    A team of m members yields m*(m-1)/2 links sharing the team's activity
    fields and timestamp.  The output order does not depend on how members
    were listed in the input.
    """
    links = []
    for record in records:
        for a, b in combinations(record.members, 2):
            links.append(
                LinkRecord(
                    member_a=a,
                    member_b=b,
                    team_id=record.team_id,
                    activity_id=record.activity_id,
                    activity_type=record.activity_type,
                    timestamp=record.timestamp,
                )
            )
    return links


def team_participations(records: Iterable[TeamRecord]) -> list[Participation]:
    """One participation row per (team, member), singleton teams included."""
    rows = []
    for record in records:
        for member in record.members:
            rows.append(
                Participation(
                    member=member,
                    team_id=record.team_id,
                    activity_id=record.activity_id,
                    activity_type=record.activity_type,
                    timestamp=record.timestamp,
                )
            )
    return rows


def add_months(moment: datetime, months: int) -> datetime:
    """Shift a datetime by whole calendar months, clamping the day."""
    month = moment.month - 1 + months
    year = moment.year + month // 12
    month = month % 12 + 1
    # clamp day to the target month's length
    day = moment.day
    while day > 28:
        try:
            return moment.replace(year=year, month=month, day=day)
        except ValueError:
            day -= 1
    return moment.replace(year=year, month=month, day=day)


class FrameSpec:
    """Partition of an observation span into consecutive equal-length frames.

    Frames are half-open ``[start, next_start)``.  The window is either a
    whole number of calendar months (default) or a fixed duration.  When the
    span does not divide evenly, the trailing remainder is absorbed into the
    last frame, so the final frame may be longer than the window.
    """

    def __init__(
        self,
        span_start: datetime,
        span_end: datetime,
        window_months: int | None = None,
        window: timedelta | None = None,
    ) -> None:
        if (window_months is None) == (window is None):
            raise ValueError("specify exactly one of window_months or window")
        if window_months is not None and window_months < 1:
            raise ValueError("window_months must be >= 1")
        if window is not None and window <= timedelta(0):
            raise ValueError("window must be a positive duration")
        if span_start.tzinfo is None or span_end.tzinfo is None:
            raise ValueError("span boundaries must be timezone-aware")
        if span_start >= span_end:
            raise ValueError("span_start must precede span_end")
        self.span_start = span_start.astimezone(timezone.utc)
        self.span_end = span_end.astimezone(timezone.utc)
        self.window_months = window_months
        self.window = window
        self._starts = self._build_starts()

    def _advance(self, moment: datetime) -> datetime:
        if self.window_months is not None:
            return add_months(moment, self.window_months)
        return moment + self.window  # type: ignore[operator]

    def _build_starts(self) -> list[datetime]:
        starts = [self.span_start]
        while True:
            nxt = self._advance(starts[-1])
            if nxt < self.span_end:
                starts.append(nxt)
            else:
                break
        # a trailing partial window is merged into the previous frame
        if len(starts) > 1 and self._advance(starts[-1]) > self.span_end:
            starts.pop()
        return starts

    @property
    def frame_count(self) -> int:
        return len(self._starts)

    def boundaries(self) -> list[tuple[datetime, datetime]]:
        """The ``[start, end)`` interval of every frame."""
        out = []
        for i, start in enumerate(self._starts):
            end = self._starts[i + 1] if i + 1 < len(self._starts) else self.span_end
            out.append((start, end))
        return out

    def frame_of(self, moment: datetime) -> int:
        """Frame index containing ``moment``; raises outside the span."""
        if moment.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")
        moment = moment.astimezone(timezone.utc)
        if moment < self.span_start or moment >= self.span_end:
            raise ValueError(
                f"timestamp {moment.isoformat()} outside span "
                f"[{self.span_start.isoformat()}, {self.span_end.isoformat()})"
            )
        return bisect_right(self._starts, moment) - 1

    def describe(self) -> dict:
        spec = {
            "span_start": self.span_start.isoformat(),
            "span_end": self.span_end.isoformat(),
            "frame_count": self.frame_count,
        }
        if self.window_months is not None:
            spec["window"] = f"{self.window_months}m"
        else:
            spec["window"] = f"{int(self.window.total_seconds())}s"  # type: ignore[union-attr]
        return spec


def spec_for_records(
    records: Sequence[TeamRecord],
    window_months: int | None = None,
    window: timedelta | None = None,
) -> FrameSpec:
    """Derive a FrameSpec spanning the records' timestamps.

    The span starts at the earliest timestamp and ends one second past the
    latest, so every record lands inside a frame.
    """
    if not records:
        raise ValueError("cannot derive a frame spec from an empty log")
    if window_months is None and window is None:
        window_months = 3
    stamps = [r.timestamp for r in records]
    return FrameSpec(
        min(stamps), max(stamps) + timedelta(seconds=1), window_months, window
    )


def build_frames(
    links: Sequence[LinkRecord],
    spec: FrameSpec,
    participations: Sequence[Participation] | None = None,
) -> DynamicNetwork:
    """Assemble the dynamic network from links and (optionally) participations.

    Pair weights count links between the pair inside each frame.  When
    ``participations`` is given, every participant is registered in the frame
    of their team (even without links) and per-node activity-type counters
    are filled in.  The result is invariant under input reordering.

    Raises:
        ValueError: if any timestamp falls outside the spec's span; the
            message names the offending record.
    """
    weights: list[dict[tuple[str, str], int]] = [
        {} for _ in range(spec.frame_count)
    ]
    nodes: list[set[str]] = [set() for _ in range(spec.frame_count)]
    counts: list[dict[str, list[int]]] = [{} for _ in range(spec.frame_count)]
    for link in links:
        try:
            t = spec.frame_of(link.timestamp)
        except ValueError as exc:
            raise ValueError(f"link {link.pair} of team {link.team_id!r}: {exc}")
        weights[t][link.pair] = weights[t].get(link.pair, 0) + 1
        nodes[t].update(link.pair)
    members: set[str] = set()
    for row in participations or ():
        try:
            t = spec.frame_of(row.timestamp)
        except ValueError as exc:
            raise ValueError(f"participation of {row.member!r} in team {row.team_id!r}: {exc}")
        nodes[t].add(row.member)
        tally = counts[t].setdefault(row.member, [0, 0])
        tally[0 if row.activity_type is ActivityType.A else 1] += 1
        members.add(row.member)
    frames = []
    for t in range(spec.frame_count):
        packed = {v: (a, b) for v, (a, b) in counts[t].items()}
        frames.append(
            FrameGraph.from_edges(
                t,
                ((u, v, w) for (u, v), w in weights[t].items()),
                nodes=nodes[t],
                activity_counts=packed,
            )
        )
        members.update(nodes[t])
    return DynamicNetwork(frames, spec, members)


def typed_network(
    links: Sequence[LinkRecord],
    spec: FrameSpec,
    activity_type: ActivityType | str,
    participations: Sequence[Participation] | None = None,
) -> DynamicNetwork:
    """Network built from the links (and participations) of one activity type.

    Filtering by A and then by B partitions the link multiset exactly: every
    link carries one of the two types.
    """
    kind = ActivityType(activity_type)
    sub_links = [link for link in links if link.activity_type is kind]
    sub_parts = [p for p in (participations or ()) if p.activity_type is kind]
    return build_frames(sub_links, spec, sub_parts)


def network_from_records(
    records: Sequence[TeamRecord],
    spec: FrameSpec | None = None,
    window_months: int | None = None,
    window: timedelta | None = None,
) -> DynamicNetwork:
    """Convenience wrapper: records -> links + participations -> frames."""
    if spec is None:
        spec = spec_for_records(records, window_months, window)
    return build_frames(
        expand_teams(records), spec, participations=team_participations(records)
    )
