import io
from datetime import datetime, timedelta, timezone

import pytest

from twotier.ingest import (
    ActivityType,
    FrameSpec,
    LinkRecord,
    LogParseError,
    TeamRecord,
    add_months,
    build_frames,
    expand_teams,
    network_from_records,
    parse_log,
    parse_timestamp,
    spec_for_records,
    team_participations,
    typed_network,
)

UTC = timezone.utc


def _team(team_id, members, ts="2021-03-05T10:00:00Z", kind="B"):
    return TeamRecord(
        team_id=team_id,
        activity_id="act1",
        activity_type=kind,
        timestamp=parse_timestamp(ts),
        members=tuple(members),
    )


# --- timestamps -----------------------------------------------------------

def test_parse_timestamp_accepts_zulu_and_offset():
    a = parse_timestamp("2021-06-01T12:00:00Z")
    b = parse_timestamp("2021-06-01T12:00:00+00:00")
    assert a == b
    assert a.tzinfo is not None


def test_parse_timestamp_naive_becomes_utc():
    t = parse_timestamp("2021-06-01T12:00:00")
    assert t.utcoffset() == timedelta(0)


def test_parse_timestamp_rejects_garbage():
    with pytest.raises(ValueError):
        parse_timestamp("last tuesday")


def test_add_months_clamps_day():
    t = datetime(2021, 1, 31, tzinfo=UTC)
    assert add_months(t, 1) == datetime(2021, 2, 28, tzinfo=UTC)
    assert add_months(datetime(2020, 1, 31, tzinfo=UTC), 1) == datetime(2020, 2, 29, tzinfo=UTC)
    assert add_months(t, 13) == datetime(2022, 2, 28, tzinfo=UTC)


# --- records --------------------------------------------------------------

def test_team_record_sorts_members_and_rejects_duplicates():
    r = _team("t1", ["c", "a", "b"])
    assert r.members == ("a", "b", "c")
    with pytest.raises(ValueError):
        _team("t2", ["a", "a", "b"])
    with pytest.raises(ValueError):
        _team("t3", [])


def test_link_record_is_canonical():
    ts = parse_timestamp("2021-01-01T00:00:00Z")
    link = LinkRecord(member_a="z", member_b="a", team_id="t1", activity_id="act",
                      activity_type=ActivityType.B, timestamp=ts)
    assert (link.member_a, link.member_b) == ("a", "z")
    assert link.pair == ("a", "z")
    with pytest.raises(ValueError):
        LinkRecord(member_a="a", member_b="a", team_id="t1", activity_id="act",
                   activity_type=ActivityType.B, timestamp=ts)


def test_expand_teams_makes_all_pairs():
    links = expand_teams([_team("t1", ["a", "b", "c", "d"])])
    assert len(links) == 6  # C(4, 2)
    pairs = {l.pair for l in links}
    assert ("a", "d") in pairs and ("c", "d") in pairs


def test_team_participations_counts_by_type():
    parts = team_participations([_team("t1", ["a", "b"], kind="A"),
                                 _team("t2", ["a", "b"], kind="B")])
    mine = [p for p in parts if p.member == "a"]
    assert len(mine) == 2
    assert {p.activity_type for p in mine} == {ActivityType.A, ActivityType.B}


# --- log parsing ----------------------------------------------------------

CSV_OK = """team_id,activity_id,activity_type,timestamp,members
t1,act9,A,2021-01-04T09:00:00Z,ann;bob
t2,act3,B,2021-01-20T10:30:00Z,bob;cat;dan
"""


def test_parse_log_csv():
    records = parse_log(io.StringIO(CSV_OK), format="csv")
    assert len(records) == 2
    assert records[0].members == ("ann", "bob")
    assert records[1].activity_type is ActivityType.B


def test_parse_log_csv_reports_line_numbers():
    bad = CSV_OK + "t3,act1,C,2021-01-21T00:00:00Z,eve;fay\n"
    with pytest.raises(LogParseError) as err:
        parse_log(io.StringIO(bad), format="csv")
    assert err.value.line == 4


def test_parse_log_jsonl():
    text = (
        '{"team_id": "t1", "activity_id": "a", "activity_type": "A", '
        '"timestamp": "2021-01-04T09:00:00Z", "members": ["x", "y"]}\n'
    )
    records = parse_log(io.StringIO(text), format="jsonl")
    assert records[0].members == ("x", "y")


def test_parse_log_jsonl_bad_members():
    text = '{"team_id": "t1", "activity_id": "a", "activity_type": "A", ' \
           '"timestamp": "2021-01-04T09:00:00Z", "members": "xy"}\n'
    with pytest.raises(LogParseError):
        parse_log(io.StringIO(text), format="jsonl")


# --- frame spec -----------------------------------------------------------

def test_frame_spec_needs_exactly_one_window():
    start = parse_timestamp("2021-01-01T00:00:00Z")
    end = parse_timestamp("2022-01-01T00:00:00Z")
    with pytest.raises(ValueError):
        FrameSpec(start, end)
    with pytest.raises(ValueError):
        FrameSpec(start, end, window_months=3, window=timedelta(days=30))


def test_frame_spec_last_frame_absorbs_remainder():
    # 73 months at a 3-month window: 24 frames, the last one a month longer.
    start = parse_timestamp("2015-05-01T00:00:00Z")
    end = add_months(start, 73)
    spec = FrameSpec(start, end, window_months=3)
    assert spec.frame_count == 24
    bounds = spec.boundaries()
    assert bounds[0][0] == start
    assert bounds[-1][1] == end
    assert bounds[-1][1] - bounds[-1][0] > bounds[0][1] - bounds[0][0]
    # frames tile the span without gaps
    for (a, b), (c, d) in zip(bounds, bounds[1:]):
        assert b == c


def test_frame_of_boundaries():
    start = parse_timestamp("2021-01-01T00:00:00Z")
    spec = FrameSpec(start, add_months(start, 4), window_months=2)
    assert spec.frame_count == 2
    assert spec.frame_of(start) == 0
    assert spec.frame_of(add_months(start, 2)) == 1  # boundary opens next frame
    assert spec.frame_of(add_months(start, 4) - timedelta(seconds=1)) == 1
    with pytest.raises(ValueError):
        spec.frame_of(start - timedelta(seconds=1))
    with pytest.raises(ValueError):
        spec.frame_of(add_months(start, 4))


def test_timedelta_window():
    start = parse_timestamp("2021-01-01T00:00:00Z")
    spec = FrameSpec(start, start + timedelta(days=10), window=timedelta(days=3))
    assert spec.frame_count == 3  # 3+3+4 days
    assert spec.frame_of(start + timedelta(days=9, hours=23)) == 2


def test_spec_for_records_covers_everything():
    records = [_team("t1", ["a", "b"], ts="2021-01-15T00:00:00Z"),
               _team("t2", ["a", "b"], ts="2021-07-02T13:00:00Z")]
    spec = spec_for_records(records, window_months=3)
    for r in records:
        spec.frame_of(r.timestamp)


# --- network building -----------------------------------------------------

def test_build_frames_places_links_and_counts_weights():
    records = [
        _team("t1", ["a", "b"], ts="2021-01-10T00:00:00Z"),
        _team("t2", ["a", "b"], ts="2021-01-20T00:00:00Z"),
        _team("t3", ["a", "c"], ts="2021-02-10T00:00:00Z"),
    ]
    start = parse_timestamp("2021-01-01T00:00:00Z")
    spec = FrameSpec(start, add_months(start, 2), window_months=1)
    net = build_frames(expand_teams(records), spec, team_participations(records))
    assert net.frame_count == 2
    assert net.frames[0].weight("a", "b") == 2
    assert net.frames[1].weight("a", "c") == 1
    assert net.members == frozenset({"a", "b", "c"})


def test_build_frames_rejects_outside_span():
    records = [_team("t1", ["a", "b"], ts="2021-01-10T00:00:00Z")]
    start = parse_timestamp("2022-01-01T00:00:00Z")
    spec = FrameSpec(start, add_months(start, 1), window_months=1)
    with pytest.raises(ValueError) as err:
        build_frames(expand_teams(records), spec)
    assert "t1" in str(err.value) or "2021" in str(err.value)


def test_typed_network_filters_one_activity_type():
    records = [
        _team("t1", ["a", "b"], ts="2021-01-10T00:00:00Z", kind="A"),
        _team("t2", ["b", "c"], ts="2021-01-12T00:00:00Z", kind="B"),
    ]
    spec = spec_for_records(records, window_months=1)
    links = expand_teams(records)
    net_a = typed_network(links, spec, "A", team_participations(records))
    assert net_a.frames[0].weight("a", "b") == 1
    assert net_a.frames[0].weight("b", "c") == 0


def test_network_from_records_shortcut():
    records = [_team("t1", ["a", "b"], ts="2021-01-10T00:00:00Z")]
    net = network_from_records(records, window_months=1)
    assert net.frame_count == 1
    assert net.frames[0].weight("a", "b") == 1
