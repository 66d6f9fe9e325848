from dataclasses import replace

from conftest import two_client_toy

from fedsched import schedule_multiplexed, schedule_on_demand, validate


def swap(sched, client_id, phase, **changes):
    ivs = tuple(replace(iv, **changes) if (iv.client_id, iv.phase) == (client_id, phase) else iv
                for iv in sched.intervals)
    return replace(sched, intervals=ivs)


def kinds(violations):
    return {(v.kind, v.constraint, v.client_id) for v in violations}


def test_clean_schedules():
    tg, task = two_client_toy()
    for channel in ("per_direction", "joint"):
        assert validate(schedule_on_demand(tg, task, channel), task, tg) == []
    assert validate(schedule_multiplexed(tg, task), task, tg) == []


def test_training_before_model_arrives():
    tg, task = two_client_toy()
    s = schedule_on_demand(tg, task)
    dist_end = s.interval("c2", "distribute").end_s
    bad = swap(s, "c2", "train", start_s=dist_end - 1.0, end_s=dist_end + 9.0)
    assert ("precedence", "train_after_distribute", "c2") in kinds(validate(bad, task, tg))


def test_upload_before_training_ends():
    tg, task = two_client_toy()
    s = schedule_on_demand(tg, task)
    up = s.interval("c1", "upload")
    bad = swap(s, "c1", "upload", start_s=up.start_s - 2.0, end_s=up.end_s - 2.0)
    assert ("precedence", "upload_after_train", "c1") in kinds(validate(bad, task, tg))


def test_overlapping_downloads():
    tg, task = two_client_toy()
    s = schedule_on_demand(tg, task)
    bad = swap(s, "c2", "distribute", start_s=2.0, end_s=6.0)
    bad = swap(bad, "c2", "train", start_s=6.0, end_s=16.0)
    conflicts = [v for v in validate(bad, task, tg) if v.kind == "channel_conflict"]
    assert [(v.constraint, v.client_id) for v in conflicts] == [("distribute", "c2")]


def test_joint_mode_conflict_between_directions():
    tg, task = two_client_toy()
    s = replace(schedule_on_demand(tg, task, "joint"), channel="joint")
    # pull c1's upload back so it overlaps c2's download window [4, 8]
    bad = swap(s, "c1", "upload", start_s=6.0, end_s=10.0)
    bad = swap(bad, "c1", "train", start_s=4.0, end_s=6.0)
    found = kinds(validate(bad, task, tg))
    assert ("channel_conflict", "joint", "c1") in found or ("channel_conflict", "joint", "c2") in found


def test_wrong_durations():
    tg, task = two_client_toy()
    s = schedule_on_demand(tg, task)
    bad = swap(s, "c1", "train", end_s=s.interval("c1", "train").end_s + 1e-6)
    found = kinds(validate(bad, task, tg))
    assert ("duration", "train_duration", "c1") in found
    bad = swap(s, "c2", "upload", end_s=21.0)
    found = kinds(validate(bad, task, tg))
    assert ("duration", "upload_duration", "c2") in found
    assert ("makespan", "makespan_is_last_upload", None) in found


def test_tolerance_absorbs_float_noise():
    tg, task = two_client_toy()
    s = schedule_on_demand(tg, task)
    ok = swap(s, "c1", "train", start_s=4.0 + 5e-10, end_s=14.0 + 5e-10)
    assert validate(ok, task, tg) == []


def test_missing_interval():
    tg, task = two_client_toy()
    s = schedule_on_demand(tg, task)
    short = replace(s, intervals=tuple(iv for iv in s.intervals if iv.phase != "upload" or iv.client_id != "c2"))
    assert kinds(validate(short, task, tg)) == {("missing_interval", "one_interval_per_phase", "c2")}


def test_multiplexed_bit_shortfall():
    tg, task = two_client_toy()
    s = schedule_multiplexed(tg, task)
    iv = s.interval("c1", "upload")
    seg = list(iv.segments)
    seg[-1] = (seg[-1][0], seg[-1][1], seg[-1][2] * 0.9)
    bad = swap(s, "c1", "upload", segments=tuple(seg))
    assert ("duration", "upload_bits_delivered", "c1") in kinds(validate(bad, task, tg))


def test_path_from_wrong_window():
    tg, task = two_client_toy()
    s = schedule_on_demand(tg, task)
    up = s.interval("c2", "upload")
    bad = swap(s, "c2", "upload", path=replace(up.path, window_index=0))
    assert ("path", "path_window", "c2") in kinds(validate(bad, task, tg))
